//! Special functions used by the channel and secrecy models.
//!
//! All routines are real-argument only. Where the natural value over- or
//! underflows (I0 for large arguments, E1 next to a growing exponential) an
//! exponentially scaled variant is provided and is what the rest of the crate
//! calls.

use crate::error::{domain, Error, Result};
use crate::scalar::Real;

/// Accuracy contract for the special functions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance<T> {
    pub rel: T,
    pub abs: T,
}

impl<T: Real> Default for Tolerance<T> {
    fn default() -> Self {
        Self {
            rel: T::lit(1e-10),
            abs: T::lit(1e-12),
        }
    }
}

impl<T: Real> Tolerance<T> {
    pub fn new(rel: T, abs: T) -> Result<Self> {
        if !(rel > T::zero() && abs > T::zero()) {
            return Err(domain("tolerance", "rel and abs must be positive"));
        }
        Ok(Self { rel, abs })
    }

    pub fn accepts(&self, actual: T, expected: T) -> bool {
        (actual - expected).abs() <= self.abs.max(self.rel * expected.abs())
    }
}

fn finite<T: Real>(op: &'static str, x: T) -> Result<T> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(domain(op, format!("argument must be finite, got {x}")))
    }
}

// ---------------------------------------------------------------------------
// Bessel J0

/// Bessel function of the first kind, order zero.
///
/// Power series for `|x| <= 10`, Miller backward recurrence normalised by
/// `J0 + 2 Σ J_2k = 1` up to 60, Hankel asymptotic expansion beyond.
pub fn bessel_j0<T: Real>(x: T) -> Result<T> {
    let x = finite("bessel_j0", x)?.abs();
    Ok(if x <= T::lit(10.0) {
        j0_series(x)
    } else if x <= T::lit(60.0) {
        j0_miller(x)
    } else {
        j0_hankel(x)
    })
}

fn j0_series<T: Real>(x: T) -> T {
    let q = T::lit(0.25) * x * x;
    let mut term = T::one();
    let mut sum = T::one();
    let mut k = 1usize;
    loop {
        let kf = T::from_usize_lossy(k);
        term = -term * q / (kf * kf);
        sum = sum + term;
        if term.abs() <= T::epsilon() * T::lit(0.01) && kf * kf > q {
            break;
        }
        k += 1;
        if k > 500 {
            break;
        }
    }
    sum
}

fn j0_miller<T: Real>(x: T) -> T {
    let xf = x.as_f64();
    let start = xf + 30.0 + (40.0 * xf).sqrt();
    let m = 2 * (start as usize).div_ceil(2);
    let two_over_x = T::lit(2.0) / x;
    let big = T::lit(1e250);
    let mut bjp = T::zero();
    let mut bj = T::lit(1e-30);
    let mut norm = T::zero();
    let mut j = m;
    while j > 0 {
        let bjm = T::from_usize_lossy(j) * two_over_x * bj - bjp;
        bjp = bj;
        bj = bjm;
        j -= 1;
        if bj.abs() > big {
            let s = T::one() / big;
            bj = bj * s;
            bjp = bjp * s;
            norm = norm * s;
        }
        if j.is_multiple_of(2) && j > 0 {
            norm = norm + T::lit(2.0) * bj;
        }
    }
    norm = norm + bj;
    bj / norm
}

fn j0_hankel<T: Real>(x: T) -> T {
    // a_k = Π_{j<=k} (-(2j-1)^2) / (k! 8^k); P takes even k, Q odd k.
    let mut a = T::one();
    let mut p = T::one();
    let mut q = T::zero();
    let mut xp = T::one();
    let mut prev = T::infinity();
    for k in 1..60usize {
        let kf = T::from_usize_lossy(k);
        let odd = T::lit((2 * k - 1) as f64);
        a = -a * odd * odd / (T::lit(8.0) * kf);
        xp = xp * x;
        let term = a / xp;
        if term.abs() >= prev || term.abs() < T::epsilon() * T::lit(1e-3) {
            break;
        }
        prev = term.abs();
        // (-1)^floor(k/2) sign pattern of the P/Q split
        match k % 4 {
            0 => p = p + term,
            1 => q = q + term,
            2 => p = p - term,
            _ => q = q - term,
        }
    }
    let chi = x - T::FRAC_PI_4();
    (T::lit(2.0) / (T::PI() * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

// ---------------------------------------------------------------------------
// Bessel I0

const I0_SERIES_MAX: f64 = 15.0;

/// Modified Bessel function of the first kind, order zero.
///
/// Returns [`Error::Range`] when `I0(x)` overflows; use [`bessel_i0_scaled`].
pub fn bessel_i0<T: Real>(x: T) -> Result<T> {
    let x = finite("bessel_i0", x)?.abs();
    let v = if x <= T::lit(I0_SERIES_MAX) {
        i0_series(x)
    } else {
        i0_scaled_asymptotic(x) * x.exp()
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Range {
            op: "bessel_i0",
            hint: "bessel_i0_scaled",
        })
    }
}

/// `e^{-|x|} I0(x)`, finite for every finite `x`.
pub fn bessel_i0_scaled<T: Real>(x: T) -> Result<T> {
    let x = finite("bessel_i0_scaled", x)?.abs();
    Ok(if x <= T::lit(I0_SERIES_MAX) {
        i0_series(x) * (-x).exp()
    } else {
        i0_scaled_asymptotic(x)
    })
}

fn i0_series<T: Real>(x: T) -> T {
    let q = T::lit(0.25) * x * x;
    let mut term = T::one();
    let mut sum = T::one();
    let mut k = 1usize;
    loop {
        let kf = T::from_usize_lossy(k);
        term = term * q / (kf * kf);
        sum = sum + term;
        if term <= T::epsilon() * T::lit(0.01) * sum || k > 500 {
            break;
        }
        k += 1;
    }
    sum
}

fn i0_scaled_asymptotic<T: Real>(x: T) -> T {
    let mut term = T::one();
    let mut sum = T::one();
    for k in 1..80usize {
        let odd = T::lit((2 * k - 1) as f64);
        let next = term * odd * odd / (T::lit(8.0) * T::from_usize_lossy(k) * x);
        if next >= term || next < T::epsilon() * T::lit(1e-3) {
            break;
        }
        term = next;
        sum = sum + term;
    }
    sum / (T::lit(2.0) * T::PI() * x).sqrt()
}

// ---------------------------------------------------------------------------
// Exponential integrals

#[allow(clippy::excessive_precision)]
const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082;

fn positive<T: Real>(op: &'static str, x: T) -> Result<T> {
    if x > T::zero() && x.is_finite() {
        Ok(x)
    } else {
        Err(domain(op, format!("argument must be positive and finite, got {x}")))
    }
}

/// Convergent series part of `E1(x) = -γ - ln x - Σ (-x)^k / (k k!)`.
fn e1_series<T: Real>(x: T) -> T {
    let mut term = T::one();
    let mut sum = T::zero();
    for k in 1..200usize {
        let kf = T::from_usize_lossy(k);
        term = -term * x / kf;
        let contrib = term / kf;
        sum = sum + contrib;
        if contrib.abs() <= T::epsilon() * T::lit(0.01) * sum.abs().max(T::epsilon()) {
            break;
        }
    }
    -T::lit(EULER_GAMMA) - x.ln() - sum
}

/// Tail `R` of the continued fraction `e^x E1(x) = 1/(x + 1 - R)`, where
/// `R = 1/(x + 3 - 4/(x + 5 - 9/(x + 7 - ...)))`. Valid for `x >= 1`.
fn e1_cf_tail<T: Real>(x: T) -> T {
    let tiny = T::min_positive_value() * T::lit(1e10);
    let b0 = x + T::lit(3.0);
    let mut f = b0;
    let mut c = f;
    let mut d = T::zero();
    for j in 1..500usize {
        let jp = T::from_usize_lossy(j + 1);
        let a = -jp * jp;
        let b = x + T::lit(3.0) + T::lit(2.0) * T::from_usize_lossy(j);
        d = b + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = T::one() / d;
        let delta = c * d;
        f = f * delta;
        if (delta - T::one()).abs() <= T::epsilon() * T::lit(0.5) {
            break;
        }
    }
    T::one() / f
}

/// Exponential integral `E1(x) = ∫_x^∞ e^{-t}/t dt` for `x > 0`.
pub fn exp_e1<T: Real>(x: T) -> Result<T> {
    let x = positive("exp_e1", x)?;
    Ok(if x <= T::one() {
        e1_series(x)
    } else {
        exp_e1_scaled(x)? * (-x).exp()
    })
}

/// `e^x E1(x)`, computed without forming `e^x`.
pub fn exp_e1_scaled<T: Real>(x: T) -> Result<T> {
    let x = positive("exp_e1_scaled", x)?;
    Ok(if x <= T::one() {
        e1_series(x) * x.exp()
    } else {
        T::one() / (x + T::one() - e1_cf_tail(x))
    })
}

/// `1 - x e^x E1(x)` without the cancellation that the direct form suffers
/// for large `x` (where `x e^x E1(x) → 1`).
pub fn one_minus_x_e1_scaled<T: Real>(x: T) -> Result<T> {
    let x = positive("one_minus_x_e1_scaled", x)?;
    Ok(if x <= T::one() {
        T::one() - x * exp_e1_scaled(x)?
    } else {
        let r = e1_cf_tail(x);
        (T::one() - r) / (x + T::one() - r)
    })
}

/// `Ei(-x) = -E1(x)` for `x > 0`.
pub fn exp_ei_neg<T: Real>(x: T) -> Result<T> {
    positive("exp_ei_neg", x)?;
    Ok(-exp_e1(x)?)
}

/// Upper incomplete gamma `Γ(1, z) = e^{-z}`.
pub fn upper_gamma_1<T: Real>(z: T) -> Result<T> {
    let z = finite("upper_gamma_1", z)?;
    if z < T::zero() {
        return Err(domain("upper_gamma_1", format!("z must be >= 0, got {z}")));
    }
    Ok((-z).exp())
}

// ---------------------------------------------------------------------------
// Marcum Q

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln(n!)` via the Lanczos approximation.
pub(crate) fn ln_factorial<T: Real>(n: usize) -> T {
    if n < 2 {
        return T::zero();
    }
    let x = n as f64;
    let mut a = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    T::lit(0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln())
}

fn ln_poisson_pmf<T: Real>(j: usize, mu: T) -> T {
    -mu + T::from_usize_lossy(j) * mu.ln() - ln_factorial::<T>(j)
}

/// `ln P(Pois(mu) <= k)`; `-inf` for `k < 0`.
fn ln_poisson_cdf<T: Real>(k: i64, mu: T) -> T {
    if k < 0 {
        return T::neg_infinity();
    }
    let k = k as usize;
    let lp = ln_poisson_pmf(k, mu);
    let kf = T::from_usize_lossy(k);
    if kf < mu {
        // Left tail: walk down from k with ratio i/mu < 1.
        let mut term = T::one();
        let mut s = T::one();
        let mut i = k;
        while i > 0 {
            term = term * T::from_usize_lossy(i) / mu;
            s = s + term;
            if term <= T::epsilon() * T::lit(0.01) * s {
                break;
            }
            i -= 1;
        }
        lp + s.ln()
    } else {
        // Right tail: CDF = 1 - Σ_{i>k} p(i), with p(i+1)/p(i) = mu/(i+1) < 1.
        let mut term = T::one();
        let mut s = T::zero();
        let mut i = k;
        loop {
            i += 1;
            term = term * mu / T::from_usize_lossy(i);
            s = s + term;
            if term <= T::epsilon() * T::lit(0.01) * s || i > k + 20_000 {
                break;
            }
        }
        (-(lp + s.ln()).exp()).ln_1p()
    }
}

fn ln_add_exp<T: Real>(a: T, b: T) -> T {
    if a == T::neg_infinity() {
        return b;
    }
    if b == T::neg_infinity() {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

pub(crate) const MARCUM_MAX_TERMS: usize = 10_000;

/// `Σ_j Pois(j; λ) · P(Pois(μ) <= j - shift)` with all terms positive.
fn poisson_mixture<T: Real>(lambda: T, mu: T, shift: i64) -> T {
    let lf = lambda.as_f64();
    let j0 = (lf - 12.0 * lf.sqrt() - 12.0).floor().max(0.0) as usize;
    let ln_lambda = lambda.ln();
    let ln_mu = mu.ln();
    let mut lp = ln_poisson_pmf(j0, lambda);
    let i0 = j0 as i64 - shift;
    let mut lf_cdf = ln_poisson_cdf(i0, mu);
    // ln pmf_mu(i0) tracked for the forward CDF recursion.
    let mut lq = if i0 >= 0 {
        ln_poisson_pmf(i0 as usize, mu)
    } else {
        T::neg_infinity()
    };
    let thresh = T::epsilon() * T::lit(0.5);
    let mut sum = T::zero();
    let mut j = j0;
    for _ in 0..MARCUM_MAX_TERMS {
        let term = (lp + lf_cdf).exp();
        sum = sum + term;
        let jf = T::from_usize_lossy(j);
        if jf > lambda {
            let tail = lp.exp() * lambda / (jf + T::one() - lambda);
            if tail <= thresh * sum && term <= thresh * sum {
                break;
            }
        }
        // advance j -> j + 1
        j += 1;
        lp = lp + ln_lambda - T::from_usize_lossy(j).ln();
        let i = j as i64 - shift;
        lq = if i == 0 {
            -mu
        } else if i > 0 {
            lq + ln_mu - T::from_usize_lossy(i as usize).ln()
        } else {
            T::neg_infinity()
        };
        lf_cdf = ln_add_exp(lf_cdf, lq);
    }
    sum
}

fn marcum_args<T: Real>(m: T, n: T) -> Result<(T, T)> {
    let m = finite("marcum_q1", m)?;
    let n = finite("marcum_q1", n)?;
    if m < T::zero() || n < T::zero() {
        return Err(domain(
            "marcum_q1",
            format!("arguments must be non-negative, got ({m}, {n})"),
        ));
    }
    Ok((m, n))
}

/// Returns `(Q, 1 - Q)`, each computed from whichever Poisson mixture is the
/// small one, so both are accurate.
pub(crate) fn marcum_pair<T: Real>(m: T, n: T) -> (T, T) {
    if n == T::zero() {
        return (T::one(), T::zero());
    }
    let y = T::lit(0.5) * n * n;
    if m == T::zero() {
        let q = (-y).exp();
        return (q, -(-y).exp_m1());
    }
    let x = T::lit(0.5) * m * m;
    if n > m {
        // Q = P(L <= M), M ~ Pois(x), L ~ Pois(y)
        let q = poisson_mixture(x, y, 0);
        (q, T::one() - q)
    } else {
        // 1 - Q = P(M < L)
        let c = poisson_mixture(y, x, 1);
        (T::one() - c, c)
    }
}

/// First-order Marcum Q function
/// `Q(m, n) = ∫_n^∞ x exp(-(x² + m²)/2) I0(m x) dx`.
///
/// Evaluated as the Poisson mixture `Q(m, n) = P(L <= M)` with independent
/// `M ~ Pois(m²/2)`, `L ~ Pois(n²/2)`; every term is positive, so there is no
/// cancellation. Terms are summed until they fall below half a unit roundoff of
/// the running sum, capped at 10 000 terms.
pub fn marcum_q1<T: Real>(m: T, n: T) -> Result<T> {
    let (m, n) = marcum_args(m, n)?;
    Ok(marcum_pair(m, n).0.max(T::zero()).min(T::one()))
}

/// `1 - Q(m, n)`, accurate when `Q` is close to one.
pub fn marcum_q1_complement<T: Real>(m: T, n: T) -> Result<T> {
    let (m, n) = marcum_args(m, n)?;
    Ok(marcum_pair(m, n).1.max(T::zero()).min(T::one()))
}
