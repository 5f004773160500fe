//! Average secrecy capacity under transmit/receive antenna selection.
//!
//! Bob's SNR after selecting the best of `N = N_A N_B` branches has CDF
//! `(1 − e^{−z/γ̄_M})^N`; Eve sees the companion branch of the selected pair,
//! exponentially distributed with mean `γ̄_E` and correlated with Bob's through
//! `ρ`. Everything is computed in nats and reported in bits.
//!
//! Two independent evaluations are provided. [`asc_closed_form`] writes the
//! capacity as an alternating binomial sum over `k` whose terms need only
//! `e^x E1(x)` and two damped one-dimensional Marcum-Q integrals.
//! [`asc_quadrature`] integrates the instantaneous capacity against the joint
//! density directly.

use std::fmt;
use std::str::FromStr;

use crate::channel::{mean_snrs, SystemParams};
use crate::error::{domain, Error, Result};
use crate::quad::{self, QuadEstimate, QuadOptions};
use crate::scalar::{binomial, CompensatedSum, Real};
use crate::specfun;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AscMethod {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

impl AscMethod {
    pub const ALL: [AscMethod; 3] = [Self::ClosedForm, Self::Quadrature, Self::MonteCarlo];

    pub fn name(self) -> &'static str {
        match self {
            Self::ClosedForm => "closed_form",
            Self::Quadrature => "quadrature",
            Self::MonteCarlo => "monte_carlo",
        }
    }
}

impl fmt::Display for AscMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AscMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "closed_form" | "closed" | "cf" => Ok(Self::ClosedForm),
            "quadrature" | "quad" => Ok(Self::Quadrature),
            "monte_carlo" | "mc" => Ok(Self::MonteCarlo),
            other => Err(Error::Parse(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AscDiagnostics<T> {
    /// Signed contribution of each `k` to the alternating sum, bits.
    pub terms: Vec<T>,
    /// Absolute error estimate of `value`, bits. For Monte Carlo this is the
    /// standard error.
    pub error_estimate: T,
    /// `|value| / max |term|`; small values mean heavy cancellation.
    pub cancellation: T,
    pub evaluations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AscResult<T> {
    /// Average secrecy capacity, bits/s/Hz.
    pub value: T,
    pub method: AscMethod,
    pub diagnostics: AscDiagnostics<T>,
}

/// `f_Z(z) = (N/γ̄_M) e^{−z/γ̄_M} (1 − e^{−z/γ̄_M})^{N−1}`
pub fn pdf_bob_as<T: Real>(z: T, params: &SystemParams<T>) -> Result<T> {
    if !(z >= T::zero()) {
        return Err(domain("pdf_bob_as", format!("z must be >= 0, got {z}")));
    }
    Ok(bob_density(z, params.gamma_m_bar(), params.branches()))
}

fn bob_density<T: Real>(z: T, gm: T, n: usize) -> T {
    let u = z / gm;
    let n_t = T::from_usize_lossy(n);
    n_t / gm * (-u).exp() * bob_cdf_power(u, n - 1)
}

/// `(1 − e^{−u})^p`
fn bob_cdf_power<T: Real>(u: T, p: usize) -> T {
    if p == 0 {
        T::one()
    } else {
        (-(-u).exp_m1()).powi(p as i32)
    }
}

fn eve_mean<T: Real>(op: &'static str, params: &SystemParams<T>) -> Result<T> {
    let (_, ge) = mean_snrs(params)?;
    if ge <= T::zero() {
        return Err(Error::DegenerateEve { op });
    }
    Ok(ge)
}

/// `f_Y(y) = e^{−y/γ̄_E}/γ̄_E`
pub fn pdf_eve<T: Real>(y: T, params: &SystemParams<T>) -> Result<T> {
    if !(y >= T::zero()) {
        return Err(domain("pdf_eve", format!("y must be >= 0, got {y}")));
    }
    let ge = eve_mean("pdf_eve", params)?;
    Ok((-y / ge).exp() / ge)
}

/// Bivariate exponential density of one correlated branch pair, built on the
/// scaled Bessel function so that large arguments do not overflow.
#[derive(Clone, Copy, Debug)]
struct PairDensity<T> {
    gm: T,
    ge: T,
    rho: T,
    s: T,
    pref: T,
}

impl<T: Real> PairDensity<T> {
    fn new(gm: T, ge: T, rho: T) -> Self {
        let s = T::one() - rho * rho;
        Self {
            gm,
            ge,
            rho,
            s,
            pref: T::one() / (gm * ge * s),
        }
    }

    #[inline]
    fn eval(&self, z: T, y: T) -> T {
        let u = z / self.gm;
        let v = y / self.ge;
        let arg = T::lit(2.0) * self.rho * (u * v).sqrt() / self.s;
        let i0s = specfun::bessel_i0_scaled(arg).unwrap_or_else(|_| T::nan());
        self.pref * (arg - (u + v) / self.s).exp() * i0s
    }
}

fn check_joint_args<T: Real>(z: T, y: T, params: &SystemParams<T>) -> Result<()> {
    if !(z >= T::zero() && y >= T::zero()) {
        return Err(domain("joint_pdf", format!("z, y must be >= 0, got ({z}, {y})")));
    }
    if !(params.rho >= T::zero() && params.rho < T::one()) {
        return Err(domain("joint_pdf", format!("rho must lie in [0, 1), got {}", params.rho)));
    }
    Ok(())
}

/// Joint density of Bob's selected SNR and Eve's SNR on the same pair,
/// `N (1 − e^{−z/γ̄_M})^{N−1} f(z, y)` with `f` the single-pair bivariate
/// exponential density.
pub fn joint_pdf<T: Real>(z: T, y: T, params: &SystemParams<T>) -> Result<T> {
    check_joint_args(z, y, params)?;
    let ge = eve_mean("joint_pdf", params)?;
    let gm = params.gamma_m_bar();
    let n = params.branches();
    let pair = PairDensity::new(gm, ge, params.rho);
    Ok(T::from_usize_lossy(n) * bob_cdf_power(z / gm, n - 1) * pair.eval(z, y))
}

/// The same density written as the alternating sum over `k`. Slower and
/// subject to cancellation; kept as a cross-check.
pub fn joint_pdf_series<T: Real>(z: T, y: T, params: &SystemParams<T>) -> Result<T> {
    check_joint_args(z, y, params)?;
    let ge = eve_mean("joint_pdf_series", params)?;
    let gm = params.gamma_m_bar();
    let n = params.branches();
    let rho = params.rho;
    let s = T::one() - rho * rho;
    let arg = T::lit(2.0) * rho / s * (z * y / (gm * ge)).sqrt();
    let i0s = specfun::bessel_i0_scaled(arg)?;
    let mut acc = CompensatedSum::new();
    for k in 0..n {
        let kf = T::from_usize_lossy(k);
        let sign = if k % 2 == 0 { T::one() } else { -T::one() };
        let expo = -((kf + T::one() / s) * z / gm + y / (s * ge)) + arg;
        acc.add(sign * binomial::<T>(n - 1, k) * expo.exp() * i0s);
    }
    Ok(T::from_usize_lossy(n) / (gm * ge * s) * acc.value())
}

/// `[log2(1+γ_M) − log2(1+γ_E)]⁺`
pub fn instant_secrecy<T: Real>(gamma_m: T, gamma_e: T) -> T {
    if gamma_m <= gamma_e {
        return T::zero();
    }
    (gamma_m.ln_1p() - gamma_e.ln_1p()) / T::LN_2()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchConstants<T> {
    pub k: usize,
    /// `θ_k = k(1−ρ²) + 1`
    pub theta: T,
    /// `a_k = ρ²/θ_k`
    pub a: T,
    /// `C(N−1, k)`
    pub binomial: T,
    /// `(−1)^k`
    pub sign: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClosedFormConstants<T> {
    pub branches: usize,
    pub rho: T,
    pub gamma_m_bar: T,
    pub gamma_e_bar: T,
    /// `A = √(2/((1−ρ²) γ̄_M))`
    pub big_a: T,
    /// `B = √(2/((1−ρ²) γ̄_E))`, absent when `γ̄_E = 0`: the caller must then use
    /// the Bob-only limit.
    pub big_b: Option<T>,
    pub terms: Vec<BranchConstants<T>>,
}

pub fn closed_form_constants<T: Real>(params: &SystemParams<T>) -> Result<ClosedFormConstants<T>> {
    params.validate()?;
    let (gm, ge) = mean_snrs(params)?;
    let rho = params.rho;
    let s = T::one() - rho * rho;
    let n = params.branches();
    let terms = (0..n)
        .map(|k| {
            let theta = T::from_usize_lossy(k) * s + T::one();
            BranchConstants {
                k,
                theta,
                a: rho * rho / theta,
                binomial: binomial(n - 1, k),
                sign: if k % 2 == 0 { T::one() } else { -T::one() },
            }
        })
        .collect();
    Ok(ClosedFormConstants {
        branches: n,
        rho,
        gamma_m_bar: gm,
        gamma_e_bar: ge,
        big_a: (T::lit(2.0) / (s * gm)).sqrt(),
        big_b: (ge > T::zero()).then(|| (T::lit(2.0) / (s * ge)).sqrt()),
        terms,
    })
}

/// `∫₀^∞ e^{−rate·t} g(t) / (1+t) dt` for `0 <= g <= 1`.
fn damped_integral<T: Real, G: FnMut(T) -> T>(
    rate: T,
    mut g: G,
    opts: &QuadOptions<T>,
) -> Result<QuadEstimate<T>> {
    let cutoff = T::lit(42.0) / rate;
    let first = T::lit(1e-4) * T::one().min(T::one() / rate);
    let pts = quad::geometric_breakpoints(T::zero(), cutoff, first, 0);
    quad::integrate(|t| (-rate * t).exp() * g(t) / (T::one() + t), &pts, opts)
        .require("asc_closed_form", opts)
}

/// Capacity on one `k` term (nats) and the absolute error of the two
/// integrals that enter it.
fn branch_term<T: Real>(
    c: &ClosedFormConstants<T>,
    b: &BranchConstants<T>,
    opts: &QuadOptions<T>,
) -> Result<(T, T, usize)> {
    let k1 = T::from_usize_lossy(b.k + 1);
    let x = k1 / c.gamma_m_bar;
    let bob = specfun::exp_e1_scaled(x)?;
    let Some(big_b) = c.big_b else {
        return Ok((bob / k1, T::zero(), 0));
    };
    let big_a = c.big_a;
    let rho = c.rho;
    // Both SNRs above the threshold, main-channel share.
    let i4 = damped_integral(
        x,
        |t| {
            let r = t.sqrt();
            specfun::marcum_pair(big_a * rho * r, big_b * r).0
        },
        opts,
    )?;
    // Eve above the threshold while Bob is below it.
    let kappa = k1 / (b.theta * c.gamma_e_bar);
    let (m_scale, n_scale) = (big_a * b.theta.sqrt(), big_b * b.a.sqrt());
    let j3 = damped_integral(
        kappa,
        |t| {
            let r = t.sqrt();
            specfun::marcum_pair(m_scale * r, n_scale * r).1
        },
        opts,
    )?;
    Ok((
        (bob - j3.value - i4.value) / k1,
        (j3.error + i4.error) / k1,
        i4.evaluations + j3.evaluations,
    ))
}

/// Relative size below which the alternating sum is considered cancelled.
pub const CANCELLATION_LIMIT: f64 = 1e-8;

/// Closed-form average secrecy capacity, bits/s/Hz.
///
/// `C̄_s = N Σ_k C(N−1,k) (−1)^k C̄_k` with, writing `x_k = (k+1)/γ̄_M` and
/// `κ_k = (k+1)/(θ_k γ̄_E)`,
///
/// ```text
/// (k+1) C̄_k = e^{x_k} E1(x_k)
///            − ∫₀^∞ e^{−x_k t} Q(Aρ√t, B√t) / (1+t) dt
///            − ∫₀^∞ e^{−κ_k t} [1 − Q(A√(θ_k t), B√(a_k t))] / (1+t) dt
/// ```
///
/// which follows from `ln(1+z) − ln(1+y) = ∫_y^z dt/(1+t)` and the Marcum-Q
/// form of the bivariate exponential survival function. When `γ̄_E = 0` only
/// the first term survives.
pub fn asc_closed_form<T: Real>(params: &SystemParams<T>) -> Result<AscResult<T>> {
    let consts = closed_form_constants(params)?;
    let opts = QuadOptions::new(T::lit(1e-15).max(T::epsilon()), T::lit(1e-12).max(T::epsilon() * T::lit(64.0)));
    let n = T::from_usize_lossy(consts.branches);
    let mut acc = CompensatedSum::new();
    let mut terms = Vec::with_capacity(consts.terms.len());
    let mut err = T::zero();
    let mut evaluations = 0;
    for b in &consts.terms {
        let (value, e, evals) = branch_term(&consts, b, &opts)?;
        let weight = n * b.binomial / T::LN_2();
        let term = b.sign * weight * value;
        acc.add(term);
        terms.push(term);
        err = err + weight * e;
        evaluations += evals;
    }
    let total = acc.value();
    let largest = acc.largest_term();
    let ratio = if largest > T::zero() {
        total.abs() / largest
    } else {
        T::one()
    };
    if ratio < T::lit(CANCELLATION_LIMIT) {
        return Err(Error::Conditioning { ratio: ratio.as_f64() });
    }
    // Rounding can leave a tiny negative value when the true capacity is ~0.
    Ok(AscResult {
        value: total.max(T::zero()),
        method: AscMethod::ClosedForm,
        diagnostics: AscDiagnostics {
            terms,
            error_estimate: err + largest * T::epsilon() * n,
            cancellation: ratio,
            evaluations,
        },
    })
}

fn bob_cutoff<T: Real>(gm: T, n: usize) -> T {
    gm * (T::lit(45.0) + T::from_usize_lossy(n).ln())
}

/// Bob's average capacity under selection, `∫ log2(1+z) f_Z(z) dz`, bits.
/// This is the capacity whenever Eve's SNR is identically zero.
pub fn bob_capacity_quadrature<T: Real>(params: &SystemParams<T>) -> Result<QuadEstimate<T>> {
    let gm = params.gamma_m_bar();
    let n = params.branches();
    let hi = bob_cutoff(gm, n);
    let pts = quad::merge_breakpoints(
        T::zero(),
        hi,
        &[
            quad::geometric_breakpoints(T::zero(), hi, gm, 24),
            quad::geometric_breakpoints(T::zero(), hi, T::one(), 8),
        ],
    );
    let opts = QuadOptions::new(T::lit(1e-15), T::lit(1e-11).max(T::epsilon() * T::lit(64.0)));
    let est = quad::integrate(|z| z.ln_1p() * bob_density(z, gm, n), &pts, &opts)
        .require("asc_quadrature", &opts)?;
    Ok(QuadEstimate {
        value: est.value / T::LN_2(),
        error: est.error / T::LN_2(),
        ..est
    })
}

/// Average secrecy capacity by direct two-dimensional quadrature of the
/// instantaneous capacity against [`joint_pdf`] over `z > y`, bits/s/Hz.
pub fn asc_quadrature<T: Real>(params: &SystemParams<T>) -> Result<AscResult<T>> {
    params.validate()?;
    let (gm, ge) = mean_snrs(params)?;
    let n = params.branches();
    if ge <= T::zero() {
        let est = bob_capacity_quadrature(params)?;
        return Ok(quadrature_result(est.value, est.error, est.evaluations));
    }
    let rho = params.rho;
    let pair = PairDensity::new(gm, ge, rho);
    let n_t = T::from_usize_lossy(n);
    let inner_opts = QuadOptions::new(T::min_positive_value(), T::lit(1e-10).max(T::epsilon() * T::lit(64.0)));
    let outer_opts = QuadOptions::new(T::lit(1e-14), T::lit(1e-8).max(T::epsilon() * T::lit(256.0)));
    let mut inner_failure: Option<Error> = None;
    let mut inner_rel = T::zero();
    let mut evaluations = 0usize;
    let ridge = rho * rho * ge / gm;
    let mut outer = |z: T| -> T {
        if z <= T::zero() {
            return T::zero();
        }
        let lz = z.ln_1p();
        let mut pts = quad::geometric_breakpoints(T::zero(), z, ge.min(z), 16);
        let y_star = ridge * z;
        if y_star > T::zero() && y_star < z {
            pts = quad::merge_breakpoints(T::zero(), z, &[pts, vec![y_star]]);
        }
        let est = quad::integrate(|y| (lz - y.ln_1p()) * pair.eval(z, y), &pts, &inner_opts);
        evaluations += est.evaluations;
        if !est.converged && inner_failure.is_none() {
            inner_failure = Some(Error::Convergence {
                op: "asc_quadrature",
                achieved: est.error.as_f64(),
                target: (inner_opts.rel_tol * est.value.abs()).as_f64(),
            });
        }
        if est.value != T::zero() {
            inner_rel = inner_rel.max(est.error / est.value.abs());
        }
        n_t * bob_cdf_power(z / gm, n - 1) * est.value
    };
    let hi = bob_cutoff(gm, n);
    let pts = quad::merge_breakpoints(
        T::zero(),
        hi,
        &[
            quad::geometric_breakpoints(T::zero(), hi, gm, 24),
            quad::geometric_breakpoints(T::zero(), hi, ge, 8),
        ],
    );
    let est = quad::integrate(&mut outer, &pts, &outer_opts);
    if let Some(e) = inner_failure {
        return Err(e);
    }
    let est = est.require("asc_quadrature", &outer_opts)?;
    let value = est.value / T::LN_2();
    let error = est.error / T::LN_2() + inner_rel * value.abs();
    Ok(quadrature_result(value, error, evaluations + est.evaluations))
}

fn quadrature_result<T: Real>(value: T, error: T, evaluations: usize) -> AscResult<T> {
    AscResult {
        value: value.max(T::zero()),
        method: AscMethod::Quadrature,
        diagnostics: AscDiagnostics {
            terms: Vec::new(),
            error_estimate: error,
            cancellation: T::one(),
            evaluations,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(rho: f64, n: usize, p_dbm: f64, da: f64) -> SystemParams<f64> {
        SystemParams::reference(p_dbm, rho, n, 1, da).unwrap()
    }

    #[test]
    fn instant_secrecy_examples() {
        assert_eq!(instant_secrecy(2.0f64, 2.0), 0.0);
        assert_eq!(instant_secrecy(1.0f64, 3.0), 0.0);
        assert!((instant_secrecy(3.0f64, 1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn constants_examples() {
        let c = closed_form_constants(&params(0.5, 4, 20.0, 0.0)).unwrap();
        assert_eq!(c.terms[0].theta, 1.0);
        assert_eq!(c.terms[0].a, 0.25);
        assert!((c.terms[3].theta - 3.25).abs() < 1e-15);
        assert!((c.terms[3].a - 0.076_923_076_923).abs() < 1e-11);
        assert_eq!(c.terms[1].binomial, 3.0);
        assert_eq!(c.terms[1].sign, -1.0);
        let c0 = closed_form_constants(&params(0.0, 4, 20.0, 0.0)).unwrap();
        assert!(c0.terms.iter().all(|b| b.a == 0.0 && b.theta == (b.k + 1) as f64));
        assert!(closed_form_constants(&params(0.5, 4, 20.0, 1.0)).unwrap().big_b.is_none());
    }

    #[test]
    fn degenerate_eve_is_signalled() {
        let p = params(0.5, 4, 10.0, 1.0);
        assert!(matches!(pdf_eve(0.0, &p), Err(Error::DegenerateEve { .. })));
        assert!(matches!(joint_pdf(1.0, 1.0, &p), Err(Error::DegenerateEve { .. })));
    }

    #[test]
    fn joint_forms_agree() {
        let p = params(0.7, 4, 0.0, 0.0);
        let (gm, ge) = mean_snrs(&p).unwrap();
        for (z, y) in [(0.3 * gm, 0.2 * ge), (gm, ge), (3.0 * gm, 0.5 * ge)] {
            let a = joint_pdf(z, y, &p).unwrap();
            let b = joint_pdf_series(z, y, &p).unwrap();
            assert!((a - b).abs() <= 1e-10 * a, "{a} vs {b}");
        }
    }

    #[test]
    fn independent_single_branch_matches_e1_form() {
        // ρ = 0, one branch: e^{1/γ̄_M}E1(1/γ̄_M) − e^{s}E1(s), s = 1/γ̄_M + 1/γ̄_E
        let p = params(0.0, 1, 0.0, 0.0);
        let (gm, ge) = mean_snrs(&p).unwrap();
        let s = 1.0 / gm + 1.0 / ge;
        let want = (specfun::exp_e1_scaled(1.0 / gm).unwrap() - specfun::exp_e1_scaled(s).unwrap())
            / std::f64::consts::LN_2;
        let got = asc_closed_form(&p).unwrap().value;
        assert!((got - want).abs() < 1e-10 * want);
    }

    #[test]
    fn closed_form_matches_quadrature_spot() {
        for (rho, n, da) in [(0.3, 4, 0.5), (0.7, 1, 0.0), (0.5, 16, 0.0)] {
            let p = params(rho, n, 10.0, da);
            let cf = asc_closed_form(&p).unwrap().value;
            let q = asc_quadrature(&p).unwrap().value;
            assert!((cf - q).abs() < 1e-6 * q, "rho={rho} n={n} da={da}: {cf} vs {q}");
        }
    }

    #[test]
    fn bob_only_when_eve_blind() {
        let p = params(0.5, 4, 10.0, 1.0);
        let cf = asc_closed_form(&p).unwrap().value;
        let q = asc_quadrature(&p).unwrap().value;
        assert!((cf - q).abs() < 1e-9 * q);
        let p2 = p.with_delta_alpha(2.0).unwrap();
        assert_eq!(asc_closed_form(&p2).unwrap().value, cf);
    }

    #[test]
    fn method_names_round_trip() {
        for m in AscMethod::ALL {
            assert_eq!(m.name().parse::<AscMethod>().unwrap(), m);
        }
        assert!("bogus".parse::<AscMethod>().is_err());
    }
}
