//! Globally adaptive Gauss–Kronrod (G10/K21) quadrature.
//!
//! Integrals over `[0, ∞)` are handled by the caller choosing a finite cut-off
//! (all integrands in this crate are exponentially damped) and a geometric
//! initial partition, see [`geometric_breakpoints`].

use crate::error::{Error, Result};
use crate::scalar::Real;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_208_745_815,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

#[derive(Clone, Copy, Debug)]
pub struct QuadOptions<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_intervals: usize,
}

impl<T: Real> Default for QuadOptions<T> {
    fn default() -> Self {
        Self {
            abs_tol: T::lit(1e-14),
            rel_tol: T::lit(1e-11),
            max_intervals: 4000,
        }
    }
}

impl<T: Real> QuadOptions<T> {
    pub fn new(abs_tol: T, rel_tol: T) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    pub fn with_max_intervals(mut self, n: usize) -> Self {
        self.max_intervals = n;
        self
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadEstimate<T> {
    pub value: T,
    pub error: T,
    pub evaluations: usize,
    pub converged: bool,
}

impl<T: Real> QuadEstimate<T> {
    /// Converts a non-converged estimate into [`Error::Convergence`].
    pub fn require(self, op: &'static str, opts: &QuadOptions<T>) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::Convergence {
                op,
                achieved: self.error.as_f64(),
                target: target(opts, self.value).as_f64(),
            })
        }
    }
}

#[derive(Clone, Copy)]
struct Panel<T> {
    a: T,
    b: T,
    value: T,
    error: T,
    splittable: bool,
}

fn target<T: Real>(opts: &QuadOptions<T>, value: T) -> T {
    opts.abs_tol.max(opts.rel_tol * value.abs())
}

fn kronrod21<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> (T, T) {
    let half = T::lit(0.5);
    let center = half * (a + b);
    let h = half * (b - a);
    let fc = f(center);
    let mut res_k = T::lit(WGK[10]) * fc;
    let mut res_g = T::zero();
    let mut fv = [(T::zero(), T::zero()); 10];
    for (j, slot) in fv.iter_mut().enumerate() {
        let dx = h * T::lit(XGK[j]);
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        *slot = (f1, f2);
        res_k = res_k + T::lit(WGK[j]) * (f1 + f2);
        if j % 2 == 1 {
            res_g = res_g + T::lit(WG[j / 2]) * (f1 + f2);
        }
    }
    let mean = half * res_k;
    let mut res_asc = T::lit(WGK[10]) * (fc - mean).abs();
    for (j, (f1, f2)) in fv.iter().enumerate() {
        res_asc = res_asc + T::lit(WGK[j]) * ((*f1 - mean).abs() + (*f2 - mean).abs());
    }
    res_asc = res_asc * h.abs();
    let mut err = ((res_k - res_g) * h).abs();
    if res_asc != T::zero() && err != T::zero() {
        let scaled = (T::lit(200.0) * err / res_asc).powf(T::lit(1.5));
        err = res_asc * scaled.min(T::one());
    }
    let value = res_k * h;
    // Roundoff floor on the error estimate.
    let floor = T::lit(50.0) * T::epsilon() * value.abs();
    (value, err.max(floor))
}

/// Integrates `f` over `[breakpoints[0], breakpoints[last]]`, starting from the
/// given partition and bisecting the panel with the largest error estimate
/// until the global error meets the tolerance.
pub fn integrate<T, F>(mut f: F, breakpoints: &[T], opts: &QuadOptions<T>) -> QuadEstimate<T>
where
    T: Real,
    F: FnMut(T) -> T,
{
    let mut panels: Vec<Panel<T>> = Vec::with_capacity(breakpoints.len() + 64);
    let mut evaluations = 0usize;
    for w in breakpoints.windows(2) {
        if w[1] > w[0] {
            let (value, error) = kronrod21(&mut f, w[0], w[1]);
            evaluations += 21;
            panels.push(Panel {
                a: w[0],
                b: w[1],
                value,
                error,
                splittable: true,
            });
        }
    }
    let span = match (breakpoints.first(), breakpoints.last()) {
        (Some(&lo), Some(&hi)) => (hi - lo).abs(),
        _ => T::zero(),
    };
    loop {
        let total: T = panels.iter().map(|p| p.value).sum();
        let err: T = panels.iter().map(|p| p.error).sum();
        if err <= target(opts, total) {
            return QuadEstimate {
                value: total,
                error: err,
                evaluations,
                converged: true,
            };
        }
        let worst = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| p.splittable)
            .max_by(|x, y| {
                x.1.error
                    .partial_cmp(&y.1.error)
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .map(|(i, _)| i);
        let Some(i) = worst else {
            return QuadEstimate {
                value: total,
                error: err,
                evaluations,
                converged: false,
            };
        };
        if panels.len() >= opts.max_intervals {
            return QuadEstimate {
                value: total,
                error: err,
                evaluations,
                converged: false,
            };
        }
        let p = panels[i];
        let mid = T::lit(0.5) * (p.a + p.b);
        if (p.b - p.a) <= T::lit(1e3) * T::epsilon() * (span + p.a.abs()) || mid <= p.a || mid >= p.b
        {
            panels[i].splittable = false;
            continue;
        }
        let (v1, e1) = kronrod21(&mut f, p.a, mid);
        let (v2, e2) = kronrod21(&mut f, mid, p.b);
        evaluations += 42;
        panels[i] = Panel {
            a: p.a,
            b: mid,
            value: v1,
            error: e1,
            splittable: true,
        };
        panels.push(Panel {
            a: mid,
            b: p.b,
            value: v2,
            error: e2,
            splittable: true,
        });
    }
}

/// Partition of `[lo, hi]` that is geometric around `lo`: `lo`, `lo + scale·2^k`
/// for `k = -depth..`, then `hi`.
///
/// Suits integrands that vary on the length scale `scale` near `lo` and decay
/// slowly after.
pub fn geometric_breakpoints<T: Real>(lo: T, hi: T, scale: T, depth: i32) -> Vec<T> {
    let mut pts = vec![lo];
    if !(hi > lo) {
        return pts;
    }
    let two = T::lit(2.0);
    let mut step = scale * two.powi(-depth);
    while lo + step < hi && pts.len() < 400 {
        pts.push(lo + step);
        step = step * two;
    }
    pts.push(hi);
    pts
}

/// Merges several sorted breakpoint lists into one sorted, deduplicated list
/// clipped to `[lo, hi]`.
pub fn merge_breakpoints<T: Real>(lo: T, hi: T, lists: &[Vec<T>]) -> Vec<T> {
    let mut all: Vec<T> = lists
        .iter()
        .flatten()
        .copied()
        .filter(|&x| x > lo && x < hi)
        .collect();
    all.push(lo);
    all.push(hi);
    all.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    all.dedup_by(|a, b| (*a - *b).abs() <= T::epsilon() * b.abs());
    all
}
