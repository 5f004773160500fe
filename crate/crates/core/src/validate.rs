//! Self-check suites run by the `validate` command.
//!
//! `Fast` exercises every layer on small grids and finishes in seconds.
//! `Full` adds the 10^6-trial Monte Carlo comparisons over the whole
//! agreement grid.

use std::time::Instant;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{eve_mean_snr, EveMeanForm, SystemParams};
use crate::montecarlo::{run_asc_mc, McConfig};
use crate::quad::{self, QuadOptions};
use crate::secrecy::{asc_closed_form, asc_quadrature, joint_pdf, pdf_bob_as};
use crate::specfun;
use crate::wfrft::{self, Signal, Wfrft};
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Level {
    #[default]
    Fast,
    Full,
}

impl std::str::FromStr for Level {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "fast" => Ok(Self::Fast),
            "full" => Ok(Self::Full),
            other => Err(crate::Error::Parse(format!("unknown level '{other}' (fast or full)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ValidateOptions {
    pub level: Level,
    /// Form of Eve's mean SNR under test. Anything but `Exact` must make the
    /// Eve suite fail.
    pub eve_form: EveMeanForm,
    pub seed: u64,
    pub workers: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub name: &'static str,
    pub passed: bool,
    /// First failure, or a one-line summary.
    pub detail: String,
    pub seconds: f64,
}

struct Checker {
    checks: usize,
    failure: Option<String>,
}

impl Checker {
    fn new() -> Self {
        Self {
            checks: 0,
            failure: None,
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok && self.failure.is_none() {
            self.failure = Some(what());
        }
    }

    fn close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
        (a - b).abs() <= abs.max(rel * b.abs())
    }

    fn finish(self) -> (bool, String) {
        match self.failure {
            Some(f) => (false, f),
            None => (true, format!("{} checks", self.checks)),
        }
    }
}

fn run_suite(name: &'static str, f: impl FnOnce(&mut Checker) -> Result<()>) -> SuiteReport {
    let t = Instant::now();
    let mut c = Checker::new();
    let (passed, detail) = match f(&mut c) {
        Ok(()) => c.finish(),
        Err(e) => (false, format!("error: {e}")),
    };
    SuiteReport {
        name,
        passed,
        detail,
        seconds: t.elapsed().as_secs_f64(),
    }
}

fn specfun_suite(c: &mut Checker) -> Result<()> {
    let opts = QuadOptions::new(1e-15, 1e-12);
    for x in [0.0, 0.5, 2.0, 7.5, 15.0, 40.0] {
        let j0 = quad::integrate(|t: f64| (x * t.sin()).cos(), &[0.0, std::f64::consts::PI], &opts).value
            / std::f64::consts::PI;
        let got = specfun::bessel_j0(x)?;
        c.check(Checker::close(got, j0, 1e-8, 1e-10), || format!("J0({x}) = {got}, integral {j0}"));
        let i0s = quad::integrate(|t: f64| (x * (t.cos() - 1.0)).exp(), &[0.0, std::f64::consts::PI], &opts).value
            / std::f64::consts::PI;
        let got = specfun::bessel_i0_scaled(x)?;
        c.check(Checker::close(got, i0s, 1e-8, 0.0), || format!("I0s({x}) = {got}, integral {i0s}"));
    }
    for x in [0.01, 0.3, 1.0, 4.0, 20.0] {
        let pts = quad::geometric_breakpoints(1.0, 1.0 + 45.0 / x, 0.1, 0);
        let e1 = quad::integrate(|t: f64| (-x * t).exp() / t, &pts, &opts).value;
        let got = specfun::exp_e1(x)?;
        c.check(Checker::close(got, e1, 1e-8, 0.0), || format!("E1({x}) = {got}, integral {e1}"));
    }
    for m in [0.0, 0.5, 2.0, 6.0] {
        c.check(specfun::marcum_q1(m, 0.0)? == 1.0, || format!("Q1({m}, 0) != 1"));
        for n in [0.5, 2.0, 6.0] {
            let q = specfun::marcum_q1(m, n)?;
            let qc = specfun::marcum_q1_complement(m, n)?;
            c.check(Checker::close(q + qc, 1.0, 1e-13, 0.0), || format!("Q1 + complement at ({m}, {n})"));
        }
    }
    for n in [0.5, 2.0, 6.0] {
        let q = specfun::marcum_q1(0.0, n)?;
        let want = (-0.5f64 * n * n).exp();
        c.check(Checker::close(q, want, 4.0 * f64::EPSILON, 0.0), || format!("Q1(0, {n}) = {q}, want {want}"));
    }
    Ok(())
}

fn random_signal(rng: &mut ChaCha8Rng, n: usize) -> Result<Signal<f64>> {
    Signal::new(
        (0..n)
            .map(|_| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect(),
    )
}

fn wfrft_suite(c: &mut Checker, seed: u64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in [4usize, 16, 64] {
        let plan = Wfrft::<f64>::new(n)?;
        for _ in 0..10 {
            let x = random_signal(&mut rng, n)?;
            let a: f64 = rng.random_range(-4.0..4.0);
            let b: f64 = rng.random_range(-4.0..4.0);
            let tol = 1e-10 * x.energy().sqrt().max(1.0);
            c.check(plan.apply(&x, 0.0)?.max_abs_diff(&x) < tol, || "L^0 != identity".into());
            c.check(plan.apply(&x, 1.0)?.max_abs_diff(&plan.dft(&x)?) < tol, || "L^1 != DFT".into());
            let ab = plan.apply(&plan.apply(&x, a)?, b)?;
            c.check(ab.max_abs_diff(&plan.apply(&x, a + b)?) < tol, || format!("L^{a} L^{b} != L^{}", a + b));
            let mut y = x.clone();
            for _ in 0..4 {
                y = plan.apply(&y, 1.0)?;
            }
            c.check(y.max_abs_diff(&x) < tol, || "L^1 applied four times != identity".into());
            let e = plan.apply(&x, a)?.energy();
            c.check(Checker::close(e, x.energy(), 1e-10, 0.0), || format!("norm not preserved at alpha {a}"));
        }
    }
    for i in 0..1000 {
        let a = i as f64 * 0.004;
        let s: f64 = wfrft::weights(a).powers().iter().sum();
        c.check((s - 1.0).abs() < 1e-12, || format!("sum |w_p({a})|^2 = {s}"));
    }
    Ok(())
}

/// `∫₀^∞ b t e^{−t} / ((a−b) t + 1) dt`, the definition of Eve's mean SNR.
pub fn eve_mean_snr_quadrature(a: f64, useful: f64) -> Result<f64> {
    let b = useful * a;
    let pts = quad::merge_breakpoints(
        0.0,
        60.0,
        &[
            quad::geometric_breakpoints(0.0, 60.0, 1.0, 0),
            quad::geometric_breakpoints(0.0, 60.0, 1.0 / (a - b).max(1e-300), 4),
        ],
    );
    let opts = QuadOptions::new(1e-300, 1e-12);
    Ok(quad::integrate(|t: f64| b * t * (-t).exp() / ((a - b) * t + 1.0), &pts, &opts)
        .require("eve_mean_snr_quadrature", &opts)?
        .value)
}

fn eve_suite(c: &mut Checker, form: EveMeanForm) -> Result<()> {
    for a in [1.0, 10.0, 1e5] {
        for i in 1..=9 {
            let da = i as f64 * 0.1;
            let w = wfrft::mismatch_power_split(da).0;
            let got = eve_mean_snr(a, w, form)?;
            let want = eve_mean_snr_quadrature(a, w)?;
            c.check(Checker::close(got, want, 1e-8, 0.0), || {
                format!("a = {a}, delta_alpha = {da}: closed form {got}, quadrature {want}")
            });
        }
        c.check(eve_mean_snr(a, 1.0, form)? == a, || format!("delta_alpha = 0 limit at a = {a}"));
        let w1 = wfrft::mismatch_power_split(1.0).0;
        c.check(eve_mean_snr(a, w1, form)? == 0.0, || format!("delta_alpha = 1 not exactly 0 at a = {a}"));
    }
    Ok(())
}

fn density_suite(c: &mut Checker) -> Result<()> {
    let opts = QuadOptions::new(1e-14, 1e-10);
    for n in [1usize, 2, 4, 16] {
        let p = SystemParams::reference(10.0, 0.3, n, 1, 0.0)?;
        let gm = p.gamma_m_bar();
        let hi = gm * 50.0;
        let pts = quad::geometric_breakpoints(0.0, hi, gm, 8);
        let total = quad::integrate(|z| pdf_bob_as(z, &p).unwrap_or(f64::NAN), &pts, &opts).value;
        c.check((total - 1.0).abs() < 1e-6, || format!("selected-branch density integrates to {total} at N = {n}"));
    }
    for (rho, n) in [(0.0, 2usize), (0.3, 4), (0.7, 16)] {
        // A small mean SNR keeps the two scales close and the check quick.
        let p = SystemParams::new(1.0, 3.0, 1.0, 1.0, 1.0, rho, n, 1, 0.0)?;
        let (gm, ge) = (p.gamma_m_bar(), p.eve_full_snr());
        let zpts = quad::geometric_breakpoints(0.0, 60.0 * gm, gm, 8);
        let ypts = quad::geometric_breakpoints(0.0, 60.0 * ge, ge, 8);
        let total = quad::integrate(
            |z| quad::integrate(|y| joint_pdf(z, y, &p).unwrap_or(f64::NAN), &ypts, &opts).value,
            &zpts,
            &opts,
        )
        .value;
        c.check((total - 1.0).abs() < 1e-6, || format!("joint density integrates to {total} at rho = {rho}, N = {n}"));
    }
    Ok(())
}

fn asc_suite(c: &mut Checker, opts: &ValidateOptions) -> Result<()> {
    let (grid_rho, grid_n, grid_da, grid_p, trials): (&[f64], &[usize], &[f64], &[f64], u64) = match opts.level {
        Level::Fast => (&[0.0, 0.5], &[1, 4], &[0.0, 1.0], &[10.0], 100_000),
        Level::Full => (&[0.0, 0.3, 0.5, 0.7], &[1, 4, 16], &[0.0, 0.5, 1.0, 2.0], &[10.0, 20.0], 1_000_000),
    };
    let mut mc = McConfig::new(trials, opts.seed);
    if let Some(w) = opts.workers {
        mc = mc.with_workers(w);
    }
    for &rho in grid_rho {
        for &n in grid_n {
            for &da in grid_da {
                for &pw in grid_p {
                    let p = SystemParams::reference(pw, rho, n, 1, da)?;
                    let cf = asc_closed_form(&p)?.value;
                    let q = asc_quadrature(&p)?.value;
                    let m = run_asc_mc(&p, &mc)?;
                    let tag = format!("rho = {rho}, N = {n}, delta_alpha = {da}, P = {pw} dBm");
                    c.check(Checker::close(cf, q, 1e-4, 0.0), || format!("{tag}: closed form {cf} vs quadrature {q}"));
                    c.check(m.z_score(cf) <= 3.0, || {
                        format!("{tag}: Monte Carlo {} +- {} vs closed form {cf}", m.mean, m.std_error)
                    });
                    c.check(m.z_score(q) <= 3.0, || {
                        format!("{tag}: Monte Carlo {} +- {} vs quadrature {q}", m.mean, m.std_error)
                    });
                }
            }
        }
    }
    Ok(())
}

/// Runs all suites in order and returns one report per suite.
pub fn run_validation(opts: &ValidateOptions) -> Vec<SuiteReport> {
    vec![
        run_suite("special functions", specfun_suite),
        run_suite("wfrft algebra", |c| wfrft_suite(c, opts.seed)),
        run_suite("eavesdropper mean snr", |c| eve_suite(c, opts.eve_form)),
        run_suite("density normalisation", density_suite),
        run_suite("secrecy capacity agreement", |c| asc_suite(c, opts)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canary_trips_eve_suite() {
        let mut c = Checker::new();
        eve_suite(&mut c, EveMeanForm::Exact).unwrap();
        assert!(c.finish().0);
        let mut c = Checker::new();
        eve_suite(&mut c, EveMeanForm::FlippedSign).unwrap();
        assert!(!c.finish().0);
    }

    #[test]
    fn eve_quadrature_reference_point() {
        // a = 10, delta_alpha = 0.5
        let w = wfrft::mismatch_power_split(0.5).0;
        let g = eve_mean_snr_quadrature(10.0, w).unwrap();
        assert!((w * 10.0 - 4.267_766_952_966_369).abs() < 1e-12);
        assert!((g - 0.538).abs() < 5e-3, "{g}");
    }
}
