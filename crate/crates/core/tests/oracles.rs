use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use secrecy_lab::channel::{mean_snrs, snr_pair, PairSampler};
use secrecy_lab::montecarlo::{ks_critical_1pct, ks_exponential_check, sample_eve_gains};
use secrecy_lab::{asc_closed_form, asc_quadrature, McConfig, Params, ParamsF32};

/// `e^x E1(x)` by Simpson's rule after `u = x(e^s − 1)` in
/// `∫₀^∞ e^{-u}/(x+u) du`.
fn e1_scaled(x: f64) -> f64 {
    let hi = (1.0 + 50.0 / x).ln();
    let n = 200_000;
    let h = hi / n as f64;
    let f = |s: f64| (-x * s.exp_m1()).exp();
    let mut acc = f(0.0) + f(hi);
    for i in 1..n {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    acc * h / 3.0
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Uncorrelated links: `P(Y < t < Z)` factorises, and with
/// `P(Z > t) = Σ_k C(N,k)(−1)^{k+1} e^{−kt/γ̄_M}` each term integrates against
/// `1/(1+t)` to exponential integrals.
fn independent_asc(gm: f64, ge: f64, n: usize) -> f64 {
    let mut total = 0.0;
    for k in 1..=n {
        let x = k as f64 / gm;
        let eve = if ge > 0.0 { e1_scaled(x + 1.0 / ge) } else { 0.0 };
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        total += sign * binomial(n, k) * (e1_scaled(x) - eve);
    }
    total / std::f64::consts::LN_2
}

#[test]
fn uncorrelated_capacity_matches_exponential_integrals() {
    for (p_dbm, n, da) in [(10.0, 1, 0.0), (20.0, 1, 0.3), (10.0, 2, 0.5), (0.0, 4, 0.1), (10.0, 4, 1.0)] {
        let p = Params::reference(p_dbm, 0.0, n, 1, da).unwrap();
        let (gm, ge) = mean_snrs(&p).unwrap();
        let want = independent_asc(gm, ge, n);
        for got in [asc_closed_form(&p).unwrap().value, asc_quadrature(&p).unwrap().value] {
            assert!((got - want).abs() <= 1e-7 * want, "P={p_dbm} N={n} da={da}: {got} vs {want}");
        }
    }
}

#[test]
fn single_precision_tracks_double() {
    let p = Params::reference(10.0, 0.5, 2, 1, 0.5).unwrap();
    let q = ParamsF32::reference(10.0, 0.5, 2, 1, 0.5).unwrap();
    let a = asc_closed_form(&p).unwrap().value;
    let b = asc_closed_form(&q).unwrap().value as f64;
    assert!((a - b).abs() <= 1e-3 * a, "{a} vs {b}");
}

#[test]
fn sampled_snrs_have_the_model_moments() {
    let p = Params::reference(10.0, 0.6, 1, 1, 0.0).unwrap();
    let (gm, ge) = mean_snrs(&p).unwrap();
    let sampler = PairSampler::for_params(&p).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 400_000;
    let (mut sz, mut sy, mut szz, mut syy, mut szy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for _ in 0..n {
        let s = snr_pair(&sampler.draw(&mut rng), &p);
        let (z, y) = (s.gamma_m / gm, s.gamma_e / ge);
        sz += z;
        sy += y;
        szz += z * z;
        syy += y * y;
        szy += z * y;
    }
    let nf = n as f64;
    let (mz, my) = (sz / nf, sy / nf);
    // Unit exponentials: mean 1, variance 1, so the standard error is 1/√n.
    let se = 1.0 / nf.sqrt();
    assert!((mz - 1.0).abs() < 4.0 * se, "main mean {mz}");
    assert!((my - 1.0).abs() < 4.0 * se, "eavesdropper mean {my}");
    let cov = szy / nf - mz * my;
    let corr = cov / ((szz / nf - mz * mz) * (syy / nf - my * my)).sqrt();
    // Power gains of jointly Gaussian fades correlate as ρ².
    assert!((corr - 0.36).abs() < 0.01, "power correlation {corr}");
}

#[test]
fn eavesdropper_gains_pass_exponential_ks() {
    let p = Params::reference(20.0, 0.3, 1, 1, 0.0).unwrap();
    let g = sample_eve_gains(&p, &McConfig::new(50_000, 5).with_workers(1)).unwrap();
    let d = ks_exponential_check(&g).unwrap();
    assert!(d < ks_critical_1pct::<f64>(g.len()), "KS distance {d}");
    let shifted: Vec<f64> = g.iter().map(|x| 1.2 * x).collect();
    assert!(ks_exponential_check(&shifted).unwrap() > ks_critical_1pct::<f64>(g.len()));
}
