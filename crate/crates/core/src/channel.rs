//! Correlated Rayleigh wiretap channel.
//!
//! Main and eavesdropper fading coefficients share a common complex Gaussian
//! component:
//!
//! ```text
//! h_M / σ_M = (√(1−η²) X_M + η X_0) + j (√(1−η²) Y_M + η Y_0)
//! h_E / σ_E = (√(1−λ²) X_E + λ X_0) + j (√(1−λ²) Y_E + λ Y_0)
//! ```
//!
//! with all six components i.i.d. `N(0, 1/2)`, giving complex correlation
//! `ρ = ηλ`. All quantities in [`SystemParams`] are linear; decibels only
//! appear in [`params_from_db`], which fixes the unit convention.

use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{domain, Error, Result};
use crate::scalar::Real;
use crate::specfun;
use crate::wfrft;

/// `10^{x/10}`
pub fn db_to_linear<T: Real>(x_db: T) -> T {
    T::lit(10.0).powf(x_db / T::lit(10.0))
}

/// `10^{(x−30)/10}`
pub fn dbm_to_watts<T: Real>(x_dbm: T) -> T {
    db_to_linear(x_dbm - T::lit(30.0))
}

pub fn linear_to_db<T: Real>(x: T) -> T {
    T::lit(10.0) * x.log10()
}

/// Complete parameter set of one experiment, in linear units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemParams<T> {
    /// Transmit power.
    pub p: T,
    /// Mean power gain of the main channel.
    pub sigma_m2: T,
    /// Mean power gain of the eavesdropper channel.
    pub sigma_e2: T,
    /// Noise power at Bob.
    pub n_m: T,
    /// Noise power at Eve.
    pub n_e: T,
    /// Complex correlation between `h_M` and `h_E`, in `[0, 1)`.
    pub rho: T,
    pub n_a: usize,
    pub n_b: usize,
    /// Eve's order estimation bias, in `[0, 4)`.
    pub delta_alpha: T,
}

/// Fixed losses and noise floors shared by every figure preset, in dB/dBm.
pub const REFERENCE_SIGMA_M2_DB: f64 = -95.0;
pub const REFERENCE_SIGMA_E2_DB: f64 = -100.0;
pub const REFERENCE_NOISE_M_DBM: f64 = -100.0;
pub const REFERENCE_NOISE_E_DBM: f64 = -100.0;

impl<T: Real> SystemParams<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        p: T,
        sigma_m2: T,
        sigma_e2: T,
        n_m: T,
        n_e: T,
        rho: T,
        n_a: usize,
        n_b: usize,
        delta_alpha: T,
    ) -> Result<Self> {
        let params = Self {
            p,
            sigma_m2,
            sigma_e2,
            n_m,
            n_e,
            rho,
            n_a,
            n_b,
            delta_alpha: wfrft::reduce_order(delta_alpha),
        };
        params.validate()?;
        Ok(params)
    }

    /// Reference losses and noise floors with the remaining knobs supplied.
    pub fn reference(p_dbm: T, rho: T, n_a: usize, n_b: usize, delta_alpha: T) -> Result<Self> {
        params_from_db(
            p_dbm,
            T::lit(REFERENCE_SIGMA_M2_DB),
            T::lit(REFERENCE_SIGMA_E2_DB),
            T::lit(REFERENCE_NOISE_M_DBM),
            T::lit(REFERENCE_NOISE_E_DBM),
            rho,
            n_a,
            n_b,
            delta_alpha,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let op = "system params";
        for (name, v) in [
            ("transmit power", self.p),
            ("sigma_m2", self.sigma_m2),
            ("sigma_e2", self.sigma_e2),
            ("main noise power", self.n_m),
            ("eavesdropper noise power", self.n_e),
        ] {
            if !(v > T::zero() && v.is_finite()) {
                return Err(domain(op, format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.rho >= T::zero() && self.rho < T::one()) {
            return Err(domain(op, format!("rho must lie in [0, 1), got {}", self.rho)));
        }
        if self.n_a == 0 || self.n_b == 0 {
            return Err(domain(op, "antenna counts must be positive"));
        }
        if !self.delta_alpha.is_finite() {
            return Err(domain(op, "delta_alpha must be finite"));
        }
        let (gm, a) = (self.gamma_m_bar(), self.eve_full_snr());
        if !(gm > T::zero() && gm.is_finite() && a > T::zero() && a.is_finite()) {
            return Err(domain(op, "mean SNRs must be positive and finite"));
        }
        Ok(())
    }

    /// Number of selectable antenna pairs `N_A · N_B`.
    pub fn branches(&self) -> usize {
        self.n_a * self.n_b
    }

    /// `γ̄_M = P σ_M² / N_M`
    pub fn gamma_m_bar(&self) -> T {
        self.p * self.sigma_m2 / self.n_m
    }

    /// `a = P σ_E² / N_E`, Eve's mean SNR without order mismatch.
    pub fn eve_full_snr(&self) -> T {
        self.p * self.sigma_e2 / self.n_e
    }

    /// `|ω_0(Δα)|²`
    pub fn useful_fraction(&self) -> T {
        wfrft::mismatch_power_split(self.delta_alpha).0
    }

    pub fn with_rho(mut self, rho: T) -> Result<Self> {
        self.rho = rho;
        self.validate()?;
        Ok(self)
    }

    pub fn with_delta_alpha(mut self, delta_alpha: T) -> Result<Self> {
        self.delta_alpha = wfrft::reduce_order(delta_alpha);
        self.validate()?;
        Ok(self)
    }

    pub fn with_power_dbm(mut self, p_dbm: T) -> Result<Self> {
        self.p = db_to_linear(p_dbm);
        self.validate()?;
        Ok(self)
    }

    pub fn with_antennas(mut self, n_a: usize, n_b: usize) -> Result<Self> {
        self.n_a = n_a;
        self.n_b = n_b;
        self.validate()?;
        Ok(self)
    }
}

/// Builds [`SystemParams`] from decibel quantities.
///
/// Transmit power is converted to mW and noise floors to W, the convention
/// under which the reference parameter set (P = 20 dBm, σ_M² = −95 dB,
/// N_M = −100 dBm) yields `γ̄_M = 10^5.5`. Reading both in mW would lower
/// every mean SNR by 30 dB.
#[allow(clippy::too_many_arguments)]
pub fn params_from_db<T: Real>(
    p_dbm: T,
    sigma_m2_db: T,
    sigma_e2_db: T,
    n_m_dbm: T,
    n_e_dbm: T,
    rho: T,
    n_a: usize,
    n_b: usize,
    delta_alpha: T,
) -> Result<SystemParams<T>> {
    for (name, v) in [
        ("power", p_dbm),
        ("sigma_m2", sigma_m2_db),
        ("sigma_e2", sigma_e2_db),
        ("main noise", n_m_dbm),
        ("eavesdropper noise", n_e_dbm),
    ] {
        if !v.is_finite() {
            return Err(domain("params_from_db", format!("{name} must be finite")));
        }
    }
    SystemParams::new(
        db_to_linear(p_dbm),
        db_to_linear(sigma_m2_db),
        db_to_linear(sigma_e2_db),
        dbm_to_watts(n_m_dbm),
        dbm_to_watts(n_e_dbm),
        rho,
        n_a,
        n_b,
        delta_alpha,
    )
}

/// Weights `η`, `λ` of the shared component in `h_M` and `h_E`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrWeights<T> {
    pub eta: T,
    pub lambda: T,
}

impl<T: Real> CorrWeights<T> {
    pub fn new(eta: T, lambda: T) -> Result<Self> {
        if !(eta.abs() < T::one() && lambda.abs() < T::one()) {
            return Err(domain(
                "corr weights",
                format!("|eta| and |lambda| must be < 1, got ({eta}, {lambda})"),
            ));
        }
        Ok(Self { eta, lambda })
    }

    /// Symmetric split `η = λ = √ρ`.
    pub fn from_rho(rho: T) -> Result<Self> {
        if !(rho >= T::zero() && rho < T::one()) {
            return Err(domain("corr weights", format!("rho must lie in [0, 1), got {rho}")));
        }
        Self::new(rho.sqrt(), rho.sqrt())
    }
}

/// `ρ = ηλ`
pub fn rho_from_weights<T: Real>(w: CorrWeights<T>) -> Result<T> {
    CorrWeights::new(w.eta, w.lambda).map(|w| w.eta * w.lambda)
}

fn rho_from_j0<T: Real>(op: &'static str, arg: T) -> Result<T> {
    if !(arg >= T::zero()) {
        return Err(domain(op, format!("argument must be non-negative, got {arg}")));
    }
    let raw = specfun::bessel_j0(T::lit(2.0) * T::PI() * arg)?;
    if raw < T::zero() || raw >= T::one() {
        return Err(Error::CorrelationOutOfRange { raw: raw.as_f64() });
    }
    Ok(raw)
}

/// Temporal correlation `ρ = J0(2π f_d τ)`.
pub fn rho_from_physical<T: Real>(fd_tau: T) -> Result<T> {
    rho_from_j0("rho_from_physical", fd_tau)
}

/// Spatial correlation `ρ = J0(2π d/λ)`.
pub fn rho_from_spacing<T: Real>(d_over_wavelength: T) -> Result<T> {
    rho_from_j0("rho_from_spacing", d_over_wavelength)
}

/// One realisation of the main and eavesdropper fading coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelDraw<T> {
    pub h_m: Complex<T>,
    pub h_e: Complex<T>,
}

/// Instantaneous SNRs, linear.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SnrSample<T> {
    pub gamma_m: T,
    pub gamma_e: T,
}

/// Correlated pair sampler with the scale factors precomputed.
///
/// Stream contract: each draw consumes exactly six standard normals from the
/// injected generator, in the order `X_M, Y_M, X_E, Y_E, X_0, Y_0`, each scaled
/// by `1/√2`.
#[derive(Clone, Copy, Debug)]
pub struct PairSampler<T> {
    own_m: T,
    shared_m: T,
    own_e: T,
    shared_e: T,
}

impl<T: Real> PairSampler<T>
where
    StandardNormal: Distribution<T>,
{
    pub fn new(params: &SystemParams<T>, w: CorrWeights<T>) -> Result<Self> {
        let rho = rho_from_weights(w)?;
        if (rho - params.rho).abs() > T::lit(1e-12).max(T::epsilon() * T::lit(16.0)) {
            return Err(domain(
                "sample_pair",
                format!("eta*lambda = {rho} does not match rho = {}", params.rho),
            ));
        }
        let half = T::lit(0.5).sqrt();
        let (sm, se) = (params.sigma_m2.sqrt(), params.sigma_e2.sqrt());
        Ok(Self {
            own_m: sm * half * (T::one() - w.eta * w.eta).sqrt(),
            shared_m: sm * half * w.eta,
            own_e: se * half * (T::one() - w.lambda * w.lambda).sqrt(),
            shared_e: se * half * w.lambda,
        })
    }

    pub fn for_params(params: &SystemParams<T>) -> Result<Self> {
        Self::new(params, CorrWeights::from_rho(params.rho)?)
    }

    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> ChannelDraw<T> {
        let mut n = || -> T { StandardNormal.sample(rng) };
        let (xm, ym, xe, ye, x0, y0) = (n(), n(), n(), n(), n(), n());
        ChannelDraw {
            h_m: Complex::new(
                self.own_m * xm + self.shared_m * x0,
                self.own_m * ym + self.shared_m * y0,
            ),
            h_e: Complex::new(
                self.own_e * xe + self.shared_e * x0,
                self.own_e * ye + self.shared_e * y0,
            ),
        }
    }
}

/// Draws one correlated `(h_M, h_E)` pair.
pub fn sample_pair<T: Real, R: Rng + ?Sized>(
    params: &SystemParams<T>,
    w: CorrWeights<T>,
    rng: &mut R,
) -> Result<ChannelDraw<T>>
where
    StandardNormal: Distribution<T>,
{
    Ok(PairSampler::new(params, w)?.draw(rng))
}

/// Eve's SNR after mismatched demodulation, from her channel power gain
/// `|h_E|²`: `w P|h_E|² / ((1 − w) P|h_E|² + N_E)` with `w = |ω_0(Δα)|²`.
#[inline]
pub fn eve_snr<T: Real>(gain: T, useful: T, params: &SystemParams<T>) -> T {
    let rx = params.p * gain;
    useful * rx / ((T::one() - useful) * rx + params.n_e)
}

pub fn snr_pair<T: Real>(draw: &ChannelDraw<T>, params: &SystemParams<T>) -> SnrSample<T> {
    SnrSample {
        gamma_m: params.p * draw.h_m.norm_sqr() / params.n_m,
        gamma_e: eve_snr(draw.h_e.norm_sqr(), params.useful_fraction(), params),
    }
}

/// Which closed form to use for Eve's mean SNR under order mismatch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum EveMeanForm {
    /// `bc(1 − c e^c E1(c))`, equal to the defining expectation.
    #[default]
    Exact,
    /// `bc(1 − c e^c Ei(−c))`: the sign variant that does not match the
    /// defining expectation. Kept only as a regression canary.
    FlippedSign,
}

/// Eve's mean SNR `E[bT/((a−b)T + 1)]`, `T ~ Exp(1)`, for full-match SNR `a`
/// and useful power fraction `useful = b/a`.
pub fn eve_mean_snr<T: Real>(a: T, useful: T, form: EveMeanForm) -> Result<T> {
    if !(a > T::zero()) || !(T::zero()..=T::one()).contains(&useful) {
        return Err(domain("eve_mean_snr", "need a > 0 and useful fraction in [0, 1]"));
    }
    if useful == T::zero() {
        return Ok(T::zero());
    }
    let b = useful * a;
    let gap = a - b;
    if gap <= T::zero() {
        return Ok(a);
    }
    let c = T::one() / gap;
    Ok(match form {
        EveMeanForm::Exact => b * c * specfun::one_minus_x_e1_scaled(c)?,
        EveMeanForm::FlippedSign => {
            b * c * (T::one() - c * (-specfun::exp_e1_scaled(c)?))
        }
    })
}

/// `(γ̄_M, γ̄_E)` with Eve's mean taken over the mismatch-degraded SNR.
pub fn mean_snrs<T: Real>(params: &SystemParams<T>) -> Result<(T, T)> {
    Ok((
        params.gamma_m_bar(),
        eve_mean_snr(params.eve_full_snr(), params.useful_fraction(), EveMeanForm::Exact)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn table_values_convert() {
        let p = SystemParams::<f64>::reference(20.0, 0.5, 2, 2, 0.0).unwrap();
        assert!((p.gamma_m_bar() / 10f64.powf(5.5) - 1.0).abs() < 1e-12);
        assert!((p.eve_full_snr() / 1e5 - 1.0).abs() < 1e-12);
        assert_eq!(db_to_linear(0.0f64), 1.0);
        assert_eq!(p.branches(), 4);
    }

    #[test]
    fn params_domain_errors() {
        assert!(SystemParams::<f64>::reference(20.0, 1.0, 1, 1, 0.0).is_err());
        assert!(SystemParams::<f64>::reference(20.0, -0.1, 1, 1, 0.0).is_err());
        assert!(SystemParams::<f64>::reference(20.0, 0.5, 0, 1, 0.0).is_err());
        assert!(params_from_db(f64::NAN, 0.0, 0.0, 0.0, 0.0, 0.2, 1, 1, 0.0).is_err());
    }

    #[test]
    fn weights_to_rho() {
        assert_eq!(rho_from_weights(CorrWeights::new(0.0f64, 0.9).unwrap()).unwrap(), 0.0);
        assert_eq!(rho_from_weights(CorrWeights::new(0.5f64, 0.5).unwrap()).unwrap(), 0.25);
        assert!((rho_from_weights(CorrWeights::new(0.9f64, 0.9).unwrap()).unwrap() - 0.81).abs() < 1e-15);
        assert!(CorrWeights::new(1.0f64, 0.2).is_err());
    }

    #[test]
    fn physical_correlation() {
        assert!(matches!(
            rho_from_physical(0.0f64),
            Err(Error::CorrelationOutOfRange { raw }) if raw == 1.0
        ));
        let r = rho_from_physical(0.1f64).unwrap();
        assert!((r - 0.903_712_642_092_466_3).abs() < 1e-12);
        // second lobe is negative
        assert!(matches!(
            rho_from_spacing(0.5f64),
            Err(Error::CorrelationOutOfRange { raw }) if raw < 0.0
        ));
        assert!(rho_from_spacing(-0.1f64).is_err());
    }

    #[test]
    fn snr_reductions() {
        let p = SystemParams::<f64>::reference(20.0, 0.5, 1, 1, 0.0).unwrap();
        let d = ChannelDraw {
            h_m: Complex::new(1e-5, 2e-5),
            h_e: Complex::new(-3e-5, 1e-5),
        };
        let s = snr_pair(&d, &p);
        assert!((s.gamma_e - p.p * d.h_e.norm_sqr() / p.n_e).abs() < 1e-9 * s.gamma_e);
        let s1 = snr_pair(&d, &p.with_delta_alpha(1.0).unwrap());
        assert_eq!(s1.gamma_e, 0.0);
        assert_eq!(s1.gamma_m, s.gamma_m);
        let pd = p.with_delta_alpha(0.3).unwrap();
        let s3 = snr_pair(&d, &pd);
        assert!(s3.gamma_e < pd.useful_fraction() * p.p * d.h_e.norm_sqr() / p.n_e);
    }

    #[test]
    fn sampler_rejects_inconsistent_weights() {
        let p = SystemParams::<f64>::reference(20.0, 0.5, 1, 1, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(sample_pair(&p, CorrWeights::new(0.5, 0.5).unwrap(), &mut rng).is_err());
        assert!(sample_pair(&p, CorrWeights::new(0.5, 1.0 - 1e-16).unwrap(), &mut rng).is_ok());
    }

    #[test]
    fn sampler_second_moment() {
        let p = SystemParams::<f64>::reference(20.0, 0.3, 1, 1, 0.0).unwrap();
        let s = PairSampler::for_params(&p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let mean: f64 = (0..n).map(|_| s.draw(&mut rng).h_m.norm_sqr()).sum::<f64>() / n as f64;
        assert!((mean / p.sigma_m2 - 1.0).abs() < 0.02);
    }

    #[test]
    fn eve_mean_limits() {
        assert_eq!(eve_mean_snr(10.0f64, 1.0, EveMeanForm::Exact).unwrap(), 10.0);
        assert_eq!(eve_mean_snr(10.0f64, 0.0, EveMeanForm::Exact).unwrap(), 0.0);
        let p = SystemParams::<f64>::reference(20.0, 0.5, 1, 1, 0.0).unwrap();
        assert_eq!(mean_snrs(&p).unwrap().1, p.eve_full_snr());
        assert_eq!(mean_snrs(&p.with_delta_alpha(1.0).unwrap()).unwrap().1, 0.0);
        // nearly matched order: close to a, never above
        let g = eve_mean_snr(10.0f64, 1.0 - 1e-9, EveMeanForm::Exact).unwrap();
        assert!(g < 10.0 && (g - 10.0).abs() < 1e-6);
        // flipped sign blows up instead of approaching a
        let g2 = eve_mean_snr(10.0f64, 1.0 - 1e-9, EveMeanForm::FlippedSign).unwrap();
        assert!(g2 > 1e9);
    }
}
