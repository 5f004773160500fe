//! Seeded Monte Carlo estimators.
//!
//! Trials are split into fixed-size chunks. Chunk `i` draws from
//! `ChaCha8Rng::seed_from_u64(seed)` switched to stream `i`, and chunk
//! statistics are merged in chunk order. The estimate therefore depends only
//! on `(seed, trials, chunk)`, never on the number of workers.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::channel::{eve_snr, mean_snrs, PairSampler, SystemParams};
use crate::error::{domain, Error, Result};
use crate::scalar::Real;
use crate::secrecy::instant_secrecy;
use crate::wfrft::{Signal, Wfrft};

/// How Eve's SNR is obtained from her selected channel draw.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum EveSnrModel {
    /// Signal-to-interference-plus-noise after mismatched demodulation,
    /// `w P|h_E|² / ((1−w) P|h_E|² + N_E)`.
    #[default]
    Mismatch,
    /// Exponential with Eve's closed-form mean SNR, `γ̄_E |h_E/σ_E|²`. This is
    /// the distribution the analytic methods assume; useful to separate model
    /// error from estimator error.
    MeanMatched,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    pub workers: usize,
    /// Trials per chunk; each chunk owns one random stream.
    pub chunk: u64,
    pub eve_model: EveSnrModel,
}

pub const DEFAULT_TRIALS: u64 = 1_000_000;
pub const DEFAULT_CHUNK: u64 = 1 << 14;

impl Default for McConfig {
    fn default() -> Self {
        Self {
            trials: DEFAULT_TRIALS,
            seed: 0,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            chunk: DEFAULT_CHUNK,
            eve_model: EveSnrModel::Mismatch,
        }
    }
}

impl McConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            ..Self::default()
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_eve_model(mut self, model: EveSnrModel) -> Self {
        self.eve_model = model;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(domain("monte carlo", "trials must be >= 1"));
        }
        if self.workers == 0 || self.chunk == 0 {
            return Err(domain("monte carlo", "workers and chunk must be >= 1"));
        }
        Ok(())
    }

    fn chunks(&self) -> u64 {
        self.trials.div_ceil(self.chunk)
    }

    fn chunk_len(&self, i: u64) -> u64 {
        self.chunk.min(self.trials - i * self.chunk)
    }

    fn stream(&self, i: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(i);
        rng
    }

    /// Runs `f` on every chunk index and returns the results in chunk order.
    fn map_chunks<R, F>(&self, f: F) -> Result<Vec<R>>
    where
        R: Send,
        F: Fn(u64) -> R + Sync + Send,
    {
        let n = self.chunks();
        if self.workers == 1 || n == 1 {
            return Ok((0..n).map(f).collect());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| domain("monte carlo", format!("thread pool: {e}")))?;
        Ok(pool.install(|| (0..n).into_par_iter().map(f).collect()))
    }
}

/// Running mean and sum of squared deviations.
#[derive(Clone, Copy, Debug, Default)]
struct Moments<T> {
    n: u64,
    mean: T,
    m2: T,
}

impl<T: Real> Moments<T> {
    fn push(&mut self, x: T) {
        self.n += 1;
        let d = x - self.mean;
        self.mean = self.mean + d / T::lit(self.n as f64);
        self.m2 = self.m2 + d * (x - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let (na, nb, nt) = (T::lit(self.n as f64), T::lit(other.n as f64), T::lit(n as f64));
        let d = other.mean - self.mean;
        Self {
            n,
            mean: self.mean + d * nb / nt,
            m2: self.m2 + other.m2 + d * d * na * nb / nt,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SecrecyEstimate<T> {
    /// Bits/s/Hz.
    pub mean: T,
    /// Sample standard deviation over `√trials`.
    pub std_error: T,
    pub trials: u64,
}

impl<T: Real> SecrecyEstimate<T> {
    fn from_moments(m: Moments<T>) -> Self {
        let var = if m.n > 1 {
            m.m2 / T::lit((m.n - 1) as f64)
        } else {
            T::zero()
        };
        Self {
            mean: m.mean,
            std_error: (var / T::lit(m.n as f64)).sqrt(),
            trials: m.n,
        }
    }

    /// `|self − value|` in units of the standard error.
    pub fn z_score(&self, value: T) -> T {
        (self.mean - value).abs() / self.std_error
    }
}

/// Average secrecy capacity by simulation.
///
/// Each trial draws `N_A N_B` independent correlated pairs, selects the pair
/// with the largest main-channel gain and scores the instantaneous secrecy
/// capacity on that pair.
pub fn run_asc_mc<T: Real>(params: &SystemParams<T>, cfg: &McConfig) -> Result<SecrecyEstimate<T>>
where
    StandardNormal: Distribution<T>,
{
    params.validate()?;
    cfg.validate()?;
    let sampler = PairSampler::for_params(params)?;
    let n = params.branches();
    let useful = params.useful_fraction();
    let (_, ge_bar) = mean_snrs(params)?;
    let eve_gain_scale = T::one() / params.sigma_e2;
    let snr_m_scale = params.p / params.n_m;
    let p = *params;
    let model = cfg.eve_model;
    let chunks = cfg.map_chunks(|i| {
        let mut rng = cfg.stream(i);
        let mut m = Moments::<T>::default();
        for _ in 0..cfg.chunk_len(i) {
            let mut best = sampler.draw(&mut rng);
            let mut best_gain = best.h_m.norm_sqr();
            for _ in 1..n {
                let d = sampler.draw(&mut rng);
                let g = d.h_m.norm_sqr();
                if g > best_gain {
                    best = d;
                    best_gain = g;
                }
            }
            let ge_gain = best.h_e.norm_sqr();
            let gamma_e = match model {
                EveSnrModel::Mismatch => eve_snr(ge_gain, useful, &p),
                EveSnrModel::MeanMatched => ge_bar * ge_gain * eve_gain_scale,
            };
            m.push(instant_secrecy(snr_m_scale * best_gain, gamma_e));
        }
        m
    })?;
    let total = chunks.into_iter().fold(Moments::default(), Moments::merge);
    Ok(SecrecyEstimate::from_moments(total))
}

/// Normalised eavesdropper gains `|h_E/σ_E|²` drawn from the channel model.
pub fn sample_eve_gains<T: Real>(params: &SystemParams<T>, cfg: &McConfig) -> Result<Vec<T>>
where
    StandardNormal: Distribution<T>,
{
    cfg.validate()?;
    let sampler = PairSampler::for_params(params)?;
    let scale = T::one() / params.sigma_e2;
    let chunks = cfg.map_chunks(|i| {
        let mut rng = cfg.stream(i);
        (0..cfg.chunk_len(i))
            .map(|_| sampler.draw(&mut rng).h_e.norm_sqr() * scale)
            .collect::<Vec<T>>()
    })?;
    Ok(chunks.concat())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Modulation {
    #[default]
    Qpsk,
}

impl std::str::FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "qpsk" => Ok(Self::Qpsk),
            other => Err(Error::Parse(format!("unknown modulation '{other}'"))),
        }
    }
}

pub const SIGNAL_BLOCK: usize = 1024;

/// Order used by Alice and Bob in signal-level runs. Only the difference to
/// Eve's order matters.
pub const SIGNAL_ALPHA: f64 = 0.37;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignalEstimate<T> {
    /// Power of the projection of Eve's output on the sent block, over total
    /// output power.
    pub useful_fraction: T,
    /// `useful / (1 − useful)`; infinite when there is no interference.
    pub sir: T,
    pub blocks: usize,
}

fn qpsk_block<T: Real, R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<Complex<T>> {
    let a = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    (0..len)
        .map(|_| {
            let bits: u8 = rng.random_range(0..4);
            let re = if bits & 1 == 0 { a } else { -a };
            let im = if bits & 2 == 0 { a } else { -a };
            Complex::new(re, im)
        })
        .collect()
}

/// One block of unit-power QPSK symbols from `ChaCha8Rng::seed_from_u64(seed)`.
pub fn qpsk_signal<T: Real>(len: usize, seed: u64) -> Result<Signal<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Signal::new(qpsk_block(&mut rng, len))
}

/// Signal-level check of Eve's power split. Blocks of 1024 unit-power QPSK
/// symbols are transformed with order `α`, demodulated by Eve with
/// `β = α − Δα`, and projected onto the sent block. Noise is left out: this
/// measures the deterministic split only.
pub fn run_signal_mc<T: Real>(
    params: &SystemParams<T>,
    n_symbols: usize,
    modulation: Modulation,
    cfg: &McConfig,
) -> Result<SignalEstimate<T>> {
    let Modulation::Qpsk = modulation;
    if n_symbols < SIGNAL_BLOCK {
        return Err(domain(
            "run_signal_mc",
            format!("need at least {SIGNAL_BLOCK} symbols, got {n_symbols}"),
        ));
    }
    if cfg.workers == 0 {
        return Err(domain("run_signal_mc", "workers must be >= 1"));
    }
    let blocks = n_symbols.div_ceil(SIGNAL_BLOCK);
    let alpha = T::lit(SIGNAL_ALPHA);
    let beta = alpha - params.delta_alpha;
    let block_cfg = McConfig {
        trials: blocks as u64,
        chunk: 1,
        ..*cfg
    };
    let parts = block_cfg.map_chunks(|i| -> Result<(T, T)> {
        let plan = Wfrft::new(SIGNAL_BLOCK)?;
        let mut rng = block_cfg.stream(i);
        let x = Signal::new(qpsk_block(&mut rng, SIGNAL_BLOCK))?;
        let sent = plan.apply(&x, alpha)?;
        let r = plan.apply(&sent, -beta)?;
        let proj = x.inner(&r).norm_sqr() / x.energy();
        Ok((proj, r.energy()))
    })?;
    let (mut useful, mut total) = (T::zero(), T::zero());
    for part in parts {
        let (u, e) = part?;
        useful = useful + u;
        total = total + e;
    }
    let f = (useful / total).min(T::one());
    Ok(SignalEstimate {
        useful_fraction: f,
        sir: f / (T::one() - f),
        blocks,
    })
}

pub const KS_MIN_SAMPLES: usize = 10_000;

/// 1% critical value of the one-sample Kolmogorov–Smirnov statistic.
pub fn ks_critical_1pct<T: Real>(n: usize) -> T {
    T::lit(1.63) / T::from_usize_lossy(n).sqrt()
}

/// Kolmogorov–Smirnov distance between the empirical distribution of
/// `samples` and the unit-rate exponential.
pub fn ks_exponential_check<T: Real>(samples: &[T]) -> Result<T> {
    if samples.len() < KS_MIN_SAMPLES {
        return Err(domain(
            "ks_exponential_check",
            format!("need at least {KS_MIN_SAMPLES} samples, got {}", samples.len()),
        ));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(domain("ks_exponential_check", "samples must be finite"));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = T::from_usize_lossy(xs.len());
    let mut d = T::zero();
    for (i, &x) in xs.iter().enumerate() {
        let cdf = if x > T::zero() { -(-x).exp_m1() } else { T::zero() };
        let lo = T::from_usize_lossy(i) / n;
        let hi = T::from_usize_lossy(i + 1) / n;
        d = d.max((cdf - lo).abs()).max((hi - cdf).abs());
    }
    Ok(d)
}
