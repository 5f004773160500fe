//! Unitary DFT and the 4-weighted-type fractional Fourier transform (4-WFRFT).
//!
//! The transform of order `α` is the weighted superposition
//! `L^α x = Σ_p ω_p(α) F^p x` of the four DFT powers, with
//! `ω_p(α) = ¼ Σ_{m=0}^{3} exp(iπ m (α − p)/2)`
//! `      = cos(θ/2) cos(θ) exp(i 3θ/2)`, `θ = π(α − p)/2`.
//!
//! With these weights `L^0` is the identity, `L^1` is the unitary DFT, orders
//! add (`L^α L^β = L^{α+β}`) and the order is periodic with period 4.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{domain, Result};
use crate::scalar::Real;

/// Reduces an order into `[0, 4)`.
pub fn reduce_order<T: Real>(alpha: T) -> T {
    let four = T::lit(4.0);
    let r = alpha - four * (alpha / four).floor();
    if r >= four || r < T::zero() {
        T::zero()
    } else {
        r
    }
}

/// A finite complex baseband sequence of length `N >= 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Signal<T> {
    samples: Vec<Complex<T>>,
}

impl<T: Real> Signal<T> {
    pub fn new(samples: Vec<Complex<T>>) -> Result<Self> {
        if samples.is_empty() {
            return Err(domain("signal", "signal must contain at least one sample"));
        }
        Ok(Self { samples })
    }

    pub fn from_real(values: &[T]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex::new(v, T::zero())).collect())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Complex<T>] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex<T>> {
        self.samples
    }

    /// `‖x‖²`
    pub fn energy(&self) -> T {
        self.samples.iter().map(|s| s.norm_sqr()).sum()
    }

    /// `⟨self, other⟩ = Σ conj(self_n) other_n`
    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.samples
            .iter()
            .zip(&other.samples)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| {
                acc + a.conj() * b
            })
    }

    /// Largest sample-wise distance `max_n |x_n − y_n|`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }

    /// Circular reflection `x(−n mod N)`.
    pub fn reversed(&self) -> Self {
        let n = self.len();
        let samples = (0..n).map(|i| self.samples[(n - i) % n]).collect();
        Self { samples }
    }
}

/// The four complex weighting coefficients `ω_0..ω_3` for one order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightVector<T> {
    order: T,
    w: [Complex<T>; 4],
}

impl<T: Real> WeightVector<T> {
    /// Order reduced into `[0, 4)`.
    pub fn order(&self) -> T {
        self.order
    }

    pub fn coefficients(&self) -> [Complex<T>; 4] {
        self.w
    }

    /// `|ω_p|²` for `p = 0..3`; sums to one.
    pub fn powers(&self) -> [T; 4] {
        self.w.map(|c| c.norm_sqr())
    }
}

/// `(cos πu, sin πu)` with exact zeros at half-integers and integers.
fn cos_sin_pi<T: Real>(u: T) -> (T, T) {
    let two = T::lit(2.0);
    let r = u - two * (u / two).floor();
    let n = (r * two).round();
    let f = r - n / two;
    let (s, c) = (T::PI() * f).sin_cos();
    match n.to_i32().unwrap_or(0).rem_euclid(4) {
        0 => (c, s),
        1 => (-s, c),
        2 => (-c, -s),
        _ => (s, -c),
    }
}

/// Weighting coefficients of the 4-WFRFT of order `alpha`.
pub fn weights<T: Real>(alpha: T) -> WeightVector<T> {
    let order = reduce_order(alpha);
    let w = std::array::from_fn(|p| {
        // u = (α − p)/4, so θ/2 = πu, θ = 2πu and 3θ/2 = 3πu.
        let u = (order - T::from_usize_lossy(p)) / T::lit(4.0);
        let amp = cos_sin_pi(u).0 * cos_sin_pi(u * T::lit(2.0)).0;
        let (cp, sp) = cos_sin_pi(u * T::lit(3.0));
        Complex::new(amp * cp, amp * sp)
    });
    WeightVector { order, w }
}

/// Alice/Bob's shared order and Eve's guess.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MismatchOrder<T> {
    pub alpha: T,
    pub beta: T,
}

impl<T: Real> MismatchOrder<T> {
    pub fn new(alpha: T, beta: T) -> Self {
        Self { alpha, beta }
    }

    /// Estimation bias `Δα = |α − β|` reduced into `[0, 4)`.
    pub fn delta(&self) -> T {
        reduce_order((self.alpha - self.beta).abs())
    }

    /// Effective order `α − β` (mod 4) seen by Eve after her demodulation.
    pub fn signed_delta(&self) -> T {
        reduce_order(self.alpha - self.beta)
    }
}

/// Useful and interference power fractions `(|ω_0(Δα)|², 1 − |ω_0(Δα)|²)`.
pub fn mismatch_power_split<T: Real>(delta_alpha: T) -> (T, T) {
    let useful = weights(delta_alpha).powers()[0].min(T::one());
    (useful, T::one() - useful)
}

/// Planned transforms for one signal length.
#[derive(Clone)]
pub struct Wfrft<T: Real> {
    len: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    scale: T,
}

impl<T: Real> std::fmt::Debug for Wfrft<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Wfrft").field("len", &self.len).finish()
    }
}

impl<T: Real> Wfrft<T> {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(domain("dft", "signal must contain at least one sample"));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
            scale: T::one() / T::from_usize_lossy(len).sqrt(),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn check(&self, x: &Signal<T>) -> Result<()> {
        if x.len() != self.len {
            return Err(domain(
                "wfrft",
                format!("planned for length {}, got {}", self.len, x.len()),
            ));
        }
        Ok(())
    }

    fn run(&self, plan: &Arc<dyn Fft<T>>, x: &Signal<T>) -> Signal<T> {
        let mut buf = x.samples.clone();
        plan.process(&mut buf);
        for v in &mut buf {
            *v = *v * self.scale;
        }
        Signal { samples: buf }
    }

    /// `X(k) = N^{-1/2} Σ_n x(n) e^{−i2πnk/N}`
    pub fn dft(&self, x: &Signal<T>) -> Result<Signal<T>> {
        self.check(x)?;
        Ok(self.run(&self.forward, x))
    }

    pub fn idft(&self, x: &Signal<T>) -> Result<Signal<T>> {
        self.check(x)?;
        Ok(self.run(&self.inverse, x))
    }

    /// `(x, Fx, F²x, F³x)`: the sequence, its DFT, its circular reflection and
    /// the reflected DFT.
    pub fn base_states(&self, x: &Signal<T>) -> Result<[Signal<T>; 4]> {
        let x1 = self.dft(x)?;
        let x2 = x.reversed();
        let x3 = x1.reversed();
        Ok([x.clone(), x1, x2, x3])
    }

    pub fn apply(&self, x: &Signal<T>, alpha: T) -> Result<Signal<T>> {
        let states = self.base_states(x)?;
        let w = weights(alpha).w;
        let samples = (0..self.len)
            .map(|n| {
                states
                    .iter()
                    .zip(&w)
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (s, wp)| {
                        acc + *wp * s.samples[n]
                    })
            })
            .collect();
        Ok(Signal { samples })
    }

    /// Eve's noiseless output `L^{−β} L^{α} x = L^{α−β} x`.
    pub fn mismatch_output(&self, x: &Signal<T>, orders: MismatchOrder<T>) -> Result<Signal<T>> {
        self.apply(x, orders.signed_delta())
    }
}

pub fn dft<T: Real>(x: &Signal<T>) -> Result<Signal<T>> {
    Wfrft::new(x.len())?.dft(x)
}

pub fn idft<T: Real>(x: &Signal<T>) -> Result<Signal<T>> {
    Wfrft::new(x.len())?.idft(x)
}

pub fn base_states<T: Real>(x: &Signal<T>) -> Result<[Signal<T>; 4]> {
    Wfrft::new(x.len())?.base_states(x)
}

/// 4-WFRFT of order `alpha`.
pub fn wfrft<T: Real>(x: &Signal<T>, alpha: T) -> Result<Signal<T>> {
    Wfrft::new(x.len())?.apply(x, alpha)
}

pub fn mismatch_output<T: Real>(x: &Signal<T>, orders: MismatchOrder<T>) -> Result<Signal<T>> {
    Wfrft::new(x.len())?.mismatch_output(x, orders)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    /// O(N²) transcription of the DFT definition.
    fn naive_dft(x: &[Complex<f64>]) -> Vec<Complex<f64>> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter().enumerate().fold(c(0.0, 0.0), |acc, (i, v)| {
                    let ang = -2.0 * std::f64::consts::PI * (i * k) as f64 / n as f64;
                    acc + v * Complex::from_polar(1.0, ang)
                }) / (n as f64).sqrt()
            })
            .collect()
    }

    #[test]
    fn dft_of_impulse_and_constant() {
        let x = Signal::from_real(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        let y = dft(&x).unwrap();
        for v in y.samples() {
            assert!((v - c(0.5, 0.0)).norm() < 1e-15);
        }
        let k = c(0.3, -1.2);
        let x = Signal::new(vec![k; 9]).unwrap();
        let y = dft(&x).unwrap();
        assert!((y.samples()[0] - k * 3.0).norm() < 1e-14);
        assert!(y.samples()[1..].iter().all(|v| v.norm() < 1e-14));
    }

    #[test]
    fn dft_matches_definition() {
        let x: Vec<_> = (0..7).map(|i| c(i as f64 * 0.3 - 1.0, (i * i) as f64 * 0.1)).collect();
        let y = dft(&Signal::new(x.clone()).unwrap()).unwrap();
        for (a, b) in y.samples().iter().zip(naive_dft(&x)) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn empty_signal_rejected() {
        assert!(Signal::<f64>::new(vec![]).is_err());
        assert!(Wfrft::<f64>::new(0).is_err());
    }

    #[test]
    fn reflection_and_closure() {
        let x = Signal::from_real(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        let [x0, _x1, x2, x3] = base_states(&x).unwrap();
        assert_eq!(x0, x);
        assert_eq!(x2, Signal::from_real(&[1.0, 4.0, 3.0, 2.0]).unwrap());
        assert!(dft(&x3).unwrap().max_abs_diff(&x) < 1e-14);

        let sym = Signal::from_real(&[5.0, 1.0, 2.0, 1.0]).unwrap();
        assert_eq!(base_states(&sym).unwrap()[2], sym);
    }

    #[test]
    fn weight_special_orders() {
        let w0 = weights(0.0f64).coefficients();
        assert!((w0[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(w0[1..].iter().all(|w| w.norm() < 1e-15));
        let w1 = weights(1.0f64).coefficients();
        assert!((w1[1] - c(1.0, 0.0)).norm() < 1e-15);
        assert!([w1[0], w1[2], w1[3]].iter().all(|w| w.norm() < 1e-15));

        let p = weights(0.5f64).powers();
        let expect = [0.426_776_695_296_636_9, 0.426_776_695_296_636_9, 0.073_223_304_703_363_1, 0.073_223_304_703_363_1];
        for (a, b) in p.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn weights_match_geometric_sum() {
        for i in 0..40 {
            let alpha = -3.0 + 0.37 * i as f64;
            let w = weights(alpha).coefficients();
            for (p, wp) in w.iter().enumerate() {
                let g = (0..4).fold(c(0.0, 0.0), |acc, m| {
                    acc + Complex::from_polar(
                        1.0,
                        std::f64::consts::PI * m as f64 * (alpha - p as f64) / 2.0,
                    )
                }) / 4.0;
                assert!((wp - g).norm() < 1e-13, "alpha={alpha}, p={p}");
            }
        }
    }

    #[test]
    fn cos_sin_pi_quadrants() {
        for i in -20..20 {
            let u = i as f64 * 0.137;
            let (c0, s0) = cos_sin_pi(u);
            let (s1, c1) = (std::f64::consts::PI * u).sin_cos();
            assert!((c0 - c1).abs() < 1e-14 && (s0 - s1).abs() < 1e-14);
        }
        assert_eq!(cos_sin_pi(0.5f64).0, 0.0);
        assert_eq!(cos_sin_pi(1.5f64).0, 0.0);
        assert_eq!(cos_sin_pi(-0.5f64).0, 0.0);
    }

    #[test]
    fn order_reduction() {
        assert_eq!(reduce_order(4.0f64), 0.0);
        assert!((reduce_order(-0.5f64) - 3.5).abs() < 1e-15);
        assert_eq!(MismatchOrder::new(0.3f64, 1.3).delta(), 1.0);
        assert!((MismatchOrder::new(0.3f64, 1.3).signed_delta() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn power_split() {
        assert_eq!(mismatch_power_split(0.0f64), (1.0, 0.0));
        for d in [1.0f64, 2.0, 3.0] {
            let (u, i) = mismatch_power_split(d);
            assert_eq!((u, i), (0.0, 1.0));
        }
        let (u, i) = mismatch_power_split(0.5f64);
        assert!((u - 0.426_776_695_296_636_9).abs() < 1e-12);
        assert!((i - 0.573_223_304_703_363_1).abs() < 1e-12);
    }

    #[test]
    fn length_mismatch_rejected() {
        let t = Wfrft::<f64>::new(4).unwrap();
        let x = Signal::from_real(&[1.0, 2.0]).unwrap();
        assert!(t.apply(&x, 0.3).is_err());
    }
}
