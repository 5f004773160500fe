//! Secrecy of a correlated Rayleigh wiretap link with antenna selection and
//! 4-WFRFT precoding.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which is what the sweeps and the CLI use.
//!
//! ```
//! use secrecy_lab::{asc_closed_form, Params};
//!
//! // 20 dBm, ρ = 0.5, 2×2 antennas, Eve one order off
//! let p = Params::reference(20.0, 0.5, 2, 2, 1.0).unwrap();
//! let c = asc_closed_form(&p).unwrap();
//! assert!(c.value > 18.0);
//! ```

// `!(x >= 0)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod montecarlo;
pub mod quad;
pub mod scalar;
pub mod secrecy;
pub mod specfun;
pub mod sweep;
pub mod validate;
pub mod wfrft;

pub use channel::{mean_snrs, params_from_db, EveMeanForm};
pub use error::{Error, Result};
pub use montecarlo::{run_asc_mc, run_signal_mc, EveSnrModel, McConfig, Modulation};
pub use scalar::Real;
pub use secrecy::{asc_closed_form, asc_quadrature, instant_secrecy, AscMethod};

pub type Params = channel::SystemParams<f64>;
pub type ParamsF32 = channel::SystemParams<f32>;
pub type Signal = wfrft::Signal<f64>;
pub type Weights = wfrft::WeightVector<f64>;
pub type CorrWeights = channel::CorrWeights<f64>;
pub type ChannelDraw = channel::ChannelDraw<f64>;
pub type SnrSample = channel::SnrSample<f64>;
pub type AscResult = secrecy::AscResult<f64>;
pub type ClosedFormConstants = secrecy::ClosedFormConstants<f64>;
pub type SecrecyEstimate = montecarlo::SecrecyEstimate<f64>;
pub type SignalEstimate = montecarlo::SignalEstimate<f64>;
pub type Tolerance = specfun::Tolerance<f64>;
