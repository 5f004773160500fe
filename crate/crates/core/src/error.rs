use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("{op}: {msg}")]
    Domain { op: &'static str, msg: String },

    /// Result not representable; `hint` names the overflow-safe alternative.
    #[error("{op}: result overflows, use {hint}")]
    Range { op: &'static str, hint: &'static str },

    /// A physical correlation model produced a value the secrecy model cannot use.
    #[error("physical correlation outside model range: J0 = {raw} (model needs 0 <= rho < 1)")]
    CorrelationOutOfRange { raw: f64 },

    /// Eve's mean SNR is exactly zero, so her SNR is a point mass at the origin.
    #[error("{op}: eavesdropper SNR is degenerate (mean SNR is zero)")]
    DegenerateEve { op: &'static str },

    #[error("{op}: quadrature did not converge (estimated error {achieved:e}, target {target:e})")]
    Convergence {
        op: &'static str,
        achieved: f64,
        target: f64,
    },

    /// The alternating antenna sum cancelled to below the trustworthy level.
    #[error("closed form: alternating sum cancelled to {ratio:e} of its leading term")]
    Conditioning { ratio: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Error {
    Error::Domain {
        op,
        msg: msg.into(),
    }
}
