use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("field violates Hermitian symmetry (defect {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("lattice mismatch: expected K_max={expected_k}, N={expected_n}; got K_max={got_k}, N={got_n}")]
    LatticeMismatch {
        expected_k: usize,
        expected_n: usize,
        got_k: usize,
        got_n: usize,
    },

    #[error("bisection could not bracket the renormalisation constant: {0}")]
    NoBracket(String),

    #[error("blow-up at t={time}: spectral magnitude {magnitude:e} exceeds guard")]
    BlowUp { time: f64, magnitude: f64 },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
