use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid market parameters a={a}, k={k}: both must be finite and positive")]
    InvalidParams { a: f64, k: f64 },

    #[error("capacity k={k} is infeasible for a={a}: need k < a/2 for a positive competitive price")]
    Infeasible { a: f64, k: f64 },

    #[error("entanglement gamma={0} must be finite and non-negative")]
    InvalidGamma(f64),

    #[error("{what}={value} lies outside the admissible domain [{lo}, {hi})")]
    OutOfDomain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("invalid grid [{lo}, {hi}] with {n} points")]
    InvalidGrid { lo: f64, hi: f64, n: usize },

    #[error("grid with {n} points per axis exceeds the cap of {cap}")]
    GridTooLarge { n: usize, cap: usize },

    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("failed to write output: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
