use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid shuffle parameters: {0}")]
    InvalidParams(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("newton refinement failed from seed {seed_re}+{seed_im}i: {reason}")]
    NewtonFailed {
        seed_re: f64,
        seed_im: f64,
        reason: String,
    },

    #[error("root oracle stagnated after {iterations} iterations (worst correction {worst:e})")]
    OracleStagnated { iterations: usize, worst: f64 },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
