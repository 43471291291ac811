use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("1F1({a}, {b}, {z}) did not converge within {terms} terms (partial sum {partial})")]
    NonConvergence {
        a: f64,
        b: f64,
        z: f64,
        terms: usize,
        partial: f64,
    },

    #[error("potential is not finite at r = {r}: {value}")]
    Assembly { r: f64, value: f64 },

    #[error("{0}")]
    Unsupported(String),

    #[error("found {} bound state(s) below {threshold}, {requested} requested", found.len())]
    PartialResult {
        requested: usize,
        threshold: f64,
        found: Vec<f64>,
    },

    #[error("no sign change on [{lo}, {hi}] (f = {f_lo}, {f_hi})")]
    Bracketing {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("domain did not converge after {rounds} rounds, energies {trace:?}")]
    Convergence { rounds: usize, trace: Vec<f64> },

    #[error("state is not normalized (|norm - 1| = {0:e})")]
    Contract(f64),

    #[error("eigensolver: {0}")]
    Eigen(String),

    #[error("reference data line {line}: {msg}")]
    Reference { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
