use thiserror::Error;

/// Errors raised by the solver and its I/O layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("inadmissible state in cell ({i}, {j}) node {node}: rho = {rho:e}, p = {p:e}")]
    InadmissibleNode {
        i: usize,
        j: usize,
        node: usize,
        rho: f64,
        p: f64,
    },

    #[error("inadmissible cell average in cell ({i}, {j}) at stage {stage}: rho = {rho:e}, p = {p:e}")]
    InadmissibleAverage {
        i: usize,
        j: usize,
        stage: usize,
        rho: f64,
        p: f64,
    },

    #[error("degenerate signal speeds: s_left = {s_left:e}, s_right = {s_right:e}")]
    DegenerateSpeeds { s_left: f64, s_right: f64 },

    #[error("polynomial order {0} out of range (1..=8)")]
    OrderOutOfRange(usize),

    #[error("singular saddle-point system for order {0}")]
    SingularSystem(usize),

    #[error("time step {dt:e} fell below the guard {dt_min:e} at t = {t}")]
    TimeStepCollapse { dt: f64, dt_min: f64, t: f64 },

    #[error("case `{0}` has no exact solution")]
    NoExactSolution(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
