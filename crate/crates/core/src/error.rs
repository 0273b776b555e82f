use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid boundary conditions: {0}")]
    InvalidBoundary(String),

    #[error("ill-posed problem: {0}")]
    IllPosed(String),

    #[error("invalid permeability {0} (must be > 0)")]
    InvalidPermeability(f64),

    #[error("non-positive drag coefficient {alpha} (linearized Barus at p = {pressure})")]
    NonPositiveDrag { alpha: f64, pressure: f64 },

    #[error("invalid reference quantity: {0}")]
    InvalidReference(String),

    #[error("{name} = {value} outside admissible range {range}")]
    Domain {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("shape mismatch for {what}: expected {expected}, got {got}")]
    Shape {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error(
        "Picard iteration did not converge in {iterations} iterations (last change {last:.3e})"
    )]
    Divergence {
        iterations: usize,
        last: f64,
        history: Vec<f64>,
    },

    #[error("linear solver failure: {0}")]
    LinearSolver(String),

    #[error("inadmissible field: {0}")]
    Inadmissible(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("infeasible design: {0}")]
    Infeasible(String),

    #[error("volume multiplier bracket failure: {0}")]
    Bracket(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
    range: &'static str,
) -> Result<()> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(())
    } else {
        Err(Error::Domain { name, value, range })
    }
}
