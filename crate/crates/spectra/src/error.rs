//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectraError {
    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("temperature must be positive, got {0}")]
    NonPositiveTemperature(f64),

    #[error("mixed wing exponents ({left} vs {right}): expansion out of scope")]
    MixedExponents { left: f64, right: f64 },

    #[error("operation requires quadratic wings (exponent 2), got {0}")]
    NonQuadraticWings(f64),

    #[error("PL inequality fails globally: ratio diverges at x = {witness}")]
    PlDiverges { witness: f64 },

    #[error("eigen solver failed to converge: residual {residual:.3e} after {iterations} iterations")]
    EigenNoConvergence { residual: f64, iterations: usize },

    #[error("assembly produced a non-positive spectral gap: {0}")]
    NonPositiveGap(f64),

    #[error("gradient flow unstable: V increased along the trajectory at s = {0}")]
    FlowUnstable(f64),

    #[error("empty mesh")]
    EmptyMesh,

    #[error("constant candidate function: Dirichlet energy is zero")]
    ConstantCandidate,

    #[error("simulation diverged: |x| = {x} left the truncated domain at step {step}")]
    SimulationDiverged { x: f64, step: usize },

    #[error("autocorrelation did not decay below 0.05: window too short")]
    NoDecay,

    #[error("sweep failed: {0}")]
    Sweep(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SpectraError>;
