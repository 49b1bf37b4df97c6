use thiserror::Error;

/// Failures reported by the model and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidSpec(String),
    #[error("endpoint ({x}, {z}) lies outside the reachable half-disk of radius {length}")]
    UnreachableEndpoint { x: f64, z: f64, length: f64 },
    #[error(
        "no convergence after {iterations} iterations (constraint residual {constraint_residual:.3e}, \
         stationarity residual {stationarity_residual:.3e})"
    )]
    NoConvergence { iterations: usize, constraint_residual: f64, stationarity_residual: f64 },
    #[error("solution is not converged")]
    Unconverged,
    #[error("no friction coefficient keeps the contact closed")]
    ContactInfeasible,
    #[error("pressure {pressure} MPa outside [0, {max}] MPa")]
    PressureOutOfRange { pressure: f64, max: f64 },
    #[error("pressure ramp needs at least two nondecreasing samples within [0, {max}] MPa")]
    InvalidRamp { max: f64 },
    #[error("trace has no engaged steps")]
    NoEngagedSteps,
    #[error("energy gradient vanishes at separation")]
    ZeroGradient,
    #[error("least-squares fit needs at least two distinct z values")]
    DegenerateFit,
    #[error("sweep contains no successful configurations")]
    NoSuccesses,
    #[error("lattice is empty")]
    EmptyLattice,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
