use thiserror::Error;

/// Failures raised by the numerical routines of this crate.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("system is not strictly hyperbolic at {state:?} (eigenvalue gap {gap:e})")]
    NonHyperbolic { state: Vec<f64>, gap: f64 },

    #[error("state {state:?} lies outside the domain ball of radius {radius}")]
    OutOfDomain { state: Vec<f64>, radius: f64 },

    #[error("bad model parameter: {0}")]
    BadParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("ODE integration failed: {0}")]
    IntegrationFailure(String),

    #[error("Newton iteration did not converge in {context} (residual {residual:e} after {iterations} iterations)")]
    NewtonDivergence {
        context: &'static str,
        residual: f64,
        iterations: usize,
    },

    #[error("could not build an approximating mesh: {0}")]
    MeshFailure(String),

    #[error("adaptive quadrature did not reach tolerance (estimate {estimate:e}, error {error:e})")]
    QuadratureNonConvergence { estimate: f64, error: f64 },

    #[error("front tracking exceeded {events} collision events")]
    CollisionCascade { events: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
