use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("material {0} has no permittivity")]
    NoPermittivity(&'static str),

    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error_bound:e}")]
    Quadrature { estimate: f64, error_bound: f64 },

    #[error("oscillation budget exceeded: 2 omega z / c = {phase:e} > {budget:e}")]
    OscillationBudget { phase: f64, budget: f64 },

    #[error("frequency {omega} lies within the pole-exclusion radius of a polarizability pole")]
    PoleProximity { omega: String },

    #[error("levels {0} and {1} are degenerate")]
    DegenerateLevels(usize, usize),

    #[error("{operation} did not converge after {terms} terms: partial {partial:e}, last relative term {achieved:e}")]
    Convergence {
        operation: &'static str,
        terms: usize,
        partial: f64,
        achieved: f64,
    },

    #[error("invalid rate model: {0}")]
    Model(String),

    #[error("level graph is disconnected, components: {components:?}")]
    DisconnectedLevels { components: Vec<Vec<usize>> },
}
