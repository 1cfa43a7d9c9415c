use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A policy or caller tried to spend more energy than the buffer plus
    /// the current harvest make available.
    #[error("energy causality violated: spending {spent_q} quanta with only {available_q} available")]
    CausalityViolation { spent_q: u32, available_q: u32 },

    /// An input distribution puts mass on an amplitude whose energy exceeds
    /// the peak allowed in some state.
    #[error("peak constraint violated in state {state_q}: amplitude {amplitude} needs energy {energy} > {peak}")]
    PeakViolation {
        state_q: u32,
        amplitude: f64,
        energy: f64,
        peak: f64,
    },

    /// A constructor was handed values outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An iterative solver hit its iteration cap before reaching tolerance.
    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// An enumeration would exceed its combinatorial budget; the caller gets
    /// the exact size so it can shrink the instance instead of waiting.
    #[error("enumeration budget exceeded: instance needs {required} evaluations, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    /// Numerical integration produced a non-finite or inconsistent value.
    #[error("quadrature failure: {0}")]
    Quadrature(String),

    /// Two empirical sample sets cannot be compared.
    #[error("sample sets incompatible: {0}")]
    SampleMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
