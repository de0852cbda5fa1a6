use thiserror::Error;

/// Failures raised by the invariant, packet and grid engines.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("negative time {0} (all evolutions start at t = 0)")]
    NegativeTime(f64),

    #[error("time {t} outside tabulated force range [{start}, {end}]")]
    OutOfTabulatedRange { t: f64, start: f64, end: f64 },

    #[error("adaptive quadrature on [{lower}, {upper}] did not converge within the depth limit")]
    QuadratureNonConvergence { lower: f64, upper: f64 },

    #[error("caustic reached: A(t) vanishes at t* = {t_star}, requested t = {t} (guard {guard})")]
    CausticReached { t: f64, t_star: f64, guard: f64 },

    #[error("grid state leaks at the boundary: |psi| = {left:.3e} / {right:.3e} exceeds {tolerance:.1e}")]
    LeakingState {
        left: f64,
        right: f64,
        tolerance: f64,
    },

    #[error("lambda truncation too coarse: |g| = {weight:.3e} at the endpoints exceeds {threshold:.1e}")]
    TruncationTooCoarse { weight: f64, threshold: f64 },

    #[error("expectation value has imaginary residue {residue:.3e}")]
    ComplexResidue { residue: f64 },

    #[error("uncertainty product {product} violates the bound hbar/2 = {bound}")]
    BoundViolation { product: f64, bound: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
