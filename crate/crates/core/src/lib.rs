//! Exact Gaussian wave packets for the potential −F(t)x from the linear
//! invariant A(t)p + B₀x + C(t), with a split-step spectral propagator and a
//! numerical λ-superposition as independent checks.

// `!(x > 0.0)` style guards are used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod force;
pub mod grid;
pub mod invariant;
pub mod packet;
pub mod quadrature;
pub mod report;
pub mod scenario;

pub use error::{Error, Result};
pub use force::ForceProfile;
pub use grid::{GridSpec, GridState};
pub use invariant::{InvariantCoeffs, PhysicalParams};
pub use packet::{MomentSet, MomentSource, PacketSpec};
pub use quadrature::QuadratureConfig;
