//! Picard / Neumann-series solver for Volterra integral equations of the
//! second kind on finite-dimensional Banach spaces, with closed-form
//! majorant certificates and the free Schrödinger propagator machinery
//! needed for the Dyson-series examples.
//!
//! The equation solved is
//!
//! ```text
//! φ(t) = f(t) + ∫₀ᵗ A(t,τ) φ(τ) dτ,   0 ≤ t ≤ T
//! ```
//!
//! by summing `ψ₀ = f`, `ψₙ₊₁ = Q̂ψₙ` until the exponential majorant of the
//! remaining terms drops below a tolerance.

// `!(x > 0.0)` style checks are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod fresnel_abel;
pub mod kernels;
pub mod oracle;
pub mod picard;
pub mod rng;
pub mod runner;
pub mod schrodinger;
pub mod special;
pub mod state_space;
pub mod verify;

pub use error::{Error, Result};
pub use kernels::{KernelSpec, KernelVariant, PhysicalParams, PotentialSpec, SmoothFn, VolterraKernel};
pub use picard::{apply_q, neumann_solve, residual, NeumannReport, SolveSettings};
pub use state_space::{BanachElement, LpExponent, NormKind, SpaceDescriptor, TimeGrid, Trajectory};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
