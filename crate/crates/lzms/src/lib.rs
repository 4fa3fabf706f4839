//! Numerical toolkit for a linearly swept three-state avoided crossing with
//! optional decay out of the manifold.
//!
//! The system is a chain |1⟩–|2⟩–|3⟩ with bare energies (−κt, 0, κt), a
//! nearest-neighbour coupling Ω e^{iφ} and a direct 1–3 coupling ω e^{iφ′}.
//! Decay is modelled two ways that must agree: a non-Hermitian term
//! −i·diag(Γ₁,Γ₂,Γ₃) on the three-state Hamiltonian, and a four-level
//! Lindblad equation draining each state into a spectator ground state.
//!
//! Module map:
//! - [`model`]: parameter types and Hamiltonian builders.
//! - [`spectrum`]: closed-form eigenvalues and crossing classification.
//! - [`dynamics`]: exponential-midpoint propagation (state and density
//!   matrix), transfer efficiencies, two-state reference.
//! - [`sweep`]: deterministic parallel 1D/2D efficiency grids and the
//!   built-in figure presets.
//! - [`cli`]: the `lzms` command-line frontend and CSV emission.

pub mod cli;
pub mod dynamics;
pub mod expm;
pub mod model;
pub mod spectrum;
pub mod sweep;
pub mod validate;

mod integrator;

use num_complex::Complex64;

/// Complex scalar used throughout.
pub type C64 = Complex64;
/// Dense complex 3×3 matrix (Hamiltonians on the three-state manifold).
pub type CMatrix3 = nalgebra::Matrix3<C64>;
/// Dense complex 4×4 matrix (four-level Hamiltonian, density matrices).
pub type CMatrix4 = nalgebra::Matrix4<C64>;
/// Three complex amplitudes (c₁, c₂, c₃).
pub type CVector3 = nalgebra::Vector3<C64>;
/// Density matrix on the four-level space. Hermiticity, unit trace and
/// positivity are checkable predicates, not structural guarantees.
pub type DensityMatrix4 = CMatrix4;

/// Library error type. Integration failures carry the time and step size at
/// which the controller gave up so sweep results can flag the exact point.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("invalid {name}: {reason}")]
    InvalidParam { name: &'static str, reason: String },
    #[error("integration failed at t = {t:.9e}: step size underflow (step = {step:.3e})")]
    StepUnderflow { t: f64, step: f64 },
    #[error("unknown figure id `{id}`; valid ids: {valid}")]
    UnknownFigureId { id: String, valid: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam { name, reason: reason.into() }
    }
}
