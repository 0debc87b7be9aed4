//! Quantum correlations of two-qubit X-states and single-mode bosonic
//! Gaussian channels.
//!
//! * [`linalg`]: small dense complex matrices, a hermitian Jacobi solver,
//!   entropies, partial trace and transpose.
//! * [`mueller`]: the Mueller (Stokes) representation of two-qubit states.
//! * [`ellipsoid`]: the correlation ellipsoid and the discord optimizer.
//! * [`gaussian`]: phase-space channels `(X, Y)` and their classification.
//! * [`fock`]: Kraus operators in a truncated number basis and the
//!   robustness functionals for NOON / PNES inputs.

pub mod ellipsoid;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod linalg;
pub mod mueller;
mod roots;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type C64 = num_complex::Complex<f64>;
pub type ComplexMatrix = linalg::CMatrix<f64>;
pub type ComplexMatrix32 = linalg::CMatrix<f32>;

/// Default tolerance for hermiticity and positivity checks.
pub const DEFAULT_TOL: f64 = 1e-10;
