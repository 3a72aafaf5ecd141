//! Finite-dimensional Dirac-von Neumann kernel.
//!
//! States, observables and projection-valued measures are small dense
//! complex objects (dimensions up to a few dozen). All types are immutable
//! once built.

mod density;
mod measurement;
mod operator;
pub mod random;
mod spectral;
mod state;

pub use density::{partial_trace, DensityMatrix};
pub use measurement::{born_probability, collapse, expectation, QuantumState};
pub use operator::Operator;
pub use spectral::{eigh, spectral_decompose, Eigen, Pvm};
pub use state::{inner, StateVector};

/// Allowed `|sum |c_i|^2 - 1|` for a state vector, and trace deviation for a density matrix.
pub const NORM_TOL: f64 = 1e-12;
/// Entrywise tolerance on `|A - A^dag|`.
pub const SELF_ADJOINT_TOL: f64 = 1e-10;
/// Entrywise tolerance for idempotence, orthogonality and completeness of projectors.
pub const PROJECTOR_TOL: f64 = 1e-10;
/// Eigenvalues closer than this share a projector.
pub const DEGENERACY_GAP: f64 = 1e-8;
/// Smallest eigenvalue tolerated in a density matrix.
pub const POSITIVITY_TOL: f64 = 1e-10;
/// Branches with Born probability at or below this cannot be collapsed onto.
pub const MIN_BRANCH_PROBABILITY: f64 = 1e-12;

/// Tensor (Kronecker) product with the left factor outermost.
pub trait Tensor {
    fn tensor(&self, other: &Self) -> Self;
}

pub fn tensor<T: Tensor>(a: &T, b: &T) -> T {
    a.tensor(b)
}

impl Tensor for StateVector {
    fn tensor(&self, other: &Self) -> Self {
        let coeffs = self
            .coeffs()
            .iter()
            .flat_map(|a| other.coeffs().iter().map(move |b| a * b))
            .collect();
        StateVector::from_raw(coeffs)
    }
}

impl Tensor for Operator {
    fn tensor(&self, other: &Self) -> Self {
        self.kron(other)
    }
}

impl Tensor for DensityMatrix {
    fn tensor(&self, other: &Self) -> Self {
        DensityMatrix::from_operator_unchecked(self.as_operator().kron(other.as_operator()))
    }
}
