//! Born rule, expectation values and collapse for pure and mixed states.

use alloc::vec::Vec;
#[allow(unused_imports)] // f64 math comes from libm without std
use num_traits::Float;

use crate::{Error, Result, C64};

use super::spectral::check_projector;
use super::{DensityMatrix, Operator, StateVector, MIN_BRANCH_PROBABILITY, SELF_ADJOINT_TOL};

/// Anything the Born rule can be applied to.
pub trait QuantumState: Sized {
    fn dim(&self) -> usize;
    /// `<psi|A|psi>` or `tr(rho A)`.
    fn expectation_raw(&self, op: &Operator) -> C64;
    /// Apply the projector and renormalize by the given branch probability.
    fn project(&self, p: &Operator, probability: f64) -> Self;
}

impl QuantumState for StateVector {
    fn dim(&self) -> usize {
        StateVector::dim(self)
    }

    fn expectation_raw(&self, op: &Operator) -> C64 {
        op.matrix_element(self.coeffs(), self.coeffs())
    }

    fn project(&self, p: &Operator, probability: f64) -> Self {
        let scale = 1.0 / probability.sqrt();
        let coeffs: Vec<C64> = p.apply(self.coeffs()).into_iter().map(|c| c * scale).collect();
        StateVector::from_raw(coeffs)
    }
}

impl QuantumState for DensityMatrix {
    fn dim(&self) -> usize {
        DensityMatrix::dim(self)
    }

    fn expectation_raw(&self, op: &Operator) -> C64 {
        self.as_operator().matmul(op).trace()
    }

    fn project(&self, p: &Operator, probability: f64) -> Self {
        let mut op = p.matmul(self.as_operator()).matmul(p).scale_real(1.0 / probability);
        // P rho P is Hermitian up to rounding; restore exact symmetry of the stored entries
        let n = op.dim();
        let data = op.data_mut_unchecked();
        for i in 0..n {
            data[i * n + i].im = 0.0;
            for j in i + 1..n {
                let avg = (data[i * n + j] + data[j * n + i].conj()) * 0.5;
                data[i * n + j] = avg;
                data[j * n + i] = avg.conj();
            }
        }
        op.refresh_flag();
        DensityMatrix::from_operator_unchecked(op)
    }
}

fn check_dims<S: QuantumState>(op: &Operator, state: &S) -> Result<()> {
    op.ensure_dim(state.dim())
}

/// Probability of the outcome represented by projector `p`.
pub fn born_probability<S: QuantumState>(p: &Operator, state: &S) -> Result<f64> {
    check_dims(p, state)?;
    check_projector(p)?;
    Ok(state.expectation_raw(p).re)
}

/// Expectation value of an observable; the imaginary residue is checked and dropped.
pub fn expectation<S: QuantumState>(a: &Operator, state: &S) -> Result<f64> {
    check_dims(a, state)?;
    a.ensure_self_adjoint()?;
    let value = state.expectation_raw(a);
    debug_assert!(value.im.abs() <= SELF_ADJOINT_TOL * (1.0 + value.re.abs()) * a.dim() as f64);
    Ok(value.re)
}

/// Post-measurement state for the outcome of `p`.
pub fn collapse<S: QuantumState>(p: &Operator, state: &S) -> Result<S> {
    let probability = born_probability(p, state)?;
    if probability <= MIN_BRANCH_PROBABILITY {
        return Err(Error::ZeroProbabilityBranch { probability });
    }
    Ok(state.project(p, probability))
}
