use alloc::string::ToString;
use alloc::vec::Vec;
#[allow(unused_imports)] // f64 math comes from libm without std
use num_traits::Float;

use crate::{Error, Result, C64};

use super::{eigh, Operator, StateVector, NORM_TOL, POSITIVITY_TOL};

/// Self-adjoint, positive semidefinite, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: Operator,
}

impl DensityMatrix {
    pub fn new(op: Operator) -> Result<Self> {
        if !op.is_self_adjoint() {
            return Err(Error::InvalidDensityMatrix(alloc::format!(
                "not self-adjoint (deviation {:e})",
                op.self_adjoint_deviation()
            )));
        }
        let tr = op.trace().re;
        if (tr - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidDensityMatrix(alloc::format!("trace {tr} != 1")));
        }
        let min_eig = eigh(&op)?.values.first().copied().unwrap_or(0.0);
        if min_eig < -POSITIVITY_TOL {
            return Err(Error::InvalidDensityMatrix(alloc::format!(
                "negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(Self { op })
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        Self { op: Operator::projector(psi) }
    }

    /// `identity / dim`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self { op: Operator::identity(dim).scale_real(1.0 / dim as f64) }
    }

    pub(crate) fn from_operator_unchecked(op: Operator) -> Self {
        Self { op }
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn as_operator(&self) -> &Operator {
        &self.op
    }

    /// `tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        self.op.matmul(&self.op).trace().re
    }
}

/// Traces out every factor except `keep`.
///
/// `dims` lists the factor dimensions, outermost first, and must multiply to
/// `rho.dim()`.
pub fn partial_trace(rho: &DensityMatrix, dims: &[usize], keep: usize) -> Result<DensityMatrix> {
    if keep >= dims.len() {
        return Err(Error::BadFactorization(alloc::format!(
            "keep index {keep} out of range for {} factors",
            dims.len()
        )));
    }
    if dims.contains(&0) {
        return Err(Error::BadFactorization("zero-dimensional factor".to_string()));
    }
    let total: usize = dims.iter().product();
    if total != rho.dim() {
        return Err(Error::BadFactorization(alloc::format!(
            "factor dimensions multiply to {total}, matrix has dimension {}",
            rho.dim()
        )));
    }
    let left: usize = dims[..keep].iter().product();
    let d = dims[keep];
    let right: usize = dims[keep + 1..].iter().product();
    let mut out: Vec<C64> = alloc::vec![C64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for j in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for l in 0..left {
                for r in 0..right {
                    let row = (l * d + i) * right + r;
                    let col = (l * d + j) * right + r;
                    acc += rho.op.get(row, col);
                }
            }
            out[i * d + j] = acc;
        }
    }
    DensityMatrix::new(Operator::from_raw(d, out))
}
