//! Hermitian eigensolver and projection-valued measures.

use alloc::vec::Vec;
use nalgebra::{DMatrix, SymmetricEigen};

use crate::{Error, Result, C64};

use super::{Operator, StateVector, DEGENERACY_GAP, PROJECTOR_TOL};

/// Eigenvalues (ascending) and matching orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<C64>>,
}

/// Diagonalises a self-adjoint matrix.
pub fn eigh(a: &Operator) -> Result<Eigen> {
    a.ensure_self_adjoint()?;
    let n = a.dim();
    let m = DMatrix::from_row_slice(n, n, a.data());
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, 0)
        .ok_or_else(|| Error::InvalidParameter("eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order.iter().map(|&i| eig.eigenvectors.column(i).iter().copied().collect()).collect();
    Ok(Eigen { values, vectors })
}

/// Projection-valued measure: mutually orthogonal projectors resolving the
/// identity, each tagged with a real outcome.
#[derive(Debug, Clone)]
pub struct Pvm {
    dim: usize,
    projectors: Vec<Operator>,
    eigenvalues: Vec<f64>,
}

impl Pvm {
    /// Validates idempotence, self-adjointness, mutual exclusivity and
    /// completeness, each within 1e-10 entrywise.
    pub fn new(projectors: Vec<Operator>, eigenvalues: Vec<f64>) -> Result<Self> {
        if projectors.is_empty() || projectors.len() != eigenvalues.len() {
            return Err(Error::InvalidParameter(alloc::format!(
                "{} projectors with {} eigenvalues",
                projectors.len(),
                eigenvalues.len()
            )));
        }
        let dim = projectors[0].dim();
        let mut total = Operator::zeros(dim);
        for (i, p) in projectors.iter().enumerate() {
            p.ensure_dim(dim)?;
            check_projector(p)?;
            for q in &projectors[i + 1..] {
                let cross = p.matmul(q).max_abs_diff(&Operator::zeros(dim));
                if cross > PROJECTOR_TOL {
                    return Err(Error::NotProjector { deviation: cross });
                }
            }
            total = total.add(p);
        }
        let completeness = total.max_abs_diff(&Operator::identity(dim));
        if completeness > PROJECTOR_TOL {
            return Err(Error::NotProjector { deviation: completeness });
        }
        Ok(Self { dim, projectors, eigenvalues })
    }

    /// Rank-one PVM of an orthonormal basis, outcomes `0, 1, ..., n-1`.
    pub fn from_basis(basis: &[StateVector]) -> Result<Self> {
        let projectors = basis.iter().map(Operator::projector).collect();
        Self::new(projectors, (0..basis.len()).map(|i| i as f64).collect())
    }

    pub fn computational(dim: usize) -> Self {
        let basis: Vec<_> = (0..dim).map(|i| StateVector::basis(dim, i)).collect();
        Self::from_basis(&basis).expect("computational basis is a PVM")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn projectors(&self) -> &[Operator] {
        &self.projectors
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &Operator)> {
        self.eigenvalues.iter().copied().zip(&self.projectors)
    }

    /// `sum_a a P_a`.
    pub fn reconstruct(&self) -> Operator {
        self.iter()
            .fold(Operator::zeros(self.dim), |acc, (a, p)| acc.add(&p.scale_real(a)))
    }
}

pub(crate) fn check_projector(p: &Operator) -> Result<()> {
    let idempotence = p.matmul(p).max_abs_diff(p);
    let hermiticity = p.self_adjoint_deviation();
    let worst = idempotence.max(hermiticity);
    if worst > PROJECTOR_TOL {
        return Err(Error::NotProjector { deviation: worst });
    }
    Ok(())
}

/// Spectral decomposition `A = sum_a a P_a`; eigenvalues closer than 1e-8
/// share one projector.
pub fn spectral_decompose(a: &Operator) -> Result<Pvm> {
    let Eigen { values, vectors } = eigh(a)?;
    let n = a.dim();
    let mut projectors = Vec::new();
    let mut eigenvalues = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[end - 1] < DEGENERACY_GAP {
            end += 1;
        }
        let mut p = Operator::zeros(n);
        for vec in &vectors[start..end] {
            p = p.add(&Operator::outer(vec, vec));
        }
        let mean = values[start..end].iter().sum::<f64>() / (end - start) as f64;
        projectors.push(p);
        eigenvalues.push(mean);
        start = end;
    }
    Ok(Pvm { dim: n, projectors, eigenvalues })
}
