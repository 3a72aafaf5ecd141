use alloc::vec::Vec;
#[allow(unused_imports)] // f64 math comes from libm without std
use num_traits::Float;

use crate::{Error, Result, C64};

use super::NORM_TOL;

/// Unit-norm vector in a finite-dimensional Hilbert space.
///
/// The global phase is kept as given; every scalar derived from a state in
/// this crate is phase invariant.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StateVector {
    coeffs: Vec<C64>,
}

impl StateVector {
    /// Rejects vectors whose squared norm differs from 1 by more than 1e-12.
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter("empty state vector".into()));
        }
        let norm_sqr = norm_sqr(&coeffs);
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(Self { coeffs })
    }

    /// Rescales `coeffs` to unit norm.
    pub fn normalized(mut coeffs: Vec<C64>) -> Result<Self> {
        let norm_sqr = norm_sqr(&coeffs);
        if coeffs.is_empty() || !(norm_sqr > 0.0) || !norm_sqr.is_finite() {
            return Err(Error::NotNormalized { norm_sqr });
        }
        let scale = 1.0 / norm_sqr.sqrt();
        coeffs.iter_mut().for_each(|c| *c *= scale);
        Ok(Self { coeffs })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::normalized(values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    /// Computational basis vector `|index>`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index {index} out of range for dim {dim}");
        let mut coeffs = alloc::vec![C64::new(0.0, 0.0); dim];
        coeffs[index] = C64::new(1.0, 0.0);
        Self { coeffs }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    /// The same ray with an extra global phase `e^{i theta}`.
    pub fn with_phase(&self, theta: f64) -> Self {
        let phase = C64::from_polar(1.0, theta);
        Self { coeffs: self.coeffs.iter().map(|c| c * phase).collect() }
    }

    pub(crate) fn from_raw(coeffs: Vec<C64>) -> Self {
        Self { coeffs }
    }
}

pub(crate) fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum()
}

/// `<bra|ket>`, conjugate-linear in `bra`.
pub fn inner(bra: &StateVector, ket: &StateVector) -> Result<C64> {
    if bra.dim() != ket.dim() {
        return Err(Error::DimensionMismatch { expected: bra.dim(), found: ket.dim() });
    }
    Ok(inner_raw(bra.coeffs(), ket.coeffs()))
}

pub(crate) fn inner_raw(bra: &[C64], ket: &[C64]) -> C64 {
    bra.iter().zip(ket).map(|(b, k)| b.conj() * k).sum()
}
