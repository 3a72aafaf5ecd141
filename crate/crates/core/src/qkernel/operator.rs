use alloc::vec::Vec;
#[allow(unused_imports)] // f64 math comes from libm without std
use num_traits::Float;

use crate::{Error, Result, C64};

use super::{StateVector, SELF_ADJOINT_TOL};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Dense complex square matrix, row-major.
///
/// Self-adjointness is measured once at construction and cached; operations
/// that need an observable check the flag instead of symmetrizing.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    data: Vec<C64>,
    self_adjoint: bool,
}

impl Operator {
    pub fn new(dim: usize, data: Vec<C64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("operator dimension must be positive".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: data.len() });
        }
        Ok(Self::from_raw(dim, data))
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
            }
            data.extend_from_slice(row);
        }
        Self::new(dim, data)
    }

    pub(crate) fn from_raw(dim: usize, data: Vec<C64>) -> Self {
        let mut op = Self { dim, data, self_adjoint: false };
        op.self_adjoint = op.self_adjoint_deviation() <= SELF_ADJOINT_TOL;
        op
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_raw(dim, alloc::vec![ZERO; dim * dim])
    }

    pub fn identity(dim: usize) -> Self {
        Self::diag_real(&alloc::vec![1.0; dim])
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let dim = values.len();
        let mut data = alloc::vec![ZERO; dim * dim];
        for (i, &v) in values.iter().enumerate() {
            data[i * dim + i] = C64::new(v, 0.0);
        }
        Self::from_raw(dim, data)
    }

    /// `|ket><bra|`.
    pub fn outer(ket: &[C64], bra: &[C64]) -> Self {
        assert_eq!(ket.len(), bra.len());
        let dim = ket.len();
        let mut data = Vec::with_capacity(dim * dim);
        for k in ket {
            for b in bra {
                data.push(k * b.conj());
            }
        }
        Self::from_raw(dim, data)
    }

    /// Rank-one projector `|psi><psi|`.
    pub fn projector(psi: &StateVector) -> Self {
        Self::outer(psi.coeffs(), psi.coeffs())
    }

    pub fn sigma_x() -> Self {
        Self::from_raw(2, alloc::vec![ZERO, ONE, ONE, ZERO])
    }

    pub fn sigma_y() -> Self {
        Self::from_raw(2, alloc::vec![ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO])
    }

    pub fn sigma_z() -> Self {
        Self::diag_real(&[1.0, -1.0])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim + col]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[C64]> {
        self.data.chunks(self.dim)
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.self_adjoint
    }

    pub fn self_adjoint_deviation(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn ensure_self_adjoint(&self) -> Result<()> {
        if self.self_adjoint {
            Ok(())
        } else {
            Err(Error::NotSelfAdjoint { deviation: self.self_adjoint_deviation() })
        }
    }

    pub fn ensure_dim(&self, dim: usize) -> Result<()> {
        if self.dim == dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.dim, found: dim })
        }
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(self.get(j, i).conj());
            }
        }
        Self::from_raw(n, data)
    }

    pub fn matmul(&self, other: &Operator) -> Self {
        assert_eq!(self.dim, other.dim, "operator dimensions differ");
        let n = self.dim;
        let mut data = alloc::vec![ZERO; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        Self::from_raw(n, data)
    }

    /// `A |v>` on raw coefficients.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim, "vector dimension differs from operator");
        self.rows().map(|row| row.iter().zip(v).map(|(a, x)| a * x).sum()).collect()
    }

    /// `<bra|A|ket>`.
    pub fn matrix_element(&self, bra: &[C64], ket: &[C64]) -> C64 {
        super::state::inner_raw(bra, &self.apply(ket))
    }

    pub fn add(&self, other: &Operator) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Operator) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self::from_raw(self.dim, self.data.iter().map(|a| a * factor).collect())
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(C64::new(factor, 0.0))
    }

    fn zip_with(&self, other: &Operator, f: impl Fn(C64, C64) -> C64) -> Self {
        assert_eq!(self.dim, other.dim, "operator dimensions differ");
        Self::from_raw(self.dim, self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Kronecker product with `self` as the outer (left) factor.
    pub fn kron(&self, other: &Operator) -> Self {
        let (na, nb) = (self.dim, other.dim);
        let n = na * nb;
        let mut data = alloc::vec![ZERO; n * n];
        for i in 0..na {
            for j in 0..na {
                let a = self.get(i, j);
                for k in 0..nb {
                    for l in 0..nb {
                        data[(i * nb + k) * n + j * nb + l] = a * other.get(k, l);
                    }
                }
            }
        }
        Self::from_raw(n, data)
    }

    pub(crate) fn data_mut_unchecked(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub(crate) fn refresh_flag(&mut self) {
        self.self_adjoint = self.self_adjoint_deviation() <= SELF_ADJOINT_TOL;
    }
}
