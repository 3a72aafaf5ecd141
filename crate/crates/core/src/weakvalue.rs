//! Weak values.
//!
//! `A_w = <post|A|pre> / <post|pre>` is computed two ways: directly from the
//! ratio, and from the expectation values of the weak operators
//! `E(z) = (1 + zA)|pre><pre|(1 + z*A)` evaluated in the post-selected
//! state at `z = +-1, +-i`. The second route uses only expectation values of
//! self-adjoint operators and reproduces the first exactly.

use alloc::vec::Vec;
#[allow(unused_imports)] // f64 math comes from libm without std
use num_traits::Float;

use crate::qkernel::{expectation, inner, Operator, Pvm, StateVector};
use crate::{Error, Result, C64, DEFAULT_OVERLAP_EPS};

/// How a weak value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Method {
    Direct,
    WeakOperator,
    MonteCarlo,
    /// Read off the exact post-selected pointer distribution, without sampling.
    PointerMean,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WeakValueResult {
    pub value: C64,
    /// `<post|pre>`.
    pub overlap: C64,
    pub method: Method,
    pub stderr_re: Option<f64>,
    pub stderr_im: Option<f64>,
}

impl WeakValueResult {
    pub(crate) fn exact(value: C64, overlap: C64, method: Method) -> Self {
        Self { value, overlap, method, stderr_re: None, stderr_im: None }
    }
}

fn checked_overlap(pre: &StateVector, post: &StateVector, eps: f64) -> Result<C64> {
    let overlap = inner(post, pre)?;
    if overlap.norm() < eps {
        return Err(Error::OverlapTooSmall { overlap: overlap.norm(), threshold: eps });
    }
    Ok(overlap)
}

/// `<post|A|pre> / <post|pre>` with the default overlap threshold.
pub fn weak_value(a: &Operator, pre: &StateVector, post: &StateVector) -> Result<WeakValueResult> {
    weak_value_with_eps(a, pre, post, DEFAULT_OVERLAP_EPS)
}

pub fn weak_value_with_eps(
    a: &Operator,
    pre: &StateVector,
    post: &StateVector,
    eps: f64,
) -> Result<WeakValueResult> {
    a.ensure_self_adjoint()?;
    a.ensure_dim(pre.dim())?;
    let overlap = checked_overlap(pre, post, eps)?;
    let numerator = a.matrix_element(post.coeffs(), pre.coeffs());
    Ok(WeakValueResult::exact(numerator / overlap, overlap, Method::Direct))
}

/// `E(z) = (1 + zA) |psi><psi| (1 + z* A)`.
pub fn weak_operator(a: &Operator, psi: &StateVector, z: C64) -> Result<Operator> {
    a.ensure_self_adjoint()?;
    a.ensure_dim(psi.dim())?;
    let n = a.dim();
    let b = Operator::identity(n).add(&a.scale(z));
    // (1 + z* A) = (1 + zA)^dag because A is self-adjoint
    Ok(b.matmul(&Operator::projector(psi)).matmul(&b.adjoint()))
}

/// Weak value from exact weak-operator expectations in `post`.
pub fn extract_via_weak_operators(
    a: &Operator,
    pre: &StateVector,
    post: &StateVector,
) -> Result<WeakValueResult> {
    extract_via_weak_operators_with_eps(a, pre, post, DEFAULT_OVERLAP_EPS)
}

pub fn extract_via_weak_operators_with_eps(
    a: &Operator,
    pre: &StateVector,
    post: &StateVector,
    eps: f64,
) -> Result<WeakValueResult> {
    a.ensure_self_adjoint()?;
    a.ensure_dim(pre.dim())?;
    let overlap = inner(post, pre)?;
    let overlap_sqr = overlap.norm_sqr();
    if overlap_sqr < eps * eps {
        return Err(Error::OverlapTooSmall { overlap: overlap.norm(), threshold: eps });
    }
    let expect = |z: C64| -> Result<f64> { expectation(&weak_operator(a, pre, z)?, post) };
    let i = C64::new(0.0, 1.0);
    let one = C64::new(1.0, 0.0);
    let re = (expect(one)? - expect(-one)?) / (4.0 * overlap_sqr);
    let im = (expect(-i)? - expect(i)?) / (4.0 * overlap_sqr);
    Ok(WeakValueResult::exact(C64::new(re, im), overlap, Method::WeakOperator))
}

/// The self-adjoint pair `(1/2)(A P + P A)` and `(1/2i)(A P - P A)` with `P = |psi><psi|`.
///
/// Their expectations in the post-selected state, divided by `|<post|psi>|^2`,
/// give the real and imaginary parts of the weak value.
pub fn flux_commutator_ops(a: &Operator, psi: &StateVector) -> Result<(Operator, Operator)> {
    a.ensure_self_adjoint()?;
    a.ensure_dim(psi.dim())?;
    let p = Operator::projector(psi);
    let ap = a.matmul(&p);
    let pa = p.matmul(a);
    let flux = ap.add(&pa).scale_real(0.5);
    // 1/(2i) = -i/2
    let commutator = ap.sub(&pa).scale(C64::new(0.0, -0.5));
    Ok((flux, commutator))
}

/// Weak value of every projector of `pvm`; the list always sums to one.
pub fn projector_weak_values(pvm: &Pvm, pre: &StateVector, post: &StateVector) -> Result<Vec<C64>> {
    if pvm.dim() != pre.dim() {
        return Err(Error::DimensionMismatch { expected: pvm.dim(), found: pre.dim() });
    }
    let overlap = checked_overlap(pre, post, DEFAULT_OVERLAP_EPS)?;
    Ok(pvm
        .projectors()
        .iter()
        .map(|p| p.matrix_element(post.coeffs(), pre.coeffs()) / overlap)
        .collect())
}
