//! Named observables and qubit states accepted on the command line.

use weakval_core::qkernel::{Operator, StateVector};
use weakval_core::C64;

pub const OBSERVABLES: [&str; 6] = ["sigma_x", "sigma_y", "sigma_z", "projector0", "projector1", "identity"];
pub const STATES: [&str; 6] = ["zero", "one", "plus", "minus", "plus_i", "minus_i"];

/// `identity` takes its dimension from `dim`; the other presets are qubit operators.
pub fn observable(name: &str, dim: usize) -> Option<Operator> {
    Some(match name {
        "sigma_x" => Operator::sigma_x(),
        "sigma_y" => Operator::sigma_y(),
        "sigma_z" => Operator::sigma_z(),
        "projector0" => Operator::diag_real(&[1.0, 0.0]),
        "projector1" => Operator::diag_real(&[0.0, 1.0]),
        "identity" => Operator::identity(dim),
        _ => return None,
    })
}

pub fn state(name: &str) -> Option<StateVector> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let v = |a: C64, b: C64| StateVector::new(vec![a, b]).expect("unit vector");
    let re = |x: f64| C64::new(x, 0.0);
    Some(match name {
        "zero" => StateVector::basis(2, 0),
        "one" => StateVector::basis(2, 1),
        "plus" => v(re(r), re(r)),
        "minus" => v(re(r), re(-r)),
        "plus_i" => v(re(r), C64::new(0.0, r)),
        "minus_i" => v(re(r), C64::new(0.0, -r)),
        _ => return None,
    })
}
