//! JSON encodings of states and operators.
//!
//! Complex numbers are `[re, im]` pairs; a bare number is read as a real
//! value. A state is a list of complex entries, an operator a list of rows
//! (row-major). States are normalised on input so that `[1, 1]` means
//! `(1, 1)/sqrt 2`.

use serde_json::Value;
use weakval_core::qkernel::{Operator, StateVector};
use weakval_core::C64;

use crate::presets;
use crate::CliError;

fn complex(v: &Value) -> Result<C64, CliError> {
    match v {
        Value::Number(n) => Ok(C64::new(n.as_f64().unwrap_or(f64::NAN), 0.0)),
        Value::Array(pair) if pair.len() == 2 => match (pair[0].as_f64(), pair[1].as_f64()) {
            (Some(re), Some(im)) => Ok(C64::new(re, im)),
            _ => Err(CliError::Input(format!("complex entry {v} must hold two numbers"))),
        },
        _ => Err(CliError::Input(format!("complex entry {v} must be a number or [re, im]"))),
    }
}

fn complex_list(v: &Value) -> Result<Vec<C64>, CliError> {
    v.as_array()
        .ok_or_else(|| CliError::Input(format!("expected a JSON list, found {v}")))?
        .iter()
        .map(complex)
        .collect()
}

/// A named preset (`zero`, `one`, `plus`, `minus`, `plus_i`, `minus_i`) or a JSON vector.
pub fn parse_state(text: &str) -> Result<StateVector, CliError> {
    if let Some(s) = presets::state(text.trim()) {
        return Ok(s);
    }
    let value: Value =
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("state {text:?}: {e}")))?;
    Ok(StateVector::normalized(complex_list(&value)?)?)
}

/// A named preset or a JSON matrix given as a list of rows.
///
/// `dim` sizes the `identity` preset (default 2).
pub fn parse_operator(text: &str, dim: Option<usize>) -> Result<Operator, CliError> {
    if let Some(op) = presets::observable(text.trim(), dim.unwrap_or(2)) {
        return Ok(op);
    }
    let value: Value =
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("operator {text:?}: {e}")))?;
    let rows = value
        .as_array()
        .ok_or_else(|| CliError::Input(format!("operator must be a list of rows, found {value}")))?
        .iter()
        .map(complex_list)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Operator::from_rows(&rows)?)
}

fn pair(c: &C64) -> Value {
    Value::from(vec![c.re, c.im])
}

pub fn state_to_json(s: &StateVector) -> Value {
    Value::from(s.coeffs().iter().map(pair).collect::<Vec<_>>())
}

pub fn operator_to_json(op: &Operator) -> Value {
    Value::from(op.rows().map(|r| Value::from(r.iter().map(pair).collect::<Vec<_>>())).collect::<Vec<_>>())
}
