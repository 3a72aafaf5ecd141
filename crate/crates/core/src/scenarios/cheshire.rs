//! Path/polarisation weak values of a photon in a two-arm interferometer.
//!
//! Basis order is `|L,H>, |L,V>, |R,H>, |R,V>`: path is the outer factor,
//! polarisation the inner one. The pre/post pair below makes the path
//! projector weak values `(1, 0)` while the polarisation-times-path weak
//! values are `(0, 1)`.

use alloc::string::String;
use alloc::vec::Vec;

use crate::aav::{ProtocolConfig, ProtocolPlan, ProtocolReport, Readout};
use crate::jobs::{chunk_seed, run_sequential};
use crate::qkernel::{Operator, StateVector};
use crate::weakvalue::{weak_value, WeakValueResult};
use crate::{Result, C64};

#[derive(Debug, Clone)]
pub struct CheshireSetup {
    pub pre: StateVector,
    pub post: StateVector,
    pub pi_left: Operator,
    pub pi_right: Operator,
    /// `sigma_z` on the polarisation factor.
    pub polarization: Operator,
}

pub fn cheshire_setup() -> CheshireSetup {
    let pre = StateVector::from_real(&[1.0, 1.0, 1.0, 1.0]).expect("nonzero vector");
    let post = StateVector::from_real(&[1.0, 1.0, 1.0, -1.0]).expect("nonzero vector");
    let id2 = Operator::identity(2);
    CheshireSetup {
        pre,
        post,
        pi_left: Operator::diag_real(&[1.0, 0.0]).kron(&id2),
        pi_right: Operator::diag_real(&[0.0, 1.0]).kron(&id2),
        polarization: id2.kron(&Operator::sigma_z()),
    }
}

impl CheshireSetup {
    /// Labelled observables `Pi_L, Pi_R, S Pi_L, S Pi_R`.
    ///
    /// `S` acts on polarisation and the projectors on path, so the products
    /// commute and are self-adjoint as they stand.
    pub fn observables(&self) -> Vec<(&'static str, Operator)> {
        alloc::vec![
            ("Pi_L", self.pi_left.clone()),
            ("Pi_R", self.pi_right.clone()),
            ("S_Pi_L", self.polarization.matmul(&self.pi_left)),
            ("S_Pi_R", self.polarization.matmul(&self.pi_right)),
        ]
    }

    pub fn exact_weak_values(&self) -> Result<Vec<(&'static str, C64)>> {
        self.observables()
            .into_iter()
            .map(|(label, op)| Ok((label, weak_value(&op, &self.pre, &self.post)?.value)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CheshireEntry {
    pub label: String,
    pub exact: C64,
    /// Re from the momentum readout, Im from the coordinate readout.
    pub estimate: WeakValueResult,
    pub p_run: ProtocolReport,
    pub q_run: ProtocolReport,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CheshireReport {
    pub sigma_q: f64,
    pub attempts: u64,
    pub seed: u64,
    pub entries: Vec<CheshireEntry>,
}

/// Runs momentum and coordinate readouts for every observable on the current thread.
pub fn cheshire_report(
    setup: &CheshireSetup,
    sigma_q: f64,
    attempts: u64,
    seed: u64,
    hbar: f64,
) -> Result<CheshireReport> {
    cheshire_report_with(setup, sigma_q, attempts, seed, hbar, run_sequential)
}

/// As [`cheshire_report`], with a caller-supplied executor for each protocol run.
///
/// Run `r` (observable `r / 2`, readout `p` then `q`) is seeded with
/// `chunk_seed(seed, r)`.
pub fn cheshire_report_with<F>(
    setup: &CheshireSetup,
    sigma_q: f64,
    attempts: u64,
    seed: u64,
    hbar: f64,
    mut run: F,
) -> Result<CheshireReport>
where
    F: FnMut(&ProtocolPlan) -> Result<ProtocolReport>,
{
    let mut entries = Vec::new();
    for (i, (label, op)) in setup.observables().into_iter().enumerate() {
        let mut reports = [Readout::P, Readout::Q].into_iter().enumerate().map(|(r, readout)| {
            let mut config = ProtocolConfig::new(sigma_q, attempts, chunk_seed(seed, (2 * i + r) as u64), readout);
            config.hbar = hbar;
            run(&ProtocolPlan::new(&op, &setup.pre, &setup.post, config)?)
        });
        let p_run = reports.next().expect("two readouts")?;
        let q_run = reports.next().expect("two readouts")?;
        entries.push(CheshireEntry {
            label: label.into(),
            exact: p_run.exact_weak_value,
            estimate: ProtocolReport::combine(&p_run, &q_run),
            p_run,
            q_run,
        });
    }
    Ok(CheshireReport { sigma_q, attempts, seed, entries })
}
