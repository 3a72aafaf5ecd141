//! Chi-square goodness-of-fit p-values for the pendulum marginals.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use weakval_core::selection_bias::Marginals;
use weakval_core::stats::chi_square_uniform;

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct UniformityCheck {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Tests observed counts against a uniform expectation.
pub fn uniformity(counts: &[u64]) -> UniformityCheck {
    let statistic = chi_square_uniform(counts);
    let dof = counts.len().saturating_sub(1).max(1);
    let p_value = ChiSquared::new(dof as f64).map(|d| d.sf(statistic)).unwrap_or(f64::NAN);
    UniformityCheck { statistic, dof, p_value }
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct MarginalUniformity {
    pub amplitude: UniformityCheck,
    pub frequency: UniformityCheck,
    pub phase: UniformityCheck,
}

impl MarginalUniformity {
    pub fn of(m: &Marginals) -> Self {
        Self { amplitude: uniformity(&m.amplitude), frequency: uniformity(&m.frequency), phase: uniformity(&m.phase) }
    }

    pub fn min_p_value(&self) -> f64 {
        self.amplitude.p_value.min(self.frequency.p_value).min(self.phase.p_value)
    }
}
