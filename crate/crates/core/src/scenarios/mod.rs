//! Two worked scenarios: the Cheshire-cat projector pattern and the
//! operational (weak-then-strong) velocity of a free particle.

pub mod cheshire;
pub mod velocity;

pub use cheshire::{cheshire_report, cheshire_report_with, cheshire_setup, CheshireEntry, CheshireReport, CheshireSetup};
pub use velocity::{guidance_velocity_oracle, Binning, VelocityField, WisemanConfig, WisemanPlan};
