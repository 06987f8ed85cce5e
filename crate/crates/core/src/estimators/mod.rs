//! Online estimates of promotion and demotion statistics, the steady-state
//! constraints built from them, and the `Δ` novelty indicator.

mod constraints;
mod novelty;
mod state;

pub use constraints::{
    decay_constraint, hebbian_constraint, kernel_stdp_constraint, stdp_constraint, ConstraintForm, ConstraintReport,
};
pub use novelty::{
    adaptive_crossover, adaptive_epsilon, detect_alerts, evaluate, median, Alert, DeltaSample, Monitor, MonitorConfig,
};
pub use state::{EstimatorState, WindowMode};
