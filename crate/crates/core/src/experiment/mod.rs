//! Run configuration, orchestration of single runs, sweeps, oracle scans
//! and novelty experiments, and their CSV artifacts.

pub mod artifacts;
pub mod config;
pub mod novelty;
pub mod runner;
pub mod scan;
pub mod sweep;
pub mod verify;

pub use artifacts::{write_run, SummaryRow};
pub use config::{InitialWeights, InputKind, KernelName, RuleName, RunConfig, StepSize};
pub use novelty::{phase_responses, PhaseResponse};
pub use runner::{simulate, train, Outcome};
pub use scan::oracle_scan;
pub use sweep::{plateaus, sweep_initial_weights, Plateau, SweepRow};
pub use verify::{checks, pearson, verify_dir, verify_outcome, Check};
