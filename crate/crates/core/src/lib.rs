//! Single spiking neuron with Hebbian and STDP learning under weight
//! normalization, online estimators for promotion/demotion probabilities,
//! and checks of the steady-state relations those probabilities obey.
//!
//! The crate is organised bottom-up:
//!
//! - [`neuron`]: event-driven membrane dynamics and the run loop.
//! - [`plasticity`]: weight vectors, learning-rate kernels and update rules.
//! - [`estimators`]: online statistics, constraint reports and the novelty
//!   indicator.
//! - [`oracle`]: learning-free ground truth for promotion probabilities.
//! - [`inputs`]: Poisson, biased, Gaussian-rate and MNIST spike sources.
//! - [`experiment`]: run configuration, orchestration and CSV artifacts.
//!
//! Data-parallel loops (enumeration, sweeps, Monte Carlo) go through
//! [`exec::Execution`]; building without the `parallel` feature turns every
//! parallel request into a sequential loop with identical results.

pub mod error;
pub mod estimators;
pub mod exec;
pub mod experiment;
pub mod inputs;
pub mod neuron;
pub mod oracle;
pub mod plasticity;
pub mod rng;

pub use error::{Error, Result};
pub use exec::Execution;
pub use neuron::{NeuronState, OutputSpike, RunTrace, SpikeEvent};
pub use plasticity::{EpsilonKernel, PlasticityRule, WeightVector};
