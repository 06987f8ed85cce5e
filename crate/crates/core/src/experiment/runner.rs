use std::path::Path;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::estimators::{evaluate, ConstraintReport, Monitor, MonitorConfig};
use crate::inputs::{gaussian_rates_from, MnistDataset, MnistEncoderConfig, MnistStream, PoissonStream, RatePhase, RateSpec};
use crate::neuron::{run, NeuronState, RunOptions, RunTrace, SpikeEvent, SpikeLog};
use crate::plasticity::{EpsilonKernel, Learner, PlasticityRule, WeightVector};
use crate::rng::{self, streams};

use super::artifacts::{read_final_weights, read_spikes};
use super::config::{InitialWeights, InputKind, KernelName, RuleName, RunConfig};

/// Environment variable naming the MNIST directory when the config does not.
pub const MNIST_DIR_VAR: &str = "MNIST_DIR";

pub fn build_rule(config: &RunConfig) -> Result<PlasticityRule> {
    let window = config.window;
    let kernel = match config.kernel {
        KernelName::Constant => EpsilonKernel::constant(config.epsilon, window)?,
        KernelName::Uniform => EpsilonKernel::uniform_random(config.epsilon, window)?,
        KernelName::Exponential => EpsilonKernel::truncated_exponential(config.epsilon, config.time_constant, window)?,
    };
    match config.rule {
        RuleName::Hebbian => PlasticityRule::hebbian(kernel, config.norm),
        RuleName::Stdp => PlasticityRule::stdp(kernel, config.norm),
        RuleName::Decay => PlasticityRule::decay_model(kernel, config.delta),
    }
}

pub fn initial_weights(config: &RunConfig) -> Result<WeightVector> {
    let n = config.channels;
    let l = if config.rule == RuleName::Decay { 1.0 } else { config.norm };
    let raw = match &config.initial_weights {
        InitialWeights::Uniform => vec![1.0; n],
        InitialWeights::Random(seed) => {
            let mut rng = rng::stream(seed.unwrap_or(config.seed), streams::WEIGHTS);
            (0..n).map(|_| 1.0 - rng.random::<f64>()).collect()
        }
        InitialWeights::Values(v) => v.clone(),
        InitialWeights::File(path) => read_final_weights(path)?,
    };
    if raw.len() != n {
        return Err(invalid(format!("initial weights have {} entries for {n} channels", raw.len())));
    }
    WeightVector::normalized(raw, l)
}

/// Rate phases of a Poisson-type input, starting at time 0.
pub fn rate_phases(config: &RunConfig) -> Result<Vec<RatePhase>> {
    match config.input {
        InputKind::Poisson => {
            let rates = if config.rates.is_empty() {
                RateSpec::uniform(config.channels, config.rate)?
            } else {
                RateSpec::per_channel(config.rates.clone())?
            };
            Ok(vec![RatePhase { start: 0.0, rates }])
        }
        InputKind::Biased => Ok(vec![RatePhase { start: 0.0, rates: RateSpec::biased(config.combined_rate, config.bias.clone())? }]),
        InputKind::Gaussian => {
            let mut rng = rng::stream(config.seed, streams::RATES);
            std::iter::once(0.0)
                .chain(config.redraw.iter().copied())
                .map(|start| Ok(RatePhase { start, rates: gaussian_rates_from(&mut rng, config.channels, config.mu, config.sigma)? }))
                .collect()
        }
        InputKind::Mnist | InputKind::Replay => Err(invalid("inputs are not rate-driven")),
    }
}

pub fn load_mnist(config: &RunConfig) -> Result<MnistDataset> {
    let dir = config
        .mnist_dir
        .clone()
        .or_else(|| std::env::var_os(MNIST_DIR_VAR).map(Into::into))
        .ok_or_else(|| Error::Config(vec![format!("inputs.mnist_dir is not set and {MNIST_DIR_VAR} is unset")]))?;
    MnistDataset::from_dir(dir)
}

enum Source<'a> {
    Poisson(PoissonStream),
    Mnist(MnistStream<'a>),
    Replay(std::vec::IntoIter<SpikeEvent>),
}

impl Iterator for Source<'_> {
    type Item = SpikeEvent;

    fn next(&mut self) -> Option<SpikeEvent> {
        match self {
            Source::Poisson(s) => s.next(),
            Source::Mnist(s) => s.next(),
            Source::Replay(s) => s.next(),
        }
    }
}

/// Everything a finished run produced.
#[derive(Debug)]
pub struct Outcome {
    pub config: RunConfig,
    pub trace: RunTrace,
    pub monitor: Monitor,
    /// Times at which the input statistics change.
    pub boundaries: Vec<f64>,
}

impl Outcome {
    /// Constraint on the cumulative statistics of the whole run (after
    /// burn-in), evaluated at the event-averaged weights.
    pub fn averaged_report(&self) -> Result<ConstraintReport> {
        let state = self.monitor.cumulative();
        let mean = state.mean_weights().ok_or(Error::NoEvents)?;
        let l = self.trace.final_weights.norm_exponent();
        evaluate(state, &WeightVector::new(mean, l)?, self.monitor.rule())
    }

    /// Constraint on the trailing-window statistics at the final weights.
    pub fn recent_report(&self) -> Result<ConstraintReport> {
        evaluate(self.monitor.recent(), &self.trace.final_weights, self.monitor.rule())
    }
}

/// Runs one configuration from start to end. `dataset` is only consulted
/// for MNIST inputs and loaded from the configured directory when absent.
pub fn simulate(config: &RunConfig, dataset: Option<&MnistDataset>) -> Result<Outcome> {
    config.validate()?;
    let rule = build_rule(config)?;
    let weights = initial_weights(config)?;
    let neuron = NeuronState::new(config.threshold, config.decay)?;
    let monitor = Monitor::new(
        rule,
        config.channels,
        MonitorConfig {
            window: config.estimator_window,
            every: config.estimator_every,
            adaptive: config.adaptive,
            keep_reports: true,
            burn_in: config.burn_in,
        },
    )?;
    let mut learner = Learner::new(rule, config.seed, monitor);
    if config.frozen {
        learner = learner.frozen();
    }
    let options = RunOptions {
        spike_log: config.spike_log,
        snapshot_every: Some(config.snapshot_cadence),
        end_time: Some(config.duration),
        max_events: None,
    };

    let loaded;
    let (source, boundaries) = match config.input {
        InputKind::Mnist => {
            let data = match dataset {
                Some(d) => d,
                None => {
                    loaded = load_mnist(config)?;
                    &loaded
                }
            };
            let encoder = MnistEncoderConfig {
                row: config.row,
                combined_rate: config.mnist_rate,
                digit_filter: (!config.digits.is_empty()).then(|| config.digits.clone()),
                seed: config.seed,
            };
            let stream = MnistStream::new(data, &encoder, &config.schedule)?;
            if stream.channels() != config.channels {
                return Err(Error::Config(vec![format!(
                    "images are {} pixels wide but neuron.channels is {}",
                    stream.channels(),
                    config.channels
                )]));
            }
            let boundaries = stream.boundaries().into_iter().filter(|t| *t > 0.0).collect();
            (Source::Mnist(stream), boundaries)
        }
        InputKind::Replay => {
            let path = config.replay.as_deref().expect("validated");
            let events: Vec<SpikeEvent> = read_spikes(path)?.into_iter().filter(|e| e.time <= config.duration).collect();
            if let Some(e) = events.iter().find(|e| e.channel >= config.channels) {
                return Err(Error::ChannelOutOfRange { channel: e.channel, channels: config.channels });
            }
            (Source::Replay(events.into_iter()), Vec::new())
        }
        _ => {
            let phases = rate_phases(config)?;
            let boundaries = phases.iter().skip(1).map(|p| p.start).collect();
            (Source::Poisson(PoissonStream::phased(phases, config.duration, config.seed)?), boundaries)
        }
    };

    let trace = run(source.take_while(|e| e.time <= config.duration), neuron, weights, &mut learner, &options)?;
    Ok(Outcome { config: config.clone(), trace, monitor: learner.into_observer(), boundaries })
}

/// Trains without monitoring or logging and returns the final weights.
pub fn train(config: &RunConfig) -> Result<WeightVector> {
    config.validate()?;
    let rule = build_rule(config)?;
    let weights = initial_weights(config)?;
    let neuron = NeuronState::new(config.threshold, config.decay)?;
    let mut learner = Learner::new(rule, config.seed, ());
    let phases = rate_phases(config)?;
    let input = PoissonStream::phased(phases, config.duration, config.seed)?;
    let options = RunOptions { spike_log: SpikeLog::None, end_time: Some(config.duration), ..Default::default() };
    Ok(run(input, neuron, weights, &mut learner, &options)?.final_weights)
}

/// Loads a configuration file and applies `key=value` overrides on top.
pub fn load_with_overrides(path: Option<&Path>, overrides: &[(String, String)]) -> Result<RunConfig> {
    let mut text = match path {
        Some(p) => std::fs::read_to_string(p)?,
        None => String::new(),
    };
    for (k, v) in overrides {
        text.push_str(&format!("\n{k}={v}"));
    }
    RunConfig::parse(&text)
}
