use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::estimators::WindowMode;
use crate::neuron::SpikeLog;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuleName {
    Hebbian,
    Stdp,
    Decay,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelName {
    Constant,
    /// Uniform random step in `(0, rule.epsilon]`.
    Uniform,
    Exponential,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputKind {
    Poisson,
    Biased,
    Gaussian,
    Mnist,
    Replay,
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialWeights {
    Uniform,
    /// Uniform draws, from the run seed unless one is given.
    Random(Option<u64>),
    Values(Vec<f64>),
    File(PathBuf),
}

/// Learning-rate setting in a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepSize {
    Constant(f64),
    Uniform(f64),
}

impl StepSize {
    pub fn amplitude(self) -> f64 {
        match self {
            StepSize::Constant(e) | StepSize::Uniform(e) => e,
        }
    }
}

impl std::fmt::Display for StepSize {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StepSize::Constant(e) => write!(f, "{e}"),
            StepSize::Uniform(e) => write!(f, "uniform:{e}"),
        }
    }
}

/// Everything that determines a run, plus the parameters of the derived
/// experiments (sweeps, oracle scans, novelty alerts, verification).
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub threshold: f64,
    pub decay: f64,
    pub channels: usize,

    pub rule: RuleName,
    pub epsilon: f64,
    pub kernel: KernelName,
    pub time_constant: f64,
    pub window: f64,
    pub norm: f64,
    pub delta: f64,
    pub frozen: bool,

    pub input: InputKind,
    pub rate: f64,
    pub rates: Vec<f64>,
    pub combined_rate: f64,
    pub bias: Vec<f64>,
    pub mu: f64,
    pub sigma: f64,
    pub redraw: Vec<f64>,
    pub mnist_dir: Option<PathBuf>,
    pub mnist_rate: f64,
    pub row: usize,
    pub schedule: Vec<(u8, f64)>,
    pub digits: Vec<u8>,
    pub replay: Option<PathBuf>,

    pub duration: f64,
    pub initial_weights: InitialWeights,

    pub estimator_window: WindowMode,
    pub estimator_every: usize,
    pub adaptive: bool,
    pub burn_in: f64,

    pub snapshot_cadence: f64,
    pub spike_log: SpikeLog,
    pub seed: u64,
    pub repeats: usize,

    pub sweep_w1: (f64, f64, f64),
    pub sweep_steps: Vec<StepSize>,

    pub oracle_decays: Vec<f64>,
    pub oracle_resolution: usize,
    pub oracle_length: usize,
    pub oracle_rate: f64,
    pub oracle_tolerance: f64,

    pub novelty_factor: f64,
    pub novelty_trailing: usize,
    pub novelty_horizon: f64,

    pub verify_tolerance: f64,
    pub verify_pearson: f64,

    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            threshold: 0.94,
            decay: 0.0,
            channels: 10,
            rule: RuleName::Hebbian,
            epsilon: 0.0005,
            kernel: KernelName::Constant,
            time_constant: 0.02,
            window: 0.15,
            norm: 1.0,
            delta: 0.01,
            frozen: false,
            input: InputKind::Poisson,
            rate: 0.9,
            rates: Vec::new(),
            combined_rate: 1.8,
            bias: Vec::new(),
            mu: 0.9,
            sigma: 0.15,
            redraw: Vec::new(),
            mnist_dir: None,
            mnist_rate: 0.9 * 28.0,
            row: 14,
            schedule: vec![(5, 333_333.0), (1, 333_333.0), (0, 333_334.0)],
            digits: Vec::new(),
            replay: None,
            duration: 300_000.0,
            initial_weights: InitialWeights::Uniform,
            estimator_window: WindowMode::Sliding(5000),
            estimator_every: 500,
            adaptive: false,
            burn_in: 0.0,
            snapshot_cadence: 1000.0,
            spike_log: SpikeLog::All,
            seed: 1,
            repeats: 1,
            sweep_w1: (0.5, 1.0, 0.02),
            sweep_steps: vec![StepSize::Constant(0.0005)],
            oracle_decays: vec![0.0, 0.1, 0.2],
            oracle_resolution: 21,
            oracle_length: 13,
            oracle_rate: 1.8,
            oracle_tolerance: 1e-3,
            novelty_factor: 5.0,
            novelty_trailing: 20,
            novelty_horizon: 10_000.0,
            verify_tolerance: 0.05,
            verify_pearson: 0.99,
            output_dir: PathBuf::from("out"),
        }
    }
}

/// Keys in canonical order. `output_dir` is deliberately absent: it
/// says where artifacts go, not what they contain.
pub const KEYS: &[&str] = &[
    "neuron.theta",
    "neuron.decay",
    "neuron.channels",
    "rule.kind",
    "rule.epsilon",
    "rule.kernel",
    "rule.time_constant",
    "rule.window",
    "rule.norm",
    "rule.delta",
    "rule.frozen",
    "inputs.kind",
    "inputs.rate",
    "inputs.rates",
    "inputs.combined_rate",
    "inputs.bias",
    "inputs.mu",
    "inputs.sigma",
    "inputs.redraw",
    "inputs.mnist_dir",
    "inputs.mnist_rate",
    "inputs.row",
    "inputs.schedule",
    "inputs.digits",
    "inputs.replay",
    "duration",
    "initial_weights",
    "estimator.window",
    "estimator.every",
    "estimator.adaptive",
    "estimator.burn_in",
    "snapshot_cadence",
    "log.spikes",
    "seed",
    "repeats",
    "sweep.w1",
    "sweep.epsilons",
    "oracle.decays",
    "oracle.resolution",
    "oracle.length",
    "oracle.rate",
    "oracle.tolerance",
    "novelty.factor",
    "novelty.trailing",
    "novelty.horizon",
    "verify.tolerance",
    "verify.pearson",
];

fn num(v: &str) -> std::result::Result<f64, String> {
    v.trim().parse::<f64>().map_err(|_| format!("'{v}' is not a number"))
}

fn int<T: std::str::FromStr>(v: &str) -> std::result::Result<T, String> {
    v.trim().parse::<T>().map_err(|_| format!("'{v}' is not a non-negative integer"))
}

fn flag(v: &str) -> std::result::Result<bool, String> {
    match v.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(format!("'{v}' is not a boolean")),
    }
}

fn list<T>(v: &str, f: impl Fn(&str) -> std::result::Result<T, String>) -> std::result::Result<Vec<T>, String> {
    let v = v.trim();
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|s| f(s.trim())).collect()
}

fn path(v: &str) -> Option<PathBuf> {
    let v = v.trim();
    (!v.is_empty()).then(|| PathBuf::from(v))
}

fn join<T: std::fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn show_path(p: &Option<PathBuf>) -> String {
    p.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
}

fn parse_window(v: &str) -> std::result::Result<WindowMode, String> {
    let v = v.trim();
    if v == "cumulative" {
        return Ok(WindowMode::Cumulative);
    }
    if let Some(n) = v.strip_prefix("sliding:") {
        return Ok(WindowMode::Sliding(int(n)?));
    }
    if let Some(f) = v.strip_prefix("exponential:") {
        return Ok(WindowMode::Exponential(num(f)?));
    }
    Err(format!("'{v}' is not cumulative, sliding:<n> or exponential:<factor>"))
}

fn show_window(w: WindowMode) -> String {
    match w {
        WindowMode::Cumulative => "cumulative".into(),
        WindowMode::Sliding(n) => format!("sliding:{n}"),
        WindowMode::Exponential(f) => format!("exponential:{f}"),
    }
}

fn parse_step(v: &str) -> std::result::Result<StepSize, String> {
    match v.strip_prefix("uniform:") {
        Some(m) => Ok(StepSize::Uniform(num(m)?)),
        None => Ok(StepSize::Constant(num(v)?)),
    }
}

impl RunConfig {
    /// Parses `key=value` lines; `#` starts a comment. Every problem in the
    /// text and in the resulting configuration is reported at once.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = RunConfig::default();
        let mut problems = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            match line.split_once('=') {
                Some((k, v)) => {
                    if let Err(e) = config.set(k.trim(), v.trim()) {
                        problems.push(format!("line {}: {e}", n + 1));
                    }
                }
                None => problems.push(format!("line {}: expected key=value, got '{line}'", n + 1)),
            }
        }
        problems.extend(config.problems());
        if problems.is_empty() {
            Ok(config)
        } else {
            Err(Error::Config(problems))
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Applies one setting. Unknown keys are an error.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let v = value.trim();
        match key {
            "neuron.theta" => self.threshold = num(v)?,
            "neuron.decay" => self.decay = num(v)?,
            "neuron.channels" => self.channels = int(v)?,
            "rule.kind" => {
                self.rule = match v {
                    "hebbian" => RuleName::Hebbian,
                    "stdp" => RuleName::Stdp,
                    "decay" => RuleName::Decay,
                    _ => return Err(format!("rule.kind '{v}' is not hebbian, stdp or decay")),
                }
            }
            "rule.epsilon" => self.epsilon = num(v)?,
            "rule.kernel" => {
                self.kernel = match v {
                    "constant" => KernelName::Constant,
                    "uniform" => KernelName::Uniform,
                    "exponential" => KernelName::Exponential,
                    _ => return Err(format!("rule.kernel '{v}' is not constant, uniform or exponential")),
                }
            }
            "rule.time_constant" => self.time_constant = num(v)?,
            "rule.window" => self.window = num(v)?,
            "rule.norm" => self.norm = num(v)?,
            "rule.delta" => self.delta = num(v)?,
            "rule.frozen" => self.frozen = flag(v)?,
            "inputs.kind" => {
                self.input = match v {
                    "poisson" => InputKind::Poisson,
                    "biased" => InputKind::Biased,
                    "gaussian" => InputKind::Gaussian,
                    "mnist" => InputKind::Mnist,
                    "replay" => InputKind::Replay,
                    _ => return Err(format!("inputs.kind '{v}' is not poisson, biased, gaussian, mnist or replay")),
                }
            }
            "inputs.rate" => self.rate = num(v)?,
            "inputs.rates" => self.rates = list(v, num)?,
            "inputs.combined_rate" => self.combined_rate = num(v)?,
            "inputs.bias" => self.bias = list(v, num)?,
            "inputs.mu" => self.mu = num(v)?,
            "inputs.sigma" => self.sigma = num(v)?,
            "inputs.redraw" => self.redraw = list(v, num)?,
            "inputs.mnist_dir" => self.mnist_dir = path(v),
            "inputs.mnist_rate" => self.mnist_rate = num(v)?,
            "inputs.row" => self.row = int(v)?,
            "inputs.schedule" => {
                self.schedule = list(v, |item| {
                    let (d, t) = item.split_once(':').ok_or_else(|| format!("schedule entry '{item}' is not digit:duration"))?;
                    Ok((int::<u8>(d)?, num(t)?))
                })?
            }
            "inputs.digits" => self.digits = list(v, int::<u8>)?,
            "inputs.replay" => self.replay = path(v),
            "duration" => self.duration = num(v)?,
            "initial_weights" => {
                self.initial_weights = match v {
                    "uniform" => InitialWeights::Uniform,
                    "random" => InitialWeights::Random(None),
                    _ => {
                        if let Some(p) = v.strip_prefix("file:") {
                            InitialWeights::File(PathBuf::from(p))
                        } else if let Some(s) = v.strip_prefix("random:") {
                            InitialWeights::Random(Some(int(s)?))
                        } else {
                            InitialWeights::Values(list(v, num)?)
                        }
                    }
                }
            }
            "estimator.window" => self.estimator_window = parse_window(v)?,
            "estimator.every" => self.estimator_every = int(v)?,
            "estimator.adaptive" => self.adaptive = flag(v)?,
            "estimator.burn_in" => self.burn_in = num(v)?,
            "snapshot_cadence" => self.snapshot_cadence = num(v)?,
            "log.spikes" => {
                self.spike_log = match v {
                    "none" => SpikeLog::None,
                    "all" => SpikeLog::All,
                    _ => match v.strip_prefix("recent:") {
                        Some(n) => SpikeLog::Recent(int(n)?),
                        None => return Err(format!("log.spikes '{v}' is not none, all or recent:<n>")),
                    },
                }
            }
            "seed" => self.seed = int(v)?,
            "repeats" => self.repeats = int(v)?,
            "sweep.w1" => {
                let parts = list(&v.replace(':', ","), num)?;
                match parts[..] {
                    [a, b, s] => self.sweep_w1 = (a, b, s),
                    _ => return Err(format!("sweep.w1 '{v}' is not start:end:step")),
                }
            }
            "sweep.epsilons" => self.sweep_steps = list(v, parse_step)?,
            "oracle.decays" => self.oracle_decays = list(v, num)?,
            "oracle.resolution" => self.oracle_resolution = int(v)?,
            "oracle.length" => self.oracle_length = int(v)?,
            "oracle.rate" => self.oracle_rate = num(v)?,
            "oracle.tolerance" => self.oracle_tolerance = num(v)?,
            "novelty.factor" => self.novelty_factor = num(v)?,
            "novelty.trailing" => self.novelty_trailing = int(v)?,
            "novelty.horizon" => self.novelty_horizon = num(v)?,
            "verify.tolerance" => self.verify_tolerance = num(v)?,
            "verify.pearson" => self.verify_pearson = num(v)?,
            "output_dir" => self.output_dir = PathBuf::from(v),
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    /// Value of `key` in canonical form.
    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "neuron.theta" => self.threshold.to_string(),
            "neuron.decay" => self.decay.to_string(),
            "neuron.channels" => self.channels.to_string(),
            "rule.kind" => match self.rule {
                RuleName::Hebbian => "hebbian",
                RuleName::Stdp => "stdp",
                RuleName::Decay => "decay",
            }
            .into(),
            "rule.epsilon" => self.epsilon.to_string(),
            "rule.kernel" => match self.kernel {
                KernelName::Constant => "constant",
                KernelName::Uniform => "uniform",
                KernelName::Exponential => "exponential",
            }
            .into(),
            "rule.time_constant" => self.time_constant.to_string(),
            "rule.window" => self.window.to_string(),
            "rule.norm" => self.norm.to_string(),
            "rule.delta" => self.delta.to_string(),
            "rule.frozen" => self.frozen.to_string(),
            "inputs.kind" => match self.input {
                InputKind::Poisson => "poisson",
                InputKind::Biased => "biased",
                InputKind::Gaussian => "gaussian",
                InputKind::Mnist => "mnist",
                InputKind::Replay => "replay",
            }
            .into(),
            "inputs.rate" => self.rate.to_string(),
            "inputs.rates" => join(&self.rates),
            "inputs.combined_rate" => self.combined_rate.to_string(),
            "inputs.bias" => join(&self.bias),
            "inputs.mu" => self.mu.to_string(),
            "inputs.sigma" => self.sigma.to_string(),
            "inputs.redraw" => join(&self.redraw),
            "inputs.mnist_dir" => show_path(&self.mnist_dir),
            "inputs.mnist_rate" => self.mnist_rate.to_string(),
            "inputs.row" => self.row.to_string(),
            "inputs.schedule" => self.schedule.iter().map(|(d, t)| format!("{d}:{t}")).collect::<Vec<_>>().join(","),
            "inputs.digits" => join(&self.digits),
            "inputs.replay" => show_path(&self.replay),
            "duration" => self.duration.to_string(),
            "initial_weights" => match &self.initial_weights {
                InitialWeights::Uniform => "uniform".into(),
                InitialWeights::Random(None) => "random".into(),
                InitialWeights::Random(Some(s)) => format!("random:{s}"),
                InitialWeights::Values(v) => join(v),
                InitialWeights::File(p) => format!("file:{}", p.display()),
            },
            "estimator.window" => show_window(self.estimator_window),
            "estimator.every" => self.estimator_every.to_string(),
            "estimator.adaptive" => self.adaptive.to_string(),
            "estimator.burn_in" => self.burn_in.to_string(),
            "snapshot_cadence" => self.snapshot_cadence.to_string(),
            "log.spikes" => match self.spike_log {
                SpikeLog::None => "none".into(),
                SpikeLog::All => "all".into(),
                SpikeLog::Recent(n) => format!("recent:{n}"),
            },
            "seed" => self.seed.to_string(),
            "repeats" => self.repeats.to_string(),
            "sweep.w1" => format!("{}:{}:{}", self.sweep_w1.0, self.sweep_w1.1, self.sweep_w1.2),
            "sweep.epsilons" => join(&self.sweep_steps),
            "oracle.decays" => join(&self.oracle_decays),
            "oracle.resolution" => self.oracle_resolution.to_string(),
            "oracle.length" => self.oracle_length.to_string(),
            "oracle.rate" => self.oracle_rate.to_string(),
            "oracle.tolerance" => self.oracle_tolerance.to_string(),
            "novelty.factor" => self.novelty_factor.to_string(),
            "novelty.trailing" => self.novelty_trailing.to_string(),
            "novelty.horizon" => self.novelty_horizon.to_string(),
            "verify.tolerance" => self.verify_tolerance.to_string(),
            "verify.pearson" => self.verify_pearson.to_string(),
            "output_dir" => self.output_dir.display().to_string(),
            _ => return None,
        })
    }

    /// All settings except `output_dir`, one `key=value` per line, in
    /// canonical order. Parsing the result yields an equal configuration
    /// (up to `output_dir`).
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            let _ = writeln!(out, "{key}={}", self.get(key).expect("canonical key"));
        }
        out
    }

    /// First 16 hex digits of the SHA-256 of [`RunConfig::canonical`].
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Comment line carried by every artifact.
    pub fn manifest_line(&self) -> String {
        format!("# hebb-lab config_hash={} seed={}", self.hash(), self.seed)
    }

    /// Number of channels actually driven by the inputs.
    pub fn input_channels(&self) -> usize {
        match self.input {
            InputKind::Poisson if !self.rates.is_empty() => self.rates.len(),
            InputKind::Biased => self.bias.len(),
            InputKind::Mnist => 28,
            _ => self.channels,
        }
    }

    /// Ordered sweep grid for `w_1`.
    pub fn sweep_grid(&self) -> Vec<f64> {
        let (a, b, s) = self.sweep_w1;
        if !(s > 0.0) || b < a {
            return vec![a];
        }
        let n = ((b - a) / s + 1e-9).floor() as usize;
        (0..=n).map(|k| ((a + k as f64 * s) * 1e12).round() / 1e12).collect()
    }

    /// Everything wrong with the configuration.
    pub fn problems(&self) -> Vec<String> {
        let mut p = Vec::new();
        let mut check = |ok: bool, msg: String| {
            if !ok {
                p.push(msg);
            }
        };
        check(self.threshold > 0.0 && self.threshold.is_finite(), format!("neuron.theta must be > 0, got {}", self.threshold));
        check(self.decay >= 0.0 && self.decay.is_finite(), format!("neuron.decay must be >= 0, got {}", self.decay));
        check(self.channels >= 1, "neuron.channels must be >= 1".into());
        check(self.epsilon > 0.0 && self.epsilon.is_finite(), format!("rule.epsilon must be > 0, got {}", self.epsilon));
        check(self.window >= 0.0 && self.window.is_finite(), format!("rule.window must be >= 0, got {}", self.window));
        check(self.norm >= 1.0 && self.norm.is_finite(), format!("rule.norm must be >= 1, got {}", self.norm));
        check(
            self.kernel != KernelName::Exponential || self.time_constant > 0.0,
            format!("rule.time_constant must be > 0, got {}", self.time_constant),
        );
        if self.rule == RuleName::Decay {
            check(self.delta > 0.0 && self.delta < 1.0, format!("rule.delta must lie in (0, 1), got {}", self.delta));
        }
        let n = self.input_channels();
        check(
            n == self.channels,
            format!("inputs drive {n} channels but neuron.channels is {}", self.channels),
        );
        match self.input {
            InputKind::Poisson => {
                if self.rates.is_empty() {
                    check(self.rate > 0.0 && self.rate.is_finite(), format!("inputs.rate must be > 0, got {}", self.rate));
                }
                for r in &self.rates {
                    check(*r > 0.0 && r.is_finite(), format!("inputs.rates entries must be > 0, got {r}"));
                }
            }
            InputKind::Biased => {
                check(self.combined_rate > 0.0, format!("inputs.combined_rate must be > 0, got {}", self.combined_rate));
                check(!self.bias.is_empty(), "inputs.bias is required for biased inputs".into());
                check(self.bias.iter().all(|b| *b >= 0.0), "inputs.bias entries must be >= 0".into());
                let s: f64 = self.bias.iter().sum();
                check(self.bias.is_empty() || (s - 1.0).abs() <= 1e-12, format!("inputs.bias must sum to 1, got {s}"));
            }
            InputKind::Gaussian => {
                check(self.sigma >= 0.0, format!("inputs.sigma must be >= 0, got {}", self.sigma));
                check(self.mu.is_finite(), "inputs.mu must be finite".into());
                let inc = self.redraw.windows(2).all(|w| w[1] > w[0]);
                check(inc, "inputs.redraw times must increase".into());
                check(self.redraw.iter().all(|t| *t > 0.0), "inputs.redraw times must be > 0".into());
            }
            InputKind::Mnist => {
                check(!self.schedule.is_empty(), "inputs.schedule is required for mnist inputs".into());
                check(self.schedule.iter().all(|(d, t)| *d <= 9 && *t >= 0.0), "inputs.schedule needs digits 0-9 and durations >= 0".into());
                check(self.row < 28, format!("inputs.row must be < 28, got {}", self.row));
                check(self.mnist_rate > 0.0, format!("inputs.mnist_rate must be > 0, got {}", self.mnist_rate));
            }
            InputKind::Replay => check(self.replay.is_some(), "inputs.replay is required for replay inputs".into()),
        }
        check(self.duration >= 0.0 && self.duration.is_finite(), format!("duration must be >= 0, got {}", self.duration));
        if let InitialWeights::Values(v) = &self.initial_weights {
            check(v.len() == self.channels, format!("initial_weights has {} entries for {} channels", v.len(), self.channels));
            check(v.iter().all(|w| *w >= 0.0), "initial_weights entries must be >= 0".into());
            check(v.iter().any(|w| *w > 0.0), "initial_weights must not be all zero".into());
        }
        match self.estimator_window {
            WindowMode::Sliding(0) => check(false, "estimator.window sliding length must be > 0".into()),
            WindowMode::Exponential(f) => check(f > 0.0 && f <= 1.0, format!("estimator.window factor must lie in (0, 1], got {f}")),
            _ => {}
        }
        check(self.estimator_every >= 1, "estimator.every must be >= 1".into());
        check(self.burn_in >= 0.0, format!("estimator.burn_in must be >= 0, got {}", self.burn_in));
        check(self.snapshot_cadence > 0.0, format!("snapshot_cadence must be > 0, got {}", self.snapshot_cadence));
        check(self.repeats >= 1, "repeats must be >= 1".into());
        let (a, b, s) = self.sweep_w1;
        check((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b) && a <= b && s > 0.0, format!("sweep.w1 {a}:{b}:{s} must satisfy 0 <= start <= end <= 1, step > 0"));
        check(self.sweep_steps.iter().all(|e| e.amplitude() > 0.0), "sweep.epsilons entries must be > 0".into());
        check(self.oracle_decays.iter().all(|d| *d >= 0.0), "oracle.decays entries must be >= 0".into());
        check(self.oracle_resolution >= 2, "oracle.resolution must be >= 2".into());
        check((1..=24).contains(&self.oracle_length), "oracle.length must lie in 1..=24".into());
        check(self.oracle_rate > 0.0, "oracle.rate must be > 0".into());
        check((0.0..1.0).contains(&self.oracle_tolerance), "oracle.tolerance must lie in [0, 1)".into());
        check(self.novelty_factor > 1.0, "novelty.factor must be > 1".into());
        check(self.novelty_trailing >= 1, "novelty.trailing must be >= 1".into());
        check(self.novelty_horizon > 0.0, "novelty.horizon must be > 0".into());
        check(self.verify_tolerance > 0.0, "verify.tolerance must be > 0".into());
        p
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.problems();
        if p.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(p))
        }
    }
}
