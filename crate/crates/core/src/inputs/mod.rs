//! Spike sources: independent Poisson trains, biased merged streams,
//! Gaussian-drawn rates and the MNIST row encoder.

mod idx;
mod mnist;

pub use idx::{load_idx, load_images, load_labels, parse_idx, IdxData, ImageSet};
pub use mnist::{mnist_encode_spike, normalized_row, MnistDataset, MnistEncoderConfig, MnistStream};

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Error, Result};
use crate::neuron::SpikeEvent;
use crate::rng::{self, streams, SimRng};

/// Lowest rate a Gaussian draw is clipped to.
pub const RATE_FLOOR: f64 = 0.01;

/// Input rates, either per channel or as a combined rate split by bias.
#[derive(Clone, Debug, PartialEq)]
pub enum RateSpec {
    PerChannel(Vec<f64>),
    /// One merged Poisson process; each spike goes to channel `i` with
    /// probability `bias[i]`.
    Biased { combined_rate: f64, bias: Vec<f64> },
}

impl RateSpec {
    pub fn per_channel(rates: Vec<f64>) -> Result<Self> {
        let spec = RateSpec::PerChannel(rates);
        spec.validate()?;
        Ok(spec)
    }

    pub fn uniform(channels: usize, rate: f64) -> Result<Self> {
        Self::per_channel(vec![rate; channels])
    }

    pub fn biased(combined_rate: f64, bias: Vec<f64>) -> Result<Self> {
        let spec = RateSpec::Biased { combined_rate, bias };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RateSpec::PerChannel(rates) => {
                if rates.is_empty() {
                    return Err(invalid("rate list is empty"));
                }
                if let Some(&r) = rates.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
                    return Err(Error::InvalidRate(r));
                }
            }
            RateSpec::Biased { combined_rate, bias } => {
                if !(*combined_rate > 0.0 && combined_rate.is_finite()) {
                    return Err(Error::InvalidRate(*combined_rate));
                }
                if bias.is_empty() || bias.iter().any(|b| !(*b >= 0.0)) {
                    return Err(invalid("bias entries must be >= 0"));
                }
                let total: f64 = bias.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(invalid(format!("bias must sum to 1, got {total}")));
                }
            }
        }
        Ok(())
    }

    pub fn channels(&self) -> usize {
        match self {
            RateSpec::PerChannel(r) => r.len(),
            RateSpec::Biased { bias, .. } => bias.len(),
        }
    }

    /// Expected spikes per time unit over all channels.
    pub fn total_rate(&self) -> f64 {
        match self {
            RateSpec::PerChannel(r) => r.iter().sum(),
            RateSpec::Biased { combined_rate, .. } => *combined_rate,
        }
    }

    /// Per-channel rates (for the biased form, `combined_rate · bias_i`).
    pub fn channel_rates(&self) -> Vec<f64> {
        match self {
            RateSpec::PerChannel(r) => r.clone(),
            RateSpec::Biased { combined_rate, bias } => bias.iter().map(|b| b * combined_rate).collect(),
        }
    }
}

/// Rates drawn from `Normal(mu, sigma)` and clipped below at [`RATE_FLOOR`].
pub fn gaussian_rates(channels: usize, mu: f64, sigma: f64, seed: u64) -> Result<RateSpec> {
    gaussian_rates_from(&mut rng::stream(seed, streams::RATES), channels, mu, sigma)
}

pub fn gaussian_rates_from(rng: &mut impl Rng, channels: usize, mu: f64, sigma: f64) -> Result<RateSpec> {
    if channels == 0 {
        return Err(invalid("need at least one channel"));
    }
    let normal = Normal::new(mu, sigma).map_err(|e| invalid(format!("bad normal({mu}, {sigma}): {e}")))?;
    let rates = (0..channels).map(|_| normal.sample(rng).max(RATE_FLOOR)).collect();
    RateSpec::per_channel(rates)
}

/// One segment of a piecewise-stationary input schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct RatePhase {
    pub start: f64,
    pub rates: RateSpec,
}

/// Lazily generated, time-sorted Poisson input.
///
/// Each channel draws from its own random stream, so per-channel trains do
/// not depend on how many other channels exist. At a phase boundary every
/// pending arrival is redrawn from the boundary with the new rates, which
/// is exact by memorylessness.
pub struct PoissonStream {
    phases: Vec<RatePhase>,
    phase: usize,
    end: f64,
    channel_rngs: Vec<SimRng>,
    channel_next: Vec<f64>,
    merged_rng: SimRng,
    merged_next: f64,
}

impl PoissonStream {
    pub fn new(rates: RateSpec, end: f64, seed: u64) -> Result<Self> {
        Self::phased(vec![RatePhase { start: 0.0, rates }], end, seed)
    }

    pub fn phased(phases: Vec<RatePhase>, end: f64, seed: u64) -> Result<Self> {
        let first = phases.first().ok_or_else(|| invalid("input schedule is empty"))?;
        if first.start != 0.0 {
            return Err(invalid("first input phase must start at 0"));
        }
        let channels = first.rates.channels();
        for pair in phases.windows(2) {
            if !(pair[1].start > pair[0].start) {
                return Err(invalid("input phases must start at increasing times"));
            }
        }
        for p in &phases {
            p.rates.validate()?;
            if p.rates.channels() != channels {
                return Err(invalid("all input phases need the same channel count"));
            }
        }
        if !(end >= 0.0) {
            return Err(invalid(format!("end time must be >= 0, got {end}")));
        }
        let mut s = Self {
            phases,
            phase: 0,
            end,
            channel_rngs: (0..channels as u64).map(|i| rng::stream(seed, streams::CHANNEL_BASE + i)).collect(),
            channel_next: vec![f64::INFINITY; channels],
            merged_rng: rng::stream(seed, streams::INPUT),
            merged_next: f64::INFINITY,
        };
        s.enter_phase(0, 0.0);
        Ok(s)
    }

    pub fn channels(&self) -> usize {
        self.channel_next.len()
    }

    fn enter_phase(&mut self, phase: usize, from: f64) {
        self.phase = phase;
        match &self.phases[phase].rates {
            RateSpec::PerChannel(rates) => {
                for ((r, n), &rate) in self.channel_rngs.iter_mut().zip(&mut self.channel_next).zip(rates) {
                    *n = from + rng::exponential(r, rate);
                }
                self.merged_next = f64::INFINITY;
            }
            RateSpec::Biased { combined_rate, .. } => {
                self.merged_next = from + rng::exponential(&mut self.merged_rng, *combined_rate);
                self.channel_next.fill(f64::INFINITY);
            }
        }
    }

    fn peek(&self) -> (f64, usize) {
        let mut best = (self.merged_next, usize::MAX);
        for (i, &t) in self.channel_next.iter().enumerate() {
            if t < best.0 {
                best = (t, i);
            }
        }
        best
    }
}

impl Iterator for PoissonStream {
    type Item = SpikeEvent;

    fn next(&mut self) -> Option<SpikeEvent> {
        loop {
            let (t, channel) = self.peek();
            let boundary = self.phases.get(self.phase + 1).map_or(f64::INFINITY, |p| p.start);
            if t >= boundary && boundary <= self.end {
                self.enter_phase(self.phase + 1, boundary);
                continue;
            }
            if t > self.end {
                return None;
            }
            return Some(match &self.phases[self.phase].rates {
                RateSpec::PerChannel(rates) => {
                    self.channel_next[channel] = t + rng::exponential(&mut self.channel_rngs[channel], rates[channel]);
                    SpikeEvent { channel, time: t }
                }
                RateSpec::Biased { combined_rate, bias } => {
                    let channel = rng::categorical(&mut self.merged_rng, bias, 1.0);
                    self.merged_next = t + rng::exponential(&mut self.merged_rng, *combined_rate);
                    SpikeEvent { channel, time: t }
                }
            });
        }
    }
}

/// Time-sorted Poisson spikes on `[0, end]`.
pub fn poisson_stream(rates: &RateSpec, end: f64, seed: u64) -> Result<Vec<SpikeEvent>> {
    Ok(PoissonStream::new(rates.clone(), end, seed)?.collect())
}
