use rand::Rng;

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KernelShape {
    Constant,
    /// `amplitude · exp(-|offset| / time_constant)` inside the window.
    TruncatedExponential { time_constant: f64 },
}

/// Learning rate as a function of the signed offset between an input spike
/// and the output spike (negative = input fired first). Zero outside
/// `[-window, window]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsilonKernel {
    pub shape: KernelShape,
    pub amplitude: f64,
    pub window: f64,
    /// Constant kernels only: each update draws `Uniform(0, amplitude)`.
    pub randomized: bool,
}

impl EpsilonKernel {
    pub fn constant(amplitude: f64, window: f64) -> Result<Self> {
        Self::build(KernelShape::Constant, amplitude, window, false)
    }

    pub fn uniform_random(max: f64, window: f64) -> Result<Self> {
        Self::build(KernelShape::Constant, max, window, true)
    }

    pub fn truncated_exponential(amplitude: f64, time_constant: f64, window: f64) -> Result<Self> {
        if !(time_constant > 0.0 && time_constant.is_finite()) {
            return Err(invalid(format!("kernel time constant must be > 0, got {time_constant}")));
        }
        Self::build(KernelShape::TruncatedExponential { time_constant }, amplitude, window, false)
    }

    fn build(shape: KernelShape, amplitude: f64, window: f64, randomized: bool) -> Result<Self> {
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(invalid(format!("learning rate must be > 0, got {amplitude}")));
        }
        // window = 0 is the trigger-only limit: just the spike that crossed threshold.
        if !(window >= 0.0 && window.is_finite()) {
            return Err(invalid(format!("learning window must be >= 0, got {window}")));
        }
        Ok(Self { shape, amplitude, window, randomized })
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.shape, KernelShape::Constant) && !self.randomized
    }

    /// Deterministic kernel value; for randomized kernels this is the upper bound.
    pub fn epsilon_at(&self, offset: f64) -> f64 {
        if !(offset.abs() <= self.window) {
            return 0.0;
        }
        match self.shape {
            KernelShape::Constant => self.amplitude,
            KernelShape::TruncatedExponential { time_constant } => {
                self.amplitude * (-offset.abs() / time_constant).exp()
            }
        }
    }

    /// Kernel value with the amplitude replaced by `amplitude`, drawing the
    /// random factor when the kernel is randomized.
    pub(crate) fn sample(&self, offset: f64, amplitude: f64, rng: &mut impl Rng) -> f64 {
        let base = self.epsilon_at(offset) * (amplitude / self.amplitude);
        if self.randomized && base > 0.0 {
            // (0, 1]: a zero step would be a non-event.
            base * (1.0 - rng.random::<f64>())
        } else {
            base
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_inside_and_outside() {
        let k = EpsilonKernel::constant(0.0001, 0.07).unwrap();
        assert_eq!(k.epsilon_at(-0.03), 0.0001);
        assert_eq!(k.epsilon_at(-0.08), 0.0);
        assert_eq!(k.epsilon_at(0.07), 0.0001);
        assert_eq!(k.epsilon_at(0.0700001), 0.0);
    }

    #[test]
    fn exponential_peaks_at_zero() {
        let k = EpsilonKernel::truncated_exponential(0.001, 0.02, 0.07).unwrap();
        assert_eq!(k.epsilon_at(0.0), 0.001);
        assert!(k.epsilon_at(0.01) < 0.001 && k.epsilon_at(0.01) > 0.0);
        assert_eq!(k.epsilon_at(0.01), k.epsilon_at(-0.01));
        assert_eq!(k.epsilon_at(0.2), 0.0);
    }

    #[test]
    fn randomized_draws_stay_in_range() {
        let k = EpsilonKernel::uniform_random(0.1, 0.0).unwrap();
        let mut rng = crate::rng::stream(5, 5);
        let draws: Vec<f64> = (0..10_000).map(|_| k.sample(0.0, k.amplitude, &mut rng)).collect();
        assert!(draws.iter().all(|e| *e > 0.0 && *e <= 0.1));
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        assert!((mean - 0.05).abs() < 0.002);
    }

    #[test]
    fn rejects_nonpositive_parameters() {
        assert!(EpsilonKernel::constant(0.0, 0.1).is_err());
        assert!(EpsilonKernel::constant(0.1, -1.0).is_err());
        assert!(EpsilonKernel::truncated_exponential(0.1, 0.0, 0.1).is_err());
    }
}
