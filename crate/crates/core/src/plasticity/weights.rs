use crate::error::{invalid, Error, Result};

/// Non-negative channel weights together with the exponent `l` of the norm
/// they are kept normalized under.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector {
    values: Vec<f64>,
    norm_exponent: f64,
}

impl WeightVector {
    /// Wraps raw weights without normalizing them.
    pub fn new(values: Vec<f64>, norm_exponent: f64) -> Result<Self> {
        if !(norm_exponent >= 1.0 && norm_exponent.is_finite()) {
            return Err(invalid(format!("norm exponent must be >= 1, got {norm_exponent}")));
        }
        if values.is_empty() {
            return Err(invalid("weight vector needs at least one channel"));
        }
        if let Some(bad) = values.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return Err(invalid(format!("weights must be finite and >= 0, got {bad}")));
        }
        Ok(Self { values, norm_exponent })
    }

    /// Wraps and normalizes.
    pub fn normalized(values: Vec<f64>, norm_exponent: f64) -> Result<Self> {
        let mut w = Self::new(values, norm_exponent)?;
        w.normalize()?;
        Ok(w)
    }

    /// Equal weights with unit norm.
    pub fn uniform(channels: usize, norm_exponent: f64) -> Result<Self> {
        Self::normalized(vec![1.0; channels], norm_exponent)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, channel: usize) -> Result<f64> {
        self.values
            .get(channel)
            .copied()
            .ok_or(Error::ChannelOutOfRange { channel, channels: self.values.len() })
    }

    pub fn norm_exponent(&self) -> f64 {
        self.norm_exponent
    }

    /// `(Σ w_j^l)^(1/l)`.
    pub fn norm(&self) -> f64 {
        lp_norm(&self.values, self.norm_exponent)
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// `w_i / Σ_j w_j`, the l=1 view used by every constraint.
    pub fn sum_normalized(&self) -> Vec<f64> {
        let s = self.sum();
        self.values.iter().map(|w| w / s).collect()
    }

    /// `w_i^(l-1)`; equals 1 for l = 1 even when `w_i = 0`.
    pub fn moment(&self, channel: usize) -> f64 {
        power_moment(self.values[channel], self.norm_exponent)
    }

    /// Divides every entry by the current norm and returns that norm.
    pub fn normalize(&mut self) -> Result<f64> {
        let norm = self.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        for w in &mut self.values {
            *w /= norm;
        }
        Ok(norm)
    }

    pub(crate) fn set(&mut self, channel: usize, value: f64) {
        self.values[channel] = value;
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub(crate) fn check_channel(&self, channel: usize) -> Result<()> {
        if channel < self.values.len() {
            Ok(())
        } else {
            Err(Error::ChannelOutOfRange { channel, channels: self.values.len() })
        }
    }
}

/// Returns a normalized copy.
pub fn normalize(weights: &WeightVector) -> Result<WeightVector> {
    let mut out = weights.clone();
    out.normalize()?;
    Ok(out)
}

pub(crate) fn lp_norm(values: &[f64], l: f64) -> f64 {
    if l == 1.0 {
        values.iter().sum()
    } else if l == 2.0 {
        values.iter().map(|w| w * w).sum::<f64>().sqrt()
    } else {
        values.iter().map(|w| w.powf(l)).sum::<f64>().powf(1.0 / l)
    }
}

pub(crate) fn power_moment(w: f64, l: f64) -> f64 {
    if l == 1.0 {
        1.0
    } else if l == 2.0 {
        w
    } else {
        w.powf(l - 1.0)
    }
}
