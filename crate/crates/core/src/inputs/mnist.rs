use std::path::Path;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::neuron::SpikeEvent;
use crate::rng::{self, streams, SimRng};

use super::idx::{load_images, load_labels, ImageSet};

#[derive(Clone, Debug, PartialEq)]
pub struct MnistEncoderConfig {
    pub row: usize,
    /// Spikes per time unit over all channels.
    pub combined_rate: f64,
    /// Restrict image draws to these labels.
    pub digit_filter: Option<Vec<u8>>,
    pub seed: u64,
}

impl Default for MnistEncoderConfig {
    fn default() -> Self {
        Self { row: 14, combined_rate: 0.9 * 28.0, digit_filter: None, seed: 0 }
    }
}

/// Images with their labels.
#[derive(Clone, Debug)]
pub struct MnistDataset {
    images: ImageSet,
    labels: Vec<u8>,
}

const IMAGE_NAMES: [&str; 2] = ["train-images-idx3-ubyte", "train-images.idx3-ubyte"];
const LABEL_NAMES: [&str; 2] = ["train-labels-idx1-ubyte", "train-labels.idx1-ubyte"];

impl MnistDataset {
    pub fn new(images: ImageSet, labels: Vec<u8>) -> Result<Self> {
        if images.len() != labels.len() {
            return Err(invalid(format!("{} images but {} labels", images.len(), labels.len())));
        }
        Ok(Self { images, labels })
    }

    pub fn load(images: impl AsRef<Path>, labels: impl AsRef<Path>) -> Result<Self> {
        Self::new(load_images(images)?, load_labels(labels)?)
    }

    /// Loads the training split from a directory holding the standard
    /// uncompressed file names.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let find = |names: &[&str]| {
            names.iter().map(|n| dir.join(n)).find(|p| p.is_file()).ok_or_else(|| {
                Error::Io(std::io::Error::new(
                    std::io::ErrorKind::NotFound,
                    format!("none of {names:?} in {}", dir.display()),
                ))
            })
        };
        Self::load(find(&IMAGE_NAMES)?, find(&LABEL_NAMES)?)
    }

    pub fn images(&self) -> &ImageSet {
        &self.images
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Indices of images with `label` whose `row` has some intensity.
    pub fn usable(&self, label: u8, row: usize) -> Vec<usize> {
        (0..self.labels.len())
            .filter(|&k| self.labels[k] == label && self.images.row(k, row).iter().any(|&p| p > 0))
            .collect()
    }

    /// Mean normalized row intensity over the usable images of `label`.
    pub fn mean_row(&self, label: u8, row: usize) -> Result<Vec<f64>> {
        let usable = self.usable(label, row);
        if usable.is_empty() {
            return Err(Error::UnknownDigit(label));
        }
        let mut mean = vec![0.0; self.images.cols()];
        for &k in &usable {
            for (m, v) in mean.iter_mut().zip(normalized_row(self.images.row(k, row))?) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= usable.len() as f64);
        Ok(mean)
    }
}

/// `Ī = I / Σ I` for one pixel row.
pub fn normalized_row(row: &[u8]) -> Result<Vec<f64>> {
    let total: f64 = row.iter().map(|&p| p as f64).sum();
    if total == 0.0 {
        return Err(Error::ZeroIntensity);
    }
    Ok(row.iter().map(|&p| p as f64 / total).collect())
}

/// Draws one channel with probability proportional to pixel intensity.
pub fn mnist_encode_spike(row: &[u8], rng: &mut impl Rng) -> Result<usize> {
    let weights: Vec<f64> = row.iter().map(|&p| p as f64).collect();
    let total: f64 = weights.iter().sum();
    if total == 0.0 {
        return Err(Error::ZeroIntensity);
    }
    Ok(rng::categorical(rng, &weights, total))
}

/// Poisson spike times at the combined rate; every spike encodes a row of
/// a freshly drawn image of the digit scheduled at that time.
pub struct MnistStream<'a> {
    dataset: &'a MnistDataset,
    row: usize,
    rate: f64,
    phases: Vec<(f64, Vec<usize>)>,
    end: f64,
    phase: usize,
    next: f64,
    times: SimRng,
    images: SimRng,
}

impl<'a> MnistStream<'a> {
    /// `schedule` lists `(digit, duration)` phases back to back from 0.
    pub fn new(dataset: &'a MnistDataset, config: &MnistEncoderConfig, schedule: &[(u8, f64)]) -> Result<Self> {
        if schedule.is_empty() {
            return Err(invalid("MNIST schedule is empty"));
        }
        if config.row >= dataset.images().rows() {
            return Err(invalid(format!("row {} outside image of {} rows", config.row, dataset.images().rows())));
        }
        if !(config.combined_rate > 0.0 && config.combined_rate.is_finite()) {
            return Err(Error::InvalidRate(config.combined_rate));
        }
        let mut phases = Vec::with_capacity(schedule.len());
        let mut start = 0.0;
        for &(digit, duration) in schedule {
            if !(duration >= 0.0) {
                return Err(invalid(format!("phase duration must be >= 0, got {duration}")));
            }
            let allowed = config.digit_filter.as_ref().is_none_or(|f| f.contains(&digit));
            let usable = if allowed { dataset.usable(digit, config.row) } else { Vec::new() };
            if usable.is_empty() {
                return Err(Error::UnknownDigit(digit));
            }
            phases.push((start, usable));
            start += duration;
        }
        let mut times = rng::stream(config.seed, streams::INPUT);
        let next = rng::exponential(&mut times, config.combined_rate);
        Ok(Self {
            dataset,
            row: config.row,
            rate: config.combined_rate,
            phases,
            end: start,
            phase: 0,
            next,
            times,
            images: rng::stream(config.seed, streams::IMAGES),
        })
    }

    pub fn channels(&self) -> usize {
        self.dataset.images().cols()
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    /// Start times of the phases.
    pub fn boundaries(&self) -> Vec<f64> {
        self.phases.iter().map(|p| p.0).collect()
    }
}

impl Iterator for MnistStream<'_> {
    type Item = SpikeEvent;

    fn next(&mut self) -> Option<SpikeEvent> {
        let t = self.next;
        if t > self.end {
            return None;
        }
        while self.phase + 1 < self.phases.len() && t >= self.phases[self.phase + 1].0 {
            self.phase += 1;
        }
        self.next = t + rng::exponential(&mut self.times, self.rate);
        let usable = &self.phases[self.phase].1;
        let image = usable[self.images.random_range(0..usable.len())];
        let channel = mnist_encode_spike(self.dataset.images().row(image, self.row), &mut self.images)
            .expect("usable rows have nonzero intensity");
        Some(SpikeEvent { channel, time: t })
    }
}
