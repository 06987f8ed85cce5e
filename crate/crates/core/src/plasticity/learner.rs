use std::collections::VecDeque;

use crate::error::Result;
use crate::neuron::{OutputSpike, RunHooks, SpikeEvent};
use crate::rng::{self, SimRng};

use super::rules::{PlasticityRule, UpdateEvent};
use super::weights::WeightVector;

/// Receives every update event a [`Learner`] produces.
pub trait UpdateObserver {
    /// `before` holds the weights just before `event` is applied.
    fn observe(&mut self, event: &UpdateEvent, before: &WeightVector);

    /// Updates belonging to the output spike at `output_time` follow.
    fn window_opening(&mut self, _output_time: f64) {}

    /// All updates belonging to the output spike at `output_time` are done.
    fn window_closed(&mut self, _output_time: f64, _weights: &WeightVector) {}

    /// Replaces the kernel amplitude for subsequent events.
    fn epsilon_amplitude(&self) -> Option<f64> {
        None
    }
}

impl UpdateObserver for () {
    fn observe(&mut self, _: &UpdateEvent, _: &WeightVector) {}
}

impl<O: UpdateObserver + ?Sized> UpdateObserver for &mut O {
    fn observe(&mut self, event: &UpdateEvent, before: &WeightVector) {
        (**self).observe(event, before)
    }
    fn window_opening(&mut self, t: f64) {
        (**self).window_opening(t)
    }
    fn window_closed(&mut self, t: f64, w: &WeightVector) {
        (**self).window_closed(t, w)
    }
    fn epsilon_amplitude(&self) -> Option<f64> {
        (**self).epsilon_amplitude()
    }
}

#[derive(Debug)]
struct PendingWindow {
    output: OutputSpike,
    pre: Vec<SpikeEvent>,
    post: Vec<SpikeEvent>,
}

/// Applies a [`PlasticityRule`] while the neuron runs.
///
/// Pre-window spikes are collected at the output spike; for STDP the
/// updates are held back until the post-window `(t, t + τ]` has closed and
/// are then applied chronologically. Inputs inside a pending window still
/// drive the potential with the not-yet-updated weights. A spike may sit in
/// the post-window of one output and the pre-window of the next; it then
/// counts for both.
#[derive(Debug)]
pub struct Learner<O = ()> {
    rule: PlasticityRule,
    frozen: bool,
    history: VecDeque<SpikeEvent>,
    pending: VecDeque<PendingWindow>,
    rng: SimRng,
    observer: O,
    windows_closed: usize,
    stop_after: Option<usize>,
}

impl<O: UpdateObserver> Learner<O> {
    pub fn new(rule: PlasticityRule, seed: u64, observer: O) -> Self {
        Self {
            rule,
            frozen: false,
            history: VecDeque::new(),
            pending: VecDeque::new(),
            rng: rng::stream(seed, rng::streams::LEARNING),
            observer,
            windows_closed: 0,
            stop_after: None,
        }
    }

    /// Produce update events without touching the weights.
    pub fn frozen(mut self) -> Self {
        self.frozen = true;
        self
    }

    /// Stop the run once this many output windows have been processed.
    pub fn stop_after(mut self, windows: usize) -> Self {
        self.stop_after = Some(windows);
        self
    }

    pub fn rule(&self) -> &PlasticityRule {
        &self.rule
    }

    pub fn observer(&self) -> &O {
        &self.observer
    }

    pub fn into_observer(self) -> O {
        self.observer
    }

    pub fn windows_closed(&self) -> usize {
        self.windows_closed
    }

    fn close(&mut self, window: PendingWindow, weights: &mut WeightVector) -> Result<()> {
        self.observer.window_opening(window.output.time);
        let amplitude = self.observer.epsilon_amplitude().unwrap_or(self.rule.kernel.amplitude);
        let kernel = self.rule.kernel;
        let rng = &mut self.rng;
        let observer = &mut self.observer;
        self.rule.apply_window(
            weights,
            &window.pre,
            &window.post,
            &window.output,
            |offset| kernel.sample(offset, amplitude, rng),
            |event, before| observer.observe(event, before),
            !self.frozen,
        )?;
        self.windows_closed += 1;
        self.observer.window_closed(window.output.time, weights);
        Ok(())
    }
}

impl<O: UpdateObserver> RunHooks for Learner<O> {
    fn before_event(&mut self, time: f64, weights: &mut WeightVector) -> Result<()> {
        let tau = self.rule.window();
        while self.pending.front().is_some_and(|p| p.output.time + tau < time) {
            let w = self.pending.pop_front().expect("front checked");
            self.close(w, weights)?;
        }
        Ok(())
    }

    fn after_event(
        &mut self,
        event: &SpikeEvent,
        output: Option<&OutputSpike>,
        weights: &mut WeightVector,
    ) -> Result<()> {
        let tau = self.rule.window();
        for p in &mut self.pending {
            if event.time > p.output.time {
                p.post.push(*event);
            }
        }
        self.history.push_back(*event);
        while self.history.front().is_some_and(|s| s.time < event.time - tau) {
            self.history.pop_front();
        }
        if let Some(out) = output {
            let window = PendingWindow {
                output: *out,
                pre: self.history.iter().copied().collect(),
                post: Vec::new(),
            };
            if self.rule.has_post_window() && tau > 0.0 {
                self.pending.push_back(window);
            } else {
                self.close(window, weights)?;
            }
        }
        Ok(())
    }

    fn finish(&mut self, _end_time: f64, weights: &mut WeightVector) -> Result<()> {
        while let Some(w) = self.pending.pop_front() {
            self.close(w, weights)?;
        }
        Ok(())
    }

    fn stop(&self) -> bool {
        self.stop_after.is_some_and(|n| self.windows_closed >= n)
    }
}
