//! Event-driven leaky integrate-and-fire neuron in continuous time.
//!
//! Between input events the membrane potential follows the closed form
//! `V(t) = V(t0) · exp(-d (t - t0))`; an input on channel `i` adds `w_i`, and
//! reaching the threshold emits an output spike and resets `V` to zero.

use std::collections::VecDeque;

use crate::error::{invalid, Error, Result};
use crate::plasticity::WeightVector;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpikeEvent {
    pub channel: usize,
    pub time: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OutputSpike {
    pub time: f64,
    /// Channel whose input pushed the potential across threshold.
    pub triggering_channel: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NeuronState {
    pub potential: f64,
    pub threshold: f64,
    pub decay_rate: f64,
    pub last_event_time: f64,
}

impl NeuronState {
    pub fn new(threshold: f64, decay_rate: f64) -> Result<Self> {
        if !(threshold > 0.0 && threshold.is_finite()) {
            return Err(invalid(format!("threshold must be > 0, got {threshold}")));
        }
        if !(decay_rate >= 0.0 && decay_rate.is_finite()) {
            return Err(invalid(format!("decay rate must be >= 0, got {decay_rate}")));
        }
        Ok(Self { potential: 0.0, threshold, decay_rate, last_event_time: 0.0 })
    }

    /// Leaks the potential forward to `time`.
    pub fn decay_to(&mut self, time: f64) -> Result<()> {
        if !(time >= self.last_event_time) {
            return Err(Error::TimeReversal { current: self.last_event_time, requested: time });
        }
        let dt = time - self.last_event_time;
        if self.decay_rate > 0.0 && dt > 0.0 {
            self.potential = (self.potential * (-self.decay_rate * dt).exp()).max(0.0);
        }
        self.last_event_time = time;
        Ok(())
    }

    /// Decays to the event time, adds the channel weight and fires if the
    /// potential reaches threshold (equality counts).
    pub fn receive(&mut self, weights: &[f64], event: SpikeEvent) -> Result<Option<OutputSpike>> {
        let w = *weights
            .get(event.channel)
            .ok_or(Error::ChannelOutOfRange { channel: event.channel, channels: weights.len() })?;
        self.decay_to(event.time)?;
        self.potential = (self.potential + w).max(0.0);
        if self.potential >= self.threshold {
            self.potential = 0.0;
            Ok(Some(OutputSpike { time: event.time, triggering_channel: event.channel }))
        } else {
            Ok(None)
        }
    }
}

pub fn decay_potential(state: &NeuronState, time: f64) -> Result<NeuronState> {
    let mut s = *state;
    s.decay_to(time)?;
    Ok(s)
}

pub fn deliver_spike(
    state: &NeuronState,
    weights: &WeightVector,
    event: SpikeEvent,
) -> Result<(NeuronState, Option<OutputSpike>)> {
    let mut s = *state;
    let out = s.receive(weights.values(), event)?;
    Ok((s, out))
}

/// Callbacks driven by [`run`]. Hooks may change the weights but never the
/// event stream.
pub trait RunHooks {
    /// Before the event at `time` is delivered.
    fn before_event(&mut self, _time: f64, _weights: &mut WeightVector) -> Result<()> {
        Ok(())
    }

    /// After delivery, with the output spike the event caused, if any.
    fn after_event(
        &mut self,
        _event: &SpikeEvent,
        _output: Option<&OutputSpike>,
        _weights: &mut WeightVector,
    ) -> Result<()> {
        Ok(())
    }

    /// Once the stream is exhausted (or stopped) at `end_time`.
    fn finish(&mut self, _end_time: f64, _weights: &mut WeightVector) -> Result<()> {
        Ok(())
    }

    /// Polled after every event; `true` ends the run early.
    fn stop(&self) -> bool {
        false
    }
}

impl RunHooks for () {}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SpikeLog {
    #[default]
    None,
    All,
    /// Keep only the most recent `n` input events.
    Recent(usize),
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub spike_log: SpikeLog,
    /// Weight snapshot cadence in time units.
    pub snapshot_every: Option<f64>,
    /// Nominal end of the run; defaults to the last event time.
    pub end_time: Option<f64>,
    /// Hard cap on delivered events.
    pub max_events: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightSnapshot {
    pub time: f64,
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    pub outputs: Vec<OutputSpike>,
    pub inputs: Vec<SpikeEvent>,
    pub snapshots: Vec<WeightSnapshot>,
    pub final_state: NeuronState,
    pub final_weights: WeightVector,
    pub events_processed: usize,
    pub end_time: f64,
}

/// Drives the neuron over a time-sorted stream. Ties must be ordered by
/// channel index.
pub fn run<I, H>(
    events: I,
    state: NeuronState,
    weights: WeightVector,
    hooks: &mut H,
    options: &RunOptions,
) -> Result<RunTrace>
where
    I: IntoIterator<Item = SpikeEvent>,
    H: RunHooks + ?Sized,
{
    if let Some(c) = options.snapshot_every {
        if !(c > 0.0) {
            return Err(invalid(format!("snapshot cadence must be > 0, got {c}")));
        }
    }
    let mut state = state;
    let mut weights = weights;
    let mut outputs = Vec::new();
    let mut log: VecDeque<SpikeEvent> = VecDeque::new();
    let mut snapshots = Vec::new();
    let mut next_snapshot = options.snapshot_every.map(|_| state.last_event_time);
    let mut prev: Option<SpikeEvent> = None;
    let mut processed = 0usize;

    for event in events {
        if options.max_events.is_some_and(|m| processed >= m) {
            break;
        }
        if let Some(p) = prev {
            if event.time < p.time || (event.time == p.time && event.channel < p.channel) {
                return Err(Error::UnsortedStream {
                    prev_time: p.time,
                    prev_channel: p.channel,
                    next_time: event.time,
                    next_channel: event.channel,
                });
            }
        }
        if let (Some(next), Some(every)) = (next_snapshot.as_mut(), options.snapshot_every) {
            while *next <= event.time {
                snapshots.push(WeightSnapshot { time: *next, weights: weights.values().to_vec() });
                *next += every;
            }
        }
        hooks.before_event(event.time, &mut weights)?;
        let output = state.receive(weights.values(), event)?;
        if let Some(o) = output {
            outputs.push(o);
        }
        match options.spike_log {
            SpikeLog::None => {}
            SpikeLog::All => log.push_back(event),
            SpikeLog::Recent(n) => {
                log.push_back(event);
                while log.len() > n {
                    log.pop_front();
                }
            }
        }
        hooks.after_event(&event, output.as_ref(), &mut weights)?;
        prev = Some(event);
        processed += 1;
        if hooks.stop() {
            break;
        }
    }

    let last = prev.map_or(state.last_event_time, |p| p.time);
    let end_time = options.end_time.map_or(last, |e| e.max(last));
    hooks.finish(end_time, &mut weights)?;
    if let (Some(next), Some(every)) = (next_snapshot.as_mut(), options.snapshot_every) {
        while *next < end_time {
            snapshots.push(WeightSnapshot { time: *next, weights: weights.values().to_vec() });
            *next += every;
        }
        snapshots.push(WeightSnapshot { time: end_time, weights: weights.values().to_vec() });
    }
    state.decay_to(end_time)?;

    Ok(RunTrace {
        outputs,
        inputs: log.into(),
        snapshots,
        final_state: state,
        final_weights: weights,
        events_processed: processed,
        end_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn neuron(v: f64, d: f64) -> NeuronState {
        NeuronState { potential: v, threshold: 0.94, decay_rate: d, last_event_time: 0.0 }
    }

    fn ev(channel: usize, time: f64) -> SpikeEvent {
        SpikeEvent { channel, time }
    }

    #[test]
    fn decay_examples() {
        assert_eq!(decay_potential(&neuron(0.5, 0.0), 10.0).unwrap().potential, 0.5);
        assert_relative_eq!(
            decay_potential(&neuron(0.5, 0.1), 1.0).unwrap().potential,
            0.5 * (-0.1f64).exp(),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            decay_potential(&neuron(0.94, 0.2), 5.0).unwrap().potential,
            0.94 * (-1.0f64).exp(),
            max_relative = 1e-15
        );
        let s = decay_potential(&neuron(0.5, 0.1), 3.0).unwrap();
        assert_eq!(s.last_event_time, 3.0);
    }

    #[test]
    fn time_must_not_run_backward() {
        let mut s = neuron(0.3, 0.1);
        s.last_event_time = 5.0;
        assert!(matches!(decay_potential(&s, 4.0), Err(Error::TimeReversal { .. })));
    }

    #[test]
    fn delivery_examples() {
        let w1 = WeightVector::new(vec![1.0], 1.0).unwrap();
        let (s, out) = deliver_spike(&neuron(0.0, 0.0), &w1, ev(0, 1.0)).unwrap();
        assert_eq!(out, Some(OutputSpike { time: 1.0, triggering_channel: 0 }));
        assert_eq!(s.potential, 0.0);

        let w2 = WeightVector::new(vec![0.5, 0.5], 1.0).unwrap();
        let (s, out) = deliver_spike(&neuron(0.0, 0.0), &w2, ev(0, 1.0)).unwrap();
        assert_eq!(out, None);
        assert_eq!(s.potential, 0.5);

        let (s, out) = deliver_spike(&neuron(0.5, 0.0), &w2, ev(1, 2.0)).unwrap();
        assert_eq!(out.unwrap().triggering_channel, 1);
        assert_eq!(s.potential, 0.0);

        assert!(matches!(
            deliver_spike(&neuron(0.0, 0.0), &w2, ev(2, 1.0)),
            Err(Error::ChannelOutOfRange { channel: 2, channels: 2 })
        ));
    }

    #[test]
    fn equality_counts_as_crossing() {
        let w = WeightVector::new(vec![0.47, 0.53], 1.0).unwrap();
        let mut s = NeuronState::new(0.94, 0.0).unwrap();
        assert!(s.receive(w.values(), ev(0, 1.0)).unwrap().is_none());
        assert!(s.receive(w.values(), ev(0, 2.0)).unwrap().is_some());
    }

    #[test]
    fn empty_stream() {
        let w = WeightVector::uniform(2, 1.0).unwrap();
        let t = run(Vec::new(), NeuronState::new(0.94, 0.0).unwrap(), w.clone(), &mut (), &RunOptions::default()).unwrap();
        assert!(t.outputs.is_empty());
        assert_eq!(t.final_weights, w);
    }

    #[test]
    fn every_spike_fires_a_unit_weight_neuron() {
        let w = WeightVector::new(vec![1.0], 1.0).unwrap();
        let events = vec![ev(0, 0.5), ev(0, 1.0), ev(0, 7.0)];
        let t = run(events, NeuronState::new(0.94, 0.0).unwrap(), w, &mut (), &RunOptions::default()).unwrap();
        assert_eq!(t.outputs.len(), 3);
    }

    #[test]
    fn unsorted_streams_are_rejected() {
        let w = WeightVector::uniform(2, 1.0).unwrap();
        let s = NeuronState::new(0.94, 0.0).unwrap();
        let r = run(vec![ev(0, 2.0), ev(0, 1.0)], s, w.clone(), &mut (), &RunOptions::default());
        assert!(matches!(r, Err(Error::UnsortedStream { .. })));
        let r = run(vec![ev(1, 2.0), ev(0, 2.0)], s, w, &mut (), &RunOptions::default());
        assert!(matches!(r, Err(Error::UnsortedStream { .. })));
    }

    #[test]
    fn snapshots_follow_cadence_and_logs_are_bounded() {
        let w = WeightVector::uniform(2, 1.0).unwrap();
        let events: Vec<SpikeEvent> = (1..=10).map(|k| ev(k % 2, k as f64)).collect();
        let opts = RunOptions {
            spike_log: SpikeLog::Recent(3),
            snapshot_every: Some(4.0),
            end_time: Some(12.0),
            max_events: None,
        };
        let t = run(events, NeuronState::new(0.94, 0.0).unwrap(), w, &mut (), &opts).unwrap();
        let times: Vec<f64> = t.snapshots.iter().map(|s| s.time).collect();
        assert_eq!(times, vec![0.0, 4.0, 8.0, 12.0]);
        assert_eq!(t.inputs.len(), 3);
        assert_eq!(t.inputs[2].time, 10.0);
        assert_eq!(t.end_time, 12.0);
    }

    proptest! {
        #[test]
        fn decay_is_query_transparent(v in 0.0f64..2.0, d in 0.0f64..1.0, t1 in 0.0f64..10.0, extra in 0.0f64..10.0) {
            let s = neuron(v, d);
            let two_step = decay_potential(&decay_potential(&s, t1).unwrap(), t1 + extra).unwrap();
            let one_step = decay_potential(&s, t1 + extra).unwrap();
            prop_assert!((two_step.potential - one_step.potential).abs() <= 1e-12 * v.max(1e-300));
            prop_assert!(two_step.potential <= v);
        }

        #[test]
        fn potential_stays_in_range(
            gaps in proptest::collection::vec(0.0f64..2.0, 1..200),
            chans in proptest::collection::vec(0usize..3, 200),
            d in 0.0f64..0.5,
        ) {
            let w = WeightVector::normalized(vec![0.2, 0.5, 0.3], 1.0).unwrap();
            let mut s = NeuronState::new(0.94, d).unwrap();
            let mut t = 0.0;
            for (g, c) in gaps.iter().zip(&chans) {
                t += g;
                let out = s.receive(w.values(), ev(*c, t)).unwrap();
                prop_assert!(s.potential >= 0.0 && s.potential < s.threshold);
                if out.is_some() {
                    prop_assert_eq!(s.potential, 0.0);
                }
            }
        }
    }
}
