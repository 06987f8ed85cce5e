use std::path::Path;

use proptest::prelude::*;

use hebb_constraints::experiment::artifacts::{self, read_final_weights, read_spikes, read_summary, read_weights, write_run};
use hebb_constraints::experiment::{novelty, simulate, sweep_initial_weights, verify_dir, verify_outcome, RunConfig};
use hebb_constraints::inputs::{ImageSet, MnistDataset};
use hebb_constraints::{Error, Execution};

fn config(lines: &str) -> RunConfig {
    RunConfig::parse(lines).unwrap()
}

#[test]
fn zero_duration_run_is_clean() {
    let c = config("duration=0");
    let outcome = simulate(&c, None).unwrap();
    assert_eq!(outcome.trace.events_processed, 0);
    assert!(outcome.trace.outputs.is_empty());
    let dir = tempfile::tempdir().unwrap();
    write_run(&outcome, dir.path()).unwrap();
    assert!(read_spikes(&dir.path().join(artifacts::SPIKES)).unwrap().is_empty());
    let rows = read_summary(&dir.path().join(artifacts::SUMMARY)).unwrap();
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r.p_hat == 0.0 && r.p_pred.is_nan() && r.w_final == 0.1));
}

#[test]
fn every_artifact_carries_the_manifest_line() {
    let c = config("duration=2000\nrule.kind=stdp\nrule.window=0.07\nestimator.every=100");
    let dir = tempfile::tempdir().unwrap();
    let paths = write_run(&simulate(&c, None).unwrap(), dir.path()).unwrap();
    assert_eq!(paths.len(), 7);
    let line = c.manifest_line();
    assert!(line.contains(&c.hash()) && line.contains("seed=1"));
    for p in paths {
        let text = std::fs::read_to_string(&p).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(line.as_str()), "{}", p.display());
        if p.extension().is_some_and(|e| e == "csv") {
            assert!(lines.next().is_some_and(|h| h.contains(',')), "{} lacks a header", p.display());
        }
    }
}

#[test]
fn artifacts_round_trip() {
    let c = config("duration=3000\ninitial_weights=random\nsnapshot_cadence=250");
    let outcome = simulate(&c, None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_run(&outcome, dir.path()).unwrap();
    let snaps = read_weights(&dir.path().join(artifacts::WEIGHTS)).unwrap();
    assert_eq!(snaps, outcome.trace.snapshots);
    assert_eq!(read_final_weights(&dir.path().join(artifacts::FINAL_WEIGHTS)).unwrap(), outcome.trace.final_weights.values());
    assert_eq!(read_spikes(&dir.path().join(artifacts::SPIKES)).unwrap(), outcome.trace.inputs);
    assert_eq!(artifacts::read_manifest(dir.path()).unwrap(), RunConfig { output_dir: c.output_dir.clone(), ..c.clone() });

    let resumed = config(&format!("duration=10\ninitial_weights=file:{}", dir.path().join(artifacts::FINAL_WEIGHTS).display()));
    let start = simulate(&resumed, None).unwrap().trace.snapshots[0].weights.clone();
    for (a, b) in start.iter().zip(outcome.trace.final_weights.values()) {
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn replayed_spikes_reproduce_outputs() {
    let c = config("duration=5000\nrule.kind=stdp\nrule.window=0.07\ninputs.kind=gaussian\ninputs.redraw=2500");
    let original = simulate(&c, None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_run(&original, dir.path()).unwrap();
    let mut r = c.clone();
    r.set("inputs.kind", "replay").unwrap();
    r.set("inputs.replay", &dir.path().join(artifacts::SPIKES).display().to_string()).unwrap();
    let replayed = simulate(&r, None).unwrap();
    assert_eq!(replayed.trace.outputs, original.trace.outputs);
    assert_eq!(replayed.trace.final_weights, original.trace.final_weights);
}

#[test]
fn config_errors_come_before_running() {
    let text = "neuron.channels=3\ninputs.rates=0.9,0.9\nrule.kind=decay\nrule.delta=2\nestimator.every=0";
    match RunConfig::parse(text) {
        Err(Error::Config(p)) => assert_eq!(p.len(), 3, "{p:?}"),
        other => panic!("{other:?}"),
    }
    let mut c = RunConfig::default();
    c.threshold = -1.0;
    assert!(matches!(simulate(&c, None), Err(Error::Config(_))));
}

#[test]
fn sweep_is_ordered_and_mode_independent() {
    let t = config("neuron.channels=2\nrule.window=0\nduration=3000\nsweep.w1=0.5:1:0.1\nsweep.epsilons=0.0005,uniform:0.1\nseed=9");
    let par = sweep_initial_weights(&t, Execution::Parallel).unwrap();
    let seq = sweep_initial_weights(&t, Execution::Sequential).unwrap();
    assert_eq!(par, seq);
    let inits: Vec<f64> = par.iter().take(6).map(|r| r.w1_init).collect();
    assert_eq!(inits, vec![0.5, 0.6, 0.7, 0.8, 0.9, 1.0]);
    assert_eq!(par[5].w1_final, 1.0);
    assert_eq!(par[11].w1_final, 1.0);
}

#[test]
fn hebbian_verify_passes_after_training_and_fails_frozen() {
    let trained = config("duration=100000\ninputs.kind=gaussian\nlog.spikes=none\nseed=4");
    let checks = verify_outcome(&simulate(&trained, None).unwrap());
    assert!(checks.iter().all(|c| c.passed), "{checks:?}");

    let mut frozen = trained.clone();
    frozen.set("rule.frozen", "true").unwrap();
    frozen.set("initial_weights", "random").unwrap();
    let checks = verify_outcome(&simulate(&frozen, None).unwrap());
    assert!(checks.iter().any(|c| !c.passed), "{checks:?}");
}

#[test]
fn decay_verify_from_artifacts() {
    let c = config("rule.kind=decay\nneuron.channels=5\ninputs.rates=0.5,0.7,0.9,1.1,1.3\nrule.epsilon=0.001\nduration=100000\nestimator.window=cumulative\nestimator.burn_in=10000\nlog.spikes=none");
    let dir = tempfile::tempdir().unwrap();
    write_run(&simulate(&c, None).unwrap(), dir.path()).unwrap();
    let (back, checks) = verify_dir(dir.path()).unwrap();
    assert_eq!(back.rule, c.rule);
    assert!(checks.iter().any(|c| c.name == "decay.weight_sum"));
    assert!(checks.iter().all(|c| c.passed), "{checks:?}");
}

#[test]
fn verify_reports_missing_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    match verify_dir(dir.path()) {
        Err(Error::Config(p)) => assert!(p[0].contains("manifest.txt")),
        other => panic!("{other:?}"),
    }
}

/// Three "digits" whose row 14 lights up different overlapping bands over a dim background.
fn synthetic_digits(dir: &Path) {
    let (rows, cols) = (28usize, 28usize);
    let bands = [(5u8, 2..14), (1u8, 8..20), (0u8, 14..26)];
    let mut pixels = Vec::new();
    let mut labels = Vec::new();
    for k in 0..30 {
        let (label, band) = &bands[k % 3];
        let mut img = vec![0u8; rows * cols];
        img[14 * cols..15 * cols].fill(4);
        for c in band.clone() {
            img[14 * cols + c] = 40 + ((k * 37 + c * 11) % 200) as u8;
        }
        pixels.extend(img);
        labels.push(*label);
    }
    let mut images = vec![0, 0, 8, 3];
    for d in [30u32, 28, 28] {
        images.extend(d.to_be_bytes());
    }
    images.extend(pixels);
    let mut lab = vec![0, 0, 8, 1];
    lab.extend(30u32.to_be_bytes());
    lab.extend(labels);
    std::fs::write(dir.join("train-images-idx3-ubyte"), images).unwrap();
    std::fs::write(dir.join("train-labels-idx1-ubyte"), lab).unwrap();
}

#[test]
fn digit_switches_raise_delta() {
    let dir = tempfile::tempdir().unwrap();
    synthetic_digits(dir.path());
    let data = MnistDataset::from_dir(dir.path()).unwrap();
    assert_eq!(data.images().len(), 30);
    let _: &ImageSet = data.images();
    let c = config(&format!(
        "neuron.channels=28\ninputs.kind=mnist\ninputs.mnist_dir={}\ninputs.schedule=5:100000,1:100000,0:100000\n\
         duration=300000\nestimator.adaptive=true\nrule.epsilon=0.001\nestimator.burn_in=20000\ninitial_weights=random\nlog.spikes=none",
        dir.path().display()
    ));
    let outcome = simulate(&c, None).unwrap();
    assert_eq!(outcome.boundaries, vec![100000.0, 200000.0]);
    let r = novelty::phase_responses(outcome.monitor.samples(), &outcome.boundaries, outcome.trace.end_time, c.novelty_horizon);
    assert!(r.iter().all(|r| r.passed(5.0)), "{r:?}");
}

#[test]
fn stationary_input_raises_no_alert() {
    let c = config("inputs.kind=gaussian\ninputs.sigma=1\nduration=300000\nestimator.adaptive=true\nrule.epsilon=0.001\nestimator.burn_in=50000\ninitial_weights=random\nlog.spikes=none");
    let outcome = simulate(&c, None).unwrap();
    assert!(outcome.boundaries.is_empty());
    assert_eq!(novelty::alerts(&c, outcome.monitor.samples()), vec![]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_text_round_trips(
        theta in 0.1f64..2.0,
        decay in 0.0f64..1.0,
        eps in 1e-6f64..0.1,
        window in 0.0f64..0.5,
        seed in any::<u64>(),
        rates in prop::collection::vec(0.05f64..3.0, 1..12),
        kind in prop::sample::select(vec!["hebbian", "stdp", "decay"]),
    ) {
        let mut c = RunConfig::default();
        c.threshold = theta;
        c.decay = decay;
        c.epsilon = eps;
        c.window = window;
        c.seed = seed;
        c.channels = rates.len();
        c.rates = rates;
        c.set("rule.kind", kind).unwrap();
        let back = RunConfig::parse(&c.canonical()).unwrap();
        prop_assert_eq!(back.hash(), c.hash());
        prop_assert_eq!(back, c);
    }
}
