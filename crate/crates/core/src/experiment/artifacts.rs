use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::neuron::{SpikeEvent, WeightSnapshot};

use super::config::RunConfig;
use super::runner::Outcome;

pub const SPIKES: &str = "spikes.csv";
pub const WEIGHTS: &str = "weights.csv";
pub const CONSTRAINTS: &str = "constraints.csv";
pub const DELTA: &str = "delta.csv";
pub const FINAL_WEIGHTS: &str = "final_weights.csv";
pub const SUMMARY: &str = "summary.csv";
pub const MANIFEST: &str = "manifest.txt";

/// Appends one row of `Display` fields to a [`Csv`].
#[macro_export]
macro_rules! csv_row {
    ($csv:expr; $first:expr $(, $rest:expr)* $(,)?) => {
        $csv.row(&[&$first as &dyn ::std::fmt::Display $(, &$rest)*])
    };
}

/// A CSV document under construction: manifest line, header, rows.
#[derive(Debug)]
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(config: &RunConfig, header: &str) -> Self {
        Self { text: format!("{}\n{header}\n", config.manifest_line()) }
    }

    pub fn row(&mut self, fields: &[&dyn std::fmt::Display]) {
        for (k, f) in fields.iter().enumerate() {
            if k > 0 {
                self.text.push(',');
            }
            let _ = write!(self.text, "{f}");
        }
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn write(&self, dir: &Path, name: &str) -> Result<PathBuf> {
        let path = dir.join(name);
        std::fs::write(&path, &self.text)?;
        Ok(path)
    }
}

/// Data rows of a CSV file: comment lines and the header are skipped.
pub fn read_rows(path: &Path) -> Result<Vec<Vec<String>>> {
    let file = std::fs::File::open(path).map_err(|e| missing(path, e))?;
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).flexible(true).trim(csv::Trim::All).from_reader(file);
    reader
        .records()
        .map(|r| {
            r.map(|rec| rec.iter().map(str::to_string).collect())
                .map_err(|e| Error::Config(vec![format!("{}: {e}", path.display())]))
        })
        .collect()
}

fn missing(path: &Path, e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::NotFound {
        Error::Config(vec![format!("missing artifact {}", path.display())])
    } else {
        e.into()
    }
}

fn field<T: std::str::FromStr>(path: &Path, row: &[String], k: usize) -> Result<T> {
    row.get(k)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Config(vec![format!("{}: malformed row {row:?}", path.display())]))
}

/// Per-channel digest of a finished run.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub channel: usize,
    /// Promotion fractions over the trailing estimator window.
    pub p_recent: f64,
    /// Promotion and demotion fractions over the whole run after burn-in.
    pub p_hat: f64,
    pub q_hat: f64,
    /// Constraint left-hand side, normalized weight and predicted promotion
    /// fraction, all at the event-averaged weights.
    pub lhs: f64,
    pub normalized_weight: f64,
    pub p_pred: f64,
    pub w_final: f64,
    pub w_mean: f64,
}

const SUMMARY_HEADER: &str = "channel,p_recent,p_hat,q_hat,lhs,normalized_weight,p_pred,w_final,w_mean";

pub fn summarize(outcome: &Outcome) -> Vec<SummaryRow> {
    let n = outcome.config.channels;
    let nan = vec![f64::NAN; n];
    let recent = outcome.monitor.recent();
    let cumulative = outcome.monitor.cumulative();
    let or_nan = |v: Vec<f64>| if v.len() == n { v } else { nan.clone() };
    let p_recent = or_nan(recent.promotion_probabilities());
    let p_hat = or_nan(cumulative.promotion_probabilities());
    let q_hat = or_nan(cumulative.demotion_probabilities());
    let w_mean = cumulative.mean_weights().unwrap_or_else(|| nan.clone());
    let (lhs, norm, pred) = match outcome.averaged_report() {
        Ok(r) => (r.lhs, r.normalized_weights, r.predicted_promotion),
        Err(_) => (nan.clone(), nan.clone(), nan.clone()),
    };
    let w_final = outcome.trace.final_weights.values();
    (0..n)
        .map(|i| SummaryRow {
            channel: i,
            p_recent: p_recent[i],
            p_hat: p_hat[i],
            q_hat: q_hat[i],
            lhs: lhs[i],
            normalized_weight: norm[i],
            p_pred: pred[i],
            w_final: w_final[i],
            w_mean: w_mean[i],
        })
        .collect()
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    read_rows(path)?
        .iter()
        .map(|r| {
            Ok(SummaryRow {
                channel: field(path, r, 0)?,
                p_recent: field(path, r, 1)?,
                p_hat: field(path, r, 2)?,
                q_hat: field(path, r, 3)?,
                lhs: field(path, r, 4)?,
                normalized_weight: field(path, r, 5)?,
                p_pred: field(path, r, 6)?,
                w_final: field(path, r, 7)?,
                w_mean: field(path, r, 8)?,
            })
        })
        .collect()
}

pub fn spikes_csv(outcome: &Outcome) -> Csv {
    let mut csv = Csv::new(&outcome.config, "time,kind,channel");
    let inputs = &outcome.trace.inputs;
    let outputs = &outcome.trace.outputs;
    let mut j = 0;
    for e in inputs {
        while j < outputs.len() && outputs[j].time < e.time {
            let o = outputs[j];
            crate::csv_row!(csv; o.time, "out", o.triggering_channel);
            j += 1;
        }
        crate::csv_row!(csv; e.time, "in", e.channel);
        while j < outputs.len() && outputs[j].time == e.time && outputs[j].triggering_channel == e.channel {
            let o = outputs[j];
            crate::csv_row!(csv; o.time, "out", o.triggering_channel);
            j += 1;
        }
    }
    for o in &outputs[j..] {
        crate::csv_row!(csv; o.time, "out", o.triggering_channel);
    }
    csv
}

/// Input events of a `spikes.csv` file, in file order.
pub fn read_spikes(path: &Path) -> Result<Vec<SpikeEvent>> {
    let mut events = Vec::new();
    for r in read_rows(path)? {
        if r.get(1).map(String::as_str) == Some("in") {
            events.push(SpikeEvent { time: field(path, &r, 0)?, channel: field(path, &r, 2)? });
        }
    }
    Ok(events)
}

fn weights_header(n: usize) -> String {
    std::iter::once("time".to_string()).chain((0..n).map(|i| format!("w{i}"))).collect::<Vec<_>>().join(",")
}

pub fn weights_csv(outcome: &Outcome) -> Csv {
    let mut csv = Csv::new(&outcome.config, &weights_header(outcome.config.channels));
    for s in &outcome.trace.snapshots {
        let mut fields: Vec<&dyn std::fmt::Display> = vec![&s.time];
        fields.extend(s.weights.iter().map(|w| w as &dyn std::fmt::Display));
        csv.row(&fields);
    }
    csv
}

pub fn read_weights(path: &Path) -> Result<Vec<WeightSnapshot>> {
    read_rows(path)?
        .iter()
        .map(|r| {
            let time = field(path, r, 0)?;
            let weights = (1..r.len()).map(|k| field(path, r, k)).collect::<Result<_>>()?;
            Ok(WeightSnapshot { time, weights })
        })
        .collect()
}

pub fn constraints_csv(outcome: &Outcome) -> Csv {
    let mut csv = Csv::new(&outcome.config, "time,channel,lhs,normalized_weight,p_hat,p_pred");
    for (t, r) in outcome.monitor.reports() {
        for i in 0..r.channels() {
            crate::csv_row!(csv; t, i, r.lhs[i], r.normalized_weights[i], r.estimated_promotion[i], r.predicted_promotion[i]);
        }
    }
    csv
}

pub fn delta_csv(outcome: &Outcome) -> Csv {
    let mut csv = Csv::new(&outcome.config, "time,delta,epsilon");
    for s in outcome.monitor.samples() {
        crate::csv_row!(csv; s.time, s.delta, s.epsilon);
    }
    csv
}

pub fn final_weights_csv(outcome: &Outcome) -> Csv {
    let mut csv = Csv::new(&outcome.config, "channel,weight");
    for (i, w) in outcome.trace.final_weights.values().iter().enumerate() {
        crate::csv_row!(csv; i, w);
    }
    csv
}

pub fn read_final_weights(path: &Path) -> Result<Vec<f64>> {
    read_rows(path)?.iter().map(|r| field(path, r, 1)).collect()
}

pub fn summary_csv(outcome: &Outcome) -> Csv {
    let mut csv = Csv::new(&outcome.config, SUMMARY_HEADER);
    for r in summarize(outcome) {
        crate::csv_row!(csv; r.channel, r.p_recent, r.p_hat, r.q_hat, r.lhs, r.normalized_weight, r.p_pred, r.w_final, r.w_mean);
    }
    csv
}

pub fn manifest(config: &RunConfig) -> String {
    format!("{}\n{}", config.manifest_line(), config.canonical())
}

pub fn read_manifest(dir: &Path) -> Result<RunConfig> {
    let path = dir.join(MANIFEST);
    RunConfig::parse(&std::fs::read_to_string(&path).map_err(|e| missing(&path, e))?)
}

/// Writes the full artifact set of one run into `dir`.
pub fn write_run(outcome: &Outcome, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = vec![
        spikes_csv(outcome).write(dir, SPIKES)?,
        weights_csv(outcome).write(dir, WEIGHTS)?,
        constraints_csv(outcome).write(dir, CONSTRAINTS)?,
        delta_csv(outcome).write(dir, DELTA)?,
        final_weights_csv(outcome).write(dir, FINAL_WEIGHTS)?,
        summary_csv(outcome).write(dir, SUMMARY)?,
    ];
    let path = dir.join(MANIFEST);
    std::fs::write(&path, manifest(&outcome.config))?;
    paths.push(path);
    Ok(paths)
}

/// Minimal matplotlib script that plots whichever artifacts exist.
pub const PLOT_SCRIPT: &str = r##"import csv, sys, pathlib
import matplotlib.pyplot as plt

def rows(path):
    with open(path) as f:
        data = [l for l in f if not l.startswith("#")]
    return list(csv.DictReader(data))

out = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else ".")
for name, x, ys in [
    ("delta.csv", "time", ["delta"]),
    ("sweep.csv", "w1_init", ["w1_final"]),
    ("summary.csv", "p_pred", ["p_hat"]),
]:
    path = out / name
    if not path.exists():
        continue
    data = rows(path)
    fig, ax = plt.subplots()
    for y in ys:
        ax.plot([float(r[x]) for r in data], [float(r[y]) for r in data], ".", label=y)
    ax.set_xlabel(x)
    ax.legend()
    fig.savefig(out / (path.stem + ".png"))
for path in sorted(out.glob("p_curve_*.csv")):
    data = rows(path)
    fig, ax = plt.subplots()
    ax.plot([float(r["w1"]) for r in data], [float(r["p1"]) for r in data])
    ax.plot([0, 1], [0, 1], "k--")
    fig.savefig(out / (path.stem + ".png"))
"##;

pub fn write_plot_script(dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join("plot.py");
    std::fs::write(&path, PLOT_SCRIPT)?;
    Ok(path)
}
