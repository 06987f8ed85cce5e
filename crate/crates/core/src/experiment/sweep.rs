use crate::error::Result;
use crate::exec::Execution;

use super::artifacts::Csv;
use super::config::{InitialWeights, KernelName, RunConfig, StepSize};
use super::runner::train;

/// Seed of the `index`-th run derived from a base seed.
pub fn sub_seed(seed: u64, index: usize) -> u64 {
    let mut z = seed ^ (index as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub w1_init: f64,
    pub step: StepSize,
    pub repeat: usize,
    pub w1_final: f64,
}

/// Configuration of one sweep run, in grid order: step sizes outermost,
/// then initial weights, then repeats.
pub fn sweep_configs(template: &RunConfig) -> Vec<RunConfig> {
    let grid = template.sweep_grid();
    let mut out = Vec::new();
    for step in &template.sweep_steps {
        for &w1 in &grid {
            for repeat in 0..template.repeats {
                let mut c = template.clone();
                c.channels = 2;
                c.rates.clear();
                c.initial_weights = InitialWeights::Values(vec![w1, 1.0 - w1]);
                let (kernel, eps) = match *step {
                    StepSize::Constant(e) => (KernelName::Constant, e),
                    StepSize::Uniform(e) => (KernelName::Uniform, e),
                };
                c.kernel = kernel;
                c.epsilon = eps;
                c.sweep_steps = vec![*step];
                c.seed = sub_seed(template.seed, out.len());
                let _ = repeat;
                out.push(c);
            }
        }
    }
    out
}

/// Trains from every initial `w_1` with every step size and records the
/// final `w_1`. Rows come back in grid order whatever `exec` is.
pub fn sweep_initial_weights(template: &RunConfig, exec: Execution) -> Result<Vec<SweepRow>> {
    template.validate()?;
    let configs = sweep_configs(template);
    let grid = template.sweep_grid();
    let finals = exec.try_map(configs.len(), |k| train(&configs[k]).map(|w| w.values()[0]))?;
    let per_step = grid.len() * template.repeats;
    Ok(finals
        .into_iter()
        .enumerate()
        .map(|(k, w1_final)| SweepRow {
            w1_init: grid[(k % per_step) / template.repeats],
            step: template.sweep_steps[k / per_step],
            repeat: k % template.repeats,
            w1_final,
        })
        .collect())
}

pub fn sweep_csv(template: &RunConfig, rows: &[SweepRow]) -> Csv {
    let mut csv = Csv::new(template, "w1_init,epsilon,repeat,w1_final");
    for r in rows {
        crate::csv_row!(csv; r.w1_init, r.step, r.repeat, r.w1_final);
    }
    csv
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Plateau {
    pub center: f64,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

/// Groups values into runs whose sorted neighbours are at most `gap` apart.
pub fn plateaus(values: &[f64], gap: f64) -> Vec<Plateau> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mut out: Vec<Vec<f64>> = Vec::new();
    for x in v {
        match out.last_mut() {
            Some(group) if x - group[group.len() - 1] <= gap => group.push(x),
            _ => out.push(vec![x]),
        }
    }
    out.into_iter()
        .map(|g| Plateau {
            center: g.iter().sum::<f64>() / g.len() as f64,
            min: g[0],
            max: g[g.len() - 1],
            count: g.len(),
        })
        .collect()
}
