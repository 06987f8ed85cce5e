use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Arg, ArgAction, ArgMatches, Command};

use hebb_constraints::experiment::artifacts::{self, read_manifest, read_rows, write_plot_script, Csv};
use hebb_constraints::experiment::config::KEYS;
use hebb_constraints::experiment::{novelty, scan, sweep, verify};
use hebb_constraints::experiment::{plateaus, simulate, write_run, InputKind, RunConfig};
use hebb_constraints::{Error, Execution};

const PASS: u8 = 0;
const RUNTIME_ERROR: u8 = 1;
const VERIFY_FAILED: u8 = 2;

fn with_config_flags(cmd: Command) -> Command {
    let mut cmd = cmd
        .arg(Arg::new("config").long("config").short('c').value_name("FILE").help("key=value configuration file"))
        .arg(Arg::new("output_dir").long("output-dir").short('o').value_name("DIR").help("where artifacts are written"))
        .arg(Arg::new("sequential").long("sequential").action(ArgAction::SetTrue).help("run grids on one thread"));
    for key in KEYS {
        cmd = cmd.arg(Arg::new(*key).long(*key).value_name("VALUE").hide(true));
    }
    cmd
}

fn cli() -> Command {
    Command::new("hebb-lab")
        .about("Spiking-neuron plasticity experiments")
        .after_help("Every configuration key is also a flag, e.g. --neuron.theta 0.94 or --rule.kind stdp.")
        .subcommand_required(true)
        .subcommand(with_config_flags(Command::new("simulate").about("Run one configuration and write its artifacts")))
        .subcommand(with_config_flags(
            Command::new("sweep")
                .about("Final w1 over a grid of initial w1 and step sizes (two channels)")
                .arg(Arg::new("gap").long("plateau-gap").value_name("GAP").default_value("0.05").value_parser(clap::value_parser!(f64))),
        ))
        .subcommand(with_config_flags(Command::new("oracle-scan").about("Exact p1(w1) curves and their diagonal crossings")))
        .subcommand(with_config_flags(Command::new("novelty").about("Run with adaptive step size and log novelty alerts")))
        .subcommand(with_config_flags(
            Command::new("verify")
                .about("Check the steady-state constraint of a run")
                .arg(Arg::new("from").long("from").value_name("DIR").help("verify existing artifacts instead of running")),
        ))
        .subcommand(with_config_flags(
            Command::new("replay")
                .about("Re-run a recorded input stream and compare the output spikes")
                .arg(Arg::new("run").required(true).value_name("RUN_DIR")),
        ))
}

fn resolve(m: &ArgMatches, base: Option<RunConfig>) -> Result<RunConfig, Error> {
    let mut text = match (m.get_one::<String>("config"), base) {
        (Some(path), _) => std::fs::read_to_string(path)?,
        (None, Some(c)) => c.canonical(),
        (None, None) => String::new(),
    };
    for key in KEYS {
        if let Some(v) = m.get_one::<String>(key) {
            text.push_str(&format!("\n{key}={v}"));
        }
    }
    let mut config = RunConfig::parse(&text)?;
    if let Some(dir) = m.get_one::<String>("output_dir") {
        config.output_dir = PathBuf::from(dir);
    }
    Ok(config)
}

fn exec(m: &ArgMatches) -> Execution {
    if m.get_flag("sequential") {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn written(path: &Path) {
    println!("wrote {}", path.display());
}

fn cmd_simulate(config: &RunConfig) -> Result<u8, Error> {
    let outcome = simulate(config, None)?;
    for p in write_run(&outcome, &config.output_dir)? {
        written(&p);
    }
    written(&write_plot_script(&config.output_dir)?);
    println!(
        "{} input events, {} output spikes, end time {}",
        outcome.trace.events_processed,
        outcome.trace.outputs.len(),
        outcome.trace.end_time
    );
    Ok(PASS)
}

fn cmd_sweep(config: &RunConfig, m: &ArgMatches, exec: Execution) -> Result<u8, Error> {
    let rows = sweep::sweep_initial_weights(config, exec)?;
    let dir = &config.output_dir;
    std::fs::create_dir_all(dir)?;
    written(&sweep::sweep_csv(config, &rows).write(dir, "sweep.csv")?);
    let gap = *m.get_one::<f64>("gap").expect("default");
    let mut csv = Csv::new(config, "epsilon,center,min,max,count");
    for step in &config.sweep_steps {
        let finals: Vec<f64> = rows.iter().filter(|r| r.step == *step).map(|r| r.w1_final).collect();
        let found = plateaus(&finals, gap);
        let centers: Vec<String> = found.iter().map(|p| format!("{:.3}", p.center)).collect();
        println!("epsilon {step}: {} plateaus at [{}]", found.len(), centers.join(", "));
        for p in found {
            hebb_constraints::csv_row!(csv; step, p.center, p.min, p.max, p.count);
        }
    }
    written(&csv.write(dir, "plateaus.csv")?);
    written(&write_plot_script(dir)?);
    Ok(PASS)
}

fn cmd_oracle_scan(config: &RunConfig, exec: Execution) -> Result<u8, Error> {
    let dir = &config.output_dir;
    std::fs::create_dir_all(dir)?;
    for (d, s) in scan::oracle_scan(config, exec)? {
        let tag = scan::decay_tag(d);
        written(&scan::p_curve_csv(config, &s).write(dir, &format!("p_curve_{tag}.csv"))?);
        written(&scan::crossings_csv(config, &s).write(dir, &format!("crossings_{tag}.csv"))?);
        let list: Vec<String> = s.crossings.iter().map(|c| format!("{:.4} {}", c.w1, c.classification.as_str())).collect();
        println!("d={d} (length {}): {}", s.sequence_length, list.join(", "));
    }
    written(&write_plot_script(dir)?);
    Ok(PASS)
}

fn cmd_novelty(config: &RunConfig) -> Result<u8, Error> {
    let mut config = config.clone();
    config.adaptive = true;
    let outcome = simulate(&config, None)?;
    let dir = &config.output_dir;
    for p in write_run(&outcome, dir)? {
        written(&p);
    }
    let samples = outcome.monitor.samples();
    let alerts = novelty::alerts(&config, samples);
    written(&novelty::alerts_csv(&config, &alerts).write(dir, "alerts.csv")?);
    let responses = novelty::phase_responses(samples, &outcome.boundaries, outcome.trace.end_time, config.novelty_horizon);
    written(&novelty::responses_csv(&config, &responses).write(dir, "responses.csv")?);
    for a in &alerts {
        println!("alert at {}: peak {:.4} at {} over baseline {:.4}", a.start, a.peak, a.peak_time, a.baseline);
    }
    for r in &responses {
        println!("change at {}: peak/baseline {:.2}, recovered at {:?}", r.boundary, r.ratio(), r.recovered_at);
    }
    Ok(PASS)
}

fn cmd_verify(config: Option<RunConfig>, m: &ArgMatches) -> Result<u8, Error> {
    let (config, checks, dir) = match m.get_one::<String>("from") {
        Some(dir) => {
            let dir = PathBuf::from(dir);
            let (c, checks) = verify::verify_dir(&dir)?;
            (c, checks, dir)
        }
        None => {
            let config = config.expect("inline verification resolves a config");
            let outcome = simulate(&config, None)?;
            write_run(&outcome, &config.output_dir)?;
            let checks = verify::verify_outcome(&outcome);
            let dir = config.output_dir.clone();
            (config, checks, dir)
        }
    };
    written(&verify::verify_csv(&config, &checks).write(&dir, "verify.csv")?);
    for c in &checks {
        println!("{} {} measured={} threshold={}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.measured, c.threshold);
    }
    Ok(if checks.iter().all(|c| c.passed) { PASS } else { VERIFY_FAILED })
}

fn output_rows(path: &Path) -> Result<Vec<Vec<String>>, Error> {
    Ok(read_rows(path)?.into_iter().filter(|r| r.get(1).map(String::as_str) == Some("out")).collect())
}

fn cmd_replay(m: &ArgMatches) -> Result<u8, Error> {
    let run = PathBuf::from(m.get_one::<String>("run").expect("required"));
    let original = read_manifest(&run)?;
    let mut config = resolve(m, Some(original))?;
    if m.get_one::<String>("output_dir").is_none() {
        config.output_dir = run.join("replay");
    }
    config.input = InputKind::Replay;
    config.replay = Some(run.join(artifacts::SPIKES));
    config.validate()?;
    let outcome = simulate(&config, None)?;
    for p in write_run(&outcome, &config.output_dir)? {
        written(&p);
    }
    let before = output_rows(&run.join(artifacts::SPIKES))?;
    let after = output_rows(&config.output_dir.join(artifacts::SPIKES))?;
    if before == after {
        println!("PASS replay reproduced {} output spikes", after.len());
        Ok(PASS)
    } else {
        let first = before.iter().zip(&after).position(|(a, b)| a != b).unwrap_or(before.len().min(after.len()));
        println!("FAIL replay diverged at output spike {first} ({} recorded, {} replayed)", before.len(), after.len());
        Ok(VERIFY_FAILED)
    }
}

fn dispatch(m: &ArgMatches) -> Result<u8, Error> {
    let (name, sub) = m.subcommand().expect("subcommand required");
    match name {
        "replay" => cmd_replay(sub),
        "verify" if sub.get_one::<String>("from").is_some() => cmd_verify(None, sub),
        _ => {
            let config = resolve(sub, None)?;
            match name {
                "simulate" => cmd_simulate(&config),
                "sweep" => cmd_sweep(&config, sub, exec(sub)),
                "oracle-scan" => cmd_oracle_scan(&config, exec(sub)),
                "novelty" => cmd_novelty(&config),
                "verify" => cmd_verify(Some(config), sub),
                _ => unreachable!("unknown subcommand {name}"),
            }
        }
    }
}

fn main() -> ExitCode {
    let matches = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(RUNTIME_ERROR);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(PASS);
        }
    };
    match dispatch(&matches) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(RUNTIME_ERROR)
        }
    }
}
