//! Command-line front end.
//!
//! Exit status: 0 on success, 1 for usage or scenario errors (reported before
//! any output file is touched), 2 for runtime failures such as a degenerate
//! estimate or an unwritable sink.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::analysis::{
    compare_empirical_analytic, estimate_growth_rate, linear_axis, sweep_with_tolerance, verify_grid_monte_carlo,
    StabilityGrid, SweepMode,
};
use crate::dynamics::{classify_stability, cumulative_limit, simulate_deterministic, total_gain, DEFAULT_TOLERANCE};
use crate::io::{
    parse_scenario_with_overrides, to_canonical_json, write_grid_csv, write_lanchester_csv, write_report_json,
    write_trajectory_csv, RunReport, Scenario,
};
use crate::lanchester::simulate_lanchester;
use crate::stochastic::{
    averaged_gain, min_achievable_gain, simulate_stochastic, Execution, MonteCarloConfig, NoiseDistribution,
    NoiseSpec, RandomSource,
};
use crate::trajectory::Trajectory;

#[derive(Debug, Parser)]
#[command(name = "sancdyn", version, about = "Sanctions / counter-sanctions dynamics and stability")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one path and write it as CSV (or JSON).
    Simulate(SimulateArgs),
    /// Estimate the mean-square growth factor by Monte Carlo.
    Montecarlo(MonteCarloArgs),
    /// Classify every cell of an (alpha, beta) grid.
    Sweep(SweepArgs),
    /// Growth-rate fit, limits and analytic-vs-empirical comparison for a scenario.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Scenario JSON file.
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override any scenario field, e.g. `--set alpha=0.7` (repeatable).
    #[arg(long = "set", value_name = "FIELD=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Also write a JSON run report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MonteCarloArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long)]
    pub trajectories: Option<u64>,
    /// Stages per path including the initial one; defaults to steps + 1. Must be odd.
    #[arg(long)]
    pub horizon: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Run paths on one thread (output is identical either way).
    #[arg(long)]
    pub serial: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Deterministic,
    MeanSquare,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Alpha axis as `start:stop:count`, inclusive.
    #[arg(long)]
    pub alpha: String,
    /// Beta axis as `start:stop:count`, inclusive.
    #[arg(long)]
    pub beta: String,
    #[arg(long, value_enum, default_value = "deterministic")]
    pub mode: ModeArg,
    #[arg(long)]
    pub sigma_x: Option<f64>,
    #[arg(long)]
    pub sigma_y: Option<f64>,
    #[arg(long, default_value = "gaussian")]
    pub distribution: String,
    /// Take the noise from a stochastic scenario file instead of the sigma flags.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    /// Monte Carlo check of every cell with this many paths (mean-square mode only).
    #[arg(long)]
    pub verify_trajectories: Option<u64>,
    #[arg(long, default_value_t = 11)]
    pub verify_horizon: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Paths for the analytic-vs-empirical comparison (stochastic scenarios).
    #[arg(long)]
    pub trajectories: Option<u64>,
    #[arg(long)]
    pub horizon: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<crate::error::Error> for Failure {
    fn from(e: crate::error::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

/// Run with the given arguments (including the program name); returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    0
                }
                _ => {
                    let _ = e.print();
                    1
                }
            };
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Montecarlo(a) => montecarlo(a),
        Command::Sweep(a) => sweep(a),
        Command::Analyze(a) => analyze(a),
    };
    match result {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

fn load_scenario(args: &ScenarioArgs, extra: &[(String, Value)]) -> Result<Scenario, Failure> {
    let text = fs::read(&args.scenario)
        .map_err(|e| Failure::Usage(format!("cannot read scenario {}: {e}", args.scenario.display())))?;
    let mut overrides = Vec::new();
    for item in &args.set {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--set expects FIELD=VALUE, got `{item}`")))?;
        let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_owned()));
        overrides.push((k.to_owned(), value));
    }
    if let Some(steps) = args.steps {
        overrides.push(("steps".into(), steps.into()));
    }
    if let Some(seed) = args.seed {
        overrides.push(("seed".into(), seed.into()));
    }
    overrides.extend_from_slice(extra);
    parse_scenario_with_overrides(&text, &overrides).map_err(|e| Failure::Usage(format!("scenario field {e}")))
}

fn base_report(command: &str, scenario: &Scenario) -> RunReport {
    let mut report = RunReport::new(command);
    report.scenario = Some(*scenario);
    match scenario {
        Scenario::Deterministic { params, .. } => {
            let q = total_gain(params);
            report.gains.q = Some(q);
            report.verdict = classify_stability(q, DEFAULT_TOLERANCE).ok().map(|v| v.class);
        }
        Scenario::Stochastic { params, .. } => {
            let q = total_gain(&params.base);
            let qbar = averaged_gain(params);
            report.gains.q = Some(q);
            report.gains.qbar = Some(qbar);
            report.gains.noise_floor = Some(min_achievable_gain(&params.noise));
            report.verdict = classify_stability(q, DEFAULT_TOLERANCE).ok().map(|v| v.class);
            report.mean_square_verdict = classify_stability(qbar, DEFAULT_TOLERANCE).ok().map(|v| v.class);
        }
        Scenario::Lanchester { .. } => {}
    }
    report
}

fn emit(out: Option<&PathBuf>, bytes: &[u8]) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, bytes)
            .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes)?;
            if !bytes.ends_with(b"\n") {
                stdout.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

fn path_str(p: Option<&PathBuf>) -> String {
    p.map(|p| p.display().to_string()).unwrap_or_else(|| "-".into())
}

fn trajectory_json(t: &Trajectory) -> Result<String, Failure> {
    let mut doc = json!({
        "schema": "sancdyn-trajectory-v1",
        "records": t.records(),
    });
    if let Some(at) = t.overflow_at() {
        doc["overflow_at"] = at.into();
    }
    Ok(to_canonical_json(&doc)?)
}

fn scenario_trajectory(scenario: &Scenario) -> Option<Trajectory> {
    match scenario {
        Scenario::Deterministic { params, initial, steps } => Some(simulate_deterministic(initial, params, *steps)),
        Scenario::Stochastic {
            params,
            initial,
            steps,
            seed,
            ..
        } => Some(simulate_stochastic(initial, params, *steps, &mut RandomSource::new(*seed, 0))),
        Scenario::Lanchester { .. } => None,
    }
}

fn simulate(args: SimulateArgs) -> Result<String, Failure> {
    let scenario = load_scenario(&args.scenario, &[])?;
    let mut report = base_report("simulate", &scenario);
    report.outputs.insert("trajectory".into(), path_str(args.out.as_ref()));

    let (artifact, stages, overflow) = match &scenario {
        Scenario::Lanchester { params, initial, steps } => {
            let run = simulate_lanchester(initial, params, *steps);
            let last = run.states.last().copied().unwrap_or(*initial);
            report.summary.insert("final_r".into(), last.r.into());
            report.summary.insert("final_g".into(), last.g.into());
            let bytes = match args.format {
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_lanchester_csv(&run, &mut buf)?;
                    buf
                }
                Format::Json => {
                    let mut doc = json!({
                        "schema": "sancdyn-lanchester-v1",
                        "records": run.states.iter().enumerate()
                            .map(|(n, s)| json!({"n": n, "r": s.r, "g": s.g}))
                            .collect::<Vec<_>>(),
                    });
                    if let Some(at) = run.overflow_at {
                        doc["overflow_at"] = at.into();
                    }
                    to_canonical_json(&doc)?.into_bytes()
                }
            };
            (bytes, run.states.len(), run.overflow_at)
        }
        other => {
            let t = scenario_trajectory(other).expect("pressure model");
            let bytes = match args.format {
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_trajectory_csv(&t, &mut buf)?;
                    buf
                }
                Format::Json => trajectory_json(&t)?.into_bytes(),
            };
            if let Some(last) = t.records().last() {
                report.summary.insert("final_v".into(), last.v.into());
                report.summary.insert("final_w".into(), last.w.into());
            }
            (bytes, t.len(), t.overflow_at())
        }
    };
    report.summary.insert("stages".into(), stages.into());
    if let Some(at) = overflow {
        report.summary.insert("overflow_at".into(), at.into());
    }

    let report_bytes = match &args.report {
        Some(_) => {
            report.outputs.insert("report".into(), path_str(args.report.as_ref()));
            let mut buf = Vec::new();
            write_report_json(&report, &mut buf)?;
            Some(buf)
        }
        None => None,
    };
    emit(args.out.as_ref(), &artifact)?;
    if let (Some(path), Some(bytes)) = (&args.report, report_bytes) {
        emit(Some(path), &bytes)?;
    }

    let mut summary = format!("simulate: model={} stages={stages}", scenario.kind().as_str());
    if let Some(q) = report.gains.q {
        summary += &format!(" q={q}");
    }
    if let Some(v) = report.verdict {
        summary += &format!(" verdict={v}");
    }
    if let Some(v) = report.mean_square_verdict {
        summary += &format!(" qbar={} ms_verdict={v}", report.gains.qbar.unwrap_or(f64::NAN));
    }
    if let Some(at) = overflow {
        summary += &format!(" truncated_at={at}");
    }
    summary += &format!(" out={}", path_str(args.out.as_ref()));
    Ok(summary)
}

fn mc_config(scenario: &Scenario, trajectories: Option<u64>, horizon: Option<u64>) -> Result<MonteCarloConfig, Failure> {
    let Scenario::Stochastic {
        initial,
        steps,
        trajectories: from_file,
        ..
    } = scenario
    else {
        return Err(Failure::Usage("Monte Carlo needs a stochastic scenario".into()));
    };
    let n = trajectories
        .or(*from_file)
        .ok_or_else(|| Failure::Usage("number of trajectories missing (scenario `trajectories` or --trajectories)".into()))?;
    if n < 2 {
        return Err(Failure::Usage(format!("trajectories = {n}: at least 2 are needed")));
    }
    let horizon = horizon.unwrap_or(steps + 1);
    if horizon < 3 || horizon % 2 == 0 {
        return Err(Failure::Usage(format!(
            "horizon = {horizon} must be odd and >= 3 (use an even `steps` or --horizon)"
        )));
    }
    Ok(MonteCarloConfig {
        n_trajectories: n,
        horizon,
        initial: initial.increments(),
        execution: Execution::Parallel,
    })
}

fn montecarlo(args: MonteCarloArgs) -> Result<String, Failure> {
    if args.format != Format::Json {
        return Err(Failure::Usage("montecarlo writes JSON only".into()));
    }
    let scenario = load_scenario(&args.scenario, &[])?;
    let mut config = mc_config(&scenario, args.trajectories, args.horizon)?;
    if args.serial {
        config.execution = Execution::Serial;
    }
    let Scenario::Stochastic { params, seed, .. } = &scenario else {
        unreachable!("checked by mc_config")
    };
    let mc = crate::stochastic::monte_carlo_ms_growth(params, &config, *seed)?;

    let mut report = base_report("montecarlo", &scenario);
    report.outputs.insert("report".into(), path_str(args.out.as_ref()));
    report.monte_carlo = Some(mc);
    let mut buf = Vec::new();
    write_report_json(&report, &mut buf)?;
    emit(args.out.as_ref(), &buf)?;

    Ok(format!(
        "montecarlo: trajectories={} horizon={} qbar={} empirical={} ci99=[{}, {}] verdict={} out={}",
        mc.n_trajectories,
        mc.horizon,
        mc.analytic_qbar,
        mc.empirical_ms_ratio,
        mc.ci_low,
        mc.ci_high,
        mc.verdict.class,
        path_str(args.out.as_ref())
    ))
}

fn parse_axis(flag: &str, text: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Usage(format!("--{flag} expects start:stop:count, got `{text}`"));
    let parts: Vec<&str> = text.split(':').collect();
    let [start, stop, count] = parts.as_slice() else {
        return Err(bad());
    };
    let start: f64 = start.trim().parse().map_err(|_| bad())?;
    let stop: f64 = stop.trim().parse().map_err(|_| bad())?;
    let count: usize = count.trim().parse().map_err(|_| bad())?;
    let axis = linear_axis(start, stop, count).map_err(|e| Failure::Usage(format!("--{flag}: {e}")))?;
    if axis.iter().any(|v| *v <= 0.0) || axis.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Failure::Usage(format!(
            "--{flag}: axis must be positive and strictly increasing"
        )));
    }
    Ok(axis)
}

fn sweep_noise(args: &SweepArgs) -> Result<Option<NoiseSpec>, Failure> {
    if args.mode == ModeArg::Deterministic {
        if args.sigma_x.is_some() || args.sigma_y.is_some() || args.scenario.is_some() {
            return Err(Failure::Usage("noise options need --mode mean-square".into()));
        }
        return Ok(None);
    }
    if let Some(path) = &args.scenario {
        let scenario = load_scenario(
            &ScenarioArgs {
                scenario: path.clone(),
                steps: None,
                seed: None,
                set: Vec::new(),
            },
            &[],
        )?;
        return match scenario {
            Scenario::Stochastic { params, .. } => Ok(Some(params.noise)),
            _ => Err(Failure::Usage("--scenario for a sweep must be stochastic".into())),
        };
    }
    let (Some(sx), Some(sy)) = (args.sigma_x, args.sigma_y) else {
        return Err(Failure::Usage(
            "mean-square sweep needs --sigma-x and --sigma-y (or --scenario)".into(),
        ));
    };
    let dist: NoiseDistribution = args.distribution.parse().map_err(Failure::Usage)?;
    NoiseSpec::new(sx, sy, dist)
        .map(Some)
        .map_err(|e| Failure::Usage(e.to_string()))
}

fn grid_json(grid: &StabilityGrid) -> Result<String, Failure> {
    let mut doc = json!({
        "schema": "sancdyn-grid-v1",
        "mode": grid.mode(),
        "alpha_axis": grid.alpha_axis(),
        "beta_axis": grid.beta_axis(),
        "cells": grid.cells().iter()
            .map(|c| json!({"alpha": c.alpha, "beta": c.beta, "gain": c.gain, "verdict": c.verdict.class}))
            .collect::<Vec<_>>(),
    });
    if let Some(noise) = grid.noise() {
        doc["noise"] = serde_json::to_value(noise).map_err(io::Error::other)?;
    }
    Ok(to_canonical_json(&doc)?)
}

fn sweep(args: SweepArgs) -> Result<String, Failure> {
    let alpha = parse_axis("alpha", &args.alpha)?;
    let beta = parse_axis("beta", &args.beta)?;
    let noise = sweep_noise(&args)?;
    if !(args.tolerance >= 0.0 && args.tolerance.is_finite()) {
        return Err(Failure::Usage("--tolerance must be finite and >= 0".into()));
    }
    let mode = match args.mode {
        ModeArg::Deterministic => SweepMode::Deterministic,
        ModeArg::MeanSquare => SweepMode::MeanSquare,
    };
    if args.verify_trajectories.is_some() && mode != SweepMode::MeanSquare {
        return Err(Failure::Usage("--verify-trajectories needs --mode mean-square".into()));
    }
    if let Some(n) = args.verify_trajectories {
        if n < 2 || args.verify_horizon < 3 || args.verify_horizon % 2 == 0 {
            return Err(Failure::Usage(
                "--verify-trajectories must be >= 2 and --verify-horizon odd and >= 3".into(),
            ));
        }
    }
    let grid = sweep_with_tolerance(&alpha, &beta, mode, noise, args.tolerance)
        .map_err(|e| Failure::Usage(e.to_string()))?;

    let mut agreement = None;
    if let Some(n) = args.verify_trajectories {
        let config = MonteCarloConfig {
            n_trajectories: n,
            horizon: args.verify_horizon,
            initial: crate::dynamics::IncrementState::new(1.0, 1.0, 1)?,
            execution: Execution::Parallel,
        };
        let checks = verify_grid_monte_carlo(&grid, &config, args.seed)?;
        agreement = Some((checks.iter().filter(|c| c.agrees).count(), checks.len()));
    }

    let bytes = match args.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_grid_csv(&grid, &mut buf)?;
            buf
        }
        Format::Json => grid_json(&grid)?.into_bytes(),
    };
    emit(args.out.as_ref(), &bytes)?;

    let (na, nb) = grid.shape();
    let mut summary = format!(
        "sweep: mode={} cells={} stable={} out={}",
        match mode {
            SweepMode::Deterministic => "deterministic",
            SweepMode::MeanSquare => "mean-square",
        },
        na * nb,
        grid.stable_count(),
        path_str(args.out.as_ref())
    );
    if let Some((ok, total)) = agreement {
        summary += &format!(" mc_agree={ok}/{total}");
    }
    Ok(summary)
}

fn analyze(args: AnalyzeArgs) -> Result<String, Failure> {
    if args.format != Format::Json {
        return Err(Failure::Usage("analyze writes JSON only".into()));
    }
    let scenario = load_scenario(&args.scenario, &[])?;
    let config = match (&scenario, args.trajectories) {
        (Scenario::Stochastic { trajectories: None, .. }, None) => None,
        (Scenario::Stochastic { .. }, t) => Some(mc_config(&scenario, t, args.horizon)?),
        (_, Some(_)) => return Err(Failure::Usage("--trajectories applies to stochastic scenarios".into())),
        _ => None,
    };

    let mut report = base_report("analyze", &scenario);
    report.outputs.insert("report".into(), path_str(args.out.as_ref()));
    let mut summary = format!("analyze: model={}", scenario.kind().as_str());

    match &scenario {
        Scenario::Lanchester { params, initial, steps } => {
            let run = simulate_lanchester(initial, params, *steps);
            let first_depleted = |f: fn(&crate::lanchester::LanchesterState) -> f64| {
                run.states.iter().position(|s| f(s) <= 0.0).map(Value::from).unwrap_or(Value::Bool(false))
            };
            let last = run.states.last().copied().unwrap_or(*initial);
            report.summary.insert("final_r".into(), last.r.into());
            report.summary.insert("final_g".into(), last.g.into());
            report.summary.insert("r_depleted_at".into(), first_depleted(|s| s.r));
            report.summary.insert("g_depleted_at".into(), first_depleted(|s| s.g));
            summary += &format!(" final_r={} final_g={}", last.r, last.g);
        }
        Scenario::Deterministic { params, initial, .. } | Scenario::Stochastic { params: crate::stochastic::StochasticParams { base: params, .. }, initial, .. } => {
            let t = scenario_trajectory(&scenario).expect("pressure model");
            match estimate_growth_rate(&t) {
                Ok(g) => {
                    summary += &format!(" lyapunov={}", g.lyapunov);
                    report.growth = Some(g);
                }
                Err(e) => {
                    report.summary.insert("growth_error".into(), e.to_string().into());
                }
            }
            if matches!(scenario, Scenario::Deterministic { .. }) {
                match cumulative_limit(initial, params) {
                    Ok((x, y)) => {
                        report.summary.insert("x_limit".into(), x.into());
                        report.summary.insert("y_limit".into(), y.into());
                    }
                    Err(e) => {
                        report.summary.insert("limit".into(), e.to_string().into());
                    }
                }
            }
            if let (Scenario::Stochastic { params, seed, .. }, Some(config)) = (&scenario, config) {
                let cmp = compare_empirical_analytic(params, &config, *seed)?;
                summary += &format!(
                    " qbar={} empirical={} agrees={}",
                    cmp.analytic_qbar, cmp.empirical_ratio, cmp.agrees
                );
                report.comparison = Some(cmp);
            }
            if let Some(q) = report.gains.q {
                summary += &format!(" q={q}");
            }
            if let Some(v) = report.verdict {
                summary += &format!(" verdict={v}");
            }
        }
    }

    let mut buf = Vec::new();
    write_report_json(&report, &mut buf)?;
    emit(args.out.as_ref(), &buf)?;
    summary += &format!(" out={}", path_str(args.out.as_ref()));
    Ok(summary)
}
