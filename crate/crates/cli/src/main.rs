//! `gamma-lab` command line.
//!
//! Exit codes: 0 when every check passes, 2 when a check fails, 1 on
//! usage or input errors.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gamma_lab::pipeline::{self, sweep_member};
use gamma_lab::{build_sznagy, solve_fundamental, Generator, RunReport, Scenario, SweepAggregate};
use rayon::prelude::*;

const THREADS_ENV: &str = "GAMMA_LAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "gamma-lab", version, about = "Γ-contraction dilations and models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw a random pair and write it as a scenario file.
    Generate {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        dim: usize,
        /// symmetrized_random or random_gamma_unitary
        #[arg(long, default_value = "symmetrized_random")]
        kind: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the full pipeline on a scenario and write a report.
    Verify {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        report: PathBuf,
        /// Tolerance override, written `--tol.NAME VALUE`.
        #[arg(long = "tol", value_name = "NAME=VALUE")]
        tol: Vec<String>,
    },
    /// Verify many generated scenarios and aggregate the worst residuals.
    Sweep {
        #[arg(long)]
        count: u64,
        #[arg(long)]
        dim_max: usize,
        #[arg(long, default_value_t = 0)]
        seed0: u64,
        #[arg(long, default_value = "symmetrized_random")]
        kind: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long = "tol", value_name = "NAME=VALUE")]
        tol: Vec<String>,
    },
    /// Write the dilation operators of a scenario as JSON.
    Dilate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Check(String),
}

type Outcome = Result<(), Failure>;

fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

/// Rewrites `--tol.NAME VALUE` and `--tol.NAME=VALUE` into `--tol NAME=VALUE`.
fn expand_tol_flags(args: impl IntoIterator<Item = String>) -> Vec<String> {
    let mut out = Vec::new();
    let mut args = args.into_iter();
    while let Some(a) = args.next() {
        match a.strip_prefix("--tol.") {
            Some(rest) => {
                out.push("--tol".to_string());
                if rest.contains('=') {
                    out.push(rest.to_string());
                } else {
                    let value = args.next().unwrap_or_default();
                    out.push(format!("{rest}={value}"));
                }
            }
            None => out.push(a),
        }
    }
    out
}

fn parse_overrides(raw: &[String]) -> Result<BTreeMap<String, f64>, Failure> {
    let mut out = BTreeMap::new();
    for item in raw {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| Failure::Input(format!("tolerance override {item:?} is not NAME=VALUE")))?;
        let value: f64 = value
            .parse()
            .map_err(|_| Failure::Input(format!("tolerance {name}: {value:?} is not a number")))?;
        out.insert(name.to_string(), value);
    }
    Ok(out)
}

fn parse_kind(kind: &str) -> Result<Generator, Failure> {
    match kind.parse::<Generator>().map_err(input)? {
        Generator::Explicit => Err(Failure::Input("kind must be symmetrized_random or random_gamma_unitary".into())),
        g => Ok(g),
    }
}

fn read_scenario(path: &Path) -> Result<Scenario, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Outcome {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
    }
    let mut text = serde_json::to_string_pretty(value).map_err(input)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn thread_pool() -> Result<rayon::ThreadPool, Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| Failure::Input(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(input)
}

fn summarize(report: &RunReport) -> String {
    let verdict = if report.pass { "pass" } else { "FAIL" };
    let worst = report
        .metrics()
        .into_iter()
        .fold(("-".to_string(), 0.0_f64), |acc, (k, v)| if v > acc.1 { (k, v) } else { acc });
    let mut line = format!(
        "{verdict}: seed {} dim {} ({:?}), worst residual {} = {:.3e}",
        report.scenario.seed, report.scenario.dimension, report.scenario.generator, worst.0, worst.1
    );
    for e in &report.errors {
        line.push_str(&format!("; {e}"));
    }
    line
}

fn cmd_generate(seed: u64, dim: usize, kind: &str, out: &Path) -> Outcome {
    let scenario = Scenario::generate(seed, dim, parse_kind(kind)?).map_err(input)?;
    write_json(out, &scenario)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_verify(scenario: &Path, report_path: &Path, tol: &[String]) -> Outcome {
    let overrides = parse_overrides(tol)?;
    let scenario = read_scenario(scenario)?;
    let report = pipeline::run(&scenario, &overrides).map_err(input)?;
    write_json(report_path, &report)?;
    println!("{}", summarize(&report));
    if report.pass {
        Ok(())
    } else {
        Err(Failure::Check(format!("report written to {}", report_path.display())))
    }
}

fn cmd_sweep(count: u64, dim_max: usize, seed0: u64, kind: &str, out: &Path, tol: &[String]) -> Outcome {
    if count == 0 {
        return Err(Failure::Input("--count must be at least 1".into()));
    }
    if dim_max == 0 {
        return Err(Failure::Input("--dim-max must be at least 1".into()));
    }
    let generator = parse_kind(kind)?;
    let overrides = parse_overrides(tol)?;
    let pool = thread_pool()?;
    let reports: Vec<RunReport> = pool.install(|| {
        (0..count)
            .into_par_iter()
            .map(|i| {
                let (seed, dim) = sweep_member(seed0, i, dim_max);
                let scenario = Scenario::generate(seed, dim, generator).map_err(input)?;
                pipeline::run(&scenario, &overrides).map_err(input)
            })
            .collect::<Result<_, Failure>>()
    })?;
    for r in &reports {
        write_json(&out.join("reports").join(format!("seed-{}.json", r.scenario.seed)), r)?;
    }
    let aggregate = SweepAggregate::from_reports(&reports);
    write_json(&out.join("aggregate.json"), &aggregate)?;
    println!(
        "{}/{} passed; aggregate written to {}",
        aggregate.passed,
        aggregate.count,
        out.join("aggregate.json").display()
    );
    if aggregate.pass {
        Ok(())
    } else {
        Err(Failure::Check(format!("failing seeds: {:?}", aggregate.failed_seeds)))
    }
}

fn cmd_dilate(scenario: &Path, out: &Path) -> Outcome {
    let scenario = read_scenario(scenario)?;
    let pair = scenario.resolve_pair().map_err(input)?;
    let n = pair.dim();
    let fp = solve_fundamental(&pair, gamma_lab::numlin::default_rank_tol(n), 1e-10).map_err(input)?;
    let bundle = build_sznagy(&pair, &fp).map_err(|e| Failure::Check(e.to_string()))?;
    let doc = serde_json::json!({
        "T0": bundle.t0,
        "U0": bundle.u0,
        "Tflat": bundle.tflat,
        "Vflat": bundle.vflat,
    });
    write_json(out, &doc)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse_from(expand_tol_flags(std::env::args())) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Generate { seed, dim, kind, out } => cmd_generate(*seed, *dim, kind, out),
        Command::Verify { scenario, report, tol } => cmd_verify(scenario, report, tol),
        Command::Sweep { count, dim_max, seed0, kind, out, tol } => {
            cmd_sweep(*count, *dim_max, *seed0, kind, out, tol)
        }
        Command::Dilate { scenario, out } => cmd_dilate(scenario, out),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tol_flags_are_rewritten() {
        let args = ["x", "verify", "--tol.solver", "1e-8", "--tol.omega=1e-6", "--report", "r"]
            .map(String::from);
        assert_eq!(
            expand_tol_flags(args),
            ["x", "verify", "--tol", "solver=1e-8", "--tol", "omega=1e-6", "--report", "r"]
        );
    }

    #[test]
    fn overrides_parse() {
        let o = parse_overrides(&["solver=1e-8".into()]).unwrap();
        assert_eq!(o["solver"], 1e-8);
        assert!(parse_overrides(&["solver".into()]).is_err());
        assert!(parse_overrides(&["solver=abc".into()]).is_err());
    }
}
