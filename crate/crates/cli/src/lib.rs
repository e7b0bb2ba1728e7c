//! Command-line front end: load a run config, build the model, execute the
//! requested suites, write human- and machine-readable reports.

pub mod config;
pub mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cgriff_core::verifier::{run_suite, SuiteParams, REGISTRY};

#[derive(Parser)]
#[command(name = "cgriff", about = "Verify Griffiths-type correlation inequalities and self-dual-cone positivity claims by exact diagonalization", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the configured model and run its suites.
    Run {
        /// Path to a run config in the flat key-value format.
        config: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the margin tolerance.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Report format.
        #[arg(long, value_parser = ["json", "csv"])]
        format: Option<String>,
        /// Report output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the suite registry.
    ListSuites,
}

pub fn run_main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListSuites => {
            list_suites();
            ExitCode::SUCCESS
        }
        Command::Run { config, seed, tolerance, format, out } => {
            match run_config(&config, seed, tolerance, format.as_deref(), out.as_deref()) {
                Ok(all_passed) => {
                    if all_passed {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(2)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}

pub fn list_suites() {
    println!("{:<16} {:<60} models", "suite", "theorems");
    for info in REGISTRY {
        let models: Vec<String> = info.models.iter().map(|m| m.to_string()).collect();
        println!("{:<16} {:<60} {}", info.name, info.theorem_ids.join(","), models.join(","));
        println!("{:<16}   {}", "", info.statement);
    }
    println!("\n{} suites, {} theorem ids", REGISTRY.len(), {
        let ids: std::collections::BTreeSet<&str> =
            REGISTRY.iter().flat_map(|s| s.theorem_ids.iter().copied()).collect();
        ids.len()
    });
}

/// Execute a config file; returns whether every non-counterexample record
/// passed. Any build or config failure is an error (exit code 1).
pub fn run_config(
    path: &std::path::Path,
    seed_override: Option<u64>,
    tol_override: Option<f64>,
    format_override: Option<&str>,
    out_override: Option<&std::path::Path>,
) -> Result<bool, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config: {e}"))?;
    let mut cfg = config::RunConfig::parse(&text)?;
    if let Some(seed) = seed_override {
        cfg.seed = seed;
    }
    if let Some(tol) = tol_override {
        cfg.tolerance = tol;
    }
    if let Some(fmt) = format_override {
        cfg.format = fmt.to_string();
    }
    if let Some(out) = out_override {
        cfg.output = Some(out.to_path_buf());
    }

    if let Ok(threads) = std::env::var("CG_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
        }
    }

    let model = cfg.build_model().map_err(|e| format!("model build failed: {e}"))?;
    let params = SuiteParams {
        betas: cfg.betas.clone(),
        tolerance: cfg.tolerance,
        seed: cfg.seed,
        counterexample: cfg.counterexample,
    };
    let mut records = Vec::new();
    for suite in &cfg.suites {
        let reports =
            run_suite(suite, &model, &params).map_err(|e| format!("suite `{suite}`: {e}"))?;
        records.extend(reports);
    }
    records.sort_by(|a, b| {
        (&a.theorem_id, &a.beta, &a.witness).cmp(&(&b.theorem_id, &b.beta, &b.witness))
    });

    let all_passed = records.iter().all(|r| r.passed);
    let rendered = match cfg.format.as_str() {
        "csv" => report::to_csv(&records),
        _ => report::to_json(&cfg, &records),
    };
    match &cfg.output {
        Some(path) => std::fs::write(path, rendered).map_err(|e| format!("cannot write report: {e}"))?,
        None => println!("{rendered}"),
    }
    let failures = records.iter().filter(|r| !r.passed).count();
    eprintln!(
        "{} records, {} failed, exit {}",
        records.len(),
        failures,
        if all_passed { 0 } else { 2 }
    );
    Ok(all_passed)
}
