//! `qbtransfer` command-line front end.
//!
//! Exit codes: 0 on success, 2 for configuration errors, 3 for numerical
//! failures.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use qbtransfer::io::{self, RunConfig};
use qbtransfer::{tune_tau, Error, ModelKind, Result};

#[derive(Parser)]
#[command(
    name = "qbtransfer",
    version,
    about = "Charger-to-battery energy transfer simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration; writes trajectory.csv and summary.json.
    Run(Common),
    /// Sweep n or alpha with tau re-tuned per point; writes sweep.csv.
    Sweep(Common),
    /// Sample the switching profile; writes profile.csv.
    Profile(Common),
    /// Tune tau for the configured model; writes tune_tau.json.
    TuneTau(Common),
}

#[derive(Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory (overrides `output.dir`; default: current directory).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Internal integration step, in units of 1/omega_B.
    #[arg(long, value_name = "X")]
    dt_step: Option<f64>,
    /// Final time, in units of 1/omega_B.
    #[arg(long, value_name = "X")]
    t_end: Option<f64>,
    /// Only report errors.
    #[arg(long)]
    quiet: bool,
}

impl Common {
    fn load(&self) -> Result<(RunConfig, PathBuf)> {
        let mut cfg = RunConfig::load(&self.config)?;
        if let Some(dt) = self.dt_step {
            cfg.grid.dt_step = Some(dt);
        }
        if let Some(t) = self.t_end {
            cfg.grid.t_end = Some(t);
        }
        cfg.validate()?;
        let out = self
            .out
            .clone()
            .or_else(|| cfg.output.dir.clone())
            .unwrap_or_else(|| PathBuf::from("."));
        Ok((cfg, out))
    }
}

fn cmd_run(cfg: &RunConfig, out: &Path) -> Result<()> {
    let run = io::run_config_files(cfg, out, true)?;
    match &run.summary {
        Some(s) => info!(
            "E_B,max = {:.6} at t = {:.4}, E_C bar = {:.6}, tau = {:?}",
            s.e_b_max, s.t_b_max, s.e_c_bar, run.tau_used
        ),
        None => warn!("battery energy has no interior maximum; summary fields are null"),
    }
    if !run.convergence.passed {
        warn!(
            "self-convergence not reached: deviation {:.2e} at dt_step {}",
            run.convergence.deviation, run.convergence.dt_step
        );
    }
    info!("wrote {}", out.display());
    Ok(())
}

fn cmd_sweep(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let report = io::run_sweep_files(cfg, out)?;
    if report.duplicates > 0 {
        warn!("dropped {} duplicate sweep values", report.duplicates);
    }
    for f in &report.failures {
        warn!("sweep point {} failed: {}", f.value, f.error);
    }
    info!(
        "{} points written to {}",
        report.records.len(),
        out.join("sweep.csv").display()
    );
    Ok(report.failures.is_empty())
}

fn cmd_profile(cfg: &RunConfig, out: &Path) -> Result<()> {
    let samples = io::run_profile_file(cfg, out)?;
    info!(
        "{} samples written to {}",
        samples.len(),
        out.join("profile.csv").display()
    );
    Ok(())
}

fn cmd_tune_tau(cfg: &RunConfig, out: &Path) -> Result<()> {
    let spec = cfg.run_spec();
    let t = tune_tau(&spec.model, spec.t0, &spec.solver)?;
    let doc = serde_json::json!({
        "model": match cfg.model { ModelKind::Direct => "direct", ModelKind::Cavity => "cavity" },
        "alpha": cfg.alpha,
        "g": cfg.g,
        "n_initial": cfg.n_initial,
        "t0": spec.t0,
        "tau": t.tau,
        "t_star": t.t_star,
        "scan": t.scan.iter().map(|(tau, e)| serde_json::json!({"tau": tau, "e_b": e})).collect::<Vec<_>>(),
    });
    std::fs::create_dir_all(out)?;
    let text = serde_json::to_string_pretty(&doc)?;
    std::fs::write(out.join("tune_tau.json"), format!("{text}\n"))?;
    println!("{}", t.tau);
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    if e.is_numerical() {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (Command::Run(c) | Command::Sweep(c) | Command::Profile(c) | Command::TuneTau(c)) =
        &cli.command;
    let level = if c.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    let result = c.load().and_then(|(cfg, out)| match &cli.command {
        Command::Run(_) => cmd_run(&cfg, &out).map(|_| true),
        Command::Sweep(_) => cmd_sweep(&cfg, &out),
        Command::Profile(_) => cmd_profile(&cfg, &out).map(|_| true),
        Command::TuneTau(_) => cmd_tune_tau(&cfg, &out).map(|_| true),
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        // Partial sweep: rows were written, failures are in the manifest.
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
