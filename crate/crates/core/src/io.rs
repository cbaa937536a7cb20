//! JSON run configuration and the CSV/JSON result files.
//!
//! Every number is written with 17 significant digits so that files
//! round-trip exactly through any IEEE-754 reader, and nothing but the
//! `metadata` block of a summary depends on the wall clock.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CavityTerm, DetuningReading, ModelConfig, ModelKind, Protocol};
use crate::observables::{EnergyReference, Trajectory};
use crate::profile::ProfileKind;
use crate::protocols::{self, RunOutput, RunSpec, SolverOptions, SweepRecord, SweepVariable};

pub const TRAJECTORY_HEADER: &str = "t,e_c,e_b,e_m,e_int,p,w_integral,w_conservation,norm,n_exc";
pub const SWEEP_HEADER: &str = "value,e_b_max,t_b_max,sqrt_n_t,e_c_bar,tau_used";
pub const PROFILE_HEADER: &str = "t,u,u_dot";

fn one() -> f64 {
    1.0
}

fn default_g() -> f64 {
    0.05
}

fn default_t0() -> f64 {
    0.1
}

fn default_protocol() -> Protocol {
    Protocol::InteractionSwitch
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwitchConfig {
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default = "default_t0")]
    pub t0: f64,
}

impl Default for SwitchConfig {
    fn default() -> Self {
        Self {
            tau: None,
            t0: default_t0(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub t_end: Option<f64>,
    pub dt_step: Option<f64>,
    pub dt_sample: Option<f64>,
    pub auto_converge: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub kind: ProfileKind,
    pub t_end: f64,
    #[serde(default = "default_profile_dt")]
    pub dt: f64,
}

fn default_profile_dt() -> f64 {
    0.01
}

/// The JSON configuration document. All quantities are in units of ω_B.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub description: Option<String>,
    pub model: ModelKind,
    #[serde(default = "default_protocol")]
    pub protocol: Protocol,
    #[serde(default = "one")]
    pub omega_b: f64,
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default = "default_g")]
    pub g: f64,
    #[serde(default)]
    pub n_initial: usize,
    #[serde(default)]
    pub n_max: Option<usize>,
    #[serde(default)]
    pub detuning_reading: DetuningReading,
    #[serde(default)]
    pub cavity_term: CavityTerm,
    #[serde(default)]
    pub energy_reference: EnergyReference,
    #[serde(default)]
    pub switch: SwitchConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub profile: Option<ProfileConfig>,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive, got {v}")))
    }
}

impl RunConfig {
    /// Parses and validates a configuration document.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("malformed config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.omega_b != 1.0 {
            return Err(Error::Config(
                "omega_b is the energy unit and must be 1".into(),
            ));
        }
        self.model_config().validate()?;
        positive("switch.t0", self.switch.t0)?;
        if let Some(tau) = self.switch.tau {
            positive("switch.tau", tau)?;
        }
        for (name, v) in [
            ("grid.t_end", self.grid.t_end),
            ("grid.dt_step", self.grid.dt_step),
            ("grid.dt_sample", self.grid.dt_sample),
        ] {
            if let Some(v) = v {
                positive(name, v)?;
            }
        }
        if let Some(p) = &self.profile {
            positive("profile.t_end", p.t_end)?;
            positive("profile.dt", p.dt)?;
        }
        if let Some(s) = &self.sweep {
            if s.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config("sweep values must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            omega_b: self.omega_b,
            alpha: self.alpha,
            g: self.g,
            n_initial: self.n_initial,
            n_max: self.n_max,
            model: self.model,
            protocol: self.protocol,
            detuning_reading: self.detuning_reading,
            cavity_term: self.cavity_term,
        }
    }

    pub fn solver(&self) -> SolverOptions {
        let d = SolverOptions::default();
        SolverOptions {
            dt_step: self.grid.dt_step.unwrap_or(d.dt_step),
            dt_sample: self.grid.dt_sample.unwrap_or(d.dt_sample),
            auto_converge: self.grid.auto_converge.unwrap_or(d.auto_converge),
            max_halvings: d.max_halvings,
        }
    }

    pub fn run_spec(&self) -> RunSpec {
        RunSpec {
            model: self.model_config(),
            t0: self.switch.t0,
            tau: self.switch.tau,
            t_end: self.grid.t_end,
            solver: self.solver(),
            reference: self.energy_reference,
        }
    }
}

/// Shortest-round-trip-safe formatting: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_trajectory_csv<W: Write>(mut w: W, traj: &Trajectory) -> Result<()> {
    writeln!(w, "{TRAJECTORY_HEADER}")?;
    for k in 0..traj.len() {
        let row = [
            traj.times[k],
            traj.e_c[k],
            traj.e_b[k],
            traj.e_m[k],
            traj.e_int[k],
            traj.p[k],
            traj.w_integral[k],
            traj.w_conservation[k],
            traj.norm[k],
            traj.n_exc[k],
        ];
        let line: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn write_sweep_csv<W: Write>(mut w: W, records: &[SweepRecord]) -> Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt_f64(r.value),
            fmt_f64(r.e_b_max),
            fmt_f64(r.t_b_max),
            opt(r.sqrt_n_t),
            fmt_f64(r.e_c_bar),
            opt(r.tau_used)
        )?;
    }
    Ok(())
}

pub fn write_profile_csv<W: Write>(mut w: W, samples: &[(f64, f64, f64)]) -> Result<()> {
    writeln!(w, "{PROFILE_HEADER}")?;
    for &(t, u, du) in samples {
        writeln!(w, "{},{},{}", fmt_f64(t), fmt_f64(u), fmt_f64(du))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub dt_step: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub generated_unix_s: u64,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub model: ModelKind,
    pub alpha: f64,
    pub g: f64,
    pub n_initial: usize,
    pub tau_used: Option<f64>,
    pub t0: f64,
    pub e_b_max: Option<f64>,
    pub t_b_max: Option<f64>,
    pub e_c_bar: Option<f64>,
    pub w_final: f64,
    pub solver: SolverSummary,
    /// Wall-clock data; the only field that differs between identical runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Metadata>,
}

impl RunSummary {
    pub fn from_output(out: &RunOutput) -> Self {
        let m = &out.spec.model;
        let s = out.summary.as_ref();
        Self {
            model: m.model,
            alpha: m.alpha,
            g: m.g,
            n_initial: m.n_initial,
            tau_used: out.tau_used,
            t0: out.spec.t0,
            e_b_max: s.map(|s| s.e_b_max),
            t_b_max: s.map(|s| s.t_b_max),
            e_c_bar: s.map(|s| s.e_c_bar),
            w_final: out.trajectory.w_conservation.last().copied().unwrap_or(0.0),
            solver: SolverSummary {
                dt_step: out.convergence.dt_step,
                converged: out.convergence.passed,
            },
            metadata: None,
        }
    }

    pub fn stamped(mut self) -> Self {
        let now = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        self.metadata = Some(Metadata {
            generated_unix_s: now,
        });
        self
    }
}

fn create(dir: &Path, name: &str) -> Result<std::io::BufWriter<fs::File>> {
    fs::create_dir_all(dir)?;
    Ok(std::io::BufWriter::new(fs::File::create(dir.join(name))?))
}

/// Writes `trajectory.csv` and `summary.json` for one run.
pub fn write_run_files(dir: &Path, out: &RunOutput, stamp: bool) -> Result<Vec<PathBuf>> {
    let mut f = create(dir, "trajectory.csv")?;
    write_trajectory_csv(&mut f, &out.trajectory)?;
    f.flush()?;
    let mut summary = RunSummary::from_output(out);
    if stamp {
        summary = summary.stamped();
    }
    let mut f = create(dir, "summary.json")?;
    serde_json::to_writer_pretty(&mut f, &summary)?;
    writeln!(f)?;
    f.flush()?;
    Ok(vec![dir.join("trajectory.csv"), dir.join("summary.json")])
}

/// Runs the configured model and writes its result files.
pub fn run_config_files(cfg: &RunConfig, dir: &Path, stamp: bool) -> Result<RunOutput> {
    let out = protocols::run(&cfg.run_spec())?;
    write_run_files(dir, &out, stamp)?;
    Ok(out)
}

/// What a configuration asks for when no subcommand is given.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Run,
    Sweep,
    Profile,
}

impl RunConfig {
    pub fn task(&self) -> Task {
        if self.sweep.is_some() {
            Task::Sweep
        } else if self.profile.is_some() {
            Task::Profile
        } else {
            Task::Run
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFailure {
    pub value: f64,
    pub error: String,
}

/// Result of a sweep command: rows written and points that failed.
#[derive(Debug)]
pub struct SweepReport {
    pub records: Vec<SweepRecord>,
    pub failures: Vec<SweepFailure>,
    pub duplicates: usize,
}

/// Runs the configured sweep and writes `sweep.csv`, plus
/// `sweep_failures.json` if any point failed.
pub fn run_sweep_files(cfg: &RunConfig, dir: &Path) -> Result<SweepReport> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("config has no `sweep` section".into()))?;
    if sweep.values.is_empty() {
        return Err(Error::Config("sweep value list is empty".into()));
    }
    if sweep.variable == SweepVariable::N && cfg.model != ModelKind::Cavity {
        return Err(Error::Config("photon sweeps need the cavity model".into()));
    }
    if cfg.protocol == Protocol::DetuningSwitch {
        return Err(Error::Config(
            "sweeps tune tau and need the interaction_switch or always_on protocol".into(),
        ));
    }
    let mut unique = sweep.values.clone();
    unique.sort_by(f64::total_cmp);
    unique.dedup();
    let duplicates = sweep.values.len() - unique.len();

    let results = protocols::sweep(&cfg.run_spec(), sweep.variable, &unique);
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (value, r) in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(e) => failures.push(SweepFailure {
                value,
                error: e.to_string(),
            }),
        }
    }
    let mut f = create(dir, "sweep.csv")?;
    write_sweep_csv(&mut f, &records)?;
    f.flush()?;
    if !failures.is_empty() {
        let mut f = create(dir, "sweep_failures.json")?;
        serde_json::to_writer_pretty(&mut f, &failures)?;
        writeln!(f)?;
        f.flush()?;
    }
    Ok(SweepReport {
        records,
        failures,
        duplicates,
    })
}

/// Samples the configured profile into `profile.csv`.
pub fn run_profile_file(cfg: &RunConfig, dir: &Path) -> Result<Vec<(f64, f64, f64)>> {
    let p = cfg
        .profile
        .as_ref()
        .ok_or_else(|| Error::Config("config has no `profile` section".into()))?;
    let tau = cfg
        .switch
        .tau
        .ok_or_else(|| Error::Config("profile sampling needs switch.tau".into()))?;
    let samples = protocols::profile_samples(p.kind, tau, cfg.switch.t0, cfg.alpha, p.t_end, p.dt)?;
    let mut f = create(dir, "profile.csv")?;
    write_profile_csv(&mut f, &samples)?;
    f.flush()?;
    Ok(samples)
}
