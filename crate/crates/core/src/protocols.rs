//! Complete experiments: single runs with automatic τ tuning, the
//! direct/cavity comparison, photon-number and mismatch sweeps, and the
//! detuning-control protocol.

use log::{debug, info};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{build, ModelConfig, ModelKind, Protocol};
use crate::observables::{
    first_local_max, EnergyReference, Trajectory, TransferSummary, MAX_PROMINENCE,
};
use crate::profile::{ProfileKind, SwitchProfile};
use crate::propagator::{
    convergence_check, evolve, evolve_converged, initial_state, ConvergenceReport, TimeGrid,
    DEFAULT_DT_SAMPLE, DEFAULT_DT_STEP,
};

/// Points in the τ refinement scan, spread over [0.9, 1.1]·t*.
pub const TAU_SCAN_POINTS: usize = 11;
/// Default window for detuning-protocol runs.
pub const DETUNING_T_END: f64 = 40.0;
/// Default window for always-on runs.
pub const ALWAYS_ON_T_END: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub dt_step: f64,
    pub dt_sample: f64,
    /// Halve `dt_step` until the self-convergence check passes.
    pub auto_converge: bool,
    pub max_halvings: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            dt_step: DEFAULT_DT_STEP,
            dt_sample: DEFAULT_DT_SAMPLE,
            auto_converge: true,
            max_halvings: 6,
        }
    }
}

/// Everything needed for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub model: ModelConfig,
    pub t0: f64,
    /// `None` tunes τ for the interaction switch.
    pub tau: Option<f64>,
    /// `None` picks a protocol-dependent default.
    pub t_end: Option<f64>,
    pub solver: SolverOptions,
    pub reference: EnergyReference,
}

impl RunSpec {
    pub fn new(model: ModelConfig, t0: f64) -> Self {
        Self {
            model,
            t0,
            tau: None,
            t_end: None,
            solver: SolverOptions::default(),
            reference: EnergyReference::default(),
        }
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = Some(tau);
        self
    }

    pub fn with_t_end(mut self, t_end: f64) -> Self {
        self.t_end = Some(t_end);
        self
    }

    fn default_t_end(&self, tau: Option<f64>) -> f64 {
        match (self.model.protocol, tau) {
            (Protocol::InteractionSwitch, Some(tau)) => 3.0 * tau + 20.0 * self.t0,
            (Protocol::DetuningSwitch, _) => DETUNING_T_END,
            _ => ALWAYS_ON_T_END,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub spec: RunSpec,
    pub tau_used: Option<f64>,
    pub t_end: f64,
    pub trajectory: Trajectory,
    /// `None` when E_B never turns over inside the window.
    pub summary: Option<TransferSummary>,
    pub convergence: ConvergenceReport,
}

impl RunOutput {
    /// Switch-off time 2τ plus ten ramp widths, when there is a switch.
    pub fn switch_off_settled(&self) -> Option<f64> {
        self.tau_used.map(|tau| 2.0 * tau + 10.0 * self.spec.t0)
    }
}

/// Outcome of [`tune_tau`].
#[derive(Debug, Clone, PartialEq)]
pub struct TauTuning {
    pub tau: f64,
    /// First maximum of E_B with the coupling always on.
    pub t_star: f64,
    /// (τ, E_B after switch-off) for each scan point.
    pub scan: Vec<(f64, f64)>,
}

fn profile_for(spec: &RunSpec, tau: f64) -> Result<Option<SwitchProfile>> {
    Ok(match spec.model.profile_kind() {
        None => None,
        Some(kind) => Some(SwitchProfile::new(tau, spec.t0, kind)?),
    })
}

fn grid(t_end: f64, solver: &SolverOptions) -> Result<TimeGrid> {
    TimeGrid::new(0.0, t_end, solver.dt_sample, solver.dt_step)
}

/// Picks τ so that the coupling is switched off when the battery is first full.
///
/// The dynamics are frozen before the window opens, so the always-on
/// first-maximum time t* is the natural window length; a scan over
/// [0.9, 1.1]·t* then keeps the τ with the highest stored charge after
/// switch-off.
pub fn tune_tau(model: &ModelConfig, t0: f64, solver: &SolverOptions) -> Result<TauTuning> {
    if model.protocol != Protocol::InteractionSwitch {
        return Err(Error::Config(
            "tau tuning needs the interaction_switch protocol".into(),
        ));
    }
    let always = model.clone().with_protocol(Protocol::AlwaysOn);
    let dec = build(&always, None)?;
    let psi0 = initial_state(&always, &dec.space)?;

    let coupling = dec
        .h_driven
        .entries()
        .iter()
        .map(|(_, _, v)| v.norm())
        .fold(0.0, f64::max);
    if coupling == 0.0 {
        return Err(Error::Tuning(
            "coupling is zero, nothing is transferred".into(),
        ));
    }
    let mut t_end = 2.0 * std::f64::consts::PI / coupling;
    let mut t_star = None;
    for _ in 0..6 {
        let ev = evolve(&psi0, &dec, &grid(t_end, solver)?)?;
        let e_b = crate::observables::component_energy(
            &ev.states,
            &ev.times,
            &dec.battery,
            &dec.schedule,
        );
        match first_local_max(&e_b, &ev.times, MAX_PROMINENCE) {
            Ok(m) => {
                t_star = Some(m.time);
                break;
            }
            Err(Error::MonotoneSeries) => t_end *= 2.0,
            Err(e) => return Err(e),
        }
    }
    let t_star = t_star.ok_or_else(|| {
        Error::Tuning(format!(
            "battery energy is monotone up to t = {t_end} with the coupling on"
        ))
    })?;
    debug!("always-on first maximum at t* = {t_star}");

    let scan: Vec<(f64, f64)> = (0..TAU_SCAN_POINTS)
        .into_par_iter()
        .map(|k| {
            let tau = t_star * (0.9 + 0.2 * k as f64 / (TAU_SCAN_POINTS - 1) as f64);
            let dec = build(model, Some(SwitchProfile::interaction(tau, t0)?))?;
            let ev = evolve(
                &psi0,
                &dec,
                &grid(2.0 * tau + 10.0 * t0 + 2.0 * solver.dt_sample, solver)?,
            )?;
            let last = ev.states.last().expect("non-empty evolution");
            let plateau = dec.battery.expectation(1.0, last)
                - dec.battery.expectation(1.0, psi0.amplitudes());
            Ok((tau, plateau))
        })
        .collect::<Result<_>>()?;

    let (tau, _) = scan
        .iter()
        .copied()
        .fold((f64::NAN, f64::NEG_INFINITY), |best, (tau, e)| {
            if e > best.1 {
                (tau, e)
            } else {
                best
            }
        });
    info!("tuned tau = {tau} (t* = {t_star})");
    Ok(TauTuning { tau, t_star, scan })
}

/// Runs one configuration end to end.
pub fn run(spec: &RunSpec) -> Result<RunOutput> {
    spec.model.validate()?;
    let tau = match (spec.model.protocol, spec.tau) {
        (Protocol::AlwaysOn, _) => None,
        (_, Some(tau)) => Some(tau),
        (Protocol::InteractionSwitch, None) => {
            Some(tune_tau(&spec.model, spec.t0, &spec.solver)?.tau)
        }
        (Protocol::DetuningSwitch, None) => {
            return Err(Error::Config(
                "the detuning protocol needs an explicit tau".into(),
            ))
        }
    };
    let profile = match tau {
        Some(tau) => profile_for(spec, tau)?,
        None => None,
    };
    let dec = build(&spec.model, profile)?;
    let psi0 = initial_state(&spec.model, &dec.space)?;
    let t_end = spec.t_end.unwrap_or_else(|| spec.default_t_end(tau));
    let grid = grid(t_end, &spec.solver)?;

    let (ev, convergence) = if spec.solver.auto_converge {
        evolve_converged(&psi0, &dec, &grid, spec.solver.max_halvings)?
    } else {
        (
            evolve(&psi0, &dec, &grid)?,
            convergence_check(&psi0, &dec, &grid)?,
        )
    };
    let trajectory = Trajectory::from_evolution(&ev, &dec, spec.reference)?;
    let summary = match TransferSummary::from_trajectory(&trajectory, tau) {
        Ok(s) => Some(s),
        Err(Error::MonotoneSeries) => None,
        Err(e) => return Err(e),
    };
    Ok(RunOutput {
        spec: spec.clone(),
        tau_used: tau,
        t_end,
        trajectory,
        summary,
        convergence,
    })
}

/// The four panels of the direct versus cavity comparison at fixed `n`.
pub fn run_comparison(g: f64, t0: f64, n: usize, solver: &SolverOptions) -> Result<Vec<RunOutput>> {
    let configs = [
        ModelConfig::direct(1.0, g),
        ModelConfig::direct(0.8, g),
        ModelConfig::cavity(1.0, g, n),
        ModelConfig::cavity(0.8, g, n),
    ];
    configs
        .into_par_iter()
        .map(|cfg| {
            let mut spec = RunSpec::new(cfg, t0);
            spec.solver = *solver;
            run(&spec)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    N,
    Alpha,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub value: f64,
    pub e_b_max: f64,
    pub t_b_max: f64,
    /// √n · t_B,max, for photon sweeps.
    pub sqrt_n_t: Option<f64>,
    pub e_c_bar: f64,
    pub tau_used: Option<f64>,
}

fn sweep_point(base: &RunSpec, variable: SweepVariable, value: f64) -> Result<SweepRecord> {
    let mut spec = base.clone();
    spec.tau = None;
    spec.t_end = None;
    match variable {
        SweepVariable::N => {
            if value < 0.0 || value.fract() != 0.0 {
                return Err(Error::Config(format!(
                    "photon number must be a non-negative integer, got {value}"
                )));
            }
            spec.model.n_initial = value as usize;
            spec.model.n_max = None;
        }
        SweepVariable::Alpha => spec.model.alpha = value,
    }
    let out = run(&spec)?;
    let s = out.summary.ok_or(Error::MonotoneSeries)?;
    Ok(SweepRecord {
        value,
        e_b_max: s.e_b_max,
        t_b_max: s.t_b_max,
        sqrt_n_t: (variable == SweepVariable::N).then(|| value.sqrt() * s.t_b_max),
        e_c_bar: s.e_c_bar,
        tau_used: out.tau_used,
    })
}

/// Runs every point concurrently. Values are sorted and deduplicated; each
/// point carries its own result so one failure does not hide the others.
pub fn sweep(
    base: &RunSpec,
    variable: SweepVariable,
    values: &[f64],
) -> Vec<(f64, Result<SweepRecord>)> {
    let mut values = values.to_vec();
    values.sort_by(f64::total_cmp);
    values.dedup();
    values
        .into_par_iter()
        .map(|v| (v, sweep_point(base, variable, v)))
        .collect()
}

/// Photon-number sweep of the cavity model with τ re-tuned per point.
pub fn sweep_photons(base: &RunSpec, n_list: &[usize]) -> Result<Vec<SweepRecord>> {
    if base.model.model != ModelKind::Cavity {
        return Err(Error::Config("photon sweeps need the cavity model".into()));
    }
    let values: Vec<f64> = n_list.iter().map(|&n| n as f64).collect();
    sweep(base, SweepVariable::N, &values)
        .into_iter()
        .map(|(_, r)| r)
        .collect()
}

#[derive(Debug, Clone)]
pub struct DetuningRun {
    pub alpha: f64,
    pub tau: f64,
    pub output: RunOutput,
    /// E_B measured against the bare ω_B.
    pub e_b_fixed: Vec<f64>,
    /// Peak-to-peak of `e_b_fixed` after the window closes.
    pub peak_to_peak: f64,
}

/// Runs the detuning-control protocol for each `(alpha, tau)` pair and
/// measures how steadily the battery holds its charge afterwards.
pub fn run_detuning_protocol(base: &RunSpec, cases: &[(f64, f64)]) -> Result<Vec<DetuningRun>> {
    if base.model.protocol != Protocol::DetuningSwitch {
        return Err(Error::Config(
            "run_detuning_protocol needs protocol = detuning_switch".into(),
        ));
    }
    cases
        .par_iter()
        .map(|&(alpha, tau)| {
            let mut spec = base.clone().with_tau(tau);
            spec.model.alpha = alpha;
            spec.reference = EnergyReference::Fixed;
            let output = run(&spec)?;
            let e_b_fixed = output.trajectory.e_b.clone();
            let after = 2.0 * tau + 10.0 * spec.t0;
            let peak_to_peak =
                Trajectory::peak_to_peak(&e_b_fixed, &output.trajectory.times, after);
            Ok(DetuningRun {
                alpha,
                tau,
                output,
                e_b_fixed,
                peak_to_peak,
            })
        })
        .collect()
}

/// Samples of a switching profile: (t, u(t), u̇(t)).
pub fn profile_samples(
    kind: ProfileKind,
    tau: f64,
    t0: f64,
    alpha: f64,
    t_end: f64,
    dt: f64,
) -> Result<Vec<(f64, f64, f64)>> {
    let p = SwitchProfile::new(tau, t0, kind)?;
    if !(dt > 0.0 && t_end > 0.0) {
        return Err(Error::Config(
            "profile sampling needs dt > 0 and t_end > 0".into(),
        ));
    }
    if kind == ProfileKind::DetuningG && !(alpha > 0.0) {
        return Err(Error::Config(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let schedule = match kind {
        ProfileKind::InteractionF => crate::profile::Schedule::Interaction(p),
        ProfileKind::DetuningG => crate::profile::Schedule::Detuning { profile: p, alpha },
    };
    let n = (t_end / dt + 1e-9).floor() as usize;
    Ok((0..=n)
        .map(|k| {
            let t = k as f64 * dt;
            (t, schedule.value(t), schedule.derivative(t))
        })
        .collect())
}
