//! Energies, power, work and charging figures of merit along a trajectory.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::C64;
use crate::model::{HamiltonianDecomposition, Term};
use crate::profile::Schedule;
use crate::propagator::Evolution;

/// Required agreement of the full-sum and simplified work routes.
pub const WORK_IDENTITY_TOLERANCE: f64 = 1e-8;
/// Minimum rise over the preceding minimum for a sample to count as a maximum.
pub const MAX_PROMINENCE: f64 = 1e-6;
/// Differences below this are treated as flat when looking for maxima.
const FLAT: f64 = 1e-12;

/// Which splitting the reported charger and battery energies are measured
/// against when the splittings themselves are modulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EnergyReference {
    /// The instantaneous component Hamiltonians.
    #[default]
    Instantaneous,
    /// The bare splittings αω_B and ω_B.
    Fixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub e_c: Vec<f64>,
    pub e_b: Vec<f64>,
    pub e_m: Vec<f64>,
    pub e_int: Vec<f64>,
    pub p: Vec<f64>,
    pub w_integral: Vec<f64>,
    /// E_C + E_B + E_M + E_int with the instantaneous components.
    pub w_conservation: Vec<f64>,
    /// (1 − α) E_B + E_int; `None` when the splittings are modulated and the
    /// shortcut does not hold.
    pub w_simplified: Option<Vec<f64>>,
    pub norm: Vec<f64>,
    pub n_exc: Vec<f64>,
}

/// ⟨ψ(t)|H_i(t)|ψ(t)⟩ − ⟨ψ(0)|H_i(0)|ψ(0)⟩ for each sample; the first
/// sample is the reference.
pub fn component_energy(
    states: &[DVector<C64>],
    times: &[f64],
    term: &Term,
    schedule: &Schedule,
) -> Vec<f64> {
    let raw: Vec<f64> = states
        .iter()
        .zip(times)
        .map(|(psi, &t)| term.expectation(schedule.value(t), psi))
        .collect();
    let e0 = raw.first().copied().unwrap_or(0.0);
    raw.into_iter().map(|e| e - e0).collect()
}

pub fn interaction_energy(ev: &Evolution, dec: &HamiltonianDecomposition) -> Vec<f64> {
    component_energy(&ev.states, &ev.times, &dec.interaction, &dec.schedule)
}

/// P(t) = u̇(t) ⟨ψ(t)|h_driven|ψ(t)⟩ at the sample times.
pub fn power(ev: &Evolution, dec: &HamiltonianDecomposition) -> Vec<f64> {
    ev.states
        .iter()
        .zip(&ev.times)
        .map(|(psi, &t)| dec.u_dot(t) * dec.h_driven.expectation(psi))
        .collect()
}

/// P(t) on the internal step nodes.
pub fn power_fine(ev: &Evolution, dec: &HamiltonianDecomposition) -> Vec<f64> {
    ev.fine_times()
        .iter()
        .zip(&ev.fine_driven)
        .map(|(&t, &d)| dec.u_dot(t) * d)
        .collect()
}

/// Cumulative integral of a uniformly sampled series: composite Simpson up
/// to every even node, one trapezoid panel added for odd nodes.
pub fn work_by_integral(p: &[f64], dt: f64) -> Vec<f64> {
    let mut w = vec![0.0; p.len()];
    for k in 1..p.len() {
        w[k] = if k % 2 == 0 {
            w[k - 2] + dt / 3.0 * (p[k - 2] + 4.0 * p[k - 1] + p[k])
        } else {
            w[k - 1] + 0.5 * dt * (p[k - 1] + p[k])
        };
    }
    w
}

/// The two bookkeeping forms of the work.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkRoutes {
    pub full_sum: Vec<f64>,
    pub simplified: Option<Vec<f64>>,
}

/// Full sum E_C + E_B + E_M + E_int and, when `alpha` is given, the
/// shortcut (1 − α) E_B + E_int; fails if the two disagree.
pub fn work_by_conservation(
    times: &[f64],
    e_c: &[f64],
    e_b: &[f64],
    e_m: &[f64],
    e_int: &[f64],
    alpha: Option<f64>,
) -> Result<WorkRoutes> {
    let full_sum: Vec<f64> = (0..times.len())
        .map(|k| e_c[k] + e_b[k] + e_m[k] + e_int[k])
        .collect();
    let simplified = alpha.map(|a| {
        (0..times.len())
            .map(|k| (1.0 - a) * e_b[k] + e_int[k])
            .collect::<Vec<f64>>()
    });
    if let Some(s) = &simplified {
        for (k, (x, y)) in full_sum.iter().zip(s).enumerate() {
            let d = (x - y).abs();
            if d > WORK_IDENTITY_TOLERANCE {
                return Err(Error::EnergyAccounting {
                    time: times[k],
                    discrepancy: d,
                });
            }
        }
    }
    Ok(WorkRoutes {
        full_sum,
        simplified,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalMax {
    pub value: f64,
    pub time: f64,
    pub index: usize,
}

/// Earliest interior local maximum that rises more than `prominence` above
/// the lowest earlier sample. A strict peak is refined by a parabola through
/// its two neighbours; a plateau edge is reported as sampled.
pub fn first_local_max(series: &[f64], times: &[f64], prominence: f64) -> Result<LocalMax> {
    if series.len() < 3 || series.len() != times.len() {
        return Err(Error::MonotoneSeries);
    }
    let mut lowest = series[0];
    for i in 1..series.len() - 1 {
        lowest = lowest.min(series[i - 1]);
        let (a, b, c) = (series[i - 1], series[i], series[i + 1]);
        if !(b >= a && b >= c - FLAT) || b - lowest <= prominence {
            continue;
        }
        let h = times[i + 1] - times[i];
        let curvature = a - 2.0 * b + c;
        if b - a > FLAT && b - c > FLAT && curvature < 0.0 {
            let offset = (0.5 * (a - c) / curvature).clamp(-1.0, 1.0);
            let value = b - 0.125 * (a - c) * (a - c) / curvature;
            return Ok(LocalMax {
                value,
                time: times[i] + offset * h,
                index: i,
            });
        }
        return Ok(LocalMax {
            value: b,
            time: times[i],
            index: i,
        });
    }
    Err(Error::MonotoneSeries)
}

fn interpolate(series: &[f64], times: &[f64], t: f64) -> f64 {
    let k = times.partition_point(|&x| x <= t).clamp(1, times.len() - 1);
    let (t0, t1) = (times[k - 1], times[k]);
    let s = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
    series[k - 1] + s * (series[k] - series[k - 1])
}

impl Trajectory {
    /// Evaluates every observable on an evolution.
    pub fn from_evolution(
        ev: &Evolution,
        dec: &HamiltonianDecomposition,
        reference: EnergyReference,
    ) -> Result<Self> {
        let (states, times, sch) = (&ev.states, &ev.times, &dec.schedule);
        let e_c = component_energy(states, times, &dec.charger, sch);
        let e_b = component_energy(states, times, &dec.battery, sch);
        let e_m = component_energy(states, times, &dec.mediator, sch);
        let e_int = component_energy(states, times, &dec.interaction, sch);

        let modulated = dec.charger.driven.is_some() || dec.battery.driven.is_some();
        let alpha = (!modulated).then_some(dec.alpha);
        let routes = work_by_conservation(times, &e_c, &e_b, &e_m, &e_int, alpha)?;

        let m = ev.grid.steps_per_sample();
        let w_fine = work_by_integral(&power_fine(ev, dec), ev.grid.dt_step);
        let w_integral: Vec<f64> = w_fine.iter().step_by(m).copied().collect();
        debug_assert_eq!(w_integral.len(), times.len());

        let (e_c, e_b) = match reference {
            EnergyReference::Instantaneous => (e_c, e_b),
            EnergyReference::Fixed => (
                component_energy(
                    states,
                    times,
                    &Term::fixed(dec.charger_reference.clone()),
                    sch,
                ),
                component_energy(
                    states,
                    times,
                    &Term::fixed(dec.battery_reference.clone()),
                    sch,
                ),
            ),
        };

        let n_op = dec.space.excitation_number();
        Ok(Self {
            times: times.clone(),
            e_c,
            e_b,
            e_m,
            e_int,
            p: power(ev, dec),
            w_integral,
            w_conservation: routes.full_sum,
            w_simplified: routes.simplified,
            norm: states.iter().map(|s| s.norm()).collect(),
            n_exc: states.iter().map(|s| n_op.expectation(s)).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// max_t |W_integral(t) − W_conservation(t)|.
    pub fn work_route_gap(&self) -> f64 {
        self.w_integral
            .iter()
            .zip(&self.w_conservation)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// E_C + E_B + E_M + E_int at each sample.
    pub fn total_energy(&self) -> Vec<f64> {
        (0..self.len())
            .map(|k| self.e_c[k] + self.e_b[k] + self.e_m[k] + self.e_int[k])
            .collect()
    }

    /// Peak-to-peak of `series` over samples with `t > after`.
    pub fn peak_to_peak(series: &[f64], times: &[f64], after: f64) -> f64 {
        let tail: Vec<f64> = times
            .iter()
            .zip(series)
            .filter(|(&t, _)| t > after)
            .map(|(_, &v)| v)
            .collect();
        if tail.is_empty() {
            return 0.0;
        }
        let hi = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = tail.iter().cloned().fold(f64::INFINITY, f64::min);
        hi - lo
    }
}

/// Charging figures of merit for one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferSummary {
    pub e_b_max: f64,
    pub t_b_max: f64,
    pub e_c_bar: f64,
    pub tau_used: Option<f64>,
}

impl TransferSummary {
    pub fn from_trajectory(traj: &Trajectory, tau_used: Option<f64>) -> Result<Self> {
        let max = first_local_max(&traj.e_b, &traj.times, MAX_PROMINENCE)?;
        Ok(Self {
            e_b_max: max.value,
            t_b_max: max.time,
            e_c_bar: interpolate(&traj.e_c, &traj.times, max.time),
            tau_used,
        })
    }
}
