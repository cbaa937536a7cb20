//! Smooth erf-based switching profiles and the scalar schedules built on them.
//!
//! The interaction profile f(t) rises around `tau`, stays on a plateau of
//! exactly one, and falls around `2 tau`; `t0` sets the ramp width. The
//! detuning profile g(t) interpolates between `alpha` outside the window and
//! `1` inside it.

use std::f64::consts::PI;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which of the two profile shapes a [`SwitchProfile`] parameterises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    InteractionF,
    DetuningG,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchProfile {
    pub tau: f64,
    pub t0: f64,
    pub kind: ProfileKind,
}

impl SwitchProfile {
    pub fn new(tau: f64, t0: f64, kind: ProfileKind) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::Config(format!("tau must be positive, got {tau}")));
        }
        if !(t0.is_finite() && t0 > 0.0) {
            return Err(Error::Config(format!("t0 must be positive, got {t0}")));
        }
        if t0 > tau / 10.0 {
            warn!("ramp width t0 = {t0} is not small against tau = {tau}; the plateau is not flat");
        }
        Ok(Self { tau, t0, kind })
    }

    pub fn interaction(tau: f64, t0: f64) -> Result<Self> {
        Self::new(tau, t0, ProfileKind::InteractionF)
    }

    pub fn detuning(tau: f64, t0: f64) -> Result<Self> {
        Self::new(tau, t0, ProfileKind::DetuningG)
    }

    fn norm(&self) -> f64 {
        2.0 * libm::erf(self.tau / (2.0 * self.t0))
    }

    /// The bare window shape shared by f and g, before mixing with alpha.
    fn window(&self, t: f64) -> f64 {
        let a = libm::erf((t - self.tau) / self.t0);
        let b = libm::erf((t - 2.0 * self.tau) / self.t0);
        (a - b) / self.norm()
    }

    fn window_derivative(&self, t: f64) -> f64 {
        let x = (t - self.tau) / self.t0;
        let y = (t - 2.0 * self.tau) / self.t0;
        ((-x * x).exp() - (-y * y).exp()) / (PI.sqrt() * self.t0 * (self.norm() / 2.0))
    }
}

/// f(t) = [erf((t−τ)/t₀) − erf((t−2τ)/t₀)] / (2 erf(τ/(2t₀))).
pub fn f_switch(t: f64, p: &SwitchProfile) -> f64 {
    debug_assert_eq!(p.kind, ProfileKind::InteractionF);
    p.window(t)
}

/// Exact time derivative of [`f_switch`].
pub fn f_switch_derivative(t: f64, p: &SwitchProfile) -> f64 {
    debug_assert_eq!(p.kind, ProfileKind::InteractionF);
    p.window_derivative(t)
}

/// g(t) = α + (1 − α)·window(t): equal to α far from the window, 1 at its centre.
pub fn g_detune(t: f64, p: &SwitchProfile, alpha: f64) -> f64 {
    debug_assert_eq!(p.kind, ProfileKind::DetuningG);
    // Same value as {(1−α)[erf − erf] + 2α erf(τ/2t₀)} / (2 erf(τ/2t₀)).
    (1.0 - alpha) * p.window(t) + alpha
}

pub fn g_detune_derivative(t: f64, p: &SwitchProfile, alpha: f64) -> f64 {
    debug_assert_eq!(p.kind, ProfileKind::DetuningG);
    (1.0 - alpha) * p.window_derivative(t)
}

/// Scalar coefficient u(t) multiplying the driven part of a Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    Constant(f64),
    Interaction(SwitchProfile),
    Detuning {
        profile: SwitchProfile,
        alpha: f64,
    },
    /// `inner` played backwards from `t_end`: u(s) = inner(t_end − s).
    Reversed {
        inner: Box<Schedule>,
        t_end: f64,
    },
}

impl Schedule {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Schedule::Constant(c) => *c,
            Schedule::Interaction(p) => f_switch(t, p),
            Schedule::Detuning { profile, alpha } => g_detune(t, profile, *alpha),
            Schedule::Reversed { inner, t_end } => inner.value(t_end - t),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            Schedule::Constant(_) => 0.0,
            Schedule::Interaction(p) => f_switch_derivative(t, p),
            Schedule::Detuning { profile, alpha } => g_detune_derivative(t, profile, *alpha),
            Schedule::Reversed { inner, t_end } => -inner.derivative(t_end - t),
        }
    }

    pub fn profile(&self) -> Option<&SwitchProfile> {
        match self {
            Schedule::Interaction(p) | Schedule::Detuning { profile: p, .. } => Some(p),
            Schedule::Reversed { inner, .. } => inner.profile(),
            Schedule::Constant(_) => None,
        }
    }
}
