//! Hamiltonians of the direct and cavity-mediated transfer models.
//!
//! Every model is written as `H(t) = h_static + u(t) * h_driven`. Alongside
//! the two pieces the decomposition keeps each physical component (charger,
//! battery, mediator, interaction) as its own [`Term`], so energies can be
//! attributed without re-deriving the split.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{HilbertSpace, Ladder, Operator, Site};
use crate::profile::{ProfileKind, Schedule, SwitchProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Direct,
    Cavity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// u ≡ 1.
    AlwaysOn,
    /// Coupling multiplied by f(t).
    InteractionSwitch,
    /// Qubit splittings multiplied by g(t), coupling always on.
    DetuningSwitch,
}

/// How the detuning profile enters the qubit splittings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DetuningReading {
    /// ω_C(t) = α ω_B g(t) and ω_B(t) = ω_B g(t).
    #[default]
    Literal,
    /// ω_C(t) = ω_B g(t), battery splitting fixed at ω_B.
    ChargerOnly,
}

/// Whether the detuning protocol keeps a free cavity term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CavityTerm {
    #[default]
    Omit,
    /// ω_B a†a.
    FixedOmegaB,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub omega_b: f64,
    pub alpha: f64,
    pub g: f64,
    pub n_initial: usize,
    /// Photon truncation; `None` means `n_initial + 1`.
    pub n_max: Option<usize>,
    pub model: ModelKind,
    pub protocol: Protocol,
    pub detuning_reading: DetuningReading,
    pub cavity_term: CavityTerm,
}

impl ModelConfig {
    pub fn new(model: ModelKind, protocol: Protocol, alpha: f64, g: f64, n_initial: usize) -> Self {
        Self {
            omega_b: 1.0,
            alpha,
            g,
            n_initial,
            n_max: None,
            model,
            protocol,
            detuning_reading: DetuningReading::default(),
            cavity_term: CavityTerm::default(),
        }
    }

    pub fn direct(alpha: f64, g: f64) -> Self {
        Self::new(ModelKind::Direct, Protocol::InteractionSwitch, alpha, g, 0)
    }

    pub fn cavity(alpha: f64, g: f64, n_initial: usize) -> Self {
        Self::new(
            ModelKind::Cavity,
            Protocol::InteractionSwitch,
            alpha,
            g,
            n_initial,
        )
    }

    pub fn with_protocol(mut self, protocol: Protocol) -> Self {
        self.protocol = protocol;
        self
    }

    pub fn n_max(&self) -> usize {
        self.n_max.unwrap_or(self.n_initial + 1)
    }

    pub fn space(&self) -> HilbertSpace {
        HilbertSpace::new(self.n_max())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_b.is_finite() && self.omega_b > 0.0) {
            return Err(Error::Config(format!(
                "omega_b must be positive, got {}",
                self.omega_b
            )));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::Config(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        if !(self.g.is_finite() && self.g >= 0.0) {
            return Err(Error::Config(format!(
                "g must be non-negative, got {}",
                self.g
            )));
        }
        if let Some(n_max) = self.n_max {
            if n_max < self.n_initial + 1 {
                return Err(Error::Config(format!(
                    "n_max = {n_max} must be at least n_initial + 1 = {}",
                    self.n_initial + 1
                )));
            }
        }
        if self.model == ModelKind::Direct && self.protocol == Protocol::DetuningSwitch {
            return Err(Error::Config(
                "the detuning protocol is defined for the cavity model only".into(),
            ));
        }
        if self.g > 0.1 * self.omega_b * self.alpha.min(1.0) {
            warn!(
                "g = {} exceeds 0.1 of the smallest splitting; the rotating-wave form is doubtful",
                self.g
            );
        }
        Ok(())
    }

    /// The profile kind the configured protocol expects, if any.
    pub fn profile_kind(&self) -> Option<ProfileKind> {
        match self.protocol {
            Protocol::AlwaysOn => None,
            Protocol::InteractionSwitch => Some(ProfileKind::InteractionF),
            Protocol::DetuningSwitch => Some(ProfileKind::DetuningG),
        }
    }
}

/// An operator of the form `fixed + u(t) * driven`.
#[derive(Debug, Clone)]
pub struct Term {
    pub fixed: Operator,
    pub driven: Option<Operator>,
}

impl Term {
    pub fn fixed(op: Operator) -> Self {
        Self {
            fixed: op,
            driven: None,
        }
    }

    pub fn driven(zero: Operator, op: Operator) -> Self {
        Self {
            fixed: zero,
            driven: Some(op),
        }
    }

    pub fn at(&self, u: f64) -> Operator {
        match &self.driven {
            Some(d) => &self.fixed + &d.scale(u),
            None => self.fixed.clone(),
        }
    }

    /// ⟨ψ| fixed + u·driven |ψ⟩.
    pub fn expectation(&self, u: f64, psi: &nalgebra::DVector<crate::hilbert::C64>) -> f64 {
        let mut e = self.fixed.expectation(psi);
        if let Some(d) = &self.driven {
            e += u * d.expectation(psi);
        }
        e
    }
}

#[derive(Debug, Clone)]
pub struct HamiltonianDecomposition {
    pub space: HilbertSpace,
    pub h_static: Operator,
    pub h_driven: Operator,
    pub schedule: Schedule,
    pub charger: Term,
    pub battery: Term,
    pub mediator: Term,
    pub interaction: Term,
    /// Bare (αω_B/2) σ_z^C, the fixed reference for charger energy.
    pub charger_reference: Operator,
    /// Bare (ω_B/2) σ_z^B, the fixed reference for battery energy.
    pub battery_reference: Operator,
    pub alpha: f64,
}

impl HamiltonianDecomposition {
    pub fn u(&self, t: f64) -> f64 {
        self.schedule.value(t)
    }

    pub fn u_dot(&self, t: f64) -> f64 {
        self.schedule.derivative(t)
    }

    pub fn at(&self, t: f64) -> Operator {
        &self.h_static + &self.h_driven.scale(self.u(t))
    }

    pub fn with_schedule(mut self, schedule: Schedule) -> Self {
        self.schedule = schedule;
        self
    }

    /// Decomposition generating backward evolution from `t_end`: evolving
    /// with it for `t_end` undoes the forward evolution.
    pub fn time_reversed(&self, t_end: f64) -> Self {
        let neg = |t: &Term| Term {
            fixed: t.fixed.scale(-1.0),
            driven: t.driven.as_ref().map(|d| d.scale(-1.0)),
        };
        Self {
            space: self.space,
            h_static: self.h_static.scale(-1.0),
            h_driven: self.h_driven.scale(-1.0),
            schedule: Schedule::Reversed {
                inner: Box::new(self.schedule.clone()),
                t_end,
            },
            charger: neg(&self.charger),
            battery: neg(&self.battery),
            mediator: neg(&self.mediator),
            interaction: neg(&self.interaction),
            charger_reference: self.charger_reference.scale(-1.0),
            battery_reference: self.battery_reference.scale(-1.0),
            alpha: self.alpha,
        }
    }
}

fn schedule_for(cfg: &ModelConfig, profile: Option<SwitchProfile>) -> Result<Schedule> {
    match (cfg.profile_kind(), profile) {
        (None, _) => Ok(Schedule::Constant(1.0)),
        (Some(kind), Some(p)) if p.kind == kind => Ok(match kind {
            ProfileKind::InteractionF => Schedule::Interaction(p),
            ProfileKind::DetuningG => Schedule::Detuning {
                profile: p,
                alpha: cfg.alpha,
            },
        }),
        (Some(kind), Some(p)) => Err(Error::Config(format!(
            "protocol {:?} needs a {kind:?} profile, got {:?}",
            cfg.protocol, p.kind
        ))),
        (Some(kind), None) => Err(Error::Config(format!(
            "protocol {:?} needs a {kind:?} profile",
            cfg.protocol
        ))),
    }
}

struct Pieces {
    h_c: Operator,
    h_b: Operator,
    h_m: Operator,
    zero: Operator,
}

fn free_pieces(cfg: &ModelConfig, space: &HilbertSpace) -> Pieces {
    let w = cfg.omega_b;
    Pieces {
        h_c: space.pauli_z(Site::Charger).scale(0.5 * cfg.alpha * w),
        h_b: space.pauli_z(Site::Battery).scale(0.5 * w),
        h_m: space.photon_number().scale(cfg.alpha * w),
        zero: space.zero(),
    }
}

/// g [a†(σ₋^C + σ₋^B) + a(σ₊^C + σ₊^B)].
fn cavity_coupling(g: f64, space: &HilbertSpace) -> Operator {
    let lower =
        &space.ladder(Site::Charger, Ladder::Lower) + &space.ladder(Site::Battery, Ladder::Lower);
    let raise =
        &space.ladder(Site::Charger, Ladder::Raise) + &space.ladder(Site::Battery, Ladder::Raise);
    let m = &(&space.creator() * &lower) + &(&space.annihilator() * &raise);
    Operator::new(m.matrix().clone(), true).scale(g)
}

/// g (σ₋^C σ₊^B + σ₊^C σ₋^B).
fn direct_coupling(g: f64, space: &HilbertSpace) -> Operator {
    let cb =
        &space.ladder(Site::Charger, Ladder::Lower) * &space.ladder(Site::Battery, Ladder::Raise);
    let bc =
        &space.ladder(Site::Charger, Ladder::Raise) * &space.ladder(Site::Battery, Ladder::Lower);
    Operator::new((&cb + &bc).matrix().clone(), true).scale(g)
}

/// Direct capacitive coupling between the two qubits. The cavity factor is
/// present in the space but uncoupled.
pub fn build_direct(
    cfg: &ModelConfig,
    profile: Option<SwitchProfile>,
) -> Result<HamiltonianDecomposition> {
    cfg.validate()?;
    if cfg.model != ModelKind::Direct {
        return Err(Error::Config(
            "build_direct called with a cavity configuration".into(),
        ));
    }
    let schedule = schedule_for(cfg, profile)?;
    let space = cfg.space();
    let p = free_pieces(cfg, &space);
    let h_driven = direct_coupling(cfg.g, &space);
    Ok(HamiltonianDecomposition {
        space,
        h_static: &p.h_c + &p.h_b,
        h_driven: h_driven.clone(),
        schedule,
        charger_reference: p.h_c.clone(),
        battery_reference: p.h_b.clone(),
        alpha: cfg.alpha,
        charger: Term::fixed(p.h_c),
        battery: Term::fixed(p.h_b),
        mediator: Term::fixed(p.zero.clone()),
        interaction: Term::driven(p.zero, h_driven),
    })
}

/// Both qubits coupled to one cavity mode of frequency α ω_B.
pub fn build_cavity(
    cfg: &ModelConfig,
    profile: Option<SwitchProfile>,
) -> Result<HamiltonianDecomposition> {
    cfg.validate()?;
    if cfg.model != ModelKind::Cavity {
        return Err(Error::Config(
            "build_cavity called with a direct configuration".into(),
        ));
    }
    if cfg.protocol == Protocol::DetuningSwitch {
        return build_detuning_protocol(cfg, profile);
    }
    let schedule = schedule_for(cfg, profile)?;
    let space = cfg.space();
    let p = free_pieces(cfg, &space);
    let h_driven = cavity_coupling(cfg.g, &space);
    Ok(HamiltonianDecomposition {
        space,
        h_static: &(&p.h_c + &p.h_b) + &p.h_m,
        h_driven: h_driven.clone(),
        schedule,
        charger_reference: p.h_c.clone(),
        battery_reference: p.h_b.clone(),
        alpha: cfg.alpha,
        charger: Term::fixed(p.h_c),
        battery: Term::fixed(p.h_b),
        mediator: Term::fixed(p.h_m),
        interaction: Term::driven(p.zero, h_driven),
    })
}

/// Cavity model with a constant coupling and g(t)-modulated qubit splittings.
pub fn build_detuning_protocol(
    cfg: &ModelConfig,
    profile: Option<SwitchProfile>,
) -> Result<HamiltonianDecomposition> {
    cfg.validate()?;
    if cfg.protocol != Protocol::DetuningSwitch || cfg.model != ModelKind::Cavity {
        return Err(Error::Config(
            "the detuning protocol needs model = cavity and protocol = detuning_switch".into(),
        ));
    }
    let schedule = schedule_for(cfg, profile)?;
    let space = cfg.space();
    let w = cfg.omega_b;
    let zero = space.zero();
    let coupling = cavity_coupling(cfg.g, &space);
    let h_b_bare = space.pauli_z(Site::Battery).scale(0.5 * w);

    let mediator = match cfg.cavity_term {
        CavityTerm::Omit => zero.clone(),
        CavityTerm::FixedOmegaB => space.photon_number().scale(w),
    };

    let (charger, battery) = match cfg.detuning_reading {
        DetuningReading::Literal => (
            Term::driven(
                zero.clone(),
                space.pauli_z(Site::Charger).scale(0.5 * cfg.alpha * w),
            ),
            Term::driven(zero.clone(), h_b_bare.clone()),
        ),
        DetuningReading::ChargerOnly => (
            Term::driven(zero.clone(), space.pauli_z(Site::Charger).scale(0.5 * w)),
            Term::fixed(h_b_bare.clone()),
        ),
    };

    let h_static = &(&(&charger.fixed + &battery.fixed) + &mediator) + &coupling;
    let h_driven = match (&charger.driven, &battery.driven) {
        (Some(c), Some(b)) => c + b,
        (Some(c), None) => c.clone(),
        _ => unreachable!("charger splitting is always driven"),
    };

    Ok(HamiltonianDecomposition {
        space,
        h_static,
        h_driven,
        schedule,
        charger,
        battery,
        mediator: Term::fixed(mediator),
        interaction: Term::fixed(coupling),
        charger_reference: space.pauli_z(Site::Charger).scale(0.5 * cfg.alpha * w),
        battery_reference: h_b_bare,
        alpha: cfg.alpha,
    })
}

/// Builds whichever model `cfg` selects.
pub fn build(
    cfg: &ModelConfig,
    profile: Option<SwitchProfile>,
) -> Result<HamiltonianDecomposition> {
    match cfg.model {
        ModelKind::Direct => build_direct(cfg, profile),
        ModelKind::Cavity => build_cavity(cfg, profile),
    }
}
