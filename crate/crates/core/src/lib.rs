//! Coherent energy transfer from a charger qubit to a battery qubit, either
//! through a direct exchange coupling or through a shared cavity mode.
//!
//! The crate builds the rotating-wave Hamiltonians on a truncated
//! charger ⊗ battery ⊗ cavity space, integrates the Schrödinger equation
//! under smooth switching schedules, and reports energies, work and
//! charging figures of merit.

pub mod error;
pub mod hilbert;
pub mod io;
pub mod model;
pub mod observables;
pub mod profile;
pub mod propagator;
pub mod protocols;

pub use error::{Error, Result};
pub use hilbert::{BasisLabel, HilbertSpace, Ladder, Operator, Site, C64};
pub use model::{
    build, CavityTerm, DetuningReading, HamiltonianDecomposition, ModelConfig, ModelKind, Protocol,
};
pub use observables::{EnergyReference, Trajectory, TransferSummary};
pub use profile::{ProfileKind, Schedule, SwitchProfile};
pub use propagator::{evolve, initial_state, ConvergenceReport, Evolution, StateVector, TimeGrid};
pub use protocols::{run, tune_tau, RunOutput, RunSpec, SolverOptions, SweepRecord, SweepVariable};
