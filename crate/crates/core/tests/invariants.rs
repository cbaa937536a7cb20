//! Cross-module invariants over randomly drawn configurations.

use proptest::prelude::*;
use qbtransfer::observables::EnergyReference;
use qbtransfer::propagator::{evolve, evolve_restricted, initial_state, TimeGrid};
use qbtransfer::{build, ModelConfig, ModelKind, Protocol, SwitchProfile, Trajectory};

fn model(kind: ModelKind, protocol: Protocol, alpha: f64, g: f64, n: usize) -> ModelConfig {
    ModelConfig::new(kind, protocol, alpha, g, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn switched_runs_conserve_norm_excitations_and_energy(
        cavity in any::<bool>(),
        alpha in 0.5f64..1.5,
        g in 0.01f64..0.05,
        n in 0usize..6,
        tau in 2.0f64..6.0,
    ) {
        let kind = if cavity { ModelKind::Cavity } else { ModelKind::Direct };
        let n = if cavity { n } else { 0 };
        let cfg = model(kind, Protocol::InteractionSwitch, alpha, g, n);
        let dec = build(&cfg, Some(SwitchProfile::interaction(tau, 0.1).unwrap())).unwrap();
        let psi0 = initial_state(&cfg, &dec.space).unwrap();
        let grid = TimeGrid::new(0.0, 3.0 * tau + 2.0, 0.05, 0.005).unwrap();
        let ev = evolve(&psi0, &dec, &grid).unwrap();
        let traj = Trajectory::from_evolution(&ev, &dec, EnergyReference::Instantaneous).unwrap();

        let exc = n as f64 + 1.0;
        for k in 0..traj.len() {
            prop_assert!((traj.norm[k] - 1.0).abs() < 1e-9);
            prop_assert!((traj.n_exc[k] - exc).abs() < 1e-8);
        }
        let ws = traj.w_simplified.as_ref().unwrap();
        for k in 0..traj.len() {
            let sum = traj.e_c[k] + traj.e_b[k] + traj.e_m[k] + traj.e_int[k];
            prop_assert!((sum - ws[k]).abs() < 1e-8);
            prop_assert!((traj.w_conservation[k] - ws[k]).abs() < 1e-8);
        }
        prop_assert!(traj.work_route_gap() < 1e-4);
    }

    #[test]
    fn full_and_sector_evolution_agree(alpha in 0.6f64..1.4, n in 0usize..8, tau in 2.0f64..5.0) {
        let cfg = model(ModelKind::Cavity, Protocol::InteractionSwitch, alpha, 0.05, n);
        let dec = build(&cfg, Some(SwitchProfile::interaction(tau, 0.1).unwrap())).unwrap();
        let psi0 = initial_state(&cfg, &dec.space).unwrap();
        let grid = TimeGrid::new(0.0, 2.0 * tau + 1.0, 0.05, 0.005).unwrap();
        let full = evolve(&psi0, &dec, &grid).unwrap();
        let block = dec.space.excitation_block(n + 1);
        let restricted = evolve_restricted(&psi0, &dec, &grid, &block).unwrap();
        for (a, b) in full.states.iter().zip(&restricted.states) {
            prop_assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn detuning_protocol_conserves_excitations(alpha in 0.1f64..1.0, n in 0usize..6, tau in 2.0f64..6.0) {
        let cfg = model(ModelKind::Cavity, Protocol::DetuningSwitch, alpha, 0.05, n);
        let dec = build(&cfg, Some(SwitchProfile::detuning(tau, 0.1).unwrap())).unwrap();
        let psi0 = initial_state(&cfg, &dec.space).unwrap();
        let grid = TimeGrid::new(0.0, 2.5 * tau, 0.05, 0.005).unwrap();
        let ev = evolve(&psi0, &dec, &grid).unwrap();
        let traj = Trajectory::from_evolution(&ev, &dec, EnergyReference::Instantaneous).unwrap();
        prop_assert!(traj.w_simplified.is_none());
        for k in 0..traj.len() {
            prop_assert!((traj.n_exc[k] - (n as f64 + 1.0)).abs() < 1e-8);
        }
        prop_assert!(traj.work_route_gap() < 1e-4);
    }
}
