//! Time-dependent Schrödinger evolution with the exponential midpoint rule.
//!
//! Each internal step applies `exp(-i H(t_mid) dt)`, with the exponential
//! taken from a Hermitian eigendecomposition. Before any step the propagator
//! splits the union sparsity pattern of `h_static` and `h_driven` into
//! connected components: `H(t)` is exactly block diagonal in that
//! permutation for every `t`, so exponentiating the blocks separately gives
//! the same dense unitary at a fraction of the cost. Unitaries are cached by
//! the bit pattern of `u(t_mid)`, which makes the long plateaus of the
//! switching profiles free.

use log::warn;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hilbert::{BasisLabel, HilbertSpace, Operator, C64};
use crate::model::{HamiltonianDecomposition, ModelConfig};

/// Tolerance on |‖ψ‖ − 1| at every sample.
pub const NORM_TOLERANCE: f64 = 1e-9;
/// Self-convergence threshold on the max state-vector deviation.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-7;
pub const DEFAULT_DT_STEP: f64 = 0.005;
pub const DEFAULT_DT_SAMPLE: f64 = 0.05;

/// A normalised pure state on the full space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(DVector<C64>);

impl StateVector {
    pub fn new(amplitudes: DVector<C64>) -> Self {
        Self(amplitudes)
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DVector<C64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn population(&self, index: usize) -> f64 {
        self.0[index].norm_sqr()
    }
}

/// |1_C, 0_B, n⟩: full charger, empty battery, `n_initial` photons.
pub fn initial_state(cfg: &ModelConfig, space: &HilbertSpace) -> Result<StateVector> {
    let v = space.basis_vector(BasisLabel::new(true, false, cfg.n_initial))?;
    Ok(StateVector(v))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub dt_sample: f64,
    pub dt_step: f64,
    steps_per_sample: usize,
    samples: usize,
}

impl TimeGrid {
    /// `dt_step` must divide `dt_sample`. The last sample is the largest
    /// multiple of `dt_sample` not beyond `t_end`.
    pub fn new(t_start: f64, t_end: f64, dt_sample: f64, dt_step: f64) -> Result<Self> {
        if !(t_start.is_finite() && t_end.is_finite() && t_end > t_start) {
            return Err(Error::Grid(format!(
                "need t_end > t_start, got [{t_start}, {t_end}]"
            )));
        }
        if !(dt_sample > 0.0 && dt_step > 0.0 && dt_step <= dt_sample) {
            return Err(Error::Grid(format!(
                "need 0 < dt_step <= dt_sample, got dt_step = {dt_step}, dt_sample = {dt_sample}"
            )));
        }
        let ratio = dt_sample / dt_step;
        let steps_per_sample = ratio.round() as usize;
        if (ratio - steps_per_sample as f64).abs() > 1e-9 * ratio {
            return Err(Error::Grid(format!(
                "dt_step = {dt_step} does not divide dt_sample = {dt_sample}"
            )));
        }
        let samples = ((t_end - t_start) / dt_sample + 1e-9).floor() as usize;
        if samples < 2 {
            return Err(Error::Grid(
                "time window holds fewer than three samples".into(),
            ));
        }
        Ok(Self {
            t_start,
            t_end,
            dt_sample,
            dt_step,
            steps_per_sample,
            samples,
        })
    }

    pub fn with_defaults(t_end: f64) -> Result<Self> {
        Self::new(0.0, t_end, DEFAULT_DT_SAMPLE, DEFAULT_DT_STEP)
    }

    pub fn halved(&self) -> Self {
        Self::new(self.t_start, self.t_end, self.dt_sample, self.dt_step / 2.0)
            .expect("halving keeps a valid grid")
    }

    pub fn steps_per_sample(&self) -> usize {
        self.steps_per_sample
    }

    /// Number of sample intervals; there are `intervals() + 1` samples.
    pub fn intervals(&self) -> usize {
        self.samples
    }

    pub fn sample_time(&self, k: usize) -> f64 {
        self.t_start + k as f64 * self.dt_sample
    }

    pub fn sample_times(&self) -> Vec<f64> {
        (0..=self.samples).map(|k| self.sample_time(k)).collect()
    }

    fn fine_time(&self, j: usize) -> f64 {
        self.t_start + j as f64 * self.dt_step
    }
}

/// Raw output of [`evolve`].
#[derive(Debug, Clone)]
pub struct Evolution {
    pub grid: TimeGrid,
    pub times: Vec<f64>,
    pub states: Vec<DVector<C64>>,
    /// ⟨ψ|h_driven|ψ⟩ at every internal step node, `steps_per_sample`
    /// nodes per sample interval.
    pub fine_driven: Vec<f64>,
}

impl Evolution {
    pub fn fine_times(&self) -> Vec<f64> {
        (0..self.fine_driven.len())
            .map(|j| self.grid.fine_time(j))
            .collect()
    }
}

/// U = V exp(−i Λ dt) V† for a Hermitian matrix.
pub fn hermitian_exponential(h: &DMatrix<C64>, dt: f64) -> DMatrix<C64> {
    let n = h.nrows();
    if n == 1 {
        return DMatrix::from_element(1, 1, C64::new(0.0, -h[(0, 0)].re * dt).exp());
    }
    let eig = nalgebra::SymmetricEigen::new(h.clone());
    let v = &eig.eigenvectors;
    let phases = DMatrix::from_diagonal(&DVector::from_iterator(
        n,
        eig.eigenvalues
            .iter()
            .map(|&l| C64::new(0.0, -l * dt).exp()),
    ));
    v * phases * v.adjoint()
}

/// Block-diagonal structure of a decomposition, shared by all steps.
struct BlockPropagator {
    blocks: Vec<Vec<usize>>,
    statics: Vec<DMatrix<C64>>,
    drivens: Vec<DMatrix<C64>>,
}

impl BlockPropagator {
    fn new(dec: &HamiltonianDecomposition) -> Self {
        let dim = dec.h_static.dim();
        let mut parent: Vec<usize> = (0..dim).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &(r, c, _) in dec.h_static.entries().iter().chain(dec.h_driven.entries()) {
            let (a, b) = (find(&mut parent, r), find(&mut parent, c));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut by_root: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for i in 0..dim {
            let root = find(&mut parent, i);
            by_root.entry(root).or_default().push(i);
        }
        let blocks: Vec<Vec<usize>> = by_root.into_values().collect();
        let statics = blocks.iter().map(|b| dec.h_static.restrict(b)).collect();
        let drivens = blocks.iter().map(|b| dec.h_driven.restrict(b)).collect();
        Self {
            blocks,
            statics,
            drivens,
        }
    }

    /// Restricted to one index set, which must be closed under the Hamiltonian.
    fn restricted(dec: &HamiltonianDecomposition, indices: &[usize]) -> Self {
        Self {
            blocks: vec![indices.to_vec()],
            statics: vec![dec.h_static.restrict(indices)],
            drivens: vec![dec.h_driven.restrict(indices)],
        }
    }

    fn unitaries(&self, u: f64, dt: f64) -> Vec<DMatrix<C64>> {
        self.statics
            .iter()
            .zip(&self.drivens)
            .map(|(s, d)| hermitian_exponential(&(s + d * C64::new(u, 0.0)), dt))
            .collect()
    }

    fn apply(&self, unitaries: &[DMatrix<C64>], psi: &mut DVector<C64>) {
        for (block, u) in self.blocks.iter().zip(unitaries) {
            let local = DVector::from_iterator(block.len(), block.iter().map(|&i| psi[i]));
            let out = u * local;
            for (k, &i) in block.iter().enumerate() {
                psi[i] = out[k];
            }
        }
    }
}

fn run(
    psi0: &StateVector,
    dec: &HamiltonianDecomposition,
    grid: &TimeGrid,
    stepper: &BlockPropagator,
) -> Result<Evolution> {
    let drift = (psi0.norm() - 1.0).abs();
    if drift > NORM_TOLERANCE {
        return Err(Error::Config(format!(
            "initial state is not normalised (|‖ψ‖−1| = {drift:.3e})"
        )));
    }
    let mut psi = psi0.amplitudes().clone();
    let n = grid.intervals();
    let m = grid.steps_per_sample();
    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    let mut fine_driven = Vec::with_capacity(n * m + 1);
    times.push(grid.sample_time(0));
    states.push(psi.clone());
    fine_driven.push(dec.h_driven.expectation(&psi));

    let mut cache: Option<(u64, Vec<DMatrix<C64>>)> = None;
    for k in 0..n {
        for j in 0..m {
            let step = k * m + j;
            let t_mid = grid.fine_time(step) + 0.5 * grid.dt_step;
            let u = dec.u(t_mid);
            let hit = matches!(&cache, Some((bits, _)) if *bits == u.to_bits());
            if !hit {
                cache = Some((u.to_bits(), stepper.unitaries(u, grid.dt_step)));
            }
            let (_, us) = cache.as_ref().expect("cache filled");
            stepper.apply(us, &mut psi);
            fine_driven.push(dec.h_driven.expectation(&psi));
        }
        let t = grid.sample_time(k + 1);
        let drift = (psi.norm() - 1.0).abs();
        if drift > NORM_TOLERANCE {
            return Err(Error::NormDrift {
                time: t,
                drift,
                dt_step: grid.dt_step,
            });
        }
        times.push(t);
        states.push(psi.clone());
    }
    Ok(Evolution {
        grid: *grid,
        times,
        states,
        fine_driven,
    })
}

fn check_step_size(dec: &HamiltonianDecomposition, grid: &TimeGrid) {
    // Gershgorin bound on the spectral radius at the largest |u| the schedule reaches.
    let u_max = [0.0, 0.25, 0.5, 0.75, 1.0]
        .iter()
        .map(|s| dec.u(grid.t_start + s * (grid.t_end - grid.t_start)).abs())
        .fold(1.0, f64::max);
    let mut rows = vec![0.0; dec.h_static.dim()];
    for &(r, _, v) in dec.h_static.entries() {
        rows[r] += v.norm();
    }
    for &(r, _, v) in dec.h_driven.entries() {
        rows[r] += u_max * v.norm();
    }
    let bound = rows.iter().cloned().fold(0.0, f64::max);
    if bound * grid.dt_step > 0.1 {
        warn!(
            "dt_step * |H| ≈ {:.3} exceeds 0.1; phases per step are large",
            bound * grid.dt_step
        );
    }
}

/// Integrates from `grid.t_start` to the last sample, recording the state
/// at every sample time.
pub fn evolve(
    psi0: &StateVector,
    dec: &HamiltonianDecomposition,
    grid: &TimeGrid,
) -> Result<Evolution> {
    check_step_size(dec, grid);
    run(psi0, dec, grid, &BlockPropagator::new(dec))
}

/// Evolution confined to the index set `indices` (for instance one
/// excitation-number block), using one dense exponential of the restricted
/// Hamiltonian per step. States are embedded back into the full space.
pub fn evolve_restricted(
    psi0: &StateVector,
    dec: &HamiltonianDecomposition,
    grid: &TimeGrid,
    indices: &[usize],
) -> Result<Evolution> {
    let outside: f64 = (0..psi0.amplitudes().len())
        .filter(|i| !indices.contains(i))
        .map(|i| psi0.population(i))
        .sum();
    if outside > 0.0 {
        return Err(Error::Config(
            "initial state has weight outside the subspace".into(),
        ));
    }
    for &(r, c, _) in dec.h_static.entries().iter().chain(dec.h_driven.entries()) {
        if indices.contains(&r) != indices.contains(&c) {
            return Err(Error::Config(
                "subspace is not invariant under the Hamiltonian".into(),
            ));
        }
    }
    run(psi0, dec, grid, &BlockPropagator::restricted(dec, indices))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceReport {
    /// Step size of the evolution being vouched for.
    pub dt_step: f64,
    /// Max over samples of ‖ψ(dt_step) − ψ(dt_step / 2)‖.
    pub deviation: f64,
    pub passed: bool,
}

fn max_deviation(a: &Evolution, b: &Evolution) -> f64 {
    a.states
        .iter()
        .zip(&b.states)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Re-runs with half the step and compares the sampled states.
pub fn convergence_check(
    psi0: &StateVector,
    dec: &HamiltonianDecomposition,
    grid: &TimeGrid,
) -> Result<ConvergenceReport> {
    let stepper = BlockPropagator::new(dec);
    let coarse = run(psi0, dec, grid, &stepper)?;
    let fine = run(psi0, dec, &grid.halved(), &stepper)?;
    let deviation = max_deviation(&coarse, &fine);
    Ok(ConvergenceReport {
        dt_step: grid.dt_step,
        deviation,
        passed: deviation < CONVERGENCE_TOLERANCE,
    })
}

/// Evolves, halving `dt_step` until successive runs agree to
/// [`CONVERGENCE_TOLERANCE`], at most `max_halvings` times.
pub fn evolve_converged(
    psi0: &StateVector,
    dec: &HamiltonianDecomposition,
    grid: &TimeGrid,
    max_halvings: usize,
) -> Result<(Evolution, ConvergenceReport)> {
    check_step_size(dec, grid);
    let stepper = BlockPropagator::new(dec);
    let mut grid = *grid;
    let mut coarse = run(psi0, dec, &grid, &stepper)?;
    let mut deviation = f64::INFINITY;
    for _ in 0..=max_halvings {
        let finer = grid.halved();
        let fine = run(psi0, dec, &finer, &stepper)?;
        deviation = max_deviation(&coarse, &fine);
        if deviation < CONVERGENCE_TOLERANCE {
            let report = ConvergenceReport {
                dt_step: grid.dt_step,
                deviation,
                passed: true,
            };
            return Ok((coarse, report));
        }
        grid = finer;
        coarse = fine;
    }
    Err(Error::NotConverged {
        deviation,
        dt_step: grid.dt_step,
    })
}

/// Operator exponential on the full space without block detection; used to
/// cross-check the block propagator.
pub fn dense_step(h: &Operator, dt: f64) -> DMatrix<C64> {
    hermitian_exponential(h.matrix(), dt)
}
