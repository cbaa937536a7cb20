//! Truncated charger ⊗ battery ⊗ cavity Hilbert space and its elementary
//! operators.
//!
//! Basis states are labelled by the charger occupancy, the battery occupancy
//! and the photon count. The flat index is
//! `(2 * charger + battery) * (n_max + 1) + photons`, so the photon number
//! runs fastest.

use std::ops::{Add, Mul, Sub};

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// One of the two two-level systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Site {
    Charger,
    Battery,
}

/// Direction of a spin ladder operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ladder {
    /// σ₊: ground → excited.
    Raise,
    /// σ₋: excited → ground.
    Lower,
}

/// Occupation-number label of a product basis state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisLabel {
    pub charger: bool,
    pub battery: bool,
    pub photons: usize,
}

impl BasisLabel {
    pub fn new(charger: bool, battery: bool, photons: usize) -> Self {
        Self {
            charger,
            battery,
            photons,
        }
    }

    pub fn occupancy(&self, site: Site) -> bool {
        match site {
            Site::Charger => self.charger,
            Site::Battery => self.battery,
        }
    }

    fn with_occupancy(mut self, site: Site, value: bool) -> Self {
        match site {
            Site::Charger => self.charger = value,
            Site::Battery => self.battery = value,
        }
        self
    }

    /// Total excitation number: qubit excitations plus photons.
    pub fn excitations(&self) -> usize {
        self.charger as usize + self.battery as usize + self.photons
    }
}

/// The truncated tensor-product space with photon numbers `0..=n_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertSpace {
    n_max: usize,
}

impl HilbertSpace {
    pub fn new(n_max: usize) -> Self {
        Self { n_max }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        4 * (self.n_max + 1)
    }

    pub fn index(&self, label: BasisLabel) -> Result<usize> {
        if label.photons > self.n_max {
            return Err(Error::Truncation {
                photons: label.photons,
                n_max: self.n_max,
            });
        }
        let qubits = 2 * label.charger as usize + label.battery as usize;
        Ok(qubits * (self.n_max + 1) + label.photons)
    }

    pub fn label(&self, index: usize) -> Result<BasisLabel> {
        if index >= self.dim() {
            return Err(Error::IndexOutOfRange {
                index,
                dim: self.dim(),
            });
        }
        let photons = index % (self.n_max + 1);
        let qubits = index / (self.n_max + 1);
        Ok(BasisLabel::new(qubits & 2 != 0, qubits & 1 != 0, photons))
    }

    /// All labels in flat-index order.
    pub fn labels(&self) -> impl Iterator<Item = BasisLabel> + '_ {
        (0..self.dim()).map(move |i| self.label(i).expect("index within dim"))
    }

    /// Indices of every basis state carrying exactly `excitations` quanta.
    pub fn excitation_block(&self, excitations: usize) -> Vec<usize> {
        self.labels()
            .enumerate()
            .filter(|(_, l)| l.excitations() == excitations)
            .map(|(i, _)| i)
            .collect()
    }

    /// Unit vector on a basis label.
    pub fn basis_vector(&self, label: BasisLabel) -> Result<DVector<C64>> {
        let mut v = DVector::zeros(self.dim());
        v[self.index(label)?] = C64::new(1.0, 0.0);
        Ok(v)
    }

    fn from_map<F>(&self, hermitian: bool, action: F) -> Operator
    where
        F: Fn(BasisLabel) -> Option<(BasisLabel, f64)>,
    {
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for (col, label) in self.labels().enumerate() {
            if let Some((target, amp)) = action(label) {
                if target.photons <= self.n_max {
                    let row = self.index(target).expect("target inside truncation");
                    m[(row, col)] += C64::new(amp, 0.0);
                }
            }
        }
        Operator::new(m, hermitian)
    }

    pub fn identity(&self) -> Operator {
        Operator::new(DMatrix::identity(self.dim(), self.dim()), true)
    }

    pub fn zero(&self) -> Operator {
        Operator::new(DMatrix::zeros(self.dim(), self.dim()), true)
    }

    /// σ_z on one site: +1 on the excited state, −1 on the ground state.
    pub fn pauli_z(&self, site: Site) -> Operator {
        self.from_map(true, |l| {
            Some((l, if l.occupancy(site) { 1.0 } else { -1.0 }))
        })
    }

    /// σ₊ or σ₋ on one site.
    pub fn ladder(&self, site: Site, direction: Ladder) -> Operator {
        self.from_map(false, |l| match (direction, l.occupancy(site)) {
            (Ladder::Raise, false) => Some((l.with_occupancy(site, true), 1.0)),
            (Ladder::Lower, true) => Some((l.with_occupancy(site, false), 1.0)),
            _ => None,
        })
    }

    /// Photon annihilation operator `a`, truncated at `n_max`.
    pub fn annihilator(&self) -> Operator {
        self.from_map(false, |l| {
            (l.photons > 0).then(|| {
                (
                    BasisLabel {
                        photons: l.photons - 1,
                        ..l
                    },
                    (l.photons as f64).sqrt(),
                )
            })
        })
    }

    /// Photon creation operator `a†`; the matrix element into `n_max + 1` is dropped.
    pub fn creator(&self) -> Operator {
        self.from_map(false, |l| {
            Some((
                BasisLabel {
                    photons: l.photons + 1,
                    ..l
                },
                ((l.photons + 1) as f64).sqrt(),
            ))
        })
    }

    /// `a†a`.
    pub fn photon_number(&self) -> Operator {
        self.from_map(true, |l| Some((l, l.photons as f64)))
    }

    /// N = (σ_z^C + 1)/2 + (σ_z^B + 1)/2 + a†a, the charge conserved by the
    /// rotating-wave Hamiltonians.
    pub fn excitation_number(&self) -> Operator {
        self.from_map(true, |l| Some((l, l.excitations() as f64)))
    }
}

/// A dense complex operator on the full space.
///
/// The non-zero entries are cached at construction so that expectation
/// values and matrix-vector products run in time proportional to the
/// sparsity, while the dense matrix stays available for algebra.
#[derive(Debug, Clone)]
pub struct Operator {
    matrix: DMatrix<C64>,
    hermitian: bool,
    entries: Vec<(usize, usize, C64)>,
}

impl Operator {
    /// Wraps a matrix. `hermitian` is an assertion, checked in debug builds.
    pub fn new(matrix: DMatrix<C64>, hermitian: bool) -> Self {
        assert!(matrix.is_square(), "operator matrix must be square");
        let mut entries = Vec::new();
        for c in 0..matrix.ncols() {
            for r in 0..matrix.nrows() {
                let v = matrix[(r, c)];
                if v != C64::new(0.0, 0.0) {
                    entries.push((r, c, v));
                }
            }
        }
        let op = Self {
            matrix,
            hermitian,
            entries,
        };
        debug_assert!(
            !hermitian || op.hermiticity_error() < 1e-12,
            "operator flagged Hermitian is not"
        );
        op
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Non-zero entries as `(row, col, value)`.
    pub fn entries(&self) -> &[(usize, usize, C64)] {
        &self.entries
    }

    /// max |A − A†| over all entries.
    pub fn hermiticity_error(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    pub fn adjoint(&self) -> Operator {
        Operator::new(self.matrix.adjoint(), self.hermitian)
    }

    pub fn scale(&self, s: f64) -> Operator {
        Operator::new(&self.matrix * C64::new(s, 0.0), self.hermitian)
    }

    /// [A, B] = AB − BA.
    pub fn commutator(&self, other: &Operator) -> Operator {
        let m = &self.matrix * &other.matrix - &other.matrix * &self.matrix;
        Operator::new(m, false)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        max_abs(&self.matrix)
    }

    /// max |A − B| over all entries.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        max_abs(&(&self.matrix - &other.matrix))
    }

    pub fn element(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    /// Restriction to the rows and columns listed in `indices`.
    pub fn restrict(&self, indices: &[usize]) -> DMatrix<C64> {
        DMatrix::from_fn(indices.len(), indices.len(), |r, c| {
            self.matrix[(indices[r], indices[c])]
        })
    }

    pub fn apply(&self, psi: &DVector<C64>) -> DVector<C64> {
        let mut out = DVector::zeros(self.dim());
        for &(r, c, v) in &self.entries {
            out[r] += v * psi[c];
        }
        out
    }

    /// ⟨ψ|A|ψ⟩.
    pub fn expectation_complex(&self, psi: &DVector<C64>) -> C64 {
        self.entries
            .iter()
            .map(|&(r, c, v)| psi[r].conj() * v * psi[c])
            .sum()
    }

    /// Re ⟨ψ|A|ψ⟩, the expectation of a Hermitian observable.
    pub fn expectation(&self, psi: &DVector<C64>) -> f64 {
        self.expectation_complex(psi).re
    }
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl Add for &Operator {
    type Output = Operator;

    fn add(self, rhs: &Operator) -> Operator {
        Operator::new(&self.matrix + &rhs.matrix, self.hermitian && rhs.hermitian)
    }
}

impl Sub for &Operator {
    type Output = Operator;

    fn sub(self, rhs: &Operator) -> Operator {
        Operator::new(&self.matrix - &rhs.matrix, self.hermitian && rhs.hermitian)
    }
}

impl Mul for &Operator {
    type Output = Operator;

    fn mul(self, rhs: &Operator) -> Operator {
        Operator::new(&self.matrix * &rhs.matrix, false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space() -> HilbertSpace {
        HilbertSpace::new(2)
    }

    #[test]
    fn first_label_is_index_zero() {
        assert_eq!(space().index(BasisLabel::new(false, false, 0)).unwrap(), 0);
    }

    #[test]
    fn labels_enumerate_all_indices() {
        let s = space();
        let mut idx: Vec<usize> = s.labels().map(|l| s.index(l).unwrap()).collect();
        assert_eq!(idx.len(), 12);
        idx.dedup();
        assert_eq!(idx, (0..12).collect::<Vec<_>>());
        let l = BasisLabel::new(true, false, 2);
        assert_eq!(s.label(s.index(l).unwrap()).unwrap(), l);
    }

    #[test]
    fn photon_overflow_is_truncation_error() {
        let err = space().index(BasisLabel::new(false, false, 3)).unwrap_err();
        assert!(matches!(
            err,
            Error::Truncation {
                photons: 3,
                n_max: 2
            }
        ));
        assert!(space().label(12).is_err());
    }

    #[test]
    fn pauli_z_signs() {
        let s = HilbertSpace::new(4);
        let zc = s.pauli_z(Site::Charger);
        let i = s.index(BasisLabel::new(true, false, 0)).unwrap();
        assert_eq!(zc.element(i, i).re, 1.0);
        let j = s.index(BasisLabel::new(false, false, 3)).unwrap();
        assert_eq!(zc.element(j, j).re, -1.0);
        let zb = s.pauli_z(Site::Battery);
        assert!((&zc * &zb).max_abs_diff(&(&zb * &zc)) < 1e-14);
    }

    #[test]
    fn raising_the_battery() {
        let s = HilbertSpace::new(3);
        let up = s.ladder(Site::Battery, Ladder::Raise);
        let psi = s.basis_vector(BasisLabel::new(true, false, 2)).unwrap();
        let want = s.basis_vector(BasisLabel::new(true, true, 2)).unwrap();
        assert!((up.apply(&psi) - want).norm() < 1e-15);
        let full = s.basis_vector(BasisLabel::new(true, true, 2)).unwrap();
        assert_eq!(up.apply(&full).norm(), 0.0);
        let down = s.ladder(Site::Battery, Ladder::Lower);
        assert!(down.adjoint().max_abs_diff(&up) < 1e-14);
    }

    #[test]
    fn annihilator_action() {
        let s = HilbertSpace::new(5);
        let a = s.annihilator();
        let psi = s.basis_vector(BasisLabel::new(false, true, 4)).unwrap();
        let want = s.basis_vector(BasisLabel::new(false, true, 3)).unwrap() * C64::new(2.0, 0.0);
        assert!((a.apply(&psi) - want).norm() < 1e-14);
        let vac = s.basis_vector(BasisLabel::new(true, true, 0)).unwrap();
        assert_eq!(a.apply(&vac).norm(), 0.0);

        let n = &s.creator() * &a;
        for l in s.labels() {
            let i = s.index(l).unwrap();
            assert!((n.element(i, i).re - l.photons as f64).abs() < 1e-13);
        }
        assert!(n.max_abs_diff(&s.photon_number()) < 1e-13);
        assert!(s.creator().adjoint().max_abs_diff(&a) < 1e-15);
    }

    #[test]
    fn creator_drops_overflow() {
        let s = HilbertSpace::new(2);
        let top = s.basis_vector(BasisLabel::new(false, false, 2)).unwrap();
        assert_eq!(s.creator().apply(&top).norm(), 0.0);
    }

    #[test]
    fn excitation_number_counts() {
        let s = HilbertSpace::new(11);
        let n = s.excitation_number();
        let psi = s.basis_vector(BasisLabel::new(true, false, 10)).unwrap();
        assert!((n.expectation(&psi) - 11.0).abs() < 1e-14);

        let half = |site| (&s.pauli_z(site) + &s.identity()).scale(0.5);
        let built = &(&half(Site::Charger) + &half(Site::Battery)) + &s.photon_number();
        assert!(built.max_abs_diff(&n) < 1e-14);
    }

    #[test]
    fn excitation_block_n11() {
        let s = HilbertSpace::new(11);
        let block: Vec<BasisLabel> = s
            .excitation_block(11)
            .into_iter()
            .map(|i| s.label(i).unwrap())
            .collect();
        assert_eq!(block.len(), 4);
        for want in [
            BasisLabel::new(true, false, 10),
            BasisLabel::new(false, true, 10),
            BasisLabel::new(false, false, 11),
            BasisLabel::new(true, true, 9),
        ] {
            assert!(block.contains(&want));
        }
    }

    #[test]
    fn operators_only_connect_physical_neighbours() {
        let s = HilbertSpace::new(3);
        for (r, c, _) in s.annihilator().entries() {
            let (lr, lc) = (s.label(*r).unwrap(), s.label(*c).unwrap());
            assert_eq!(lr.photons + 1, lc.photons);
            assert_eq!((lr.charger, lr.battery), (lc.charger, lc.battery));
        }
        for (r, c, _) in s.ladder(Site::Charger, Ladder::Lower).entries() {
            let (lr, lc) = (s.label(*r).unwrap(), s.label(*c).unwrap());
            assert!(lc.charger && !lr.charger);
            assert_eq!((lr.battery, lr.photons), (lc.battery, lc.photons));
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn label_index_round_trip(n_max in 0usize..40, c: bool, b: bool, p in 0usize..40) {
                let s = HilbertSpace::new(n_max);
                let l = BasisLabel::new(c, b, p);
                match s.index(l) {
                    Ok(i) => {
                        prop_assert!(i < s.dim());
                        prop_assert_eq!(s.label(i).unwrap(), l);
                    }
                    Err(_) => prop_assert!(p > n_max),
                }
            }
        }
    }
}
