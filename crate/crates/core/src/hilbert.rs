//! Basis bookkeeping for `N_B` qubits coupled to one or two truncated bosonic
//! modes.
//!
//! Basis states are indexed in row-major mixed radix with the qubits as the
//! most significant digits, followed by the mode occupations:
//!
//! ```text
//! index = (((q_0 * 2 + q_1) * 2 + ...) * (c_0 + 1) + n_0) * (c_1 + 1) + n_1
//! ```
//!
//! so `index = battery_index * charger_dim + charger_index`. A qubit digit of
//! `1` means the excited level.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-10;
const NEGATIVE_EIGENVALUE_TOL: f64 = 1e-10;

/// Qubit count and per-mode Fock cutoffs of the composite space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpaceLayout {
    n_qubits: usize,
    mode_cutoffs: Vec<usize>,
    total_dim: usize,
}

/// One computational basis state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BasisState {
    /// `true` marks an excited qubit.
    pub qubit_bits: Vec<bool>,
    pub occupations: Vec<usize>,
}

impl BasisState {
    pub fn new(qubit_bits: Vec<bool>, occupations: Vec<usize>) -> Self {
        Self {
            qubit_bits,
            occupations,
        }
    }

    pub fn total_excitation(&self) -> usize {
        self.qubit_bits.iter().filter(|&&b| b).count() + self.occupations.iter().sum::<usize>()
    }
}

/// Which factor of the battery/charger bipartition to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Battery,
    Charger,
}

/// One excitation-number sector: all basis indices with the same total
/// excitation, sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sector {
    pub excitation: usize,
    pub indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorDecomposition {
    pub sectors: Vec<Sector>,
}

impl SectorDecomposition {
    pub fn sizes(&self) -> Vec<usize> {
        self.sectors.iter().map(|s| s.indices.len()).collect()
    }

    pub fn total_len(&self) -> usize {
        self.sectors.iter().map(|s| s.indices.len()).sum()
    }

    /// For every basis index, `(sector position, offset inside the sector)`.
    pub fn locator(&self, total_dim: usize) -> Vec<(usize, usize)> {
        let mut loc = vec![(usize::MAX, usize::MAX); total_dim];
        for (s, sector) in self.sectors.iter().enumerate() {
            for (k, &i) in sector.indices.iter().enumerate() {
                loc[i] = (s, k);
            }
        }
        loc
    }
}

impl SpaceLayout {
    /// Fails unless `n_qubits >= 1` and there are one or two modes. Cutoff 0
    /// (a mode frozen in vacuum) is allowed.
    pub fn new(n_qubits: usize, mode_cutoffs: &[usize]) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidLayout(
                "at least one qubit is required".into(),
            ));
        }
        if !(1..=2).contains(&mode_cutoffs.len()) {
            return Err(Error::InvalidLayout(format!(
                "one or two charger modes are supported, got {}",
                mode_cutoffs.len()
            )));
        }
        let too_big = || Error::ResourceGuard("Hilbert-space dimension overflows usize".into());
        let battery = 1usize
            .checked_shl(n_qubits as u32)
            .filter(|_| n_qubits < usize::BITS as usize);
        let mut total = battery.ok_or_else(too_big)?;
        for &c in mode_cutoffs {
            total = total
                .checked_mul(c.checked_add(1).ok_or_else(too_big)?)
                .ok_or_else(too_big)?;
        }
        Ok(Self {
            n_qubits,
            mode_cutoffs: mode_cutoffs.to_vec(),
            total_dim: total,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_modes(&self) -> usize {
        self.mode_cutoffs.len()
    }

    pub fn mode_cutoffs(&self) -> &[usize] {
        &self.mode_cutoffs
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn battery_dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn charger_dim(&self) -> usize {
        self.mode_cutoffs.iter().map(|c| c + 1).product()
    }

    /// Highest reachable total excitation.
    pub fn max_excitation(&self) -> usize {
        self.n_qubits + self.mode_cutoffs.iter().sum::<usize>()
    }

    pub fn basis_index(&self, state: &BasisState) -> Result<usize> {
        if state.qubit_bits.len() != self.n_qubits {
            return Err(Error::OutOfBounds(format!(
                "{} qubit digits for a {}-qubit layout",
                state.qubit_bits.len(),
                self.n_qubits
            )));
        }
        if state.occupations.len() != self.mode_cutoffs.len() {
            return Err(Error::OutOfBounds(format!(
                "{} occupations for a {}-mode layout",
                state.occupations.len(),
                self.mode_cutoffs.len()
            )));
        }
        let mut index = 0usize;
        for &bit in &state.qubit_bits {
            index = index * 2 + usize::from(bit);
        }
        for (j, (&n, &c)) in state.occupations.iter().zip(&self.mode_cutoffs).enumerate() {
            if n > c {
                return Err(Error::OutOfBounds(format!(
                    "mode {j} occupation {n} exceeds cutoff {c}"
                )));
            }
            index = index * (c + 1) + n;
        }
        Ok(index)
    }

    pub fn basis_state(&self, index: usize) -> Result<BasisState> {
        if index >= self.total_dim {
            return Err(Error::OutOfBounds(format!(
                "index {index} outside [0, {})",
                self.total_dim
            )));
        }
        let mut rest = index;
        let mut occupations = vec![0; self.mode_cutoffs.len()];
        for (j, &c) in self.mode_cutoffs.iter().enumerate().rev() {
            occupations[j] = rest % (c + 1);
            rest /= c + 1;
        }
        let qubit_bits = (0..self.n_qubits)
            .map(|q| (rest >> (self.n_qubits - 1 - q)) & 1 == 1)
            .collect();
        Ok(BasisState {
            qubit_bits,
            occupations,
        })
    }

    /// Total excitation of every basis index, in index order.
    pub fn excitations(&self) -> Vec<usize> {
        let charger: Vec<usize> = (0..self.charger_dim())
            .map(|mut c| {
                let mut sum = 0;
                for &cut in self.mode_cutoffs.iter().rev() {
                    sum += c % (cut + 1);
                    c /= cut + 1;
                }
                sum
            })
            .collect();
        let mut out = Vec::with_capacity(self.total_dim);
        for b in 0..self.battery_dim() {
            let k = b.count_ones() as usize;
            out.extend(charger.iter().map(|&n| n + k));
        }
        out
    }

    pub fn build_sectors(&self) -> SectorDecomposition {
        let mut sectors: Vec<Sector> = (0..=self.max_excitation())
            .map(|excitation| Sector {
                excitation,
                indices: Vec::new(),
            })
            .collect();
        for (i, n) in self.excitations().into_iter().enumerate() {
            sectors[n].indices.push(i);
        }
        sectors.retain(|s| !s.indices.is_empty());
        SectorDecomposition { sectors }
    }
}

/// A Hermitian, positive-semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates Hermiticity (1e-12), unit trace (1e-10) and positivity
    /// (eigenvalues >= -1e-10).
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidDensityMatrix(format!(
                "{}x{} matrix is not square",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let rho = Self { matrix };
        rho.validate()?;
        Ok(rho)
    }

    /// Skips validation; callers construct Hermitian unit-trace matrices by
    /// construction (partial traces of normalized states).
    pub(crate) fn from_trusted(matrix: DMatrix<Complex64>) -> Self {
        Self { matrix }
    }

    pub fn pure(amplitudes: &[Complex64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(amplitudes);
        Self::new(&v * v.adjoint())
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0 / dim as f64, 0.0);
        }
        Self { matrix: m }
    }

    pub fn from_diagonal(populations: &[f64]) -> Result<Self> {
        let n = populations.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, &p) in populations.iter().enumerate() {
            m[(i, i)] = Complex64::new(p, 0.0);
        }
        Self::new(m)
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.matrix;
        let n = m.nrows();
        for i in 0..n {
            for j in i..n {
                let d = (m[(i, j)] - m[(j, i)].conj()).norm();
                if d > HERMITIAN_TOL {
                    return Err(Error::InvalidDensityMatrix(format!(
                        "not Hermitian at ({i}, {j}): deviation {d:.3e}"
                    )));
                }
            }
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr} != 1")));
        }
        let min = self
            .eigenvalues_unsorted()
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min < -NEGATIVE_EIGENVALUE_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let m = &self.matrix;
        (0..m.nrows()).all(|i| (i..m.ncols()).all(|j| (m[(i, j)] - m[(j, i)].conj()).norm() <= tol))
    }

    pub(crate) fn eigenvalues_unsorted(&self) -> Vec<f64> {
        nalgebra::SymmetricEigen::new(self.matrix.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect()
    }
}

/// Borrowed global state of the battery+charger system.
#[derive(Debug, Clone, Copy)]
pub enum GlobalState<'a> {
    Pure(&'a [Complex64]),
    Mixed(&'a DMatrix<Complex64>),
}

/// Reduced state of one block of the battery/charger bipartition.
pub fn partial_trace(
    state: GlobalState<'_>,
    layout: &SpaceLayout,
    keep: Block,
) -> Result<DensityMatrix> {
    let (db, dc) = (layout.battery_dim(), layout.charger_dim());
    match state {
        GlobalState::Pure(psi) => {
            if psi.len() != layout.total_dim() {
                return Err(Error::DimensionMismatch {
                    expected: layout.total_dim(),
                    found: psi.len(),
                });
            }
            Ok(match keep {
                Block::Battery => reduce_pure_to_rows(psi, db, dc),
                Block::Charger => reduce_pure_to_cols(psi, db, dc),
            })
        }
        GlobalState::Mixed(rho) => {
            if rho.nrows() != layout.total_dim() || rho.ncols() != layout.total_dim() {
                return Err(Error::DimensionMismatch {
                    expected: layout.total_dim(),
                    found: rho.nrows(),
                });
            }
            let (keep_dim, other) = match keep {
                Block::Battery => (db, dc),
                Block::Charger => (dc, db),
            };
            let index = |k: usize, o: usize| match keep {
                Block::Battery => k * dc + o,
                Block::Charger => o * dc + k,
            };
            let mut out = DMatrix::zeros(keep_dim, keep_dim);
            for i in 0..keep_dim {
                for j in i..keep_dim {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for o in 0..other {
                        acc += rho[(index(i, o), index(j, o))];
                    }
                    out[(i, j)] = acc;
                    out[(j, i)] = acc.conj();
                }
                out[(i, i)].im = 0.0;
            }
            Ok(DensityMatrix::from_trusted(out))
        }
    }
}

/// `psi` viewed as a `rows x cols` row-major matrix `M`; returns `M M^†`.
pub(crate) fn reduce_pure_to_rows(psi: &[Complex64], rows: usize, cols: usize) -> DensityMatrix {
    let mut out = DMatrix::zeros(rows, rows);
    for i in 0..rows {
        let ri = &psi[i * cols..(i + 1) * cols];
        for j in i..rows {
            let rj = &psi[j * cols..(j + 1) * cols];
            let acc: Complex64 = ri.iter().zip(rj).map(|(a, b)| a * b.conj()).sum();
            out[(i, j)] = acc;
            out[(j, i)] = acc.conj();
        }
        out[(i, i)].im = 0.0;
    }
    DensityMatrix::from_trusted(out)
}

/// `psi` viewed as a `rows x cols` row-major matrix `M`; returns `(M^† M)^T`.
fn reduce_pure_to_cols(psi: &[Complex64], rows: usize, cols: usize) -> DensityMatrix {
    let mut out = DMatrix::<Complex64>::zeros(cols, cols);
    for r in 0..rows {
        let row = &psi[r * cols..(r + 1) * cols];
        for c in 0..cols {
            let a = row[c];
            if a.norm_sqr() == 0.0 {
                continue;
            }
            for d in c..cols {
                out[(c, d)] += a * row[d].conj();
            }
        }
    }
    for c in 0..cols {
        out[(c, c)].im = 0.0;
        for d in c + 1..cols {
            out[(d, c)] = out[(c, d)].conj();
        }
    }
    DensityMatrix::from_trusted(out)
}

/// Reduced state of the qubits listed in `keep` (ascending, qubit 0 is the
/// most significant digit) of an `n_qubits` register.
pub fn partial_trace_qubits(
    rho: &DensityMatrix,
    n_qubits: usize,
    keep: &[usize],
) -> Result<DensityMatrix> {
    let dim = 1usize << n_qubits;
    if rho.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: rho.dim(),
        });
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&q| q >= n_qubits) {
        return Err(Error::InvalidArgument(format!(
            "qubit selection {keep:?} must be strictly ascending and below {n_qubits}"
        )));
    }
    let traced: Vec<usize> = (0..n_qubits).filter(|q| !keep.contains(q)).collect();
    let bit = |q: usize| 1usize << (n_qubits - 1 - q);
    let spread = |sub: usize, qubits: &[usize]| -> usize {
        qubits
            .iter()
            .enumerate()
            .filter(|(k, _)| (sub >> (qubits.len() - 1 - k)) & 1 == 1)
            .map(|(_, &q)| bit(q))
            .sum()
    };
    let kd = 1usize << keep.len();
    let td = 1usize << traced.len();
    let m = rho.matrix();
    let mut out = DMatrix::zeros(kd, kd);
    for i in 0..kd {
        let bi = spread(i, keep);
        for j in 0..kd {
            let bj = spread(j, keep);
            let mut acc = Complex64::new(0.0, 0.0);
            for t in 0..td {
                let bt = spread(t, &traced);
                acc += m[(bi | bt, bj | bt)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(DensityMatrix::from_trusted(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn index_of_vacuum_ground_is_zero() {
        let l = SpaceLayout::new(1, &[2]).unwrap();
        assert_eq!(
            l.basis_index(&BasisState::new(vec![false], vec![0]))
                .unwrap(),
            0
        );
    }

    #[test]
    fn index_matches_enumeration_order() {
        // 2 x 3 space enumerated with the qubit as the slow digit.
        let l = SpaceLayout::new(1, &[2]).unwrap();
        let mut expected = 0;
        for q in [false, true] {
            for n in 0..=2 {
                let s = BasisState::new(vec![q], vec![n]);
                assert_eq!(l.basis_index(&s).unwrap(), expected);
                expected += 1;
            }
        }
        assert_eq!(
            l.basis_index(&BasisState::new(vec![true], vec![2]))
                .unwrap(),
            5
        );
    }

    #[test]
    fn out_of_range_components_are_rejected() {
        let l = SpaceLayout::new(1, &[2]).unwrap();
        assert!(matches!(
            l.basis_index(&BasisState::new(vec![false], vec![3])),
            Err(Error::OutOfBounds(_))
        ));
        assert!(matches!(l.basis_state(6), Err(Error::OutOfBounds(_))));
        assert!(l
            .basis_index(&BasisState::new(vec![false, true], vec![0]))
            .is_err());
    }

    #[test]
    fn layouts_are_validated() {
        assert!(SpaceLayout::new(0, &[3]).is_err());
        assert!(SpaceLayout::new(2, &[]).is_err());
        assert!(SpaceLayout::new(2, &[1, 1, 1]).is_err());
        assert!(matches!(
            SpaceLayout::new(70, &[1]),
            Err(Error::ResourceGuard(_))
        ));
        let l = SpaceLayout::new(4, &[3, 2]).unwrap();
        assert_eq!(l.total_dim(), 16 * 4 * 3);
    }

    #[test]
    fn sector_sizes_single_qubit_cutoff_two() {
        let l = SpaceLayout::new(1, &[2]).unwrap();
        assert_eq!(l.build_sectors().sizes(), vec![1, 2, 2, 1]);
    }

    #[test]
    fn sector_sizes_qubits_with_frozen_mode() {
        let l = SpaceLayout::new(2, &[0]).unwrap();
        let sectors = l.build_sectors();
        assert_eq!(sectors.sizes(), vec![1, 2, 1]);
        assert_eq!(sectors.sectors[1].indices, vec![1, 2]);
    }

    #[test]
    fn sectors_partition_the_space() {
        let l = SpaceLayout::new(3, &[2, 3]).unwrap();
        let sectors = l.build_sectors();
        assert_eq!(sectors.total_len(), l.total_dim());
        let mut seen = vec![false; l.total_dim()];
        for s in &sectors.sectors {
            for &i in &s.indices {
                assert!(!seen[i]);
                seen[i] = true;
                assert_eq!(l.basis_state(i).unwrap().total_excitation(), s.excitation);
            }
        }
        assert!(seen.into_iter().all(|x| x));
    }

    #[test]
    fn product_state_reduces_to_pure_ground() {
        let l = SpaceLayout::new(1, &[1]).unwrap();
        let psi = vec![c(1.0), c(0.0), c(0.0), c(0.0)];
        let rho = partial_trace(GlobalState::Pure(&psi), &l, Block::Battery).unwrap();
        assert_eq!(rho.matrix()[(0, 0)], c(1.0));
        assert_eq!(rho.matrix()[(1, 1)], c(0.0));
    }

    #[test]
    fn bell_pair_reduces_to_maximally_mixed() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = DensityMatrix::pure(&[c(s), c(0.0), c(0.0), c(s)]).unwrap();
        let first = partial_trace_qubits(&bell, 2, &[0]).unwrap();
        let expected = DensityMatrix::maximally_mixed(2);
        assert!((first.matrix() - expected.matrix()).norm() < 1e-15);
    }

    #[test]
    fn pure_and_mixed_partial_traces_agree() {
        let l = SpaceLayout::new(2, &[1]).unwrap();
        let raw: Vec<Complex64> = (0..l.total_dim())
            .map(|k| Complex64::new((k as f64 * 0.7).sin(), (k as f64 * 1.3).cos()))
            .collect();
        let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let psi: Vec<Complex64> = raw.iter().map(|z| z / norm).collect();
        let full = DensityMatrix::pure(&psi).unwrap();
        for keep in [Block::Battery, Block::Charger] {
            let a = partial_trace(GlobalState::Pure(&psi), &l, keep).unwrap();
            let b = partial_trace(GlobalState::Mixed(full.matrix()), &l, keep).unwrap();
            assert!((a.matrix() - b.matrix()).norm() < 1e-14);
            a.validate().unwrap();
        }
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::from_diagonal(&[0.3, 0.7]).is_ok());
        assert!(DensityMatrix::from_diagonal(&[0.3, 0.6]).is_err());
        assert!(DensityMatrix::from_diagonal(&[1.2, -0.2]).is_err());
        let mut m = DMatrix::from_element(2, 2, c(0.5));
        m[(0, 1)] = Complex64::new(0.5, 0.1);
        assert!(DensityMatrix::new(m).is_err());
    }

    #[test]
    fn partial_trace_dimension_mismatch() {
        let l = SpaceLayout::new(1, &[1]).unwrap();
        let psi = vec![c(1.0); 3];
        assert!(matches!(
            partial_trace(GlobalState::Pure(&psi), &l, Block::Battery),
            Err(Error::DimensionMismatch {
                expected: 4,
                found: 3
            })
        ));
    }
}
