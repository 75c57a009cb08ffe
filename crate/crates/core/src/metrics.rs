//! Figures of merit of a battery state: stored energy, ergotropy, power,
//! purity, entropy, mutual information, extractable ratio and quantum
//! consonance.
//!
//! Primitives here are unnormalized; per-cell scaling happens in
//! [`crate::experiments`].

use nalgebra::{DMatrix, Matrix2, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::hamiltonian::{build_battery_hamiltonian, SparseHermitian};
use crate::hilbert::{partial_trace_qubits, reduce_pure_to_rows, DensityMatrix, SpaceLayout};
use crate::states::PureState;

/// Eigenvalues at or below this are dropped from entropy sums.
pub const ENTROPY_FLOOR: f64 = 1e-14;

/// Small negative values produced by roundoff are clamped to zero up to this.
pub const NEGATIVE_CLAMP: f64 = 1e-10;

/// `Γ` is undefined when `ΔE ≤ RATIO_FLOOR_SCALE · N_B ω₀`.
pub const RATIO_FLOOR_SCALE: f64 = 1e-9;

/// Off-diagonal magnitude below which a single-qubit state is treated as
/// already diagonal.
const LOCAL_COHERENCE_TOL: f64 = 1e-13;

/// Tolerance for the record invariants in [`MetricsRecord::check`].
const RECORD_TOL: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Eigen-decomposition of a density matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<Complex64>,
}

impl Spectrum {
    pub fn of(rho: &DensityMatrix) -> Self {
        let eig = SymmetricEigen::new(rho.matrix().clone());
        let mut order: Vec<usize> = (0..rho.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let eigenvectors =
            DMatrix::from_fn(rho.dim(), rho.dim(), |i, j| eig.eigenvectors[(i, order[j])]);
        Self {
            eigenvalues,
            eigenvectors,
        }
    }

    /// `‖V diag(λ) V† − ρ‖_F`.
    pub fn residual(&self, rho: &DensityMatrix) -> f64 {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues.iter().map(|&l| Complex64::new(l, 0.0)),
        ));
        (&self.eigenvectors * d * self.eigenvectors.adjoint() - rho.matrix()).norm()
    }
}

/// Battery energy levels in ascending order. Degenerate levels keep their
/// basis-index order.
#[derive(Debug, Clone)]
pub struct EnergyLevels {
    pub energies: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

impl EnergyLevels {
    pub fn of(h: &SparseHermitian) -> Self {
        let n = h.dim();
        if h.is_diagonal() {
            let diag = h.diagonal();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]));
            let energies = order.iter().map(|&k| diag[k]).collect();
            let vectors = DMatrix::from_fn(n, n, |i, j| if order[j] == i { ONE } else { ZERO });
            return Self { energies, vectors };
        }
        let eig = SymmetricEigen::new(h.to_dense());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        Self {
            energies: order.iter().map(|&k| eig.eigenvalues[k]).collect(),
            vectors: DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]),
        }
    }

    pub fn ground(&self) -> f64 {
        self.energies[0]
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }
}

/// Populations of the passive state on the ascending energy levels.
#[derive(Debug, Clone, PartialEq)]
pub struct PassiveState {
    pub energies: Vec<f64>,
    pub populations: Vec<f64>,
}

impl PassiveState {
    pub fn energy(&self) -> f64 {
        self.energies
            .iter()
            .zip(&self.populations)
            .map(|(e, p)| e * p)
            .sum()
    }

    pub fn to_density_matrix(&self, levels: &EnergyLevels) -> DensityMatrix {
        let n = levels.dim();
        let mut m = DMatrix::zeros(n, n);
        for (k, &p) in self.populations.iter().enumerate() {
            let v = levels.vectors.column(k);
            m += v * v.adjoint() * Complex64::new(p, 0.0);
        }
        DensityMatrix::from_trusted(m)
    }
}

fn check_dims(rho: &DensityMatrix, h: &SparseHermitian) -> Result<()> {
    if rho.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: rho.dim(),
        });
    }
    Ok(())
}

/// `Tr(ρH)` read off the sparse upper triangle.
fn trace_product(rho: &DensityMatrix, h: &SparseHermitian) -> f64 {
    trace_product_shifted(rho, h, 0.0)
}

/// `Tr(ρ(H − shift))`, shifting before summing so that a ground state gives
/// exactly zero.
fn trace_product_shifted(rho: &DensityMatrix, h: &SparseHermitian, shift: f64) -> f64 {
    let m = rho.matrix();
    h.entries()
        .iter()
        .map(|&(r, c, v)| {
            if r == c {
                m[(r, r)].re * (v.re - shift)
            } else {
                2.0 * (m[(c, r)] * v).re
            }
        })
        .sum()
}

fn clamp_small_negative(x: f64) -> f64 {
    if (-NEGATIVE_CLAMP..0.0).contains(&x) {
        0.0
    } else {
        x
    }
}

/// `Tr(ρ H_B) − E_ground`.
pub fn stored_energy(rho: &DensityMatrix, h: &SparseHermitian) -> Result<f64> {
    check_dims(rho, h)?;
    if !rho.is_hermitian(1e-12) {
        return Err(Error::InvalidDensityMatrix("not Hermitian".into()));
    }
    Ok(trace_product_shifted(rho, h, EnergyLevels::of(h).ground()))
}

/// `Σ_{ij} p_i ε_j (|⟨p_i|ε_j⟩|² − δ_ij)` with `p` descending and `ε`
/// ascending.
pub fn ergotropy(rho: &DensityMatrix, h: &SparseHermitian) -> Result<f64> {
    check_dims(rho, h)?;
    Ok(ergotropy_with(&Spectrum::of(rho), &EnergyLevels::of(h)))
}

pub fn ergotropy_with(spectrum: &Spectrum, levels: &EnergyLevels) -> f64 {
    let overlaps = levels.vectors.adjoint() * &spectrum.eigenvectors;
    let mut acc = 0.0;
    for (i, &p) in spectrum.eigenvalues.iter().enumerate() {
        let mut row = -levels.energies[i];
        for (j, &e) in levels.energies.iter().enumerate() {
            row += e * overlaps[(j, i)].norm_sqr();
        }
        acc += p * row;
    }
    clamp_small_negative(acc)
}

/// Descending eigenvalues of `ρ` placed on ascending energies.
pub fn passive_state(rho: &DensityMatrix, h: &SparseHermitian) -> Result<PassiveState> {
    check_dims(rho, h)?;
    Ok(passive_state_with(&Spectrum::of(rho), &EnergyLevels::of(h)))
}

pub fn passive_state_with(spectrum: &Spectrum, levels: &EnergyLevels) -> PassiveState {
    PassiveState {
        energies: levels.energies.clone(),
        populations: spectrum.eigenvalues.iter().map(|&p| p.max(0.0)).collect(),
    }
}

/// `E(ρ) − E(η)`, independent of the eigenvector overlaps.
pub fn ergotropy_via_passive(rho: &DensityMatrix, h: &SparseHermitian) -> Result<f64> {
    let eta = passive_state(rho, h)?;
    Ok(clamp_small_negative(trace_product(rho, h) - eta.energy()))
}

/// `ΔE / t`, zero at `t = 0`.
pub fn charging_power(delta_e: f64, t: f64) -> Result<f64> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::NegativeTime(t));
    }
    Ok(if t == 0.0 { 0.0 } else { delta_e / t })
}

/// `Tr(ρ²)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.matrix().iter().map(|z| z.norm_sqr()).sum()
}

/// `−Σ λ log₂ λ` over eigenvalues above [`ENTROPY_FLOOR`]. Totals below the
/// floor are reported as 0.
pub fn entropy_from_eigenvalues(eigenvalues: &[f64]) -> f64 {
    let s: f64 = eigenvalues
        .iter()
        .map(|&l| clamp_small_negative(l))
        .filter(|&l| l > ENTROPY_FLOOR)
        .map(|l| -l * l.log2())
        .sum();
    if s < ENTROPY_FLOOR {
        0.0
    } else {
        s
    }
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_from_eigenvalues(&rho.eigenvalues_unsorted())
}

/// `S_B + S_C − S_BC`.
pub fn mutual_information(s_b: f64, s_c: f64, s_bc: f64) -> Result<f64> {
    for (name, s) in [("S_B", s_b), ("S_C", s_c), ("S_BC", s_bc)] {
        if !(s >= -NEGATIVE_CLAMP) {
            return Err(Error::InvalidArgument(format!("{name} = {s} is negative")));
        }
    }
    Ok(s_b + s_c - s_bc)
}

/// `ℰ / ΔE`, or `None` when `ΔE` is below `1e-9 · N_B ω₀`.
pub fn extractable_ratio(
    ergotropy: f64,
    delta_e: f64,
    n_qubits: usize,
    omega0: f64,
) -> Option<f64> {
    (delta_e > RATIO_FLOOR_SCALE * n_qubits as f64 * omega0).then(|| ergotropy / delta_e)
}

fn n_qubits_of(rho: &DensityMatrix) -> Result<usize> {
    let d = rho.dim();
    if d < 2 || !d.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "dimension {d} is not a qubit register"
        )));
    }
    Ok(d.trailing_zeros() as usize)
}

/// Normalized eigenvector of a 2×2 Hermitian matrix for eigenvalue `l`.
fn eigvec2(m: &Matrix2<Complex64>, l: f64) -> [Complex64; 2] {
    let a = [m[(0, 1)], Complex64::new(l, 0.0) - m[(0, 0)]];
    let b = [Complex64::new(l, 0.0) - m[(1, 1)], m[(1, 0)]];
    let na = a[0].norm_sqr() + a[1].norm_sqr();
    let nb = b[0].norm_sqr() + b[1].norm_sqr();
    let (v, n) = if na >= nb {
        (a, na.sqrt())
    } else {
        (b, nb.sqrt())
    };
    [v[0] / n, v[1] / n]
}

/// Rotates `v` so its largest-magnitude component is real positive.
fn fix_phase(v: [Complex64; 2]) -> [Complex64; 2] {
    let lead = if v[1].norm() > v[0].norm() {
        v[1]
    } else {
        v[0]
    };
    let rot = lead.conj() / lead.norm();
    [v[0] * rot, v[1] * rot]
}

/// Unitary `U` with `U ρ₁ U†` diagonal for a single-qubit state.
///
/// Diagonal or degenerate states give the identity. Otherwise the rows of
/// `U` are the eigenvectors, the one closest to `|0⟩` first, each with its
/// largest component real positive.
pub fn decohering_unitary(rho1: &Matrix2<Complex64>) -> Matrix2<Complex64> {
    let b = rho1[(0, 1)];
    if b.norm() <= LOCAL_COHERENCE_TOL {
        return Matrix2::identity();
    }
    let a = rho1[(0, 0)].re;
    let d = rho1[(1, 1)].re;
    let r = (((a - d) / 2.0).powi(2) + b.norm_sqr()).sqrt();
    let mid = (a + d) / 2.0;
    let mut v = [
        fix_phase(eigvec2(rho1, mid + r)),
        fix_phase(eigvec2(rho1, mid - r)),
    ];
    if v[1][0].norm() > v[0][0].norm() {
        v.swap(0, 1);
    }
    Matrix2::new(
        v[0][0].conj(),
        v[0][1].conj(),
        v[1][0].conj(),
        v[1][1].conj(),
    )
}

fn single_qubit_states(rho: &DensityMatrix, n: usize) -> Result<Vec<Matrix2<Complex64>>> {
    (0..n)
        .map(|m| {
            let r = partial_trace_qubits(rho, n, &[m])?;
            let r = r.matrix();
            Ok(Matrix2::new(r[(0, 0)], r[(0, 1)], r[(1, 0)], r[(1, 1)]))
        })
        .collect()
}

/// One unitary per qubit removing the coherence of its reduced state.
pub fn local_decohering_unitaries(rho: &DensityMatrix) -> Result<Vec<Matrix2<Complex64>>> {
    let n = n_qubits_of(rho)?;
    Ok(single_qubit_states(rho, n)?
        .iter()
        .map(decohering_unitary)
        .collect())
}

fn kron_all(us: &[Matrix2<Complex64>]) -> DMatrix<Complex64> {
    let mut out = DMatrix::from_element(1, 1, ONE);
    for u in us {
        let u = DMatrix::from_fn(2, 2, |i, j| u[(i, j)]);
        out = out.kronecker(&u);
    }
    out
}

/// `Σ |ρ^c_{k,l}|` over index pairs differing in every qubit, with
/// `ρ^c = (⊗U_m) ρ (⊗U_m)†`.
pub fn consonance_with_unitaries(
    rho: &DensityMatrix,
    unitaries: &[Matrix2<Complex64>],
) -> Result<f64> {
    let n = n_qubits_of(rho)?;
    if unitaries.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: unitaries.len(),
        });
    }
    if n == 1 {
        return Ok(0.0);
    }
    let u = kron_all(unitaries);
    let rc = &u * rho.matrix() * u.adjoint();
    let mask = rho.dim() - 1;
    Ok((0..rho.dim()).map(|k| rc[(k, k ^ mask)].norm()).sum())
}

/// Quantum consonance; zero for a single qubit.
pub fn quantum_consonance(rho: &DensityMatrix) -> Result<f64> {
    let us = local_decohering_unitaries(rho)?;
    consonance_with_unitaries(rho, &us)
}

/// Spread of the consonance over the freedom left by degenerate
/// single-qubit states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsonanceSensitivity {
    pub convention: f64,
    pub min: f64,
    pub max: f64,
    pub degenerate_qubits: usize,
}

fn random_unitary(rng: &mut ChaCha8Rng) -> Matrix2<Complex64> {
    let mut x = [0.0f64; 4];
    for v in &mut x {
        *v = StandardNormal.sample(rng);
    }
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let a = Complex64::new(x[0], x[1]) / n;
    let b = Complex64::new(x[2], x[3]) / n;
    Matrix2::new(a, -b.conj(), b, a.conj())
}

/// Resamples the unitary of every maximally mixed qubit `samples` times.
pub fn consonance_sensitivity(
    rho: &DensityMatrix,
    samples: usize,
    seed: u64,
) -> Result<ConsonanceSensitivity> {
    let n = n_qubits_of(rho)?;
    let locals = single_qubit_states(rho, n)?;
    let base: Vec<Matrix2<Complex64>> = locals.iter().map(decohering_unitary).collect();
    let convention = consonance_with_unitaries(rho, &base)?;
    let degenerate: Vec<usize> = locals
        .iter()
        .enumerate()
        .filter(|(_, r)| {
            r[(0, 1)].norm() <= LOCAL_COHERENCE_TOL
                && (r[(0, 0)].re - r[(1, 1)].re).abs() <= LOCAL_COHERENCE_TOL
        })
        .map(|(m, _)| m)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut lo, mut hi) = (convention, convention);
    if !degenerate.is_empty() {
        for _ in 0..samples {
            let mut us = base.clone();
            for &m in &degenerate {
                us[m] = random_unitary(&mut rng);
            }
            let c = consonance_with_unitaries(rho, &us)?;
            lo = lo.min(c);
            hi = hi.max(c);
        }
    }
    Ok(ConsonanceSensitivity {
        convention,
        min: lo,
        max: hi,
        degenerate_qubits: degenerate.len(),
    })
}

/// All figures of merit at one time point. `gamma` is `None` where the
/// stored energy is too small for the ratio to be meaningful.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRecord {
    pub t: f64,
    pub energy: f64,
    pub ergotropy: f64,
    pub power: f64,
    pub gamma: Option<f64>,
    pub purity: f64,
    pub entropy: f64,
    pub mutual_info: f64,
    pub consonance: f64,
    pub charger_entropy: f64,
}

impl MetricsRecord {
    /// Checks the record invariants for an unnormalized record of an
    /// `n_qubits` battery in a globally pure state. Columns outside `set`
    /// are not inspected.
    pub fn check(&self, n_qubits: usize, set: MetricSet) -> Result<()> {
        let fail = |what: String| Err(Error::Invariant { t: self.t, what });
        let scale = self.energy.abs().max(1.0);
        let values = [
            self.energy,
            self.ergotropy,
            self.power,
            self.purity,
            self.entropy,
            self.mutual_info,
            self.consonance,
            self.charger_entropy,
        ];
        if values.iter().any(|v| !v.is_finite()) {
            return fail("non-finite metric".into());
        }
        if self.ergotropy < -RECORD_TOL * scale || self.ergotropy > self.energy + RECORD_TOL * scale
        {
            return fail(format!(
                "ergotropy {} outside [0, ΔE = {}]",
                self.ergotropy, self.energy
            ));
        }
        if let Some(g) = self.gamma {
            if !(-RECORD_TOL..=1.0 + RECORD_TOL).contains(&g) {
                return fail(format!("extractable ratio {g} outside [0, 1]"));
            }
        }
        if set == MetricSet::Thermodynamic {
            return Ok(());
        }
        let floor = 0.5f64.powi(n_qubits as i32);
        if self.purity < floor - RECORD_TOL || self.purity > 1.0 + RECORD_TOL {
            return fail(format!("purity {} outside [{floor}, 1]", self.purity));
        }
        if self.entropy < 0.0 || self.charger_entropy < 0.0 {
            return fail("negative entropy".into());
        }
        if (self.mutual_info - 2.0 * self.entropy).abs() > 1e-10 {
            return fail(format!(
                "mutual information {} differs from 2S = {}",
                self.mutual_info,
                2.0 * self.entropy
            ));
        }
        Ok(())
    }
}

/// Which figures of merit to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricSet {
    /// Everything in [`MetricsRecord`].
    Full,
    /// Energy, ergotropy, power and `Γ` only; the rest is left at zero.
    Thermodynamic,
}

/// Evaluates [`MetricsRecord`]s for global pure states of one layout.
#[derive(Debug, Clone)]
pub struct BatteryAnalyzer {
    layout: SpaceLayout,
    omega0: f64,
    h_b: SparseHermitian,
    levels: EnergyLevels,
}

impl BatteryAnalyzer {
    pub fn new(layout: &SpaceLayout, omega0: f64) -> Result<Self> {
        let h_b = build_battery_hamiltonian(layout.n_qubits(), omega0)?;
        let levels = EnergyLevels::of(&h_b);
        Ok(Self {
            layout: layout.clone(),
            omega0,
            h_b,
            levels,
        })
    }

    pub fn battery_hamiltonian(&self) -> &SparseHermitian {
        &self.h_b
    }

    pub fn battery_state(&self, psi: &PureState) -> Result<DensityMatrix> {
        self.check(psi)?;
        Ok(reduce_pure_to_rows(
            psi.amplitudes(),
            self.layout.battery_dim(),
            self.layout.charger_dim(),
        ))
    }

    fn check(&self, psi: &PureState) -> Result<()> {
        if psi.layout() != &self.layout {
            return Err(Error::DimensionMismatch {
                expected: self.layout.total_dim(),
                found: psi.layout().total_dim(),
            });
        }
        Ok(())
    }

    /// Charger entropy from the Gram matrix of the charger-side rows
    /// `⟨m_b'|m_b⟩`, which shares the nonzero spectrum of `ρ_C`.
    pub fn charger_entropy(&self, psi: &PureState) -> Result<f64> {
        self.check(psi)?;
        let (db, dc) = (self.layout.battery_dim(), self.layout.charger_dim());
        let x = psi.amplitudes();
        let gram = DMatrix::from_fn(db, db, |i, j| {
            let (ri, rj) = (&x[j * dc..(j + 1) * dc], &x[i * dc..(i + 1) * dc]);
            ri.iter()
                .zip(rj)
                .map(|(a, b)| a.conj() * b)
                .sum::<Complex64>()
        });
        let eig = SymmetricEigen::new(gram);
        Ok(entropy_from_eigenvalues(eig.eigenvalues.as_slice()))
    }

    pub fn analyze(&self, t: f64, psi: &PureState, set: MetricSet) -> Result<MetricsRecord> {
        let rho = self.battery_state(psi)?;
        let spectrum = Spectrum::of(&rho);
        let energy = trace_product_shifted(&rho, &self.h_b, self.levels.ground());
        let ergotropy = ergotropy_with(&spectrum, &self.levels);
        let power = charging_power(energy, t)?;
        let gamma = extractable_ratio(ergotropy, energy, self.layout.n_qubits(), self.omega0);
        let mut rec = MetricsRecord {
            t,
            energy,
            ergotropy,
            power,
            gamma,
            purity: 0.0,
            entropy: 0.0,
            mutual_info: 0.0,
            consonance: 0.0,
            charger_entropy: 0.0,
        };
        if set == MetricSet::Full {
            rec.purity = purity(&rho);
            rec.entropy = entropy_from_eigenvalues(&spectrum.eigenvalues);
            rec.charger_entropy = self.charger_entropy(psi)?;
            // The global state is pure, so S_BC = 0.
            rec.mutual_info = mutual_information(rec.entropy, rec.charger_entropy, 0.0)?;
            rec.consonance = quantum_consonance(&rho)?;
        }
        Ok(rec)
    }
}
