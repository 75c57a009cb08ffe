//! Tavis–Cummings Hamiltonian `H = H_B + H_C + H_I` with
//!
//! * `H_B = ω₀/2 Σ_i σ_i^z`
//! * `H_C = Σ_j ω_j a_j† a_j`
//! * `H_I = g Σ_{i,j} (σ_i⁺ a_j + σ_i⁻ a_j†)`
//!
//! assembled in the basis of [`crate::hilbert`]. The ladder is closed at the
//! cutoff: `a_j†` acting on `n_max` gives zero.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::SpaceLayout;

/// Physical parameters (`ħ = 1`, energies in the same units as `omega0`).
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub omega0: f64,
    pub omega_mode: Vec<f64>,
    pub g: f64,
    pub n_qubits: usize,
    pub mode_cutoffs: Vec<usize>,
}

impl ModelConfig {
    /// Resonant modes (`ω_j = ω₀`) and strong coupling `g = 2ω₀`.
    pub fn resonant(n_qubits: usize, mode_cutoffs: &[usize], omega0: f64) -> Self {
        Self {
            omega0,
            omega_mode: vec![omega0; mode_cutoffs.len()],
            g: 2.0 * omega0,
            n_qubits,
            mode_cutoffs: mode_cutoffs.to_vec(),
        }
    }

    pub fn with_coupling(mut self, g: f64) -> Self {
        self.g = g;
        self
    }

    pub fn layout(&self) -> Result<SpaceLayout> {
        SpaceLayout::new(self.n_qubits, &self.mode_cutoffs)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega0 > 0.0 && self.omega0.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "omega0 must be positive, got {}",
                self.omega0
            )));
        }
        if self.omega_mode.len() != self.mode_cutoffs.len() {
            return Err(Error::InvalidArgument(format!(
                "{} mode frequencies for {} modes",
                self.omega_mode.len(),
                self.mode_cutoffs.len()
            )));
        }
        if !self.g.is_finite() || self.omega_mode.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidArgument("non-finite model parameter".into()));
        }
        Ok(())
    }
}

/// Hermitian matrix stored as its upper triangle (diagonal included) in
/// coordinate form, sorted by `(row, col)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseHermitian {
    dim: usize,
    entries: Vec<(usize, usize, Complex64)>,
}

impl SparseHermitian {
    /// Entries must satisfy `row <= col < dim` and have real diagonal values;
    /// duplicates are summed.
    pub fn from_upper(dim: usize, mut entries: Vec<(usize, usize, Complex64)>) -> Result<Self> {
        for &(r, c, v) in &entries {
            if r > c || c >= dim {
                return Err(Error::InvalidArgument(format!(
                    "entry ({r}, {c}) is not in the upper triangle of a {dim}x{dim} matrix"
                )));
            }
            if r == c && v.im != 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "diagonal entry {r} has imaginary part {}",
                    v.im
                )));
            }
        }
        entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, Complex64)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        Ok(Self {
            dim,
            entries: merged,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, usize, Complex64)] {
        &self.entries
    }

    pub fn is_diagonal(&self) -> bool {
        self.entries
            .iter()
            .all(|&(r, c, v)| r == c || v == Complex64::new(0.0, 0.0))
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|e| e.2.im == 0.0)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.dim];
        for &(r, c, v) in &self.entries {
            if r == c {
                d[r] = v.re;
            }
        }
        d
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] = v;
            if r != c {
                m[(c, r)] = v.conj();
            }
        }
        m
    }

    /// `H x`.
    pub fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
            if r != c {
                y[c] += v.conj() * x[r];
            }
        }
        Ok(y)
    }

    /// `⟨x|H|x⟩`, real by Hermiticity.
    pub fn expectation(&self, x: &[Complex64]) -> Result<f64> {
        let hx = self.apply(x)?;
        Ok(x.iter().zip(&hx).map(|(a, b)| (a.conj() * b).re).sum())
    }

    /// Largest absolute row sum, an upper bound on the spectral norm.
    pub fn norm_bound(&self) -> f64 {
        let mut rows = vec![0.0; self.dim];
        for &(r, c, v) in &self.entries {
            rows[r] += v.norm();
            if r != c {
                rows[c] += v.norm();
            }
        }
        rows.into_iter().fold(0.0, f64::max)
    }
}

pub fn build_total_hamiltonian(
    config: &ModelConfig,
    layout: &SpaceLayout,
) -> Result<SparseHermitian> {
    config.validate()?;
    if config.n_qubits != layout.n_qubits() || config.mode_cutoffs != layout.mode_cutoffs() {
        return Err(Error::InvalidArgument(format!(
            "model ({} qubits, cutoffs {:?}) does not match layout ({} qubits, cutoffs {:?})",
            config.n_qubits,
            config.mode_cutoffs,
            layout.n_qubits(),
            layout.mode_cutoffs()
        )));
    }
    let nq = layout.n_qubits();
    let cut = layout.mode_cutoffs();
    let dc = layout.charger_dim();
    // Stride of mode j inside the charger index.
    let strides: Vec<usize> = (0..cut.len())
        .map(|j| cut[j + 1..].iter().map(|c| c + 1).product())
        .collect();

    let mut entries = Vec::with_capacity(layout.total_dim() * (1 + nq * cut.len()));
    for b in 0..layout.battery_dim() {
        let excited = b.count_ones() as f64;
        let battery_energy = config.omega0 / 2.0 * (2.0 * excited - nq as f64);
        for ch in 0..dc {
            let occ: Vec<usize> = (0..cut.len())
                .map(|j| (ch / strides[j]) % (cut[j] + 1))
                .collect();
            let charger_energy: f64 = occ
                .iter()
                .zip(&config.omega_mode)
                .map(|(&n, w)| w * n as f64)
                .sum();
            let here = b * dc + ch;
            entries.push((
                here,
                here,
                Complex64::new(battery_energy + charger_energy, 0.0),
            ));
            if config.g == 0.0 {
                continue;
            }
            // σ_i⁻ a_j† : |e_i, n_j⟩ -> √(n_j+1) |g_i, n_j+1⟩; the lowered
            // qubit digit makes the target index the smaller one.
            for q in 0..nq {
                let bit = 1usize << (nq - 1 - q);
                if b & bit == 0 {
                    continue;
                }
                for j in 0..cut.len() {
                    if occ[j] == cut[j] {
                        continue;
                    }
                    let there = (b ^ bit) * dc + ch + strides[j];
                    let amp = config.g * ((occ[j] + 1) as f64).sqrt();
                    entries.push((there, here, Complex64::new(amp, 0.0)));
                }
            }
        }
    }
    SparseHermitian::from_upper(layout.total_dim(), entries)
}

/// `H_B = ω₀/2 Σ σ_i^z` on the `2^{N_B}` battery space.
pub fn build_battery_hamiltonian(n_qubits: usize, omega0: f64) -> Result<SparseHermitian> {
    if n_qubits == 0 || n_qubits >= usize::BITS as usize {
        return Err(Error::InvalidArgument(format!(
            "unsupported qubit count {n_qubits}"
        )));
    }
    let dim = 1usize << n_qubits;
    let entries = (0..dim)
        .map(|b| {
            let k = b.count_ones() as f64;
            (
                b,
                b,
                Complex64::new(omega0 * (k - n_qubits as f64 / 2.0), 0.0),
            )
        })
        .collect();
    SparseHermitian::from_upper(dim, entries)
}
