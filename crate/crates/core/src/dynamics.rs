//! Exact propagation `|ψ(t)⟩ = e^{−iHt}|ψ(0)⟩`.
//!
//! The rotating-wave Hamiltonian commutes with the total excitation number,
//! so it is diagonalized once per excitation sector; any time can then be
//! evaluated with one matrix-vector product per sector. A dense
//! matrix-exponential evaluator without sector structure is kept alongside as
//! a verification oracle.

use faer::complex_native::c64;
use faer::{Mat, Parallelism, Side};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonian::SparseHermitian;
use crate::hilbert::{SectorDecomposition, SpaceLayout};
use crate::states::PureState;

/// Largest dimension accepted by [`dense_oracle_evolve`].
pub const DEFAULT_ORACLE_DIM_LIMIT: usize = 4096;

/// Sectors whose initial weight is below this are left out of a
/// [`Trajectory`]; their contribution to any amplitude is below `1e-16`.
pub const SECTOR_WEIGHT_FLOOR: f64 = 1e-32;

/// Number of time points reconstructed per batched product.
const BATCH: usize = 64;

/// Ascending sample times starting at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    t_values: Vec<f64>,
}

impl TimeGrid {
    pub fn new(t_values: Vec<f64>) -> Result<Self> {
        match t_values.first() {
            None => return Err(Error::InvalidGrid("empty grid".into())),
            Some(&t0) if t0 != 0.0 => {
                return Err(Error::InvalidGrid(format!("grid starts at {t0}, not 0")))
            }
            _ => {}
        }
        if t_values.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidGrid("non-finite time".into()));
        }
        if let Some(w) = t_values.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(format!(
                "not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        Ok(Self { t_values })
    }

    /// `points` uniformly spaced times on `[0, t_max]`.
    pub fn uniform(t_max: f64, points: usize) -> Result<Self> {
        if points < 2 || !(t_max > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "need t_max > 0 and at least two points, got t_max = {t_max}, points = {points}"
            )));
        }
        let step = t_max / (points - 1) as f64;
        let mut t: Vec<f64> = (0..points).map(|k| k as f64 * step).collect();
        t[points - 1] = t_max;
        Self::new(t)
    }

    /// `ω₀t ∈ [0, 10]` with 1001 points.
    pub fn reproduction_default(omega0: f64) -> Self {
        Self::uniform(10.0 / omega0, 1001).expect("positive omega0")
    }

    pub fn values(&self) -> &[f64] {
        &self.t_values
    }

    pub fn len(&self) -> usize {
        self.t_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_values.is_empty()
    }

    pub fn t_max(&self) -> f64 {
        *self.t_values.last().expect("non-empty grid")
    }
}

#[derive(Debug, Clone)]
enum SectorVectors {
    Real(Mat<f64>),
    Complex(Mat<c64>),
}

/// Eigendecomposition of one excitation sector.
#[derive(Debug, Clone)]
pub struct SectorEigen {
    pub excitation: usize,
    pub indices: Vec<usize>,
    pub eigenvalues: Vec<f64>,
    vectors: SectorVectors,
}

impl SectorEigen {
    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        match &self.vectors {
            SectorVectors::Real(v) => v
                .col_as_slice(k)
                .iter()
                .map(|&x| Complex64::new(x, 0.0))
                .collect(),
            SectorVectors::Complex(v) => v
                .col_as_slice(k)
                .iter()
                .map(|z| Complex64::new(z.re, z.im))
                .collect(),
        }
    }

    /// `V diag(λ) V†`.
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        let cols: Vec<Vec<Complex64>> = (0..n).map(|k| self.eigenvector(k)).collect();
        DMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| cols[k][i] * cols[k][j].conj() * self.eigenvalues[k])
                .sum()
        })
    }

    /// `V† x` for the sector slice `x`.
    fn project(&self, x: &[Complex64]) -> Vec<Complex64> {
        match &self.vectors {
            SectorVectors::Real(v) => (0..self.dim())
                .map(|k| {
                    v.col_as_slice(k)
                        .iter()
                        .zip(x)
                        .fold(Complex64::new(0.0, 0.0), |acc, (&a, b)| acc + b * a)
                })
                .collect(),
            SectorVectors::Complex(v) => (0..self.dim())
                .map(|k| {
                    v.col_as_slice(k)
                        .iter()
                        .zip(x)
                        .fold(Complex64::new(0.0, 0.0), |acc, (a, b)| {
                            acc + Complex64::new(a.re, -a.im) * b
                        })
                })
                .collect(),
        }
    }

    /// `V (e^{−iλt} ∘ c)`, accumulated into `out` at the sector indices.
    fn reconstruct_into(&self, coeff: &[Complex64], t: f64, out: &mut [Complex64]) {
        let phased: Vec<Complex64> = coeff
            .iter()
            .zip(&self.eigenvalues)
            .map(|(c, &l)| c * Complex64::from_polar(1.0, -l * t))
            .collect();
        let mut acc = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (k, d) in phased.iter().enumerate() {
            match &self.vectors {
                SectorVectors::Real(v) => {
                    for (a, &x) in acc.iter_mut().zip(v.col_as_slice(k)) {
                        *a += d * x;
                    }
                }
                SectorVectors::Complex(v) => {
                    for (a, z) in acc.iter_mut().zip(v.col_as_slice(k)) {
                        *a += d * Complex64::new(z.re, z.im);
                    }
                }
            }
        }
        for (&i, a) in self.indices.iter().zip(acc) {
            out[i] = a;
        }
    }
}

/// Per-sector eigendecompositions of a time-independent Hamiltonian.
#[derive(Debug, Clone)]
pub struct Propagator {
    dim: usize,
    sectors: Vec<SectorEigen>,
}

/// Makes the largest-magnitude entry of every column real and positive
/// (first index wins ties).
fn fix_phases_real(v: &mut Mat<f64>) {
    for k in 0..v.ncols() {
        let col = v.col_as_slice(k);
        let mut best = 0;
        for (i, x) in col.iter().enumerate() {
            if x.abs() > col[best].abs() {
                best = i;
            }
        }
        if col[best] < 0.0 {
            for x in v.col_as_slice_mut(k) {
                *x = -*x;
            }
        }
    }
}

fn fix_phases_complex(v: &mut Mat<c64>) {
    for k in 0..v.ncols() {
        let col = v.col_as_slice(k);
        let mut best = 0;
        for (i, z) in col.iter().enumerate() {
            if z.abs() > col[best].abs() {
                best = i;
            }
        }
        let p = col[best];
        let m = p.abs();
        if m == 0.0 {
            continue;
        }
        let rot = c64::new(p.re / m, -p.im / m);
        for z in v.col_as_slice_mut(k) {
            *z *= rot;
        }
    }
}

fn diagonalize_sector(
    excitation: usize,
    indices: &[usize],
    block: Vec<(usize, usize, Complex64)>,
    real: bool,
) -> Result<SectorEigen> {
    let n = indices.len();
    let fail = |reason: String| Error::Eigensolve {
        sector: excitation,
        reason,
    };
    let (eigenvalues, vectors) = if real {
        let mut m = Mat::<f64>::zeros(n, n);
        for &(r, c, v) in &block {
            m.write(r, c, v.re);
            m.write(c, r, v.re);
        }
        let evd = m.selfadjoint_eigendecomposition(Side::Lower);
        let s = evd.s().column_vector();
        let values: Vec<f64> = (0..n).map(|k| s.read(k)).collect();
        let mut u = evd.u().to_owned();
        fix_phases_real(&mut u);
        (values, SectorVectors::Real(u))
    } else {
        let mut m = Mat::<c64>::zeros(n, n);
        for &(r, c, v) in &block {
            m.write(r, c, c64::new(v.re, v.im));
            m.write(c, r, c64::new(v.re, -v.im));
        }
        let evd = m.selfadjoint_eigendecomposition(Side::Lower);
        let s = evd.s().column_vector();
        let values: Vec<f64> = (0..n).map(|k| s.read(k).re).collect();
        let mut u = evd.u().to_owned();
        fix_phases_complex(&mut u);
        (values, SectorVectors::Complex(u))
    };
    if eigenvalues.iter().any(|l| !l.is_finite()) {
        return Err(fail("non-finite eigenvalue".into()));
    }
    let finite = match &vectors {
        SectorVectors::Real(u) => (0..n).all(|k| u.col_as_slice(k).iter().all(|x| x.is_finite())),
        SectorVectors::Complex(u) => (0..n).all(|k| {
            u.col_as_slice(k)
                .iter()
                .all(|z| z.re.is_finite() && z.im.is_finite())
        }),
    };
    if !finite {
        return Err(fail("non-finite eigenvector".into()));
    }
    Ok(SectorEigen {
        excitation,
        indices: indices.to_vec(),
        eigenvalues,
        vectors,
    })
}

/// Diagonalizes every sector block of `h`. Fails with
/// [`Error::SectorLeak`] if an entry couples two sectors.
pub fn prepare_propagator(
    h: &SparseHermitian,
    sectors: &SectorDecomposition,
) -> Result<Propagator> {
    if sectors.total_len() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: sectors.total_len(),
        });
    }
    let locator = sectors.locator(h.dim());
    if locator.iter().any(|&(s, _)| s == usize::MAX) {
        return Err(Error::InvalidArgument(
            "sectors do not cover the space".into(),
        ));
    }
    let mut blocks: Vec<Vec<(usize, usize, Complex64)>> = vec![Vec::new(); sectors.sectors.len()];
    for &(r, c, v) in h.entries() {
        let (sr, kr) = locator[r];
        let (sc, kc) = locator[c];
        if sr != sc {
            if v == Complex64::new(0.0, 0.0) {
                continue;
            }
            return Err(Error::SectorLeak {
                row: r,
                col: c,
                from: sectors.sectors[sr].excitation,
                to: sectors.sectors[sc].excitation,
            });
        }
        blocks[sr].push((kr.min(kc), kr.max(kc), if kr <= kc { v } else { v.conj() }));
    }
    let real = h.is_real();
    let sectors = sectors
        .sectors
        .par_iter()
        .zip(blocks.into_par_iter())
        .map(|(s, block)| diagonalize_sector(s.excitation, &s.indices, block, real))
        .collect::<Result<Vec<_>>>()?;
    Ok(Propagator {
        dim: h.dim(),
        sectors,
    })
}

impl Propagator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sectors(&self) -> &[SectorEigen] {
        &self.sectors
    }

    fn check(&self, psi: &PureState) -> Result<()> {
        if psi.layout().total_dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: psi.layout().total_dim(),
            });
        }
        Ok(())
    }

    pub fn evolve(&self, psi0: &PureState, t: f64) -> Result<PureState> {
        self.check(psi0)?;
        let x = psi0.amplitudes();
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        for s in &self.sectors {
            let slice: Vec<Complex64> = s.indices.iter().map(|&i| x[i]).collect();
            let c = s.project(&slice);
            s.reconstruct_into(&c, t, &mut out);
        }
        Ok(PureState::from_trusted(psi0.layout().clone(), out))
    }

    pub fn evolve_series(&self, psi0: &PureState, grid: &TimeGrid) -> Result<Vec<PureState>> {
        let mut states = Vec::with_capacity(grid.len());
        Trajectory::exact(self, psi0)?.for_each_state(grid.values(), |_, _, psi| {
            states.push(psi);
            Ok(())
        })?;
        Ok(states)
    }

    /// Largest Frobenius residual `‖V diag(λ) V† − H_s‖` over sectors.
    pub fn reconstruction_residual(&self, h: &SparseHermitian) -> f64 {
        let dense = h.to_dense();
        self.sectors
            .iter()
            .map(|s| {
                let block =
                    DMatrix::from_fn(s.dim(), s.dim(), |i, j| dense[(s.indices[i], s.indices[j])]);
                (s.reconstruct() - block).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Relative gap below which eigenvalues of one sector are merged into a
/// single phase group.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// One sector of a [`Trajectory`]: `ψ_s(t) = Σ_g e^{−iλ_g t} w_g`, where
/// `w_g` is the projection of `ψ(0)` on the eigenspace of `λ_g`.
#[derive(Debug, Clone)]
struct ActiveSector {
    indices: Vec<usize>,
    energies: Vec<f64>,
    w: Mat<c64>,
}

impl ActiveSector {
    fn from_projection(s: &SectorEigen, coeff: &[Complex64], floor: f64) -> Option<Self> {
        let mut order: Vec<usize> = (0..s.dim()).collect();
        order.sort_by(|&a, &b| s.eigenvalues[a].total_cmp(&s.eigenvalues[b]));
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for k in order {
            match groups.last_mut() {
                Some(g)
                    if {
                        let l0 = s.eigenvalues[g[0]];
                        (s.eigenvalues[k] - l0).abs() <= DEGENERACY_TOL * l0.abs().max(1.0)
                    } =>
                {
                    g.push(k)
                }
                _ => groups.push(vec![k]),
            }
        }
        let n = s.dim();
        let mut energies = Vec::new();
        let mut cols: Vec<Vec<Complex64>> = Vec::new();
        for g in groups {
            let weight: f64 = g.iter().map(|&k| coeff[k].norm_sqr()).sum();
            if weight == 0.0 || weight < floor {
                continue;
            }
            let mut w = vec![Complex64::new(0.0, 0.0); n];
            for &k in &g {
                for (acc, v) in w.iter_mut().zip(s.eigenvector(k)) {
                    *acc += coeff[k] * v;
                }
            }
            energies.push(g.iter().map(|&k| s.eigenvalues[k]).sum::<f64>() / g.len() as f64);
            cols.push(w);
        }
        if cols.is_empty() {
            return None;
        }
        let w = Mat::<c64>::from_fn(n, cols.len(), |i, j| c64::new(cols[j][i].re, cols[j][i].im));
        Some(Self {
            indices: s.indices.clone(),
            energies,
            w,
        })
    }

    fn accumulate(&self, t: f64, out: &mut [Complex64]) {
        let mut acc = vec![Complex64::new(0.0, 0.0); self.indices.len()];
        for (g, &l) in self.energies.iter().enumerate() {
            let ph = Complex64::from_polar(1.0, -l * t);
            for (a, z) in acc.iter_mut().zip(self.w.col_as_slice(g)) {
                *a += ph * Complex64::new(z.re, z.im);
            }
        }
        for (&i, a) in self.indices.iter().zip(acc) {
            out[i] = a;
        }
    }

    fn accumulate_batch(&self, times: &[f64], out: &mut [Vec<Complex64>]) {
        let n = self.indices.len();
        let e = Mat::<c64>::from_fn(self.energies.len(), times.len(), |g, tau| {
            let z = Complex64::from_polar(1.0, -self.energies[g] * times[tau]);
            c64::new(z.re, z.im)
        });
        let mut o = Mat::<c64>::zeros(n, times.len());
        faer::linalg::matmul::matmul(
            o.as_mut(),
            self.w.as_ref(),
            e.as_ref(),
            None,
            c64::new(1.0, 0.0),
            Parallelism::None,
        );
        for (tau, state) in out.iter_mut().enumerate() {
            for (z, &i) in o.col_as_slice(tau).iter().zip(&self.indices) {
                state[i] = Complex64::new(z.re, z.im);
            }
        }
    }
}

/// An initial state projected onto the eigenbases of a [`Propagator`], ready
/// to be evaluated at any time. Independent of the propagator once built.
#[derive(Debug, Clone)]
pub struct Trajectory {
    layout: SpaceLayout,
    active: Vec<ActiveSector>,
    dropped_weight: f64,
}

impl Trajectory {
    /// Drops eigenspace components whose weight in `psi0` is below
    /// [`SECTOR_WEIGHT_FLOOR`].
    pub fn new(propagator: &Propagator, psi0: &PureState) -> Result<Self> {
        Self::with_floor(propagator, psi0, SECTOR_WEIGHT_FLOOR)
    }

    /// Keeps every component with nonzero weight.
    pub fn exact(propagator: &Propagator, psi0: &PureState) -> Result<Self> {
        Self::with_floor(propagator, psi0, 0.0)
    }

    fn with_floor(propagator: &Propagator, psi0: &PureState, floor: f64) -> Result<Self> {
        propagator.check(psi0)?;
        let x = psi0.amplitudes();
        let mut active = Vec::new();
        let mut kept = 0.0;
        for s in &propagator.sectors {
            let slice: Vec<Complex64> = s.indices.iter().map(|&i| x[i]).collect();
            if slice.iter().all(|z| z.norm_sqr() == 0.0) {
                continue;
            }
            if let Some(a) = ActiveSector::from_projection(s, &s.project(&slice), floor) {
                kept += (0..a.w.ncols())
                    .map(|g| {
                        a.w.col_as_slice(g)
                            .iter()
                            .map(|z| z.re * z.re + z.im * z.im)
                            .sum::<f64>()
                    })
                    .sum::<f64>();
                active.push(a);
            }
        }
        Ok(Self {
            layout: psi0.layout().clone(),
            active,
            dropped_weight: (psi0.norm().powi(2) - kept).max(0.0),
        })
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    /// Initial weight of the components left out (up to roundoff).
    pub fn dropped_weight(&self) -> f64 {
        self.dropped_weight
    }

    pub fn active_sectors(&self) -> usize {
        self.active.len()
    }

    /// Total number of eigenspace groups carried.
    pub fn active_groups(&self) -> usize {
        self.active.iter().map(|a| a.energies.len()).sum()
    }

    pub fn state_at(&self, t: f64) -> PureState {
        let mut out = vec![Complex64::new(0.0, 0.0); self.layout.total_dim()];
        for a in &self.active {
            a.accumulate(t, &mut out);
        }
        PureState::from_trusted(self.layout.clone(), out)
    }

    pub fn states_at(&self, times: &[f64]) -> Vec<PureState> {
        let mut out = vec![vec![Complex64::new(0.0, 0.0); self.layout.total_dim()]; times.len()];
        for a in &self.active {
            a.accumulate_batch(times, &mut out);
        }
        out.into_iter()
            .map(|a| PureState::from_trusted(self.layout.clone(), a))
            .collect()
    }

    /// Streams `(index, t, ψ(t))` in batches without retaining the states.
    pub fn for_each_state<F>(&self, times: &[f64], mut f: F) -> Result<()>
    where
        F: FnMut(usize, f64, PureState) -> Result<()>,
    {
        for (b, chunk) in times.chunks(BATCH).enumerate() {
            for (k, psi) in self.states_at(chunk).into_iter().enumerate() {
                f(b * BATCH + k, chunk[k], psi)?;
            }
        }
        Ok(())
    }
}

/// `e^{−iHt} ψ₀` by dense matrix exponential, ignoring sector structure.
pub fn dense_oracle_evolve(
    h: &DMatrix<Complex64>,
    psi0: &[Complex64],
    t: f64,
) -> Result<Vec<Complex64>> {
    dense_oracle_evolve_with_limit(h, psi0, t, DEFAULT_ORACLE_DIM_LIMIT)
}

pub fn dense_oracle_evolve_with_limit(
    h: &DMatrix<Complex64>,
    psi0: &[Complex64],
    t: f64,
    dim_limit: usize,
) -> Result<Vec<Complex64>> {
    let n = h.nrows();
    if n > dim_limit {
        return Err(Error::ResourceGuard(format!(
            "dense oracle dimension {n} exceeds limit {dim_limit}"
        )));
    }
    if h.ncols() != n || psi0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: psi0.len(),
        });
    }
    let u = (h * Complex64::new(0.0, -t)).exp();
    let psi = nalgebra::DVector::from_column_slice(psi0);
    Ok((u * psi).iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_total_hamiltonian, ModelConfig};
    use crate::hilbert::BasisState;

    fn model(nq: usize, cuts: &[usize], g: f64) -> (SpaceLayout, SparseHermitian, Propagator) {
        let cfg = ModelConfig::resonant(nq, cuts, 1.0).with_coupling(g);
        let layout = cfg.layout().unwrap();
        let h = build_total_hamiltonian(&cfg, &layout).unwrap();
        let p = prepare_propagator(&h, &layout.build_sectors()).unwrap();
        (layout, h, p)
    }

    fn some_state(layout: &SpaceLayout) -> PureState {
        let raw = (0..layout.total_dim())
            .map(|k| Complex64::new((k as f64 * 0.37).sin(), (k as f64 * 0.11 + 0.2).cos()))
            .collect();
        PureState::normalized(layout.clone(), raw).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(vec![]).is_err());
        assert!(TimeGrid::new(vec![0.1, 0.2]).is_err());
        assert!(TimeGrid::new(vec![0.0, 0.2, 0.2]).is_err());
        assert!(TimeGrid::uniform(1.0, 1).is_err());
        let g = TimeGrid::reproduction_default(1.0);
        assert_eq!(g.len(), 1001);
        assert_eq!(g.t_max(), 10.0);
        assert!((g.values()[1] - 0.01).abs() < 1e-15);
    }

    #[test]
    fn diagonal_hamiltonian_gives_identity_vectors() {
        let (_, h, p) = model(2, &[2], 0.0);
        for s in p.sectors() {
            let mut got = s.eigenvalues.clone();
            let mut want: Vec<f64> = s.indices.iter().map(|&i| h.diagonal()[i]).collect();
            got.sort_by(f64::total_cmp);
            want.sort_by(f64::total_cmp);
            assert_eq!(got, want);
            for k in 0..s.dim() {
                let v = s.eigenvector(k);
                assert_eq!(v.iter().filter(|z| z.norm() == 1.0).count(), 1);
            }
        }
    }

    #[test]
    fn jaynes_cummings_pair_eigenvalues() {
        let (_, _, p) = model(1, &[1], 2.0);
        let s = p.sectors().iter().find(|s| s.excitation == 1).unwrap();
        let mut l = s.eigenvalues.clone();
        l.sort_by(f64::total_cmp);
        assert!((l[0] - (0.5 - 2.0)).abs() < 1e-12);
        assert!((l[1] - (0.5 + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn reconstruction_residual_is_small() {
        for (nq, cuts) in [(1, vec![5]), (3, vec![2, 2]), (2, vec![6])] {
            let (_, h, p) = model(nq, &cuts, 1.3);
            assert!(p.reconstruction_residual(&h) < 1e-10 * h.norm_bound().max(1.0));
            for s in p.sectors() {
                for k in 0..s.dim() {
                    let v = s.eigenvector(k);
                    let n: f64 = v.iter().map(|z| z.norm_sqr()).sum();
                    assert!((n - 1.0).abs() < 1e-10);
                    let lead = v.iter().fold(Complex64::new(0.0, 0.0), |b, z| {
                        if z.norm() > b.norm() {
                            *z
                        } else {
                            b
                        }
                    });
                    assert!(lead.re > 0.0 && lead.im == 0.0);
                }
            }
        }
    }

    #[test]
    fn complex_hermitian_blocks_are_supported() {
        let i = Complex64::new(0.0, 1.0);
        let h = SparseHermitian::from_upper(
            3,
            vec![
                (0, 0, Complex64::new(1.0, 0.0)),
                (1, 1, Complex64::new(-0.5, 0.0)),
                (1, 2, 0.3 + 0.8 * i),
                (2, 2, Complex64::new(0.25, 0.0)),
            ],
        )
        .unwrap();
        let sectors = SectorDecomposition {
            sectors: vec![
                crate::hilbert::Sector {
                    excitation: 0,
                    indices: vec![0],
                },
                crate::hilbert::Sector {
                    excitation: 1,
                    indices: vec![1, 2],
                },
            ],
        };
        let p = prepare_propagator(&h, &sectors).unwrap();
        assert!(p.reconstruction_residual(&h) < 1e-12);
        let layout = SpaceLayout::new(1, &[0]).unwrap();
        // The 3-dim toy is evolved through a dense comparison only.
        let psi = vec![
            Complex64::new(0.6, 0.0),
            Complex64::new(0.0, 0.8),
            Complex64::new(0.0, 0.0),
        ];
        let want = dense_oracle_evolve(&h.to_dense(), &psi, 0.9).unwrap();
        let traj_state = {
            let mut out = vec![Complex64::new(0.0, 0.0); 3];
            for s in p.sectors() {
                let slice: Vec<Complex64> = s.indices.iter().map(|&i| psi[i]).collect();
                let c = s.project(&slice);
                s.reconstruct_into(&c, 0.9, &mut out);
            }
            out
        };
        for (a, b) in traj_state.iter().zip(&want) {
            assert!((a - b).norm() < 1e-12);
        }
        let _ = layout;
    }

    #[test]
    fn sector_leak_is_detected() {
        let one = Complex64::new(1.0, 0.0);
        let h = SparseHermitian::from_upper(2, vec![(0, 1, one)]).unwrap();
        let layout = SpaceLayout::new(1, &[0]).unwrap();
        assert!(matches!(
            prepare_propagator(&h, &layout.build_sectors()),
            Err(Error::SectorLeak { .. })
        ));
    }

    #[test]
    fn evolve_at_zero_is_identity() {
        let (layout, _, p) = model(2, &[3], 2.0);
        let psi = some_state(&layout);
        let out = p.evolve(&psi, 0.0).unwrap();
        for (a, b) in out.amplitudes().iter().zip(psi.amplitudes()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn single_photon_rabi_oscillation() {
        let (layout, _, p) = model(1, &[3], 2.0);
        let psi = PureState::basis(layout.clone(), &BasisState::new(vec![false], vec![1])).unwrap();
        let excited = layout
            .basis_index(&BasisState::new(vec![true], vec![0]))
            .unwrap();
        for k in 0..50 {
            let t = 0.037 * k as f64;
            let pop = p.evolve(&psi, t).unwrap().amplitudes()[excited].norm_sqr();
            assert!((pop - (2.0 * t).sin().powi(2)).abs() < 1e-10);
        }
    }

    #[test]
    fn agrees_with_dense_oracle() {
        let (layout, h, p) = model(2, &[4], 2.0);
        let psi = some_state(&layout);
        let dense = h.to_dense();
        for k in 0..10 {
            let t = 0.731 * k as f64 + 0.05;
            let a = p.evolve(&psi, t).unwrap();
            let b = dense_oracle_evolve(&dense, psi.amplitudes(), t).unwrap();
            let dev = a
                .amplitudes()
                .iter()
                .zip(&b)
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max);
            assert!(dev < 1e-8, "t = {t}: {dev}");
        }
    }

    #[test]
    fn batched_and_single_reconstruction_agree() {
        let (layout, _, p) = model(2, &[2, 2], 1.7);
        let psi = some_state(&layout);
        let grid = TimeGrid::uniform(3.0, 130).unwrap();
        let series = p.evolve_series(&psi, &grid).unwrap();
        assert_eq!(series.len(), 130);
        for (t, s) in grid.values().iter().zip(&series) {
            let one = p.evolve(&psi, *t).unwrap();
            let dev = one
                .amplitudes()
                .iter()
                .zip(s.amplitudes())
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max);
            assert!(dev < 1e-12);
        }
    }

    #[test]
    fn zero_coupling_keeps_populations() {
        let (layout, _, p) = model(2, &[3], 0.0);
        let psi = some_state(&layout);
        let out = p.evolve(&psi, 4.2).unwrap();
        for (a, b) in out.amplitudes().iter().zip(psi.amplitudes()) {
            assert!((a.norm_sqr() - b.norm_sqr()).abs() < 1e-14);
        }
    }

    #[test]
    fn oracle_dimension_guard() {
        let h = DMatrix::<Complex64>::identity(5, 5);
        let psi = vec![Complex64::new(1.0, 0.0); 5];
        assert!(matches!(
            dense_oracle_evolve_with_limit(&h, &psi, 1.0, 4),
            Err(Error::ResourceGuard(_))
        ));
    }

    #[test]
    fn layout_mismatch_is_rejected() {
        let (_, _, p) = model(1, &[3], 2.0);
        let other = SpaceLayout::new(1, &[4]).unwrap();
        let psi = PureState::basis(other, &BasisState::new(vec![false], vec![0])).unwrap();
        assert!(matches!(
            p.evolve(&psi, 1.0),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
