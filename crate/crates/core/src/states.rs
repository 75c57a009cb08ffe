//! Initial states: truncated coherent states, the charger configurations and
//! the empty battery.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{BasisState, GlobalState, SpaceLayout};

/// Largest admissible truncation deficit of a coherent state.
pub const DEFAULT_DEFICIT_TOLERANCE: f64 = 1e-10;

/// Norm tolerance of [`PureState::new`].
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Default per-mode cutoff `max(20, ceil(|α|² + 7|α| + 10))`.
pub fn default_cutoff(alpha_abs: f64) -> usize {
    let a = alpha_abs.abs();
    let rule = (a * a + 7.0 * a + 10.0).ceil() as usize;
    rule.max(20)
}

/// Truncated, renormalized coherent-state amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentAmplitudes {
    pub amplitudes: Vec<Complex64>,
    /// Weight `Σ_{n > cutoff} |c_n|²` discarded before renormalization.
    pub deficit: f64,
}

/// Poisson weights `|c_n|²` from the recurrence `c_n = c_{n-1} α / √n`.
struct CoherentTerms {
    alpha: Complex64,
    n: usize,
    current: Complex64,
}

impl CoherentTerms {
    fn new(alpha: Complex64) -> Self {
        Self {
            alpha,
            n: 0,
            current: Complex64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0),
        }
    }
}

impl Iterator for CoherentTerms {
    type Item = Complex64;

    fn next(&mut self) -> Option<Complex64> {
        let out = self.current;
        self.n += 1;
        self.current = self.current * self.alpha / (self.n as f64).sqrt();
        Some(out)
    }
}

/// Tail weight beyond `cutoff`, summed until the terms stop mattering.
fn tail_weight(alpha: Complex64, cutoff: usize) -> f64 {
    let mean = alpha.norm_sqr();
    let mut tail = 0.0;
    for (n, c) in CoherentTerms::new(alpha).enumerate().skip(cutoff + 1) {
        let w = c.norm_sqr();
        tail += w;
        if n as f64 > mean && w <= tail * 1e-17 {
            break;
        }
        if n as f64 > mean && w == 0.0 {
            break;
        }
    }
    tail
}

/// Smallest cutoff whose truncation deficit is at most `tol`.
pub fn required_cutoff(alpha: Complex64, tol: f64) -> usize {
    let mean = alpha.norm_sqr();
    let mut cutoff = mean.floor() as usize;
    while tail_weight(alpha, cutoff) > tol {
        cutoff += 1;
    }
    // Walk back down; the tail is monotone in the cutoff.
    while cutoff > 0 && tail_weight(alpha, cutoff - 1) <= tol {
        cutoff -= 1;
    }
    cutoff
}

pub fn coherent_amplitudes(alpha: Complex64, cutoff: usize) -> Result<CoherentAmplitudes> {
    coherent_amplitudes_with_tolerance(alpha, cutoff, DEFAULT_DEFICIT_TOLERANCE)
}

pub fn coherent_amplitudes_with_tolerance(
    alpha: Complex64,
    cutoff: usize,
    deficit_tolerance: f64,
) -> Result<CoherentAmplitudes> {
    let mut amplitudes: Vec<Complex64> = CoherentTerms::new(alpha).take(cutoff + 1).collect();
    let deficit = tail_weight(alpha, cutoff);
    if deficit > deficit_tolerance {
        return Err(Error::Truncation {
            alpha,
            cutoff,
            deficit,
            required: required_cutoff(alpha, deficit_tolerance),
        });
    }
    let norm = amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    for c in &mut amplitudes {
        *c /= norm;
    }
    Ok(CoherentAmplitudes {
        amplitudes,
        deficit,
    })
}

/// `⟨α|β⟩` of untruncated coherent states.
pub fn coherent_overlap(alpha: Complex64, beta: Complex64) -> Complex64 {
    (alpha.conj() * beta - (alpha.norm_sqr() + beta.norm_sqr()) / 2.0).exp()
}

/// Relative sign between the two branches of a two-mode cat state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchSign {
    Plus,
    Minus,
}

impl BranchSign {
    fn factor(self) -> f64 {
        match self {
            BranchSign::Plus => 1.0,
            BranchSign::Minus => -1.0,
        }
    }
}

/// Initial state of the charger modes.
///
/// `SemiBellPlus(α)` is `|α⟩|α⟩ + |−α⟩|−α⟩`, `SemiBellMinus(α)` the same with
/// a relative minus sign, and `Zeta(α)` is `|α⟩|0⟩ + |0⟩|α⟩`, each normalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChargerSpec {
    Single(Complex64),
    ProductPair(Complex64, Complex64),
    SemiBellPlus(Complex64),
    SemiBellMinus(Complex64),
    Zeta(Complex64),
}

impl ChargerSpec {
    pub fn n_modes(&self) -> usize {
        match self {
            ChargerSpec::Single(_) => 1,
            _ => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ChargerSpec::Single(_) => "single",
            ChargerSpec::ProductPair(..) => "product_pair",
            ChargerSpec::SemiBellPlus(_) => "semi_bell_plus",
            ChargerSpec::SemiBellMinus(_) => "semi_bell_minus",
            ChargerSpec::Zeta(_) => "zeta",
        }
    }

    /// Per-mode cutoffs from [`default_cutoff`] applied to the largest
    /// coherent amplitude occupying each mode.
    pub fn default_cutoffs(&self) -> Vec<usize> {
        match *self {
            ChargerSpec::Single(a) => vec![default_cutoff(a.norm())],
            ChargerSpec::ProductPair(a, b) => {
                vec![default_cutoff(a.norm()), default_cutoff(b.norm())]
            }
            ChargerSpec::SemiBellPlus(a) | ChargerSpec::SemiBellMinus(a) | ChargerSpec::Zeta(a) => {
                vec![default_cutoff(a.norm()); 2]
            }
        }
    }

    /// Squared norm of the unnormalized superposition for untruncated
    /// coherent states (`N±` or `κ`); 1 for product states.
    pub fn closed_form_norm(&self) -> f64 {
        match *self {
            ChargerSpec::Single(_) | ChargerSpec::ProductPair(..) => 1.0,
            ChargerSpec::SemiBellPlus(a) => semi_bell_norm(a, -a, BranchSign::Plus),
            ChargerSpec::SemiBellMinus(a) => semi_bell_norm(a, -a, BranchSign::Minus),
            ChargerSpec::Zeta(a) => 2.0 * (1.0 + (-a.norm_sqr()).exp()),
        }
    }
}

/// `‖|α₁⟩|α₁⟩ ± |α₂⟩|α₂⟩‖² = 2(1 ± Re⟨α₁|α₂⟩²)`.
///
/// For `α₂ = −α₁ = −α` this is `2(1 ± e^{−4|α|²})`.
pub fn semi_bell_norm(alpha1: Complex64, alpha2: Complex64, sign: BranchSign) -> f64 {
    let overlap = coherent_overlap(alpha1, alpha2);
    2.0 * (1.0 + sign.factor() * (overlap * overlap).re)
}

/// Normalized state of the charger block together with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargerState {
    pub amplitudes: Vec<Complex64>,
    pub cutoffs: Vec<usize>,
    /// Truncation deficit of every coherent factor, per mode.
    pub deficits: Vec<f64>,
    /// Squared norm of the superposition before normalization.
    pub gram: f64,
}

impl ChargerState {
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn max_deficit(&self) -> f64 {
        self.deficits.iter().copied().fold(0.0, f64::max)
    }

    /// `⟨a_j† a_j⟩` of mode `j`.
    pub fn mean_photon_number(&self, mode: usize) -> f64 {
        let inner: usize = self.cutoffs[mode + 1..].iter().map(|c| c + 1).product();
        let width = self.cutoffs[mode] + 1;
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| ((i / inner) % width) as f64 * a.norm_sqr())
            .sum()
    }

    pub fn total_mean_photon_number(&self) -> f64 {
        (0..self.cutoffs.len())
            .map(|j| self.mean_photon_number(j))
            .sum()
    }

    pub fn inner(&self, other: &ChargerState) -> Result<Complex64> {
        if self.cutoffs != other.cutoffs {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

fn kron(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| x * y))
        .collect()
}

fn normalized(raw: Vec<Complex64>, what: &str) -> Result<(Vec<Complex64>, f64)> {
    let gram: f64 = raw.iter().map(|z| z.norm_sqr()).sum();
    if gram < 1e-16 {
        return Err(Error::DegenerateState(format!(
            "{what} vanishes (squared norm {gram:.3e})"
        )));
    }
    let n = gram.sqrt();
    Ok((raw.into_iter().map(|z| z / n).collect(), gram))
}

fn check_modes(spec: &ChargerSpec, cutoffs: &[usize]) -> Result<()> {
    if spec.n_modes() != cutoffs.len() {
        return Err(Error::IncompatibleCharger {
            kind: spec.name(),
            expected: spec.n_modes(),
            found: cutoffs.len(),
        });
    }
    Ok(())
}

/// Two-mode cat state `|α₁⟩|α₁⟩ ± |α₂⟩|α₂⟩` for arbitrary amplitudes,
/// normalized numerically from truncated coherent factors.
pub fn semi_bell(
    alpha1: Complex64,
    alpha2: Complex64,
    sign: BranchSign,
    cutoffs: &[usize],
) -> Result<ChargerState> {
    if cutoffs.len() != 2 {
        return Err(Error::IncompatibleCharger {
            kind: "semi_bell",
            expected: 2,
            found: cutoffs.len(),
        });
    }
    let a = [
        coherent_amplitudes(alpha1, cutoffs[0])?,
        coherent_amplitudes(alpha1, cutoffs[1])?,
    ];
    let b = [
        coherent_amplitudes(alpha2, cutoffs[0])?,
        coherent_amplitudes(alpha2, cutoffs[1])?,
    ];
    let s = sign.factor();
    let raw: Vec<Complex64> = kron(&a[0].amplitudes, &a[1].amplitudes)
        .into_iter()
        .zip(kron(&b[0].amplitudes, &b[1].amplitudes))
        .map(|(x, y)| x + y * s)
        .collect();
    let (amplitudes, gram) = normalized(raw, "semi-Bell superposition")?;
    Ok(ChargerState {
        amplitudes,
        cutoffs: cutoffs.to_vec(),
        deficits: vec![
            a[0].deficit.max(b[0].deficit),
            a[1].deficit.max(b[1].deficit),
        ],
        gram,
    })
}

pub fn build_charger_state(spec: &ChargerSpec, cutoffs: &[usize]) -> Result<ChargerState> {
    check_modes(spec, cutoffs)?;
    match *spec {
        ChargerSpec::Single(a) => {
            let c = coherent_amplitudes(a, cutoffs[0])?;
            Ok(ChargerState {
                amplitudes: c.amplitudes,
                cutoffs: cutoffs.to_vec(),
                deficits: vec![c.deficit],
                gram: 1.0,
            })
        }
        ChargerSpec::ProductPair(a1, a2) => {
            let c1 = coherent_amplitudes(a1, cutoffs[0])?;
            let c2 = coherent_amplitudes(a2, cutoffs[1])?;
            Ok(ChargerState {
                amplitudes: kron(&c1.amplitudes, &c2.amplitudes),
                cutoffs: cutoffs.to_vec(),
                deficits: vec![c1.deficit, c2.deficit],
                gram: 1.0,
            })
        }
        ChargerSpec::SemiBellPlus(a) => semi_bell(a, -a, BranchSign::Plus, cutoffs),
        ChargerSpec::SemiBellMinus(a) => semi_bell(a, -a, BranchSign::Minus, cutoffs),
        ChargerSpec::Zeta(a) => {
            let zero = Complex64::new(0.0, 0.0);
            let (a0, v0) = (
                coherent_amplitudes(a, cutoffs[0])?,
                coherent_amplitudes(zero, cutoffs[0])?,
            );
            let (a1, v1) = (
                coherent_amplitudes(a, cutoffs[1])?,
                coherent_amplitudes(zero, cutoffs[1])?,
            );
            let raw: Vec<Complex64> = kron(&a0.amplitudes, &v1.amplitudes)
                .into_iter()
                .zip(kron(&v0.amplitudes, &a1.amplitudes))
                .map(|(x, y)| x + y)
                .collect();
            let (amplitudes, gram) = normalized(raw, "zeta superposition")?;
            Ok(ChargerState {
                amplitudes,
                cutoffs: cutoffs.to_vec(),
                deficits: vec![a0.deficit, a1.deficit],
                gram,
            })
        }
    }
}

/// Normalized amplitude vector on a [`SpaceLayout`].
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    layout: SpaceLayout,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Requires unit norm within [`NORM_TOLERANCE`].
    pub fn new(layout: SpaceLayout, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != layout.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.total_dim(),
                found: amplitudes.len(),
            });
        }
        let state = Self { layout, amplitudes };
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidState(format!("norm {norm} is not 1")));
        }
        Ok(state)
    }

    pub fn normalized(layout: SpaceLayout, amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState(format!(
                "cannot normalize a vector of norm {norm}"
            )));
        }
        Self::new(layout, amplitudes.into_iter().map(|z| z / norm).collect())
    }

    pub(crate) fn from_trusted(layout: SpaceLayout, amplitudes: Vec<Complex64>) -> Self {
        Self { layout, amplitudes }
    }

    pub fn basis(layout: SpaceLayout, state: &BasisState) -> Result<Self> {
        let i = layout.basis_index(state)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); layout.total_dim()];
        amplitudes[i] = Complex64::new(1.0, 0.0);
        Ok(Self { layout, amplitudes })
    }

    /// `|g⟩^{⊗N_B} ⊗ charger`.
    pub fn empty_battery_with(layout: SpaceLayout, charger: &ChargerState) -> Result<Self> {
        if layout.mode_cutoffs() != charger.cutoffs.as_slice() {
            return Err(Error::InvalidArgument(format!(
                "charger cutoffs {:?} do not match layout cutoffs {:?}",
                charger.cutoffs,
                layout.mode_cutoffs()
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); layout.total_dim()];
        amplitudes[..charger.dim()].copy_from_slice(&charger.amplitudes);
        Ok(Self { layout, amplitudes })
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.layout != other.layout {
            return Err(Error::DimensionMismatch {
                expected: self.layout.total_dim(),
                found: other.layout.total_dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn mean_photon_number(&self, mode: usize) -> f64 {
        let cut = self.layout.mode_cutoffs();
        let inner: usize = cut[mode + 1..].iter().map(|c| c + 1).product();
        let width = cut[mode] + 1;
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| ((i / inner) % width) as f64 * a.norm_sqr())
            .sum()
    }

    pub fn total_mean_photon_number(&self) -> f64 {
        (0..self.layout.n_modes())
            .map(|j| self.mean_photon_number(j))
            .sum()
    }

    /// `⟨N_exc⟩`, qubit excitations plus photons.
    pub fn mean_excitation(&self) -> f64 {
        self.layout
            .excitations()
            .into_iter()
            .zip(&self.amplitudes)
            .map(|(n, a)| n as f64 * a.norm_sqr())
            .sum()
    }
}

impl<'a> From<&'a PureState> for GlobalState<'a> {
    fn from(state: &'a PureState) -> Self {
        GlobalState::Pure(&state.amplitudes)
    }
}

/// Empty battery tensored with the charger described by `spec`, on the
/// cutoffs of `layout`.
pub fn build_initial_state(layout: &SpaceLayout, spec: &ChargerSpec) -> Result<PureState> {
    let charger = build_charger_state(spec, layout.mode_cutoffs())?;
    PureState::empty_battery_with(layout.clone(), &charger)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{partial_trace, Block};

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn vacuum_is_first_basis_vector() {
        let c = coherent_amplitudes(re(0.0), 5).unwrap();
        assert_eq!(c.amplitudes[0], re(1.0));
        assert!(c.amplitudes[1..].iter().all(|z| *z == re(0.0)));
        assert_eq!(c.deficit, 0.0);
    }

    #[test]
    fn alpha_one_leading_amplitudes() {
        let c = coherent_amplitudes(re(1.0), 40).unwrap();
        let expected = (-0.5f64).exp();
        assert!((c.amplitudes[0].re - expected).abs() < 1e-12);
        assert!((c.amplitudes[1].re - expected).abs() < 1e-12);
        assert!((c.amplitudes[0].re - 0.606531).abs() < 1e-6);
    }

    #[test]
    fn poisson_mean_at_default_cutoff() {
        let alpha = re(2.5);
        let c = coherent_amplitudes(alpha, default_cutoff(2.5)).unwrap();
        let mean: f64 = c
            .amplitudes
            .iter()
            .enumerate()
            .map(|(n, z)| n as f64 * z.norm_sqr())
            .sum();
        assert!((mean - 6.25).abs() < 1e-6);
    }

    #[test]
    fn truncation_error_names_required_cutoff() {
        match coherent_amplitudes(re(2.5), 10) {
            Err(Error::Truncation {
                required, cutoff, ..
            }) => {
                assert_eq!(cutoff, 10);
                assert!(required > 10);
                assert!(coherent_amplitudes(re(2.5), required).is_ok());
                assert!(coherent_amplitudes(re(2.5), required - 1).is_err());
            }
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn default_cutoff_rule() {
        assert_eq!(default_cutoff(0.0), 20);
        assert_eq!(default_cutoff(2.5), 34);
        assert_eq!(default_cutoff(3.0), 40);
    }

    #[test]
    fn zeta_at_zero_collapses_to_vacuum() {
        let s = build_charger_state(&ChargerSpec::Zeta(re(0.0)), &[3, 3]).unwrap();
        assert!((s.amplitudes[0] - re(1.0)).norm() < 1e-15);
        assert!((s.gram - 4.0).abs() < 1e-15);
    }

    #[test]
    fn semi_bell_gram_matches_closed_form() {
        let spec = ChargerSpec::SemiBellPlus(re(2.5));
        let s = build_charger_state(&spec, &spec.default_cutoffs()).unwrap();
        let norm: f64 = s.amplitudes.iter().map(|z| z.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        let n_plus = 2.0 * (1.0 + (-4.0f64 * 6.25).exp());
        assert!((s.gram - n_plus).abs() < 1e-8);
        assert!((spec.closed_form_norm() - n_plus).abs() < 1e-15);
    }

    #[test]
    fn semi_bell_minus_and_zeta_grams() {
        let a = re(0.8);
        let minus = ChargerSpec::SemiBellMinus(a);
        let s = build_charger_state(&minus, &minus.default_cutoffs()).unwrap();
        assert!((s.gram - 2.0 * (1.0 - (-4.0f64 * 0.64).exp())).abs() < 1e-8);
        let zeta = ChargerSpec::Zeta(a);
        let z = build_charger_state(&zeta, &zeta.default_cutoffs()).unwrap();
        assert!((z.gram - 2.0 * (1.0 + (-0.64f64).exp())).abs() < 1e-8);
    }

    #[test]
    fn semi_bell_minus_at_zero_is_degenerate() {
        assert!(matches!(
            build_charger_state(&ChargerSpec::SemiBellMinus(re(0.0)), &[20, 20]),
            Err(Error::DegenerateState(_))
        ));
    }

    #[test]
    fn product_pair_photon_numbers() {
        let (a1, a2) = (Complex64::new(1.2, 0.3), re(-0.7));
        let spec = ChargerSpec::ProductPair(a1, a2);
        let s = build_charger_state(&spec, &spec.default_cutoffs()).unwrap();
        assert!((s.mean_photon_number(0) - a1.norm_sqr()).abs() < 1e-9);
        assert!((s.mean_photon_number(1) - a2.norm_sqr()).abs() < 1e-9);
    }

    #[test]
    fn cat_states_overlap_matches_closed_form() {
        let a = re(0.9);
        let cut = vec![default_cutoff(0.9); 2];
        let plus = build_charger_state(&ChargerSpec::SemiBellPlus(a), &cut).unwrap();
        let minus = build_charger_state(&ChargerSpec::SemiBellMinus(a), &cut).unwrap();
        // (⟨αα| + ⟨−α−α|)(|αα⟩ − |−α−α⟩) = x̄ − x with x = ⟨αα|−α−α⟩.
        let x = coherent_overlap(a, -a).powi(2);
        let closed = (x.conj() - x)
            / (semi_bell_norm(a, -a, BranchSign::Plus) * semi_bell_norm(a, -a, BranchSign::Minus))
                .sqrt();
        assert!((plus.inner(&minus).unwrap() - closed).norm() < 1e-8);
    }

    #[test]
    fn mode_count_is_checked() {
        assert!(matches!(
            build_charger_state(&ChargerSpec::Single(re(1.0)), &[20, 20]),
            Err(Error::IncompatibleCharger { .. })
        ));
        assert!(build_charger_state(&ChargerSpec::Zeta(re(1.0)), &[20]).is_err());
    }

    #[test]
    fn vacuum_initial_state() {
        let layout = SpaceLayout::new(1, &[4]).unwrap();
        let psi = build_initial_state(&layout, &ChargerSpec::Single(re(0.0))).unwrap();
        let i = layout
            .basis_index(&BasisState::new(vec![false], vec![0]))
            .unwrap();
        assert_eq!(psi.amplitudes()[i], re(1.0));
        assert!((psi.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn initial_battery_is_ground() {
        let spec = ChargerSpec::Single(re(2.5));
        let layout = SpaceLayout::new(4, &spec.default_cutoffs()).unwrap();
        let psi = build_initial_state(&layout, &spec).unwrap();
        let rho = partial_trace((&psi).into(), &layout, Block::Battery).unwrap();
        assert!((rho.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!(rho.matrix().iter().skip(1).all(|z| z.norm() < 1e-12));
        assert!((psi.total_mean_photon_number() - 6.25).abs() < 1e-8);
    }

    #[test]
    fn pure_state_norm_checked() {
        let layout = SpaceLayout::new(1, &[1]).unwrap();
        assert!(PureState::new(layout.clone(), vec![re(1.0), re(1.0), re(0.0), re(0.0)]).is_err());
        assert!(PureState::normalized(layout, vec![re(1.0), re(1.0), re(0.0), re(0.0)]).is_ok());
    }
}
