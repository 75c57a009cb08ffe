//! Scenario orchestration: time series per charger, maxima over time,
//! α-sweeps comparing one charger against two, and battery-size scaling.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dynamics::{prepare_propagator, Propagator, TimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_total_hamiltonian, ModelConfig, SparseHermitian};
use crate::metrics::{BatteryAnalyzer, MetricSet, MetricsRecord};
use crate::states::{build_charger_state, ChargerSpec, PureState};

/// Per-mode cutoffs above this are rejected.
pub const MAX_MODE_CUTOFF: usize = 200;

/// Largest battery accepted by [`size_scaling`].
pub const MAX_SCALING_QUBITS: usize = 6;

/// Relative tolerance of the golden-section refinement of maxima.
pub const REFINE_REL_TOL: f64 = 1e-6;

/// Allowed mismatch of the mean photon number between paired scenarios.
pub const PHOTON_BUDGET_TOL: f64 = 1e-8;

/// Largest excitation sector the cache will diagonalize.
pub const MAX_SECTOR_DIM: usize = 4096;

/// Largest Hilbert-space dimension the cache will build a model for.
pub const MAX_DIMENSION: usize = 1 << 22;

const NORM_TOL: f64 = 1e-10;
const ENERGY_TOL: f64 = 1e-8;
const EXCITATION_TOL: f64 = 1e-10;

/// Charger families indexed by a single real amplitude `α`, as used in
/// sweeps and scaling studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChargerFamily {
    /// One cavity holding the photon budget of a pair: `|√2 α⟩`.
    Single,
    /// `|α⟩|α⟩`.
    ProductInPhase,
    /// `|α⟩|−α⟩`.
    ProductOpposed,
    SemiBellPlus,
    SemiBellMinus,
    Zeta,
}

impl ChargerFamily {
    pub const ALL: [ChargerFamily; 6] = [
        ChargerFamily::Single,
        ChargerFamily::ProductInPhase,
        ChargerFamily::ProductOpposed,
        ChargerFamily::SemiBellPlus,
        ChargerFamily::SemiBellMinus,
        ChargerFamily::Zeta,
    ];

    pub fn spec(self, alpha: f64) -> ChargerSpec {
        let a = Complex64::new(alpha, 0.0);
        match self {
            ChargerFamily::Single => ChargerSpec::Single(a * std::f64::consts::SQRT_2),
            ChargerFamily::ProductInPhase => ChargerSpec::ProductPair(a, a),
            ChargerFamily::ProductOpposed => ChargerSpec::ProductPair(a, -a),
            ChargerFamily::SemiBellPlus => ChargerSpec::SemiBellPlus(a),
            ChargerFamily::SemiBellMinus => ChargerSpec::SemiBellMinus(a),
            ChargerFamily::Zeta => ChargerSpec::Zeta(a),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ChargerFamily::Single => "single",
            ChargerFamily::ProductInPhase => "product_in_phase",
            ChargerFamily::ProductOpposed => "product_opposed",
            ChargerFamily::SemiBellPlus => "semi_bell_plus",
            ChargerFamily::SemiBellMinus => "semi_bell_minus",
            ChargerFamily::Zeta => "zeta",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }

    /// Whether the family has the same mean photon number as
    /// [`ChargerFamily::Single`] at every `α`.
    pub fn budget_matched(self) -> bool {
        matches!(
            self,
            ChargerFamily::Single | ChargerFamily::ProductInPhase | ChargerFamily::ProductOpposed
        )
    }
}

/// Per-cell normalization of reported records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Normalization {
    /// Divide energies, power and entropies by `N_B` (energies in units of
    /// `ω₀`, power in `ω₀²`).
    pub per_cell: bool,
}

impl Normalization {
    pub fn apply(&self, rec: &MetricsRecord, n_qubits: usize, omega0: f64) -> MetricsRecord {
        if !self.per_cell {
            return *rec;
        }
        let n = n_qubits as f64;
        MetricsRecord {
            energy: rec.energy / (n * omega0),
            ergotropy: rec.ergotropy / (n * omega0),
            power: rec.power / (n * omega0 * omega0),
            entropy: rec.entropy / n,
            mutual_info: rec.mutual_info / n,
            charger_entropy: rec.charger_entropy / n,
            ..*rec
        }
    }
}

fn check_cutoffs(cutoffs: &[usize]) -> Result<()> {
    if let Some(&c) = cutoffs.iter().find(|&&c| c > MAX_MODE_CUTOFF) {
        return Err(Error::ResourceGuard(format!(
            "mode cutoff {c} exceeds the limit of {MAX_MODE_CUTOFF}"
        )));
    }
    Ok(())
}

/// A battery, its charger and the sampling grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub model: ModelConfig,
    pub charger: ChargerSpec,
    pub grid: TimeGrid,
    pub normalization: Normalization,
}

impl Scenario {
    /// Resonant model with `g = 2ω₀`, cutoffs from the default rule.
    pub fn new(n_qubits: usize, charger: ChargerSpec, omega0: f64, grid: TimeGrid) -> Result<Self> {
        let cutoffs = charger.default_cutoffs();
        check_cutoffs(&cutoffs)?;
        Ok(Self {
            model: ModelConfig::resonant(n_qubits, &cutoffs, omega0),
            charger,
            grid,
            normalization: Normalization::default(),
        })
    }

    pub fn with_coupling(mut self, g: f64) -> Self {
        self.model.g = g;
        self
    }

    pub fn with_cutoffs(mut self, cutoffs: &[usize]) -> Result<Self> {
        check_cutoffs(cutoffs)?;
        if cutoffs.len() != self.model.mode_cutoffs.len() {
            return Err(Error::IncompatibleCharger {
                kind: self.charger.name(),
                expected: self.model.mode_cutoffs.len(),
                found: cutoffs.len(),
            });
        }
        self.model.mode_cutoffs = cutoffs.to_vec();
        Ok(self)
    }

    pub fn with_normalization(mut self, normalization: Normalization) -> Self {
        self.normalization = normalization;
        self
    }
}

/// Identifies the scenario a series was computed for.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioDescriptor {
    pub charger: ChargerSpec,
    pub n_qubits: usize,
    pub omega0: f64,
    pub g: f64,
    pub mode_cutoffs: Vec<usize>,
    pub truncation_deficits: Vec<f64>,
    pub mean_photon_number: f64,
    pub normalization: Normalization,
}

/// Grid-aligned records of one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsSeries {
    pub descriptor: ScenarioDescriptor,
    pub records: Vec<MetricsRecord>,
}

/// Selects one column of a [`MetricsRecord`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Energy,
    Ergotropy,
    Power,
    Gamma,
    Purity,
    Entropy,
    MutualInfo,
    Consonance,
    ChargerEntropy,
}

impl Metric {
    pub fn of(self, rec: &MetricsRecord) -> Option<f64> {
        Some(match self {
            Metric::Energy => rec.energy,
            Metric::Ergotropy => rec.ergotropy,
            Metric::Power => rec.power,
            Metric::Gamma => return rec.gamma,
            Metric::Purity => rec.purity,
            Metric::Entropy => rec.entropy,
            Metric::MutualInfo => rec.mutual_info,
            Metric::Consonance => rec.consonance,
            Metric::ChargerEntropy => rec.charger_entropy,
        })
    }

    fn needs_full(self) -> bool {
        !matches!(
            self,
            Metric::Energy | Metric::Ergotropy | Metric::Power | Metric::Gamma
        )
    }
}

/// A maximum or minimum over time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub t: f64,
    pub value: f64,
    /// Best value on the grid before refinement.
    pub grid_value: f64,
    /// The grid optimum sits on the last grid point, so the true optimum may
    /// lie beyond the window.
    pub at_right_endpoint: bool,
}

type Slot = Arc<Mutex<Option<Arc<Propagator>>>>;

/// Shares read-only propagators between scenarios with the same model.
#[derive(Debug, Default)]
pub struct PropagatorCache {
    slots: Mutex<HashMap<ModelKey, Slot>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct ModelKey {
    n_qubits: usize,
    cutoffs: Vec<usize>,
    omega0: u64,
    g: u64,
    omega_mode: Vec<u64>,
}

impl ModelKey {
    fn of(m: &ModelConfig) -> Self {
        Self {
            n_qubits: m.n_qubits,
            cutoffs: m.mode_cutoffs.clone(),
            omega0: m.omega0.to_bits(),
            g: m.g.to_bits(),
            omega_mode: m.omega_mode.iter().map(|w| w.to_bits()).collect(),
        }
    }
}

impl PropagatorCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, model: &ModelConfig) -> Result<(Arc<Propagator>, SparseHermitian)> {
        model.validate()?;
        let layout = model.layout()?;
        if layout.total_dim() > MAX_DIMENSION {
            return Err(Error::ResourceGuard(format!(
                "Hilbert-space dimension {} exceeds the limit of {MAX_DIMENSION}",
                layout.total_dim()
            )));
        }
        let sectors = layout.build_sectors();
        if let Some(s) = sectors
            .sectors
            .iter()
            .find(|s| s.indices.len() > MAX_SECTOR_DIM)
        {
            return Err(Error::ResourceGuard(format!(
                "excitation sector {} has dimension {} (limit {MAX_SECTOR_DIM})",
                s.excitation,
                s.indices.len()
            )));
        }
        let h = build_total_hamiltonian(model, &layout)?;
        let slot = {
            let mut slots = self.slots.lock().expect("cache lock");
            slots.entry(ModelKey::of(model)).or_default().clone()
        };
        let mut guard = slot.lock().expect("slot lock");
        if let Some(p) = guard.as_ref() {
            return Ok((p.clone(), h));
        }
        let p = Arc::new(prepare_propagator(&h, &sectors)?);
        *guard = Some(p.clone());
        Ok((p, h))
    }

    pub fn len(&self) -> usize {
        self.slots.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A prepared scenario that can be evaluated at any time.
#[derive(Debug, Clone)]
pub struct Simulation {
    scenario: Scenario,
    descriptor: ScenarioDescriptor,
    trajectory: Trajectory,
    analyzer: BatteryAnalyzer,
    hamiltonian: SparseHermitian,
    energy0: f64,
    excitation0: f64,
}

impl Simulation {
    pub fn new(scenario: &Scenario, cache: &PropagatorCache) -> Result<Self> {
        let layout = scenario.model.layout()?;
        let charger = build_charger_state(&scenario.charger, layout.mode_cutoffs())?;
        let psi0 = PureState::empty_battery_with(layout, &charger)?;
        Self::build(scenario, psi0, charger.deficits.clone(), cache)
    }

    /// Starts from an arbitrary state instead of the one described by
    /// `scenario.charger`.
    pub fn from_state(
        scenario: &Scenario,
        psi0: PureState,
        cache: &PropagatorCache,
    ) -> Result<Self> {
        let deficits = vec![0.0; scenario.model.mode_cutoffs.len()];
        Self::build(scenario, psi0, deficits, cache)
    }

    fn build(
        scenario: &Scenario,
        psi0: PureState,
        deficits: Vec<f64>,
        cache: &PropagatorCache,
    ) -> Result<Self> {
        let (prop, hamiltonian) = cache.get(&scenario.model)?;
        let trajectory = Trajectory::new(&prop, &psi0)?;
        let analyzer = BatteryAnalyzer::new(psi0.layout(), scenario.model.omega0)?;
        let m = &scenario.model;
        Ok(Self {
            descriptor: ScenarioDescriptor {
                charger: scenario.charger,
                n_qubits: m.n_qubits,
                omega0: m.omega0,
                g: m.g,
                mode_cutoffs: m.mode_cutoffs.clone(),
                truncation_deficits: deficits,
                mean_photon_number: psi0.total_mean_photon_number(),
                normalization: scenario.normalization,
            },
            energy0: hamiltonian.expectation(psi0.amplitudes())?,
            excitation0: psi0.mean_excitation(),
            scenario: scenario.clone(),
            trajectory,
            analyzer,
            hamiltonian,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn descriptor(&self) -> &ScenarioDescriptor {
        &self.descriptor
    }

    pub fn state_at(&self, t: f64) -> PureState {
        self.trajectory.state_at(t)
    }

    fn check_conservation(&self, t: f64, psi: &PureState) -> Result<()> {
        let fail = |what: String| Err(Error::Invariant { t, what });
        let norm = psi.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return fail(format!("norm {norm} drifted from 1"));
        }
        let e = self.hamiltonian.expectation(psi.amplitudes())?;
        if (e - self.energy0).abs() > ENERGY_TOL * self.hamiltonian.norm_bound().max(1.0) {
            return fail(format!("<H> = {e} drifted from {}", self.energy0));
        }
        let n = psi.mean_excitation();
        if (n - self.excitation0).abs() > EXCITATION_TOL * self.excitation0.max(1.0) {
            return fail(format!("<N_exc> = {n} drifted from {}", self.excitation0));
        }
        Ok(())
    }

    fn checked_record(&self, t: f64, psi: &PureState, set: MetricSet) -> Result<MetricsRecord> {
        self.check_conservation(t, psi)?;
        let rec = self.analyzer.analyze(t, psi, set)?;
        rec.check(self.descriptor.n_qubits, set)?;
        Ok(rec)
    }

    /// Unnormalized record at time `t`, checked against all invariants.
    pub fn record_at(&self, t: f64, set: MetricSet) -> Result<MetricsRecord> {
        self.checked_record(t, &self.state_at(t), set)
    }

    /// Unnormalized records on the scenario grid.
    pub fn raw_series(&self, set: MetricSet) -> Result<Vec<MetricsRecord>> {
        let mut out = Vec::with_capacity(self.scenario.grid.len());
        self.trajectory
            .for_each_state(self.scenario.grid.values(), |_, t, psi| {
                out.push(self.checked_record(t, &psi, set)?);
                Ok(())
            })?;
        Ok(out)
    }

    /// Records on the scenario grid with the scenario normalization applied.
    pub fn series(&self, set: MetricSet) -> Result<MetricsSeries> {
        let raw = self.raw_series(set)?;
        Ok(self.normalize(raw))
    }

    fn normalize(&self, raw: Vec<MetricsRecord>) -> MetricsSeries {
        let (n, w) = (self.descriptor.n_qubits, self.descriptor.omega0);
        MetricsSeries {
            descriptor: self.descriptor.clone(),
            records: raw
                .iter()
                .map(|r| self.scenario.normalization.apply(r, n, w))
                .collect(),
        }
    }

    /// Maximum of `metric` over the grid, refined by golden-section search
    /// around the grid optimum. `records` must be the unnormalized series of
    /// this simulation.
    pub fn max_over_time(&self, records: &[MetricsRecord], metric: Metric) -> Result<Extremum> {
        self.extremum(records, metric, 1.0)
    }

    pub fn min_over_time(&self, records: &[MetricsRecord], metric: Metric) -> Result<Extremum> {
        let e = self.extremum(records, metric, -1.0)?;
        Ok(Extremum {
            value: -e.value,
            grid_value: -e.grid_value,
            ..e
        })
    }

    fn extremum(&self, records: &[MetricsRecord], metric: Metric, sign: f64) -> Result<Extremum> {
        let grid = self.scenario.grid.values();
        if records.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: records.len(),
            });
        }
        let set = if metric.needs_full() {
            MetricSet::Full
        } else {
            MetricSet::Thermodynamic
        };
        let f = |t: f64| -> Result<f64> {
            Ok(metric
                .of(&self.record_at(t, set)?)
                .map_or(f64::NEG_INFINITY, |v| sign * v))
        };
        let values: Vec<f64> = records
            .iter()
            .map(|r| metric.of(r).map_or(f64::NEG_INFINITY, |v| sign * v))
            .collect();
        refine_extremum(grid, &values, f)
    }
}

/// Golden-section refinement of the grid maximum of `values`, using `f` to
/// evaluate between grid points. The result never falls below the grid
/// maximum.
pub fn refine_extremum<F>(grid: &[f64], values: &[f64], mut f: F) -> Result<Extremum>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    let grid_value = values[best];
    let last = grid.len() - 1;
    let at_right_endpoint = best == last && last > 0;
    if !grid_value.is_finite() {
        return Ok(Extremum {
            t: 0.0,
            value: 0.0,
            grid_value: 0.0,
            at_right_endpoint: false,
        });
    }
    let flat = values.iter().all(|&v| v == grid_value);
    if flat || grid.len() < 2 {
        return Ok(Extremum {
            t: grid[best],
            value: grid_value,
            grid_value,
            at_right_endpoint,
        });
    }
    let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(last)]);
    let invphi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - invphi * (b - a);
    let mut d = a + invphi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    let (mut t_best, mut v_best) = (grid[best], grid_value);
    for _ in 0..200 {
        if (b - a) <= REFINE_REL_TOL * b.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d)?;
        }
    }
    for (t, v) in [(c, fc), (d, fd)] {
        if v > v_best {
            t_best = t;
            v_best = v;
        }
    }
    Ok(Extremum {
        t: t_best,
        value: v_best,
        grid_value,
        at_right_endpoint,
    })
}

/// Runs a scenario with its own propagator and returns the full normalized
/// series.
pub fn run_time_series(scenario: &Scenario) -> Result<MetricsSeries> {
    Simulation::new(scenario, &PropagatorCache::new())?.series(MetricSet::Full)
}

/// Model parameters shared by all points of a sweep or scaling study.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyBase {
    pub n_qubits: usize,
    pub omega0: f64,
    pub g: f64,
    pub grid: TimeGrid,
    /// Fock cutoff used for every mode instead of the default rule.
    pub cutoff: Option<usize>,
}

impl StudyBase {
    /// `N_B = 4`, `ω₀ = 1`, `g = 2ω₀` on the default grid.
    pub fn reproduction_default() -> Self {
        Self {
            n_qubits: 4,
            omega0: 1.0,
            g: 2.0,
            grid: TimeGrid::reproduction_default(1.0),
            cutoff: None,
        }
    }

    /// Mode cutoffs used for `family` over `alphas`: the override if set,
    /// otherwise the default rule at the largest `α`.
    pub fn cutoffs(&self, family: ChargerFamily, alphas: &[f64]) -> Result<Vec<usize>> {
        match self.cutoff {
            Some(c) => {
                let cut = vec![c; family.spec(1.0).n_modes()];
                check_cutoffs(&cut)?;
                Ok(cut)
            }
            None => family_cutoffs(family, alphas),
        }
    }
}

/// Default α values of a sweep: 0.1 to 3.0 in steps of 0.1.
pub fn default_sweep_alphas() -> Vec<f64> {
    (1..=30).map(|k| k as f64 / 10.0).collect()
}

/// Maxima of one charger family at one point of a study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyMaxima {
    pub family: ChargerFamily,
    pub power: Extremum,
    pub ergotropy: Extremum,
    pub energy: Extremum,
    pub mean_photon_number: f64,
}

/// One α of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    pub maxima: Vec<FamilyMaxima>,
}

impl SweepRow {
    pub fn get(&self, family: ChargerFamily) -> Option<&FamilyMaxima> {
        self.maxima.iter().find(|m| m.family == family)
    }

    /// `ℰ_max(family) − ℰ_max(single)`.
    pub fn delta_ergotropy(&self, family: ChargerFamily) -> Option<f64> {
        Some(self.get(family)?.ergotropy.value - self.get(ChargerFamily::Single)?.ergotropy.value)
    }

    /// `P_max(family) − P_max(single)`.
    pub fn delta_power(&self, family: ChargerFamily) -> Option<f64> {
        Some(self.get(family)?.power.value - self.get(ChargerFamily::Single)?.power.value)
    }

    /// `(P_max(family) − P_max(single)) / P_max(single)`.
    pub fn relative_power_gain(&self, family: ChargerFamily) -> Option<f64> {
        let single = self.get(ChargerFamily::Single)?.power.value;
        (single > 0.0)
            .then(|| self.delta_power(family).map(|d| d / single))
            .flatten()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub base: StudyBase,
    pub families: Vec<ChargerFamily>,
    pub rows: Vec<SweepRow>,
}

fn family_cutoffs(family: ChargerFamily, alphas: &[f64]) -> Result<Vec<usize>> {
    let mut cut = family.spec(0.0).default_cutoffs();
    for &a in alphas {
        for (c, d) in cut.iter_mut().zip(family.spec(a).default_cutoffs()) {
            *c = (*c).max(d);
        }
    }
    check_cutoffs(&cut)?;
    Ok(cut)
}

fn family_maxima(
    base: &StudyBase,
    family: ChargerFamily,
    alpha: f64,
    cutoffs: &[usize],
    cache: &PropagatorCache,
) -> Result<FamilyMaxima> {
    let scenario = Scenario::new(
        base.n_qubits,
        family.spec(alpha),
        base.omega0,
        base.grid.clone(),
    )?
    .with_coupling(base.g)
    .with_cutoffs(cutoffs)?;
    let sim = Simulation::new(&scenario, cache)?;
    let raw = sim.raw_series(MetricSet::Thermodynamic)?;
    Ok(FamilyMaxima {
        family,
        power: sim.max_over_time(&raw, Metric::Power)?,
        ergotropy: sim.max_over_time(&raw, Metric::Ergotropy)?,
        energy: sim.max_over_time(&raw, Metric::Energy)?,
        mean_photon_number: sim.descriptor().mean_photon_number,
    })
}

fn check_budgets(alpha: f64, maxima: &[FamilyMaxima]) -> Result<()> {
    let Some(single) = maxima.iter().find(|m| m.family == ChargerFamily::Single) else {
        return Ok(());
    };
    for m in maxima.iter().filter(|m| m.family.budget_matched()) {
        let gap = (m.mean_photon_number - single.mean_photon_number).abs();
        if gap > PHOTON_BUDGET_TOL * single.mean_photon_number.max(1.0) {
            return Err(Error::Invariant {
                t: 0.0,
                what: format!(
                    "photon budgets of single and {} differ by {gap:.3e} at alpha = {alpha}",
                    m.family.name()
                ),
            });
        }
    }
    Ok(())
}

fn validate_alphas(alphas: &[f64]) -> Result<()> {
    if alphas.is_empty() || alphas.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "alpha values must be non-negative, got {alphas:?}"
        )));
    }
    Ok(())
}

/// Cutoffs an [`alpha_sweep`] uses for each family. Families with the same
/// mode count get the elementwise maximum, so they share one propagator.
pub fn sweep_cutoffs(
    base: &StudyBase,
    families: &[ChargerFamily],
    alphas: &[f64],
) -> Result<BTreeMap<ChargerFamily, Vec<usize>>> {
    let mut by_modes: HashMap<usize, Vec<usize>> = HashMap::new();
    for &f in families {
        let c = base.cutoffs(f, alphas)?;
        let e = by_modes.entry(c.len()).or_insert_with(|| c.clone());
        for (x, y) in e.iter_mut().zip(&c) {
            *x = (*x).max(*y);
        }
    }
    Ok(families
        .iter()
        .map(|&f| (f, by_modes[&f.spec(1.0).n_modes()].clone()))
        .collect())
}

/// Maxima of power, ergotropy and energy for every family and α.
///
/// Families with the same mode count share one propagator, built at the
/// largest cutoff any α needs. Jobs run on the current rayon pool and are
/// merged in (α, family) order.
pub fn alpha_sweep(
    base: &StudyBase,
    families: &[ChargerFamily],
    alphas: &[f64],
    cache: &PropagatorCache,
) -> Result<SweepResult> {
    validate_alphas(alphas)?;
    let mut families = families.to_vec();
    families.sort();
    families.dedup();
    let cutoffs = sweep_cutoffs(base, &families, alphas)?;
    let jobs: Vec<(usize, ChargerFamily)> = (0..alphas.len())
        .flat_map(|i| families.iter().map(move |&f| (i, f)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(i, f)| family_maxima(base, f, alphas[i], &cutoffs[&f], cache))
        .collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<SweepRow> = alphas
        .iter()
        .map(|&alpha| SweepRow {
            alpha,
            maxima: Vec::new(),
        })
        .collect();
    for (&(i, _), m) in jobs.iter().zip(results) {
        rows[i].maxima.push(m);
    }
    for row in &rows {
        check_budgets(row.alpha, &row.maxima)?;
    }
    Ok(SweepResult {
        base: base.clone(),
        families,
        rows,
    })
}

/// One battery size of a scaling study.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub n_qubits: usize,
    pub maxima: Vec<FamilyMaxima>,
}

impl ScalingRow {
    pub fn get(&self, family: ChargerFamily) -> Option<&FamilyMaxima> {
        self.maxima.iter().find(|m| m.family == family)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingResult {
    pub alpha: f64,
    pub families: Vec<ChargerFamily>,
    pub rows: Vec<ScalingRow>,
}

/// Families compared in a scaling study by default: one charger, two
/// uncorrelated chargers and two correlated chargers.
pub const DEFAULT_SCALING_FAMILIES: [ChargerFamily; 3] = [
    ChargerFamily::Single,
    ChargerFamily::ProductOpposed,
    ChargerFamily::SemiBellPlus,
];

/// Maxima for every battery size in `sizes` at a fixed `α`. `base.n_qubits`
/// is ignored.
pub fn size_scaling(
    base: &StudyBase,
    sizes: &[usize],
    alpha: f64,
    families: &[ChargerFamily],
    cache: &PropagatorCache,
) -> Result<ScalingResult> {
    validate_alphas(&[alpha])?;
    if let Some(&n) = sizes.iter().find(|&&n| n == 0 || n > MAX_SCALING_QUBITS) {
        return Err(Error::ResourceGuard(format!(
            "battery size {n} outside [1, {MAX_SCALING_QUBITS}]"
        )));
    }
    let mut families = families.to_vec();
    families.sort();
    families.dedup();
    let jobs: Vec<(usize, ChargerFamily)> = sizes
        .iter()
        .flat_map(|&n| families.iter().map(move |&f| (n, f)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(n, f)| {
            let b = StudyBase {
                n_qubits: n,
                ..base.clone()
            };
            family_maxima(&b, f, alpha, &b.cutoffs(f, &[alpha])?, cache)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<ScalingRow> = sizes
        .iter()
        .map(|&n| ScalingRow {
            n_qubits: n,
            maxima: Vec::new(),
        })
        .collect();
    for (&(n, _), m) in jobs.iter().zip(results) {
        rows.iter_mut()
            .find(|r| r.n_qubits == n)
            .expect("size row")
            .maxima
            .push(m);
    }
    Ok(ScalingResult {
        alpha,
        families,
        rows,
    })
}
