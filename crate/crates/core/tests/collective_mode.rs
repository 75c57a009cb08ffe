//! At resonance with uniform coupling the battery sees only the symmetric
//! mode `(a₁ + a₂)/√2`, coupled with strength `√2 g`. Two chargers therefore
//! reduce to one, which gives closed relations between scenarios.

use num_complex::Complex64;
use qbattery::experiments::{ChargerFamily, PropagatorCache, Scenario, Simulation};
use qbattery::states::coherent_amplitudes;
use qbattery::{ChargerSpec, MetricSet, PureState, SpaceLayout, TimeGrid};

fn sim(
    n_qubits: usize,
    spec: ChargerSpec,
    grid: TimeGrid,
    cutoffs: &[usize],
    cache: &PropagatorCache,
) -> Simulation {
    let s = Scenario::new(n_qubits, spec, 1.0, grid)
        .unwrap()
        .with_cutoffs(cutoffs)
        .unwrap();
    Simulation::new(&s, cache).unwrap()
}

#[test]
fn in_phase_pair_is_a_single_charger_at_rescaled_time() {
    let cache = PropagatorCache::new();
    let alpha = 1.2;
    let ts: Vec<f64> = (0..40).map(|k| 0.05 * k as f64).collect();
    let scaled: Vec<f64> = ts.iter().map(|t| t * std::f64::consts::SQRT_2).collect();
    let pair = sim(
        3,
        ChargerFamily::ProductInPhase.spec(alpha),
        TimeGrid::new(ts).unwrap(),
        &[25, 25],
        &cache,
    );
    let single = sim(
        3,
        ChargerFamily::Single.spec(alpha),
        TimeGrid::new(scaled).unwrap(),
        &[40],
        &cache,
    );
    let a = pair.raw_series(MetricSet::Full).unwrap();
    let b = single.raw_series(MetricSet::Full).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!(
            (x.energy - y.energy).abs() < 1e-9,
            "{} vs {}",
            x.energy,
            y.energy
        );
        assert!((x.ergotropy - y.ergotropy).abs() < 1e-9);
        assert!((x.entropy - y.entropy).abs() < 1e-8);
        assert!((x.purity - y.purity).abs() < 1e-9);
    }
}

#[test]
fn opposed_pair_never_charges() {
    let cache = PropagatorCache::new();
    let grid = TimeGrid::uniform(5.0, 201).unwrap();
    let s = sim(
        2,
        ChargerFamily::ProductOpposed.spec(1.0),
        grid,
        &[20, 20],
        &cache,
    );
    for r in s.raw_series(MetricSet::Full).unwrap() {
        assert!(r.energy.abs() < 1e-12 && r.ergotropy.abs() < 1e-12);
        assert!((r.purity - 1.0).abs() < 1e-12);
    }
}

/// Battery ground state times the normalized single-mode state
/// `Σ_k w_k |β_k⟩`.
fn single_mode_superposition(n_qubits: usize, cutoff: usize, branches: &[(f64, f64)]) -> PureState {
    let layout = SpaceLayout::new(n_qubits, &[cutoff]).unwrap();
    let mut amps = vec![Complex64::new(0.0, 0.0); layout.total_dim()];
    for &(w, beta) in branches {
        let c = coherent_amplitudes(Complex64::new(beta, 0.0), cutoff).unwrap();
        for (a, z) in amps.iter_mut().zip(c.amplitudes) {
            *a += z * w;
        }
    }
    PureState::normalized(layout, amps).unwrap()
}

fn compare_with_reduced(family: ChargerFamily, alpha: f64, reduced: PureState) {
    let cache = PropagatorCache::new();
    let ts: Vec<f64> = (0..41).map(|k| 0.05 * k as f64).collect();
    let scaled: Vec<f64> = ts.iter().map(|t| t * std::f64::consts::SQRT_2).collect();
    let n = reduced.layout().n_qubits();
    let pair = sim(
        n,
        family.spec(alpha),
        TimeGrid::new(ts).unwrap(),
        &[22, 22],
        &cache,
    )
    .raw_series(MetricSet::Full)
    .unwrap();
    let cutoff = reduced.layout().mode_cutoffs()[0];
    let s = Scenario::new(
        n,
        ChargerSpec::Single(Complex64::new(0.0, 0.0)),
        1.0,
        TimeGrid::new(scaled).unwrap(),
    )
    .unwrap()
    .with_cutoffs(&[cutoff])
    .unwrap();
    let single = Simulation::from_state(&s, reduced, &cache)
        .unwrap()
        .raw_series(MetricSet::Full)
        .unwrap();
    for (x, y) in pair.iter().zip(&single) {
        assert!(
            (x.energy - y.energy).abs() < 1e-8,
            "{}: {} vs {}",
            family.name(),
            x.energy,
            y.energy
        );
        assert!((x.ergotropy - y.ergotropy).abs() < 1e-8);
        assert!((x.purity - y.purity).abs() < 1e-8);
    }
    assert!(pair.iter().any(|r| r.energy > 1e-3));
}

#[test]
fn semi_bell_plus_is_an_even_cat_in_the_symmetric_mode() {
    let b = 0.9 * std::f64::consts::SQRT_2;
    compare_with_reduced(
        ChargerFamily::SemiBellPlus,
        0.9,
        single_mode_superposition(2, 40, &[(1.0, b), (1.0, -b)]),
    );
}

#[test]
fn semi_bell_minus_is_an_odd_cat_in_the_symmetric_mode() {
    let b = 0.9 * std::f64::consts::SQRT_2;
    compare_with_reduced(
        ChargerFamily::SemiBellMinus,
        0.9,
        single_mode_superposition(2, 40, &[(1.0, b), (-1.0, -b)]),
    );
}

#[test]
fn zeta_leaves_a_coherent_symmetric_mode() {
    let b = 1.1 / std::f64::consts::SQRT_2;
    compare_with_reduced(
        ChargerFamily::Zeta,
        1.1,
        single_mode_superposition(2, 40, &[(1.0, b)]),
    );
}
