//! Exact simulation of a quantum battery of `N_B` two-level cells charged by
//! one or two resonant cavities.
//!
//! The model is the rotating-wave Tavis-Cummings Hamiltonian
//!
//! ```text
//! H = ω₀/2 Σ σ_z + Σ_j ω_j a_j† a_j + g Σ_{i,j} (σ_i⁺ a_j + σ_i⁻ a_j†)
//! ```
//!
//! on a truncated Fock space. Evolution is exact, through per-sector
//! diagonalization, and the battery state is analyzed for stored energy,
//! ergotropy, power, purity, entropy, mutual information and quantum
//! consonance.
//!
//! ```
//! use num_complex::Complex64;
//! use qbattery::experiments::{PropagatorCache, Scenario, Simulation};
//! use qbattery::{ChargerSpec, MetricSet, TimeGrid};
//!
//! let grid = TimeGrid::uniform(1.0, 11)?;
//! let charger = ChargerSpec::SemiBellPlus(Complex64::new(0.5, 0.0));
//! let scenario = Scenario::new(2, charger, 1.0, grid)?;
//! let sim = Simulation::new(&scenario, &PropagatorCache::new())?;
//! let series = sim.series(MetricSet::Full)?;
//! assert_eq!(series.records.len(), 11);
//! assert!(series.records.iter().all(|r| r.ergotropy <= r.energy + 1e-12));
//! # Ok::<(), qbattery::Error>(())
//! ```

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod hamiltonian;
pub mod hilbert;
pub mod metrics;
pub mod states;

pub use dynamics::{dense_oracle_evolve, prepare_propagator, Propagator, TimeGrid, Trajectory};
pub use error::{Error, Result};
pub use experiments::{ChargerFamily, MetricsSeries, Scenario, Simulation};
pub use hamiltonian::{
    build_battery_hamiltonian, build_total_hamiltonian, ModelConfig, SparseHermitian,
};
pub use hilbert::{partial_trace, BasisState, Block, DensityMatrix, GlobalState, SpaceLayout};
pub use metrics::{MetricSet, MetricsRecord};
pub use states::{build_initial_state, ChargerSpec, PureState};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/state-space.md")]
    mod state_space {}
    #[doc = include_str!("../../../book/src/charger-states.md")]
    mod charger_states {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
