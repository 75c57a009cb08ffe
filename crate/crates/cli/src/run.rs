//! Experiment dispatch and output files.

use std::fs;
use std::path::{Path, PathBuf};

use qbattery::experiments::{
    alpha_sweep, size_scaling, Extremum, FamilyMaxima, Normalization, PropagatorCache, Scenario,
    Simulation,
};
use qbattery::states::build_charger_state;
use qbattery::{ChargerSpec, MetricSet};
use serde_json::{json, Value};

use crate::config::{Experiment, RunConfig};
use crate::output::{scaling_table, series_table, sweep_table, Table};
use crate::plot::{Figure, Line};
use crate::CliError;

/// Files written by a run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub csv: PathBuf,
    pub metadata: PathBuf,
    pub plots: Vec<PathBuf>,
    pub table: Table,
    /// Maxima that sit on the last grid point.
    pub warnings: Vec<String>,
}

fn spec_json(spec: &ChargerSpec) -> Value {
    let c = |z: num_complex::Complex64| json!([z.re, z.im]);
    match *spec {
        ChargerSpec::Single(a) => json!({ "kind": "single", "alpha": c(a) }),
        ChargerSpec::ProductPair(a, b) => {
            json!({ "kind": "product_pair", "alpha1": c(a), "alpha2": c(b) })
        }
        ChargerSpec::SemiBellPlus(a) => json!({ "kind": "semi_bell_plus", "alpha": c(a) }),
        ChargerSpec::SemiBellMinus(a) => json!({ "kind": "semi_bell_minus", "alpha": c(a) }),
        ChargerSpec::Zeta(a) => json!({ "kind": "zeta", "alpha": c(a) }),
    }
}

/// Values below this are roundoff and their position carries no meaning.
const NEGLIGIBLE: f64 = 1e-12;

fn flag(warnings: &mut Vec<String>, what: &str, at: &str, e: &Extremum) {
    if e.at_right_endpoint && e.value.abs() > NEGLIGIBLE {
        warnings.push(format!(
            "{what} maximum at {at} lies on the end of the time window"
        ));
    }
}

fn flag_maxima(warnings: &mut Vec<String>, m: &FamilyMaxima, at: &str) {
    let at = format!("{at}, {}", m.family.name());
    flag(warnings, "power", &at, &m.power);
    flag(warnings, "ergotropy", &at, &m.ergotropy);
    flag(warnings, "energy", &at, &m.energy);
}

fn write_svg(dir: &Path, name: &str, fig: &Figure, out: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let p = dir.join(name);
    fs::write(&p, fig.to_svg())?;
    out.push(p);
    Ok(())
}

/// Runs the configured experiment and writes its CSV, metadata sidecar and,
/// unless disabled, SVG plots into the output directory.
pub fn run(cfg: &RunConfig) -> Result<RunSummary, CliError> {
    let cache = PropagatorCache::new();
    let grid = cfg.time_grid()?;
    let per_cell = cfg.output.per_cell;
    let mut warnings = Vec::new();
    let mut figures: Vec<(String, Figure)> = Vec::new();
    let energy_unit = if per_cell {
        "per cell, units of ω₀"
    } else {
        "units of ω₀"
    };

    let (table, scenarios) = match cfg.experiment {
        Experiment::Series => {
            let spec = cfg.series_spec();
            let cutoffs = &cfg.mode_cutoffs[&cfg.charger.kinds[0]];
            let scenario = Scenario::new(cfg.model.n_qubits, spec, cfg.model.omega0, grid)?
                .with_coupling(cfg.model.g)
                .with_cutoffs(cutoffs)?
                .with_normalization(Normalization { per_cell });
            let series = Simulation::new(&scenario, &cache)?.series(MetricSet::Full)?;
            let table = series_table(&series);
            let d = &series.descriptor;
            let scenarios = json!([{
                "charger": spec_json(&d.charger),
                "n_qubits": d.n_qubits,
                "mode_cutoffs": d.mode_cutoffs,
                "truncation_deficits": d.truncation_deficits,
                "mean_photon_number": d.mean_photon_number,
            }]);
            let t = table.column("t").expect("t column");
            let col = |c: &str| table.column(c).expect("series column");
            let x = "ω₀t";
            figures.push((
                "energy".into(),
                Figure::new(
                    format!("Stored energy and ergotropy, {}", spec.name()),
                    x,
                    energy_unit,
                )
                .line(Line::new("energy", &t, &col("energy")))
                .line(Line::new("ergotropy", &t, &col("ergotropy"))),
            ));
            figures.push((
                "power".into(),
                Figure::new("Average charging power", x, "power").line(Line::new(
                    "power",
                    &t,
                    &col("power"),
                )),
            ));
            figures.push((
                "gamma".into(),
                Figure::new("Extractable fraction", x, "ergotropy / energy").line(Line::new(
                    "gamma",
                    &t,
                    &col("gamma"),
                )),
            ));
            figures.push((
                "correlations".into(),
                Figure::new("Purity, entropy and correlations", x, "value")
                    .line(Line::new("purity", &t, &col("purity")))
                    .line(Line::new("entropy", &t, &col("entropy")))
                    .line(Line::new("mutual_info", &t, &col("mutual_info")))
                    .line(Line::new("consonance", &t, &col("consonance")))
                    .line(Line::new("charger_entropy", &t, &col("charger_entropy"))),
            ));
            (table, scenarios)
        }
        Experiment::Sweep => {
            let base = cfg.study_base()?;
            let families = cfg.families();
            let sweep = alpha_sweep(&base, &families, &cfg.charger.alphas, &cache)?;
            let mut scenarios = Vec::new();
            for row in &sweep.rows {
                for m in &row.maxima {
                    flag_maxima(&mut warnings, m, &format!("alpha = {}", row.alpha));
                    let spec = m.family.spec(row.alpha);
                    let cutoffs = &cfg.mode_cutoffs[m.family.name()];
                    scenarios.push(json!({
                        "family": m.family.name(),
                        "charger": spec_json(&spec),
                        "n_qubits": base.n_qubits,
                        "mode_cutoffs": cutoffs,
                        "truncation_deficits": build_charger_state(&spec, cutoffs)?.deficits,
                        "mean_photon_number": m.mean_photon_number,
                    }));
                }
            }
            let table = sweep_table(&sweep, per_cell);
            let a = table.column("alpha").expect("alpha column");
            let mut power = Figure::new("Maximum power", "α", "P_max");
            let mut ergo = Figure::new("Maximum ergotropy", "α", energy_unit);
            let mut delta = Figure::new("Ergotropy difference to a single charger", "α", "δℰ");
            for f in &sweep.families {
                let n = f.name();
                power = power.line(Line::new(
                    n,
                    &a,
                    &table.column(&format!("{n}_power_max")).unwrap(),
                ));
                ergo = ergo.line(Line::new(
                    n,
                    &a,
                    &table.column(&format!("{n}_ergotropy_max")).unwrap(),
                ));
                if let Some(d) = table.column(&format!("delta_ergotropy_{n}")) {
                    delta = delta.line(Line::new(n, &a, &d));
                }
            }
            figures.push(("power".into(), power));
            figures.push(("ergotropy".into(), ergo));
            if !delta.lines.is_empty() {
                figures.push(("delta".into(), delta));
            }
            (table, Value::Array(scenarios))
        }
        Experiment::Scaling => {
            let base = cfg.study_base()?;
            let families = cfg.families();
            let alpha = cfg.charger.alphas[0];
            let scaling = size_scaling(&base, &cfg.sizes, alpha, &families, &cache)?;
            let mut scenarios = Vec::new();
            for row in &scaling.rows {
                for m in &row.maxima {
                    flag_maxima(&mut warnings, m, &format!("N_B = {}", row.n_qubits));
                    let spec = m.family.spec(alpha);
                    let cutoffs = &cfg.mode_cutoffs[m.family.name()];
                    scenarios.push(json!({
                        "family": m.family.name(),
                        "charger": spec_json(&spec),
                        "n_qubits": row.n_qubits,
                        "mode_cutoffs": cutoffs,
                        "truncation_deficits": build_charger_state(&spec, cutoffs)?.deficits,
                        "mean_photon_number": m.mean_photon_number,
                    }));
                }
            }
            let table = scaling_table(&scaling, cfg.model.omega0, per_cell);
            let n = table.column("n_qubits").expect("n_qubits column");
            let mut power = Figure::new(format!("Maximum power, α = {alpha}"), "N_B", "P_max");
            let mut ergo = Figure::new(
                format!("Maximum ergotropy, α = {alpha}"),
                "N_B",
                energy_unit,
            );
            for f in &scaling.families {
                let name = f.name();
                power = power.line(Line::new(
                    name,
                    &n,
                    &table.column(&format!("{name}_power_max")).unwrap(),
                ));
                ergo = ergo.line(Line::new(
                    name,
                    &n,
                    &table.column(&format!("{name}_ergotropy_max")).unwrap(),
                ));
            }
            figures.push(("power".into(), power));
            figures.push(("ergotropy".into(), ergo));
            (table, Value::Array(scenarios))
        }
    };

    let dir = &cfg.output.dir;
    fs::create_dir_all(dir)?;
    let stem = cfg.experiment.name();
    let csv = dir.join(format!("{stem}.csv"));
    table.write_csv(fs::File::create(&csv)?)?;

    let metadata = dir.join(format!("{stem}.json"));
    let meta = json!({
        "tool": "qb",
        "version": env!("CARGO_PKG_VERSION"),
        "experiment": stem,
        "config": cfg,
        "grid": {
            "t_min": 0.0,
            "t_max": cfg.grid.t_max,
            "points": cfg.grid.points,
            "spacing": cfg.grid.t_max / (cfg.grid.points - 1) as f64,
        },
        "normalization": { "per_cell": per_cell },
        "scenarios": scenarios,
        "columns": table.columns,
        "warnings": warnings,
    });
    fs::write(&metadata, serde_json::to_string_pretty(&meta)? + "\n")?;

    let mut plots = Vec::new();
    if cfg.output.plots {
        for (name, fig) in &figures {
            write_svg(dir, &format!("{stem}_{name}.svg"), fig, &mut plots)?;
        }
    }

    Ok(RunSummary {
        csv,
        metadata,
        plots,
        table,
        warnings,
    })
}
