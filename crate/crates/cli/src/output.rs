//! Tabular output and its CSV form.

use std::io::{Read, Write};

use qbattery::experiments::{FamilyMaxima, MetricsSeries, ScalingResult, SweepResult};
use qbattery::ChargerFamily;

use crate::CliError;

pub const SERIES_COLUMNS: [&str; 10] = [
    "t",
    "energy",
    "ergotropy",
    "power",
    "gamma",
    "purity",
    "entropy",
    "mutual_info",
    "consonance",
    "charger_entropy",
];

/// Column-named rows of numbers. Undefined entries are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    /// Exact equality that treats NaN entries in the same place as equal.
    pub fn same_as(&self, other: &Table) -> bool {
        self.columns == other.columns
            && self.rows.len() == other.rows.len()
            && self.rows.iter().zip(&other.rows).all(|(a, b)| {
                a.len() == b.len()
                    && a.iter()
                        .zip(b)
                        .all(|(x, y)| x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()))
            })
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), CliError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.columns)?;
        for row in &self.rows {
            out.write_record(row.iter().map(|&x| format_value(x)))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self, CliError> {
        let mut input = csv::Reader::from_reader(r);
        let columns = input.headers()?.iter().map(str::to_string).collect();
        let mut table = Table::new(columns);
        for rec in input.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|s| {
                    s.parse::<f64>().map_err(|e| {
                        std::io::Error::new(std::io::ErrorKind::InvalidData, format!("`{s}`: {e}"))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            table.rows.push(row);
        }
        Ok(table)
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_value(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x:.16e}")
    }
}

pub fn series_table(series: &MetricsSeries) -> Table {
    let mut t = Table::new(SERIES_COLUMNS.iter().map(|s| s.to_string()).collect());
    for r in &series.records {
        t.rows.push(vec![
            r.t,
            r.energy,
            r.ergotropy,
            r.power,
            r.gamma.unwrap_or(f64::NAN),
            r.purity,
            r.entropy,
            r.mutual_info,
            r.consonance,
            r.charger_entropy,
        ]);
    }
    t
}

/// Per-cell scaling of one family's maxima: energies by `N_B ω₀`, power by
/// `N_B ω₀²`.
fn scaled(m: &FamilyMaxima, n_qubits: usize, omega0: f64, per_cell: bool) -> [f64; 6] {
    let (e, p) = if per_cell {
        let n = n_qubits as f64;
        (n * omega0, n * omega0 * omega0)
    } else {
        (1.0, 1.0)
    };
    [
        m.power.value / p,
        m.power.t,
        m.ergotropy.value / e,
        m.ergotropy.t,
        m.energy.value / e,
        m.mean_photon_number,
    ]
}

fn family_columns(f: ChargerFamily) -> Vec<String> {
    [
        "power_max",
        "power_t",
        "ergotropy_max",
        "ergotropy_t",
        "energy_max",
        "photons",
    ]
    .iter()
    .map(|c| format!("{}_{c}", f.name()))
    .collect()
}

/// One row per `α`. Every family contributes its maxima; each family other
/// than the single charger also gets `δ` columns against it.
pub fn sweep_table(sweep: &SweepResult, per_cell: bool) -> Table {
    let others: Vec<ChargerFamily> = sweep
        .families
        .iter()
        .copied()
        .filter(|&f| f != ChargerFamily::Single)
        .collect();
    let mut columns = vec!["alpha".to_string()];
    for &f in &sweep.families {
        columns.extend(family_columns(f));
    }
    for f in &others {
        columns.push(format!("delta_ergotropy_{}", f.name()));
        columns.push(format!("delta_power_{}", f.name()));
        columns.push(format!("power_gain_{}", f.name()));
    }
    let (n, w) = (sweep.base.n_qubits, sweep.base.omega0);
    let (e, p) = if per_cell {
        (n as f64 * w, n as f64 * w * w)
    } else {
        (1.0, 1.0)
    };
    let mut t = Table::new(columns);
    for row in &sweep.rows {
        let mut v = vec![row.alpha];
        for &f in &sweep.families {
            let m = row.get(f).expect("family present in every row");
            v.extend(scaled(m, n, w, per_cell));
        }
        for &f in &others {
            v.push(row.delta_ergotropy(f).map_or(f64::NAN, |d| d / e));
            v.push(row.delta_power(f).map_or(f64::NAN, |d| d / p));
            v.push(row.relative_power_gain(f).unwrap_or(f64::NAN));
        }
        t.rows.push(v);
    }
    t
}

/// One row per battery size.
pub fn scaling_table(scaling: &ScalingResult, omega0: f64, per_cell: bool) -> Table {
    let mut columns = vec!["n_qubits".to_string()];
    for &f in &scaling.families {
        columns.extend(family_columns(f));
    }
    let mut t = Table::new(columns);
    for row in &scaling.rows {
        let mut v = vec![row.n_qubits as f64];
        for &f in &scaling.families {
            let m = row.get(f).expect("family present in every row");
            v.extend(scaled(m, row.n_qubits, omega0, per_cell));
        }
        t.rows.push(v);
    }
    t
}
