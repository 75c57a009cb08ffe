use std::fs;
use std::path::Path;
use std::process::Command;

use qbattery_cli::output::{Table, SERIES_COLUMNS};
use qbattery_cli::{parse_config, run, Experiment};

fn qb(args: &[&str], config: &str, dir: &Path) -> (i32, String) {
    let path = dir.join("run.toml");
    fs::write(&path, config).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qb"))
        .args(args)
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .env("QB_WORKERS", "1")
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn read_table(path: &Path) -> Table {
    Table::read_csv(fs::File::open(path).unwrap()).unwrap()
}

#[test]
fn empty_single_charger_gives_zeros() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[model]\nn_qubits = 2\n[charger]\nkind = \"single\"\nalpha = 0.0\n[grid]\nt_max = 5.0\npoints = 51\n";
    let (code, err) = qb(&["series"], cfg, dir.path());
    assert_eq!(code, 0, "{err}");
    let t = read_table(&dir.path().join("out/series.csv"));
    assert_eq!(t.columns, SERIES_COLUMNS);
    assert_eq!(t.rows.len(), 51);
    for row in &t.rows {
        for (name, v) in SERIES_COLUMNS.iter().zip(row).skip(1) {
            match *name {
                "gamma" => assert!(v.is_nan()),
                "purity" => assert!((v - 1.0).abs() < 1e-12),
                _ => assert_eq!(*v, 0.0, "{name}"),
            }
        }
    }
    assert_eq!(fs::read_dir(dir.path().join("out")).unwrap().count(), 6);
}

#[test]
fn written_series_reads_back_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "[model]\nn_qubits = 2\n[charger]\nkind = \"semi_bell_plus\"\nalpha = 1.0\n[grid]\nt_max = 3.0\npoints = 31\n[output]\ndir = \"{}\"\nplots = false\n",
        dir.path().display()
    );
    let cfg = parse_config(&text, Some(Experiment::Series)).unwrap();
    let summary = run(&cfg).unwrap();
    assert!(summary.plots.is_empty());
    let back = read_table(&summary.csv);
    assert!(back.same_as(&summary.table));
    assert!(summary
        .table
        .column("energy")
        .unwrap()
        .iter()
        .any(|&e| e > 0.1));
}

#[test]
fn metadata_holds_everything_needed_to_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[model]\nn_qubits = 1\ng = 1.5\n[charger]\nkind = \"zeta\"\nalpha = 0.7\n[grid]\nt_max = 2.0\npoints = 21\n[output]\nper_cell = true\n";
    let (code, err) = qb(&["series", "--no-plots"], cfg, dir.path());
    assert_eq!(code, 0, "{err}");
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/series.json")).unwrap())
            .unwrap();
    let c = &meta["config"];
    assert_eq!(c["model"]["n_qubits"], 1);
    assert_eq!(c["model"]["g"], 1.5);
    assert_eq!(c["model"]["omega0"], 1.0);
    assert_eq!(c["charger"]["kinds"][0], "zeta");
    assert_eq!(c["charger"]["alphas"][0], 0.7);
    assert_eq!(c["grid"]["points"], 21);
    assert_eq!(meta["normalization"]["per_cell"], true);
    let s = &meta["scenarios"][0];
    assert_eq!(s["mode_cutoffs"], serde_json::json!([20, 20]));
    assert_eq!(s["truncation_deficits"].as_array().unwrap().len(), 2);
    assert!(meta["version"].is_string());
    assert!(!dir.path().join("out/series_energy.svg").exists());
}

#[test]
fn sweep_has_one_row_per_alpha_with_deltas() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[model]\nn_qubits = 1\n[charger]\nkind = \"product_in_phase\"\nalpha = [0.5, 1.5, 2.5]\n[grid]\nt_max = 3.0\npoints = 121\n";
    let (code, err) = qb(&["sweep"], cfg, dir.path());
    assert_eq!(code, 0, "{err}");
    let t = read_table(&dir.path().join("out/sweep.csv"));
    assert_eq!(t.column("alpha").unwrap(), vec![0.5, 1.5, 2.5]);
    let single = t.column("single_power_max").unwrap();
    let pair = t.column("product_in_phase_power_max").unwrap();
    let delta = t.column("delta_power_product_in_phase").unwrap();
    for ((s, p), d) in single.iter().zip(&pair).zip(&delta) {
        assert_eq!(*d, p - s);
    }
    assert!(t.column("delta_ergotropy_product_in_phase").is_some());
    assert!(dir.path().join("out/sweep_delta.svg").exists());
}

#[test]
fn scaling_has_one_row_per_size() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[charger]\nkind = [\"single\", \"semi_bell_plus\"]\nalpha = 0.5\n[scaling]\nsizes = [1, 2]\n[grid]\nt_max = 2.0\npoints = 41\n";
    let (code, err) = qb(&["scaling", "--no-plots"], cfg, dir.path());
    assert_eq!(code, 0, "{err}");
    let t = read_table(&dir.path().join("out/scaling.csv"));
    assert_eq!(t.column("n_qubits").unwrap(), vec![1.0, 2.0]);
    assert!(t.column("semi_bell_plus_ergotropy_max").is_some());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = qb(&["series"], "[charger]\n", dir.path());
    assert_eq!(code, 2);
    assert!(err.contains("charger.kind required"), "{err}");

    let (code, _) = qb(
        &["series"],
        "[charger]\nkind = \"single\"\nalpha = 1.0\ncolour = 1\n",
        dir.path(),
    );
    assert_eq!(code, 2);

    let (code, err) = qb(
        &["series"],
        "[model]\ncutoff = 500\n[charger]\nkind = \"single\"\nalpha = 1.0\n",
        dir.path(),
    );
    assert_eq!(code, 4, "{err}");

    let (code, err) = qb(
        &["series"],
        "[model]\nn_qubits = 6\ncutoff = 200\n[charger]\nkind = \"zeta\"\nalpha = 1.0\n",
        dir.path(),
    );
    assert_eq!(code, 4, "{err}");

    let (code, _) = qb(
        &["scaling"],
        "[charger]\nkind = \"single\"\nalpha = 1.0\n[scaling]\nsizes = [9]\n",
        dir.path(),
    );
    assert_eq!(code, 4);
}

#[test]
fn invariant_failures_map_to_exit_code_three() {
    let e = qbattery_cli::CliError::from(qbattery::Error::Invariant {
        t: 1.0,
        what: "norm drift".into(),
    });
    assert_eq!(e.exit_code(), 3);
}

#[test]
fn worker_count_must_be_positive() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.toml"),
        "[charger]\nkind = \"single\"\nalpha = 0.0\n",
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qb"))
        .args(["series", "--config"])
        .arg(dir.path().join("run.toml"))
        .env("QB_WORKERS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
