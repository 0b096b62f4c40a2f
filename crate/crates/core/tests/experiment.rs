//! Experiment commands and the command-line front end.

use std::fs;
use std::path::Path;
use std::process::Command;

use vspinn::experiment::{
    self, checkpoint_path, ExperimentConfig, BOXPLOT_FILE, DATASET_FILE, FIELD_FILE, SWEEP_FILE,
};
use vspinn::godunov::{DensityField, GridSpec, InitialProfile};

/// A configuration small enough to train in well under a second per run.
fn quick_config(iters: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.scenario.grid = GridSpec {
        nx: 40,
        ..GridSpec::default()
    };
    cfg.train.base_dims = vec![2, 6, 6, 1];
    cfg.train.block_dims = vec![3, 6, 6, 1];
    cfg.train.max_iters = iters;
    cfg.train.n_collocation = 200;
    cfg.train.log_every = 5;
    cfg.train.lr = 1e-2;
    cfg
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn default_simulation_writes_every_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::default();
    let summary = experiment::simulate(&cfg, dir.path()).unwrap();
    assert_eq!((summary.nx, summary.nt), (200, 223));
    assert_eq!(summary.measurements, 200 + 2 * 224);
    let field = DensityField::load(&dir.path().join(FIELD_FILE)).unwrap();
    assert_eq!(field.values().len(), 224 * 200);
    let text = fs::read_to_string(dir.path().join(FIELD_FILE)).unwrap();
    assert_eq!(text.lines().count(), 1 + 224);

    let again = tempfile::tempdir().unwrap();
    experiment::simulate(&cfg, again.path()).unwrap();
    for name in [FIELD_FILE, DATASET_FILE] {
        assert_eq!(read(dir.path(), name), read(again.path(), name));
    }
}

#[test]
fn constant_scenario_gives_a_constant_field() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = quick_config(0);
    cfg.scenario.initial = InitialProfile::Constant { value: 0.42 };
    experiment::simulate(&cfg, dir.path()).unwrap();
    let field = DensityField::load(&dir.path().join(FIELD_FILE)).unwrap();
    assert!(field.values().iter().all(|&v| v == 0.42));
}

#[test]
fn train_then_evaluate_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(40);
    experiment::simulate(&cfg, dir.path()).unwrap();
    let outcome = experiment::train_one(&cfg, dir.path(), 0, 3).unwrap();
    assert!(outcome.report.relative_l2.is_finite());
    assert!(checkpoint_path(dir.path(), 0, 3).exists());
    let reloaded = experiment::evaluate(dir.path(), 0, 3).unwrap();
    assert_eq!(reloaded, outcome.report);

    let history = fs::read_to_string(dir.path().join("history_n0_seed3.csv")).unwrap();
    assert_eq!(history.lines().count(), outcome.history.records.len());
    // Iterations 0, 5, ..., 35 plus the final iteration 39.
    assert_eq!(outcome.history.records.len(), 9);
    assert_eq!(outcome.history.records.last().unwrap().iteration, 39);
    let report = fs::read_to_string(dir.path().join("report_n0_seed3.txt")).unwrap();
    assert!(report.contains("relative_l2"));
    assert_eq!(outcome.stage_errors.len(), 1);
}

#[test]
fn training_without_inputs_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(experiment::train_one(&quick_config(5), dir.path(), 0, 0).is_err());
}

#[test]
fn sweep_rows_heatmaps_and_consistency_with_single_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = quick_config(6);
    experiment::simulate(&cfg, dir.path()).unwrap();
    let mut seen = 0;
    let rows = experiment::sweep(&cfg, dir.path(), |_| seen += 1).unwrap();
    assert_eq!(rows.len(), 12);
    assert_eq!(seen, 12);
    let table = fs::read_to_string(dir.path().join(SWEEP_FILE)).unwrap();
    assert_eq!(table.lines().count(), 13);
    assert_eq!(fs::read_to_string(dir.path().join(BOXPLOT_FILE)).unwrap().lines().count(), 13);

    let field = DensityField::load(&dir.path().join(FIELD_FILE)).unwrap();
    let grid = fs::read_to_string(dir.path().join("prediction_n3_seed1.csv")).unwrap();
    assert_eq!(grid.lines().count(), field.nt + 1);
    assert!(grid.lines().all(|l| l.split(',').count() == field.nx));
    assert!(dir.path().join("block1_n5_seed2.csv").exists());
    assert!(!dir.path().join("block1_n0_seed0.csv").exists());

    let single = experiment::train_one(&cfg, dir.path(), 3, 1).unwrap();
    let row = rows.iter().find(|r| r.n == 3 && r.seed == 1).unwrap();
    assert_eq!(single.report.relative_l2.to_bits(), row.relative_l2.to_bits());

    cfg.sweep = vec![0];
    cfg.seeds = vec![7];
    assert_eq!(experiment::sweep(&cfg, dir.path(), |_| {}).unwrap().len(), 1);
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_vspinn")).args(args).output().unwrap()
}

#[test]
fn command_line_runs_each_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    let mut cfg = quick_config(10);
    cfg.sweep = vec![0, 1];
    cfg.seeds = vec![0];
    fs::write(&cfg_path, cfg.to_json()).unwrap();
    let out = dir.path().join("run");
    let (c, o) = (cfg_path.to_str().unwrap(), out.to_str().unwrap());

    let status = |args: &[&str]| {
        let r = cli(args);
        assert!(r.status.success(), "{args:?}: {}", String::from_utf8_lossy(&r.stderr));
        String::from_utf8(r.stdout).unwrap()
    };
    status(&["simulate", "--config", c, "--out", o, "--quiet"]);
    status(&["train", "--config", c, "--out", o, "--n", "1", "--seed", "2", "--quiet"]);
    let eval = status(&["evaluate", "--config", c, "--out", o, "--n", "1", "--seed", "2"]);
    assert!(eval.contains("relative_l2"));
    status(&["sweep", "--config", c, "--out", o, "--quiet"]);
    assert!(out.join(SWEEP_FILE).exists());

    let missing = cli(&["evaluate", "--out", dir.path().join("nowhere").to_str().unwrap(), "--n", "0"]);
    assert_eq!(missing.status.code(), Some(1));
    let bad = cli(&["train", "--config", dir.path().join("absent.json").to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn configuration_rejects_unknown_keys_and_bad_values() {
    assert!(ExperimentConfig::from_json(r#"{"train": {"max_iter": 5}}"#).is_err());
    assert!(ExperimentConfig::from_json(r#"{"train": {"lr": -1.0}}"#).is_err());
    assert!(ExperimentConfig::from_json(r#"{"noise_std": -0.1}"#).is_err());
    let cfg = ExperimentConfig::from_json(r#"{"train": {"max_iters": 5}}"#).unwrap();
    assert_eq!(cfg.train.max_iters, 5);
    assert_eq!(cfg.train.n_collocation, 10_000);
    let round = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
    assert_eq!(round, cfg);
}
