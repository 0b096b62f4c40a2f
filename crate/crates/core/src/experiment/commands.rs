use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::godunov::{sample_measurements, simulate as run_godunov, Dataset, DensityField};
use crate::metrics::{error_distribution, stage_error_table, ErrorReport};
use crate::stacked::StackedPinn;
use crate::trainer::{sample_collocation, train, StopReason, TrainHistory};

use super::ExperimentConfig;

pub const FIELD_FILE: &str = "field.txt";
pub const DATASET_FILE: &str = "data.txt";
pub const RESOLVED_CONFIG_FILE: &str = "resolved_config.json";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const BOXPLOT_FILE: &str = "boxplot.csv";

/// Seed of the collocation set for a given training seed, kept apart from
/// the stream used to initialize the networks.
pub fn collocation_seed(seed: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0xC011)
}

pub fn run_tag(n: usize, seed: u64) -> String {
    format!("n{n}_seed{seed}")
}

pub fn checkpoint_path(out: &Path, n: usize, seed: u64) -> PathBuf {
    out.join(format!("model_{}.json", run_tag(n, seed)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationSummary {
    pub nx: usize,
    pub nt: usize,
    pub dx: f64,
    pub dt: f64,
    pub measurements: usize,
    pub field_path: PathBuf,
    pub dataset_path: PathBuf,
}

/// Simulates the scenario and writes the reference field, the boundary and
/// initial measurements, and the resolved configuration.
pub fn simulate(cfg: &ExperimentConfig, out: &Path) -> Result<SimulationSummary> {
    cfg.validate()?;
    fs::create_dir_all(out)?;
    let sc = &cfg.scenario;
    let flux = sc.flux()?;
    let field = run_godunov(
        &sc.initial.sample(&sc.grid),
        &sc.boundary_trace(),
        &sc.grid,
        &flux,
        sc.v_f,
    )?;
    let data = sample_measurements(&field, cfg.noise_std, cfg.noise_seed)?;
    let field_path = out.join(FIELD_FILE);
    let dataset_path = out.join(DATASET_FILE);
    field.save(&field_path)?;
    data.save(&dataset_path)?;
    fs::write(out.join(RESOLVED_CONFIG_FILE), cfg.resolved().to_json())?;
    Ok(SimulationSummary {
        nx: field.nx,
        nt: field.nt,
        dx: field.dx(),
        dt: field.dt(),
        measurements: data.len(),
        field_path,
        dataset_path,
    })
}

fn load_inputs(out: &Path) -> Result<(DensityField, Dataset)> {
    let field_path = out.join(FIELD_FILE);
    let dataset_path = out.join(DATASET_FILE);
    for p in [&field_path, &dataset_path] {
        if !p.exists() {
            return Err(Error::Config(format!(
                "{} not found; run `simulate` first",
                p.display()
            )));
        }
    }
    Ok((DensityField::load(&field_path)?, Dataset::load(&dataset_path)?))
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub n: usize,
    pub seed: u64,
    pub model: StackedPinn,
    pub history: TrainHistory,
    pub report: ErrorReport,
    pub stage_errors: Vec<(usize, f64)>,
}

/// Trains one stack with `n` residual blocks and the given seed, then
/// writes its checkpoint, loss history and error report.
pub fn train_one(cfg: &ExperimentConfig, out: &Path, n: usize, seed: u64) -> Result<TrainOutcome> {
    cfg.validate()?;
    let (field, data) = load_inputs(out)?;
    let flux = cfg.scenario.flux()?;
    let mut tc = cfg.train.clone();
    tc.n_blocks = n;
    tc.seed = seed;
    let colloc = sample_collocation(field.time, field.length, tc.n_collocation, collocation_seed(seed));
    let (model, history) = train(&tc, &flux, &data, &colloc)?;
    let report = error_distribution(&field, &model, n)?;
    let stage_errors = stage_error_table(&field, &model)?;

    let tag = run_tag(n, seed);
    model.save(&checkpoint_path(out, n, seed))?;
    history.save_csv(&out.join(format!("history_{tag}.csv")))?;
    fs::write(out.join(format!("report_{tag}.txt")), report_text(&report, &history))?;
    let mut table = String::from("stage,relative_l2\n");
    for (i, e) in &stage_errors {
        writeln!(table, "{i},{e:e}").unwrap();
    }
    fs::write(out.join(format!("stages_{tag}.csv")), table)?;
    Ok(TrainOutcome {
        n,
        seed,
        model,
        history,
        report,
        stage_errors,
    })
}

fn report_text(report: &ErrorReport, history: &TrainHistory) -> String {
    let mut s = report.to_text();
    let reason = match history.stop_reason {
        StopReason::MaxIters => "max-iters",
        StopReason::EarlyStop => "early-stop",
    };
    writeln!(s, "stop_reason = {reason}").unwrap();
    writeln!(s, "stop_iteration = {}", history.stop_iteration).unwrap();
    writeln!(s, "best_total_loss = {:e}", history.best_total).unwrap();
    s
}

/// Reloads a saved checkpoint and evaluates it against the stored field.
pub fn evaluate(out: &Path, n: usize, seed: u64) -> Result<ErrorReport> {
    let field = DensityField::load(&out.join(FIELD_FILE))?;
    let model = StackedPinn::load(&checkpoint_path(out, n, seed))?;
    error_distribution(&field, &model, model.n_blocks())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub seed: u64,
    pub relative_l2: f64,
    pub stop_iteration: usize,
    pub report: ErrorReport,
}

/// Trains every `(n, seed)` cell, writing per-cell artifacts, heatmap grids,
/// and the summary tables once all cells are done.
pub fn sweep<P>(cfg: &ExperimentConfig, out: &Path, mut progress: P) -> Result<Vec<SweepRow>>
where
    P: FnMut(&SweepRow),
{
    cfg.validate()?;
    let field = DensityField::load(&out.join(FIELD_FILE))?;
    let mut rows = Vec::new();
    for &n in &cfg.sweep {
        for &seed in &cfg.seeds {
            let outcome = train_one(cfg, out, n, seed)?;
            write_heatmaps(&field, &outcome.model, out, &run_tag(n, seed))?;
            let row = SweepRow {
                n,
                seed,
                relative_l2: outcome.report.relative_l2,
                stop_iteration: outcome.history.stop_iteration,
                report: outcome.report,
            };
            progress(&row);
            rows.push(row);
        }
    }
    let mut table = String::from("n,seed,relative_l2,stop_iteration\n");
    let mut boxes = String::from("n,seed,min,q1,median,q3,max\n");
    for r in &rows {
        writeln!(table, "{},{},{:e},{}", r.n, r.seed, r.relative_l2, r.stop_iteration).unwrap();
        let q = &r.report;
        writeln!(
            boxes,
            "{},{},{:e},{:e},{:e},{:e},{:e}",
            r.n, r.seed, q.min, q.q1, q.median, q.q3, q.max
        )
        .unwrap();
    }
    fs::write(out.join(SWEEP_FILE), table)?;
    fs::write(out.join(BOXPLOT_FILE), boxes)?;
    Ok(rows)
}

fn grid_csv(values: &[f64], nx: usize) -> String {
    let mut s = String::new();
    for row in values.chunks(nx) {
        let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

/// Final-stage prediction, its error against the field, and the scaled
/// first-block correction, each as an `(nt+1) × nx` CSV grid.
pub fn write_heatmaps(field: &DensityField, model: &StackedPinn, out: &Path, tag: &str) -> Result<()> {
    let n = model.n_blocks();
    let (pred, corrections) = model.predict_with_corrections(n, &field.nodes())?;
    let err: Vec<f64> = pred.iter().zip(field.values()).map(|(p, u)| p - u).collect();
    fs::write(out.join(format!("prediction_{tag}.csv")), grid_csv(&pred, field.nx))?;
    fs::write(out.join(format!("error_{tag}.csv")), grid_csv(&err, field.nx))?;
    if let Some(first) = corrections.first() {
        fs::write(out.join(format!("block1_{tag}.csv")), grid_csv(first, field.nx))?;
    }
    Ok(())
}
