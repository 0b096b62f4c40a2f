//! Training of stacked residual PINNs.
//!
//! The objective averages, over stages `i = 0..=n`, the data misfit plus
//! `λ` times the mean squared residual at viscosity `γ_i`, and adds
//! `Σ α_i²`. It is minimized with full-batch Adam at a fixed `λ` and stops on
//! the iteration budget or on a loss plateau.

mod adam;
mod collocation;
mod config;
mod early_stop;
mod loss;
mod objective;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use adam::Adam;
pub use collocation::sample_collocation;
pub use config::{TrainConfig, TrainingMode};
pub use early_stop::EarlyStopping;
pub use loss::{loss_data, loss_phy, total_loss, total_loss_gradient_tape, LossBreakdown};
pub use objective::Objective;

use crate::error::{Error, Result};
use crate::godunov::Dataset;
use crate::pde::{Flux, ViscositySchedule};
use crate::stacked::StackedPinn;

#[derive(Clone, Debug, PartialEq)]
pub struct HistoryRecord {
    pub iteration: usize,
    pub total: f64,
    pub data: Vec<f64>,
    pub phy: Vec<f64>,
    pub alphas: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    MaxIters,
    EarlyStop,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainHistory {
    pub records: Vec<HistoryRecord>,
    pub stop_reason: StopReason,
    /// Number of optimizer steps taken.
    pub stop_iteration: usize,
    /// Lowest objective seen; the returned model carries these parameters.
    pub best_total: f64,
}

impl TrainHistory {
    fn empty() -> Self {
        Self {
            records: Vec::new(),
            stop_reason: StopReason::MaxIters,
            stop_iteration: 0,
            best_total: f64::NAN,
        }
    }

    /// One line per record: `iter,total,data_0..n,phy_0..n,alpha_1..n`.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for r in &self.records {
            write!(s, "{},{:e}", r.iteration, r.total).unwrap();
            for v in r.data.iter().chain(&r.phy).chain(&r.alphas) {
                write!(s, ",{v:e}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Trains a freshly initialized model described by `cfg`.
pub fn train<F: Flux>(
    cfg: &TrainConfig,
    flux: &F,
    data: &Dataset,
    colloc: &[(f64, f64)],
) -> Result<(StackedPinn, TrainHistory)> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::Empty("measurement set"));
    }
    if colloc.is_empty() {
        return Err(Error::Empty("collocation set"));
    }
    let schedule = ViscositySchedule::new(cfg.gamma_init, cfg.p, cfg.n_blocks)?;
    let mut model = StackedPinn::init(
        &cfg.base_dims,
        &cfg.block_dims,
        cfg.activation,
        schedule,
        cfg.alpha_init,
        cfg.seed,
    )?;
    let mut history = TrainHistory::empty();
    if cfg.max_iters == 0 {
        return Ok((model, history));
    }
    let mut objective = Objective::new(&model, flux, cfg.lambda, &data.points, colloc)?;

    match cfg.training_mode {
        TrainingMode::Joint => {
            run_phase(cfg, &mut model, &mut objective, cfg.max_iters, None, &mut history)?;
        }
        TrainingMode::Sequential => {
            let stages = cfg.n_blocks + 1;
            let per_stage = (cfg.max_iters / stages).max(1);
            let layout = model.param_layout();
            for stage in 0..stages {
                objective.focus_stage(stage);
                let range = layout.stage_range(stage);
                run_phase(cfg, &mut model, &mut objective, per_stage, Some(range), &mut history)?;
            }
        }
    }
    Ok((model, history))
}

fn run_phase<F: Flux>(
    cfg: &TrainConfig,
    model: &mut StackedPinn,
    objective: &mut Objective<'_, F>,
    iters: usize,
    trainable: Option<std::ops::Range<usize>>,
    history: &mut TrainHistory,
) -> Result<()> {
    let offset = history.stop_iteration;
    let mut params = model.flatten();
    let mut grad = vec![0.0; params.len()];
    let mut adam = Adam::new(params.len(), cfg.lr);
    let mut stopper = EarlyStopping::new(cfg.patience_iters, cfg.patience_rel_tol);
    let mut best = (f64::INFINITY, params.clone());
    let mut stop = (StopReason::MaxIters, iters);
    let mut last: Option<HistoryRecord> = None;

    for iter in 0..iters {
        let global = offset + iter;
        model.set_flat(&params)?;
        grad.iter_mut().for_each(|g| *g = 0.0);
        let eval = objective.evaluate(model, Some(&mut grad))?;
        if !eval.total.is_finite() {
            return Err(Error::Divergence { iteration: global });
        }
        let record = HistoryRecord {
            iteration: global,
            total: eval.total,
            data: eval.data,
            phy: eval.phy,
            alphas: model.alphas(),
        };
        if iter % cfg.log_every == 0 {
            history.records.push(record);
        } else {
            last = Some(record);
        }
        if eval.total < best.0 {
            best.0 = eval.total;
            best.1.copy_from_slice(&params);
        }
        if stopper.update(iter, eval.total) {
            stop = (StopReason::EarlyStop, iter);
            break;
        }
        if let Some(range) = &trainable {
            for (k, g) in grad.iter_mut().enumerate() {
                if !range.contains(&k) {
                    *g = 0.0;
                }
            }
        }
        adam.step(&mut params, &grad)
            .map_err(|_| Error::Divergence { iteration: global })?;
    }
    if let Some(r) = last {
        if history.records.last().is_none_or(|l| l.iteration < r.iteration) {
            history.records.push(r);
        }
    }
    model.set_flat(&best.1)?;
    history.stop_reason = stop.0;
    history.stop_iteration = offset + stop.1;
    history.best_total = best.0;
    Ok(())
}
