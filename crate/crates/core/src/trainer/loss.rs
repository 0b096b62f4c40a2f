//! Point-by-point reference implementations of the training losses.
//!
//! These evaluate the model one point at a time through the scalar and
//! jet paths. Training uses the batched [`Objective`](super::Objective),
//! which must agree with these.

use crate::autodiff::{grad_params, Scalar};
use crate::error::{Error, Result};
use crate::godunov::Dataset;
use crate::pde::{residual, Flux};
use crate::stacked::StackedPinn;

/// Components of the averaged multi-stage objective.
#[derive(Clone, Debug, PartialEq)]
pub struct LossBreakdown {
    pub total: f64,
    /// Mean squared data misfit of each stage.
    pub data: Vec<f64>,
    /// Mean squared residual of each stage.
    pub phy: Vec<f64>,
    /// `Σ α_i²`.
    pub penalty: f64,
}

impl LossBreakdown {
    /// Combines per-stage components: `(1/(n+1)) Σ (data_i + λ phy_i) + penalty`.
    pub fn assemble(data: Vec<f64>, phy: Vec<f64>, penalty: f64, lambda: f64) -> Self {
        let weight = 1.0 / data.len() as f64;
        let mut total = 0.0;
        for (d, r) in data.iter().zip(&phy) {
            total += weight * (d + lambda * r);
        }
        Self {
            total: total + penalty,
            data,
            phy,
            penalty,
        }
    }
}

pub fn loss_data(model: &StackedPinn, stage: usize, data: &Dataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Empty("measurement set"));
    }
    let mut sum = 0.0;
    for m in &data.points {
        let e = m.u - model.eval_stage(stage, m.t, m.x)?;
        sum += e * e;
    }
    Ok(sum / data.len() as f64)
}

pub fn loss_phy<F: Flux>(
    model: &StackedPinn,
    stage: usize,
    gamma: f64,
    flux: &F,
    colloc: &[(f64, f64)],
) -> Result<f64> {
    if colloc.is_empty() {
        return Err(Error::Empty("collocation set"));
    }
    let mut sum = 0.0;
    for &(t, x) in colloc {
        let r = residual(model.eval_stage_jet(stage, t, x)?, flux, gamma);
        sum += r * r;
    }
    Ok(sum / colloc.len() as f64)
}

/// `1/(n+1) Σ_i [L_data(i) + λ L_phy(i, γ_i)] + Σ α_i²`.
pub fn total_loss<F: Flux>(
    model: &StackedPinn,
    data: &Dataset,
    colloc: &[(f64, f64)],
    lambda: f64,
    flux: &F,
) -> Result<LossBreakdown> {
    let gammas = model.schedule().stage_viscosities();
    let mut data_terms = Vec::with_capacity(gammas.len());
    let mut phy_terms = Vec::with_capacity(gammas.len());
    for (i, &g) in gammas.iter().enumerate() {
        data_terms.push(loss_data(model, i, data)?);
        phy_terms.push(loss_phy(model, i, g, flux, colloc)?);
    }
    let penalty = model.alphas().iter().map(|a| a * a).sum();
    Ok(LossBreakdown::assemble(data_terms, phy_terms, penalty, lambda))
}

/// Total loss and its gradient over the flat parameter vector, recorded
/// on a scalar tape. Exact but slow; meant for small models.
pub fn total_loss_gradient_tape<F: Flux>(
    model: &StackedPinn,
    data: &Dataset,
    colloc: &[(f64, f64)],
    lambda: f64,
    flux: &F,
) -> Result<(f64, Vec<f64>)> {
    if data.is_empty() {
        return Err(Error::Empty("measurement set"));
    }
    if colloc.is_empty() {
        return Err(Error::Empty("collocation set"));
    }
    let gammas = model.schedule().stage_viscosities();
    let layout = model.param_layout();
    let stages = gammas.len();
    grad_params(&model.flatten(), |tape, params| {
        let zero = tape.var(0.0);
        let mut data_sums = vec![zero; stages];
        let mut phy_sums = vec![zero; stages];
        for m in &data.points {
            let jets = model
                .stage_jets_from(params, tape.var(m.t), tape.var(m.x))
                .expect("layout matches");
            for (i, j) in jets.iter().enumerate() {
                let e = tape.var(m.u) - j.value;
                data_sums[i] = data_sums[i] + e * e;
            }
        }
        for &(t, x) in colloc {
            let jets = model
                .stage_jets_from(params, tape.var(t), tape.var(x))
                .expect("layout matches");
            for (i, j) in jets.iter().enumerate() {
                let r = residual(*j, flux, gammas[i]);
                phy_sums[i] = phy_sums[i] + r * r;
            }
        }
        let inv_data = zero.constant_like(1.0 / data.len() as f64);
        let inv_phy = zero.constant_like(lambda / colloc.len() as f64);
        let weight = zero.constant_like(1.0 / stages as f64);
        let mut total = zero;
        for i in 0..stages {
            total = total + weight * (data_sums[i] * inv_data + phy_sums[i] * inv_phy);
        }
        for b in &layout.blocks {
            total = total + params[b.alpha] * params[b.alpha];
        }
        total
    })
}
