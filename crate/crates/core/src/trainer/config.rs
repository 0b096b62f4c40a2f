use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::Activation;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrainingMode {
    /// All stages and scalings optimized together on the averaged objective.
    #[default]
    Joint,
    /// Stage by stage, earlier stages frozen; `max_iters / (n + 1)` each.
    Sequential,
}

/// Every knob of a training run. Defaults are the reference configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub n_blocks: usize,
    pub gamma_init: f64,
    pub p: f64,
    pub lambda: f64,
    pub lr: f64,
    pub max_iters: usize,
    pub patience_iters: usize,
    pub patience_rel_tol: f64,
    pub n_collocation: usize,
    pub seed: u64,
    pub base_dims: Vec<usize>,
    pub block_dims: Vec<usize>,
    pub activation: Activation,
    pub alpha_init: f64,
    pub training_mode: TrainingMode,
    pub log_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            n_blocks: 3,
            gamma_init: 0.1,
            p: 2.0,
            lambda: 0.1,
            lr: 1e-3,
            max_iters: 15_000,
            patience_iters: 1_500,
            patience_rel_tol: 1e-4,
            n_collocation: 10_000,
            seed: 0,
            base_dims: vec![2, 30, 30, 30, 1],
            block_dims: vec![3, 40, 40, 40, 1],
            activation: Activation::Tanh,
            alpha_init: 0.05,
            training_mode: TrainingMode::Joint,
            log_every: 50,
        }
    }
}

impl TrainConfig {
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return fail(format!("lambda must be >= 0, got {}", self.lambda));
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return fail(format!("learning rate must be >= 0, got {}", self.lr));
        }
        if !(self.gamma_init >= 0.0 && self.gamma_init.is_finite()) {
            return fail(format!("gamma_init must be >= 0, got {}", self.gamma_init));
        }
        if !(self.p > 1.0) {
            return fail(format!("schedule exponent must exceed 1, got {}", self.p));
        }
        if !(self.patience_rel_tol >= 0.0) {
            return fail("patience_rel_tol must be >= 0".into());
        }
        if self.patience_iters == 0 {
            return fail("patience_iters must be positive".into());
        }
        if self.n_collocation == 0 {
            return fail("n_collocation must be positive".into());
        }
        if self.log_every == 0 {
            return fail("log_every must be positive".into());
        }
        if self.base_dims.first() != Some(&2) {
            return fail(format!("base network must have 2 inputs, got {:?}", self.base_dims));
        }
        if self.block_dims.first() != Some(&3) {
            return fail(format!("block network must have 3 inputs, got {:?}", self.block_dims));
        }
        if !self.activation.is_smooth() {
            return Err(Error::NonSmoothActivation(self.activation));
        }
        Ok(())
    }
}
