//! The stacked residual model.
//!
//! Stage 0 is a base network of `(t, x)`. Stage `i ≥ 1` adds a scaled
//! correction computed from the coordinates and the previous stage:
//!
//! ```text
//! û⁽ⁱ⁾(t, x) = û⁽ⁱ⁻¹⁾(t, x) + |α_i| · N_i(t, x, û⁽ⁱ⁻¹⁾(t, x))
//! ```

use std::fs;
use std::ops::Range;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Jet2, Scalar};
use crate::error::{Error, Result};
use crate::network::batch::{seed_coordinates, Trace};
use crate::network::{eval_jets, Activation, DenseNet, NetDoc};
use crate::pde::ViscositySchedule;

const CHECKPOINT_FORMAT: &str = "vspinn-checkpoint/1";

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualBlock {
    pub alpha: f64,
    pub net: DenseNet,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StackedPinn {
    base: DenseNet,
    blocks: Vec<ResidualBlock>,
    schedule: ViscositySchedule,
}

/// Where each model parameter sits in the flat parameter vector.
///
/// Order: base parameters, then for each block its `α` followed by the
/// block network's parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamLayout {
    pub base: Range<usize>,
    pub blocks: Vec<BlockLayout>,
    pub total: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockLayout {
    pub alpha: usize,
    pub net: Range<usize>,
}

impl ParamLayout {
    /// Parameter range owned by stage `i` (for blocks, including `α_i`).
    pub fn stage_range(&self, i: usize) -> Range<usize> {
        if i == 0 {
            self.base.clone()
        } else {
            let b = &self.blocks[i - 1];
            b.alpha..b.net.end
        }
    }
}

impl StackedPinn {
    pub fn new(
        base: DenseNet,
        blocks: Vec<ResidualBlock>,
        schedule: ViscositySchedule,
    ) -> Result<Self> {
        if base.input_width() != 2 {
            return Err(Error::InvalidDims(format!(
                "base network must take (t, x), got input width {}",
                base.input_width()
            )));
        }
        if blocks.len() != schedule.n {
            return Err(Error::Config(format!(
                "{} residual blocks but schedule expects {}",
                blocks.len(),
                schedule.n
            )));
        }
        for (i, b) in blocks.iter().enumerate() {
            if b.net.input_width() != 3 {
                return Err(Error::InvalidDims(format!(
                    "block {} must take (t, x, u), got input width {}",
                    i + 1,
                    b.net.input_width()
                )));
            }
        }
        Ok(Self {
            base,
            blocks,
            schedule,
        })
    }

    /// Freshly initialized stack; each network gets its own seed drawn from `seed`.
    pub fn init(
        base_dims: &[usize],
        block_dims: &[usize],
        activation: Activation,
        schedule: ViscositySchedule,
        alpha_init: f64,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = DenseNet::init(base_dims, activation, rng.gen())?;
        let blocks = (0..schedule.n)
            .map(|_| {
                Ok(ResidualBlock {
                    alpha: alpha_init,
                    net: DenseNet::init(block_dims, activation, rng.gen())?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(base, blocks, schedule)
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn base(&self) -> &DenseNet {
        &self.base
    }

    pub fn blocks(&self) -> &[ResidualBlock] {
        &self.blocks
    }

    pub fn blocks_mut(&mut self) -> &mut [ResidualBlock] {
        &mut self.blocks
    }

    pub fn schedule(&self) -> &ViscositySchedule {
        &self.schedule
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.alpha).collect()
    }

    fn check_stage(&self, i: usize) -> Result<()> {
        if i > self.n_blocks() {
            return Err(Error::IndexOutOfRange {
                index: i,
                max: self.n_blocks(),
            });
        }
        Ok(())
    }

    pub fn eval_stage(&self, i: usize, t: f64, x: f64) -> Result<f64> {
        self.check_stage(i)?;
        let mut u = self.base.forward(&[t, x])?;
        for block in &self.blocks[..i] {
            u = u + block.alpha.abs() * block.net.forward(&[t, x, u])?;
        }
        Ok(u)
    }

    /// Jet of `û⁽ⁱ⁾`; its value slot equals [`eval_stage`](Self::eval_stage).
    pub fn eval_stage_jet(&self, i: usize, t: f64, x: f64) -> Result<Jet2> {
        Ok(*self.eval_stage_jets(i, t, x)?.last().expect("stage 0 always present"))
    }

    /// Jets of stages `0..=i` at one point.
    pub fn eval_stage_jets(&self, i: usize, t: f64, x: f64) -> Result<Vec<Jet2>> {
        self.check_stage(i)?;
        let mut jets = Vec::with_capacity(i + 1);
        let mut u = self.base.jet_forward(t, x, &[])?;
        jets.push(u);
        for block in &self.blocks[..i] {
            u = u + block.net.jet_forward(t, x, &[u])?.scale(block.alpha.abs());
            jets.push(u);
        }
        Ok(jets)
    }

    pub fn param_layout(&self) -> ParamLayout {
        let base = 0..self.base.param_count();
        let mut next = base.end;
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let alpha = next;
                let net = alpha + 1..alpha + 1 + b.net.param_count();
                next = net.end;
                BlockLayout { alpha, net }
            })
            .collect();
        ParamLayout {
            base,
            blocks,
            total: next,
        }
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_layout().total);
        out.extend_from_slice(self.base.params());
        for b in &self.blocks {
            out.push(b.alpha);
            out.extend_from_slice(b.net.params());
        }
        out
    }

    /// Overwrites all parameters from a flat vector in [`ParamLayout`] order.
    pub fn set_flat(&mut self, flat: &[f64]) -> Result<()> {
        let layout = self.param_layout();
        if flat.len() != layout.total {
            return Err(Error::WidthMismatch {
                expected: layout.total,
                got: flat.len(),
            });
        }
        self.base.params_mut().copy_from_slice(&flat[layout.base]);
        for (b, l) in self.blocks.iter_mut().zip(layout.blocks) {
            b.alpha = flat[l.alpha];
            b.net.params_mut().copy_from_slice(&flat[l.net]);
        }
        Ok(())
    }

    pub fn with_flat(&self, flat: &[f64]) -> Result<Self> {
        let mut model = self.clone();
        model.set_flat(flat)?;
        Ok(model)
    }

    /// Stage jets `0..=n` at `(t, x)` computed from an arbitrary flat
    /// parameter vector. Generic so it can run on tape variables.
    pub fn stage_jets_from<T: Scalar>(&self, params: &[T], t: T, x: T) -> Result<Vec<Jet2<T>>> {
        let layout = self.param_layout();
        if params.len() != layout.total {
            return Err(Error::WidthMismatch {
                expected: layout.total,
                got: params.len(),
            });
        }
        let (tj, xj) = (Jet2::time(t), Jet2::space(x));
        let mut u = eval_jets(
            self.base.layer_dims(),
            self.base.activation(),
            &params[layout.base.clone()],
            &[tj, xj],
        )?;
        let mut jets = vec![u];
        for (b, l) in self.blocks.iter().zip(&layout.blocks) {
            let correction = eval_jets(
                b.net.layer_dims(),
                b.net.activation(),
                &params[l.net.clone()],
                &[tj, xj, u],
            )?;
            u = u + correction.scale(params[l.alpha].abs());
            jets.push(u);
        }
        Ok(jets)
    }

    /// Values of stage `i` at many points, evaluated in column batches.
    pub fn predict(&self, i: usize, points: &[(f64, f64)]) -> Result<Vec<f64>> {
        Ok(self.predict_with_corrections(i, points)?.0)
    }

    /// Stage-`i` values together with each block's scaled correction
    /// `|α_k| N_k` for `k = 1..=i` (one vector per block).
    pub fn predict_with_corrections(
        &self,
        i: usize,
        points: &[(f64, f64)],
    ) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        const CHUNK: usize = 1024;
        self.check_stage(i)?;
        let mut values = Vec::with_capacity(points.len());
        let mut corrections = vec![Vec::with_capacity(points.len()); i];
        let mut trace = Trace::new();
        for chunk in points.chunks(CHUNK) {
            let p = chunk.len();
            seed_coordinates(trace.input_mut(2, p, 1), chunk, 1);
            trace.forward(&self.base);
            let mut u = trace.output().to_vec();
            for (k, block) in self.blocks[..i].iter().enumerate() {
                let input = trace.input_mut(3, p, 1);
                seed_coordinates(input, chunk, 1);
                input[2 * p..].copy_from_slice(&u);
                trace.forward(&block.net);
                let scale = block.alpha.abs();
                for (b, &n) in trace.output().iter().enumerate() {
                    let c = scale * n;
                    corrections[k].push(c);
                    u[b] += c;
                }
            }
            values.extend_from_slice(&u);
        }
        Ok((values, corrections))
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            n: self.n_blocks(),
            gamma_init: self.schedule.gamma_init,
            p: self.schedule.p,
            viscosities: self.schedule.stage_viscosities(),
            base: self.base.to_doc(),
            blocks: self
                .blocks
                .iter()
                .map(|b| BlockDoc {
                    alpha: b.alpha,
                    net: b.net.to_doc(),
                })
                .collect(),
        }
    }

    pub fn from_checkpoint(doc: &Checkpoint) -> Result<Self> {
        if doc.format != CHECKPOINT_FORMAT {
            return Err(Error::parse(
                "checkpoint",
                format!("unknown format tag `{}`", doc.format),
            ));
        }
        let schedule = ViscositySchedule::new(doc.gamma_init, doc.p, doc.n)?;
        let base = DenseNet::from_doc(&doc.base)?;
        let blocks = doc
            .blocks
            .iter()
            .map(|b| {
                Ok(ResidualBlock {
                    alpha: b.alpha,
                    net: DenseNet::from_doc(&b.net)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(base, blocks, schedule)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(&self.to_checkpoint())?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let doc: Checkpoint = serde_json::from_str(&fs::read_to_string(path)?)?;
        Self::from_checkpoint(&doc)
    }
}

/// On-disk model description. Floats are written in shortest round-trip
/// form, so save/load reproduces every parameter bit for bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub n: usize,
    pub gamma_init: f64,
    pub p: f64,
    /// Informational; recomputed from `gamma_init`, `p` and `n` on load.
    pub viscosities: Vec<f64>,
    pub base: NetDoc,
    pub blocks: Vec<BlockDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockDoc {
    pub alpha: f64,
    pub net: NetDoc,
}
