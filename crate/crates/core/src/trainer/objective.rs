//! Batched evaluation of the multi-stage objective and its gradient.
//!
//! Points are processed in fixed-size chunks, in order, so reductions are
//! deterministic. Within a chunk every network is evaluated once on column
//! batches of jets (collocation points) or values (measurements), the
//! per-stage losses seed adjoints on each stage's output, and a single
//! reverse sweep runs from the last block down to the base network. The
//! previous stage's output is not detached: block `k`'s input adjoint flows
//! back into every earlier stage.

use crate::error::{Error, Result};
use crate::godunov::Measurement;
use crate::network::batch::{seed_coordinates, Trace, D_T, D_X, D_XX, VALUE};
use crate::pde::Flux;
use crate::stacked::StackedPinn;

use super::loss::LossBreakdown;

const CHUNK: usize = 512;

pub struct Objective<'a, F: Flux> {
    flux: &'a F,
    lambda: f64,
    gammas: Vec<f64>,
    stage_weights: Vec<f64>,
    penalized: Vec<bool>,
    data: &'a [Measurement],
    colloc: &'a [(f64, f64)],
    scratch: Scratch,
}

#[derive(Default)]
struct Scratch {
    traces: Vec<Trace>,
    stages: Vec<Vec<f64>>,
    adjoints: Vec<Vec<f64>>,
    coords: Vec<(f64, f64)>,
    scaled: Vec<f64>,
    input_adjoint: Vec<f64>,
}

enum Chunk<'c> {
    Data(&'c [Measurement]),
    Colloc(&'c [(f64, f64)]),
}

impl<'a, F: Flux> Objective<'a, F> {
    /// The averaged objective over all stages of `model`, with viscosities
    /// from its schedule.
    pub fn new(
        model: &StackedPinn,
        flux: &'a F,
        lambda: f64,
        data: &'a [Measurement],
        colloc: &'a [(f64, f64)],
    ) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::Empty("measurement set"));
        }
        if colloc.is_empty() {
            return Err(Error::Empty("collocation set"));
        }
        let stages = model.n_blocks() + 1;
        Ok(Self {
            flux,
            lambda,
            gammas: model.schedule().stage_viscosities(),
            stage_weights: vec![1.0 / stages as f64; stages],
            penalized: vec![true; model.n_blocks()],
            data,
            colloc,
            scratch: Scratch::default(),
        })
    }

    /// Restricts the objective to stage `i` alone: weight 1 on its losses
    /// and only `α_i` penalized.
    pub fn focus_stage(&mut self, i: usize) {
        for (k, w) in self.stage_weights.iter_mut().enumerate() {
            *w = if k == i { 1.0 } else { 0.0 };
        }
        for (k, p) in self.penalized.iter_mut().enumerate() {
            *p = k + 1 == i;
        }
    }

    /// Loss components at the current parameters; when `grad` is given the
    /// gradient (in [`StackedPinn::param_layout`] order) is added into it.
    pub fn evaluate(
        &mut self,
        model: &StackedPinn,
        mut grad: Option<&mut [f64]>,
    ) -> Result<LossBreakdown> {
        let stages = model.n_blocks() + 1;
        if stages != self.stage_weights.len() {
            return Err(Error::Config("model does not match objective".into()));
        }
        let layout = model.param_layout();
        if let Some(g) = grad.as_deref() {
            if g.len() != layout.total {
                return Err(Error::WidthMismatch {
                    expected: layout.total,
                    got: g.len(),
                });
            }
        }
        let mut data_sums = vec![0.0; stages];
        let mut phy_sums = vec![0.0; stages];
        for chunk in self.colloc.chunks(CHUNK) {
            self.pass(model, Chunk::Colloc(chunk), &mut phy_sums, grad.as_deref_mut());
        }
        for chunk in self.data.chunks(CHUNK) {
            self.pass(model, Chunk::Data(chunk), &mut data_sums, grad.as_deref_mut());
        }

        let mut penalty = 0.0;
        for (k, block) in model.blocks().iter().enumerate() {
            if self.penalized[k] {
                penalty += block.alpha * block.alpha;
                if let Some(g) = grad.as_deref_mut() {
                    g[layout.blocks[k].alpha] += 2.0 * block.alpha;
                }
            }
        }
        let nd = self.data.len() as f64;
        let nc = self.colloc.len() as f64;
        let data: Vec<f64> = data_sums.iter().map(|s| s / nd).collect();
        let phy: Vec<f64> = phy_sums.iter().map(|s| s / nc).collect();
        let mut total = 0.0;
        for i in 0..stages {
            total += self.stage_weights[i] * (data[i] + self.lambda * phy[i]);
        }
        Ok(LossBreakdown {
            total: total + penalty,
            data,
            phy,
            penalty,
        })
    }

    #[allow(clippy::needless_range_loop)]
    fn pass(
        &mut self,
        model: &StackedPinn,
        chunk: Chunk<'_>,
        sums: &mut [f64],
        grad: Option<&mut [f64]>,
    ) {
        let n = model.n_blocks();
        let s = &mut self.scratch;
        s.traces.resize_with(n + 1, Trace::new);
        s.stages.resize_with(n + 1, Vec::new);
        s.adjoints.resize_with(n + 1, Vec::new);
        s.coords.clear();
        let slots = match chunk {
            Chunk::Data(ms) => {
                s.coords.extend(ms.iter().map(|m| (m.t, m.x)));
                1
            }
            Chunk::Colloc(pts) => {
                s.coords.extend_from_slice(pts);
                4
            }
        };
        let p = s.coords.len();
        let cols = p * slots;

        seed_coordinates(s.traces[0].input_mut(2, p, slots), &s.coords, slots);
        s.traces[0].forward(model.base());
        s.stages[0].clear();
        s.stages[0].extend_from_slice(s.traces[0].output());
        for (k, block) in model.blocks().iter().enumerate() {
            let (done, rest) = s.stages.split_at_mut(k + 1);
            let prev = &done[k];
            let input = s.traces[k + 1].input_mut(3, p, slots);
            seed_coordinates(input, &s.coords, slots);
            input[2 * cols..].copy_from_slice(prev);
            s.traces[k + 1].forward(&block.net);
            let scale = block.alpha.abs();
            let next = &mut rest[0];
            next.clear();
            next.extend(
                prev.iter()
                    .zip(s.traces[k + 1].output())
                    .map(|(u, c)| u + scale * c),
            );
        }

        let want_grad = grad.is_some();
        match chunk {
            Chunk::Data(ms) => {
                let scale = 2.0 / self.data.len() as f64;
                for i in 0..=n {
                    let (u, adj) = (&s.stages[i], &mut s.adjoints[i]);
                    adj.clear();
                    adj.resize(cols, 0.0);
                    let c = self.stage_weights[i] * scale;
                    for (b, m) in ms.iter().enumerate() {
                        let e = u[b] - m.u;
                        sums[i] += e * e;
                        adj[b] = c * e;
                    }
                }
            }
            Chunk::Colloc(_) => {
                let scale = 2.0 * self.lambda / self.colloc.len() as f64;
                for i in 0..=n {
                    let (u, adj) = (&s.stages[i], &mut s.adjoints[i]);
                    adj.clear();
                    adj.resize(cols, 0.0);
                    let gamma = self.gammas[i];
                    let c = self.stage_weights[i] * scale;
                    for b in 0..p {
                        let v = u[VALUE * p + b];
                        let ux = u[D_X * p + b];
                        let fp = self.flux.flux_prime(v);
                        let mut r = u[D_T * p + b] + fp * ux;
                        if gamma != 0.0 {
                            r -= gamma * u[D_XX * p + b];
                        }
                        sums[i] += r * r;
                        if want_grad {
                            let g = c * r;
                            adj[VALUE * p + b] = g * self.flux.flux_second(v) * ux;
                            adj[D_T * p + b] = g;
                            adj[D_X * p + b] = g * fp;
                            adj[D_XX * p + b] = -g * gamma;
                        }
                    }
                }
            }
        }

        let Some(grad) = grad else { return };
        let layout = model.param_layout();
        for k in (1..=n).rev() {
            let block = &model.blocks()[k - 1];
            let bl = &layout.blocks[k - 1];
            let out = s.traces[k].output();
            let dot: f64 = s.adjoints[k].iter().zip(out).map(|(g, o)| g * o).sum();
            grad[bl.alpha] += sign(block.alpha) * dot;
            let scale = block.alpha.abs();
            s.scaled.clear();
            s.scaled.extend(s.adjoints[k].iter().map(|g| scale * g));
            s.traces[k].backward(
                &block.net,
                &s.scaled,
                &mut grad[bl.net.clone()],
                Some(&mut s.input_adjoint),
            );
            let (lower, upper) = s.adjoints.split_at_mut(k);
            let from_input = &s.input_adjoint[2 * cols..3 * cols];
            for ((dst, skip), via) in lower[k - 1].iter_mut().zip(&upper[0]).zip(from_input) {
                *dst += skip + via;
            }
        }
        s.traces[0].backward(model.base(), &s.adjoints[0], &mut grad[layout.base], None);
    }
}

/// Subgradient of `|a|`, taken as 0 at the origin.
fn sign(a: f64) -> f64 {
    if a > 0.0 {
        1.0
    } else if a < 0.0 {
        -1.0
    } else {
        0.0
    }
}
