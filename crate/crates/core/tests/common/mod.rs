//! Helpers shared by the integration tests.
#![allow(dead_code)]

pub mod oracles;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vspinn::godunov::{Dataset, Measurement};
use vspinn::network::{Activation, DenseNet};
use vspinn::pde::ViscositySchedule;
use vspinn::stacked::{ResidualBlock, StackedPinn};

pub const H: f64 = 1e-4;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `|got - want|` relative to `|want|`, with `floor` guarding values near zero.
pub fn rel_err(got: f64, want: f64, floor: f64) -> f64 {
    (got - want).abs() / want.abs().max(floor)
}

pub fn central1(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

pub fn central2(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
}

/// A stack with `n` blocks whose `α` values are drawn away from zero, so
/// every block contributes.
pub fn random_model(base: &[usize], block: &[usize], n: usize, seed: u64) -> StackedPinn {
    let schedule = ViscositySchedule::new(0.1, 2.0, n).unwrap();
    let mut model = StackedPinn::init(base, block, Activation::Tanh, schedule, 0.0, seed).unwrap();
    let mut r = rng(seed ^ 0xA5A5);
    for b in model.blocks_mut() {
        let mag: f64 = r.gen_range(0.2..0.8);
        b.alpha = if r.gen_bool(0.5) { mag } else { -mag };
    }
    model
}

pub fn tiny_model(n: usize, seed: u64) -> StackedPinn {
    random_model(&[2, 5, 1], &[3, 5, 1], n, seed)
}

pub fn random_points(count: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut r = rng(seed);
    (0..count).map(|_| (r.gen_range(0.0..1.0), r.gen_range(0.0..1.0))).collect()
}

pub fn random_dataset(count: usize, seed: u64) -> Dataset {
    let mut r = rng(seed);
    Dataset {
        points: (0..count)
            .map(|_| Measurement {
                t: r.gen_range(0.0..1.0),
                x: r.gen_range(0.0..1.0),
                u: r.gen_range(0.0..1.0),
            })
            .collect(),
    }
}

/// Replaces one network in a stack. `which = 0` is the base.
pub fn with_net(model: &StackedPinn, which: usize, net: DenseNet) -> StackedPinn {
    let mut base = model.base().clone();
    let mut blocks: Vec<ResidualBlock> = model.blocks().to_vec();
    if which == 0 {
        base = net;
    } else {
        blocks[which - 1].net = net;
    }
    StackedPinn::new(base, blocks, *model.schedule()).unwrap()
}
