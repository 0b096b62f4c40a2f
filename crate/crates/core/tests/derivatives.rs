//! Jets and tape gradients against central finite differences.

mod common;

use common::{central1, central2, rel_err, rng, H};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use vspinn::autodiff::{grad_params, Jet2, Scalar};
use vspinn::network::{eval_jets, Activation, DenseNet};

/// Random expressions in `(t, x)` built from the supported jet primitives.
#[derive(Debug)]
enum Expr {
    T,
    X,
    Const(f64),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Scale(f64, Box<Expr>),
    Neg(Box<Expr>),
    Act(Activation, Box<Expr>),
}

impl Expr {
    fn random(r: &mut ChaCha8Rng, depth: usize) -> Expr {
        if depth == 0 || r.gen_bool(0.15) {
            return match r.gen_range(0..3) {
                0 => Expr::T,
                1 => Expr::X,
                _ => Expr::Const(r.gen_range(-1.5..1.5)),
            };
        }
        let op = r.gen_range(0..7);
        let c = r.gen_range(-2.0..2.0);
        let a = Box::new(Expr::random(r, depth - 1));
        match op {
            0 => Expr::Add(a, Box::new(Expr::random(r, depth - 1))),
            1 => Expr::Sub(a, Box::new(Expr::random(r, depth - 1))),
            2 => Expr::Mul(a, Box::new(Expr::random(r, depth - 1))),
            3 => Expr::Scale(c, a),
            4 => Expr::Neg(a),
            5 => Expr::Act(Activation::Sin, a),
            _ => Expr::Act(Activation::Tanh, a),
        }
    }

    fn jet(&self, t: f64, x: f64) -> Jet2 {
        match self {
            Expr::T => Jet2::time(t),
            Expr::X => Jet2::space(x),
            Expr::Const(c) => Jet2::constant(*c),
            Expr::Add(a, b) => a.jet(t, x) + b.jet(t, x),
            Expr::Sub(a, b) => a.jet(t, x) - b.jet(t, x),
            Expr::Mul(a, b) => a.jet(t, x) * b.jet(t, x),
            Expr::Scale(c, a) => a.jet(t, x).scale(*c),
            Expr::Neg(a) => -a.jet(t, x),
            Expr::Act(f, a) => a.jet(t, x).activate(*f).unwrap(),
        }
    }

    fn value(&self, t: f64, x: f64) -> f64 {
        match self {
            Expr::T => t,
            Expr::X => x,
            Expr::Const(c) => *c,
            Expr::Add(a, b) => a.value(t, x) + b.value(t, x),
            Expr::Sub(a, b) => a.value(t, x) - b.value(t, x),
            Expr::Mul(a, b) => a.value(t, x) * b.value(t, x),
            Expr::Scale(c, a) => c * a.value(t, x),
            Expr::Neg(a) => -a.value(t, x),
            Expr::Act(f, a) => f.apply(a.value(t, x)),
        }
    }
}

/// Checks every slot of `jet` against central differences of `f`.
fn assert_slots_match(jet: Jet2, f: impl Fn(f64, f64) -> f64, t: f64, x: f64, what: &str) {
    let ft = central1(|s| f(s, x), t, H);
    let fx = central1(|s| f(t, s), x, H);
    let fxx = central2(|s| f(t, s), x, H);
    assert_eq!(jet.value, f(t, x), "{what}: value slot");
    let e_t = rel_err(jet.d_t, ft, 1e-2);
    let e_x = rel_err(jet.d_x, fx, 1e-2);
    let e_xx = rel_err(jet.d_xx, fxx, 1e-2);
    assert!(e_t < 1e-6, "{what}: d_t {} vs {ft} (rel {e_t:e})", jet.d_t);
    assert!(e_x < 1e-6, "{what}: d_x {} vs {fx} (rel {e_x:e})", jet.d_x);
    assert!(e_xx < 1e-4, "{what}: d_xx {} vs {fxx} (rel {e_xx:e})", jet.d_xx);
}

#[test]
fn random_expressions_match_finite_differences() {
    let mut r = rng(11);
    for k in 0..200 {
        let e = Expr::random(&mut r, 4);
        let (t, x) = (r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
        assert_slots_match(e.jet(t, x), |t, x| e.value(t, x), t, x, &format!("expr {k}: {e:?}"));
    }
}

#[test]
fn product_and_activation_examples() {
    let a = Jet2::new(2.0, 1.0, 1.0, 0.0);
    let b = Jet2::new(3.0, 0.0, 2.0, 0.0);
    assert_eq!(a * b, Jet2::new(6.0, 3.0, 7.0, 4.0));
    // a = 2 + t + x and b = 3 + 2x carry exactly these jets at the origin.
    let a = Jet2::constant(2.0) + Jet2::time(0.0) + Jet2::space(0.0);
    let b = Jet2::constant(3.0) + Jet2::space(0.0).scale(2.0);
    assert_slots_match(a * b, |t, x| (2.0 + t + x) * (3.0 + 2.0 * x), 0.0, 0.0, "product");

    let j = Jet2::new(0.5, 0.0, 1.0, 0.0).activate(Activation::Tanh).unwrap();
    let want = central2(|s| Activation::Tanh.apply(s), 0.5, H);
    assert!(rel_err(j.d_xx, want, 1e-2) < 1e-4);
}

fn net_jet(net: &DenseNet, t: f64, x: f64) -> Jet2 {
    net.jet_forward(t, x, &[]).unwrap()
}

#[test]
fn deep_network_jets_match_finite_differences() {
    let net = DenseNet::init(&[2, 30, 30, 30, 1], Activation::Tanh, 5).unwrap();
    let mut r = rng(6);
    for k in 0..120 {
        let (t, x) = (r.gen_range(0.0..1.0), r.gen_range(0.0..1.0));
        let f = |t: f64, x: f64| net.forward(&[t, x]).unwrap();
        assert_slots_match(net_jet(&net, t, x), f, t, x, &format!("point {k}"));
    }
}

#[test]
fn forward_equals_jet_value_exactly() {
    let mut r = rng(7);
    for trial in 0..1000 {
        let net = if trial % 2 == 0 {
            DenseNet::init(&[2, 30, 30, 30, 1], Activation::Tanh, trial).unwrap()
        } else {
            DenseNet::init(&[3, 8, 8, 1], Activation::Sin, trial).unwrap()
        };
        let (t, x, u) = (r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
        if net.input_width() == 2 {
            assert_eq!(net.forward(&[t, x]).unwrap(), net_jet(&net, t, x).value, "trial {trial}");
        } else {
            let extra = [Jet2::new(u, 0.3, -0.2, 0.1)];
            assert_eq!(net.forward(&[t, x, u]).unwrap(), net.jet_forward(t, x, &extra).unwrap().value, "trial {trial}");
        }
    }
}

/// A loss that reads every jet slot: the squared viscous Burgers-type residual.
fn slot_loss<T: Scalar>(j: Jet2<T>) -> T {
    let r = j.d_t + j.value * j.d_x - j.d_xx.constant_like(0.05) * j.d_xx;
    r * r + j.value * j.value
}

fn check_parameter_gradient(dims: &[usize], seed: u64, points: usize) {
    let net = DenseNet::init(dims, Activation::Tanh, seed).unwrap();
    let mut r = rng(seed + 100);
    for _ in 0..points {
        let (t, x) = (r.gen_range(0.0..1.0), r.gen_range(0.0..1.0));
        let (loss, grad) = grad_params(net.params(), |tape, p| {
            let inputs = [
                Jet2::new(tape.var(t), tape.var(1.0), tape.var(0.0), tape.var(0.0)),
                Jet2::new(tape.var(x), tape.var(0.0), tape.var(1.0), tape.var(0.0)),
            ];
            slot_loss(eval_jets(dims, Activation::Tanh, p, &inputs).unwrap())
        })
        .unwrap();
        let f = |params: &[f64]| {
            let inputs = [Jet2::time(t), Jet2::space(x)];
            slot_loss(eval_jets(dims, Activation::Tanh, params, &inputs).unwrap())
        };
        assert_eq!(loss, f(net.params()));
        let scale = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        let mut p = net.params().to_vec();
        for k in 0..p.len() {
            let orig = p[k];
            p[k] = orig + H;
            let up = f(&p);
            p[k] = orig - H;
            let down = f(&p);
            p[k] = orig;
            let fd = (up - down) / (2.0 * H);
            let e = rel_err(grad[k], fd, 1e-3 * scale.max(1e-3));
            assert!(e < 1e-5, "param {k}: tape {} vs fd {fd} (rel {e:e})", grad[k]);
        }
    }
}

#[test]
fn parameter_gradients_match_finite_differences_3x30() {
    check_parameter_gradient(&[2, 30, 30, 30, 1], 21, 3);
}

#[test]
fn parameter_gradients_match_finite_differences_3x40() {
    check_parameter_gradient(&[2, 40, 40, 40, 1], 22, 1);
}

#[test]
fn grad_params_small_examples() {
    let (v, g) = grad_params(&[1.0, 3.0, -2.0], |_, p| p[1] * p[1]).unwrap();
    assert_eq!(v, 9.0);
    assert_eq!(g, vec![0.0, 6.0, 0.0]);
    let (_, g) = grad_params(&[1.0, 2.0], |tape, _| tape.var(4.0)).unwrap();
    assert_eq!(g, vec![0.0, 0.0]);
}

#[test]
fn gradients_are_deterministic() {
    let net = DenseNet::init(&[2, 10, 10, 1], Activation::Tanh, 3).unwrap();
    let run = || {
        grad_params(net.params(), |tape, p| {
            let inputs = [
                Jet2::new(tape.var(0.3), tape.var(1.0), tape.var(0.0), tape.var(0.0)),
                Jet2::new(tape.var(0.7), tape.var(0.0), tape.var(1.0), tape.var(0.0)),
            ];
            slot_loss(eval_jets(&[2, 10, 10, 1], Activation::Tanh, p, &inputs).unwrap())
        })
        .unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a.0.to_bits(), b.0.to_bits());
    assert!(a.1.iter().zip(&b.1).all(|(x, y)| x.to_bits() == y.to_bits()));
}
