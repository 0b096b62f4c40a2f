//! Column-batched forward and reverse passes for [`DenseNet`].
//!
//! A batch of `points` evaluation points carrying `slots` jet slots (1 for
//! plain values, 4 for a full [`Jet2`](crate::autodiff::Jet2)) is stored as a
//! row-major matrix with one row per neuron and `slots * points` columns.
//! Column `s * points + b` holds slot `s` of point `b`, in the slot order
//! value, `∂t`, `∂x`, `∂xx`. Biases only enter the value slot.
//!
//! The reverse pass treats every jet slot as a differentiable quantity, so
//! adjoints seeded on any slot of the output reach the parameters exactly.

use super::{Activation, DenseNet};
use super::kernel::{gemm_nn, gemm_nt, MatRef};

pub const VALUE: usize = 0;
pub const D_T: usize = 1;
pub const D_X: usize = 2;
pub const D_XX: usize = 3;

/// Forward state of one batched evaluation, kept for the reverse pass.
/// Buffers are reused between calls.
#[derive(Default, Debug, Clone)]
pub struct Trace {
    points: usize,
    slots: usize,
    input: Vec<f64>,
    pre: Vec<Vec<f64>>,
    post: Vec<Vec<f64>>,
    output: Vec<f64>,
    scratch: [Vec<f64>; 2],
}

impl Trace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn cols(&self) -> usize {
        self.points * self.slots
    }

    /// Resets the input matrix to zeros with shape `width × slots·points`
    /// and returns it for filling.
    pub fn input_mut(&mut self, width: usize, points: usize, slots: usize) -> &mut [f64] {
        assert!(slots == 1 || slots == 4, "slots must be 1 or 4");
        self.points = points;
        self.slots = slots;
        self.input.clear();
        self.input.resize(width * points * slots, 0.0);
        &mut self.input
    }

    pub fn input(&self) -> &[f64] {
        &self.input
    }

    /// Output row of the last [`forward`](Self::forward), `slots·points` long.
    pub fn output(&self) -> &[f64] {
        &self.output
    }

    /// Slot `slot` of the output for every point.
    pub fn output_slot(&self, slot: usize) -> &[f64] {
        &self.output[slot * self.points..(slot + 1) * self.points]
    }

    pub fn forward(&mut self, net: &DenseNet) {
        let dims = net.layer_dims();
        let cols = self.cols();
        assert_eq!(self.input.len(), dims[0] * cols, "input not prepared");
        let hidden = net.num_layers() - 1;
        self.pre.resize_with(hidden, Vec::new);
        self.post.resize_with(hidden, Vec::new);
        let act = net.activation();

        for layer in 0..net.num_layers() {
            let (n_in, n_out) = (dims[layer], dims[layer + 1]);
            let mut z = if layer < hidden {
                std::mem::take(&mut self.pre[layer])
            } else {
                std::mem::take(&mut self.output)
            };
            // Every entry is overwritten below, so stale contents are harmless.
            z.resize(n_out * cols, 0.0);
            {
                let a_prev: &[f64] = if layer == 0 {
                    &self.input
                } else {
                    &self.post[layer - 1]
                };
                gemm_nn(
                    n_out,
                    n_in,
                    cols,
                    MatRef::row_major(net.weights(layer), n_in),
                    a_prev,
                    false,
                    &mut z,
                );
            }
            for (j, &b) in net.bias(layer).iter().enumerate() {
                for v in &mut z[j * cols..j * cols + self.points] {
                    *v += b;
                }
            }
            if layer < hidden {
                let mut a = std::mem::take(&mut self.post[layer]);
                a.resize(n_out * cols, 0.0);
                activate_rows(act, &z, &mut a, n_out, self.points, self.slots);
                self.pre[layer] = z;
                self.post[layer] = a;
            } else {
                self.output = z;
            }
        }
    }

    /// Reverse pass for the last forward.
    ///
    /// `out_adjoint` holds the adjoint of every output column. Parameter
    /// adjoints are added into `grad` (layout of [`DenseNet::params`]). When
    /// `input_adjoint` is given it receives the adjoints of the input matrix.
    pub fn backward(
        &mut self,
        net: &DenseNet,
        out_adjoint: &[f64],
        grad: &mut [f64],
        input_adjoint: Option<&mut Vec<f64>>,
    ) {
        let dims = net.layer_dims();
        let cols = self.cols();
        let points = self.points;
        assert_eq!(out_adjoint.len(), cols);
        assert_eq!(grad.len(), net.param_count());
        let act = net.activation();
        let [mut cur, mut next] = std::mem::take(&mut self.scratch);
        cur.clear();
        cur.extend_from_slice(out_adjoint);
        let want_input = input_adjoint.is_some();

        for layer in (0..net.num_layers()).rev() {
            let (n_in, n_out) = (dims[layer], dims[layer + 1]);
            let a_prev: &[f64] = if layer == 0 {
                &self.input
            } else {
                &self.post[layer - 1]
            };
            let w_off = net.layer_offset(layer);
            let b_off = w_off + n_in * n_out;
            gemm_nt(n_out, n_in, cols, &cur, a_prev, &mut grad[w_off..b_off]);
            for j in 0..n_out {
                let s: f64 = cur[j * cols..j * cols + points].iter().sum();
                grad[b_off + j] += s;
            }
            if layer == 0 && !want_input {
                break;
            }
            next.resize(n_in * cols, 0.0);
            gemm_nn(
                n_in,
                n_out,
                cols,
                MatRef::transposed(net.weights(layer), n_in),
                &cur,
                false,
                &mut next,
            );
            if layer > 0 {
                activate_rows_backward(
                    act,
                    &self.pre[layer - 1],
                    &self.post[layer - 1],
                    &mut next,
                    n_in,
                    points,
                    self.slots,
                );
            }
            std::mem::swap(&mut cur, &mut next);
        }
        if let Some(dst) = input_adjoint {
            dst.clear();
            dst.extend_from_slice(&cur);
        }
        self.scratch = [cur, next];
    }
}

fn split4(row: &[f64], p: usize) -> (&[f64], &[f64], &[f64], &[f64]) {
    let (v, rest) = row.split_at(p);
    let (t, rest) = rest.split_at(p);
    let (x, xx) = rest.split_at(p);
    (v, t, x, xx)
}

fn split4_mut(row: &mut [f64], p: usize) -> (&mut [f64], &mut [f64], &mut [f64], &mut [f64]) {
    let (v, rest) = row.split_at_mut(p);
    let (t, rest) = rest.split_at_mut(p);
    let (x, xx) = rest.split_at_mut(p);
    (v, t, x, xx)
}

fn activate_rows(act: Activation, z: &[f64], a: &mut [f64], rows: usize, p: usize, slots: usize) {
    #[cfg(target_arch = "x86_64")]
    if std::arch::is_x86_feature_detected!("avx512f") {
        // SAFETY: the feature was detected at runtime.
        unsafe { activate_rows_avx512(act, z, a, rows, p, slots) };
        return;
    }
    activate_rows_body(act, z, a, rows, p, slots);
}

/// The same loops compiled for 512-bit vectors. Without contraction into
/// fused multiply-adds the results are bit-identical to the generic build.
#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx512f")]
unsafe fn activate_rows_avx512(act: Activation, z: &[f64], a: &mut [f64], rows: usize, p: usize, slots: usize) {
    activate_rows_body(act, z, a, rows, p, slots);
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx512f")]
unsafe fn activate_rows_backward_avx512(
    act: Activation,
    z: &[f64],
    a: &[f64],
    g: &mut [f64],
    rows: usize,
    p: usize,
    slots: usize,
) {
    activate_rows_backward_body(act, z, a, g, rows, p, slots);
}

#[inline(always)]
fn activate_rows_body(act: Activation, z: &[f64], a: &mut [f64], rows: usize, p: usize, slots: usize) {
    // Dispatching once per call keeps the per-element loops free of
    // branches on the activation.
    match act {
        Activation::Tanh => activate_rows_with(z, a, rows, p, slots, |z| {
            let s = super::tanh(z);
            let (d1, d2, _) = Activation::Tanh.higher_derivatives(z, s);
            (s, d1, d2)
        }),
        _ => activate_rows_with(z, a, rows, p, slots, |z| {
            let phi = act.apply(z);
            let (d1, d2, _) = act.higher_derivatives(z, phi);
            (phi, d1, d2)
        }),
    }
}

#[inline(always)]
fn activate_rows_with(
    z: &[f64],
    a: &mut [f64],
    rows: usize,
    p: usize,
    slots: usize,
    eval: impl Fn(f64) -> (f64, f64, f64),
) {
    let cols = p * slots;
    for j in 0..rows {
        let zr = &z[j * cols..(j + 1) * cols];
        let ar = &mut a[j * cols..(j + 1) * cols];
        if slots == 1 {
            for (o, &v) in ar.iter_mut().zip(zr) {
                *o = eval(v).0;
            }
            continue;
        }
        let (zv, zt, zx, zxx) = split4(zr, p);
        let (av, at, ax, axx) = split4_mut(ar, p);
        for b in 0..p {
            let (phi, d1, d2) = eval(zv[b]);
            av[b] = phi;
            at[b] = d1 * zt[b];
            ax[b] = d1 * zx[b];
            axx[b] = d2 * zx[b] * zx[b] + d1 * zxx[b];
        }
    }
}

/// Maps adjoints of activated slots onto adjoints of pre-activation slots, in place.
fn activate_rows_backward(
    act: Activation,
    z: &[f64],
    a: &[f64],
    g: &mut [f64],
    rows: usize,
    p: usize,
    slots: usize,
) {
    #[cfg(target_arch = "x86_64")]
    if std::arch::is_x86_feature_detected!("avx512f") {
        // SAFETY: the feature was detected at runtime.
        unsafe { activate_rows_backward_avx512(act, z, a, g, rows, p, slots) };
        return;
    }
    activate_rows_backward_body(act, z, a, g, rows, p, slots);
}

#[inline(always)]
fn activate_rows_backward_body(
    act: Activation,
    z: &[f64],
    a: &[f64],
    g: &mut [f64],
    rows: usize,
    p: usize,
    slots: usize,
) {
    match act {
        Activation::Tanh => activate_rows_backward_with(z, a, g, rows, p, slots, |z, phi| {
            Activation::Tanh.higher_derivatives(z, phi)
        }),
        _ => activate_rows_backward_with(z, a, g, rows, p, slots, |z, phi| act.higher_derivatives(z, phi)),
    }
}

#[inline(always)]
fn activate_rows_backward_with(
    z: &[f64],
    a: &[f64],
    g: &mut [f64],
    rows: usize,
    p: usize,
    slots: usize,
    derivs: impl Fn(f64, f64) -> (f64, f64, f64),
) {
    let cols = p * slots;
    for j in 0..rows {
        let zr = &z[j * cols..(j + 1) * cols];
        let ar = &a[j * cols..(j + 1) * cols];
        let gr = &mut g[j * cols..(j + 1) * cols];
        if slots == 1 {
            for b in 0..p {
                let (d1, _, _) = derivs(zr[b], ar[b]);
                gr[b] *= d1;
            }
            continue;
        }
        let (zv, zt, zx, zxx) = split4(zr, p);
        let av = &ar[..p];
        let (gv, gt, gx, gxx) = split4_mut(gr, p);
        for b in 0..p {
            let (d1, d2, d3) = derivs(zv[b], av[b]);
            let (cv, ct, cx, cxx) = (gv[b], gt[b], gx[b], gxx[b]);
            let zxb = zx[b];
            gv[b] = cv * d1 + ct * d2 * zt[b] + cx * d2 * zxb + cxx * (d3 * zxb * zxb + d2 * zxx[b]);
            gt[b] = ct * d1;
            gx[b] = cx * d1 + cxx * 2.0 * d2 * zxb;
            gxx[b] = cxx * d1;
        }
    }
}

/// Fills rows 0 and 1 of a prepared input matrix with the seed jets of
/// the time and space coordinates.
pub fn seed_coordinates(input: &mut [f64], points: &[(f64, f64)], slots: usize) {
    let p = points.len();
    let cols = p * slots;
    for (b, &(t, x)) in points.iter().enumerate() {
        input[b] = t;
        input[cols + b] = x;
        if slots == 4 {
            input[D_T * p + b] = 1.0;
            input[cols + D_X * p + b] = 1.0;
        }
    }
}
