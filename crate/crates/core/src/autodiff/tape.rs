use std::cell::RefCell;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::Scalar;
use crate::error::{Error, Result};

const NO_PARENT: usize = usize::MAX;

#[derive(Clone, Copy)]
struct Node {
    parents: [usize; 2],
    partials: [f64; 2],
}

/// Wengert list for scalar reverse-mode differentiation.
///
/// Every operation on a [`Var`] appends one node holding the local partial
/// derivatives with respect to its (at most two) parents. A backward sweep
/// in reverse insertion order accumulates adjoints.
#[derive(Default)]
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Registers an independent variable.
    pub fn var(&self, value: f64) -> Var<'_> {
        self.push(value, [NO_PARENT; 2], [0.0; 2])
    }

    fn push(&self, value: f64, parents: [usize; 2], partials: [f64; 2]) -> Var<'_> {
        let mut nodes = self.nodes.borrow_mut();
        nodes.push(Node { parents, partials });
        Var {
            tape: self,
            index: nodes.len() - 1,
            value,
        }
    }

    fn unary(&self, parent: &Var<'_>, value: f64, partial: f64) -> Var<'_> {
        self.push(value, [parent.index, NO_PARENT], [partial, 0.0])
    }

    fn binary(&self, a: &Var<'_>, b: &Var<'_>, value: f64, da: f64, db: f64) -> Var<'_> {
        self.push(value, [a.index, b.index], [da, db])
    }

    /// Adjoints of every node with respect to `output`.
    pub fn adjoints(&self, output: &Var<'_>) -> Vec<f64> {
        let nodes = self.nodes.borrow();
        let mut adj = vec![0.0; nodes.len()];
        adj[output.index] = 1.0;
        for i in (0..=output.index).rev() {
            let a = adj[i];
            if a == 0.0 {
                continue;
            }
            let node = nodes[i];
            for k in 0..2 {
                if node.parents[k] != NO_PARENT {
                    adj[node.parents[k]] += a * node.partials[k];
                }
            }
        }
        adj
    }
}

/// A scalar recorded on a [`Tape`].
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: &'t Tape,
    index: usize,
    value: f64,
}

impl fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Var({} @ {})", self.value, self.index)
    }
}

impl<'t> Var<'t> {
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn square(self) -> Self {
        self * self
    }
}

impl<'t> Add for Var<'t> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.tape
            .binary(&self, &rhs, self.value + rhs.value, 1.0, 1.0)
    }
}

impl<'t> Sub for Var<'t> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.tape
            .binary(&self, &rhs, self.value - rhs.value, 1.0, -1.0)
    }
}

impl<'t> Mul for Var<'t> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.tape
            .binary(&self, &rhs, self.value * rhs.value, rhs.value, self.value)
    }
}

impl<'t> Neg for Var<'t> {
    type Output = Self;
    fn neg(self) -> Self {
        self.tape.unary(&self, -self.value, -1.0)
    }
}

impl<'t> Scalar for Var<'t> {
    fn constant_like(&self, c: f64) -> Self {
        self.tape.var(c)
    }

    fn value(&self) -> f64 {
        self.value
    }

    fn tanh(self) -> Self {
        let s = crate::network::tanh(self.value);
        self.tape.unary(&self, s, 1.0 - s * s)
    }

    fn sin(self) -> Self {
        self.tape.unary(&self, self.value.sin(), self.value.cos())
    }

    fn cos(self) -> Self {
        self.tape.unary(&self, self.value.cos(), -self.value.sin())
    }

    fn abs(self) -> Self {
        let slope = if self.value > 0.0 {
            1.0
        } else if self.value < 0.0 {
            -1.0
        } else {
            0.0
        };
        self.tape.unary(&self, self.value.abs(), slope)
    }
}

/// Value and exact gradient of a scalar function of `params`.
///
/// `loss` receives one tape variable per entry of `params`, in order, and
/// must build its result from [`Var`] operations only. The returned
/// gradient uses the same ordering as `params`.
pub fn grad_params<F>(params: &[f64], loss: F) -> Result<(f64, Vec<f64>)>
where
    F: for<'t> Fn(&'t Tape, &[Var<'t>]) -> Var<'t>,
{
    let tape = Tape::new();
    let vars: Vec<Var<'_>> = params.iter().map(|&p| tape.var(p)).collect();
    let out = loss(&tape, &vars);
    if !out.value.is_finite() {
        return Err(Error::NonFinite("loss"));
    }
    let adj = tape.adjoints(&out);
    let grad: Vec<f64> = vars.iter().map(|v| adj[v.index]).collect();
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite("gradient"));
    }
    Ok((out.value, grad))
}
