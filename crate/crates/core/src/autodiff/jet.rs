use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::network::Activation;

/// Numeric type a [`Jet2`] can be built from.
///
/// Implemented for `f64` (plain evaluation) and for [`crate::autodiff::Var`]
/// (evaluation recorded on a tape).
pub trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    /// A constant living in the same context as `self`.
    fn constant_like(&self, c: f64) -> Self;
    fn value(&self) -> f64;
    fn tanh(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    /// `|x|`, with derivative 0 at the origin.
    fn abs(self) -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn constant_like(&self, c: f64) -> Self {
        c
    }
    #[inline]
    fn value(&self) -> f64 {
        *self
    }
    #[inline]
    fn tanh(self) -> Self {
        crate::network::tanh(self)
    }
    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }
    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }
}

/// Second-order jet in `(t, x)`: a value with `∂t`, `∂x` and `∂xx`.
///
/// Mixed and `∂tt` terms are deliberately absent; the residual of a
/// viscous scalar conservation law never needs them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jet2<T = f64> {
    pub value: T,
    pub d_t: T,
    pub d_x: T,
    pub d_xx: T,
}

impl<T: Scalar> Jet2<T> {
    pub fn new(value: T, d_t: T, d_x: T, d_xx: T) -> Self {
        Self {
            value,
            d_t,
            d_x,
            d_xx,
        }
    }

    /// A jet with all derivative slots zero.
    pub fn constant(value: T) -> Self {
        let zero = value.constant_like(0.0);
        Self::new(value, zero, zero, zero)
    }

    /// The seed jet of the time coordinate, `(t, 1, 0, 0)`.
    pub fn time(t: T) -> Self {
        Self::new(t, t.constant_like(1.0), t.constant_like(0.0), t.constant_like(0.0))
    }

    /// The seed jet of the space coordinate, `(x, 0, 1, 0)`.
    pub fn space(x: T) -> Self {
        Self::new(x, x.constant_like(0.0), x.constant_like(1.0), x.constant_like(0.0))
    }

    /// Multiplication by a constant (no derivative in `t` or `x`).
    #[inline]
    pub fn scale(self, c: T) -> Self {
        Self::new(c * self.value, c * self.d_t, c * self.d_x, c * self.d_xx)
    }

    /// Applies an element-wise activation using the chain rule to second order.
    pub fn activate(self, activation: Activation) -> Result<Self> {
        let (phi, d1, d2) = activation.eval_with_derivatives(self.value)?;
        Ok(Self::new(
            phi,
            d1 * self.d_t,
            d1 * self.d_x,
            d2 * self.d_x * self.d_x + d1 * self.d_xx,
        ))
    }

    pub fn slots(&self) -> [T; 4] {
        [self.value, self.d_t, self.d_x, self.d_xx]
    }
}

impl Jet2<f64> {
    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.slots().iter().all(|v| v.is_finite())
    }
}

impl<T: Scalar> Add for Jet2<T> {
    type Output = Self;

    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self::new(
            self.value + rhs.value,
            self.d_t + rhs.d_t,
            self.d_x + rhs.d_x,
            self.d_xx + rhs.d_xx,
        )
    }
}

impl<T: Scalar> Sub for Jet2<T> {
    type Output = Self;

    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self::new(
            self.value - rhs.value,
            self.d_t - rhs.d_t,
            self.d_x - rhs.d_x,
            self.d_xx - rhs.d_xx,
        )
    }
}

impl<T: Scalar> Mul for Jet2<T> {
    type Output = Self;

    /// Leibniz rule truncated at second order.
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let two = self.value.constant_like(2.0);
        Self::new(
            self.value * rhs.value,
            self.value * rhs.d_t + self.d_t * rhs.value,
            self.value * rhs.d_x + self.d_x * rhs.value,
            self.value * rhs.d_xx + two * self.d_x * rhs.d_x + self.d_xx * rhs.value,
        )
    }
}

impl<T: Scalar> Neg for Jet2<T> {
    type Output = Self;

    fn neg(self) -> Self {
        Self::new(-self.value, -self.d_t, -self.d_x, -self.d_xx)
    }
}
