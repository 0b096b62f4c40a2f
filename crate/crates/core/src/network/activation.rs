use std::fmt;

use serde::{Deserialize, Serialize};

use crate::autodiff::Scalar;
use crate::error::{Error, Result};

/// Element-wise hidden-layer nonlinearity.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Tanh,
    Sin,
    /// Usable for plain evaluation only; jets need a `C²` activation.
    Relu,
}

/// `e^x` for `x` in `[0, 40]`, branch-free so that loops over it vectorize.
///
/// Range reduction `x = k ln 2 + r` with `|r| ≤ ln 2 / 2`, a degree-13
/// Taylor polynomial for `e^r`, and exponent-bit scaling by `2^k`.
#[inline(always)]
fn exp_small(x: f64) -> f64 {
    const INV_LN2: f64 = std::f64::consts::LOG2_E;
    const LN2_HI: f64 = 6.931_471_803_691_238e-1;
    const LN2_LO: f64 = 1.908_214_929_270_587_7e-10;
    // Adding 1.5 * 2^52 rounds to the nearest integer in the low mantissa bits.
    const SHIFTER: f64 = 6_755_399_441_055_744.0;
    let shifted = x * INV_LN2 + SHIFTER;
    let k = shifted - SHIFTER;
    let r = (x - k * LN2_HI) - k * LN2_LO;
    let mut p = 1.0 / 6_227_020_800.0;
    p = p * r + 1.0 / 479_001_600.0;
    p = p * r + 1.0 / 39_916_800.0;
    p = p * r + 1.0 / 3_628_800.0;
    p = p * r + 1.0 / 362_880.0;
    p = p * r + 1.0 / 40_320.0;
    p = p * r + 1.0 / 5_040.0;
    p = p * r + 1.0 / 720.0;
    p = p * r + 1.0 / 120.0;
    p = p * r + 1.0 / 24.0;
    p = p * r + 1.0 / 6.0;
    p = p * r + 0.5;
    p = p * r + 1.0;
    p = p * r + 1.0;
    let k_bits = shifted.to_bits().wrapping_sub(SHIFTER.to_bits());
    let scale = f64::from_bits(k_bits.wrapping_add(1023) << 52);
    p * scale
}

/// Hyperbolic tangent, accurate to a few units of `1e-16` absolute error.
///
/// Every code path in the crate (scalar, jet, tape and batched) uses this
/// function, so their values agree bit for bit.
#[inline(always)]
pub fn tanh(z: f64) -> f64 {
    let e = exp_small((2.0 * z.abs()).min(40.0));
    (1.0 - 2.0 / (e + 1.0)).copysign(z)
}

impl Activation {
    pub fn is_smooth(self) -> bool {
        !matches!(self, Activation::Relu)
    }

    #[inline(always)]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => tanh(z),
            Activation::Sin => z.sin(),
            Activation::Relu => z.max(0.0),
        }
    }

    /// `(φ(z), φ'(z), φ''(z))` built from `Scalar` operations.
    pub fn eval_with_derivatives<T: Scalar>(self, z: T) -> Result<(T, T, T)> {
        match self {
            Activation::Tanh => {
                let s = z.tanh();
                let d1 = z.constant_like(1.0) - s * s;
                let d2 = z.constant_like(-2.0) * s * d1;
                Ok((s, d1, d2))
            }
            Activation::Sin => {
                let s = z.sin();
                // Kept out of sight of the optimizer: a fused `sincos` call
                // may return a sine that differs from `sin` in the last bit.
                Ok((s, std::hint::black_box(z).cos(), -s))
            }
            Activation::Relu => Err(Error::NonSmoothActivation(self)),
        }
    }

    /// `(φ', φ'', φ''')` at `z`, given `phi = φ(z)` already evaluated.
    #[inline(always)]
    pub(crate) fn higher_derivatives(self, z: f64, phi: f64) -> (f64, f64, f64) {
        match self {
            Activation::Tanh => {
                let d1 = 1.0 - phi * phi;
                (d1, -2.0 * phi * d1, -2.0 * d1 * (1.0 - 3.0 * phi * phi))
            }
            Activation::Sin => {
                let c = std::hint::black_box(z).cos();
                (c, -phi, -c)
            }
            Activation::Relu => (if z > 0.0 { 1.0 } else { 0.0 }, 0.0, 0.0),
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Activation::Tanh => "tanh",
            Activation::Sin => "sin",
            Activation::Relu => "relu",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tanh_matches_libm() {
        let mut worst: f64 = 0.0;
        for k in -40_000..=40_000 {
            let z = k as f64 * 5e-4;
            worst = worst.max((tanh(z) - z.tanh()).abs());
        }
        assert!(worst < 5e-16, "{worst}");
        assert_eq!(tanh(0.0), 0.0);
        assert_eq!(tanh(50.0), 1.0);
        assert_eq!(tanh(-50.0), -1.0);
        assert!((tanh(1e-12) - 1e-12).abs() < 3e-16);
    }

    #[test]
    fn higher_derivatives_match_finite_differences() {
        let h = 1e-4;
        for act in [Activation::Tanh, Activation::Sin] {
            for &z in &[-1.3, -0.2, 0.0, 0.5, 2.1] {
                let (d1, d2, d3) = act.higher_derivatives(z, act.apply(z));
                let f = |z: f64| act.apply(z);
                let fd1 = (f(z + h) - f(z - h)) / (2.0 * h);
                let fd2 = (f(z + h) - 2.0 * f(z) + f(z - h)) / (h * h);
                let g = |z: f64| act.higher_derivatives(z, act.apply(z)).1;
                let fd3 = (g(z + h) - g(z - h)) / (2.0 * h);
                assert!((d1 - fd1).abs() < 1e-8, "{act} {z}");
                assert!((d2 - fd2).abs() < 1e-6, "{act} {z}");
                assert!((d3 - fd3).abs() < 1e-7, "{act} {z}");
            }
        }
    }
}
