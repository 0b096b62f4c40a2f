//! Flux models, the viscous residual `∂t u + f'(u) ∂x u − γ ∂xx u`, and the
//! vanishing-viscosity schedule that assigns one `γ` per stacked stage.

use serde::{Deserialize, Serialize};

use crate::autodiff::{Jet2, Scalar};
use crate::error::{Error, Result};

/// A `C²` flux function on densities in `[0, 1]`.
///
/// The Godunov interface flux in [`crate::godunov`] assumes the flux is
/// concave with a single maximum at [`Flux::critical_density`].
pub trait Flux {
    fn flux<T: Scalar>(&self, u: T) -> T;
    fn flux_prime<T: Scalar>(&self, u: T) -> T;
    fn flux_second<T: Scalar>(&self, u: T) -> T;
    /// `max |f'(u)|` over `[0, 1]`.
    fn max_speed(&self) -> f64;
    /// Density at which the flux is maximal.
    fn critical_density(&self) -> f64;
}

/// `f(u) = v_f · u · (1 − u)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenshieldsFlux {
    pub v_f: f64,
}

impl GreenshieldsFlux {
    pub fn new(v_f: f64) -> Result<Self> {
        if !(v_f > 0.0 && v_f.is_finite()) {
            return Err(Error::Config(format!("free-flow speed must be positive, got {v_f}")));
        }
        Ok(Self { v_f })
    }
}

impl Default for GreenshieldsFlux {
    fn default() -> Self {
        Self { v_f: 1.0 }
    }
}

impl Flux for GreenshieldsFlux {
    #[inline]
    fn flux<T: Scalar>(&self, u: T) -> T {
        u.constant_like(self.v_f) * u * (u.constant_like(1.0) - u)
    }

    #[inline]
    fn flux_prime<T: Scalar>(&self, u: T) -> T {
        u.constant_like(self.v_f) * (u.constant_like(1.0) - u.constant_like(2.0) * u)
    }

    #[inline]
    fn flux_second<T: Scalar>(&self, u: T) -> T {
        u.constant_like(-2.0 * self.v_f)
    }

    fn max_speed(&self) -> f64 {
        self.v_f
    }

    fn critical_density(&self) -> f64 {
        0.5
    }
}

/// Pointwise residual `∂t û + f'(û) ∂x û − γ ∂xx û` of a solution jet.
///
/// With `gamma == 0` the `∂xx` slot is not read.
pub fn residual<T: Scalar, F: Flux>(u: Jet2<T>, flux: &F, gamma: f64) -> T {
    let r = u.d_t + flux.flux_prime(u.value) * u.d_x;
    if gamma == 0.0 {
        r
    } else {
        r - u.value.constant_like(gamma) * u.d_xx
    }
}

/// `γ_i = γ_init · (1 − (i/n)^p)` for stages `i = 0..=n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViscositySchedule {
    pub gamma_init: f64,
    pub p: f64,
    pub n: usize,
}

impl ViscositySchedule {
    pub fn new(gamma_init: f64, p: f64, n: usize) -> Result<Self> {
        if !(gamma_init >= 0.0 && gamma_init.is_finite()) {
            return Err(Error::Config(format!("gamma_init must be >= 0, got {gamma_init}")));
        }
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::Config(format!("schedule exponent must exceed 1, got {p}")));
        }
        Ok(Self { gamma_init, p, n })
    }

    pub fn viscosity_at(&self, i: usize) -> Result<f64> {
        if self.n == 0 {
            return Err(Error::Config(
                "viscosity schedule is undefined for zero residual blocks".into(),
            ));
        }
        if i > self.n {
            return Err(Error::IndexOutOfRange {
                index: i,
                max: self.n,
            });
        }
        if i == self.n {
            return Ok(0.0);
        }
        let ratio = i as f64 / self.n as f64;
        Ok(self.gamma_init * (1.0 - ratio.powf(self.p)))
    }

    /// Viscosity used for stage `i` during training: the schedule value,
    /// except that a stack without residual blocks is a plain inviscid PINN.
    pub fn stage_viscosity(&self, i: usize) -> Result<f64> {
        if self.n == 0 {
            if i == 0 {
                Ok(0.0)
            } else {
                Err(Error::IndexOutOfRange { index: i, max: 0 })
            }
        } else {
            self.viscosity_at(i)
        }
    }

    /// `[γ_0, …, γ_n]` as used in training.
    pub fn stage_viscosities(&self) -> Vec<f64> {
        (0..=self.n)
            .map(|i| self.stage_viscosity(i).expect("index within schedule"))
            .collect()
    }
}
