//! Vanishing-viscosity stacked residual physics-informed networks for
//! scalar one-dimensional conservation laws `∂t u + ∂x f(u) = 0`.
//!
//! A base network is trained on the viscous problem `∂t u + ∂x f(u) =
//! γ ∂xx u`; residual blocks scaled by learnable `|α_i|` then correct it
//! stage by stage while the viscosity decays to zero. A first-order
//! Godunov solver provides measurements and the reference solution.
//!
//! Module map:
//!
//! - [`autodiff`]: second-order jets and a scalar reverse-mode tape.
//! - [`network`]: dense networks, scalar/jet evaluation and a batched kernel.
//! - [`pde`]: flux models, the residual, the viscosity schedule.
//! - [`stacked`]: the stacked residual model and its checkpoints.
//! - [`godunov`]: reference finite-volume solver and measurement sampling.
//! - [`trainer`]: losses, Adam, early stopping, the training loop.
//! - [`metrics`]: relative L² and point-wise error statistics.
//! - [`experiment`]: configuration and the simulate/train/evaluate/sweep runs.
//!
//! Runnable walkthroughs live in the crate's `examples/` directory.

pub mod autodiff;
pub mod error;
pub mod experiment;
pub mod godunov;
pub mod metrics;
pub mod network;
pub mod pde;
pub mod stacked;
pub mod trainer;

pub use error::{Error, Result};
