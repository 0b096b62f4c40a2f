//! Derivative machinery.
//!
//! Two pieces live here:
//!
//! - [`Jet2`], a truncated Taylor jet carrying a value together with its
//!   first time derivative, first space derivative and second space
//!   derivative. Pushing jets through a network yields every input
//!   derivative the PDE residual needs in a single forward sweep.
//! - [`Tape`] / [`Var`], a scalar reverse-mode tape. Jets whose components
//!   are tape variables make every jet slot a differentiable node, so the
//!   gradient of a residual-based loss with respect to the network
//!   parameters falls out of one backward sweep ([`grad_params`]).
//!
//! The batched training kernel in [`crate::network::batch`] hand-codes the
//! same reverse accumulation for dense layers; the tape is the general
//! route that the kernel is tested against.

mod jet;
mod tape;

pub use jet::{Jet2, Scalar};
pub use tape::{grad_params, Tape, Var};
