//! Dense feed-forward networks: `tanh` hidden layers and a linear scalar
//! output, evaluable on plain reals, on [`Jet2`](crate::autodiff::Jet2)
//! inputs, and in column batches for training.

mod activation;
pub mod batch;
mod kernel;
mod dense;

pub use activation::{tanh, Activation};
pub use dense::{eval_jets, DenseNet, NetDoc};
