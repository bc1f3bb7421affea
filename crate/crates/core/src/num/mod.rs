//! Deterministic dense-matrix kernel: the small set of numeric primitives the
//! model code builds on. Everything is `f64`, row-major, and evaluated in a
//! fixed order so that identical inputs always produce identical bits.

mod adam;
mod gradcheck;
mod matrix;
mod ops;

pub use adam::{AdamConfig, AdamState};
pub use gradcheck::finite_diff_grad;
pub use matrix::Matrix;
pub use ops::{mae, mae_grad, mse, relu, relu_mask, sigmoid, tanh};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NumError {
    #[error("{op}: shape mismatch ({0}x{1} vs {2}x{3})", .left.0, .left.1, .right.0, .right.1)]
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("non-finite gradient in tensor `{name}` at step {step}")]
    NonFiniteGradient { name: String, step: u64 },
    #[error("expected {params} gradient tensors, got {grads}")]
    GradientCountMismatch { params: usize, grads: usize },
}
