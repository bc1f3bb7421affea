//! Elementwise activations and the two loss functions used in training.

use super::{Matrix, NumError};

pub fn sigmoid(m: &Matrix) -> Matrix {
    m.map(sigmoid_scalar)
}

pub fn tanh(m: &Matrix) -> Matrix {
    m.map(f64::tanh)
}

pub fn relu(m: &Matrix) -> Matrix {
    m.map(|v| if v > 0.0 { v } else { 0.0 })
}

/// 1.0 where the pre-activation is strictly positive, 0.0 elsewhere.
/// The derivative at exactly zero is taken as 0.
pub fn relu_mask(pre_activation: &Matrix) -> Matrix {
    pre_activation.map(|v| if v > 0.0 { 1.0 } else { 0.0 })
}

pub(crate) fn sigmoid_scalar(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Mean absolute error over all entries.
pub fn mae(pred: &Matrix, target: &Matrix) -> Result<f64, NumError> {
    if pred.shape() != target.shape() {
        return Err(NumError::ShapeMismatch {
            op: "mae",
            left: pred.shape(),
            right: target.shape(),
        });
    }
    let n = pred.data().len() as f64;
    Ok(pred
        .data()
        .iter()
        .zip(target.data())
        .map(|(p, t)| (p - t).abs())
        .sum::<f64>()
        / n)
}

/// Mean squared error over all entries.
pub fn mse(pred: &Matrix, target: &Matrix) -> Result<f64, NumError> {
    if pred.shape() != target.shape() {
        return Err(NumError::ShapeMismatch {
            op: "mse",
            left: pred.shape(),
            right: target.shape(),
        });
    }
    let n = pred.data().len() as f64;
    Ok(pred
        .data()
        .iter()
        .zip(target.data())
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / n)
}

/// Gradient of `mae` with respect to the prediction: sign(pred - target) / n,
/// with the subgradient at zero residual taken as 0.
pub fn mae_grad(pred: &Matrix, target: &Matrix) -> Result<Matrix, NumError> {
    if pred.shape() != target.shape() {
        return Err(NumError::ShapeMismatch {
            op: "mae_grad",
            left: pred.shape(),
            right: target.shape(),
        });
    }
    let n = pred.data().len() as f64;
    pred.zip_map(target, |p, t| {
        let r = p - t;
        if r > 0.0 {
            1.0 / n
        } else if r < 0.0 {
            -1.0 / n
        } else {
            0.0
        }
    })
}
