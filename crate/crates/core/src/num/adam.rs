use serde::{Deserialize, Serialize};

use super::{Matrix, NumError};

/// ADAM hyperparameters. Defaults are the optimizer's canonical values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn with_learning_rate(learning_rate: f64) -> Self {
        assert!(learning_rate > 0.0, "learning rate must be positive");
        AdamConfig {
            learning_rate,
            ..AdamConfig::default()
        }
    }
}

#[derive(Debug, Clone)]
struct MomentSlot {
    name: String,
    first: Matrix,
    second: Matrix,
}

/// Per-tensor first/second moment buffers plus the shared step counter.
#[derive(Debug, Clone)]
pub struct AdamState {
    config: AdamConfig,
    step: u64,
    slots: Vec<MomentSlot>,
}

impl AdamState {
    pub fn new(config: AdamConfig, named_shapes: &[(&str, (usize, usize))]) -> Self {
        let slots = named_shapes
            .iter()
            .map(|(name, (rows, cols))| MomentSlot {
                name: (*name).to_string(),
                first: Matrix::zeros(*rows, *cols),
                second: Matrix::zeros(*rows, *cols),
            })
            .collect();
        AdamState {
            config,
            step: 0,
            slots,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One bias-corrected ADAM update over all parameter tensors.
    ///
    /// `params` and `grads` must be aligned with the shapes this state was
    /// created with. A non-finite gradient entry aborts the step and names
    /// the offending tensor.
    pub fn step(&mut self, params: &mut [&mut Matrix], grads: &[&Matrix]) -> Result<(), NumError> {
        if params.len() != self.slots.len() || grads.len() != self.slots.len() {
            return Err(NumError::GradientCountMismatch {
                params: self.slots.len(),
                grads: grads.len(),
            });
        }
        for (slot, grad) in self.slots.iter().zip(grads) {
            if slot.first.shape() != grad.shape() {
                return Err(NumError::ShapeMismatch {
                    op: "adam_step",
                    left: slot.first.shape(),
                    right: grad.shape(),
                });
            }
            if !grad.is_finite() {
                return Err(NumError::NonFiniteGradient {
                    name: slot.name.clone(),
                    step: self.step + 1,
                });
            }
        }

        self.step += 1;
        let t = self.step as i32;
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let bias1 = 1.0 - beta1.powi(t);
        let bias2 = 1.0 - beta2.powi(t);

        for ((slot, param), grad) in self.slots.iter_mut().zip(params).zip(grads) {
            for i in 0..grad.data().len() {
                let g = grad.data()[i];
                let m = beta1 * slot.first.data()[i] + (1.0 - beta1) * g;
                let v = beta2 * slot.second.data()[i] + (1.0 - beta2) * g * g;
                slot.first.data_mut()[i] = m;
                slot.second.data_mut()[i] = v;
                let m_hat = m / bias1;
                let v_hat = v / bias2;
                param.data_mut()[i] -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_param_state(lr: f64) -> (AdamState, Matrix) {
        let state = AdamState::new(AdamConfig::with_learning_rate(lr), &[("w", (2, 2))]);
        let param = Matrix::from_rows(&[vec![1.0, -2.0], vec![0.5, 3.0]]);
        (state, param)
    }

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        let (mut state, mut param) = single_param_state(0.1);
        let before = param.clone();
        let grad = Matrix::zeros(2, 2);
        state.step(&mut [&mut param], &[&grad]).unwrap();
        assert_eq!(param, before);
        assert_eq!(state.step_count(), 1);
    }

    #[test]
    fn first_step_moves_by_lr_times_sign() {
        let (mut state, mut param) = single_param_state(0.01);
        let before = param.clone();
        let grad = Matrix::filled(2, 2, 0.7);
        state.step(&mut [&mut param], &[&grad]).unwrap();
        for (after, prev) in param.data().iter().zip(before.data()) {
            let delta = after - prev;
            // bias-corrected first step: lr * g / (|g| + eps) ~ lr * sign(g)
            assert!((delta + 0.01).abs() < 1e-6, "unexpected step {delta}");
        }
    }

    #[test]
    fn step_size_is_bounded_by_lr() {
        let (mut state, mut param) = single_param_state(0.05);
        let grad = Matrix::filled(2, 2, -1.3);
        for _ in 0..2 {
            let before = param.clone();
            state.step(&mut [&mut param], &[&grad]).unwrap();
            for (after, prev) in param.data().iter().zip(before.data()) {
                assert!((after - prev).abs() <= 0.05 + 1e-9);
            }
        }
        assert_eq!(state.step_count(), 2);
    }

    #[test]
    fn non_finite_gradient_names_tensor() {
        let mut state = AdamState::new(AdamConfig::default(), &[("w", (1, 1)), ("b", (1, 1))]);
        let mut w = Matrix::zeros(1, 1);
        let mut b = Matrix::zeros(1, 1);
        let gw = Matrix::zeros(1, 1);
        let gb = Matrix::filled(1, 1, f64::NAN);
        let err = state.step(&mut [&mut w, &mut b], &[&gw, &gb]).unwrap_err();
        match err {
            NumError::NonFiniteGradient { name, .. } => assert_eq!(name, "b"),
            other => panic!("unexpected error {other:?}"),
        }
        // failed step must not advance the counter
        assert_eq!(state.step_count(), 0);
    }
}
