//! Relationship-blind reference model: a two-layer feedforward network
//! mapping the whole current vocabulary vector to the predicted next one.
//! It sees no graph structure at all, which is exactly what makes it a
//! useful control for the layer models.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checkpoint::{self, CheckpointError};
use crate::lexicon::WordId;
use crate::num::{mae, mae_grad, sigmoid, Matrix, NumError};
use crate::observations::{ObservationSequence, VocabularySnapshot};
use crate::tgcn::{EpochRecord, TrainingHistory};

pub const CHECKPOINT_KIND: &str = "ffnn-baseline-model";

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("training dataset is empty")]
    EmptyDataset,
    #[error("non-finite loss at epoch {epoch}, pair {pair} (learning rate too hot?)")]
    NonFiniteLoss { epoch: usize, pair: usize },
    #[error("input has {got} entries, vocabulary has {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("model has not been trained")]
    UntrainedModel,
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FfnnConfig {
    pub hidden_units: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for FfnnConfig {
    fn default() -> Self {
        FfnnConfig {
            hidden_units: 500,
            learning_rate: 0.8,
            momentum: 0.9,
            epochs: 1000,
            seed: 0,
        }
    }
}

impl FfnnConfig {
    pub fn validate(&self) -> Result<(), BaselineError> {
        if self.hidden_units < 1 {
            return Err(BaselineError::InvalidConfig(
                "hidden_units must be at least 1".into(),
            ));
        }
        if self.epochs < 1 {
            return Err(BaselineError::InvalidConfig(
                "epochs must be at least 1".into(),
            ));
        }
        if !self.learning_rate.is_finite()
            || self.learning_rate <= 0.0
            || !(0.0..1.0).contains(&self.momentum)
        {
            return Err(BaselineError::InvalidConfig(
                "learning_rate must be positive and momentum in [0, 1)".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FfnnParams {
    pub w1: Matrix,
    pub b1: Matrix,
    pub w2: Matrix,
    pub b2: Matrix,
}

impl FfnnParams {
    fn init(vocab: usize, hidden: usize, rng: &mut ChaCha20Rng) -> Self {
        use rand::Rng;
        let glorot = |rows: usize, cols: usize, rng: &mut ChaCha20Rng| {
            let bound = (6.0 / (rows + cols) as f64).sqrt();
            let data: Vec<f64> = (0..rows * cols)
                .map(|_| rng.random_range(-bound..bound))
                .collect();
            Matrix::from_vec(rows, cols, data)
        };
        FfnnParams {
            w1: glorot(vocab, hidden, rng),
            b1: Matrix::zeros(1, hidden),
            w2: glorot(hidden, vocab, rng),
            b2: Matrix::zeros(1, vocab),
        }
    }

    fn zeros_like(&self) -> Self {
        FfnnParams {
            w1: Matrix::zeros(self.w1.rows(), self.w1.cols()),
            b1: Matrix::zeros(self.b1.rows(), self.b1.cols()),
            w2: Matrix::zeros(self.w2.rows(), self.w2.cols()),
            b2: Matrix::zeros(self.b2.rows(), self.b2.cols()),
        }
    }

    pub fn as_vec(&self) -> Vec<&Matrix> {
        vec![&self.w1, &self.b1, &self.w2, &self.b2]
    }

    pub fn from_slice(tensors: &[Matrix]) -> Self {
        assert_eq!(tensors.len(), 4);
        FfnnParams {
            w1: tensors[0].clone(),
            b1: tensors[1].clone(),
            w2: tensors[2].clone(),
            b2: tensors[3].clone(),
        }
    }

    pub fn to_owned_vec(&self) -> Vec<Matrix> {
        self.as_vec().into_iter().cloned().collect()
    }
}

pub const FFNN_PARAM_NAMES: [&str; 4] = ["w1", "b1", "w2", "b2"];

/// sigmoid(W2 sigmoid(W1 x + b1) + b2) for a 1-by-vocab input row.
pub fn ffnn_forward(input: &Matrix, params: &FfnnParams) -> Result<Matrix, BaselineError> {
    if input.rows() != 1 || input.cols() != params.w1.rows() {
        return Err(BaselineError::LengthMismatch {
            expected: params.w1.rows(),
            got: input.cols() * input.rows(),
        });
    }
    let h = sigmoid(&input.matmul(&params.w1)?.add_row_broadcast(&params.b1)?);
    let y = sigmoid(&h.matmul(&params.w2)?.add_row_broadcast(&params.b2)?);
    Ok(y)
}

fn forward_cached(input: &Matrix, params: &FfnnParams) -> Result<(Matrix, Matrix), BaselineError> {
    let h = sigmoid(&input.matmul(&params.w1)?.add_row_broadcast(&params.b1)?);
    let y = sigmoid(&h.matmul(&params.w2)?.add_row_broadcast(&params.b2)?);
    Ok((h, y))
}

/// MAE loss plus analytic gradients for one (current, next) pair.
pub fn pair_loss_and_grads(
    input: &Matrix,
    target: &Matrix,
    params: &FfnnParams,
) -> Result<(f64, FfnnParams), BaselineError> {
    let (h, y) = forward_cached(input, params)?;
    let loss = mae(&y, target)?;

    let dy = mae_grad(&y, target)?;
    let do2 = dy.hadamard(&y.map(|v| v * (1.0 - v)))?;
    let dw2 = h.transpose().matmul(&do2)?;
    let db2 = do2.clone();
    let dh = do2.matmul(&params.w2.transpose())?;
    let do1 = dh.hadamard(&h.map(|v| v * (1.0 - v)))?;
    let dw1 = input.transpose().matmul(&do1)?;
    let db1 = do1;

    Ok((
        loss,
        FfnnParams {
            w1: dw1,
            b1: db1,
            w2: dw2,
            b2: db2,
        },
    ))
}

/// One supervised example: vocabulary vectors at consecutive observations.
#[derive(Debug, Clone, PartialEq)]
pub struct VocabPair {
    pub current: Matrix,
    pub next: Matrix,
}

/// Encodes a snapshot as a 1-by-vocab row over the given word ordering.
pub fn vocab_vector(snapshot: &VocabularySnapshot, vocabulary: &[WordId]) -> Matrix {
    let data: Vec<f64> = vocabulary.iter().map(|id| snapshot.encoded(*id)).collect();
    Matrix::from_vec(1, vocabulary.len(), data)
}

/// Extracts the same supervised task the layer models train on: the last
/// input snapshot of each window predicting the window's final snapshot.
pub fn pairs_from_sequences(
    sequences: &[ObservationSequence],
    vocabulary: &[WordId],
) -> Vec<VocabPair> {
    sequences
        .iter()
        .filter(|seq| seq.len() >= 2)
        .map(|seq| {
            let n = seq.len();
            VocabPair {
                current: vocab_vector(&seq.snapshots[n - 2], vocabulary),
                next: vocab_vector(&seq.snapshots[n - 1], vocabulary),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FfnnModel {
    pub vocabulary: Vec<WordId>,
    pub config: FfnnConfig,
    pub params: FfnnParams,
    pub trained: bool,
}

/// Per-pair SGD with classical momentum, shuffled each epoch under the seed.
pub fn ffnn_train(
    pairs: &[VocabPair],
    vocabulary: &[WordId],
    config: &FfnnConfig,
) -> Result<(FfnnModel, TrainingHistory), BaselineError> {
    config.validate()?;
    if pairs.is_empty() {
        return Err(BaselineError::EmptyDataset);
    }
    for pair in pairs {
        if pair.current.cols() != vocabulary.len() || pair.next.cols() != vocabulary.len() {
            return Err(BaselineError::LengthMismatch {
                expected: vocabulary.len(),
                got: pair.current.cols(),
            });
        }
    }
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let mut params = FfnnParams::init(vocabulary.len(), config.hidden_units, &mut rng);
    let mut velocity = params.zeros_like();

    let mut history = TrainingHistory::default();
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for (k, &i) in order.iter().enumerate() {
            let pair = &pairs[i];
            let (loss, grads) = pair_loss_and_grads(&pair.current, &pair.next, &params)?;
            if !loss.is_finite() {
                return Err(BaselineError::NonFiniteLoss { epoch, pair: k });
            }
            // v <- momentum v - lr g; p <- p + v
            let step = |p: &mut Matrix, v: &mut Matrix, g: &Matrix| {
                *v = v
                    .scale(config.momentum)
                    .sub(&g.scale(config.learning_rate))
                    .expect("shapes agree");
                p.add_in_place(v).expect("shapes agree");
            };
            step(&mut params.w1, &mut velocity.w1, &grads.w1);
            step(&mut params.b1, &mut velocity.b1, &grads.b1);
            step(&mut params.w2, &mut velocity.w2, &grads.w2);
            step(&mut params.b2, &mut velocity.b2, &grads.b2);
        }
        let mut epoch_mae = 0.0;
        for pair in pairs {
            let y = ffnn_forward(&pair.current, &params)?;
            epoch_mae += mae(&y, &pair.next)?;
        }
        epoch_mae /= pairs.len() as f64;
        if !epoch_mae.is_finite() {
            return Err(BaselineError::NonFiniteLoss { epoch, pair: 0 });
        }
        history.epochs.push(EpochRecord {
            epoch,
            train_mae: epoch_mae,
            validation_mae: None,
            validation_mse: None,
        });
    }

    Ok((
        FfnnModel {
            vocabulary: vocabulary.to_vec(),
            config: config.clone(),
            params,
            trained: true,
        },
        history,
    ))
}

impl FfnnModel {
    /// Next-snapshot scores for every vocabulary word.
    pub fn predict_next(
        &self,
        current: &VocabularySnapshot,
    ) -> Result<BTreeMap<WordId, f64>, BaselineError> {
        if !self.trained {
            return Err(BaselineError::UntrainedModel);
        }
        let x = vocab_vector(current, &self.vocabulary);
        let y = ffnn_forward(&x, &self.params)?;
        Ok(self
            .vocabulary
            .iter()
            .enumerate()
            .map(|(i, id)| (*id, y.get(0, i)))
            .collect())
    }

    pub fn save(&self, path: &Path) -> Result<(), BaselineError> {
        checkpoint::save_json(CHECKPOINT_KIND, self, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, BaselineError> {
        Ok(checkpoint::load_json(CHECKPOINT_KIND, path)?)
    }
}
