//! The per-layer spatio-temporal model: one graph-convolution block for
//! spatial structure feeding a gated recurrent block for temporal structure,
//! with a sigmoid head scoring each word's comprehension at the next
//! observation.
//!
//! Every tensor is dense f64 and every gradient is written out by hand; the
//! finite-difference checker in `num` is the authority the analytic pass is
//! tested against. Training is deterministic under the config seed.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checkpoint::{self, CheckpointError};
use crate::lexicon::WordId;
use crate::num::{
    mae, mae_grad, relu, relu_mask, sigmoid, tanh, AdamConfig, AdamState, Matrix, NumError,
};
use crate::observations::{ComprehensionState, ObservationSequence, VocabularySnapshot};

pub const CHECKPOINT_KIND: &str = "tgcn-layer-model";

#[derive(Debug, Error)]
pub enum TgcnError {
    #[error("training dataset is empty")]
    EmptyDataset,
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error("sequence supplies {got} input snapshots, model expects {expected}")]
    BadSequenceLength { expected: usize, got: usize },
    #[error("adjacency is {adj}x{adj} but the layer has {nodes} nodes")]
    NodeMismatch { adj: usize, nodes: usize },
    #[error("model for layer `{0}` has not been trained")]
    UntrainedModel(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
}

/// Model hyperparameters. The window length counts the full sequence; the
/// model consumes the first `sequence_length - prediction_length` snapshots
/// and is trained against the last.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TgcnConfig {
    pub sequence_length: usize,
    pub prediction_length: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub gcn_output_units: usize,
    pub gru_hidden_units: usize,
    pub learning_rate: f64,
    pub dropout: Option<f64>,
    pub seed: u64,
}

impl Default for TgcnConfig {
    fn default() -> Self {
        TgcnConfig {
            sequence_length: 4,
            prediction_length: 1,
            epochs: 1000,
            batch_size: 4,
            gcn_output_units: 16,
            gru_hidden_units: 32,
            learning_rate: 1e-2,
            dropout: None,
            seed: 0,
        }
    }
}

impl TgcnConfig {
    pub fn input_steps(&self) -> usize {
        self.sequence_length - self.prediction_length
    }

    pub fn validate(&self) -> Result<(), TgcnError> {
        if self.sequence_length < 2 {
            return Err(TgcnError::InvalidConfig(
                "sequence_length must be at least 2".into(),
            ));
        }
        if self.prediction_length != 1 {
            return Err(TgcnError::InvalidConfig(
                "prediction_length must be 1".into(),
            ));
        }
        if self.epochs < 1 {
            return Err(TgcnError::InvalidConfig("epochs must be at least 1".into()));
        }
        if self.batch_size < 1 {
            return Err(TgcnError::InvalidConfig(
                "batch_size must be at least 1".into(),
            ));
        }
        if self.gcn_output_units < 1 || self.gru_hidden_units < 1 {
            return Err(TgcnError::InvalidConfig(
                "layer widths must be at least 1".into(),
            ));
        }
        if let Some(p) = self.dropout {
            if !(0.0..1.0).contains(&p) {
                return Err(TgcnError::InvalidConfig(format!(
                    "dropout {p} outside [0, 1)"
                )));
            }
        }
        Ok(())
    }
}

/// All trainable tensors, in one fixed order shared by the optimizer, the
/// gradient checker, and the checkpoint format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TgcnParams {
    pub w_g: Matrix,
    pub w_z: Matrix,
    pub u_z: Matrix,
    pub b_z: Matrix,
    pub w_r: Matrix,
    pub u_r: Matrix,
    pub b_r: Matrix,
    pub w_h: Matrix,
    pub u_h: Matrix,
    pub b_h: Matrix,
    pub w_o: Matrix,
    pub b_o: Matrix,
}

pub const PARAM_NAMES: [&str; 12] = [
    "w_g", "w_z", "u_z", "b_z", "w_r", "u_r", "b_r", "w_h", "u_h", "b_h", "w_o", "b_o",
];

fn glorot(rows: usize, cols: usize, rng: &mut ChaCha20Rng) -> Matrix {
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    let data: Vec<f64> = (0..rows * cols)
        .map(|_| rng.random_range(-bound..bound))
        .collect();
    Matrix::from_vec(rows, cols, data)
}

impl TgcnParams {
    /// Seeded symmetric-uniform initialization; biases start at zero.
    pub fn init(gcn_out: usize, hidden: usize, rng: &mut ChaCha20Rng) -> Self {
        TgcnParams {
            w_g: glorot(1, gcn_out, rng),
            w_z: glorot(gcn_out, hidden, rng),
            u_z: glorot(hidden, hidden, rng),
            b_z: Matrix::zeros(1, hidden),
            w_r: glorot(gcn_out, hidden, rng),
            u_r: glorot(hidden, hidden, rng),
            b_r: Matrix::zeros(1, hidden),
            w_h: glorot(gcn_out, hidden, rng),
            u_h: glorot(hidden, hidden, rng),
            b_h: Matrix::zeros(1, hidden),
            w_o: glorot(hidden, 1, rng),
            b_o: Matrix::zeros(1, 1),
        }
    }

    pub fn zeros(gcn_out: usize, hidden: usize) -> Self {
        TgcnParams {
            w_g: Matrix::zeros(1, gcn_out),
            w_z: Matrix::zeros(gcn_out, hidden),
            u_z: Matrix::zeros(hidden, hidden),
            b_z: Matrix::zeros(1, hidden),
            w_r: Matrix::zeros(gcn_out, hidden),
            u_r: Matrix::zeros(hidden, hidden),
            b_r: Matrix::zeros(1, hidden),
            w_h: Matrix::zeros(gcn_out, hidden),
            u_h: Matrix::zeros(hidden, hidden),
            b_h: Matrix::zeros(1, hidden),
            w_o: Matrix::zeros(hidden, 1),
            b_o: Matrix::zeros(1, 1),
        }
    }

    pub fn zeros_like(&self) -> Self {
        TgcnParams::zeros(self.w_g.cols(), self.u_z.rows())
    }

    pub fn as_vec(&self) -> Vec<&Matrix> {
        vec![
            &self.w_g, &self.w_z, &self.u_z, &self.b_z, &self.w_r, &self.u_r, &self.b_r, &self.w_h,
            &self.u_h, &self.b_h, &self.w_o, &self.b_o,
        ]
    }

    pub fn as_mut_vec(&mut self) -> Vec<&mut Matrix> {
        vec![
            &mut self.w_g,
            &mut self.w_z,
            &mut self.u_z,
            &mut self.b_z,
            &mut self.w_r,
            &mut self.u_r,
            &mut self.b_r,
            &mut self.w_h,
            &mut self.u_h,
            &mut self.b_h,
            &mut self.w_o,
            &mut self.b_o,
        ]
    }

    pub fn to_owned_vec(&self) -> Vec<Matrix> {
        self.as_vec().into_iter().cloned().collect()
    }

    /// Rebuilds params from tensors in `PARAM_NAMES` order.
    pub fn from_slice(tensors: &[Matrix]) -> Self {
        assert_eq!(tensors.len(), PARAM_NAMES.len());
        TgcnParams {
            w_g: tensors[0].clone(),
            w_z: tensors[1].clone(),
            u_z: tensors[2].clone(),
            b_z: tensors[3].clone(),
            w_r: tensors[4].clone(),
            u_r: tensors[5].clone(),
            b_r: tensors[6].clone(),
            w_h: tensors[7].clone(),
            u_h: tensors[8].clone(),
            b_h: tensors[9].clone(),
            w_o: tensors[10].clone(),
            b_o: tensors[11].clone(),
        }
    }

    pub fn named_shapes(&self) -> Vec<(&'static str, (usize, usize))> {
        PARAM_NAMES
            .iter()
            .zip(self.as_vec())
            .map(|(name, m)| (*name, m.shape()))
            .collect()
    }

    pub fn accumulate(&mut self, other: &TgcnParams) {
        for (mine, theirs) in self.as_mut_vec().into_iter().zip(other.as_vec()) {
            mine.add_in_place(theirs).expect("gradient shapes agree");
        }
    }

    pub fn scale_in_place(&mut self, s: f64) {
        for m in self.as_mut_vec() {
            *m = m.scale(s);
        }
    }
}

/// Spatial block: act(Â · X · W) with ReLU.
pub fn gcn_forward(features: &Matrix, adj: &Matrix, weights: &Matrix) -> Result<Matrix, TgcnError> {
    if adj.cols() != features.rows() {
        return Err(TgcnError::NodeMismatch {
            adj: adj.rows(),
            nodes: features.rows(),
        });
    }
    let pre = adj.matmul(features)?.matmul(weights)?;
    Ok(relu(&pre))
}

/// Temporal block: one GRU step applied per node row.
pub fn gru_step(h_prev: &Matrix, gc_x: &Matrix, params: &TgcnParams) -> Result<Matrix, TgcnError> {
    let p_z = gc_x
        .matmul(&params.w_z)?
        .add(&h_prev.matmul(&params.u_z)?)?
        .add_row_broadcast(&params.b_z)?;
    let z = sigmoid(&p_z);
    let p_r = gc_x
        .matmul(&params.w_r)?
        .add(&h_prev.matmul(&params.u_r)?)?
        .add_row_broadcast(&params.b_r)?;
    let r = sigmoid(&p_r);
    let rh = r.hadamard(h_prev)?;
    let p_c = gc_x
        .matmul(&params.w_h)?
        .add(&rh.matmul(&params.u_h)?)?
        .add_row_broadcast(&params.b_h)?;
    let c = tanh(&p_c);
    // h = z (.) h_prev + (1 - z) (.) c
    let keep = z.hadamard(h_prev)?;
    let update = z.map(|v| 1.0 - v).hadamard(&c)?;
    Ok(keep.add(&update)?)
}

/// Everything the backward pass needs from one time step.
struct StepCache {
    ax: Matrix,
    pre_g: Matrix,
    drop_mask: Option<Matrix>,
    g: Matrix,
    z: Matrix,
    r: Matrix,
    rh: Matrix,
    c: Matrix,
    h_prev: Matrix,
}

struct ForwardCache {
    steps: Vec<StepCache>,
    h_final: Matrix,
    y: Matrix,
}

fn forward_cached(
    inputs: &[Matrix],
    adj: &Matrix,
    params: &TgcnParams,
    mut dropout: Option<(f64, &mut ChaCha20Rng)>,
) -> Result<ForwardCache, TgcnError> {
    let n = adj.rows();
    let hidden = params.u_z.rows();
    let mut h = Matrix::zeros(n, hidden);
    let mut steps = Vec::with_capacity(inputs.len());
    for x in inputs {
        if adj.cols() != x.rows() {
            return Err(TgcnError::NodeMismatch {
                adj: adj.rows(),
                nodes: x.rows(),
            });
        }
        let ax = adj.matmul(x)?;
        let pre_g = ax.matmul(&params.w_g)?;
        let mut g = relu(&pre_g);
        // inverted dropout on the spatial features: surviving units scaled
        // by 1/keep so evaluation needs no rescaling
        let drop_mask = match dropout {
            Some((p, ref mut rng)) if p > 0.0 => {
                let keep = 1.0 - p;
                let mut mask = Matrix::zeros(g.rows(), g.cols());
                for v in mask.data_mut() {
                    *v = if rng.random_range(0.0..1.0) < keep {
                        1.0 / keep
                    } else {
                        0.0
                    };
                }
                g = g.hadamard(&mask)?;
                Some(mask)
            }
            _ => None,
        };

        let p_z = g
            .matmul(&params.w_z)?
            .add(&h.matmul(&params.u_z)?)?
            .add_row_broadcast(&params.b_z)?;
        let z = sigmoid(&p_z);
        let p_r = g
            .matmul(&params.w_r)?
            .add(&h.matmul(&params.u_r)?)?
            .add_row_broadcast(&params.b_r)?;
        let r = sigmoid(&p_r);
        let rh = r.hadamard(&h)?;
        let p_c = g
            .matmul(&params.w_h)?
            .add(&rh.matmul(&params.u_h)?)?
            .add_row_broadcast(&params.b_h)?;
        let c = tanh(&p_c);
        let h_next = z.hadamard(&h)?.add(&z.map(|v| 1.0 - v).hadamard(&c)?)?;

        steps.push(StepCache {
            ax,
            pre_g,
            drop_mask,
            g,
            z,
            r,
            rh,
            c,
            h_prev: h,
        });
        h = h_next;
    }
    let o = h.matmul(&params.w_o)?.add_row_broadcast(&params.b_o)?;
    let y = sigmoid(&o);
    Ok(ForwardCache {
        steps,
        h_final: h,
        y,
    })
}

/// Prediction for one input window: a score in (0, 1) per layer node.
pub fn forward(inputs: &[Matrix], adj: &Matrix, params: &TgcnParams) -> Result<Matrix, TgcnError> {
    Ok(forward_cached(inputs, adj, params, None)?.y)
}

/// MAE loss plus analytic gradients for one sequence.
fn loss_and_grads(
    inputs: &[Matrix],
    target: &Matrix,
    adj: &Matrix,
    params: &TgcnParams,
    dropout: Option<(f64, &mut ChaCha20Rng)>,
) -> Result<(f64, TgcnParams), TgcnError> {
    let cache = forward_cached(inputs, adj, params, dropout)?;
    let loss = mae(&cache.y, target)?;
    let mut grads = params.zeros_like();

    // head: y = sigmoid(h_final w_o + b_o)
    let dy = mae_grad(&cache.y, target)?;
    let dsig = cache.y.map(|v| v * (1.0 - v));
    let do_ = dy.hadamard(&dsig)?;
    grads.w_o = cache.h_final.transpose().matmul(&do_)?;
    grads.b_o = do_.col_sums();
    let mut dh = do_.matmul(&params.w_o.transpose())?;

    for step in cache.steps.iter().rev() {
        // h = z (.) h_prev + (1-z) (.) c
        let dz = dh.hadamard(&step.h_prev.sub(&step.c)?)?;
        let dc = dh.hadamard(&step.z.map(|v| 1.0 - v))?;
        let mut dh_prev = dh.hadamard(&step.z)?;

        // c = tanh(g w_h + rh u_h + b_h)
        let dp_c = dc.hadamard(&step.c.map(|v| 1.0 - v * v))?;
        grads.w_h.add_in_place(&step.g.transpose().matmul(&dp_c)?)?;
        grads
            .u_h
            .add_in_place(&step.rh.transpose().matmul(&dp_c)?)?;
        grads.b_h.add_in_place(&dp_c.col_sums())?;
        let mut dg = dp_c.matmul(&params.w_h.transpose())?;
        let drh = dp_c.matmul(&params.u_h.transpose())?;

        // rh = r (.) h_prev
        let dr = drh.hadamard(&step.h_prev)?;
        dh_prev.add_in_place(&drh.hadamard(&step.r)?)?;

        // r = sigmoid(g w_r + h_prev u_r + b_r)
        let dp_r = dr.hadamard(&step.r.map(|v| v * (1.0 - v)))?;
        grads.w_r.add_in_place(&step.g.transpose().matmul(&dp_r)?)?;
        grads
            .u_r
            .add_in_place(&step.h_prev.transpose().matmul(&dp_r)?)?;
        grads.b_r.add_in_place(&dp_r.col_sums())?;
        dg.add_in_place(&dp_r.matmul(&params.w_r.transpose())?)?;
        dh_prev.add_in_place(&dp_r.matmul(&params.u_r.transpose())?)?;

        // z = sigmoid(g w_z + h_prev u_z + b_z)
        let dp_z = dz.hadamard(&step.z.map(|v| v * (1.0 - v)))?;
        grads.w_z.add_in_place(&step.g.transpose().matmul(&dp_z)?)?;
        grads
            .u_z
            .add_in_place(&step.h_prev.transpose().matmul(&dp_z)?)?;
        grads.b_z.add_in_place(&dp_z.col_sums())?;
        dg.add_in_place(&dp_z.matmul(&params.w_z.transpose())?)?;
        dh_prev.add_in_place(&dp_z.matmul(&params.u_z.transpose())?)?;

        // g = relu(ax w_g), possibly with inverted dropout on top
        if let Some(mask) = &step.drop_mask {
            dg = dg.hadamard(mask)?;
        }
        let dpre_g = dg.hadamard(&relu_mask(&step.pre_g))?;
        grads
            .w_g
            .add_in_place(&step.ax.transpose().matmul(&dpre_g)?)?;

        dh = dh_prev;
    }
    Ok((loss, grads))
}

/// Public wrapper exposing one-sequence loss and gradients for verification
/// against finite differences.
pub fn sequence_loss_and_grads(
    inputs: &[Matrix],
    target: &Matrix,
    adj: &Matrix,
    params: &TgcnParams,
) -> Result<(f64, TgcnParams), TgcnError> {
    loss_and_grads(inputs, target, adj, params, None)
}

/// One training example projected onto a layer: input feature matrices for
/// the first W-1 snapshots and the target features of snapshot W.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedSequence {
    pub inputs: Vec<Matrix>,
    pub target: Matrix,
}

/// Encodes a snapshot as an n-by-1 feature column over the layer's node
/// ordering.
pub fn project_snapshot(snapshot: &VocabularySnapshot, nodes: &[WordId]) -> Matrix {
    Matrix::column(
        &nodes
            .iter()
            .map(|id| snapshot.encoded(*id))
            .collect::<Vec<_>>(),
    )
}

/// Projects full observation sequences onto a layer. Sequence length must
/// equal the configured window.
pub fn project_sequences(
    sequences: &[ObservationSequence],
    nodes: &[WordId],
    window: usize,
) -> Result<Vec<ProjectedSequence>, TgcnError> {
    let mut out = Vec::with_capacity(sequences.len());
    for seq in sequences {
        if seq.len() != window {
            return Err(TgcnError::BadSequenceLength {
                expected: window,
                got: seq.len(),
            });
        }
        let inputs = seq.snapshots[..window - 1]
            .iter()
            .map(|s| project_snapshot(s, nodes))
            .collect();
        let target = project_snapshot(&seq.snapshots[window - 1], nodes);
        out.push(ProjectedSequence { inputs, target });
    }
    Ok(out)
}

/// A trained (or training) model for one relationship layer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayerModel {
    pub layer_name: String,
    pub nodes: Vec<WordId>,
    pub config: TgcnConfig,
    pub params: TgcnParams,
    pub trained: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_mae: f64,
    pub validation_mae: Option<f64>,
    pub validation_mse: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingHistory {
    pub epochs: Vec<EpochRecord>,
}

impl TrainingHistory {
    pub fn final_train_mae(&self) -> Option<f64> {
        self.epochs.last().map(|e| e.train_mae)
    }
}

fn dataset_mae(
    dataset: &[ProjectedSequence],
    adj: &Matrix,
    params: &TgcnParams,
) -> Result<f64, TgcnError> {
    let mut total = 0.0;
    for seq in dataset {
        let y = forward(&seq.inputs, adj, params)?;
        total += mae(&y, &seq.target)?;
    }
    Ok(total / dataset.len() as f64)
}

fn dataset_mse(
    dataset: &[ProjectedSequence],
    adj: &Matrix,
    params: &TgcnParams,
) -> Result<f64, TgcnError> {
    let mut total = 0.0;
    for seq in dataset {
        let y = forward(&seq.inputs, adj, params)?;
        total += crate::num::mse(&y, &seq.target)?;
    }
    Ok(total / dataset.len() as f64)
}

/// Trains one layer model with ADAM on MAE. Whole sequences form batches;
/// the trailing partial batch is kept. Epoch records carry the full-dataset
/// MAE after that epoch's updates, plus validation MAE and MSE when a
/// validation set is supplied.
pub fn train(
    layer_name: &str,
    nodes: &[WordId],
    adj: &Matrix,
    dataset: &[ProjectedSequence],
    validation: Option<&[ProjectedSequence]>,
    config: &TgcnConfig,
) -> Result<(LayerModel, TrainingHistory), TgcnError> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(TgcnError::EmptyDataset);
    }
    if adj.rows() != nodes.len() {
        return Err(TgcnError::NodeMismatch {
            adj: adj.rows(),
            nodes: nodes.len(),
        });
    }
    let steps = config.input_steps();
    for seq in dataset.iter().chain(validation.unwrap_or(&[])) {
        if seq.inputs.len() != steps {
            return Err(TgcnError::BadSequenceLength {
                expected: steps,
                got: seq.inputs.len(),
            });
        }
    }

    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let mut params = TgcnParams::init(config.gcn_output_units, config.gru_hidden_units, &mut rng);
    let adam_config = AdamConfig::with_learning_rate(config.learning_rate);
    let mut adam = AdamState::new(adam_config, &params.named_shapes());

    let mut history = TrainingHistory::default();
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for (batch_idx, batch) in order.chunks(config.batch_size).enumerate() {
            let mut grads = params.zeros_like();
            let mut batch_loss = 0.0;
            for &i in batch {
                let seq = &dataset[i];
                let dropout = config.dropout.map(|p| (p, &mut rng));
                let (loss, g) = loss_and_grads(&seq.inputs, &seq.target, adj, &params, dropout)?;
                batch_loss += loss;
                grads.accumulate(&g);
            }
            if !batch_loss.is_finite() {
                return Err(TgcnError::NonFiniteLoss {
                    epoch,
                    batch: batch_idx,
                });
            }
            grads.scale_in_place(1.0 / batch.len() as f64);
            adam.step(&mut params.as_mut_vec(), &grads.as_vec())?;
        }
        let train_mae = dataset_mae(dataset, adj, &params)?;
        let (validation_mae, validation_mse) = match validation {
            Some(v) if !v.is_empty() => (
                Some(dataset_mae(v, adj, &params)?),
                Some(dataset_mse(v, adj, &params)?),
            ),
            _ => (None, None),
        };
        history.epochs.push(EpochRecord {
            epoch,
            train_mae,
            validation_mae,
            validation_mse,
        });
    }

    let model = LayerModel {
        layer_name: layer_name.to_string(),
        nodes: nodes.to_vec(),
        config: config.clone(),
        params,
        trained: true,
    };
    Ok((model, history))
}

impl LayerModel {
    /// Scores for the layer's own nodes given the last W-1 snapshots.
    pub fn predict_next(
        &self,
        snapshots: &[VocabularySnapshot],
        adj: &Matrix,
    ) -> Result<BTreeMap<WordId, f64>, TgcnError> {
        if !self.trained {
            return Err(TgcnError::UntrainedModel(self.layer_name.clone()));
        }
        let steps = self.config.input_steps();
        if snapshots.len() != steps {
            return Err(TgcnError::BadSequenceLength {
                expected: steps,
                got: snapshots.len(),
            });
        }
        let inputs: Vec<Matrix> = snapshots
            .iter()
            .map(|s| project_snapshot(s, &self.nodes))
            .collect();
        let y = forward(&inputs, adj, &self.params)?;
        Ok(self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, id)| (*id, y.get(i, 0)))
            .collect())
    }

    /// Scores over an arbitrary word set: model output where the layer covers
    /// the word, otherwise the word's current encoded value (no change).
    pub fn predict_with_fallback(
        &self,
        snapshots: &[VocabularySnapshot],
        adj: &Matrix,
        vocabulary: &[WordId],
    ) -> Result<BTreeMap<WordId, f64>, TgcnError> {
        let layer_scores = self.predict_next(snapshots, adj)?;
        let current = snapshots.last().expect("length checked above");
        Ok(vocabulary
            .iter()
            .map(|id| {
                let score = layer_scores
                    .get(id)
                    .copied()
                    .unwrap_or_else(|| current.encoded(*id));
                (*id, score)
            })
            .collect())
    }

    pub fn save(&self, path: &Path) -> Result<(), TgcnError> {
        checkpoint::save_json(CHECKPOINT_KIND, self, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, TgcnError> {
        Ok(checkpoint::load_json(CHECKPOINT_KIND, path)?)
    }
}

/// Words below Full whose predicted score clears the threshold, heaviest
/// first; score ties fall back to id order, which is lexicographic by
/// construction of the lexicon.
pub fn candidate_words(
    scores: &BTreeMap<WordId, f64>,
    current: &VocabularySnapshot,
    k: usize,
    threshold: f64,
) -> Vec<(WordId, f64)> {
    let mut out: Vec<(WordId, f64)> = scores
        .iter()
        .filter(|(id, score)| {
            current.state_of(**id) < ComprehensionState::Full && **score >= threshold
        })
        .map(|(id, score)| (*id, *score))
        .collect();
    out.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("scores are finite")
            .then(a.0.cmp(&b.0))
    });
    out.truncate(k);
    out
}
