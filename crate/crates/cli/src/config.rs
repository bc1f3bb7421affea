//! The run configuration captures every knob a run depends on. A copy is
//! written into each output directory so artifacts stay self-describing and
//! downstream commands can replay the exact setup.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use lexigraph::observations::{RepairMode, SplitSpec};
use lexigraph::tgcn::TgcnConfig;

use crate::error::{CliError, CliResult};

pub const RUN_CONFIG_FILE: &str = "run_config.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: RepairMode,
    pub threshold: f64,
    pub edge_cap: usize,
    pub scale_max: f64,
    pub sequence_length: usize,
    pub prediction_length: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub gcn_output_units: usize,
    pub gru_hidden_units: usize,
    pub learning_rate: f64,
    pub dropout: Option<f64>,
    pub optimizer: String,
    pub loss: String,
    pub validation_metric: String,
    pub train_fraction: f64,
    pub validation_fraction: f64,
    pub test_fraction: f64,
    pub margin: f64,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: RepairMode::Optimistic,
            threshold: 0.5,
            edge_cap: 2000,
            scale_max: 5.0,
            sequence_length: 4,
            prediction_length: 1,
            epochs: 1000,
            batch_size: 4,
            gcn_output_units: 16,
            gru_hidden_units: 32,
            learning_rate: 1e-2,
            dropout: None,
            optimizer: "adam".to_string(),
            loss: "mae".to_string(),
            validation_metric: "mse".to_string(),
            train_fraction: 0.8,
            validation_fraction: 0.1,
            test_fraction: 0.1,
            margin: 0.3,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn input_steps(&self) -> usize {
        self.sequence_length - self.prediction_length
    }

    pub fn split_spec(&self) -> SplitSpec {
        SplitSpec::Fractions {
            train: self.train_fraction,
            validation: self.validation_fraction,
            test: self.test_fraction,
        }
    }

    /// Per-layer training configuration. Seeds are offset per layer so each
    /// model draws its own init stream while the whole run stays a function
    /// of one seed.
    pub fn tgcn_config(&self, layer_index: usize) -> TgcnConfig {
        TgcnConfig {
            sequence_length: self.sequence_length,
            prediction_length: self.prediction_length,
            epochs: self.epochs,
            batch_size: self.batch_size,
            gcn_output_units: self.gcn_output_units,
            gru_hidden_units: self.gru_hidden_units,
            learning_rate: self.learning_rate,
            dropout: self.dropout,
            seed: self
                .seed
                .wrapping_add((layer_index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.sequence_length < 2 || self.prediction_length == 0 {
            return Err(CliError::Config(anyhow::anyhow!(
                "sequence length {} and prediction length {} leave no input steps",
                self.sequence_length,
                self.prediction_length
            )));
        }
        if self.prediction_length >= self.sequence_length {
            return Err(CliError::Config(anyhow::anyhow!(
                "prediction length {} must be below sequence length {}",
                self.prediction_length,
                self.sequence_length
            )));
        }
        let sum = self.train_fraction + self.validation_fraction + self.test_fraction;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(CliError::Config(anyhow::anyhow!(
                "split fractions sum to {sum}, expected 1"
            )));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(CliError::Config(anyhow::anyhow!(
                "threshold {} outside [0, 1]",
                self.threshold
            )));
        }
        Ok(())
    }

    pub fn save(&self, dir: &Path) -> CliResult<()> {
        let body = serde_json::to_string_pretty(self)?;
        fs::write(dir.join(RUN_CONFIG_FILE), body + "\n")?;
        Ok(())
    }

    pub fn load(dir: &Path) -> CliResult<Self> {
        let path = dir.join(RUN_CONFIG_FILE);
        let body = fs::read_to_string(&path).map_err(|e| {
            CliError::Config(anyhow::anyhow!("cannot read {}: {e}", path.display()))
        })?;
        Ok(serde_json::from_str(&body)?)
    }
}
