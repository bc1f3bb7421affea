//! Layout of a training output directory and the loader that turns one back
//! into live models for `predict` and `evaluate`.
//!
//! ```text
//! out/
//!   run_config.json
//!   lexicon.csv
//!   coverage.json
//!   dataset.json           per-child and per-split counts
//!   layers/<name>.csv      plus a .meta.json sidecar each, and stats.json
//!   models/<name>.json     one per layer, ann.json for the baseline
//!   history/<name>.json    per-epoch losses, same names
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::anyhow;

use lexigraph::baseline::FfnnModel;
use lexigraph::graph::{export_layer_csv, layer_stats, load_layer_csv, normalize_adjacency};
use lexigraph::tgcn::{LayerModel, TrainingHistory};
use lexigraph::{Lexicon, Matrix, RelationshipLayer};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::inputs::csv_files;

pub const BASELINE_NAME: &str = "ann";

pub fn lexicon_path(dir: &Path) -> PathBuf {
    dir.join("lexicon.csv")
}

pub fn layers_dir(dir: &Path) -> PathBuf {
    dir.join("layers")
}

pub fn models_dir(dir: &Path) -> PathBuf {
    dir.join("models")
}

pub fn history_dir(dir: &Path) -> PathBuf {
    dir.join("history")
}

pub fn write_json(path: &Path, value: &impl serde::Serialize) -> CliResult<()> {
    let body = serde_json::to_string_pretty(value)?;
    fs::write(path, body + "\n")?;
    Ok(())
}

pub fn write_layers(dir: &Path, lexicon: &Lexicon, layers: &[RelationshipLayer]) -> CliResult<()> {
    let layer_dir = layers_dir(dir);
    fs::create_dir_all(&layer_dir)?;
    let mut stats = Vec::with_capacity(layers.len());
    for layer in layers {
        let path = layer_dir.join(format!("{}.csv", layer.layer_name()));
        export_layer_csv(layer, lexicon, &path)?;
        stats.push(layer_stats(layer));
    }
    write_json(&layer_dir.join("stats.json"), &stats)?;
    Ok(())
}

pub struct TrainedRun {
    pub config: RunConfig,
    pub lexicon: Lexicon,
    /// Layer, its normalized adjacency and the trained model, one triple per
    /// layer in on-disk name order.
    pub layers: Vec<(RelationshipLayer, Matrix, LayerModel)>,
    pub baseline: FfnnModel,
    pub histories: BTreeMap<String, TrainingHistory>,
}

pub fn load_trained_run(dir: &Path) -> CliResult<TrainedRun> {
    let config = RunConfig::load(dir)?;
    let lexicon = Lexicon::from_csv_path(&lexicon_path(dir))?;

    let mut layers = Vec::new();
    for csv in csv_files(&layers_dir(dir))? {
        let layer = load_layer_csv(&csv, &lexicon)?;
        let adj = normalize_adjacency(&layer)?;
        let model_path = models_dir(dir).join(format!("{}.json", layer.layer_name()));
        let model = LayerModel::load(&model_path)
            .map_err(|e| CliError::Config(anyhow!("loading {}: {e}", model_path.display())))?;
        if model.layer_name != layer.layer_name() {
            return Err(CliError::Config(anyhow!(
                "model in {} is for layer {}, not {}",
                model_path.display(),
                model.layer_name,
                layer.layer_name()
            )));
        }
        if model.nodes != layer.nodes() {
            return Err(CliError::Config(anyhow!(
                "model for layer {} was trained on a different node set",
                layer.layer_name()
            )));
        }
        layers.push((layer, adj, model));
    }
    if layers.is_empty() {
        return Err(CliError::Config(anyhow!(
            "no layers under {}",
            layers_dir(dir).display()
        )));
    }

    let baseline_path = models_dir(dir).join(format!("{BASELINE_NAME}.json"));
    let baseline = FfnnModel::load(&baseline_path)
        .map_err(|e| CliError::Config(anyhow!("loading {}: {e}", baseline_path.display())))?;

    let mut histories = BTreeMap::new();
    let hist_dir = history_dir(dir);
    if hist_dir.is_dir() {
        for entry in fs::read_dir(&hist_dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let name = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or_default()
                .to_string();
            let body = fs::read_to_string(&path)?;
            let history: TrainingHistory = serde_json::from_str(&body)?;
            histories.insert(name, history);
        }
    }

    Ok(TrainedRun {
        config,
        lexicon,
        layers,
        baseline,
        histories,
    })
}
