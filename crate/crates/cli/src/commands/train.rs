//! End-to-end training: raw CSVs in, one trained model per layer plus the
//! baseline out. Layers train independently, so `--jobs` spreads them over a
//! thread pool; results are collected in layer order and every model is
//! seeded from the run seed, keeping outputs identical at any job count.

use std::fs;
use std::path::PathBuf;

use anyhow::anyhow;
use clap::Args;
use rayon::prelude::*;

use lexigraph::baseline::{ffnn_train, pairs_from_sequences, FfnnConfig};
use lexigraph::graph::normalize_adjacency;
use lexigraph::lexicon::{AliasMap, HomographMap};
use lexigraph::observations::{
    group_by_child, load_observations_csv, prepare_sequences, split_dataset, RepairMode,
};
use lexigraph::tgcn::{project_sequences, train, LayerModel, ProjectedSequence, TrainingHistory};
use lexigraph::{RelationshipLayer, WordId};

use crate::artifacts::{
    history_dir, lexicon_path, models_dir, write_json, write_layers, BASELINE_NAME,
};
use crate::commands::prepare::build_manifest;
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::inputs::load_graph_inputs;

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Directory holding sensorimotor norm CSVs
    #[arg(long)]
    pub norms_dir: PathBuf,

    /// Directory holding semantic cosine CSVs, one layer per file
    #[arg(long)]
    pub semantic_dir: PathBuf,

    /// Observation CSV with longitudinal vocabulary checklists
    #[arg(long)]
    pub observations: PathBuf,

    /// Repair mode for regressing observations: optimistic or pessimistic
    #[arg(long, default_value = "optimistic")]
    pub mode: RepairMode,

    /// Minimum edge weight kept in a layer
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,

    /// Maximum edges kept per layer
    #[arg(long, default_value_t = 2000)]
    pub edge_cap: usize,

    /// Training epochs for every model
    #[arg(long, default_value_t = 1000)]
    pub epochs: usize,

    /// Minibatch size for the layer models
    #[arg(long, default_value_t = 4)]
    pub batch: usize,

    /// Window length in snapshots; the last one is the prediction target
    #[arg(long, default_value_t = 4)]
    pub seq_len: usize,

    /// Seed for splits, shuffles and weight init
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Layer training threads
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,

    /// Learning rate for the layer models
    #[arg(long, default_value_t = 1e-2)]
    pub learning_rate: f64,

    /// Dropout probability on the spatial block, if any
    #[arg(long)]
    pub dropout: Option<f64>,

    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
}

fn run_config_from(args: &TrainArgs) -> RunConfig {
    RunConfig {
        mode: args.mode,
        threshold: args.threshold,
        edge_cap: args.edge_cap,
        sequence_length: args.seq_len,
        epochs: args.epochs,
        batch_size: args.batch,
        learning_rate: args.learning_rate,
        dropout: args.dropout,
        seed: args.seed,
        ..RunConfig::default()
    }
}

struct LayerOutcome {
    model: LayerModel,
    history: TrainingHistory,
}

fn train_layer(
    index: usize,
    layer: &RelationshipLayer,
    train_seqs: &[ProjectedSequence],
    val_seqs: &[ProjectedSequence],
    config: &RunConfig,
) -> Result<LayerOutcome, CliError> {
    let adj = normalize_adjacency(layer)?;
    let validation = if val_seqs.is_empty() {
        None
    } else {
        Some(val_seqs)
    };
    let (model, history) = train(
        layer.layer_name(),
        layer.nodes(),
        &adj,
        train_seqs,
        validation,
        &config.tgcn_config(index),
    )?;
    let final_mae = history.final_train_mae().unwrap_or(f64::NAN);
    log::info!(
        "layer {} trained, final train MAE {:.4}",
        layer.layer_name(),
        final_mae
    );
    Ok(LayerOutcome { model, history })
}

pub fn run(args: &TrainArgs) -> CliResult<()> {
    let config = run_config_from(args);
    config.validate()?;
    if args.jobs == 0 {
        return Err(CliError::Config(anyhow!("--jobs must be at least 1")));
    }

    let built = load_graph_inputs(
        &args.norms_dir,
        &args.semantic_dir,
        std::slice::from_ref(&args.observations),
        &config,
    )?;

    let aliases = AliasMap::starter();
    let homographs = HomographMap::starter();
    let snapshots =
        load_observations_csv(&args.observations, &built.lexicon, &aliases, &homographs)?;
    let by_child = group_by_child(snapshots);
    let sequences = prepare_sequences(&by_child, config.mode, config.sequence_length)?;
    let split = split_dataset(&sequences, &config.split_spec(), config.seed)?;
    log::info!(
        "{} sequences: {} train, {} validation, {} test",
        sequences.len(),
        split.train.len(),
        split.validation.len(),
        split.test.len()
    );

    fs::create_dir_all(&args.out)?;
    built.lexicon.write_csv(&lexicon_path(&args.out))?;
    write_json(&args.out.join("coverage.json"), &built.coverage)?;
    write_layers(&args.out, &built.lexicon, &built.layers)?;
    let manifest = build_manifest(
        &by_child,
        &split,
        config.mode,
        config.sequence_length,
        config.seed,
    );
    write_json(&args.out.join("dataset.json"), &manifest)?;
    config.save(&args.out)?;

    // project each split once per layer before entering the pool
    let mut projected = Vec::with_capacity(built.layers.len());
    for layer in &built.layers {
        let train_p = project_sequences(&split.train, layer.nodes(), config.sequence_length)?;
        let val_p = project_sequences(&split.validation, layer.nodes(), config.sequence_length)?;
        projected.push((train_p, val_p));
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| CliError::Config(anyhow!("cannot build thread pool: {e}")))?;
    let outcomes: Result<Vec<LayerOutcome>, CliError> = pool.install(|| {
        built
            .layers
            .par_iter()
            .zip(projected.par_iter())
            .enumerate()
            .map(|(i, (layer, (train_p, val_p)))| train_layer(i, layer, train_p, val_p, &config))
            .collect()
    });
    let outcomes = outcomes?;

    let vocabulary: Vec<WordId> = built.lexicon.words().iter().map(|w| w.id).collect();
    let pairs = pairs_from_sequences(&split.train, &vocabulary);
    let ffnn_config = FfnnConfig {
        epochs: config.epochs,
        seed: config.seed,
        ..FfnnConfig::default()
    };
    let (baseline, baseline_history) = ffnn_train(&pairs, &vocabulary, &ffnn_config)?;
    log::info!(
        "baseline trained on {} pairs, final train MAE {:.4}",
        pairs.len(),
        baseline_history.final_train_mae().unwrap_or(f64::NAN)
    );

    let model_dir = models_dir(&args.out);
    let hist_dir = history_dir(&args.out);
    fs::create_dir_all(&model_dir)?;
    fs::create_dir_all(&hist_dir)?;
    for (layer, outcome) in built.layers.iter().zip(&outcomes) {
        outcome
            .model
            .save(&model_dir.join(format!("{}.json", layer.layer_name())))?;
        write_json(
            &hist_dir.join(format!("{}.json", layer.layer_name())),
            &outcome.history,
        )?;
    }
    baseline.save(&model_dir.join(format!("{BASELINE_NAME}.json")))?;
    write_json(
        &hist_dir.join(format!("{BASELINE_NAME}.json")),
        &baseline_history,
    )?;

    println!(
        "train: {} layer models + baseline ({} epochs, mode {}) -> {}",
        outcomes.len(),
        config.epochs,
        config.mode,
        args.out.display()
    );
    Ok(())
}
