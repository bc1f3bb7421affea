//! Generates a synthetic dataset in the same file formats the real pipeline
//! consumes, with acquisition driven by one planted layer.

use std::fs;
use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use lexigraph::graph::layer_stats;
use lexigraph::observations::write_observations_csv;
use lexigraph::synth::{generate_dataset, SynthConfig};

use crate::artifacts::write_json;
use crate::error::CliResult;

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Number of simulated children
    #[arg(long, default_value_t = 200)]
    pub children: usize,

    /// Snapshots recorded per child
    #[arg(long, default_value_t = 8)]
    pub observations_per_child: usize,

    /// Vocabulary size (at least 22 so every layer is nonempty)
    #[arg(long, default_value_t = 40)]
    pub vocab: usize,

    /// Layer whose neighborhoods drive acquisition
    #[arg(long, default_value = "touch")]
    pub planted_layer: String,

    /// Acquisition boost from fully known neighborhoods
    #[arg(long, default_value_t = 0.4)]
    pub boost: f64,

    /// Baseline per-step acquisition probability
    #[arg(long, default_value_t = 0.1)]
    pub base: f64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct SynthManifest {
    config: SynthConfig,
    children: usize,
    snapshots: usize,
    layers: Vec<lexigraph::graph::LayerStats>,
}

pub fn run(args: &SynthArgs) -> CliResult<()> {
    let config = SynthConfig {
        n_children: args.children,
        observations_per_child: args.observations_per_child,
        vocabulary_size: args.vocab,
        planted_layer: args.planted_layer.clone(),
        neighbor_boost: args.boost,
        base_probability: args.base,
        seed: args.seed,
    };
    let dataset = generate_dataset(&config)?;

    let norms_dir = args.out.join("norms");
    let semantic_dir = args.out.join("semantic");
    fs::create_dir_all(&norms_dir)?;
    fs::create_dir_all(&semantic_dir)?;

    fs::write(
        norms_dir.join("sensorimotor.csv"),
        &dataset.inputs.norms_csv,
    )?;
    fs::write(semantic_dir.join("mcrae.csv"), &dataset.inputs.mcrae_csv)?;
    fs::write(
        semantic_dir.join("buchanan.csv"),
        &dataset.inputs.buchanan_csv,
    )?;
    write_observations_csv(
        &dataset.snapshots,
        &dataset.lexicon,
        &args.out.join("observations.csv"),
    )?;

    let manifest = SynthManifest {
        children: config.n_children,
        snapshots: dataset.snapshots.len(),
        layers: dataset.layers.iter().map(layer_stats).collect(),
        config,
    };
    write_json(&args.out.join("manifest.json"), &manifest)?;

    log::info!(
        "wrote synthetic dataset: {} children, {} snapshots, {} layers",
        manifest.children,
        manifest.snapshots,
        manifest.layers.len()
    );
    println!(
        "synth: {} children, {} words, planted layer {} -> {}",
        manifest.children,
        args.vocab,
        manifest.config.planted_layer,
        args.out.display()
    );
    Ok(())
}
