//! Builds the lexicon and all relationship layers from raw norm CSVs and
//! writes them as reloadable artifacts.

use std::fs;
use std::path::PathBuf;

use clap::Args;

use crate::artifacts::{lexicon_path, write_json, write_layers};
use crate::config::RunConfig;
use crate::error::CliResult;
use crate::inputs::load_graph_inputs;

#[derive(Debug, Args)]
pub struct BuildGraphsArgs {
    /// Directory holding sensorimotor norm CSVs
    #[arg(long)]
    pub norms_dir: PathBuf,

    /// Directory holding semantic cosine CSVs, one layer per file
    #[arg(long)]
    pub semantic_dir: PathBuf,

    /// Observation CSVs whose vocabulary joins the lexicon
    #[arg(long)]
    pub observations: Vec<PathBuf>,

    /// Minimum edge weight kept in a layer
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,

    /// Maximum edges kept per layer
    #[arg(long, default_value_t = 2000)]
    pub edge_cap: usize,

    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &BuildGraphsArgs) -> CliResult<()> {
    let config = RunConfig {
        threshold: args.threshold,
        edge_cap: args.edge_cap,
        ..RunConfig::default()
    };
    config.validate()?;

    let built = load_graph_inputs(
        &args.norms_dir,
        &args.semantic_dir,
        &args.observations,
        &config,
    )?;

    fs::create_dir_all(&args.out)?;
    built.lexicon.write_csv(&lexicon_path(&args.out))?;
    write_json(&args.out.join("coverage.json"), &built.coverage)?;
    write_layers(&args.out, &built.lexicon, &built.layers)?;
    config.save(&args.out)?;

    println!(
        "build-graphs: {} words, {} layers -> {}",
        built.lexicon.len(),
        built.layers.len(),
        args.out.display()
    );
    Ok(())
}
