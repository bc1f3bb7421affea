//! Repairs, windows and splits an observation file without training, so the
//! dataset shape can be inspected up front.

use std::fs;
use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use lexigraph::lexicon::{build_lexicon, AliasMap, HomographMap};
use lexigraph::observations::{
    group_by_child, load_observations_csv, prepare_sequences, split_dataset, ChildSummary,
    DatasetManifest, DatasetSplit, RepairMode,
};
use lexigraph::Lexicon;

use crate::artifacts::write_json;
use crate::config::RunConfig;
use crate::error::CliResult;

#[derive(Debug, Args)]
pub struct PrepareArgs {
    /// Observation CSV (child_id,age_months,word,context_label,state)
    #[arg(long)]
    pub observations: PathBuf,

    /// Repair mode for regressing observations: optimistic or pessimistic
    #[arg(long, default_value = "optimistic")]
    pub mode: RepairMode,

    /// Window length in snapshots
    #[arg(long, default_value_t = 4)]
    pub seq_len: usize,

    /// Seed for the child-level split
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Reuse the lexicon from a build-graphs output instead of deriving one
    /// from the observation file alone
    #[arg(long)]
    pub lexicon: Option<PathBuf>,

    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct PreparedDataset {
    manifest: DatasetManifest,
    split: DatasetSplit,
}

pub fn build_manifest(
    by_child: &std::collections::BTreeMap<String, Vec<lexigraph::VocabularySnapshot>>,
    split: &DatasetSplit,
    mode: RepairMode,
    window: usize,
    seed: u64,
) -> DatasetManifest {
    let children = by_child
        .iter()
        .map(|(child_id, series)| ChildSummary {
            child_id: child_id.clone(),
            snapshots: series.len(),
            sequences: series.len().saturating_sub(window - 1),
        })
        .collect();
    DatasetManifest {
        children,
        repair_mode: mode,
        window,
        split_seed: seed,
        train_sequences: split.train.len(),
        validation_sequences: split.validation.len(),
        test_sequences: split.test.len(),
    }
}

pub fn run(args: &PrepareArgs) -> CliResult<()> {
    let config = RunConfig {
        mode: args.mode,
        sequence_length: args.seq_len,
        seed: args.seed,
        ..RunConfig::default()
    };
    config.validate()?;

    let aliases = AliasMap::starter();
    let homographs = HomographMap::starter();
    let lexicon = match &args.lexicon {
        Some(path) => Lexicon::from_csv_path(path)?,
        None => {
            let files = [args.observations.clone()];
            let empty: [PathBuf; 0] = [];
            build_lexicon(&empty, &files, &aliases, &homographs)?.0
        }
    };

    let snapshots = load_observations_csv(&args.observations, &lexicon, &aliases, &homographs)?;
    let by_child = group_by_child(snapshots);
    let sequences = prepare_sequences(&by_child, args.mode, args.seq_len)?;
    let split = split_dataset(&sequences, &config.split_spec(), args.seed)?;
    let manifest = build_manifest(&by_child, &split, args.mode, args.seq_len, args.seed);

    fs::create_dir_all(&args.out)?;
    println!(
        "prepare: {} children, {} train / {} validation / {} test sequences -> {}",
        manifest.children.len(),
        manifest.train_sequences,
        manifest.validation_sequences,
        manifest.test_sequences,
        args.out.display()
    );
    write_json(
        &args.out.join("dataset.json"),
        &PreparedDataset { manifest, split },
    )?;
    config.save(&args.out)?;
    Ok(())
}
