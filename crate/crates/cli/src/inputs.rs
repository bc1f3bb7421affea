//! Shared input loading: raw norm CSVs in, lexicon plus the 13 relationship
//! layers out. Both `build-graphs` and `train` run through here so their
//! outputs agree.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};

use lexigraph::graph::{
    build_semantic_layer, build_sensorimotor_layer, load_semantic_csv, SensorimotorDimension,
    SensorimotorScores, SensorimotorTable,
};
use lexigraph::lexicon::{build_lexicon, AliasMap, CoverageReport, HomographMap};
use lexigraph::{Lexicon, RelationshipLayer};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub struct BuiltGraphs {
    pub lexicon: Lexicon,
    pub coverage: CoverageReport,
    pub layers: Vec<RelationshipLayer>,
}

/// CSV files directly inside `dir`, sorted by file name for a stable order.
pub fn csv_files(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let mut out = Vec::new();
    let entries = fs::read_dir(dir)
        .map_err(|e| CliError::Config(anyhow!("cannot read directory {}: {e}", dir.display())))?;
    for entry in entries {
        let path = entry.map_err(CliError::config)?.path();
        if path.extension().and_then(|e| e.to_str()) == Some("csv") {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

fn layer_name_for(path: &Path) -> CliResult<String> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(|s| s.to_string())
        .ok_or_else(|| CliError::Config(anyhow!("bad semantic file name {}", path.display())))
}

fn merge_tables(
    mut base: SensorimotorTable,
    other: &SensorimotorTable,
) -> CliResult<SensorimotorTable> {
    for (word, _) in other.column(SensorimotorDimension::Touch) {
        if base.score(word, SensorimotorDimension::Touch).is_some() {
            return Err(CliError::Config(anyhow!(
                "word id {word} appears in more than one sensorimotor norms file"
            )));
        }
        let mut scores = [0.0; 11];
        for dim in SensorimotorDimension::ALL {
            scores[dim.index()] = other.score(word, dim).expect("row present");
        }
        base.insert(SensorimotorScores {
            word_id: word,
            scores,
        })
        .map_err(CliError::config)?;
    }
    Ok(base)
}

/// Builds the lexicon and all 13 layers from a norms directory (sensorimotor
/// score CSVs), a semantic directory (one cosine CSV per layer, named after
/// the layer) and optional observation files contributing vocabulary.
///
/// Layer order is semantic layers sorted by name, then the 11 sensorimotor
/// dimensions in canonical order.
pub fn load_graph_inputs(
    norms_dir: &Path,
    semantic_dir: &Path,
    observation_files: &[PathBuf],
    config: &RunConfig,
) -> CliResult<BuiltGraphs> {
    let norm_files = csv_files(norms_dir)?;
    if norm_files.is_empty() {
        return Err(CliError::Config(anyhow!(
            "no CSV files in norms directory {}",
            norms_dir.display()
        )));
    }
    let semantic_files = csv_files(semantic_dir)?;
    if semantic_files.is_empty() {
        return Err(CliError::Config(anyhow!(
            "no CSV files in semantic directory {}",
            semantic_dir.display()
        )));
    }

    let aliases = AliasMap::starter();
    let homographs = HomographMap::starter();

    let mut all_norms: Vec<PathBuf> = norm_files.clone();
    all_norms.extend(semantic_files.iter().cloned());
    let (lexicon, coverage) = build_lexicon(&all_norms, observation_files, &aliases, &homographs)?;
    log::info!(
        "lexicon holds {} words from {} source files",
        lexicon.len(),
        coverage.sources.len()
    );

    let mut table = SensorimotorTable::new(config.scale_max);
    for path in &norm_files {
        let part =
            SensorimotorTable::from_csv(path, &lexicon, &aliases, &homographs, config.scale_max)
                .with_context(|| format!("loading {}", path.display()))
                .map_err(CliError::Config)?;
        table = merge_tables(table, &part)?;
    }

    let mut layers = Vec::with_capacity(semantic_files.len() + 11);
    for path in &semantic_files {
        let name = layer_name_for(path)?;
        let sims = load_semantic_csv(path, &lexicon, &aliases, &homographs)
            .with_context(|| format!("loading {}", path.display()))
            .map_err(CliError::Config)?;
        layers.push(build_semantic_layer(
            &name,
            &sims,
            config.threshold,
            config.edge_cap,
        )?);
    }
    for dim in SensorimotorDimension::ALL {
        layers.push(build_sensorimotor_layer(
            &table,
            dim,
            config.threshold,
            config.edge_cap,
        )?);
    }
    for layer in &layers {
        log::info!(
            "layer {}: {} nodes, {} edges ({} pairs before threshold)",
            layer.layer_name(),
            layer.node_count(),
            layer.edge_count(),
            layer.pre_threshold_pairs()
        );
    }

    Ok(BuiltGraphs {
        lexicon,
        coverage,
        layers,
    })
}
