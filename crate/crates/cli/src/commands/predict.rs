//! Scores the next observation for every child in a file and emits ranked
//! acquisition candidates per layer plus a rank-sum combined list.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use lexigraph::eval::aggregate_candidates;
use lexigraph::lexicon::{AliasMap, HomographMap};
use lexigraph::observations::{group_by_child, load_observations_csv, repair_series};
use lexigraph::tgcn::candidate_words;

use crate::artifacts::{load_trained_run, write_json};
use crate::error::CliResult;

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Training output directory holding models and layers
    #[arg(long)]
    pub models: PathBuf,

    /// Observation CSV to score
    #[arg(long)]
    pub observations: PathBuf,

    /// Candidates kept per layer and in the combined list
    #[arg(long, default_value_t = 10)]
    pub top: usize,

    /// Minimum predicted score for a candidate
    #[arg(long, default_value_t = 0.5)]
    pub score_threshold: f64,

    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct Candidate {
    word: String,
    score: f64,
}

#[derive(Serialize)]
struct ChildPrediction {
    child_id: String,
    as_of_age_months: f64,
    per_layer: BTreeMap<String, Vec<Candidate>>,
    combined: Vec<String>,
}

#[derive(Serialize)]
struct Predictions {
    children: Vec<ChildPrediction>,
    skipped_children: Vec<String>,
}

pub fn run(args: &PredictArgs) -> CliResult<()> {
    let run = load_trained_run(&args.models)?;
    let aliases = AliasMap::starter();
    let homographs = HomographMap::starter();
    let snapshots = load_observations_csv(&args.observations, &run.lexicon, &aliases, &homographs)?;
    let by_child = group_by_child(snapshots);
    let steps = run.config.input_steps();

    let mut children = Vec::new();
    let mut skipped = Vec::new();
    for (child_id, series) in &by_child {
        let repaired = repair_series(series, run.config.mode)?;
        if repaired.len() < steps {
            log::warn!(
                "child {child_id}: {} snapshots, need {steps}; skipping",
                repaired.len()
            );
            skipped.push(child_id.clone());
            continue;
        }
        let inputs = &repaired[repaired.len() - steps..];
        let current = inputs.last().expect("steps is at least 1");

        let mut per_layer = BTreeMap::new();
        let mut lists = Vec::new();
        for (layer, adj, model) in &run.layers {
            let scores = model.predict_next(inputs, adj)?;
            let ranked = candidate_words(&scores, current, args.top, args.score_threshold);
            lists.push(ranked.clone());
            per_layer.insert(
                layer.layer_name().to_string(),
                ranked
                    .into_iter()
                    .map(|(id, score)| Candidate {
                        word: run
                            .lexicon
                            .word(id)
                            .map(|w| w.key())
                            .unwrap_or_else(|| id.to_string()),
                        score,
                    })
                    .collect(),
            );
        }
        let combined = aggregate_candidates(&lists, args.top)
            .into_iter()
            .map(|id| {
                run.lexicon
                    .word(id)
                    .map(|w| w.key())
                    .unwrap_or_else(|| id.to_string())
            })
            .collect();

        children.push(ChildPrediction {
            child_id: child_id.clone(),
            as_of_age_months: current.age_months,
            per_layer,
            combined,
        });
    }

    fs::create_dir_all(&args.out)?;
    let predictions = Predictions {
        children,
        skipped_children: skipped,
    };
    write_json(&args.out.join("predictions.json"), &predictions)?;
    run.config.save(&args.out)?;

    println!(
        "predict: {} children scored, {} skipped -> {}",
        predictions.children.len(),
        predictions.skipped_children.len(),
        args.out.display()
    );
    Ok(())
}
