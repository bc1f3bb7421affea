//! Scores trained models on held-out sequences and renders the per-layer
//! report: the baseline row first, then semantic layers, then sensorimotor
//! layers, each with precision, recall, F1 and accuracy.

use std::fs;
use std::path::PathBuf;

use anyhow::anyhow;
use clap::{Args, ValueEnum};

use lexigraph::eval::{evaluate_sequences, layer_report, metrics, LayerGroup, MetricsRecord};
use lexigraph::graph::SensorimotorDimension;
use lexigraph::lexicon::{AliasMap, HomographMap};
use lexigraph::observations::{
    group_by_child, load_observations_csv, prepare_sequences, split_dataset, ObservationSequence,
};

use crate::artifacts::{load_trained_run, BASELINE_NAME};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvalSplit {
    Train,
    Validation,
    Test,
    All,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Training output directory holding models and layers
    #[arg(long)]
    pub models: PathBuf,

    /// Observation CSV to evaluate on
    #[arg(long)]
    pub observations: PathBuf,

    /// Minimum predicted gain counted as an acquisition call
    #[arg(long)]
    pub margin: Option<f64>,

    /// Which partition of the observation file to score
    #[arg(long, value_enum, default_value_t = EvalSplit::Test)]
    pub split: EvalSplit,

    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
}

fn group_for(layer_name: &str) -> LayerGroup {
    if SensorimotorDimension::from_name(layer_name).is_some() {
        LayerGroup::Sensorimotor
    } else {
        LayerGroup::Semantic
    }
}

pub fn run(args: &EvaluateArgs) -> CliResult<()> {
    let run = load_trained_run(&args.models)?;
    let margin = args.margin.unwrap_or(run.config.margin);

    let aliases = AliasMap::starter();
    let homographs = HomographMap::starter();
    let snapshots = load_observations_csv(&args.observations, &run.lexicon, &aliases, &homographs)?;
    let by_child = group_by_child(snapshots);
    let sequences = prepare_sequences(&by_child, run.config.mode, run.config.sequence_length)?;
    let split = split_dataset(&sequences, &run.config.split_spec(), run.config.seed)?;
    let subset: Vec<ObservationSequence> = match args.split {
        EvalSplit::Train => split.train,
        EvalSplit::Validation => split.validation,
        EvalSplit::Test => split.test,
        EvalSplit::All => {
            let mut all = split.train;
            all.extend(split.validation);
            all.extend(split.test);
            all
        }
    };
    if subset.is_empty() {
        return Err(CliError::Config(anyhow!(
            "the requested partition holds no sequences"
        )));
    }
    log::info!("evaluating {} sequences, margin {margin}", subset.len());

    let final_validation_mse = |name: &str| -> Option<f64> {
        run.histories
            .get(name)
            .and_then(|h| h.epochs.last())
            .and_then(|e| e.validation_mse)
    };

    let mut records: Vec<MetricsRecord> = Vec::with_capacity(run.layers.len() + 1);

    let counts = evaluate_sequences(&subset, margin, |inputs| {
        let current = inputs.last().ok_or_else(|| "empty window".to_string())?;
        run.baseline
            .predict_next(current)
            .map_err(|e| e.to_string())
    })?;
    let mut baseline_record =
        metrics(BASELINE_NAME, LayerGroup::Baseline, run.config.mode, counts)?;
    baseline_record.validation_mse = final_validation_mse(BASELINE_NAME);
    records.push(baseline_record);

    for (layer, adj, model) in &run.layers {
        let steps = run.config.input_steps();
        let counts = evaluate_sequences(&subset, margin, |inputs| {
            if inputs.len() < steps {
                return Err(format!(
                    "window gives {} input snapshots, model needs {steps}",
                    inputs.len()
                ));
            }
            model
                .predict_next(&inputs[inputs.len() - steps..], adj)
                .map_err(|e| e.to_string())
        })?;
        let mut record = metrics(
            layer.layer_name(),
            group_for(layer.layer_name()),
            run.config.mode,
            counts,
        )?;
        record.validation_mse = final_validation_mse(layer.layer_name());
        records.push(record);
    }

    let report = layer_report(records)?;

    fs::create_dir_all(&args.out)?;
    fs::write(args.out.join("report.md"), report.to_markdown())?;
    fs::write(args.out.join("report.json"), report.to_json() + "\n")?;
    let mut config = run.config.clone();
    config.margin = margin;
    config.save(&args.out)?;

    println!("{}", report.to_markdown());
    println!(
        "evaluate: {} rows over {} sequences -> {}",
        report.records.len(),
        subset.len(),
        args.out.display()
    );
    Ok(())
}
