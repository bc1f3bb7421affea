//! Scoring: turning predicted per-word scores into learned/not-learned
//! decisions and the per-layer precision/recall/F1/accuracy report.
//!
//! A decision is "positive" when the model predicts increased comprehension:
//! the predicted score clears the word's current encoded value by at least
//! the margin, and the word is not already at Full (which cannot increase).
//! Words already at Full are excluded from counting entirely; they would
//! only inflate the true-negative cell.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::WordId;
use crate::observations::{
    ComprehensionState, ObservationSequence, RepairMode, VocabularySnapshot,
};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("prediction and actual word sets differ: {predictions} vs {actuals} words")]
    WordSetMismatch { predictions: usize, actuals: usize },
    #[error("no decisions to evaluate")]
    EmptyEvaluation,
    #[error("scoring failed: {0}")]
    ScoreFailure(String),
    #[error("sequence too short to evaluate (length {0})")]
    SequenceTooShort(usize),
}

/// True iff the model predicts increased comprehension for this word.
pub fn binarize(score: f64, current_encoded: f64, margin: f64) -> bool {
    current_encoded < 1.0 && score - current_encoded >= margin
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub true_negatives: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.true_positives + self.false_positives + self.false_negatives + self.true_negatives
    }

    pub fn add(&mut self, other: &ConfusionCounts) {
        self.true_positives += other.true_positives;
        self.false_positives += other.false_positives;
        self.false_negatives += other.false_negatives;
        self.true_negatives += other.true_negatives;
    }
}

/// Tallies decisions against outcomes. Both maps must cover exactly the same
/// words (the not-already-Full set).
pub fn confusion(
    predictions: &BTreeMap<WordId, bool>,
    actuals: &BTreeMap<WordId, bool>,
) -> Result<ConfusionCounts, EvalError> {
    if predictions.len() != actuals.len() || !predictions.keys().eq(actuals.keys()) {
        return Err(EvalError::WordSetMismatch {
            predictions: predictions.len(),
            actuals: actuals.len(),
        });
    }
    let mut counts = ConfusionCounts::default();
    for (word, predicted) in predictions {
        let actual = actuals[word];
        match (predicted, actual) {
            (true, true) => counts.true_positives += 1,
            (true, false) => counts.false_positives += 1,
            (false, true) => counts.false_negatives += 1,
            (false, false) => counts.true_negatives += 1,
        }
    }
    Ok(counts)
}

/// Scores one observed transition: words below Full at `current` are decided
/// by `binarize` and compared against whether they actually increased at
/// `next`.
pub fn evaluate_transition(
    scores: &BTreeMap<WordId, f64>,
    current: &VocabularySnapshot,
    next: &VocabularySnapshot,
    margin: f64,
) -> ConfusionCounts {
    let mut counts = ConfusionCounts::default();
    for (word, score) in scores {
        if current.state_of(*word) == ComprehensionState::Full {
            continue;
        }
        let now = current.encoded(*word);
        let predicted = binarize(*score, now, margin);
        let actual = next.encoded(*word) > now;
        match (predicted, actual) {
            (true, true) => counts.true_positives += 1,
            (true, false) => counts.false_positives += 1,
            (false, true) => counts.false_negatives += 1,
            (false, false) => counts.true_negatives += 1,
        }
    }
    counts
}

/// Evaluates a scorer over full windows: the first W-1 snapshots are the
/// model input, the transition from snapshot W-1 to snapshot W is judged.
pub fn evaluate_sequences<F>(
    sequences: &[ObservationSequence],
    margin: f64,
    mut score_fn: F,
) -> Result<ConfusionCounts, EvalError>
where
    F: FnMut(&[VocabularySnapshot]) -> Result<BTreeMap<WordId, f64>, String>,
{
    let mut counts = ConfusionCounts::default();
    for seq in sequences {
        let n = seq.len();
        if n < 2 {
            return Err(EvalError::SequenceTooShort(n));
        }
        let inputs = &seq.snapshots[..n - 1];
        let scores = score_fn(inputs).map_err(EvalError::ScoreFailure)?;
        counts.add(&evaluate_transition(
            &scores,
            &seq.snapshots[n - 2],
            &seq.snapshots[n - 1],
            margin,
        ));
    }
    Ok(counts)
}

/// Report grouping, in presentation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerGroup {
    Baseline,
    Semantic,
    Sensorimotor,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub layer: String,
    pub group: LayerGroup,
    /// Undefined when tp + fp = 0; never coerced to a number.
    pub precision: Option<f64>,
    /// Undefined when tp + fn = 0.
    pub recall: Option<f64>,
    /// Defined when precision and recall are defined and not both zero.
    pub f1: Option<f64>,
    pub accuracy: f64,
    pub mode: RepairMode,
    pub counts: ConfusionCounts,
    pub validation_mse: Option<f64>,
}

/// The four standard metrics from raw counts. Degenerate denominators yield
/// undefined entries rather than zeros.
pub fn metrics(
    layer: &str,
    group: LayerGroup,
    mode: RepairMode,
    counts: ConfusionCounts,
) -> Result<MetricsRecord, EvalError> {
    let total = counts.total();
    if total == 0 {
        return Err(EvalError::EmptyEvaluation);
    }
    let tp = counts.true_positives as f64;
    let precision = if counts.true_positives + counts.false_positives > 0 {
        Some(tp / (counts.true_positives + counts.false_positives) as f64)
    } else {
        None
    };
    let recall = if counts.true_positives + counts.false_negatives > 0 {
        Some(tp / (counts.true_positives + counts.false_negatives) as f64)
    } else {
        None
    };
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        _ => None,
    };
    let accuracy = (counts.true_positives + counts.true_negatives) as f64 / total as f64;
    Ok(MetricsRecord {
        layer: layer.to_string(),
        group,
        precision,
        recall,
        f1,
        accuracy,
        mode,
        counts,
        validation_mse: None,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayerReport {
    pub records: Vec<MetricsRecord>,
    pub semantic_mean_accuracy: Option<f64>,
    pub sensorimotor_mean_accuracy: Option<f64>,
}

/// Assembles the per-layer comparison report: baseline first, then semantic,
/// then sensorimotor layers, each block in name order, with per-group mean
/// accuracies.
pub fn layer_report(records: Vec<MetricsRecord>) -> Result<LayerReport, EvalError> {
    if records.is_empty() {
        return Err(EvalError::EmptyEvaluation);
    }
    let mut records = records;
    records.sort_by(|a, b| a.group.cmp(&b.group).then(a.layer.cmp(&b.layer)));
    let group_mean = |group: LayerGroup, records: &[MetricsRecord]| -> Option<f64> {
        let accs: Vec<f64> = records
            .iter()
            .filter(|r| r.group == group)
            .map(|r| r.accuracy)
            .collect();
        if accs.is_empty() {
            None
        } else {
            Some(accs.iter().sum::<f64>() / accs.len() as f64)
        }
    };
    let semantic_mean_accuracy = group_mean(LayerGroup::Semantic, &records);
    let sensorimotor_mean_accuracy = group_mean(LayerGroup::Sensorimotor, &records);
    Ok(LayerReport {
        records,
        semantic_mean_accuracy,
        sensorimotor_mean_accuracy,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.3}"),
        None => "n/a".to_string(),
    }
}

impl LayerReport {
    /// Markdown table, one row per layer, fixed column order. Deterministic
    /// for identical inputs. The validation column appears only when some
    /// record carries one.
    pub fn to_markdown(&self) -> String {
        let with_validation = self.records.iter().any(|r| r.validation_mse.is_some());
        let mut out = String::new();
        if with_validation {
            out.push_str("| Layer | Precision | Recall | F1 | Accuracy | Val MSE | Mode |\n");
            out.push_str("|---|---|---|---|---|---|---|\n");
        } else {
            out.push_str("| Layer | Precision | Recall | F1 | Accuracy | Mode |\n");
            out.push_str("|---|---|---|---|---|---|\n");
        }
        for r in &self.records {
            if with_validation {
                out.push_str(&format!(
                    "| {} | {} | {} | {} | {:.3} | {} | {} |\n",
                    r.layer,
                    fmt_opt(r.precision),
                    fmt_opt(r.recall),
                    fmt_opt(r.f1),
                    r.accuracy,
                    fmt_opt(r.validation_mse),
                    r.mode,
                ));
            } else {
                out.push_str(&format!(
                    "| {} | {} | {} | {} | {:.3} | {} |\n",
                    r.layer,
                    fmt_opt(r.precision),
                    fmt_opt(r.recall),
                    fmt_opt(r.f1),
                    r.accuracy,
                    r.mode,
                ));
            }
        }
        out.push('\n');
        if let Some(m) = self.semantic_mean_accuracy {
            out.push_str(&format!("Semantic mean accuracy: {m:.4}\n"));
        }
        if let Some(m) = self.sensorimotor_mean_accuracy {
            out.push_str(&format!("Sensorimotor mean accuracy: {m:.4}\n"));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Rank-sum aggregation of per-layer candidate lists: each list awards a word
/// (list length - position) points; totals rank the combined list. Ties fall
/// to the word proposed by more layers, then to id order.
pub fn aggregate_candidates(per_layer: &[Vec<(WordId, f64)>], k: usize) -> Vec<WordId> {
    let mut points: BTreeMap<WordId, (usize, usize)> = BTreeMap::new();
    for list in per_layer {
        let len = list.len();
        for (position, (word, _)) in list.iter().enumerate() {
            let entry = points.entry(*word).or_insert((0, 0));
            entry.0 += len - position;
            entry.1 += 1;
        }
    }
    let mut ranked: Vec<(WordId, usize, usize)> = points
        .into_iter()
        .map(|(word, (pts, layers))| (word, pts, layers))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(b.2.cmp(&a.2)).then(a.0.cmp(&b.0)));
    ranked
        .into_iter()
        .take(k)
        .map(|(word, _, _)| word)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(tp: usize, fp: usize, fn_: usize, tn: usize) -> ConfusionCounts {
        ConfusionCounts {
            true_positives: tp,
            false_positives: fp,
            false_negatives: fn_,
            true_negatives: tn,
        }
    }

    #[test]
    fn binarize_rules() {
        assert!(binarize(0.9, 0.0, 0.3));
        assert!(!binarize(0.99, 1.0, 0.3));
        assert!(!binarize(0.65, 0.6, 0.3));
        // boundary: exactly one margin step counts
        assert!(binarize(0.9, 0.6, 0.3));
    }

    #[test]
    fn metrics_hand_case() {
        let record = metrics(
            "toy",
            LayerGroup::Semantic,
            RepairMode::Optimistic,
            counts(3, 1, 2, 4),
        )
        .unwrap();
        assert_eq!(record.precision, Some(0.75));
        assert_eq!(record.recall, Some(0.6));
        assert!((record.f1.unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(record.accuracy, 0.7);
    }

    #[test]
    fn mcrae_row_identity() {
        let p: f64 = 0.450;
        let r: f64 = 0.513;
        let f1 = 2.0 * p * r / (p + r);
        assert!((f1 - 0.479).abs() <= 0.001, "f1 {f1}");
    }

    #[test]
    fn degenerate_denominators_stay_undefined() {
        let record = metrics(
            "toy",
            LayerGroup::Baseline,
            RepairMode::Optimistic,
            counts(0, 0, 2, 5),
        )
        .unwrap();
        assert_eq!(record.precision, None);
        assert_eq!(record.recall, Some(0.0));
        assert_eq!(record.f1, None);

        let record = metrics(
            "toy",
            LayerGroup::Baseline,
            RepairMode::Optimistic,
            counts(0, 3, 0, 5),
        )
        .unwrap();
        assert_eq!(record.recall, None);

        assert!(matches!(
            metrics(
                "toy",
                LayerGroup::Baseline,
                RepairMode::Optimistic,
                counts(0, 0, 0, 0)
            ),
            Err(EvalError::EmptyEvaluation)
        ));
    }

    #[test]
    fn metrics_scale_invariant() {
        let a = metrics(
            "x",
            LayerGroup::Semantic,
            RepairMode::Optimistic,
            counts(3, 1, 2, 4),
        )
        .unwrap();
        let b = metrics(
            "x",
            LayerGroup::Semantic,
            RepairMode::Optimistic,
            counts(21, 7, 14, 28),
        )
        .unwrap();
        assert_eq!(a.precision, b.precision);
        assert_eq!(a.recall, b.recall);
        assert_eq!(a.f1, b.f1);
        assert_eq!(a.accuracy, b.accuracy);
    }

    #[test]
    fn confusion_counting() {
        let predictions: BTreeMap<WordId, bool> =
            [(WordId(0), true), (WordId(1), false), (WordId(2), true)]
                .into_iter()
                .collect();
        let perfect = predictions.clone();
        let c = confusion(&predictions, &perfect).unwrap();
        assert_eq!(c.false_positives, 0);
        assert_eq!(c.false_negatives, 0);

        let all_negative: BTreeMap<WordId, bool> = (0..5).map(|i| (WordId(i), false)).collect();
        let actuals: BTreeMap<WordId, bool> = (0..5).map(|i| (WordId(i), i < 3)).collect();
        let c = confusion(&all_negative, &actuals).unwrap();
        assert_eq!(c.false_negatives, 3);
        assert_eq!(c.true_positives, 0);
        assert_eq!(c.true_negatives, 2);

        let mismatched: BTreeMap<WordId, bool> = [(WordId(9), true)].into_iter().collect();
        assert!(confusion(&predictions, &mismatched).is_err());
    }

    #[test]
    fn confusion_matches_exhaustive_enumeration() {
        // 10 words with every (predicted, actual) combination present
        let predicted = [
            true, true, true, false, false, false, true, false, true, false,
        ];
        let actual = [
            true, false, true, true, false, false, false, true, true, false,
        ];
        let predictions: BTreeMap<WordId, bool> = predicted
            .iter()
            .enumerate()
            .map(|(i, p)| (WordId(i), *p))
            .collect();
        let actuals: BTreeMap<WordId, bool> = actual
            .iter()
            .enumerate()
            .map(|(i, a)| (WordId(i), *a))
            .collect();
        let c = confusion(&predictions, &actuals).unwrap();
        let mut expected = counts(0, 0, 0, 0);
        for i in 0..10 {
            match (predicted[i], actual[i]) {
                (true, true) => expected.true_positives += 1,
                (true, false) => expected.false_positives += 1,
                (false, true) => expected.false_negatives += 1,
                (false, false) => expected.true_negatives += 1,
            }
        }
        assert_eq!(c, expected);
        assert_eq!(c.total(), 10);
    }

    #[test]
    fn transition_skips_full_words() {
        let mut current = VocabularySnapshot::new("c", 10.0);
        current.set_state(WordId(0), ComprehensionState::Full);
        current.set_state(WordId(1), ComprehensionState::UnderstandsOnly);
        let mut next = current.clone();
        next.age_months = 12.0;
        next.set_state(WordId(1), ComprehensionState::Full);
        next.set_state(WordId(2), ComprehensionState::UnderstandsOnly);

        let scores: BTreeMap<WordId, f64> =
            [(WordId(0), 0.99), (WordId(1), 0.95), (WordId(2), 0.2)]
                .into_iter()
                .collect();
        let c = evaluate_transition(&scores, &current, &next, 0.3);
        // word 0 excluded (already Full); word 1 tp; word 2 fn
        assert_eq!(c.total(), 2);
        assert_eq!(c.true_positives, 1);
        assert_eq!(c.false_negatives, 1);
    }

    #[test]
    fn report_ordering_and_means() {
        let records = vec![
            metrics(
                "vision",
                LayerGroup::Sensorimotor,
                RepairMode::Optimistic,
                counts(3, 1, 2, 4),
            )
            .unwrap(),
            metrics(
                "ann",
                LayerGroup::Baseline,
                RepairMode::Optimistic,
                counts(1, 1, 1, 1),
            )
            .unwrap(),
            metrics(
                "mcrae",
                LayerGroup::Semantic,
                RepairMode::Optimistic,
                counts(2, 2, 2, 2),
            )
            .unwrap(),
            metrics(
                "buchanan",
                LayerGroup::Semantic,
                RepairMode::Optimistic,
                counts(4, 1, 1, 4),
            )
            .unwrap(),
        ];
        let report = layer_report(records).unwrap();
        let names: Vec<&str> = report.records.iter().map(|r| r.layer.as_str()).collect();
        assert_eq!(names, vec!["ann", "buchanan", "mcrae", "vision"]);
        // buchanan acc 0.8, mcrae acc 0.5
        assert!((report.semantic_mean_accuracy.unwrap() - 0.65).abs() < 1e-12);
        assert!((report.sensorimotor_mean_accuracy.unwrap() - 0.7).abs() < 1e-12);
        let md = report.to_markdown();
        assert!(md.contains("| ann |"));
        assert!(!md.contains("Val MSE"));
    }

    #[test]
    fn published_semantic_accuracies_average_to_midpoint() {
        let mean: f64 = (0.740 + 0.715) / 2.0;
        assert!((mean - 0.7275).abs() < 1e-12);
        // the rounded-to-0.729 figure circulating for this pair does not
        // match the arithmetic mean; keep the computed value authoritative
        assert!((mean - 0.729).abs() > 0.001);
    }

    #[test]
    fn aggregate_unanimity_and_truncation() {
        let lists = vec![
            vec![(WordId(3), 0.9), (WordId(1), 0.8), (WordId(2), 0.7)],
            vec![(WordId(3), 0.85), (WordId(2), 0.6)],
            vec![(WordId(3), 0.95), (WordId(1), 0.5)],
        ];
        let combined = aggregate_candidates(&lists, 10);
        assert_eq!(combined[0], WordId(3));

        let single = vec![vec![(WordId(5), 0.9), (WordId(4), 0.8), (WordId(6), 0.7)]];
        assert_eq!(aggregate_candidates(&single, 2), vec![WordId(5), WordId(4)]);
    }

    #[test]
    fn aggregate_matches_manual_rank_sums() {
        // layer lists: a=[w0,w1], b=[w1,w0], c=[w1]
        // points: w0 = 2+1 = 3 (2 layers), w1 = 1+2+1 = 4 (3 layers)
        let lists = vec![
            vec![(WordId(0), 0.9), (WordId(1), 0.8)],
            vec![(WordId(1), 0.9), (WordId(0), 0.8)],
            vec![(WordId(1), 0.9)],
        ];
        assert_eq!(aggregate_candidates(&lists, 2), vec![WordId(1), WordId(0)]);
    }
}
