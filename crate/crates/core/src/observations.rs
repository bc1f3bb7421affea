//! Longitudinal vocabulary observations: comprehension states per word per
//! child per age, contradiction repair, and sliding-window sequence assembly.
//!
//! Checklist data is noisy: a word marked known at 16 months is sometimes
//! marked unknown at 18. Under the assumption that children do not forget
//! words, those contradictions are repaired in one of two ways before
//! training. Optimistic repair trusts the earlier positive report and raises
//! later values to the running maximum; pessimistic repair distrusts it and
//! lowers earlier values to the minimum seen from that point on. Both yield
//! per-word series that never decrease.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::{standardize, AliasMap, HomographMap, Lexicon, LexiconError, WordId};

/// Comprehension levels, totally ordered by their encoded values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ComprehensionState {
    #[default]
    None,
    #[serde(rename = "produces")]
    ProducesOnly,
    #[serde(rename = "understands")]
    UnderstandsOnly,
    Full,
}

/// Feature value used as model input and prediction target.
pub fn encode_state(state: ComprehensionState) -> f64 {
    match state {
        ComprehensionState::None => 0.0,
        ComprehensionState::ProducesOnly => 0.3,
        ComprehensionState::UnderstandsOnly => 0.6,
        ComprehensionState::Full => 1.0,
    }
}

impl ComprehensionState {
    pub fn encode(self) -> f64 {
        encode_state(self)
    }
}

impl FromStr for ComprehensionState {
    type Err = ObservationsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "none" | "" => Ok(ComprehensionState::None),
            "produces" => Ok(ComprehensionState::ProducesOnly),
            "understands" => Ok(ComprehensionState::UnderstandsOnly),
            "full" => Ok(ComprehensionState::Full),
            other => Err(ObservationsError::InvalidState(other.to_string())),
        }
    }
}

impl fmt::Display for ComprehensionState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ComprehensionState::None => "none",
            ComprehensionState::ProducesOnly => "produces",
            ComprehensionState::UnderstandsOnly => "understands",
            ComprehensionState::Full => "full",
        };
        write!(f, "{name}")
    }
}

#[derive(Debug, Error)]
pub enum ObservationsError {
    #[error("unknown comprehension state `{0}`")]
    InvalidState(String),
    #[error("snapshots for child `{child_id}` are not strictly increasing in age")]
    UnorderedSnapshots { child_id: String },
    #[error("snapshot list mixes children `{first}` and `{second}`")]
    MixedChildren { first: String, second: String },
    #[error("age {age} for child `{child_id}` must be positive")]
    InvalidAge { child_id: String, age: f64 },
    #[error(
        "conflicting states for child `{child_id}` age {age} word {word}: {first} vs {second}"
    )]
    ConflictingRow {
        child_id: String,
        age: f64,
        word: String,
        first: ComprehensionState,
        second: ComprehensionState,
    },
    #[error("split fractions sum to {0}, expected 1")]
    FractionSum(f64),
    #[error("child `{0}` listed in more than one split partition")]
    ChildConflict(String),
    #[error("child `{0}` appears in the data but in no split partition")]
    UnassignedChild(String),
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
}

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> ObservationsError {
    ObservationsError::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

/// One vocabulary inventory: every word's state for one child at one age.
/// Words absent from `states` are at `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VocabularySnapshot {
    pub child_id: String,
    pub age_months: f64,
    #[serde(with = "state_pairs")]
    pub states: BTreeMap<WordId, ComprehensionState>,
}

/// JSON-safe encoding of the state map as sorted (id, state) pairs.
mod state_pairs {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<WordId, ComprehensionState>,
        ser: S,
    ) -> Result<S::Ok, S::Error> {
        let pairs: Vec<(WordId, ComprehensionState)> = map.iter().map(|(k, v)| (*k, *v)).collect();
        pairs.serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        de: D,
    ) -> Result<BTreeMap<WordId, ComprehensionState>, D::Error> {
        let pairs = Vec::<(WordId, ComprehensionState)>::deserialize(de)?;
        Ok(pairs.into_iter().collect())
    }
}

impl VocabularySnapshot {
    pub fn new(child_id: impl Into<String>, age_months: f64) -> Self {
        VocabularySnapshot {
            child_id: child_id.into(),
            age_months,
            states: BTreeMap::new(),
        }
    }

    pub fn state_of(&self, word: WordId) -> ComprehensionState {
        self.states.get(&word).copied().unwrap_or_default()
    }

    pub fn encoded(&self, word: WordId) -> f64 {
        encode_state(self.state_of(word))
    }

    pub fn set_state(&mut self, word: WordId, state: ComprehensionState) {
        if state == ComprehensionState::None {
            self.states.remove(&word);
        } else {
            self.states.insert(word, state);
        }
    }
}

/// A fixed-length run of contiguous snapshots for one child.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSequence {
    pub child_id: String,
    pub snapshots: Vec<VocabularySnapshot>,
}

impl ObservationSequence {
    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }
}

/// Contradiction-repair direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RepairMode {
    #[default]
    Optimistic,
    Pessimistic,
}

impl FromStr for RepairMode {
    type Err = ObservationsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "optimistic" => Ok(RepairMode::Optimistic),
            "pessimistic" => Ok(RepairMode::Pessimistic),
            other => Err(ObservationsError::InvalidState(other.to_string())),
        }
    }
}

impl fmt::Display for RepairMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RepairMode::Optimistic => write!(f, "optimistic"),
            RepairMode::Pessimistic => write!(f, "pessimistic"),
        }
    }
}

fn check_ordered(snapshots: &[VocabularySnapshot]) -> Result<(), ObservationsError> {
    for pair in snapshots.windows(2) {
        if pair[0].child_id != pair[1].child_id {
            return Err(ObservationsError::MixedChildren {
                first: pair[0].child_id.clone(),
                second: pair[1].child_id.clone(),
            });
        }
        if pair[1].age_months <= pair[0].age_months {
            return Err(ObservationsError::UnorderedSnapshots {
                child_id: pair[0].child_id.clone(),
            });
        }
    }
    Ok(())
}

/// Removes forgetting contradictions from one child's age-ordered snapshots.
/// Optimistic mode propagates the running maximum forward; pessimistic mode
/// propagates the running minimum backward.
pub fn repair_series(
    snapshots: &[VocabularySnapshot],
    mode: RepairMode,
) -> Result<Vec<VocabularySnapshot>, ObservationsError> {
    check_ordered(snapshots)?;
    let mut repaired = snapshots.to_vec();
    let words: BTreeSet<WordId> = snapshots
        .iter()
        .flat_map(|s| s.states.keys().copied())
        .collect();
    for word in words {
        let mut series: Vec<ComprehensionState> =
            repaired.iter().map(|s| s.state_of(word)).collect();
        match mode {
            RepairMode::Optimistic => {
                for i in 1..series.len() {
                    series[i] = series[i].max(series[i - 1]);
                }
            }
            RepairMode::Pessimistic => {
                for i in (0..series.len().saturating_sub(1)).rev() {
                    series[i] = series[i].min(series[i + 1]);
                }
            }
        }
        for (snapshot, state) in repaired.iter_mut().zip(series) {
            snapshot.set_state(word, state);
        }
    }
    Ok(repaired)
}

/// All contiguous windows of the given length, stride 1. Series shorter than
/// the window yield nothing.
pub fn window_series(snapshots: &[VocabularySnapshot], window: usize) -> Vec<ObservationSequence> {
    assert!(window >= 2, "window must be at least 2");
    if snapshots.len() < window {
        if let Some(first) = snapshots.first() {
            log::warn!(
                "child `{}` has {} snapshots, fewer than window {}; no sequences",
                first.child_id,
                snapshots.len(),
                window
            );
        }
        return Vec::new();
    }
    snapshots
        .windows(window)
        .map(|w| ObservationSequence {
            child_id: w[0].child_id.clone(),
            snapshots: w.to_vec(),
        })
        .collect()
}

/// Groups a flat snapshot list by child, age-ordered within each child.
pub fn group_by_child(
    snapshots: Vec<VocabularySnapshot>,
) -> BTreeMap<String, Vec<VocabularySnapshot>> {
    let mut by_child: BTreeMap<String, Vec<VocabularySnapshot>> = BTreeMap::new();
    for snapshot in snapshots {
        by_child
            .entry(snapshot.child_id.clone())
            .or_default()
            .push(snapshot);
    }
    for series in by_child.values_mut() {
        series.sort_by(|a, b| {
            a.age_months
                .partial_cmp(&b.age_months)
                .expect("finite ages")
        });
    }
    by_child
}

/// Repairs then windows every child's series, concatenating sequences in
/// child-id order.
pub fn prepare_sequences(
    by_child: &BTreeMap<String, Vec<VocabularySnapshot>>,
    mode: RepairMode,
    window: usize,
) -> Result<Vec<ObservationSequence>, ObservationsError> {
    let mut sequences = Vec::new();
    for series in by_child.values() {
        let repaired = repair_series(series, mode)?;
        sequences.extend(window_series(&repaired, window));
    }
    Ok(sequences)
}

/// How to partition children into train/validation/test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum SplitSpec {
    Fractions {
        train: f64,
        validation: f64,
        test: f64,
    },
    Explicit {
        train: Vec<String>,
        validation: Vec<String>,
        test: Vec<String>,
    },
}

impl SplitSpec {
    /// 80/10/10 by child.
    pub fn default_fractions() -> Self {
        SplitSpec::Fractions {
            train: 0.8,
            validation: 0.1,
            test: 0.1,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Vec<ObservationSequence>,
    pub validation: Vec<ObservationSequence>,
    pub test: Vec<ObservationSequence>,
    pub train_children: Vec<String>,
    pub validation_children: Vec<String>,
    pub test_children: Vec<String>,
}

/// Partitions sequences by child so no child straddles two partitions.
/// Fraction splits shuffle the sorted child list under the seed; explicit
/// lists are honored verbatim and must cover every observed child.
pub fn split_dataset(
    sequences: &[ObservationSequence],
    spec: &SplitSpec,
    seed: u64,
) -> Result<DatasetSplit, ObservationsError> {
    let children: BTreeSet<String> = sequences.iter().map(|s| s.child_id.clone()).collect();

    let (train_set, val_set, test_set): (BTreeSet<String>, BTreeSet<String>, BTreeSet<String>) =
        match spec {
            SplitSpec::Fractions {
                train,
                validation,
                test,
            } => {
                let sum = train + validation + test;
                if (sum - 1.0).abs() > 1e-9 {
                    return Err(ObservationsError::FractionSum(sum));
                }
                let mut order: Vec<String> = children.iter().cloned().collect();
                let mut rng = ChaCha20Rng::seed_from_u64(seed);
                order.shuffle(&mut rng);
                let n = order.len();
                let n_train = (n as f64 * train).floor() as usize;
                let n_val = (n as f64 * validation).floor() as usize;
                let train_set: BTreeSet<String> = order[..n_train].iter().cloned().collect();
                let val_set: BTreeSet<String> =
                    order[n_train..n_train + n_val].iter().cloned().collect();
                let test_set: BTreeSet<String> = order[n_train + n_val..].iter().cloned().collect();
                (train_set, val_set, test_set)
            }
            SplitSpec::Explicit {
                train,
                validation,
                test,
            } => {
                let train_set: BTreeSet<String> = train.iter().cloned().collect();
                let val_set: BTreeSet<String> = validation.iter().cloned().collect();
                let test_set: BTreeSet<String> = test.iter().cloned().collect();
                if let Some(child) = train_set.intersection(&val_set).next() {
                    return Err(ObservationsError::ChildConflict(child.clone()));
                }
                if let Some(child) = train_set.intersection(&test_set).next() {
                    return Err(ObservationsError::ChildConflict(child.clone()));
                }
                if let Some(child) = val_set.intersection(&test_set).next() {
                    return Err(ObservationsError::ChildConflict(child.clone()));
                }
                for child in &children {
                    if !train_set.contains(child)
                        && !val_set.contains(child)
                        && !test_set.contains(child)
                    {
                        return Err(ObservationsError::UnassignedChild(child.clone()));
                    }
                }
                (train_set, val_set, test_set)
            }
        };

    let mut split = DatasetSplit {
        train_children: train_set.iter().cloned().collect(),
        validation_children: val_set.iter().cloned().collect(),
        test_children: test_set.iter().cloned().collect(),
        ..DatasetSplit::default()
    };
    for seq in sequences {
        if train_set.contains(&seq.child_id) {
            split.train.push(seq.clone());
        } else if val_set.contains(&seq.child_id) {
            split.validation.push(seq.clone());
        } else if test_set.contains(&seq.child_id) {
            split.test.push(seq.clone());
        }
    }
    Ok(split)
}

/// Loads `child_id,age_months,word,context_label,state` rows and groups them
/// into snapshots. Duplicate rows must agree on the state.
pub fn load_observations_csv(
    path: &Path,
    lexicon: &Lexicon,
    aliases: &AliasMap,
    homographs: &HomographMap,
) -> Result<Vec<VocabularySnapshot>, ObservationsError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let headers = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    let got: Vec<&str> = headers.iter().collect();
    if got != vec!["child_id", "age_months", "word", "context_label", "state"] {
        return Err(parse_err(path, 1, format!("unexpected header {got:?}")));
    }

    // BTreeMap keyed by (child, age bits) keeps snapshot order deterministic
    let mut grouped: BTreeMap<(String, u64), VocabularySnapshot> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let child_id = record.get(0).unwrap_or("").to_string();
        if child_id.is_empty() {
            return Err(parse_err(path, line, "empty child_id"));
        }
        let age_field = record.get(1).unwrap_or("");
        let age_months: f64 = age_field
            .parse()
            .map_err(|_| parse_err(path, line, format!("invalid age `{age_field}`")))?;
        if !age_months.is_finite() || age_months <= 0.0 {
            return Err(parse_err(
                path,
                line,
                ObservationsError::InvalidAge {
                    child_id: child_id.clone(),
                    age: age_months,
                }
                .to_string(),
            ));
        }
        let word_raw = record.get(2).unwrap_or("");
        let label = record.get(3).unwrap_or("");
        let key = standardize(word_raw, label, aliases, homographs)
            .map_err(|e| parse_err(path, line, e.to_string()))?;
        let word_id = lexicon
            .resolve(&key)
            .map_err(|e| parse_err(path, line, e.to_string()))?;
        let state: ComprehensionState = record
            .get(4)
            .unwrap_or("")
            .parse()
            .map_err(|e: ObservationsError| parse_err(path, line, e.to_string()))?;

        let snapshot = grouped
            .entry((child_id.clone(), age_months.to_bits()))
            .or_insert_with(|| VocabularySnapshot::new(child_id.clone(), age_months));
        if let Some(existing) = snapshot.states.get(&word_id) {
            if *existing != state {
                return Err(parse_err(
                    path,
                    line,
                    ObservationsError::ConflictingRow {
                        child_id,
                        age: age_months,
                        word: key.to_string(),
                        first: *existing,
                        second: state,
                    }
                    .to_string(),
                ));
            }
        }
        snapshot.set_state(word_id, state);
    }
    Ok(grouped.into_values().collect())
}

/// Writes snapshots back out in the ingest format, one row per non-None
/// (child, age, word) state.
pub fn write_observations_csv(
    snapshots: &[VocabularySnapshot],
    lexicon: &Lexicon,
    path: &Path,
) -> Result<(), ObservationsError> {
    let mut out = String::from("child_id,age_months,word,context_label,state\n");
    for snapshot in snapshots {
        for (word, state) in &snapshot.states {
            let entry = lexicon
                .word(*word)
                .ok_or(LexiconError::UnknownWord(word.to_string()))?;
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                snapshot.child_id, snapshot.age_months, entry.surface, entry.context_label, state
            ));
        }
    }
    std::fs::write(path, out).map_err(|e| ObservationsError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Dataset-level manifest written alongside prepared sequences.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub children: Vec<ChildSummary>,
    pub repair_mode: RepairMode,
    pub window: usize,
    pub split_seed: u64,
    pub train_sequences: usize,
    pub validation_sequences: usize,
    pub test_sequences: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChildSummary {
    pub child_id: String,
    pub snapshots: usize,
    pub sequences: usize,
}

fn csv_err(path: &Path, err: csv::Error) -> ObservationsError {
    let line = err.position().map(|p| p.line()).unwrap_or(0);
    parse_err(path, line, err.to_string())
}
