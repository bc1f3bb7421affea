//! Seeded synthetic vocabulary trajectories with planted relational
//! structure.
//!
//! The generator exists to make the central claim testable without child
//! data: when growth is driven by one relationship layer, the model that
//! sees that layer should beat the model that sees none. Acquisition is a
//! one-parameter preferential process: an unknown word becomes known with
//! `base + boost * (weighted fraction of its planted-layer neighbors already
//! known)`. Trajectories are monotone by construction, so they need no
//! repair, and every byte of output is a deterministic function of the seed.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{
    build_semantic_layer, build_sensorimotor_layer, GraphError, RelationshipLayer,
    SemanticSimilarity, SensorimotorDimension, SensorimotorScores, SensorimotorTable,
};
use crate::lexicon::{Lexicon, WordId, WordKey};
use crate::observations::{ComprehensionState, VocabularySnapshot};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("planted layer `{name}` not among built layers {available:?}")]
    PlantedLayerMissing {
        name: String,
        available: Vec<String>,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SynthConfig {
    pub n_children: usize,
    pub observations_per_child: usize,
    pub vocabulary_size: usize,
    /// Layer whose neighborhoods drive acquisition (a sensorimotor dimension
    /// name or one of the synthetic semantic layer names).
    pub planted_layer: String,
    pub neighbor_boost: f64,
    pub base_probability: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_children: 200,
            observations_per_child: 8,
            vocabulary_size: 40,
            planted_layer: "touch".to_string(),
            neighbor_boost: 0.4,
            base_probability: 0.1,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.n_children == 0 || self.observations_per_child == 0 || self.vocabulary_size == 0 {
            return Err(SynthError::InvalidConfig(
                "all counts must be positive".into(),
            ));
        }
        for (name, p) in [
            ("neighbor_boost", self.neighbor_boost),
            ("base_probability", self.base_probability),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SynthError::InvalidConfig(format!(
                    "{name} {p} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// Synthetic word surfaces: fixed width keeps id order equal to name order.
pub fn word_surface(i: usize) -> String {
    format!("w{i:04}")
}

pub fn synthetic_lexicon(vocabulary_size: usize) -> Lexicon {
    Lexicon::from_keys((0..vocabulary_size).map(|i| WordKey::new(word_surface(i), "")))
}

/// Raw input files for a synthetic run: one sensorimotor norms CSV and two
/// semantic similarity CSVs, all over the same synthetic vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthInputs {
    pub norms_csv: String,
    pub mcrae_csv: String,
    pub buchanan_csv: String,
}

pub const SEMANTIC_LAYER_NAMES: [&str; 2] = ["buchanan", "mcrae"];

/// Builds structured synthetic norms. Words are assigned round-robin to the
/// 11 dimensions; a word scores high on its own dimension and low elsewhere,
/// so each dimension's layer connects exactly its own word group. Semantic
/// similarities form two ring lattices at different strides.
pub fn synthetic_inputs(vocabulary_size: usize, seed: u64) -> SynthInputs {
    let mut rng = ChaCha20Rng::seed_from_u64(seed.wrapping_add(0x5EED));
    let scale_max = 5.0;

    let mut norms_csv = String::from(crate::graph::SENSORIMOTOR_HEADER);
    norms_csv.push('\n');
    for i in 0..vocabulary_size {
        let own_dim = i % SensorimotorDimension::ALL.len();
        norms_csv.push_str(&word_surface(i));
        for d in 0..SensorimotorDimension::ALL.len() {
            let score: f64 = if d == own_dim {
                rng.random_range(4.0..scale_max)
            } else {
                rng.random_range(0.0..1.5)
            };
            norms_csv.push_str(&format!(",{score}"));
        }
        norms_csv.push('\n');
    }

    let ring = |stride_a: usize, stride_b: usize, rng: &mut ChaCha20Rng| -> String {
        let mut csv = String::from("word_a,word_b,cosine\n");
        for i in 0..vocabulary_size {
            for stride in [stride_a, stride_b] {
                let j = (i + stride) % vocabulary_size;
                if i < j {
                    let cosine: f64 = rng.random_range(0.55..0.95);
                    csv.push_str(&format!(
                        "{},{},{cosine}\n",
                        word_surface(i),
                        word_surface(j)
                    ));
                }
            }
        }
        csv
    };
    let mcrae_csv = ring(1, 2, &mut rng);
    let buchanan_csv = ring(3, 5, &mut rng);

    SynthInputs {
        norms_csv,
        mcrae_csv,
        buchanan_csv,
    }
}

/// Everything a synthetic run produces, kept in memory for direct library
/// use; the CLI writes the same content to disk.
#[derive(Debug, Clone)]
pub struct SynthDataset {
    pub config: SynthConfig,
    pub inputs: SynthInputs,
    pub lexicon: Lexicon,
    pub layers: Vec<RelationshipLayer>,
    pub snapshots: Vec<VocabularySnapshot>,
}

/// Builds the 13 layers from in-memory synthetic inputs. Threshold and cap
/// are the construction defaults.
pub fn build_synthetic_layers(
    inputs: &SynthInputs,
    lexicon: &Lexicon,
    threshold: f64,
    edge_cap: usize,
) -> Result<Vec<RelationshipLayer>, SynthError> {
    let mut table = SensorimotorTable::new(5.0);
    for line in inputs.norms_csv.lines().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let id = lexicon
            .id_of(fields[0], "")
            .expect("synthetic vocabulary is closed");
        let mut scores = [0.0f64; 11];
        for (slot, field) in scores.iter_mut().zip(&fields[1..]) {
            *slot = field.parse().expect("synthetic scores are well-formed");
        }
        table.insert(SensorimotorScores {
            word_id: id,
            scores,
        })?;
    }

    let parse_sims = |csv: &str| -> Vec<SemanticSimilarity> {
        csv.lines()
            .skip(1)
            .filter(|l| !l.trim().is_empty())
            .map(|line| {
                let fields: Vec<&str> = line.split(',').collect();
                SemanticSimilarity {
                    word_a: lexicon.id_of(fields[0], "").expect("closed vocabulary"),
                    word_b: lexicon.id_of(fields[1], "").expect("closed vocabulary"),
                    cosine: fields[2].parse().expect("well-formed cosine"),
                }
            })
            .collect()
    };

    let mut layers = Vec::with_capacity(13);
    layers.push(build_semantic_layer(
        "buchanan",
        &parse_sims(&inputs.buchanan_csv),
        threshold,
        edge_cap,
    )?);
    layers.push(build_semantic_layer(
        "mcrae",
        &parse_sims(&inputs.mcrae_csv),
        threshold,
        edge_cap,
    )?);
    for dim in SensorimotorDimension::ALL {
        layers.push(build_sensorimotor_layer(&table, dim, threshold, edge_cap)?);
    }
    Ok(layers)
}

/// Simulates one cohort. At the first observation each word is known with
/// the base probability; afterwards each unknown word is acquired with
/// `base + boost * weighted-known-neighbor-fraction`, clamped to 1.
pub fn generate(
    config: &SynthConfig,
    layers: &[RelationshipLayer],
) -> Result<Vec<VocabularySnapshot>, SynthError> {
    config.validate()?;
    let planted = layers
        .iter()
        .find(|l| l.layer_name() == config.planted_layer)
        .ok_or_else(|| SynthError::PlantedLayerMissing {
            name: config.planted_layer.clone(),
            available: layers.iter().map(|l| l.layer_name().to_string()).collect(),
        })?;

    // adjacency lists over the planted layer, with total incident weight
    let mut neighbors: BTreeMap<WordId, Vec<(WordId, f64)>> = BTreeMap::new();
    for e in planted.edges() {
        neighbors.entry(e.a).or_default().push((e.b, e.weight));
        neighbors.entry(e.b).or_default().push((e.a, e.weight));
    }

    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let mut snapshots = Vec::with_capacity(config.n_children * config.observations_per_child);
    for child in 0..config.n_children {
        let child_id = format!("synth{child:04}");
        let mut known: Vec<bool> = vec![false; config.vocabulary_size];
        for t in 0..config.observations_per_child {
            if t == 0 {
                for slot in known.iter_mut() {
                    *slot = rng.random_range(0.0..1.0) < config.base_probability;
                }
            } else {
                let previous = known.clone();
                for (w, slot) in known.iter_mut().enumerate() {
                    if *slot {
                        continue;
                    }
                    let frac = match neighbors.get(&WordId(w)) {
                        Some(adjacent) if !adjacent.is_empty() => {
                            let total: f64 = adjacent.iter().map(|(_, wt)| wt).sum();
                            let have: f64 = adjacent
                                .iter()
                                .filter(|(v, _)| previous[v.0])
                                .map(|(_, wt)| wt)
                                .sum();
                            have / total
                        }
                        _ => 0.0,
                    };
                    let p = (config.base_probability + config.neighbor_boost * frac).min(1.0);
                    *slot = rng.random_range(0.0..1.0) < p;
                }
            }
            let mut snapshot = VocabularySnapshot::new(child_id.clone(), (12 + t) as f64);
            for (w, is_known) in known.iter().enumerate() {
                if *is_known {
                    snapshot.set_state(WordId(w), ComprehensionState::Full);
                }
            }
            snapshots.push(snapshot);
        }
    }
    Ok(snapshots)
}

/// One-call generation of inputs, layers, and observations.
pub fn generate_dataset(config: &SynthConfig) -> Result<SynthDataset, SynthError> {
    config.validate()?;
    // round-robin assignment needs two words per dimension or some
    // sensorimotor layer comes out edgeless
    let min_vocab = 2 * SensorimotorDimension::ALL.len();
    if config.vocabulary_size < min_vocab {
        return Err(SynthError::InvalidConfig(format!(
            "vocabulary_size {} below {min_vocab}, the smallest closed set covering all 13 layers",
            config.vocabulary_size
        )));
    }
    let inputs = synthetic_inputs(config.vocabulary_size, config.seed);
    let lexicon = synthetic_lexicon(config.vocabulary_size);
    let layers = build_synthetic_layers(&inputs, &lexicon, 0.5, 2000)?;
    let snapshots = generate(config, &layers)?;
    Ok(SynthDataset {
        config: config.clone(),
        inputs,
        lexicon,
        layers,
        snapshots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observations::{group_by_child, repair_series, RepairMode};

    fn tiny_layer() -> RelationshipLayer {
        let sims = vec![
            SemanticSimilarity {
                word_a: WordId(0),
                word_b: WordId(1),
                cosine: 0.9,
            },
            SemanticSimilarity {
                word_a: WordId(1),
                word_b: WordId(2),
                cosine: 0.8,
            },
        ];
        build_semantic_layer("planted", &sims, 0.5, 2000).unwrap()
    }

    #[test]
    fn nothing_learned_without_probability() {
        let config = SynthConfig {
            n_children: 5,
            observations_per_child: 6,
            vocabulary_size: 3,
            planted_layer: "planted".into(),
            neighbor_boost: 0.0,
            base_probability: 0.0,
            seed: 1,
        };
        let snapshots = generate(&config, &[tiny_layer()]).unwrap();
        assert_eq!(snapshots.len(), 30);
        for s in &snapshots {
            assert!(s.states.is_empty());
        }
    }

    #[test]
    fn missing_planted_layer_is_an_error() {
        let config = SynthConfig {
            planted_layer: "nope".into(),
            ..SynthConfig::default()
        };
        assert!(matches!(
            generate(&config, &[tiny_layer()]),
            Err(SynthError::PlantedLayerMissing { .. })
        ));
    }

    #[test]
    fn zero_boost_matches_base_rate() {
        let base = 0.3;
        let config = SynthConfig {
            n_children: 200,
            observations_per_child: 2,
            vocabulary_size: 3,
            planted_layer: "planted".into(),
            neighbor_boost: 0.0,
            base_probability: base,
            seed: 7,
        };
        let snapshots = generate(&config, &[tiny_layer()]).unwrap();
        let by_child = group_by_child(snapshots);
        let mut unknown_at_first = 0usize;
        let mut acquired = 0usize;
        for series in by_child.values() {
            for w in 0..3 {
                let id = WordId(w);
                if series[0].encoded(id) == 0.0 {
                    unknown_at_first += 1;
                    if series[1].encoded(id) > 0.0 {
                        acquired += 1;
                    }
                }
            }
        }
        let n = unknown_at_first as f64;
        let rate = acquired as f64 / n;
        let sigma = (base * (1.0 - base) / n).sqrt();
        assert!(
            (rate - base).abs() <= 3.0 * sigma,
            "rate {rate} not within 3 sigma ({sigma}) of {base}"
        );
    }

    #[test]
    fn known_neighbors_raise_acquisition_frequency() {
        // word 2's only planted neighbor is word 1; compare acquisition of
        // word 2 at the second observation between children who started out
        // knowing word 1 and children who knew nothing
        let config = SynthConfig {
            n_children: 1000,
            observations_per_child: 2,
            vocabulary_size: 3,
            planted_layer: "planted".into(),
            neighbor_boost: 0.5,
            base_probability: 0.15,
            seed: 11,
        };
        let snapshots = generate(&config, &[tiny_layer()]).unwrap();
        let by_child = group_by_child(snapshots);
        let (mut with_n, mut with_acq, mut without_n, mut without_acq) = (0, 0, 0, 0);
        for series in by_child.values() {
            if series[0].encoded(WordId(2)) > 0.0 {
                continue;
            }
            let neighbor_known = series[0].encoded(WordId(1)) > 0.0;
            let acquired = series[1].encoded(WordId(2)) > 0.0;
            if neighbor_known {
                with_n += 1;
                if acquired {
                    with_acq += 1;
                }
            } else {
                without_n += 1;
                if acquired {
                    without_acq += 1;
                }
            }
        }
        assert!(with_n > 30 && without_n > 30, "both arms populated");
        let with_rate = with_acq as f64 / with_n as f64;
        let without_rate = without_acq as f64 / without_n as f64;
        assert!(
            with_rate > without_rate,
            "with {with_rate} vs without {without_rate}"
        );
    }

    #[test]
    fn output_is_monotone_and_deterministic() {
        let config = SynthConfig {
            n_children: 10,
            observations_per_child: 5,
            vocabulary_size: 24,
            planted_layer: "touch".into(),
            ..SynthConfig::default()
        };
        let a = generate_dataset(&config).unwrap();
        let b = generate_dataset(&config).unwrap();
        assert_eq!(a.snapshots, b.snapshots);
        assert_eq!(a.inputs, b.inputs);

        // monotone by construction: repair in either mode changes nothing
        let by_child = group_by_child(a.snapshots.clone());
        for series in by_child.values() {
            for mode in [RepairMode::Optimistic, RepairMode::Pessimistic] {
                let repaired = repair_series(series, mode).unwrap();
                assert_eq!(&repaired, series);
            }
        }
    }

    #[test]
    fn synthetic_layers_cover_all_13_categories() {
        let config = SynthConfig {
            vocabulary_size: 40,
            ..SynthConfig::default()
        };
        let dataset = generate_dataset(&config).unwrap();
        assert_eq!(dataset.layers.len(), 13);
        let names: Vec<&str> = dataset.layers.iter().map(|l| l.layer_name()).collect();
        assert!(names.contains(&"mcrae"));
        assert!(names.contains(&"buchanan"));
        assert!(names.contains(&"touch"));
        for layer in &dataset.layers {
            assert!(layer.node_count() >= 2, "{} too small", layer.layer_name());
            assert!(layer.edge_count() >= 1);
        }
        assert_eq!(dataset.lexicon.len(), 40);
    }
}
