//! Shared fixtures for the benchmark targets.

use lexigraph::graph::{
    build_sensorimotor_layer, SensorimotorDimension, SensorimotorScores, SensorimotorTable,
};
use lexigraph::observations::{ComprehensionState, VocabularySnapshot};
use lexigraph::tgcn::{project_sequences, ProjectedSequence};
use lexigraph::{RelationshipLayer, WordId};

/// Deterministic score table: word i scores (i * 7 % 50) / 10 on every
/// dimension, spreading weights across the whole range.
pub fn score_table(words: usize) -> SensorimotorTable {
    let mut table = SensorimotorTable::new(5.0);
    for i in 0..words {
        let s = (i * 7 % 50) as f64 / 10.0;
        table
            .insert(SensorimotorScores {
                word_id: WordId(i),
                scores: [s; 11],
            })
            .expect("scores in range");
    }
    table
}

pub fn touch_layer(words: usize, edge_cap: usize) -> RelationshipLayer {
    build_sensorimotor_layer(
        &score_table(words),
        SensorimotorDimension::Touch,
        0.5,
        edge_cap,
    )
    .expect("layer is nonempty")
}

/// Windows of alternating learning patterns over the layer's nodes.
pub fn training_window(
    layer: &RelationshipLayer,
    windows: usize,
    window: usize,
) -> Vec<ProjectedSequence> {
    let mut sequences = Vec::new();
    for w in 0..windows {
        let snapshots: Vec<VocabularySnapshot> = (0..window)
            .map(|t| {
                let mut snap = VocabularySnapshot::new(format!("bench{w}"), (12 + t) as f64);
                for (rank, id) in layer.nodes().iter().enumerate() {
                    if rank % (w + 2) <= t {
                        snap.set_state(*id, ComprehensionState::Full);
                    }
                }
                snap
            })
            .collect();
        sequences.push(lexigraph::observations::ObservationSequence {
            child_id: format!("bench{w}"),
            snapshots,
        });
    }
    project_sequences(&sequences, layer.nodes(), window).expect("windows sized to the config")
}
