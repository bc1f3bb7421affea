//! Relationship layers: weighted undirected graphs over the lexicon, one per
//! norm category (11 sensorimotor dimensions plus 2 semantic similarity
//! datasets).
//!
//! Layer construction is uniform: score every unordered word pair, drop pairs
//! under the threshold (inclusive, so a weight equal to the threshold
//! survives), cap the survivors to the heaviest `edge_cap`, and take the node
//! set from the surviving endpoints. Self-loops of weight exactly 1.0 exist
//! for every retained node and do not count against the cap.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::{standardize, AliasMap, HomographMap, Lexicon, LexiconError, WordId};
use crate::num::Matrix;

/// The Lancaster sensorimotor dimensions, in CSV column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SensorimotorDimension {
    Touch,
    Taste,
    Smell,
    Hearing,
    Vision,
    Interoception,
    MouthThroat,
    HandArm,
    FootLeg,
    Head,
    Torso,
}

impl SensorimotorDimension {
    pub const ALL: [SensorimotorDimension; 11] = [
        SensorimotorDimension::Touch,
        SensorimotorDimension::Taste,
        SensorimotorDimension::Smell,
        SensorimotorDimension::Hearing,
        SensorimotorDimension::Vision,
        SensorimotorDimension::Interoception,
        SensorimotorDimension::MouthThroat,
        SensorimotorDimension::HandArm,
        SensorimotorDimension::FootLeg,
        SensorimotorDimension::Head,
        SensorimotorDimension::Torso,
    ];

    /// Column name in the norms CSV; doubles as the layer name.
    pub fn name(self) -> &'static str {
        match self {
            SensorimotorDimension::Touch => "touch",
            SensorimotorDimension::Taste => "taste",
            SensorimotorDimension::Smell => "smell",
            SensorimotorDimension::Hearing => "hearing",
            SensorimotorDimension::Vision => "vision",
            SensorimotorDimension::Interoception => "interoception",
            SensorimotorDimension::MouthThroat => "mouth_throat",
            SensorimotorDimension::HandArm => "hand_arm",
            SensorimotorDimension::FootLeg => "foot_leg",
            SensorimotorDimension::Head => "head",
            SensorimotorDimension::Torso => "torso",
        }
    }

    pub fn index(self) -> usize {
        Self::ALL
            .iter()
            .position(|d| *d == self)
            .expect("dimension listed in ALL")
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|d| d.name() == name)
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("score {value} for `{word}` on {dimension} outside [0, {scale_max}]")]
    InvalidScore {
        word: String,
        dimension: String,
        value: f64,
        scale_max: f64,
    },
    #[error("cosine {value} for ({word_a}, {word_b}) outside [0, 1]")]
    InvalidCosine {
        word_a: String,
        word_b: String,
        value: f64,
    },
    #[error("conflicting weights for pair ({a}, {b}): {first} vs {second}")]
    ConflictingPair {
        a: WordId,
        b: WordId,
        first: f64,
        second: f64,
    },
    #[error("layer `{layer_name}` has no edges at or above the threshold")]
    EmptyLayer { layer_name: String },
    #[error("threshold {0} outside (0, 1)")]
    InvalidThreshold(f64),
    #[error("layer `{layer_name}` has no nodes; cannot normalize")]
    EmptyAdjacency { layer_name: String },
    #[error("zero degree for node {node} despite self-loops")]
    ZeroDegree { node: WordId },
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

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> GraphError {
    GraphError::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

fn io_err(path: &Path, source: std::io::Error) -> GraphError {
    GraphError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Normalized product of two scores on a 0..=scale_max rating scale.
/// Self-pairs are not routed through this; layer construction pins the
/// diagonal at 1.0.
pub fn sensorimotor_weight(score_a: f64, score_b: f64, scale_max: f64) -> Result<f64, GraphError> {
    assert!(scale_max > 0.0, "scale_max must be positive");
    for (name, value) in [("a", score_a), ("b", score_b)] {
        if !(0.0..=scale_max).contains(&value) || !value.is_finite() {
            return Err(GraphError::InvalidScore {
                word: name.to_string(),
                dimension: String::new(),
                value,
                scale_max,
            });
        }
    }
    Ok(score_a * score_b / (scale_max * scale_max))
}

/// One word's ratings across all 11 dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorimotorScores {
    pub word_id: WordId,
    pub scores: [f64; 11],
}

/// All sensorimotor rows keyed by lexicon id, plus the rating-scale maximum
/// used to normalize products.
#[derive(Debug, Clone)]
pub struct SensorimotorTable {
    pub scale_max: f64,
    rows: BTreeMap<WordId, [f64; 11]>,
}

pub const SENSORIMOTOR_HEADER: &str =
    "word,touch,taste,smell,hearing,vision,interoception,mouth_throat,hand_arm,foot_leg,head,torso";

impl SensorimotorTable {
    pub fn new(scale_max: f64) -> Self {
        assert!(scale_max > 0.0);
        SensorimotorTable {
            scale_max,
            rows: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, scores: SensorimotorScores) -> Result<(), GraphError> {
        for (dim, value) in SensorimotorDimension::ALL.iter().zip(scores.scores.iter()) {
            if !(0.0..=self.scale_max).contains(value) || !value.is_finite() {
                return Err(GraphError::InvalidScore {
                    word: scores.word_id.to_string(),
                    dimension: dim.name().to_string(),
                    value: *value,
                    scale_max: self.scale_max,
                });
            }
        }
        self.rows.insert(scores.word_id, scores.scores);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn score(&self, word: WordId, dimension: SensorimotorDimension) -> Option<f64> {
        self.rows.get(&word).map(|r| r[dimension.index()])
    }

    /// Words with their score on one dimension, ascending by id.
    pub fn column(&self, dimension: SensorimotorDimension) -> Vec<(WordId, f64)> {
        let idx = dimension.index();
        self.rows.iter().map(|(id, r)| (*id, r[idx])).collect()
    }

    pub fn from_csv(
        path: &Path,
        lexicon: &Lexicon,
        aliases: &AliasMap,
        homographs: &HomographMap,
        scale_max: f64,
    ) -> Result<Self, GraphError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| csv_err(path, e))?;
        let headers = reader.headers().map_err(|e| csv_err(path, e))?.clone();
        let expected: Vec<&str> = SENSORIMOTOR_HEADER.split(',').collect();
        let got: Vec<&str> = headers.iter().collect();
        if got != expected {
            return Err(parse_err(path, 1, format!("unexpected header {got:?}")));
        }
        let mut table = SensorimotorTable::new(scale_max);
        for record in reader.records() {
            let record = record.map_err(|e| csv_err(path, e))?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            let raw = record.get(0).unwrap_or("");
            let key = standardize(raw, "", aliases, homographs)
                .map_err(|e| parse_err(path, line, e.to_string()))?;
            let word_id = lexicon
                .resolve(&key)
                .map_err(|e| parse_err(path, line, e.to_string()))?;
            let mut scores = [0.0f64; 11];
            for (i, slot) in scores.iter_mut().enumerate() {
                let field = record.get(i + 1).unwrap_or("");
                *slot = field
                    .parse()
                    .map_err(|_| parse_err(path, line, format!("invalid score `{field}`")))?;
            }
            table
                .insert(SensorimotorScores { word_id, scores })
                .map_err(|e| parse_err(path, line, e.to_string()))?;
        }
        Ok(table)
    }
}

/// One undirected similarity datum. Stored with `word_a < word_b` after
/// symmetry dedupe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemanticSimilarity {
    pub word_a: WordId,
    pub word_b: WordId,
    pub cosine: f64,
}

/// Loads `word_a,word_b,cosine` rows, resolving words through the lexicon.
/// Symmetric duplicates collapse; conflicting weights for one pair are an
/// error; self-pair rows are ignored (the diagonal is fixed at 1.0).
pub fn load_semantic_csv(
    path: &Path,
    lexicon: &Lexicon,
    aliases: &AliasMap,
    homographs: &HomographMap,
) -> Result<Vec<SemanticSimilarity>, GraphError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let headers = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    let got: Vec<&str> = headers.iter().collect();
    if got != vec!["word_a", "word_b", "cosine"] {
        return Err(parse_err(path, 1, format!("unexpected header {got:?}")));
    }
    let mut pairs: BTreeMap<(WordId, WordId), f64> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let mut ids = [WordId(0); 2];
        for (i, id) in ids.iter_mut().enumerate() {
            let raw = record.get(i).unwrap_or("");
            let key = standardize(raw, "", aliases, homographs)
                .map_err(|e| parse_err(path, line, e.to_string()))?;
            *id = lexicon
                .resolve(&key)
                .map_err(|e| parse_err(path, line, e.to_string()))?;
        }
        let field = record.get(2).unwrap_or("");
        let cosine: f64 = field
            .parse()
            .map_err(|_| parse_err(path, line, format!("invalid cosine `{field}`")))?;
        if !(0.0..=1.0).contains(&cosine) || !cosine.is_finite() {
            return Err(parse_err(
                path,
                line,
                GraphError::InvalidCosine {
                    word_a: ids[0].to_string(),
                    word_b: ids[1].to_string(),
                    value: cosine,
                }
                .to_string(),
            ));
        }
        if ids[0] == ids[1] {
            continue;
        }
        let key = (ids[0].min(ids[1]), ids[0].max(ids[1]));
        if let Some(prev) = pairs.get(&key) {
            if (prev - cosine).abs() > 1e-12 {
                return Err(parse_err(
                    path,
                    line,
                    GraphError::ConflictingPair {
                        a: key.0,
                        b: key.1,
                        first: *prev,
                        second: cosine,
                    }
                    .to_string(),
                ));
            }
        }
        pairs.insert(key, cosine);
    }
    Ok(pairs
        .into_iter()
        .map(|((a, b), cosine)| SemanticSimilarity {
            word_a: a,
            word_b: b,
            cosine,
        })
        .collect())
}

/// Off-diagonal edge with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerEdge {
    pub a: WordId,
    pub b: WordId,
    pub weight: f64,
}

/// One relationship layer: nodes, thresholded and capped off-diagonal edges,
/// and an implicit 1.0 self-loop on every node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationshipLayer {
    layer_name: String,
    nodes: Vec<WordId>,
    edges: Vec<LayerEdge>,
    threshold: f64,
    edge_cap: usize,
    pre_threshold_pairs: usize,
}

impl RelationshipLayer {
    pub fn layer_name(&self) -> &str {
        &self.layer_name
    }

    /// Sorted ascending by id.
    pub fn nodes(&self) -> &[WordId] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Off-diagonal edges, sorted by (a, b).
    pub fn edges(&self) -> &[LayerEdge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn edge_cap(&self) -> usize {
        self.edge_cap
    }

    /// Unordered pairs scored before thresholding.
    pub fn pre_threshold_pairs(&self) -> usize {
        self.pre_threshold_pairs
    }

    pub fn contains_node(&self, id: WordId) -> bool {
        self.nodes.binary_search(&id).is_ok()
    }

    /// Position of a node in the layer's adjacency ordering.
    pub fn node_index(&self, id: WordId) -> Option<usize> {
        self.nodes.binary_search(&id).ok()
    }

    /// Self-pairs of retained nodes report 1.0; absent pairs report None.
    pub fn weight_between(&self, a: WordId, b: WordId) -> Option<f64> {
        if a == b {
            return self.contains_node(a).then_some(1.0);
        }
        let key = (a.min(b), a.max(b));
        self.edges
            .binary_search_by(|e| (e.a, e.b).cmp(&key))
            .ok()
            .map(|i| self.edges[i].weight)
    }
}

/// Shared tail of layer construction: threshold, cap, derive nodes.
fn assemble_layer(
    layer_name: &str,
    mut scored: Vec<LayerEdge>,
    pre_threshold_pairs: usize,
    threshold: f64,
    edge_cap: usize,
) -> Result<RelationshipLayer, GraphError> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(GraphError::InvalidThreshold(threshold));
    }
    scored.retain(|e| e.weight >= threshold);
    if scored.is_empty() {
        return Err(GraphError::EmptyLayer {
            layer_name: layer_name.to_string(),
        });
    }
    if scored.len() > edge_cap {
        // heaviest first; ties resolved by ascending pair order
        scored.sort_by(|x, y| {
            y.weight
                .partial_cmp(&x.weight)
                .expect("weights are finite")
                .then((x.a, x.b).cmp(&(y.a, y.b)))
        });
        scored.truncate(edge_cap);
    }
    scored.sort_by_key(|e| (e.a, e.b));

    let mut nodes: Vec<WordId> = scored.iter().flat_map(|e| [e.a, e.b]).collect();
    nodes.sort_unstable();
    nodes.dedup();

    Ok(RelationshipLayer {
        layer_name: layer_name.to_string(),
        nodes,
        edges: scored,
        threshold,
        edge_cap,
        pre_threshold_pairs,
    })
}

/// Builds one sensorimotor layer by scoring every unordered pair on one
/// dimension.
pub fn build_sensorimotor_layer(
    table: &SensorimotorTable,
    dimension: SensorimotorDimension,
    threshold: f64,
    edge_cap: usize,
) -> Result<RelationshipLayer, GraphError> {
    let column = table.column(dimension);
    if column.is_empty() {
        return Err(GraphError::EmptyLayer {
            layer_name: dimension.name().to_string(),
        });
    }
    let mut scored = Vec::new();
    for i in 0..column.len() {
        for j in (i + 1)..column.len() {
            let (a, sa) = column[i];
            let (b, sb) = column[j];
            let weight = sensorimotor_weight(sa, sb, table.scale_max)?;
            scored.push(LayerEdge { a, b, weight });
        }
    }
    let pairs = column.len() * (column.len() - 1) / 2;
    assemble_layer(dimension.name(), scored, pairs, threshold, edge_cap)
}

/// Builds a semantic layer from precomputed cosine triples.
pub fn build_semantic_layer(
    layer_name: &str,
    sims: &[SemanticSimilarity],
    threshold: f64,
    edge_cap: usize,
) -> Result<RelationshipLayer, GraphError> {
    let mut pairs: BTreeMap<(WordId, WordId), f64> = BTreeMap::new();
    for sim in sims {
        if sim.word_a == sim.word_b {
            continue;
        }
        let key = (sim.word_a.min(sim.word_b), sim.word_a.max(sim.word_b));
        if let Some(prev) = pairs.get(&key) {
            if (prev - sim.cosine).abs() > 1e-12 {
                return Err(GraphError::ConflictingPair {
                    a: key.0,
                    b: key.1,
                    first: *prev,
                    second: sim.cosine,
                });
            }
        }
        pairs.insert(key, sim.cosine);
    }
    if pairs.is_empty() {
        return Err(GraphError::EmptyLayer {
            layer_name: layer_name.to_string(),
        });
    }
    let pre = pairs.len();
    let scored: Vec<LayerEdge> = pairs
        .into_iter()
        .map(|((a, b), weight)| LayerEdge { a, b, weight })
        .collect();
    assemble_layer(layer_name, scored, pre, threshold, edge_cap)
}

/// Symmetrically normalized adjacency over the layer's node ordering:
/// each entry of A (self-loops included) divided by the square roots of both
/// endpoint degrees.
pub fn normalize_adjacency(layer: &RelationshipLayer) -> Result<Matrix, GraphError> {
    let n = layer.node_count();
    if n == 0 {
        return Err(GraphError::EmptyAdjacency {
            layer_name: layer.layer_name.clone(),
        });
    }
    let mut adj = Matrix::identity(n);
    for e in layer.edges() {
        let i = layer.node_index(e.a).expect("edge endpoint is a node");
        let j = layer.node_index(e.b).expect("edge endpoint is a node");
        adj.set(i, j, e.weight);
        adj.set(j, i, e.weight);
    }
    let mut degree = vec![0.0f64; n];
    for (i, deg) in degree.iter_mut().enumerate() {
        for j in 0..n {
            *deg += adj.get(i, j);
        }
        if *deg <= 0.0 {
            return Err(GraphError::ZeroDegree {
                node: layer.nodes[i],
            });
        }
    }
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let v = adj.get(i, j);
            if v != 0.0 {
                out.set(i, j, v / (degree[i].sqrt() * degree[j].sqrt()));
            }
        }
    }
    Ok(out)
}

/// Summary counts for one layer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayerStats {
    pub layer_name: String,
    pub node_count: usize,
    pub edge_count: usize,
    pub pre_threshold_pairs: usize,
    /// Ten equal bins over (0, 1]; weight 1.0 lands in the last bin.
    pub weight_histogram: [usize; 10],
}

pub fn layer_stats(layer: &RelationshipLayer) -> LayerStats {
    let mut histogram = [0usize; 10];
    for e in layer.edges() {
        let bin = ((e.weight * 10.0).floor() as usize).min(9);
        histogram[bin] += 1;
    }
    LayerStats {
        layer_name: layer.layer_name.clone(),
        node_count: layer.node_count(),
        edge_count: layer.edge_count(),
        pre_threshold_pairs: layer.pre_threshold_pairs(),
        weight_histogram: histogram,
    }
}

/// Sidecar metadata written next to each exported layer CSV.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LayerSidecar {
    pub layer_name: String,
    pub threshold: f64,
    pub edge_cap: usize,
    pub node_count: usize,
    pub pre_threshold_pairs: usize,
}

/// Writes `word_a,word_b,weight` rows (off-diagonal edges only; self-loops
/// are implied by the node set) plus a JSON sidecar at `<path>.meta.json`.
pub fn export_layer_csv(
    layer: &RelationshipLayer,
    lexicon: &Lexicon,
    path: &Path,
) -> Result<(), GraphError> {
    let mut out = String::from("word_a,word_b,weight\n");
    for e in layer.edges() {
        let wa = lexicon
            .word(e.a)
            .ok_or(LexiconError::UnknownWord(e.a.to_string()))?;
        let wb = lexicon
            .word(e.b)
            .ok_or(LexiconError::UnknownWord(e.b.to_string()))?;
        out.push_str(&format!("{},{},{}\n", wa.key(), wb.key(), e.weight));
    }
    fs::write(path, out).map_err(|e| io_err(path, e))?;
    let sidecar = LayerSidecar {
        layer_name: layer.layer_name.clone(),
        threshold: layer.threshold,
        edge_cap: layer.edge_cap,
        node_count: layer.node_count(),
        pre_threshold_pairs: layer.pre_threshold_pairs(),
    };
    let sidecar_path = sidecar_path_for(path);
    let json = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    fs::write(&sidecar_path, json).map_err(|e| io_err(&sidecar_path, e))
}

pub fn sidecar_path_for(csv_path: &Path) -> std::path::PathBuf {
    let mut name = csv_path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    name.push_str(".meta.json");
    csv_path.with_file_name(name)
}

/// Rebuilds a layer from its CSV export and sidecar. The node count recorded
/// in the sidecar must match the endpoints found in the CSV.
pub fn load_layer_csv(path: &Path, lexicon: &Lexicon) -> Result<RelationshipLayer, GraphError> {
    let sidecar_path = sidecar_path_for(path);
    let text = fs::read_to_string(&sidecar_path).map_err(|e| io_err(&sidecar_path, e))?;
    let sidecar: LayerSidecar =
        serde_json::from_str(&text).map_err(|e| parse_err(&sidecar_path, 0, e.to_string()))?;

    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let headers = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    let got: Vec<&str> = headers.iter().collect();
    if got != vec!["word_a", "word_b", "weight"] {
        return Err(parse_err(path, 1, format!("unexpected header {got:?}")));
    }
    let mut edges = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let ka = crate::lexicon::WordKey::parse(record.get(0).unwrap_or(""));
        let kb = crate::lexicon::WordKey::parse(record.get(1).unwrap_or(""));
        let a = lexicon
            .resolve(&ka)
            .map_err(|e| parse_err(path, line, e.to_string()))?;
        let b = lexicon
            .resolve(&kb)
            .map_err(|e| parse_err(path, line, e.to_string()))?;
        let field = record.get(2).unwrap_or("");
        let weight: f64 = field
            .parse()
            .map_err(|_| parse_err(path, line, format!("invalid weight `{field}`")))?;
        edges.push(LayerEdge {
            a: a.min(b),
            b: a.max(b),
            weight,
        });
    }
    let layer = assemble_layer(
        &sidecar.layer_name,
        edges,
        sidecar.pre_threshold_pairs,
        sidecar.threshold,
        sidecar.edge_cap,
    )?;
    if layer.node_count() != sidecar.node_count {
        return Err(parse_err(
            path,
            0,
            format!(
                "sidecar records {} nodes but CSV endpoints give {}",
                sidecar.node_count,
                layer.node_count()
            ),
        ));
    }
    Ok(layer)
}

fn csv_err(path: &Path, err: csv::Error) -> GraphError {
    let line = err.position().map(|p| p.line()).unwrap_or(0);
    parse_err(path, line, err.to_string())
}
