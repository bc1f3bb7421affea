//! The standardized, disambiguated vocabulary shared by every relationship
//! layer and every observation dataset.
//!
//! Raw word forms from independent datasets disagree on synonyms, regional
//! variants and spelling. An [`AliasMap`] folds those onto canonical surfaces,
//! and a [`HomographMap`] forces ambiguous surfaces to carry a context label
//! (e.g. `drink(beverage)` vs `drink(verb)`), so that every word in the system
//! resolves to exactly one [`WordId`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense index into a built [`Lexicon`]. Contiguous from 0 and stable for the
/// lifetime of the lexicon.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
pub struct WordId(pub usize);

impl fmt::Display for WordId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Canonical vocabulary entry: a lowercase surface plus an optional context
/// label disambiguating homographs (empty for unambiguous words).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StandardWord {
    pub id: WordId,
    pub surface: String,
    pub context_label: String,
}

impl StandardWord {
    /// Printable key: `surface` or `surface(label)`.
    pub fn key(&self) -> String {
        WordKey {
            surface: self.surface.clone(),
            context_label: self.context_label.clone(),
        }
        .to_string()
    }
}

/// A (surface, context label) pair before id assignment.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct WordKey {
    pub surface: String,
    pub context_label: String,
}

impl WordKey {
    pub fn new(surface: impl Into<String>, context_label: impl Into<String>) -> Self {
        WordKey {
            surface: surface.into(),
            context_label: context_label.into(),
        }
    }

    /// Splits an embedded `surface(label)` form; a bare surface yields an
    /// empty label.
    pub fn parse(text: &str) -> Self {
        let trimmed = text.trim();
        if let Some(open) = trimmed.find('(') {
            if let Some(stripped) = trimmed.strip_suffix(')') {
                let surface = stripped[..open].trim().to_string();
                let label = stripped[open + 1..].trim().to_string();
                return WordKey::new(surface, label);
            }
        }
        WordKey::new(trimmed, "")
    }
}

impl fmt::Display for WordKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.context_label.is_empty() {
            write!(f, "{}", self.surface)
        } else {
            write!(f, "{}({})", self.surface, self.context_label)
        }
    }
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("empty word after trimming")]
    EmptyWord,
    #[error("ambiguous word `{surface}`: supply one of the context labels {candidates:?}")]
    AmbiguousWord {
        surface: String,
        candidates: Vec<String>,
    },
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
    #[error("word `{0}` does not resolve in the lexicon")]
    UnknownWord(String),
}

fn io_err(path: &Path, source: std::io::Error) -> LexiconError {
    LexiconError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> LexiconError {
    LexiconError::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

/// Maps raw word forms (with a source-dialect tag) onto canonical surfaces.
#[derive(Debug, Clone, Default)]
pub struct AliasMap {
    entries: BTreeMap<String, AliasEntry>,
}

#[derive(Debug, Clone)]
struct AliasEntry {
    dialect: String,
    canonical: String,
}

impl AliasMap {
    pub fn empty() -> Self {
        AliasMap::default()
    }

    /// The alias map shipped with the crate (British canonical forms).
    pub fn starter() -> Self {
        AliasMap::parse_tsv(
            include_str!("../data/aliases.tsv"),
            Path::new("<builtin aliases>"),
        )
        .expect("builtin alias map must parse")
    }

    pub fn from_tsv_path(path: &Path) -> Result<Self, LexiconError> {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        AliasMap::parse_tsv(&text, path)
    }

    fn parse_tsv(text: &str, path: &Path) -> Result<Self, LexiconError> {
        let mut entries = BTreeMap::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx as u64 + 1;
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(parse_err(
                    path,
                    line_no,
                    format!("expected 3 tab-separated fields, got {}", fields.len()),
                ));
            }
            let raw = fields[0].trim().to_lowercase();
            let dialect = fields[1].trim().to_string();
            let canonical = fields[2].trim().to_lowercase();
            if raw.is_empty() || canonical.is_empty() {
                return Err(parse_err(
                    path,
                    line_no,
                    "raw and canonical must be non-empty",
                ));
            }
            if let Some(existing) = entries.get(&raw) {
                let existing: &AliasEntry = existing;
                if existing.canonical != canonical {
                    return Err(parse_err(
                        path,
                        line_no,
                        format!(
                            "conflicting alias for `{raw}`: `{}` vs `{canonical}`",
                            existing.canonical
                        ),
                    ));
                }
            }
            entries.insert(raw, AliasEntry { dialect, canonical });
        }
        Ok(AliasMap { entries })
    }

    pub fn canonical_for(&self, raw: &str) -> Option<&str> {
        self.entries.get(raw).map(|e| e.canonical.as_str())
    }

    pub fn dialect_of(&self, raw: &str) -> Option<&str> {
        self.entries.get(raw).map(|e| e.dialect.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Surfaces with multiple child-relevant meanings, each with its set of
/// permissible context labels.
#[derive(Debug, Clone, Default)]
pub struct HomographMap {
    entries: BTreeMap<String, Vec<String>>,
}

impl HomographMap {
    pub fn empty() -> Self {
        HomographMap::default()
    }

    /// The starter homograph map shipped with the crate.
    pub fn starter() -> Self {
        HomographMap::parse_tsv(
            include_str!("../data/homographs.tsv"),
            Path::new("<builtin homographs>"),
        )
        .expect("builtin homograph map must parse")
    }

    pub fn from_tsv_path(path: &Path) -> Result<Self, LexiconError> {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        HomographMap::parse_tsv(&text, path)
    }

    fn parse_tsv(text: &str, path: &Path) -> Result<Self, LexiconError> {
        let mut entries = BTreeMap::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx as u64 + 1;
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 2 {
                return Err(parse_err(
                    path,
                    line_no,
                    format!("expected 2 tab-separated fields, got {}", fields.len()),
                ));
            }
            let surface = fields[0].trim().to_lowercase();
            let labels: Vec<String> = fields[1]
                .split(',')
                .map(|l| l.trim().to_string())
                .filter(|l| !l.is_empty())
                .collect();
            if surface.is_empty() || labels.is_empty() {
                return Err(parse_err(
                    path,
                    line_no,
                    "surface and labels must be non-empty",
                ));
            }
            entries.insert(surface, labels);
        }
        Ok(HomographMap { entries })
    }

    pub fn labels_for(&self, surface: &str) -> Option<&[String]> {
        self.entries.get(surface).map(|v| v.as_slice())
    }

    pub fn is_homograph(&self, surface: &str) -> bool {
        self.entries.contains_key(surface)
    }
}

/// Result of normalizing one raw form. `mapped` is false when no alias entry
/// existed and the lowercased input passed through unchanged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalized {
    pub canonical: String,
    pub mapped: bool,
}

/// Lowercases and trims a raw form, then applies the alias map. Unmapped
/// forms are retained (never dropped) and flagged for the coverage report.
pub fn normalize_word(raw: &str, aliases: &AliasMap) -> Result<Normalized, LexiconError> {
    let trimmed = raw.trim().to_lowercase();
    if trimmed.is_empty() {
        return Err(LexiconError::EmptyWord);
    }
    match aliases.canonical_for(&trimmed) {
        Some(canonical) => Ok(Normalized {
            canonical: canonical.to_string(),
            mapped: true,
        }),
        None => Ok(Normalized {
            canonical: trimmed,
            mapped: false,
        }),
    }
}

/// Resolves a canonical surface plus context label into a lexicon key.
/// Homographs must carry a non-empty label; the error names the candidates.
pub fn disambiguate(
    surface: &str,
    context_label: &str,
    homographs: &HomographMap,
) -> Result<WordKey, LexiconError> {
    let label = context_label.trim();
    if label.is_empty() {
        if let Some(candidates) = homographs.labels_for(surface) {
            return Err(LexiconError::AmbiguousWord {
                surface: surface.to_string(),
                candidates: candidates.to_vec(),
            });
        }
    }
    Ok(WordKey::new(surface, label))
}

/// Immutable, id-indexed vocabulary. Ids are assigned by lexicographic order
/// of (surface, context_label) so repeated builds over the same inputs agree.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    words: Vec<StandardWord>,
    index: BTreeMap<WordKey, WordId>,
}

impl Lexicon {
    pub fn from_keys(keys: impl IntoIterator<Item = WordKey>) -> Self {
        let unique: BTreeSet<WordKey> = keys.into_iter().collect();
        let mut words = Vec::with_capacity(unique.len());
        let mut index = BTreeMap::new();
        for (i, key) in unique.into_iter().enumerate() {
            let id = WordId(i);
            index.insert(key.clone(), id);
            words.push(StandardWord {
                id,
                surface: key.surface,
                context_label: key.context_label,
            });
        }
        Lexicon { words, index }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[StandardWord] {
        &self.words
    }

    pub fn word(&self, id: WordId) -> Option<&StandardWord> {
        self.words.get(id.0)
    }

    pub fn id_of(&self, surface: &str, context_label: &str) -> Option<WordId> {
        self.index
            .get(&WordKey::new(surface, context_label))
            .copied()
    }

    pub fn id_of_key(&self, key: &WordKey) -> Option<WordId> {
        self.index.get(key).copied()
    }

    pub fn resolve(&self, key: &WordKey) -> Result<WordId, LexiconError> {
        self.id_of_key(key)
            .ok_or_else(|| LexiconError::UnknownWord(key.to_string()))
    }

    /// CSV export: `id,surface,context_label` with a header row.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("id,surface,context_label\n");
        for w in &self.words {
            out.push_str(&format!("{},{},{}\n", w.id, w.surface, w.context_label));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), LexiconError> {
        fs::write(path, self.to_csv_string()).map_err(|e| io_err(path, e))
    }

    pub fn from_csv_path(path: &Path) -> Result<Self, LexiconError> {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        let mut keys = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            if idx == 0 {
                if line.trim() != "id,surface,context_label" {
                    return Err(parse_err(path, 1, "unexpected lexicon header"));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.splitn(3, ',').collect();
            if fields.len() != 3 {
                return Err(parse_err(path, idx as u64 + 1, "expected 3 columns"));
            }
            keys.push(WordKey::new(fields[1].trim(), fields[2].trim()));
        }
        let lexicon = Lexicon::from_keys(keys);
        // ids in the file must agree with the sorted assignment
        for (idx, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.splitn(3, ',').collect();
            let stated: usize = fields[0]
                .trim()
                .parse()
                .map_err(|_| parse_err(path, idx as u64 + 1, "invalid id"))?;
            let key = WordKey::new(fields[1].trim(), fields[2].trim());
            let assigned = lexicon.id_of_key(&key).expect("key was just inserted");
            if assigned.0 != stated {
                return Err(parse_err(
                    path,
                    idx as u64 + 1,
                    format!("id {stated} does not match sorted order ({})", assigned.0),
                ));
            }
        }
        Ok(lexicon)
    }
}

/// Per-source ingest counts plus the raw forms no alias entry covered.
#[derive(Debug, Clone, Default, Serialize)]
pub struct CoverageReport {
    pub sources: Vec<SourceCoverage>,
    pub unmapped_forms: BTreeSet<String>,
    pub total_entries: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SourceCoverage {
    pub source: String,
    pub words: usize,
}

/// Builds the shared lexicon as the union of every normalized, disambiguated
/// word across the given norm and observation files.
///
/// Norm files are CSV and sniffed by header: `word,...` (sensorimotor scores)
/// or `word_a,word_b,...` (semantic similarity pairs). Observation files are
/// CSV with header `child_id,age_months,word,context_label,state`.
pub fn build_lexicon(
    norm_files: &[impl AsRef<Path>],
    observation_files: &[impl AsRef<Path>],
    aliases: &AliasMap,
    homographs: &HomographMap,
) -> Result<(Lexicon, CoverageReport), LexiconError> {
    let mut report = CoverageReport::default();
    let mut keys: BTreeSet<WordKey> = BTreeSet::new();

    if norm_files.is_empty() && observation_files.is_empty() {
        log::warn!("building lexicon from no input files; result is empty");
    }

    for path in norm_files {
        let path = path.as_ref();
        let words = extract_norm_vocab(path)?;
        ingest_source(path, words, aliases, homographs, &mut keys, &mut report)?;
    }
    for path in observation_files {
        let path = path.as_ref();
        let words = extract_observation_vocab(path)?;
        ingest_source(path, words, aliases, homographs, &mut keys, &mut report)?;
    }

    let lexicon = Lexicon::from_keys(keys);
    report.total_entries = lexicon.len();
    if !report.unmapped_forms.is_empty() {
        log::warn!(
            "{} raw forms had no alias entry and were retained as-is: {:?}",
            report.unmapped_forms.len(),
            report.unmapped_forms
        );
    }
    Ok((lexicon, report))
}

fn ingest_source(
    path: &Path,
    raw_words: Vec<(u64, String, String)>,
    aliases: &AliasMap,
    homographs: &HomographMap,
    keys: &mut BTreeSet<WordKey>,
    report: &mut CoverageReport,
) -> Result<(), LexiconError> {
    let mut count = 0usize;
    for (line, raw, label) in raw_words {
        let embedded = WordKey::parse(&raw);
        let normalized = normalize_word(&embedded.surface, aliases)
            .map_err(|e| parse_err(path, line, e.to_string()))?;
        if !normalized.mapped {
            report.unmapped_forms.insert(normalized.canonical.clone());
        }
        let key = standardize(&raw, &label, aliases, homographs)
            .map_err(|e| parse_err(path, line, e.to_string()))?;
        keys.insert(key);
        count += 1;
    }
    report.sources.push(SourceCoverage {
        source: path.display().to_string(),
        words: count,
    });
    Ok(())
}

/// Full standardization of one raw form: split any embedded `(label)`,
/// normalize the surface, then disambiguate. An explicit label (from a
/// dedicated column) takes precedence over an embedded one.
pub fn standardize(
    raw: &str,
    explicit_label: &str,
    aliases: &AliasMap,
    homographs: &HomographMap,
) -> Result<WordKey, LexiconError> {
    let embedded = WordKey::parse(raw);
    let normalized = normalize_word(&embedded.surface, aliases)?;
    let label = if explicit_label.trim().is_empty() {
        embedded.context_label.clone()
    } else {
        explicit_label.trim().to_lowercase()
    };
    disambiguate(&normalized.canonical, &label, homographs)
}

/// (line number, word field, explicit label) triples from a norm CSV.
fn extract_norm_vocab(path: &Path) -> Result<Vec<(u64, String, String)>, LexiconError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let headers = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    let first = headers.get(0).unwrap_or("").to_lowercase();
    let semantic = first == "word_a";
    if !semantic && first != "word" {
        return Err(parse_err(
            path,
            1,
            format!("unrecognized norm header starting with `{first}`"),
        ));
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if semantic {
            for col in 0..2 {
                let word = record.get(col).unwrap_or("").to_string();
                out.push((line, word, String::new()));
            }
        } else {
            let word = record.get(0).unwrap_or("").to_string();
            out.push((line, word, String::new()));
        }
    }
    Ok(out)
}

fn extract_observation_vocab(path: &Path) -> Result<Vec<(u64, String, String)>, LexiconError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let headers = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    if headers.get(0).unwrap_or("").to_lowercase() != "child_id" {
        return Err(parse_err(
            path,
            1,
            "expected observations header starting with child_id",
        ));
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let word = record.get(2).unwrap_or("").to_string();
        let label = record.get(3).unwrap_or("").to_string();
        out.push((line, word, label));
    }
    Ok(out)
}

pub(crate) fn csv_err(path: &Path, err: csv::Error) -> LexiconError {
    let line = match err.position() {
        Some(pos) => pos.line(),
        None => 0,
    };
    LexiconError::Parse {
        path: path.display().to_string(),
        line,
        message: err.to_string(),
    }
}
