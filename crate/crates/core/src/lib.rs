//! lexigraph: multiplex lexical networks over word norms and
//! spatio-temporal graph models of early vocabulary growth.
//!
//! The pipeline: standardize raw word forms into one [`lexicon::Lexicon`],
//! build 13 weighted relationship layers over it ([`graph`]), encode and
//! repair longitudinal child observations ([`observations`]), train one
//! graph-convolutional recurrent model per layer ([`tgcn`]) next to a
//! relationship-blind feedforward control ([`baseline`]), and score the
//! predictions ([`eval`]). [`synth`] generates seeded datasets with planted
//! relational structure for end-to-end verification.

pub mod baseline;
pub mod checkpoint;
pub mod eval;
pub mod graph;
pub mod lexicon;
pub mod num;
pub mod observations;
pub mod synth;
pub mod tgcn;

pub use graph::{RelationshipLayer, SensorimotorDimension};
pub use lexicon::{Lexicon, StandardWord, WordId};
pub use num::Matrix;
pub use observations::{ComprehensionState, ObservationSequence, RepairMode, VocabularySnapshot};
