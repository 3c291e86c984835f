//! Streaming classification with incremental dynamic ensemble selection.
//!
//! An [`Engine`] keeps a pool of incrementally trained classifiers and a
//! validation window indexed by an [`OnlineKdTree`]. Each query's nearest
//! validation instances either answer directly (the overlap filter) or pick
//! the competent classifiers by KNORA-Eliminate. A drift detector watches the
//! prediction errors and trims the window when the concept changes.

pub mod cli;
pub mod config;
pub mod detectors;
pub mod distance;
pub mod engine;
pub mod error;
pub mod eval;
pub mod kdtree;
pub mod learners;
pub mod streams;
pub mod types;

pub use config::{EngineConfig, SearchBackend};
pub use detectors::{DetectorKind, DetectorSignal, DriftDetector, DriftLevel};
pub use distance::DistanceKind;
pub use engine::{Engine, EngineCounters, Prediction, Route};
pub use error::{Error, Result};
pub use kdtree::OnlineKdTree;
pub use learners::{IncrementalClassifier, LearnerKind};
pub use types::{ClassLabel, FeatureVector, LabeledInstance, RegionOfCompetence, Schema};
pub use eval::{Mode, ProtocolSpec, RunResult, StreamLearner};
pub use streams::{DriftSchedule, GeneratorKind, StreamSpec};
