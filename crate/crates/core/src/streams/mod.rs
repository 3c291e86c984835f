//! Labeled-instance sources: synthetic generators with drift schedules, the
//! virtual-drift inducer and CSV/ARFF readers.

mod generators;
mod io;
mod virtual_drift;

use std::path::PathBuf;

pub use generators::{
    Agrawal, Generator, GeneratorKind, GeneratorStream, Hyperplane, Led, RandomRbf, Sea, Sine,
    Stagger,
};
pub use io::{read_arff, read_csv, write_csv, Dataset};
pub use virtual_drift::induce_virtual_drift;

use crate::error::{Error, Result};
use crate::types::{LabeledInstance, Schema};

/// When and how the generating concept changes.
#[derive(Clone, Debug, PartialEq)]
pub enum DriftSchedule {
    Stationary,
    /// `(position, concept)` pairs: from `position` on, `concept` generates.
    Abrupt(Vec<(u64, usize)>),
    /// Concepts cycle round-robin, switching every `period` instances.
    Recurrent { period: u64 },
    /// Moves from the current concept to the next one across `[start, end)`.
    /// Generators with continuous drift (hyperplane, RBF) drift only inside
    /// the window.
    Gradual { start: u64, end: u64 },
    /// Continuous drift at `rate` for the whole stream.
    Incremental { rate: f64 },
}

impl DriftSchedule {
    pub fn validate(&self, total: u64, num_concepts: usize) -> Result<()> {
        match self {
            DriftSchedule::Stationary => Ok(()),
            DriftSchedule::Abrupt(points) => {
                let mut prev: Option<u64> = None;
                for &(pos, concept) in points {
                    if prev.is_some_and(|p| pos <= p) {
                        return Err(Error::config("drift positions must be strictly increasing"));
                    }
                    if pos >= total {
                        return Err(Error::config(format!(
                            "drift position {pos} is not below the stream length {total}"
                        )));
                    }
                    if concept >= num_concepts {
                        return Err(Error::config(format!(
                            "concept {concept} does not exist; the generator has {num_concepts}"
                        )));
                    }
                    prev = Some(pos);
                }
                Ok(())
            }
            DriftSchedule::Recurrent { period } => {
                if *period == 0 {
                    Err(Error::config("recurrent drift period must be positive"))
                } else {
                    Ok(())
                }
            }
            DriftSchedule::Gradual { start, end } => {
                if start >= end {
                    Err(Error::config("gradual drift window must have start < end"))
                } else if *start >= total {
                    Err(Error::config(format!(
                        "gradual drift start {start} is not below the stream length {total}"
                    )))
                } else {
                    Ok(())
                }
            }
            DriftSchedule::Incremental { rate } => {
                if rate.is_finite() && *rate >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::config("incremental drift rate must be finite and non-negative"))
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SourceKind {
    Generator(GeneratorKind),
    File {
        path: PathBuf,
        /// CSV only; defaults to the last column.
        label_column: Option<usize>,
        /// CSV only.
        has_header: bool,
    },
    VirtualDrift { inner: Box<StreamSpec>, chunk: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct StreamSpec {
    pub source: SourceKind,
    /// Instances to generate; for files, an optional cap (`u64::MAX` = all).
    pub total_instances: u64,
    pub schedule: DriftSchedule,
    /// Overrides the generator's default noise level.
    pub noise: Option<f64>,
    pub seed: u64,
}

impl StreamSpec {
    pub fn generator(kind: GeneratorKind, total_instances: u64, seed: u64) -> Self {
        StreamSpec {
            source: SourceKind::Generator(kind),
            total_instances,
            schedule: kind.default_schedule(total_instances),
            noise: None,
            seed,
        }
    }

    pub fn file(path: impl Into<PathBuf>) -> Self {
        StreamSpec {
            source: SourceKind::File {
                path: path.into(),
                label_column: None,
                has_header: true,
            },
            total_instances: u64::MAX,
            schedule: DriftSchedule::Stationary,
            noise: None,
            seed: 0,
        }
    }

    pub fn with_schedule(mut self, schedule: DriftSchedule) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = Some(noise);
        self
    }
}

pub type InstanceIter = Box<dyn Iterator<Item = LabeledInstance> + Send>;

/// An opened stream: its schema and a single-consumer instance iterator.
pub struct Stream {
    pub schema: Schema,
    pub instances: InstanceIter,
}

impl std::fmt::Debug for Stream {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Stream").field("schema", &self.schema).finish_non_exhaustive()
    }
}

pub fn open(spec: &StreamSpec) -> Result<Stream> {
    match &spec.source {
        SourceKind::Generator(kind) => {
            let g = GeneratorStream::new(*kind, spec)?;
            Ok(Stream {
                schema: g.schema().clone(),
                instances: Box::new(g),
            })
        }
        SourceKind::File { .. } | SourceKind::VirtualDrift { .. } => {
            let ds = load(spec)?;
            let cap = usize::try_from(spec.total_instances).unwrap_or(usize::MAX);
            Ok(Stream {
                schema: ds.schema,
                instances: Box::new(ds.instances.into_iter().take(cap)),
            })
        }
    }
}

/// Materializes a finite stream.
pub fn load(spec: &StreamSpec) -> Result<Dataset> {
    match &spec.source {
        SourceKind::Generator(_) => {
            if spec.total_instances == u64::MAX {
                return Err(Error::config("generated streams need a finite length"));
            }
            let s = open(spec)?;
            Ok(Dataset {
                schema: s.schema,
                instances: s.instances.collect(),
            })
        }
        SourceKind::File {
            path,
            label_column,
            has_header,
        } => {
            let is_arff = path
                .extension()
                .is_some_and(|e| e.eq_ignore_ascii_case("arff"));
            if is_arff {
                read_arff(path)
            } else {
                read_csv(path, *label_column, *has_header)
            }
        }
        SourceKind::VirtualDrift { inner, chunk } => {
            let ds = load(inner)?;
            Ok(Dataset {
                schema: ds.schema,
                instances: induce_virtual_drift(ds.instances, *chunk, spec.seed)?,
            })
        }
    }
}

/// One arrival in an evaluation protocol.
#[derive(Clone, Debug, PartialEq)]
pub struct StreamEvent {
    pub instance: LabeledInstance,
    pub label_available: bool,
    /// Arrival index after which the label may be used for training.
    pub label_release_seq: u64,
}
