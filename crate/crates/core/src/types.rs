//! Domain values shared by every stage of the pipeline.

use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A fixed-length vector of finite feature values.
///
/// Backed by an `Arc<[f64]>` so the same instance can sit in the validation
/// window, the neighbor index and a region of competence without copying.
#[derive(Clone, PartialEq)]
pub struct FeatureVector(Arc<[f64]>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(FeatureVector(values.into()))
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        Self::new(values.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl Deref for FeatureVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl fmt::Debug for FeatureVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

/// Dense class id, an index into the stream's label table.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassLabel(pub u32);

impl ClassLabel {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledInstance {
    pub features: FeatureVector,
    pub label: ClassLabel,
    /// Arrival index within the stream.
    pub seq: u64,
}

impl LabeledInstance {
    pub fn new(features: FeatureVector, label: ClassLabel, seq: u64) -> Self {
        LabeledInstance {
            features,
            label,
            seq,
        }
    }
}

/// Feature and label names of a stream, after categorical expansion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schema {
    pub name: String,
    /// Number of attributes before one-hot expansion.
    pub attribute_count: usize,
    pub feature_names: Vec<String>,
    pub label_names: Vec<String>,
}

impl Schema {
    pub fn numeric(name: impl Into<String>, features: &[&str], labels: &[&str]) -> Self {
        Schema {
            name: name.into(),
            attribute_count: features.len(),
            feature_names: features.iter().map(|s| s.to_string()).collect(),
            label_names: labels.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.feature_names.len()
    }

    pub fn num_classes(&self) -> usize {
        self.label_names.len()
    }

    pub fn label_name(&self, label: ClassLabel) -> Option<&str> {
        self.label_names.get(label.index()).map(String::as_str)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Neighbor {
    pub instance: LabeledInstance,
    pub distance: f64,
}

/// The k nearest validation instances of a query, nearest first.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RegionOfCompetence {
    neighbors: Vec<Neighbor>,
}

impl RegionOfCompetence {
    /// Sorts by distance; equal distances keep their input order.
    pub fn from_unsorted(mut neighbors: Vec<Neighbor>) -> Self {
        neighbors.sort_by(|a, b| a.distance.total_cmp(&b.distance));
        RegionOfCompetence { neighbors }
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn neighbors(&self) -> &[Neighbor] {
        &self.neighbors
    }

    pub fn distances(&self) -> impl Iterator<Item = f64> + '_ {
        self.neighbors.iter().map(|n| n.distance)
    }

    pub fn labels(&self) -> impl Iterator<Item = ClassLabel> + '_ {
        self.neighbors.iter().map(|n| n.instance.label)
    }

    pub fn into_neighbors(self) -> Vec<Neighbor> {
        self.neighbors
    }
}
