//! Incremental base classifiers.

mod gaussian;
mod hoeffding;
mod naive_bayes;

pub use gaussian::GaussianEstimator;
pub use hoeffding::{hoeffding_bound, HoeffdingTree, HoeffdingTreeParams};
pub use naive_bayes::NaiveBayes;

use serde::{Deserialize, Serialize};

use crate::types::{ClassLabel, LabeledInstance};

/// A classifier that learns one instance at a time.
///
/// `predict` must be total: an untrained model answers class 0.
pub trait IncrementalClassifier: Send {
    fn train(&mut self, instance: &LabeledInstance);
    fn predict(&self, features: &[f64]) -> ClassLabel;
    fn trained_count(&self) -> u64;
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LearnerKind {
    #[default]
    HoeffdingTree,
    NaiveBayes,
}

impl LearnerKind {
    pub fn build(self, dim: usize, num_classes: usize) -> Box<dyn IncrementalClassifier> {
        match self {
            LearnerKind::HoeffdingTree => Box::new(HoeffdingTree::new(
                dim,
                num_classes,
                HoeffdingTreeParams::default(),
            )),
            LearnerKind::NaiveBayes => Box::new(NaiveBayes::new(dim, num_classes)),
        }
    }
}

fn argmax(counts: &[f64]) -> ClassLabel {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    ClassLabel(best as u32)
}
