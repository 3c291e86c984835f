use super::{argmax, GaussianEstimator, IncrementalClassifier};
use crate::types::{ClassLabel, LabeledInstance};

const MIN_VARIANCE: f64 = 1e-9;

/// Gaussian Naive Bayes with incremental per-class moments.
#[derive(Clone, Debug)]
pub struct NaiveBayes {
    class_counts: Vec<f64>,
    /// `estimators[class][attribute]`
    estimators: Vec<Vec<GaussianEstimator>>,
    trained: u64,
}

impl NaiveBayes {
    pub fn new(dim: usize, num_classes: usize) -> Self {
        let num_classes = num_classes.max(1);
        NaiveBayes {
            class_counts: vec![0.0; num_classes],
            estimators: vec![vec![GaussianEstimator::default(); dim]; num_classes],
            trained: 0,
        }
    }

    fn log_posterior(&self, class: usize, features: &[f64]) -> f64 {
        let total: f64 = self.class_counts.iter().sum();
        let mut lp = (self.class_counts[class] / total).ln();
        for (est, &x) in self.estimators[class].iter().zip(features) {
            let var = est.variance().max(MIN_VARIANCE);
            let d = x - est.mean();
            lp += -0.5 * (2.0 * std::f64::consts::PI * var).ln() - d * d / (2.0 * var);
        }
        lp
    }
}

impl IncrementalClassifier for NaiveBayes {
    fn train(&mut self, instance: &LabeledInstance) {
        self.trained += 1;
        let c = instance.label.index();
        if c >= self.class_counts.len() {
            return;
        }
        self.class_counts[c] += 1.0;
        for (est, &x) in self.estimators[c].iter_mut().zip(instance.features.iter()) {
            est.add(x);
        }
    }

    fn predict(&self, features: &[f64]) -> ClassLabel {
        if self.trained == 0 {
            return ClassLabel(0);
        }
        let scores: Vec<f64> = (0..self.class_counts.len())
            .map(|c| {
                if self.class_counts[c] == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    self.log_posterior(c, features)
                }
            })
            .collect();
        argmax(&scores)
    }

    fn trained_count(&self) -> u64 {
        self.trained
    }
}
