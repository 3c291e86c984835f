use serde::{Deserialize, Serialize};

use crate::detectors::DetectorKind;
use crate::distance::DistanceKind;
use crate::error::{Error, Result};
use crate::learners::LearnerKind;

/// How the region of competence is retrieved from the validation window.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchBackend {
    BruteForce,
    #[default]
    KdTree,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Validation window capacity; `None` keeps every instance until a drift.
    pub max_window: Option<usize>,
    /// Pool capacity; the oldest classifier is evicted beyond it.
    pub pool_size: usize,
    /// Training instances one classifier receives before a new one starts.
    pub max_training: u64,
    /// Region-of-competence size.
    pub k: usize,
    /// Majority rate at which the neighborhood label is returned directly.
    pub omega: f64,
    pub overlap_filter: bool,
    /// Inactive-node fraction that triggers a k-d tree rebuild.
    pub beta: f64,
    pub detector: DetectorKind,
    pub distance: DistanceKind,
    pub backend: SearchBackend,
    pub learner: LearnerKind,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            max_window: None,
            pool_size: 75,
            max_training: 200,
            k: 5,
            omega: 0.8,
            overlap_filter: true,
            beta: 0.3,
            detector: DetectorKind::Rddm,
            distance: DistanceKind::Canberra,
            backend: SearchBackend::KdTree,
            learner: LearnerKind::HoeffdingTree,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pool_size < 1 {
            return Err(Error::config("pool size D must be at least 1"));
        }
        if self.max_training < 1 {
            return Err(Error::config("per-classifier training cap F must be at least 1"));
        }
        if self.k < 1 {
            return Err(Error::config("neighborhood size k must be at least 1"));
        }
        if !(self.omega > 0.0 && self.omega <= 1.0) {
            return Err(Error::config(format!("omega must be in (0, 1], got {}", self.omega)));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::config(format!("beta must be in [0, 1], got {}", self.beta)));
        }
        if self.max_window == Some(0) {
            return Err(Error::config("window size W must be at least 1"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = EngineConfig::default();
        c.validate().unwrap();
        assert_eq!((c.pool_size, c.max_training, c.k), (75, 200, 5));
        assert_eq!((c.omega, c.beta), (0.8, 0.3));
        assert_eq!(c.max_window, None);
    }

    #[test]
    fn rejects_out_of_range() {
        let bad = [
            EngineConfig { pool_size: 0, ..Default::default() },
            EngineConfig { max_training: 0, ..Default::default() },
            EngineConfig { k: 0, ..Default::default() },
            EngineConfig { omega: 0.0, ..Default::default() },
            EngineConfig { omega: 1.5, ..Default::default() },
            EngineConfig { beta: -0.1, ..Default::default() },
            EngineConfig { max_window: Some(0), ..Default::default() },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }
}
