//! Error-rate drift detectors: DDM and RDDM.
//!
//! Both track the running error probability `p` and its standard deviation
//! `s = sqrt(p(1-p)/n)`, remember the pair where `p + s` was smallest, and
//! compare the current `p + s` against `p_min + level * s_min`.
//!
//! RDDM adds two mechanisms on top of DDM: a warning that lasts `warn_limit`
//! updates is promoted to a drift, and the statistics after a drift (or after
//! an overly long stable concept) are recomputed from a bounded history of
//! stored outcomes instead of starting from nothing.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DriftLevel {
    Stable,
    Warning,
    Drift,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DetectorSignal {
    pub level: DriftLevel,
    /// First arrival index of the current warning phase, present for
    /// `Warning` and for a `Drift` that was preceded by a warning.
    pub warning_start: Option<u64>,
}

impl DetectorSignal {
    pub const STABLE: DetectorSignal = DetectorSignal {
        level: DriftLevel::Stable,
        warning_start: None,
    };

    pub fn is_drift(&self) -> bool {
        self.level == DriftLevel::Drift
    }
}

/// Common interface of the error-rate triggers.
pub trait DriftDetector: Send {
    /// Feed one prediction outcome of the instance with arrival index `seq`.
    fn update(&mut self, correct: bool, seq: u64) -> DetectorSignal;
    fn reset(&mut self);
    fn name(&self) -> &'static str;
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorKind {
    Ddm,
    #[default]
    Rddm,
    /// Never signals; leaves the window untouched.
    Disabled,
}

impl DetectorKind {
    pub fn build(self) -> Box<dyn DriftDetector> {
        match self {
            DetectorKind::Ddm => Box::new(Ddm::default()),
            DetectorKind::Rddm => Box::new(Rddm::default()),
            DetectorKind::Disabled => Box::new(NoDetector),
        }
    }
}

/// Running error-rate statistics shared by both detectors.
#[derive(Clone, Debug)]
struct ErrorStats {
    n: u64,
    p: f64,
    s: f64,
    p_min: f64,
    s_min: f64,
}

impl Default for ErrorStats {
    fn default() -> Self {
        ErrorStats {
            n: 0,
            p: 0.0,
            s: 0.0,
            p_min: f64::INFINITY,
            s_min: f64::INFINITY,
        }
    }
}

impl ErrorStats {
    fn push(&mut self, error: bool) {
        self.n += 1;
        let x = if error { 1.0 } else { 0.0 };
        self.p += (x - self.p) / self.n as f64;
        self.s = (self.p * (1.0 - self.p) / self.n as f64).sqrt();
    }

    fn record_min(&mut self) {
        if self.p + self.s < self.p_min + self.s_min {
            self.p_min = self.p;
            self.s_min = self.s;
        }
    }

    fn exceeds(&self, level: f64) -> bool {
        self.p + self.s > self.p_min + level * self.s_min
    }
}

#[derive(Clone, Debug)]
pub struct DdmParams {
    pub min_instances: u64,
    pub warning_level: f64,
    pub drift_level: f64,
}

impl Default for DdmParams {
    fn default() -> Self {
        DdmParams {
            min_instances: 30,
            warning_level: 2.0,
            drift_level: 3.0,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Ddm {
    params: DdmParams,
    stats: ErrorStats,
    warning_start: Option<u64>,
}

impl Ddm {
    pub fn new(params: DdmParams) -> Self {
        Ddm {
            params,
            ..Default::default()
        }
    }
}

impl DriftDetector for Ddm {
    fn update(&mut self, correct: bool, seq: u64) -> DetectorSignal {
        self.stats.push(!correct);
        if self.stats.n < self.params.min_instances {
            return DetectorSignal::STABLE;
        }
        self.stats.record_min();
        if self.stats.exceeds(self.params.drift_level) {
            let signal = DetectorSignal {
                level: DriftLevel::Drift,
                warning_start: self.warning_start,
            };
            self.reset();
            signal
        } else if self.stats.exceeds(self.params.warning_level) {
            let start = *self.warning_start.get_or_insert(seq);
            DetectorSignal {
                level: DriftLevel::Warning,
                warning_start: Some(start),
            }
        } else {
            self.warning_start = None;
            DetectorSignal::STABLE
        }
    }

    fn reset(&mut self) {
        self.stats = ErrorStats::default();
        self.warning_start = None;
    }

    fn name(&self) -> &'static str {
        "DDM"
    }
}

#[derive(Clone, Debug)]
pub struct RddmParams {
    pub min_instances: u64,
    pub warning_level: f64,
    pub drift_level: f64,
    /// Stored-outcome history cap; also the longest concept before the
    /// statistics are recomputed.
    pub max_concept_size: usize,
    /// Outcomes kept when an overly long concept is recomputed.
    pub min_stable_concept_size: usize,
    pub warn_limit: u64,
}

impl Default for RddmParams {
    fn default() -> Self {
        RddmParams {
            min_instances: 129,
            warning_level: 1.773,
            drift_level: 2.258,
            max_concept_size: 40_000,
            min_stable_concept_size: 7_000,
            warn_limit: 1_400,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Rddm {
    params: RddmParams,
    stats: ErrorStats,
    /// Outcomes of the current concept (true = error), oldest first.
    history: VecDeque<bool>,
    /// Number of trailing history entries to replay on the next update.
    pending_replay: Option<usize>,
    warnings: u64,
    /// History length when the current warning phase started.
    warning_history_mark: Option<usize>,
    warning_start: Option<u64>,
}

impl Default for Rddm {
    fn default() -> Self {
        Rddm::new(RddmParams::default())
    }
}

impl Rddm {
    pub fn new(params: RddmParams) -> Self {
        Rddm {
            history: VecDeque::with_capacity(params.max_concept_size.min(1 << 16)),
            params,
            stats: ErrorStats::default(),
            pending_replay: None,
            warnings: 0,
            warning_history_mark: None,
            warning_start: None,
        }
    }

    /// Restarts the statistics from the last `keep` stored outcomes.
    fn replay(&mut self, keep: usize) {
        let drop = self.history.len().saturating_sub(keep);
        self.history.drain(..drop);
        self.stats = ErrorStats::default();
        for &err in &self.history {
            self.stats.push(err);
            if self.stats.n >= self.params.min_instances {
                self.stats.record_min();
            }
        }
    }

    fn clear_warning(&mut self) {
        self.warnings = 0;
        self.warning_history_mark = None;
        self.warning_start = None;
    }
}

impl DriftDetector for Rddm {
    fn update(&mut self, correct: bool, seq: u64) -> DetectorSignal {
        if let Some(keep) = self.pending_replay.take() {
            self.replay(keep);
        }
        let error = !correct;
        self.history.push_back(error);
        if self.history.len() > self.params.max_concept_size {
            self.history.pop_front();
            if let Some(mark) = self.warning_history_mark.as_mut() {
                *mark = mark.saturating_sub(1);
            }
        }
        self.stats.push(error);
        if self.stats.n < self.params.min_instances {
            return DetectorSignal::STABLE;
        }
        self.stats.record_min();

        if self.stats.exceeds(self.params.drift_level) {
            // keep the outcomes since the warning began, or just this one
            let keep = match self.warning_history_mark {
                Some(mark) => self.history.len() - mark,
                None => 1,
            };
            let signal = DetectorSignal {
                level: DriftLevel::Drift,
                warning_start: self.warning_start,
            };
            self.pending_replay = Some(keep);
            self.clear_warning();
            return signal;
        }
        if self.warnings >= self.params.warn_limit {
            let signal = DetectorSignal {
                level: DriftLevel::Drift,
                warning_start: self.warning_start,
            };
            self.pending_replay = Some(1);
            self.clear_warning();
            return signal;
        }
        if self.stats.exceeds(self.params.warning_level) {
            self.warnings += 1;
            if self.warning_start.is_none() {
                self.warning_start = Some(seq);
                self.warning_history_mark = Some(self.history.len() - 1);
            }
            return DetectorSignal {
                level: DriftLevel::Warning,
                warning_start: self.warning_start,
            };
        }
        self.clear_warning();
        if self.stats.n as usize >= self.params.max_concept_size {
            self.pending_replay = Some(self.params.min_stable_concept_size);
        }
        DetectorSignal::STABLE
    }

    fn reset(&mut self) {
        self.stats = ErrorStats::default();
        self.history.clear();
        self.pending_replay = None;
        self.clear_warning();
    }

    fn name(&self) -> &'static str {
        "RDDM"
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct NoDetector;

impl DriftDetector for NoDetector {
    fn update(&mut self, _correct: bool, _seq: u64) -> DetectorSignal {
        DetectorSignal::STABLE
    }

    fn reset(&mut self) {}

    fn name(&self) -> &'static str {
        "none"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn detectors() -> Vec<Box<dyn DriftDetector>> {
        vec![Box::new(Ddm::default()), Box::new(Rddm::default())]
    }

    #[test]
    fn all_correct_stays_stable() {
        for mut d in detectors() {
            for seq in 0..10_000 {
                assert_eq!(d.update(true, seq).level, DriftLevel::Stable, "{}", d.name());
            }
        }
    }

    #[test]
    fn warm_up_is_stable() {
        let mut ddm = Ddm::default();
        for seq in 0..29 {
            assert_eq!(ddm.update(false, seq), DetectorSignal::STABLE);
        }
        let mut rddm = Rddm::default();
        for seq in 0..128 {
            assert_eq!(rddm.update(seq % 2 == 0, seq), DetectorSignal::STABLE);
        }
    }

    #[test]
    fn reset_clears_warning() {
        let mut d = Ddm::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut warned = false;
        for seq in 0..2_000u64 {
            let p_err = if seq < 1000 { 0.05 } else { 0.3 };
            let sig = d.update(!rng.random_bool(p_err), seq);
            if sig.level == DriftLevel::Warning {
                warned = true;
                assert!(sig.warning_start.unwrap() <= seq);
                break;
            }
        }
        assert!(warned);
        d.reset();
        for seq in 0..100 {
            assert_eq!(d.update(true, seq), DetectorSignal::STABLE);
        }
    }

    #[test]
    fn shift_detected_with_warning_first() {
        for mut d in detectors() {
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let mut drift_at = None;
            let mut warning_seen = false;
            for seq in 0..3_000u64 {
                let p_err = if seq < 1000 { 0.1 } else { 0.5 };
                let sig = d.update(!rng.random_bool(p_err), seq);
                if seq >= 1000 {
                    warning_seen |= sig.level == DriftLevel::Warning;
                    if sig.is_drift() {
                        if let Some(w) = sig.warning_start {
                            assert!(w <= seq);
                        }
                        drift_at = Some(seq);
                        break;
                    }
                }
            }
            let at = drift_at.expect("drift detected");
            assert!(at < 1500, "{} detected at {at}", d.name());
            assert!(warning_seen, "{}", d.name());
        }
    }

    #[test]
    fn rddm_long_warning_forces_drift() {
        let params = RddmParams {
            warn_limit: 50,
            // unreachable drift level isolates the persistence rule
            drift_level: 1e9,
            ..RddmParams::default()
        };
        let mut d = Rddm::new(params);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut forced = None;
        for seq in 0..20_000u64 {
            let p_err = if seq < 2000 { 0.05 } else { 0.2 };
            let sig = d.update(!rng.random_bool(p_err), seq);
            if sig.is_drift() {
                forced = Some(sig);
                break;
            }
        }
        let sig = forced.expect("persistent warning promoted to drift");
        assert!(sig.warning_start.is_some());
    }

    #[test]
    fn deterministic_signal_sequence() {
        let run = || {
            let mut d = Rddm::default();
            let mut rng = ChaCha8Rng::seed_from_u64(42);
            (0..5_000u64)
                .map(|seq| d.update(!rng.random_bool(0.2), seq))
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }
}
