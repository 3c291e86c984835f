//! The streaming ensemble: training step, validation window, classifier pool
//! and overlap-filtered KNORA-Eliminate classification.
//!
//! Training (per labeled instance):
//! 1. classify it with the full pipeline and feed the outcome to the detector;
//! 2. append it to the validation window, evicting the oldest beyond `W`;
//! 3. on drift, shrink the window to the warning start and start a new
//!    classifier;
//! 4. otherwise start a new classifier once the newest has seen `F` instances;
//! 5. train the newest classifier.
//!
//! The pool evicts by age only, and only when it is full.

use std::collections::VecDeque;
use std::time::{Duration, Instant};

use crate::config::{EngineConfig, SearchBackend};
use crate::detectors::{DetectorSignal, DriftDetector, DriftLevel};
use crate::distance::DistanceKind;
use crate::error::{Error, Result};
use crate::kdtree::OnlineKdTree;
use crate::learners::IncrementalClassifier;
use crate::types::{ClassLabel, LabeledInstance, Neighbor, RegionOfCompetence};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    OverlapFilter,
    DynamicSelection,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Prediction {
    pub label: ClassLabel,
    pub route: Route,
    /// Members that voted; 0 for the overlap filter.
    pub ensemble_size: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EngineCounters {
    pub instances_trained: u64,
    pub classifications: u64,
    pub drifts: u64,
    pub warnings: u64,
    pub overlap_hits: u64,
    pub ds_selections: u64,
    pub ensemble_members_total: u64,
    pub classifier_invocations: u64,
    pub distance_computations: u64,
    pub rebuilds: u64,
    /// Wall time spent classifying, including neighbor search.
    pub classification_time: Duration,
}

impl EngineCounters {
    pub fn overlap_hit_rate(&self) -> f64 {
        if self.classifications == 0 {
            0.0
        } else {
            self.overlap_hits as f64 / self.classifications as f64
        }
    }

    pub fn mean_ensemble_size(&self) -> f64 {
        if self.ds_selections == 0 {
            0.0
        } else {
            self.ensemble_members_total as f64 / self.ds_selections as f64
        }
    }
}

enum NeighborIndex {
    BruteForce,
    KdTree(OnlineKdTree),
}

/// The validation window and the neighbor index over it.
pub struct Dsew {
    window: VecDeque<LabeledInstance>,
    max_size: Option<usize>,
    metric: DistanceKind,
    index: NeighborIndex,
    distance_computations: u64,
    rebuilds: u64,
}

impl Dsew {
    pub fn new(
        dim: usize,
        max_size: Option<usize>,
        metric: DistanceKind,
        backend: SearchBackend,
        beta: f64,
    ) -> Self {
        let index = match backend {
            SearchBackend::BruteForce => NeighborIndex::BruteForce,
            SearchBackend::KdTree => NeighborIndex::KdTree(OnlineKdTree::new(dim, beta, metric)),
        };
        Dsew {
            window: VecDeque::new(),
            max_size,
            metric,
            index,
            distance_computations: 0,
            rebuilds: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window.is_empty()
    }

    /// Instances oldest first.
    pub fn iter(&self) -> impl Iterator<Item = &LabeledInstance> {
        self.window.iter()
    }

    pub fn kd_tree(&self) -> Option<&OnlineKdTree> {
        match &self.index {
            NeighborIndex::KdTree(t) => Some(t),
            NeighborIndex::BruteForce => None,
        }
    }

    pub fn push(&mut self, instance: LabeledInstance) {
        if let NeighborIndex::KdTree(tree) = &mut self.index {
            tree.insert(instance.clone())
                .expect("window dimensionality is checked by the engine");
        }
        self.window.push_back(instance);
        if self.max_size.is_some_and(|w| self.window.len() > w) {
            let old = self.window.pop_front().expect("window is non-empty");
            if let NeighborIndex::KdTree(tree) = &mut self.index {
                tree.lazy_delete(&old);
            }
        }
        if let NeighborIndex::KdTree(tree) = &mut self.index {
            if tree.rebuild_if_needed() {
                self.rebuilds += 1;
            }
        }
    }

    /// Drops every instance that arrived before `min_seq`.
    pub fn shrink_to(&mut self, min_seq: u64) {
        while self.window.front().is_some_and(|i| i.seq < min_seq) {
            self.window.pop_front();
        }
        if let NeighborIndex::KdTree(tree) = &mut self.index {
            tree.rebuild_with(self.window.iter().cloned().collect())
                .expect("window dimensionality is checked by the engine");
            self.rebuilds += 1;
        }
    }

    /// Keeps the `n` most recent instances.
    pub fn keep_last(&mut self, n: usize) {
        let cut = self.window.len().saturating_sub(n);
        if let Some(first) = self.window.get(cut).map(|i| i.seq) {
            self.shrink_to(first);
        }
    }

    pub fn search(&mut self, query: &[f64], k: usize) -> RegionOfCompetence {
        match &self.index {
            NeighborIndex::KdTree(tree) => {
                let (roc, stats) = tree.search_with_stats(query, k);
                self.distance_computations += stats.distance_computations as u64;
                roc
            }
            NeighborIndex::BruteForce => {
                self.distance_computations += self.window.len() as u64;
                brute_force_knn(self.window.iter(), self.metric, query, k)
            }
        }
    }
}

/// Exact k-NN by linear scan; earlier instances win distance ties.
pub fn brute_force_knn<'a>(
    candidates: impl IntoIterator<Item = &'a LabeledInstance>,
    metric: DistanceKind,
    query: &[f64],
    k: usize,
) -> RegionOfCompetence {
    let mut best: Vec<(f64, &LabeledInstance)> = Vec::with_capacity(k + 1);
    if k == 0 {
        return RegionOfCompetence::default();
    }
    for inst in candidates {
        let d = metric.distance_unchecked(&inst.features, query);
        if best.len() == k && d >= best[k - 1].0 {
            continue;
        }
        let pos = best.partition_point(|(bd, _)| *bd <= d);
        best.insert(pos, (d, inst));
        best.truncate(k);
    }
    RegionOfCompetence::from_unsorted(
        best.into_iter()
            .map(|(distance, inst)| Neighbor {
                instance: inst.clone(),
                distance,
            })
            .collect(),
    )
}

struct Member {
    model: Box<dyn IncrementalClassifier>,
}

/// Age-ordered classifiers; only the newest one trains.
pub struct ClassifierPool {
    members: VecDeque<Member>,
    max_size: usize,
    created: u64,
}

impl ClassifierPool {
    fn new(max_size: usize) -> Self {
        ClassifierPool {
            members: VecDeque::new(),
            max_size,
            created: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Number of classifiers ever created.
    pub fn created(&self) -> u64 {
        self.created
    }

    /// Training counts, oldest member first.
    pub fn trained_counts(&self) -> Vec<u64> {
        self.members.iter().map(|m| m.model.trained_count()).collect()
    }

    fn newest_trained(&self) -> Option<u64> {
        self.members.back().map(|m| m.model.trained_count())
    }

    fn add(&mut self, model: Box<dyn IncrementalClassifier>) {
        if self.members.len() == self.max_size {
            self.members.pop_front();
        }
        self.members.push_back(Member { model });
        self.created += 1;
    }

    fn train_newest(&mut self, instance: &LabeledInstance) {
        if let Some(m) = self.members.back_mut() {
            m.model.train(instance);
        }
    }
}

/// Majority label when its share of the neighborhood reaches `omega`.
/// Ties between equally common labels go to the nearer neighbor.
pub fn overlap_filter(roc: &RegionOfCompetence, omega: f64) -> Option<ClassLabel> {
    if roc.is_empty() {
        return None;
    }
    let (label, count) = majority_label(roc);
    let rate = count as f64 / roc.len() as f64;
    (rate >= omega - 1e-12).then_some(label)
}

fn majority_label(roc: &RegionOfCompetence) -> (ClassLabel, usize) {
    let mut counts: Vec<(ClassLabel, usize)> = Vec::new();
    for label in roc.labels() {
        match counts.iter_mut().find(|(l, _)| *l == label) {
            Some((_, c)) => *c += 1,
            None => counts.push((label, 1)),
        }
    }
    // `counts` is in first-appearance (nearest-first) order, so the first
    // maximum is the nearest among tied labels
    let mut best = counts[0];
    for &(l, c) in &counts[1..] {
        if c > best.1 {
            best = (l, c);
        }
    }
    best
}

/// Correctness table indexed as `correct[member][neighbor]`.
fn correctness_matrix(pool: &ClassifierPool, roc: &RegionOfCompetence) -> Vec<Vec<bool>> {
    pool.members
        .iter()
        .map(|m| {
            roc.neighbors()
                .iter()
                .map(|n| m.model.predict(&n.instance.features) == n.instance.label)
                .collect()
        })
        .collect()
}

/// KNORA-Eliminate over a correctness table. Returns member indices; falls
/// back to the whole pool when no member survives any reduction.
pub fn knora_eliminate(correct: &[Vec<bool>]) -> Vec<usize> {
    let neighbors = correct.first().map_or(0, Vec::len);
    for len in (1..=neighbors).rev() {
        let chosen: Vec<usize> = correct
            .iter()
            .enumerate()
            .filter(|(_, row)| row[..len].iter().all(|&c| c))
            .map(|(i, _)| i)
            .collect();
        if !chosen.is_empty() {
            return chosen;
        }
    }
    (0..correct.len()).collect()
}

/// Plurality vote; ties go to the newest member voting for a tied label.
/// `votes` must be in member age order, oldest first.
pub fn plurality_vote(votes: &[ClassLabel]) -> ClassLabel {
    let mut tally: Vec<(ClassLabel, usize)> = Vec::new();
    for &v in votes {
        match tally.iter_mut().find(|(l, _)| *l == v) {
            Some((_, c)) => *c += 1,
            None => tally.push((v, 1)),
        }
    }
    let Some(top) = tally.iter().map(|&(_, c)| c).max() else {
        return ClassLabel(0);
    };
    let tied = |l: ClassLabel| tally.iter().any(|&(t, c)| t == l && c == top);
    *votes.iter().rev().find(|&&v| tied(v)).expect("a top label was voted")
}

pub struct Engine {
    config: EngineConfig,
    dim: usize,
    num_classes: usize,
    window: Dsew,
    pool: ClassifierPool,
    detector: Box<dyn DriftDetector>,
    counters: EngineCounters,
    last_signal: DetectorSignal,
}

impl Engine {
    pub fn new(config: EngineConfig, dim: usize, num_classes: usize) -> Result<Self> {
        config.validate()?;
        if dim == 0 {
            return Err(Error::config("streams need at least one feature"));
        }
        Ok(Engine {
            window: Dsew::new(dim, config.max_window, config.distance, config.backend, config.beta),
            pool: ClassifierPool::new(config.pool_size),
            detector: config.detector.build(),
            counters: EngineCounters::default(),
            last_signal: DetectorSignal::STABLE,
            config,
            dim,
            num_classes,
        })
    }

    /// Replaces the configured detector.
    pub fn with_detector(mut self, detector: Box<dyn DriftDetector>) -> Self {
        self.detector = detector;
        self
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn window(&self) -> &Dsew {
        &self.window
    }

    pub fn pool(&self) -> &ClassifierPool {
        &self.pool
    }

    pub fn counters(&self) -> EngineCounters {
        let mut c = self.counters;
        c.distance_computations = self.window.distance_computations;
        c.rebuilds = self.window.rebuilds;
        c
    }

    pub fn last_signal(&self) -> DetectorSignal {
        self.last_signal
    }

    fn check_dim(&self, actual: usize) -> Result<()> {
        if actual != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual,
            });
        }
        Ok(())
    }

    /// Nearest validation instances of `features`.
    pub fn region_of_competence(&mut self, features: &[f64]) -> RegionOfCompetence {
        self.window.search(features, self.config.k)
    }

    pub fn classify(&mut self, features: &[f64]) -> Result<Prediction> {
        self.check_dim(features.len())?;
        Ok(self.classify_unchecked(features))
    }

    fn classify_unchecked(&mut self, features: &[f64]) -> Prediction {
        let start = Instant::now();
        let pred = self.select_and_vote(features);
        self.counters.classification_time += start.elapsed();
        pred
    }

    fn select_and_vote(&mut self, features: &[f64]) -> Prediction {
        self.counters.classifications += 1;
        let roc = self.window.search(features, self.config.k);
        if self.config.overlap_filter {
            if let Some(label) = overlap_filter(&roc, self.config.omega) {
                self.counters.overlap_hits += 1;
                return Prediction {
                    label,
                    route: Route::OverlapFilter,
                    ensemble_size: 0,
                };
            }
        }
        if self.pool.is_empty() {
            let label = roc.labels().next().unwrap_or_default();
            return Prediction {
                label,
                route: Route::DynamicSelection,
                ensemble_size: 0,
            };
        }
        let selected = if roc.is_empty() {
            (0..self.pool.len()).collect()
        } else {
            let correct = correctness_matrix(&self.pool, &roc);
            self.counters.classifier_invocations += (self.pool.len() * roc.len()) as u64;
            knora_eliminate(&correct)
        };
        let votes: Vec<ClassLabel> = selected
            .iter()
            .map(|&i| self.pool.members[i].model.predict(features))
            .collect();
        self.counters.classifier_invocations += votes.len() as u64;
        self.counters.ds_selections += 1;
        self.counters.ensemble_members_total += votes.len() as u64;
        Prediction {
            label: plurality_vote(&votes),
            route: Route::DynamicSelection,
            ensemble_size: votes.len(),
        }
    }

    /// One training step for a labeled instance. The detector sees the
    /// outcome of classifying the instance before it joins the window.
    pub fn train_step(&mut self, instance: &LabeledInstance) -> Result<DetectorSignal> {
        self.check_dim(instance.features.dim())?;
        let pred = self.classify_unchecked(&instance.features);
        Ok(self.learn(instance, pred.label == instance.label))
    }

    /// Classifies and then trains on the same instance. Equivalent to
    /// `classify` followed by `train_step`, sharing the single prediction.
    pub fn test_then_train(
        &mut self,
        instance: &LabeledInstance,
    ) -> Result<(Prediction, DetectorSignal)> {
        self.check_dim(instance.features.dim())?;
        let pred = self.classify_unchecked(&instance.features);
        let signal = self.learn(instance, pred.label == instance.label);
        Ok((pred, signal))
    }

    fn learn(&mut self, instance: &LabeledInstance, correct: bool) -> DetectorSignal {
        let signal = self.detector.update(correct, instance.seq);
        if signal.level == DriftLevel::Warning && self.last_signal.level != DriftLevel::Warning {
            self.counters.warnings += 1;
        }
        self.last_signal = signal;
        self.absorb(instance, signal);
        signal
    }

    /// Adds an instance to the window and the newest classifier without
    /// classifying it or consulting the detector. Used to pre-fill a window.
    pub fn warm_start(&mut self, instance: &LabeledInstance) -> Result<()> {
        self.check_dim(instance.features.dim())?;
        self.absorb(instance, DetectorSignal::STABLE);
        Ok(())
    }

    fn absorb(&mut self, instance: &LabeledInstance, signal: DetectorSignal) {
        self.counters.instances_trained += 1;
        self.window.push(instance.clone());
        if signal.is_drift() {
            self.counters.drifts += 1;
            match signal.warning_start {
                Some(start) => self.window.shrink_to(start),
                None => self.window.keep_last(self.config.max_training as usize),
            }
            self.new_classifier();
        }
        if self
            .pool
            .newest_trained()
            .is_none_or(|n| n >= self.config.max_training)
        {
            self.new_classifier();
        }
        self.pool.train_newest(instance);
    }

    fn new_classifier(&mut self) {
        self.pool
            .add(self.config.learner.build(self.dim, self.num_classes));
    }
}
