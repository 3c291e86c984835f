//! Hoeffding Tree (VFDT) with Gaussian numeric estimators and
//! information-gain binary splits.

use super::{argmax, GaussianEstimator, IncrementalClassifier};
use crate::types::{ClassLabel, LabeledInstance};

#[derive(Clone, Debug, PartialEq)]
pub struct HoeffdingTreeParams {
    /// Allowed probability of choosing the wrong split attribute.
    pub split_confidence: f64,
    pub grace_period: u64,
    pub tie_threshold: f64,
    /// Candidate thresholds per numeric attribute.
    pub num_bins: usize,
    /// A split must send at least this fraction of weight down two branches.
    pub min_branch_fraction: f64,
}

impl Default for HoeffdingTreeParams {
    fn default() -> Self {
        HoeffdingTreeParams {
            split_confidence: 1e-7,
            grace_period: 200,
            tie_threshold: 0.05,
            num_bins: 10,
            min_branch_fraction: 0.01,
        }
    }
}

/// `sqrt(R^2 ln(1/delta) / 2n)`.
pub fn hoeffding_bound(range: f64, confidence: f64, n: f64) -> f64 {
    ((range * range * (1.0 / confidence).ln()) / (2.0 * n)).sqrt()
}

#[derive(Clone, Debug)]
struct AttributeObserver {
    per_class: Vec<GaussianEstimator>,
    min: Vec<f64>,
    max: Vec<f64>,
}

impl AttributeObserver {
    fn new(num_classes: usize) -> Self {
        AttributeObserver {
            per_class: vec![GaussianEstimator::default(); num_classes],
            min: vec![f64::INFINITY; num_classes],
            max: vec![f64::NEG_INFINITY; num_classes],
        }
    }

    fn observe(&mut self, value: f64, class: usize) {
        self.per_class[class].add(value);
        self.min[class] = self.min[class].min(value);
        self.max[class] = self.max[class].max(value);
    }

    fn class_dists(&self, threshold: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.per_class.len();
        let mut lhs = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for c in 0..n {
            let est = &self.per_class[c];
            if est.weight() == 0.0 {
                continue;
            }
            if threshold < self.min[c] {
                rhs[c] += est.weight();
            } else if threshold >= self.max[c] {
                lhs[c] += est.weight();
            } else {
                let (le, gt) = est.split_weights(threshold);
                lhs[c] += le;
                rhs[c] += gt;
            }
        }
        (lhs, rhs)
    }

    fn best_split(&self, pre: &[f64], params: &HoeffdingTreeParams) -> Option<SplitCandidate> {
        let lo = self.min.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.max.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(lo < hi) {
            return None;
        }
        let step = (hi - lo) / (params.num_bins as f64 + 1.0);
        let mut best: Option<SplitCandidate> = None;
        for i in 1..=params.num_bins {
            let threshold = lo + step * i as f64;
            if threshold <= lo || threshold >= hi {
                continue;
            }
            let (lhs, rhs) = self.class_dists(threshold);
            let merit = info_gain(pre, &lhs, &rhs, params.min_branch_fraction);
            if best.as_ref().is_none_or(|b| merit > b.merit) {
                best = Some(SplitCandidate {
                    attribute: 0,
                    threshold,
                    merit,
                    lhs,
                    rhs,
                });
            }
        }
        best
    }
}

#[derive(Clone, Debug)]
struct SplitCandidate {
    attribute: usize,
    threshold: f64,
    merit: f64,
    lhs: Vec<f64>,
    rhs: Vec<f64>,
}

fn entropy(dist: &[f64]) -> f64 {
    let total: f64 = dist.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    dist.iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| {
            let p = w / total;
            -p * p.log2()
        })
        .sum()
}

fn info_gain(pre: &[f64], lhs: &[f64], rhs: &[f64], min_frac: f64) -> f64 {
    let wl: f64 = lhs.iter().sum();
    let wr: f64 = rhs.iter().sum();
    let total = wl + wr;
    if total <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let big = [wl, wr].iter().filter(|&&w| w / total >= min_frac).count();
    if big < 2 {
        return f64::NEG_INFINITY;
    }
    entropy(pre) - (wl / total) * entropy(lhs) - (wr / total) * entropy(rhs)
}

#[derive(Clone, Debug)]
struct Leaf {
    class_counts: Vec<f64>,
    observers: Vec<AttributeObserver>,
    weight_at_last_eval: f64,
}

impl Leaf {
    fn new(dim: usize, class_counts: Vec<f64>) -> Self {
        let num_classes = class_counts.len();
        let weight_at_last_eval = class_counts.iter().sum();
        Leaf {
            class_counts,
            observers: (0..dim).map(|_| AttributeObserver::new(num_classes)).collect(),
            weight_at_last_eval,
        }
    }

    fn weight(&self) -> f64 {
        self.class_counts.iter().sum()
    }

    fn is_pure(&self) -> bool {
        self.class_counts.iter().filter(|&&c| c > 0.0).count() < 2
    }
}

#[derive(Clone, Debug)]
enum Node {
    Leaf(Leaf),
    Split {
        attribute: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Clone, Debug)]
pub struct HoeffdingTree {
    params: HoeffdingTreeParams,
    dim: usize,
    num_classes: usize,
    nodes: Vec<Node>,
    trained: u64,
}

impl HoeffdingTree {
    pub fn new(dim: usize, num_classes: usize, params: HoeffdingTreeParams) -> Self {
        let num_classes = num_classes.max(1);
        HoeffdingTree {
            nodes: vec![Node::Leaf(Leaf::new(dim, vec![0.0; num_classes]))],
            params,
            dim,
            num_classes,
            trained: 0,
        }
    }

    pub fn params(&self) -> &HoeffdingTreeParams {
        &self.params
    }

    pub fn num_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf(_))).count()
    }

    pub fn num_splits(&self) -> usize {
        self.nodes.len() - self.num_leaves()
    }

    /// Split (attribute, threshold) pairs in node order.
    pub fn splits(&self) -> Vec<(usize, f64)> {
        self.nodes
            .iter()
            .filter_map(|n| match *n {
                Node::Split {
                    attribute,
                    threshold,
                    ..
                } => Some((attribute, threshold)),
                Node::Leaf(_) => None,
            })
            .collect()
    }

    fn leaf_index(&self, features: &[f64]) -> usize {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                Node::Leaf(_) => return idx,
                Node::Split {
                    attribute,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if features[*attribute] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }

    fn attempt_split(&mut self, idx: usize) {
        let Node::Leaf(leaf) = &mut self.nodes[idx] else {
            return;
        };
        let n = leaf.weight();
        leaf.weight_at_last_eval = n;
        if leaf.is_pure() {
            return;
        }
        let pre = leaf.class_counts.clone();
        let mut candidates: Vec<SplitCandidate> = leaf
            .observers
            .iter()
            .enumerate()
            .filter_map(|(a, obs)| {
                obs.best_split(&pre, &self.params).map(|mut c| {
                    c.attribute = a;
                    c
                })
            })
            .filter(|c| c.merit.is_finite())
            .collect();
        if candidates.is_empty() {
            return;
        }
        candidates.sort_by(|a, b| b.merit.total_cmp(&a.merit));
        let best_merit = candidates[0].merit;
        // the no-split option competes with merit zero
        let second_merit = candidates.get(1).map_or(0.0, |c| c.merit.max(0.0));
        let range = (self.num_classes.max(2) as f64).log2();
        let eps = hoeffding_bound(range, self.params.split_confidence, n);
        if best_merit <= 0.0 {
            return;
        }
        if best_merit - second_merit > eps || eps < self.params.tie_threshold {
            let best = candidates.swap_remove(0);
            let left = self.nodes.len();
            self.nodes.push(Node::Leaf(Leaf::new(self.dim, best.lhs)));
            self.nodes.push(Node::Leaf(Leaf::new(self.dim, best.rhs)));
            self.nodes[idx] = Node::Split {
                attribute: best.attribute,
                threshold: best.threshold,
                left,
                right: left + 1,
            };
        }
    }
}

impl IncrementalClassifier for HoeffdingTree {
    fn train(&mut self, instance: &LabeledInstance) {
        debug_assert_eq!(instance.features.dim(), self.dim);
        self.trained += 1;
        let class = instance.label.index();
        if class >= self.num_classes {
            return;
        }
        let idx = self.leaf_index(&instance.features);
        let grace = self.params.grace_period as f64;
        let Node::Leaf(leaf) = &mut self.nodes[idx] else {
            unreachable!()
        };
        leaf.class_counts[class] += 1.0;
        for (obs, &v) in leaf.observers.iter_mut().zip(instance.features.iter()) {
            obs.observe(v, class);
        }
        if leaf.weight() - leaf.weight_at_last_eval >= grace {
            self.attempt_split(idx);
        }
    }

    fn predict(&self, features: &[f64]) -> ClassLabel {
        match &self.nodes[self.leaf_index(features)] {
            Node::Leaf(leaf) => argmax(&leaf.class_counts),
            Node::Split { .. } => unreachable!(),
        }
    }

    fn trained_count(&self) -> u64 {
        self.trained
    }
}
