#![allow(dead_code)]

use std::collections::HashSet;

use incades::kdtree::NodeId;
use incades::{ClassLabel, FeatureVector, LabeledInstance, OnlineKdTree};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn inst(x: &[f64], y: u32, seq: u64) -> LabeledInstance {
    LabeledInstance::new(FeatureVector::from_slice(x).unwrap(), ClassLabel(y), seq)
}

pub fn uniform_points(rng: &mut ChaCha8Rng, n: usize, dim: usize, lo: f64, hi: f64) -> Vec<LabeledInstance> {
    (0..n)
        .map(|i| {
            let x: Vec<f64> = (0..dim).map(|_| rng.random_range(lo..hi)).collect();
            inst(&x, rng.random_range(0..2), i as u64)
        })
        .collect()
}

/// Walks the whole arena from the root and checks the split ordering, the
/// round-robin split dimensions, that every node is reachable exactly once,
/// and that the active count matches. Returns the active sequence numbers.
pub fn check_tree(tree: &OnlineKdTree) -> Result<HashSet<u64>, String> {
    let mut active = HashSet::new();
    let mut seen = 0usize;
    let Some(root) = tree.root() else {
        return if tree.total_nodes() == 0 && tree.active_len() == 0 {
            Ok(active)
        } else {
            Err("empty root with nodes present".into())
        };
    };
    let mut visited = vec![false; tree.total_nodes()];
    // (node, constraints from ancestors as (dim, key, is_left))
    let mut stack: Vec<(NodeId, Vec<(usize, f64, bool)>)> = vec![(root, Vec::new())];
    while let Some((id, bounds)) = stack.pop() {
        let node = tree.node(id);
        let idx = id.index();
        if visited[idx] {
            return Err(format!("node {idx} reachable twice"));
        }
        visited[idx] = true;
        seen += 1;
        let x = node.instance().features.as_slice();
        for &(d, key, left) in &bounds {
            if left && !(x[d] < key) {
                return Err(format!("node {idx}: {} on dim {d} not < ancestor key {key}", x[d]));
            }
            if !left && !(x[d] >= key) {
                return Err(format!("node {idx}: {} on dim {d} not >= ancestor key {key}", x[d]));
            }
        }
        if node.is_active() && !active.insert(node.instance().seq) {
            return Err(format!("seq {} active twice", node.instance().seq));
        }
        let key = x[node.split()];
        for (child, left) in [(node.left(), true), (node.right(), false)] {
            if let Some(c) = child {
                if tree.node(c).split() != (node.split() + 1) % tree.dim() {
                    return Err(format!("child of node {idx} has split {}", tree.node(c).split()));
                }
                let mut b = bounds.clone();
                b.push((node.split(), key, left));
                stack.push((c, b));
            }
        }
    }
    if seen != tree.total_nodes() {
        return Err(format!("{seen} reachable of {} nodes", tree.total_nodes()));
    }
    if active.len() != tree.active_len() {
        return Err(format!("{} active nodes, tree reports {}", active.len(), tree.active_len()));
    }
    Ok(active)
}

/// Exact k smallest distances by sorting everything.
pub fn oracle_distances(tree: &OnlineKdTree, points: &[LabeledInstance], query: &[f64], k: usize) -> Vec<f64> {
    let mut d: Vec<f64> = points
        .iter()
        .map(|p| tree.metric().distance_unchecked(p.features.as_slice(), query))
        .collect();
    d.sort_by(f64::total_cmp);
    d.truncate(k);
    d
}
