//! Online K-d tree for approximate k-nearest-neighbor search over a stream.
//!
//! Nodes live in an arena and are never removed individually: deletion only
//! clears a node's `active` flag, so the ordering invariants below survive any
//! sequence of operations.
//!
//! * every instance in the left subtree of a node splitting on `s` has a
//!   strictly smaller value on `s`;
//! * every instance in the right subtree has a greater or equal value.
//!
//! The tree is rebuilt from its live instances once it has doubled in size
//! since the last build, or once the inactive fraction exceeds `beta`.
//!
//! Subtrees on the far side of a split are pruned with the single-dimension
//! term of the active metric (the Canberra segment by default). Traversal uses
//! explicit stacks, so degenerate chains from sorted or duplicate-heavy input
//! cannot overflow the call stack.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::distance::DistanceKind;
use crate::error::{Error, Result};
use crate::types::{LabeledInstance, Neighbor, RegionOfCompetence};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NodeId(u32);

impl NodeId {
    fn idx(self) -> usize {
        self.0 as usize
    }

    /// Position in the node arena.
    pub fn index(self) -> usize {
        self.idx()
    }
}

#[derive(Clone, Copy, Debug)]
struct Links {
    split: usize,
    active: bool,
    left: Option<NodeId>,
    right: Option<NodeId>,
}

/// Read-only view of one tree node.
#[derive(Clone, Copy)]
pub struct KdNode<'a> {
    tree: &'a OnlineKdTree,
    id: NodeId,
}

impl<'a> KdNode<'a> {
    fn links(&self) -> &'a Links {
        &self.tree.links[self.id.idx()]
    }

    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn instance(&self) -> &'a LabeledInstance {
        &self.tree.instances[self.id.idx()]
    }

    pub fn split(&self) -> usize {
        self.links().split
    }

    pub fn is_active(&self) -> bool {
        self.links().active
    }

    pub fn left(&self) -> Option<NodeId> {
        self.links().left
    }

    pub fn right(&self) -> Option<NodeId> {
        self.links().right
    }
}

impl std::fmt::Debug for KdNode<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KdNode")
            .field("id", &self.id)
            .field("instance", self.instance())
            .field("links", self.links())
            .finish()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct KdStats {
    pub total_nodes: usize,
    pub inactive_nodes: usize,
    pub size_at_build: usize,
    pub rebuilds: u64,
    pub distance_computations: u64,
}

/// Per-query work counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes_visited: usize,
    pub distance_computations: usize,
}

#[derive(Debug)]
pub struct OnlineKdTree {
    links: Vec<Links>,
    instances: Vec<LabeledInstance>,
    /// Node features, `dim` values per node in arena order.
    coords: Vec<f64>,
    root: Option<NodeId>,
    dim: usize,
    beta: f64,
    metric: DistanceKind,
    size_at_build: usize,
    inactive: usize,
    rebuilds: u64,
    distance_computations: AtomicU64,
}

impl Clone for OnlineKdTree {
    fn clone(&self) -> Self {
        OnlineKdTree {
            links: self.links.clone(),
            instances: self.instances.clone(),
            coords: self.coords.clone(),
            root: self.root,
            dim: self.dim,
            beta: self.beta,
            metric: self.metric,
            size_at_build: self.size_at_build,
            inactive: self.inactive,
            rebuilds: self.rebuilds,
            distance_computations: AtomicU64::new(
                self.distance_computations.load(Ordering::Relaxed),
            ),
        }
    }
}

impl OnlineKdTree {
    pub fn new(dim: usize, beta: f64, metric: DistanceKind) -> Self {
        assert!(dim >= 1, "k-d tree needs at least one dimension");
        OnlineKdTree {
            links: Vec::new(),
            instances: Vec::new(),
            coords: Vec::new(),
            root: None,
            dim,
            beta,
            metric,
            size_at_build: 0,
            inactive: 0,
            rebuilds: 0,
            distance_computations: AtomicU64::new(0),
        }
    }

    /// Builds a balanced tree with the root splitting on dimension 0.
    pub fn build(
        dim: usize,
        beta: f64,
        metric: DistanceKind,
        instances: Vec<LabeledInstance>,
    ) -> Result<Self> {
        let mut tree = Self::new(dim, beta, metric);
        for inst in &instances {
            tree.check_dim(inst.features.dim())?;
        }
        tree.build_from(instances, 0);
        Ok(tree)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn metric(&self) -> DistanceKind {
        self.metric
    }

    pub fn root(&self) -> Option<NodeId> {
        self.root
    }

    pub fn node(&self, id: NodeId) -> KdNode<'_> {
        KdNode { tree: self, id }
    }

    pub fn total_nodes(&self) -> usize {
        self.links.len()
    }

    pub fn inactive_nodes(&self) -> usize {
        self.inactive
    }

    pub fn active_len(&self) -> usize {
        self.links.len() - self.inactive
    }

    pub fn is_empty(&self) -> bool {
        self.active_len() == 0
    }

    pub fn stats(&self) -> KdStats {
        KdStats {
            total_nodes: self.links.len(),
            inactive_nodes: self.inactive,
            size_at_build: self.size_at_build,
            rebuilds: self.rebuilds,
            distance_computations: self.distance_computations.load(Ordering::Relaxed),
        }
    }

    /// Live instances in arrival (`seq`) order.
    /// Nodes on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        let mut deepest = 0;
        let mut stack: Vec<(NodeId, usize)> = self.root.map(|r| (r, 1)).into_iter().collect();
        while let Some((id, d)) = stack.pop() {
            deepest = deepest.max(d);
            let l = &self.links[id.idx()];
            stack.extend(l.left.into_iter().chain(l.right).map(|c| (c, d + 1)));
        }
        deepest
    }

    pub fn active_instances(&self) -> Vec<LabeledInstance> {
        let mut out: Vec<LabeledInstance> = self
            .links
            .iter()
            .zip(&self.instances)
            .filter(|(l, _)| l.active)
            .map(|(_, i)| i.clone())
            .collect();
        out.sort_by_key(|i| i.seq);
        out
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

    fn push_node(&mut self, instance: LabeledInstance, split: usize) -> NodeId {
        let id = NodeId(u32::try_from(self.links.len()).expect("k-d tree arena overflow"));
        self.coords.extend_from_slice(&instance.features);
        self.instances.push(instance);
        self.links.push(Links {
            split,
            active: true,
            left: None,
            right: None,
        });
        id
    }

    /// Replaces the whole structure with a balanced tree over `instances`.
    fn build_from(&mut self, instances: Vec<LabeledInstance>, split: usize) {
        self.links.clear();
        self.instances.clear();
        self.coords.clear();
        self.links.reserve(instances.len());
        self.instances.reserve(instances.len());
        self.coords.reserve(instances.len() * self.dim);
        self.root = None;
        self.inactive = 0;
        self.size_at_build = instances.len();

        let dim = self.dim;
        let flat: Vec<f64> = instances.iter().flat_map(|i| i.features.iter().copied()).collect();
        let value = |i: u32, s: usize| flat[i as usize * dim + s];
        let all: Vec<u32> = (0..instances.len() as u32).collect();
        let mut slots: Vec<Option<LabeledInstance>> = instances.into_iter().map(Some).collect();

        enum Link {
            Root,
            Left(NodeId),
            Right(NodeId),
        }
        let mut work = vec![(all, split, Link::Root)];
        let mut values = Vec::new();
        while let Some((mut items, split, link)) = work.pop() {
            if items.is_empty() {
                continue;
            }
            values.clear();
            values.extend(items.iter().map(|&i| value(i, split)));
            let mid = values.len() / 2;
            let (_, &mut median, _) = values.select_nth_unstable_by(mid, f64::total_cmp);

            let chosen_pos = items
                .iter()
                .position(|&i| value(i, split) == median)
                .expect("median is drawn from the set");
            let chosen = items.remove(chosen_pos);
            let left: Vec<u32> = items.iter().copied().filter(|&i| value(i, split) < median).collect();
            if !left.is_empty() {
                items.retain(|&i| value(i, split) >= median);
            }
            let right = items;

            let id = self.push_node(slots[chosen as usize].take().expect("each instance placed once"), split);
            match link {
                Link::Root => self.root = Some(id),
                Link::Left(p) => self.links[p.idx()].left = Some(id),
                Link::Right(p) => self.links[p.idx()].right = Some(id),
            }
            let child_split = (split + 1) % dim;
            work.push((right, child_split, Link::Right(id)));
            work.push((left, child_split, Link::Left(id)));
        }
    }

    /// Attaches `instance` as a new active leaf.
    pub fn insert(&mut self, instance: LabeledInstance) -> Result<()> {
        self.check_dim(instance.features.dim())?;
        let Some(mut cur) = self.root else {
            let id = self.push_node(instance, 0);
            self.root = Some(id);
            return Ok(());
        };
        loop {
            let node = &self.links[cur.idx()];
            let go_left = instance.features[node.split] < self.key(cur);
            let next = if go_left { node.left } else { node.right };
            match next {
                Some(child) => cur = child,
                None => {
                    let split = (node.split + 1) % self.dim;
                    let id = self.push_node(instance, split);
                    let parent = &mut self.links[cur.idx()];
                    if go_left {
                        parent.left = Some(id);
                    } else {
                        parent.right = Some(id);
                    }
                    return Ok(());
                }
            }
        }
    }

    fn locate(&self, instance: &LabeledInstance) -> Option<NodeId> {
        if instance.features.dim() != self.dim {
            return None;
        }
        let mut cur = self.root;
        while let Some(id) = cur {
            let node = &self.links[id.idx()];
            let stored = &self.instances[id.idx()];
            if node.active
                && stored.seq == instance.seq
                && stored.label == instance.label
                && stored.features == instance.features
            {
                return Some(id);
            }
            // ties are stored on the right
            cur = if instance.features[node.split] < self.key(id) {
                node.left
            } else {
                node.right
            };
        }
        None
    }

    /// Deactivates the node holding `instance`. Returns `false` if no active
    /// node matches it.
    pub fn lazy_delete(&mut self, instance: &LabeledInstance) -> bool {
        match self.locate(instance) {
            Some(id) => {
                self.links[id.idx()].active = false;
                self.inactive += 1;
                true
            }
            None => false,
        }
    }

    pub fn needs_rebuild(&self) -> bool {
        let total = self.links.len();
        if total == 0 {
            return false;
        }
        total >= 2 * self.size_at_build || self.inactive as f64 / total as f64 > self.beta
    }

    pub fn rebuild_if_needed(&mut self) -> bool {
        if self.needs_rebuild() {
            self.rebuild();
            true
        } else {
            false
        }
    }

    /// Rebuilds a balanced tree from the live instances.
    pub fn rebuild(&mut self) {
        let live = self.active_instances();
        self.build_from(live, 0);
        self.rebuilds += 1;
    }

    /// Replaces the contents with `instances` and rebuilds.
    pub fn rebuild_with(&mut self, instances: Vec<LabeledInstance>) -> Result<()> {
        for inst in &instances {
            self.check_dim(inst.features.dim())?;
        }
        self.build_from(instances, 0);
        self.rebuilds += 1;
        Ok(())
    }

    /// Whether the subtree across `node`'s split may hold a closer instance.
    #[inline]
    pub fn should_search_subtree(&self, split_value: f64, query_value: f64, current_max: f64) -> bool {
        self.metric.segment(split_value, query_value) < current_max
    }

    #[inline]
    fn key(&self, id: NodeId) -> f64 {
        self.coords[id.idx() * self.dim + self.links[id.idx()].split]
    }

    /// Approximate k nearest active neighbors of `query`, nearest first.
    pub fn search(&self, query: &[f64], k: usize) -> RegionOfCompetence {
        self.search_with_stats(query, k).0
    }

    pub fn search_with_stats(&self, query: &[f64], k: usize) -> (RegionOfCompetence, SearchStats) {
        self.search_impl(query, k, true)
    }

    /// Visits every node; the result is the exact k-NN over the active set.
    pub fn search_unpruned(&self, query: &[f64], k: usize) -> RegionOfCompetence {
        self.search_impl(query, k, false).0
    }

    fn search_impl(&self, query: &[f64], k: usize, prune: bool) -> (RegionOfCompetence, SearchStats) {
        assert_eq!(query.len(), self.dim, "query dimensionality");
        let mut stats = SearchStats::default();
        if k == 0 {
            return (RegionOfCompetence::default(), stats);
        }
        let mut best = KBest::new(k);

        enum Frame {
            Visit(NodeId),
            // Revisit the pruning test for the far subtree of this node.
            Far(NodeId, NodeId),
        }
        let mut stack = Vec::new();
        if let Some(r) = self.root {
            stack.push(Frame::Visit(r));
        }
        while let Some(frame) = stack.pop() {
            match frame {
                Frame::Visit(id) => {
                    let node = &self.links[id.idx()];
                    let point = &self.coords[id.idx() * self.dim..(id.idx() + 1) * self.dim];
                    stats.nodes_visited += 1;
                    if node.active {
                        stats.distance_computations += 1;
                        if let Some(d) = self.metric.distance_within(point, query, best.max()) {
                            best.offer(d, id);
                        }
                    }
                    let (near, far) = match (node.left, node.right) {
                        (Some(l), Some(r)) => {
                            if query[node.split] >= point[node.split] {
                                (r, Some(l))
                            } else {
                                (l, Some(r))
                            }
                        }
                        (Some(l), None) => (l, None),
                        (None, Some(r)) => (r, None),
                        (None, None) => continue,
                    };
                    if let Some(far) = far {
                        stack.push(Frame::Far(id, far));
                    }
                    stack.push(Frame::Visit(near));
                }
                Frame::Far(parent, far) => {
                    let s = self.links[parent.idx()].split;
                    if !prune || self.should_search_subtree(self.key(parent), query[s], best.max()) {
                        stack.push(Frame::Visit(far));
                    }
                }
            }
        }
        self.distance_computations
            .fetch_add(stats.distance_computations as u64, Ordering::Relaxed);
        let neighbors = best
            .items
            .into_iter()
            .map(|(distance, id)| Neighbor {
                instance: self.instances[id.idx()].clone(),
                distance,
            })
            .collect();
        (RegionOfCompetence::from_unsorted(neighbors), stats)
    }
}

/// Fixed-capacity candidate list. Until full the bound is +inf; afterwards a
/// candidate at or below the current maximum replaces it.
struct KBest {
    k: usize,
    items: Vec<(f64, NodeId)>,
    max_idx: usize,
}

impl KBest {
    fn new(k: usize) -> Self {
        KBest {
            k,
            items: Vec::with_capacity(k),
            max_idx: 0,
        }
    }

    #[inline]
    fn max(&self) -> f64 {
        if self.items.len() < self.k {
            f64::INFINITY
        } else {
            self.items[self.max_idx].0
        }
    }

    fn offer(&mut self, d: f64, id: NodeId) {
        if self.items.len() < self.k {
            self.items.push((d, id));
            if self.items.len() == self.k {
                self.refresh_max();
            }
        } else if d <= self.items[self.max_idx].0 {
            self.items[self.max_idx] = (d, id);
            self.refresh_max();
        }
    }

    fn refresh_max(&mut self) {
        let mut idx = 0;
        for (i, item) in self.items.iter().enumerate() {
            if item.0 > self.items[idx].0 {
                idx = i;
            }
        }
        self.max_idx = idx;
    }
}
