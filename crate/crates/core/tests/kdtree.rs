mod common;

use std::collections::{HashMap, HashSet};

use incades::engine::brute_force_knn;
use incades::{DistanceKind, LabeledInstance, OnlineKdTree};
use proptest::prelude::*;

use common::{check_tree, inst, oracle_distances};

#[derive(Clone, Debug)]
enum Op {
    Insert(Vec<f64>, u32),
    Delete(usize),
    Rebuild,
    Query(Vec<f64>, usize),
}

fn point(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    // a small grid keeps duplicate split values frequent
    proptest::collection::vec((0i32..12).prop_map(|v| v as f64 * 0.5), dim)
}

fn ops(dim: usize) -> impl Strategy<Value = Vec<Op>> {
    let op = prop_oneof![
        5 => (point(dim), 0u32..3).prop_map(|(x, y)| Op::Insert(x, y)),
        3 => any::<usize>().prop_map(Op::Delete),
        1 => Just(Op::Rebuild),
        2 => (point(dim), 1usize..8).prop_map(|(q, k)| Op::Query(q, k)),
    ];
    proptest::collection::vec(op, 1..300)
}

fn metric() -> impl Strategy<Value = DistanceKind> {
    prop_oneof![Just(DistanceKind::Canberra), Just(DistanceKind::Euclidean)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn invariants_hold_under_random_operations(dim in 1usize..4, beta in 0.0f64..=1.0, metric in metric(), ops in ops(3)) {
        let mut tree = OnlineKdTree::new(dim, beta, metric);
        let mut live: HashMap<u64, LabeledInstance> = HashMap::new();
        for (seq, op) in ops.into_iter().enumerate() {
            let seq = seq as u64;
            match op {
                Op::Insert(x, y) => {
                    let i = inst(&x[..dim], y, seq);
                    tree.insert(i.clone()).unwrap();
                    tree.rebuild_if_needed();
                    live.insert(seq, i);
                }
                Op::Delete(pick) if !live.is_empty() => {
                    let mut keys: Vec<u64> = live.keys().copied().collect();
                    keys.sort_unstable();
                    let victim = live.remove(&keys[pick % keys.len()]).unwrap();
                    prop_assert!(tree.lazy_delete(&victim));
                    prop_assert!(!tree.lazy_delete(&victim));
                    tree.rebuild_if_needed();
                }
                Op::Delete(_) => {}
                Op::Rebuild => tree.rebuild(),
                Op::Query(q, k) => {
                    let (roc, stats) = tree.search_with_stats(&q[..dim], k);
                    prop_assert!(stats.distance_computations <= tree.active_len());
                    prop_assert!(roc.len() <= k.min(live.len()));
                    prop_assert!(roc.neighbors().iter().all(|n| live.contains_key(&n.instance.seq)));
                    prop_assert!(roc.distances().collect::<Vec<_>>().windows(2).all(|w| w[0] <= w[1]));
                    let points: Vec<LabeledInstance> = live.values().cloned().collect();
                    let exact: Vec<f64> = tree.search_unpruned(&q[..dim], k).distances().collect();
                    prop_assert_eq!(&exact, &oracle_distances(&tree, &points, &q[..dim], k));
                    // an approximate result can only be farther than the exact one
                    for (a, e) in roc.distances().zip(&exact) {
                        prop_assert!(a >= *e - 1e-12);
                    }
                }
            }
            let active = check_tree(&tree).map_err(TestCaseError::fail)?;
            prop_assert_eq!(active, live.keys().copied().collect::<HashSet<u64>>());
            prop_assert!(!tree.needs_rebuild());
        }
    }

    #[test]
    fn unpruned_search_equals_brute_force(
        points in proptest::collection::vec(proptest::collection::vec(-3.0f64..3.0, 3), 1..120),
        q in proptest::collection::vec(-3.0f64..3.0, 3),
        k in 1usize..10,
        metric in metric(),
    ) {
        let data: Vec<LabeledInstance> = points.iter().enumerate().map(|(i, x)| inst(x, 0, i as u64)).collect();
        let tree = OnlineKdTree::build(3, 0.3, metric, data.clone()).unwrap();
        let got: Vec<f64> = tree.search_unpruned(&q, k).distances().collect();
        let want: Vec<f64> = brute_force_knn(data.iter(), metric, &q, k).distances().collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn build_is_balanced_on_distinct_keys(n in 1usize..2_000, seed in 0u64..1_000) {
        let mut r = common::rng(seed);
        let data = common::uniform_points(&mut r, n, 2, 0.0, 1.0);
        let tree = OnlineKdTree::build(2, 0.3, DistanceKind::Canberra, data).unwrap();
        check_tree(&tree).map_err(TestCaseError::fail)?;
        let bound = (n as f64).log2().floor() as usize + 1;
        prop_assert!(tree.depth() <= bound, "depth {} for n {}", tree.depth(), n);
    }
}

#[test]
fn rebuild_triggers() {
    let mut t = OnlineKdTree::new(1, 0.3, DistanceKind::Euclidean);
    let pts: Vec<LabeledInstance> = (0..10).map(|i| inst(&[i as f64], 0, i)).collect();
    t.rebuild_with(pts.clone()).unwrap();
    assert!(!t.needs_rebuild());
    for i in 10..19 {
        t.insert(inst(&[i as f64], 0, i)).unwrap();
        assert!(!t.needs_rebuild(), "{i}");
    }
    t.insert(inst(&[19.0], 0, 19)).unwrap();
    assert!(t.needs_rebuild(), "doubled since the last build");
    t.rebuild();
    assert_eq!(t.total_nodes(), 20);
    // 6 of 20 inactive is exactly 0.3, the 7th crosses beta
    for p in &pts[..6] {
        assert!(t.lazy_delete(p));
    }
    assert!(!t.needs_rebuild());
    assert!(t.lazy_delete(&pts[6]));
    assert!(t.needs_rebuild());
    assert!(t.rebuild_if_needed());
    assert_eq!((t.total_nodes(), t.inactive_nodes()), (13, 0));
}

#[test]
fn duplicates_go_right_of_the_median() {
    let pts: Vec<LabeledInstance> = [2.0, 1.0, 2.0, 2.0, 3.0].iter().enumerate().map(|(i, &v)| inst(&[v], 0, i as u64)).collect();
    let t = OnlineKdTree::build(1, 0.3, DistanceKind::Euclidean, pts).unwrap();
    let root = t.node(t.root().unwrap());
    // upper median of [1, 2, 2, 2, 3] is 2; the first instance holding it is seq 0
    assert_eq!(root.instance().seq, 0);
    let left = t.node(root.left().unwrap());
    assert_eq!(left.instance().features.as_slice(), [1.0]);
    assert!(left.left().is_none() && left.right().is_none());
    check_tree(&t).unwrap();
}

#[test]
fn deep_chain_from_sorted_inserts_does_not_overflow() {
    let mut t = OnlineKdTree::new(1, 1.0, DistanceKind::Canberra);
    for i in 0..20_000u64 {
        t.insert(inst(&[1.0 + i as f64], 0, i)).unwrap();
    }
    assert!(t.depth() >= 20_000);
    let roc = t.search(&[5.0], 3);
    assert_eq!(roc.neighbors()[0].instance.seq, 4);
    check_tree(&t).unwrap();
}
