mod common;

use incades::detectors::{DetectorSignal, DriftDetector, DriftLevel};
use incades::engine::Route;
use incades::{DetectorKind, Engine, EngineConfig, SearchBackend};
use proptest::prelude::*;
use rand::Rng;

use common::{inst, rng};

/// Fires the scripted signals at the given arrival indices.
struct Scripted(Vec<(u64, DetectorSignal)>);

impl DriftDetector for Scripted {
    fn update(&mut self, _correct: bool, seq: u64) -> DetectorSignal {
        self.0
            .iter()
            .find(|(s, _)| *s == seq)
            .map_or(DetectorSignal::STABLE, |&(_, sig)| sig)
    }

    fn reset(&mut self) {}

    fn name(&self) -> &'static str {
        "scripted"
    }
}

fn drift(warning_start: Option<u64>) -> DetectorSignal {
    DetectorSignal {
        level: DriftLevel::Drift,
        warning_start,
    }
}

fn quiet(pool_size: usize, max_training: u64) -> EngineConfig {
    EngineConfig {
        pool_size,
        max_training,
        detector: DetectorKind::Disabled,
        ..EngineConfig::default()
    }
}

fn feed(engine: &mut Engine, from: u64, to: u64) {
    let mut r = rng(from);
    for seq in from..to {
        let x = [r.random_range(0.0..1.0), r.random_range(0.0..1.0)];
        engine.train_step(&inst(&x, u32::from(x[0] > 0.5), seq)).unwrap();
    }
}

#[test]
fn new_classifier_every_max_training_instances() {
    let mut e = Engine::new(quiet(75, 200), 2, 2).unwrap();
    feed(&mut e, 0, 600);
    assert_eq!(e.pool().trained_counts(), vec![200, 200, 200]);
    feed(&mut e, 600, 601);
    assert_eq!(e.pool().trained_counts(), vec![200, 200, 200, 1]);
    assert_eq!(e.pool().created(), 4);
}

#[test]
fn oldest_classifier_is_evicted_when_full() {
    let mut e = Engine::new(quiet(3, 10), 2, 2).unwrap();
    feed(&mut e, 0, 100);
    assert_eq!(e.pool().len(), 3);
    assert_eq!(e.pool().created(), 10);
    assert_eq!(e.pool().trained_counts(), vec![10, 10, 10]);
}

#[test]
fn drift_with_warning_shrinks_window_to_warning_start() {
    for backend in [SearchBackend::KdTree, SearchBackend::BruteForce] {
        let config = EngineConfig {
            backend,
            ..quiet(75, 200)
        };
        let mut e = Engine::new(config, 2, 2)
            .unwrap()
            .with_detector(Box::new(Scripted(vec![(500, drift(Some(450)))])));
        feed(&mut e, 0, 500);
        assert_eq!(e.window().len(), 500);
        let before = e.pool().created();
        feed(&mut e, 500, 501);
        let seqs: Vec<u64> = e.window().iter().map(|i| i.seq).collect();
        assert_eq!(seqs, (450..=500).collect::<Vec<_>>());
        assert_eq!(e.pool().created(), before + 1);
        assert_eq!(*e.pool().trained_counts().last().unwrap(), 1);
        assert_eq!(e.counters().drifts, 1);
        // the neighbor index follows the window
        let roc = e.region_of_competence(&[0.5, 0.5]);
        assert!(roc.neighbors().iter().all(|n| n.instance.seq >= 450));
    }
}

#[test]
fn drift_without_warning_keeps_last_max_training() {
    let mut e = Engine::new(quiet(75, 50), 2, 2)
        .unwrap()
        .with_detector(Box::new(Scripted(vec![(300, drift(None))])));
    feed(&mut e, 0, 301);
    let seqs: Vec<u64> = e.window().iter().map(|i| i.seq).collect();
    assert_eq!(seqs, (251..=300).collect::<Vec<_>>());
}

#[test]
fn bounded_window_never_exceeds_capacity() {
    let config = EngineConfig {
        max_window: Some(64),
        ..quiet(5, 20)
    };
    let mut e = Engine::new(config, 2, 2).unwrap();
    feed(&mut e, 0, 1_000);
    assert_eq!(e.window().len(), 64);
    assert_eq!(e.window().iter().next().unwrap().seq, 936);
    assert_eq!(e.window().kd_tree().unwrap().active_len(), 64);
}

#[test]
fn pure_neighborhood_uses_overlap_filter() {
    let mut e = Engine::new(quiet(75, 200), 1, 2).unwrap();
    for seq in 0..20 {
        e.train_step(&inst(&[1.0 + seq as f64 * 0.01], 1, seq)).unwrap();
    }
    let p = e.classify(&[1.05]).unwrap();
    assert_eq!(p.route, Route::OverlapFilter);
    assert_eq!(p.label.0, 1);
    assert_eq!(p.ensemble_size, 0);
}

#[test]
fn disabled_filter_always_selects() {
    let config = EngineConfig {
        overlap_filter: false,
        ..quiet(75, 200)
    };
    let mut e = Engine::new(config, 2, 2).unwrap();
    feed(&mut e, 0, 500);
    let c = e.counters();
    assert_eq!(c.overlap_hits, 0);
    assert_eq!(c.ds_selections, 499);
    assert!(c.mean_ensemble_size() >= 1.0);
}

#[test]
fn dimension_mismatch_is_rejected_without_side_effects() {
    let mut e = Engine::new(EngineConfig::default(), 2, 2).unwrap();
    assert!(e.train_step(&inst(&[1.0], 0, 0)).is_err());
    assert!(e.classify(&[1.0, 2.0, 3.0]).is_err());
    assert_eq!(e.counters().instances_trained, 0);
    assert!(e.window().is_empty());
}

#[test]
fn overlap_route_implies_majority_rate_and_is_deterministic() {
    use incades::streams::{self, GeneratorKind, StreamSpec};
    for omega in [0.8, 1.0] {
        let config = EngineConfig {
            omega,
            ..EngineConfig::default()
        };
        let data = streams::load(&StreamSpec::generator(GeneratorKind::Sea, 5_000, 2)).unwrap();
        let mut a = Engine::new(config.clone(), 3, 2).unwrap();
        let mut b = Engine::new(config, 3, 2).unwrap();
        for i in &data.instances {
            let roc = a.region_of_competence(i.features.as_slice());
            let labels: Vec<u32> = roc.labels().map(|l| l.0).collect();
            let top = (0..2).map(|c| labels.iter().filter(|&&l| l == c).count()).max().unwrap();
            let (p, _) = a.test_then_train(i).unwrap();
            if p.route == Route::OverlapFilter {
                assert!(top as f64 / labels.len() as f64 >= omega - 1e-12);
            } else if omega == 1.0 && !labels.is_empty() && a.pool().len() > 0 {
                assert!(top < labels.len() || a.counters().classifications == 1);
            }
            assert_eq!(b.test_then_train(i).unwrap().0, p);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bookkeeping_holds_for_random_configs(
        pool in 1usize..8,
        cap in 1u64..40,
        window in proptest::option::of(1usize..200),
        seed in 0u64..1_000,
        drifts in proptest::collection::vec((10u64..1_500, proptest::option::of(0u64..60)), 0..6),
    ) {
        let script: Vec<(u64, DetectorSignal)> = drifts
            .iter()
            .map(|&(at, back)| (at, drift(back.map(|b| at.saturating_sub(b)))))
            .collect();
        let config = EngineConfig { max_window: window, ..quiet(pool, cap) };
        let mut e = Engine::new(config, 2, 3).unwrap().with_detector(Box::new(Scripted(script.clone())));
        let mut r = rng(seed);
        for seq in 0..1_500u64 {
            let x = [r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)];
            let s = e.train_step(&inst(&x, r.random_range(0..3), seq)).unwrap();
            prop_assert!(e.pool().len() <= pool);
            prop_assert!(e.pool().trained_counts().iter().all(|&c| c <= cap));
            prop_assert!(window.is_none_or(|w| e.window().len() <= w));
            prop_assert_eq!(e.window().iter().last().unwrap().seq, seq);
            if s.is_drift() {
                match s.warning_start {
                    Some(w) => prop_assert!(e.window().iter().all(|i| i.seq >= w)),
                    None => prop_assert!(e.window().len() as u64 <= cap),
                }
            }
            if let Some(t) = e.window().kd_tree() {
                prop_assert_eq!(t.active_len(), e.window().len());
            }
        }
    }
}
