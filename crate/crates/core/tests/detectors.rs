mod common;

use incades::detectors::{Ddm, DdmParams, DriftLevel, Rddm, RddmParams};
use incades::{DetectorKind, DriftDetector};
use proptest::prelude::*;
use rand::Rng;

use common::rng;

#[test]
fn ddm_is_silent_before_min_instances() {
    let mut d = Ddm::default();
    for seq in 0..29 {
        assert_eq!(d.update(false, seq).level, DriftLevel::Stable);
    }
}

#[test]
fn ddm_first_error_after_perfect_run_is_a_drift() {
    // p_min = s_min = 0 after 40 correct predictions
    let mut d = Ddm::default();
    for seq in 0..40 {
        assert_eq!(d.update(true, seq).level, DriftLevel::Stable);
    }
    let s = d.update(false, 40);
    assert_eq!(s.level, DriftLevel::Drift);
    assert_eq!(s.warning_start, None);
}

#[test]
fn ddm_warning_and_drift_levels() {
    // one error in every ten, then a run of errors
    let mut d = Ddm::new(DdmParams::default());
    let mut seq = 0;
    for _ in 0..100 {
        for j in 0..10 {
            assert_ne!(d.update(j != 0, seq).level, DriftLevel::Drift, "seq {seq}");
            seq += 1;
        }
    }
    let mut first_warning = None;
    loop {
        let s = d.update(false, seq);
        match s.level {
            DriftLevel::Warning => {
                let w = *first_warning.get_or_insert(seq);
                assert_eq!(s.warning_start, Some(w));
            }
            DriftLevel::Drift => {
                assert!(first_warning.is_some(), "drift without warning");
                assert_eq!(s.warning_start, first_warning);
                break;
            }
            DriftLevel::Stable => assert!(first_warning.is_none()),
        }
        seq += 1;
        assert!(seq < 2_000);
    }
    // minimum at n = 1000: p = 0.1, s = 0.009487; the warning needs
    // p + s > 0.118974 (n = 1011) and the drift p + s > 0.128461 (n = 1021)
    assert_eq!(first_warning, Some(1010));
    assert_eq!(seq, 1020);
}

#[test]
fn rddm_is_silent_before_min_instances() {
    let mut d = Rddm::default();
    for seq in 0..128 {
        assert_eq!(d.update(seq % 2 == 0, seq).level, DriftLevel::Stable);
    }
}

#[test]
fn rddm_promotes_a_long_warning_to_drift() {
    let mut d = Rddm::new(RddmParams {
        min_instances: 50,
        warning_level: 0.0,
        drift_level: 1e9,
        warn_limit: 5,
        ..RddmParams::default()
    });
    for seq in 0..49 {
        assert_eq!(d.update(seq % 2 == 1, seq).level, DriftLevel::Stable);
    }
    for seq in 49..54 {
        let s = d.update(false, seq);
        assert_eq!(s.level, DriftLevel::Warning, "seq {seq}");
        assert_eq!(s.warning_start, Some(49));
    }
    let s = d.update(false, 54);
    assert_eq!(s.level, DriftLevel::Drift);
    assert_eq!(s.warning_start, Some(49));
    // statistics restart from the last stored outcome
    assert_eq!(d.update(false, 55).level, DriftLevel::Stable);
}

#[test]
fn disabled_never_signals() {
    let mut d = DetectorKind::Disabled.build();
    for seq in 0..10_000 {
        assert_eq!(d.update(seq % 2 == 0, seq).level, DriftLevel::Stable);
    }
}

#[test]
fn abrupt_error_increase_is_detected() {
    for kind in [DetectorKind::Ddm, DetectorKind::Rddm] {
        let mut r = rng(3);
        let mut d = kind.build();
        for seq in 0..3_000 {
            d.update(!r.random_bool(0.05), seq);
        }
        let hit = (3_000..6_000).find(|&seq| d.update(!r.random_bool(0.6), seq).is_drift());
        assert!(hit.is_some_and(|s| s < 3_300), "{kind:?}: {hit:?}");
    }
}

proptest! {
    #[test]
    fn warning_start_is_stable_within_a_phase(
        kind in prop_oneof![Just(DetectorKind::Ddm), Just(DetectorKind::Rddm)],
        rates in proptest::collection::vec(0.0f64..0.7, 1..6),
        seed in 0u64..500,
    ) {
        let mut r = rng(seed);
        let mut d = kind.build();
        let mut phase: Option<u64> = None;
        let mut seq = 0u64;
        for p in rates {
            for _ in 0..800 {
                let s = d.update(!r.random_bool(p), seq);
                match s.level {
                    DriftLevel::Warning => {
                        let w = s.warning_start.unwrap();
                        prop_assert!(w <= seq);
                        prop_assert_eq!(*phase.get_or_insert(w), w);
                    }
                    DriftLevel::Drift => {
                        prop_assert!(s.warning_start.is_none_or(|w| w <= seq));
                        if let Some(w) = phase { prop_assert_eq!(s.warning_start, Some(w)); }
                        phase = None;
                    }
                    DriftLevel::Stable => phase = None,
                }
                seq += 1;
            }
        }
    }
}
