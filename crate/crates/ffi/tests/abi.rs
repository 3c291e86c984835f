use std::ffi::CStr;
use std::ptr;

use incades_ffi::*;

fn last_error() -> String {
    let p = incades_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn engine(config: Option<&IncadesConfig>, dim: usize) -> *mut IncadesEngine {
    let mut h = ptr::null_mut();
    let cfg = config.map_or(ptr::null(), |c| c as *const _);
    assert_eq!(unsafe { incades_engine_new(cfg, dim, 2, &mut h) }, IncadesStatus::Ok);
    assert!(!h.is_null());
    h
}

#[test]
fn defaults_round_trip() {
    let mut c = std::mem::MaybeUninit::<IncadesConfig>::uninit();
    assert_eq!(unsafe { incades_config_default(c.as_mut_ptr()) }, IncadesStatus::Ok);
    let c = unsafe { c.assume_init() };
    assert_eq!((c.pool_size, c.max_training, c.k, c.max_window), (75, 200, 5, 0));
    assert_eq!((c.omega, c.beta), (0.8, 0.3));
    assert_eq!(c.detector, IncadesDetector::Rddm);
    assert_eq!(c.backend, IncadesBackend::KdTree);
}

#[test]
fn engine_learns_threshold_rule() {
    let h = engine(None, 2);
    let mut correct = 0;
    for i in 0..4000u32 {
        let x = [(i % 97) as f64 / 97.0, (i % 89) as f64 / 89.0];
        let y = u32::from(x[0] > 0.5);
        let mut p = IncadesPrediction::default();
        let st = unsafe { incades_engine_test_then_train(h, x.as_ptr(), 2, y, &mut p) };
        assert_eq!(st, IncadesStatus::Ok);
        if i >= 3000 && p.label == y {
            correct += 1;
        }
    }
    assert!(correct > 900, "{correct}/1000");
    let mut c = IncadesCounters::default();
    assert_eq!(unsafe { incades_engine_counters(h, &mut c) }, IncadesStatus::Ok);
    assert_eq!(c.instances_trained, 4000);
    assert_eq!(c.classifications, 4000);
    assert_eq!(c.overlap_hits + c.ds_selections, 3999, "first call sees an empty pool");
    assert!(c.pool_len >= 1 && c.window_len >= 1);
    unsafe { incades_engine_free(h) };
}

#[test]
fn train_reports_signal_and_predict_does_not_train() {
    let h = engine(None, 1);
    let mut s = IncadesSignal {
        level: IncadesLevel::Drift,
        has_warning_start: true,
        warning_start: 9,
    };
    assert_eq!(unsafe { incades_engine_train(h, [0.25].as_ptr(), 1, 1, &mut s) }, IncadesStatus::Ok);
    assert_eq!(s.level, IncadesLevel::Stable);
    assert!(!s.has_warning_start);
    assert_eq!(unsafe { incades_engine_train(h, [0.5].as_ptr(), 1, 0, ptr::null_mut()) }, IncadesStatus::Ok);
    let mut p = IncadesPrediction::default();
    assert_eq!(unsafe { incades_engine_predict(h, [0.25].as_ptr(), 1, &mut p) }, IncadesStatus::Ok);
    let mut c = IncadesCounters::default();
    unsafe { incades_engine_counters(h, &mut c) };
    assert_eq!(c.instances_trained, 2);
    assert_eq!(c.window_len, 2);
    unsafe { incades_engine_free(h) };
}

#[test]
fn error_codes() {
    let h = engine(None, 3);
    let mut p = IncadesPrediction::default();
    let st = unsafe { incades_engine_predict(h, [1.0, 2.0].as_ptr(), 2, &mut p) };
    assert_eq!(st, IncadesStatus::DimensionMismatch);
    assert!(last_error().contains("dimension"), "{}", last_error());

    let st = unsafe { incades_engine_predict(h, ptr::null(), 3, &mut p) };
    assert_eq!(st, IncadesStatus::NullPointer);

    let st = unsafe { incades_engine_train(h, [f64::NAN, 0.0, 0.0].as_ptr(), 3, 0, ptr::null_mut()) };
    assert_eq!(st, IncadesStatus::InvalidArgument);

    let st = unsafe { incades_engine_predict(ptr::null_mut(), [0.0; 3].as_ptr(), 3, &mut p) };
    assert_eq!(st, IncadesStatus::NullPointer);

    assert_eq!(unsafe { incades_engine_predict(h, [0.0; 3].as_ptr(), 3, &mut p) }, IncadesStatus::Ok);
    assert!(incades_last_error().is_null());
    unsafe { incades_engine_free(h) };
    unsafe { incades_engine_free(ptr::null_mut()) };
}

#[test]
fn invalid_config_is_rejected() {
    let mut c = std::mem::MaybeUninit::<IncadesConfig>::uninit();
    unsafe { incades_config_default(c.as_mut_ptr()) };
    let mut c = unsafe { c.assume_init() };
    c.k = 0;
    let mut h = 1 as *mut IncadesEngine;
    assert_eq!(unsafe { incades_engine_new(&c, 2, 2, &mut h) }, IncadesStatus::InvalidArgument);
    assert!(h.is_null());
    assert!(last_error().contains("k"));
}

#[test]
fn kdtree_insert_remove_knn() {
    let mut t = ptr::null_mut();
    assert_eq!(
        unsafe { incades_kdtree_new(2, 0.3, IncadesDistance::Euclidean, &mut t) },
        IncadesStatus::Ok
    );
    for i in 0..10u64 {
        let x = [i as f64, 0.0];
        assert_eq!(
            unsafe { incades_kdtree_insert(t, x.as_ptr(), 2, (i % 2) as u32, i) },
            IncadesStatus::Ok
        );
    }
    let mut removed = false;
    let st = unsafe { incades_kdtree_remove(t, [4.0, 0.0].as_ptr(), 2, 0, 4, &mut removed) };
    assert_eq!(st, IncadesStatus::Ok);
    assert!(removed);
    let st = unsafe { incades_kdtree_remove(t, [4.0, 0.0].as_ptr(), 2, 0, 4, &mut removed) };
    assert_eq!(st, IncadesStatus::Ok);
    assert!(!removed);
    let mut len = 0;
    unsafe { incades_kdtree_len(t, &mut len) };
    assert_eq!(len, 9);

    let mut out = [IncadesNeighbor::default(); 3];
    let mut found = 0;
    let st = unsafe { incades_kdtree_knn(t, [4.2, 0.0].as_ptr(), 2, 3, out.as_mut_ptr(), &mut found) };
    assert_eq!(st, IncadesStatus::Ok);
    assert_eq!(found, 3);
    let seqs: Vec<u64> = out.iter().map(|n| n.seq).collect();
    assert_eq!(seqs, vec![5, 3, 6]);
    assert!((out[0].distance - 0.8).abs() < 1e-12);
    assert_eq!(out[0].label, 1);

    let mut big = [IncadesNeighbor::default(); 20];
    unsafe { incades_kdtree_knn(t, [0.0, 0.0].as_ptr(), 2, 20, big.as_mut_ptr(), &mut found) };
    assert_eq!(found, 9);

    let st = unsafe { incades_kdtree_knn(t, [0.0].as_ptr(), 1, 3, out.as_mut_ptr(), &mut found) };
    assert_eq!(st, IncadesStatus::DimensionMismatch);
    unsafe { incades_kdtree_free(t) };
}

#[test]
fn kdtree_rejects_bad_arguments() {
    let mut t = ptr::null_mut();
    let st = unsafe { incades_kdtree_new(0, 0.3, IncadesDistance::Canberra, &mut t) };
    assert_eq!(st, IncadesStatus::InvalidArgument);
    let st = unsafe { incades_kdtree_new(2, 1.5, IncadesDistance::Canberra, &mut t) };
    assert_eq!(st, IncadesStatus::InvalidArgument);
    assert!(t.is_null());
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/incades.h")).unwrap();
    for f in [
        "incades_last_error",
        "incades_config_default",
        "incades_engine_new",
        "incades_engine_free",
        "incades_engine_predict",
        "incades_engine_train",
        "incades_engine_test_then_train",
        "incades_engine_counters",
        "incades_kdtree_new",
        "incades_kdtree_free",
        "incades_kdtree_insert",
        "incades_kdtree_remove",
        "incades_kdtree_len",
        "incades_kdtree_knn",
    ] {
        assert!(header.contains(&format!("{f}(")), "{f} missing from header");
    }
    assert!(header.contains("typedef struct IncadesEngine IncadesEngine;"));
    assert!(header.contains("INCADES_STATUS_DIMENSION_MISMATCH = 3"));
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/incades.h");
    match std::process::Command::new("cc").args(["-fsyntax-only", "-Wall", "-x", "c", header]).output() {
        Ok(out) => assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr)),
        Err(_) => eprintln!("no C compiler on PATH; skipped"),
    }
}
