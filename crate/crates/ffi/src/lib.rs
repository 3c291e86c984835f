//! C ABI for the incades engine and the online k-d tree.
//!
//! Every function returns an [`IncadesStatus`]. On failure the message is
//! kept per thread and can be read with [`incades_last_error`].
//! Handles are opaque and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use incades::detectors::DriftLevel;
use incades::{
    ClassLabel, DetectorKind, DistanceKind, Engine, EngineConfig, Error, FeatureVector,
    LabeledInstance, LearnerKind, OnlineKdTree, Route, SearchBackend,
};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IncadesStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Panic = 4,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IncadesDetector {
    Rddm = 0,
    Ddm = 1,
    Disabled = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IncadesDistance {
    Canberra = 0,
    Euclidean = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IncadesBackend {
    KdTree = 0,
    BruteForce = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IncadesLearner {
    HoeffdingTree = 0,
    NaiveBayes = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IncadesLevel {
    Stable = 0,
    Warning = 1,
    Drift = 2,
}

/// Engine settings. `max_window == 0` means an unbounded window.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct IncadesConfig {
    pub max_window: usize,
    pub pool_size: usize,
    pub max_training: u64,
    pub k: usize,
    pub omega: f64,
    pub overlap_filter: bool,
    pub beta: f64,
    pub detector: IncadesDetector,
    pub distance: IncadesDistance,
    pub backend: IncadesBackend,
    pub learner: IncadesLearner,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct IncadesPrediction {
    pub label: u32,
    /// True when the overlap filter answered without consulting the pool.
    pub overlap_filter: bool,
    pub ensemble_size: usize,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct IncadesSignal {
    pub level: IncadesLevel,
    pub has_warning_start: bool,
    pub warning_start: u64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct IncadesCounters {
    pub instances_trained: u64,
    pub classifications: u64,
    pub drifts: u64,
    pub warnings: u64,
    pub overlap_hits: u64,
    pub ds_selections: u64,
    pub distance_computations: u64,
    pub rebuilds: u64,
    pub pool_len: usize,
    pub window_len: usize,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct IncadesNeighbor {
    pub seq: u64,
    pub label: u32,
    pub distance: f64,
}

pub struct IncadesEngine {
    engine: Engine,
    next_seq: u64,
}

pub struct IncadesKdTree {
    tree: OnlineKdTree,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: IncadesStatus, msg: impl Into<String>) -> IncadesStatus {
    set_error(msg);
    status
}

fn from_error(err: Error) -> IncadesStatus {
    let status = match err {
        Error::DimensionMismatch { .. } => IncadesStatus::DimensionMismatch,
        _ => IncadesStatus::InvalidArgument,
    };
    fail(status, err.to_string())
}

fn guard(f: impl FnOnce() -> IncadesStatus) -> IncadesStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => {
            if status == IncadesStatus::Ok {
                LAST_ERROR.with(|e| *e.borrow_mut() = None);
            }
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_owned());
            fail(IncadesStatus::Panic, format!("internal panic: {msg}"))
        }
    }
}

unsafe fn slice<'a>(data: *const f64, len: usize) -> Result<&'a [f64], IncadesStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(fail(IncadesStatus::NullPointer, "feature pointer is null"));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

macro_rules! try_status {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

macro_rules! non_null {
    ($p:expr, $what:literal) => {
        match unsafe { $p.as_mut() } {
            Some(v) => v,
            None => return fail(IncadesStatus::NullPointer, concat!($what, " is null")),
        }
    };
}

fn to_config(c: &IncadesConfig) -> EngineConfig {
    EngineConfig {
        max_window: (c.max_window > 0).then_some(c.max_window),
        pool_size: c.pool_size,
        max_training: c.max_training,
        k: c.k,
        omega: c.omega,
        overlap_filter: c.overlap_filter,
        beta: c.beta,
        detector: match c.detector {
            IncadesDetector::Rddm => DetectorKind::Rddm,
            IncadesDetector::Ddm => DetectorKind::Ddm,
            IncadesDetector::Disabled => DetectorKind::Disabled,
        },
        distance: to_distance(c.distance),
        backend: match c.backend {
            IncadesBackend::KdTree => SearchBackend::KdTree,
            IncadesBackend::BruteForce => SearchBackend::BruteForce,
        },
        learner: match c.learner {
            IncadesLearner::HoeffdingTree => LearnerKind::HoeffdingTree,
            IncadesLearner::NaiveBayes => LearnerKind::NaiveBayes,
        },
    }
}

fn to_distance(d: IncadesDistance) -> DistanceKind {
    match d {
        IncadesDistance::Canberra => DistanceKind::Canberra,
        IncadesDistance::Euclidean => DistanceKind::Euclidean,
    }
}

fn instance(features: &[f64], label: u32, seq: u64) -> Result<LabeledInstance, IncadesStatus> {
    let fv = FeatureVector::from_slice(features).map_err(from_error)?;
    Ok(LabeledInstance::new(fv, ClassLabel(label), seq))
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn incades_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Writes the default engine settings into `out`.
///
/// # Safety
/// `out` must be null or point to writable memory for one `IncadesConfig`.
#[no_mangle]
pub unsafe extern "C" fn incades_config_default(out: *mut IncadesConfig) -> IncadesStatus {
    guard(|| {
        let out = non_null!(out, "config");
        let d = EngineConfig::default();
        *out = IncadesConfig {
            max_window: d.max_window.unwrap_or(0),
            pool_size: d.pool_size,
            max_training: d.max_training,
            k: d.k,
            omega: d.omega,
            overlap_filter: d.overlap_filter,
            beta: d.beta,
            detector: IncadesDetector::Rddm,
            distance: IncadesDistance::Canberra,
            backend: IncadesBackend::KdTree,
            learner: IncadesLearner::HoeffdingTree,
        };
        IncadesStatus::Ok
    })
}

/// Creates an engine. A null `config` uses the defaults.
///
/// # Safety
/// `config` must be null or valid; `out` must point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn incades_engine_new(
    config: *const IncadesConfig,
    dim: usize,
    num_classes: usize,
    out: *mut *mut IncadesEngine,
) -> IncadesStatus {
    guard(|| {
        let out = non_null!(out, "output handle");
        *out = ptr::null_mut();
        let config = match config.as_ref() {
            Some(c) => to_config(c),
            None => EngineConfig::default(),
        };
        let engine = try_status!(Engine::new(config, dim, num_classes).map_err(from_error));
        *out = Box::into_raw(Box::new(IncadesEngine { engine, next_seq: 0 }));
        IncadesStatus::Ok
    })
}

/// # Safety
/// `engine` must be null or a handle from `incades_engine_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn incades_engine_free(engine: *mut IncadesEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Classifies one instance without training.
///
/// # Safety
/// `engine` must be a live handle, `features` must hold `len` doubles and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn incades_engine_predict(
    engine: *mut IncadesEngine,
    features: *const f64,
    len: usize,
    out: *mut IncadesPrediction,
) -> IncadesStatus {
    guard(|| {
        let h = non_null!(engine, "engine");
        let out = non_null!(out, "prediction");
        let x = try_status!(slice(features, len));
        let p = try_status!(h.engine.classify(x).map_err(from_error));
        *out = IncadesPrediction {
            label: p.label.0,
            overlap_filter: p.route == Route::OverlapFilter,
            ensemble_size: p.ensemble_size,
        };
        IncadesStatus::Ok
    })
}

/// Learns from one labeled instance. `signal` may be null.
///
/// # Safety
/// As for `incades_engine_predict`; `signal` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn incades_engine_train(
    engine: *mut IncadesEngine,
    features: *const f64,
    len: usize,
    label: u32,
    signal: *mut IncadesSignal,
) -> IncadesStatus {
    guard(|| {
        let h = non_null!(engine, "engine");
        let x = try_status!(slice(features, len));
        let inst = try_status!(instance(x, label, h.next_seq));
        let s = try_status!(h.engine.train_step(&inst).map_err(from_error));
        h.next_seq += 1;
        if let Some(out) = signal.as_mut() {
            *out = IncadesSignal {
                level: match s.level {
                    DriftLevel::Stable => IncadesLevel::Stable,
                    DriftLevel::Warning => IncadesLevel::Warning,
                    DriftLevel::Drift => IncadesLevel::Drift,
                },
                has_warning_start: s.warning_start.is_some(),
                warning_start: s.warning_start.unwrap_or(0),
            };
        }
        IncadesStatus::Ok
    })
}

/// Predicts, then learns from the same labeled instance.
///
/// # Safety
/// As for `incades_engine_predict`.
#[no_mangle]
pub unsafe extern "C" fn incades_engine_test_then_train(
    engine: *mut IncadesEngine,
    features: *const f64,
    len: usize,
    label: u32,
    out: *mut IncadesPrediction,
) -> IncadesStatus {
    guard(|| {
        let h = non_null!(engine, "engine");
        let out = non_null!(out, "prediction");
        let x = try_status!(slice(features, len));
        let inst = try_status!(instance(x, label, h.next_seq));
        let (p, _) = try_status!(h.engine.test_then_train(&inst).map_err(from_error));
        h.next_seq += 1;
        *out = IncadesPrediction {
            label: p.label.0,
            overlap_filter: p.route == Route::OverlapFilter,
            ensemble_size: p.ensemble_size,
        };
        IncadesStatus::Ok
    })
}

/// # Safety
/// `engine` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn incades_engine_counters(
    engine: *const IncadesEngine,
    out: *mut IncadesCounters,
) -> IncadesStatus {
    guard(|| {
        let h = match engine.as_ref() {
            Some(h) => h,
            None => return fail(IncadesStatus::NullPointer, "engine is null"),
        };
        let out = non_null!(out, "counters");
        let c = h.engine.counters();
        *out = IncadesCounters {
            instances_trained: c.instances_trained,
            classifications: c.classifications,
            drifts: c.drifts,
            warnings: c.warnings,
            overlap_hits: c.overlap_hits,
            ds_selections: c.ds_selections,
            distance_computations: c.distance_computations,
            rebuilds: c.rebuilds,
            pool_len: h.engine.pool().len(),
            window_len: h.engine.window().len(),
        };
        IncadesStatus::Ok
    })
}

/// Creates an empty k-d tree.
///
/// # Safety
/// `out` must point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn incades_kdtree_new(
    dim: usize,
    beta: f64,
    distance: IncadesDistance,
    out: *mut *mut IncadesKdTree,
) -> IncadesStatus {
    guard(|| {
        let out = non_null!(out, "output handle");
        *out = ptr::null_mut();
        if dim == 0 {
            return fail(IncadesStatus::InvalidArgument, "dimension must be at least 1");
        }
        if !(0.0..=1.0).contains(&beta) {
            return fail(IncadesStatus::InvalidArgument, format!("beta must be in [0, 1], got {beta}"));
        }
        let tree = OnlineKdTree::new(dim, beta, to_distance(distance));
        *out = Box::into_raw(Box::new(IncadesKdTree { tree }));
        IncadesStatus::Ok
    })
}

/// # Safety
/// `tree` must be null or a handle from `incades_kdtree_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn incades_kdtree_free(tree: *mut IncadesKdTree) {
    if !tree.is_null() {
        drop(Box::from_raw(tree));
    }
}

/// Inserts a point, then rebuilds if the tree has become unbalanced or
/// too sparse.
///
/// # Safety
/// `tree` must be a live handle and `features` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn incades_kdtree_insert(
    tree: *mut IncadesKdTree,
    features: *const f64,
    len: usize,
    label: u32,
    seq: u64,
) -> IncadesStatus {
    guard(|| {
        let h = non_null!(tree, "tree");
        let x = try_status!(slice(features, len));
        let inst = try_status!(instance(x, label, seq));
        try_status!(h.tree.insert(inst).map_err(from_error));
        h.tree.rebuild_if_needed();
        IncadesStatus::Ok
    })
}

/// Marks a previously inserted point inactive. `removed` may be null and
/// receives whether an active match was found.
///
/// # Safety
/// As for `incades_kdtree_insert`; `removed` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn incades_kdtree_remove(
    tree: *mut IncadesKdTree,
    features: *const f64,
    len: usize,
    label: u32,
    seq: u64,
    removed: *mut bool,
) -> IncadesStatus {
    guard(|| {
        let h = non_null!(tree, "tree");
        let x = try_status!(slice(features, len));
        if x.len() != h.tree.dim() {
            return from_error(Error::DimensionMismatch {
                expected: h.tree.dim(),
                actual: x.len(),
            });
        }
        let inst = try_status!(instance(x, label, seq));
        let hit = h.tree.lazy_delete(&inst);
        h.tree.rebuild_if_needed();
        if let Some(out) = removed.as_mut() {
            *out = hit;
        }
        IncadesStatus::Ok
    })
}

/// Number of active points.
///
/// # Safety
/// `tree` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn incades_kdtree_len(tree: *const IncadesKdTree, out: *mut usize) -> IncadesStatus {
    guard(|| {
        let h = match tree.as_ref() {
            Some(h) => h,
            None => return fail(IncadesStatus::NullPointer, "tree is null"),
        };
        let out = non_null!(out, "length");
        *out = h.tree.active_len();
        IncadesStatus::Ok
    })
}

/// Finds up to `k` nearest active points, nearest first, into `out`
/// (capacity `k`). `found` receives the number written.
///
/// # Safety
/// `tree` must be a live handle, `query` must hold `len` doubles, `out`
/// must hold `k` neighbors and `found` must be writable.
#[no_mangle]
pub unsafe extern "C" fn incades_kdtree_knn(
    tree: *const IncadesKdTree,
    query: *const f64,
    len: usize,
    k: usize,
    out: *mut IncadesNeighbor,
    found: *mut usize,
) -> IncadesStatus {
    guard(|| {
        let h = match tree.as_ref() {
            Some(h) => h,
            None => return fail(IncadesStatus::NullPointer, "tree is null"),
        };
        let found = non_null!(found, "found");
        *found = 0;
        let q = try_status!(slice(query, len));
        if q.len() != h.tree.dim() {
            return from_error(Error::DimensionMismatch {
                expected: h.tree.dim(),
                actual: q.len(),
            });
        }
        if k == 0 {
            return IncadesStatus::Ok;
        }
        if out.is_null() {
            return fail(IncadesStatus::NullPointer, "neighbor buffer is null");
        }
        let roc = h.tree.search(q, k);
        let buf = std::slice::from_raw_parts_mut(out, k);
        for (slot, n) in buf.iter_mut().zip(roc.neighbors()) {
            *slot = IncadesNeighbor {
                seq: n.instance.seq,
                label: n.instance.label.0,
                distance: n.distance,
            };
        }
        *found = roc.len().min(k);
        IncadesStatus::Ok
    })
}
