use std::time::Instant;

use serde::Serialize;

use super::BenchArgs;
use crate::config::{EngineConfig, SearchBackend};
use crate::detectors::DetectorKind;
use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::streams::{self, DriftSchedule, GeneratorKind, StreamSpec};
use crate::types::LabeledInstance;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub dataset: String,
    pub n: usize,
    pub backend: String,
    pub accuracy: f64,
    pub seconds: f64,
    pub ips: f64,
    pub distance_computations: u64,
}

/// Fills a window with `instances[..n]` and classifies the following
/// `queries` instances without training. Returns (accuracy, seconds,
/// distance computations).
pub fn measure_backend(
    config: &EngineConfig,
    dim: usize,
    num_classes: usize,
    instances: &[LabeledInstance],
    n: usize,
    queries: usize,
) -> Result<(f64, f64, u64)> {
    if n + queries > instances.len() {
        return Err(Error::config(format!(
            "window size {n} plus {queries} queries exceeds the {} available instances",
            instances.len()
        )));
    }
    let config = EngineConfig {
        max_window: Some(n.max(1)),
        detector: DetectorKind::Disabled,
        ..config.clone()
    };
    let mut engine = Engine::new(config, dim, num_classes)?;
    for inst in &instances[..n] {
        engine.warm_start(inst)?;
    }
    let before = engine.counters().distance_computations;
    let mut correct = 0usize;
    let t = Instant::now();
    for inst in &instances[n..n + queries] {
        if engine.classify(&inst.features)?.label == inst.label {
            correct += 1;
        }
    }
    let secs = t.elapsed().as_secs_f64();
    let dist = engine.counters().distance_computations - before;
    Ok((correct as f64 / queries.max(1) as f64, secs, dist))
}

pub fn bench_tree(args: &BenchArgs) -> Result<Vec<BenchRow>> {
    let kind = GeneratorKind::from_name(&args.stream)
        .ok_or_else(|| Error::config(format!("unknown generator {:?}", args.stream)))?;
    let largest = args.sizes.iter().copied().max().unwrap_or(0);
    let total = args.instances.unwrap_or((largest + args.queries) as u64);
    if let Some(&n) = args.sizes.iter().find(|&&n| (n + args.queries) as u64 > total) {
        return Err(Error::config(format!(
            "window size {n} plus {} queries exceeds the {total} generated instances",
            args.queries
        )));
    }
    let mut spec = StreamSpec::generator(kind, total, args.seed).with_schedule(DriftSchedule::Stationary);
    spec.noise = args.noise;
    let data = streams::load(&spec)?;
    let base = args.engine.config();
    base.validate()?;

    let mut rows = Vec::new();
    for &n in &args.sizes {
        for backend in [SearchBackend::KdTree, SearchBackend::BruteForce] {
            let config = EngineConfig {
                backend,
                ..base.clone()
            };
            let (accuracy, seconds, distance_computations) = measure_backend(
                &config,
                data.schema.dim(),
                data.schema.num_classes(),
                &data.instances,
                n,
                args.queries,
            )?;
            rows.push(BenchRow {
                dataset: kind.name().to_owned(),
                n,
                backend: match backend {
                    SearchBackend::KdTree => "kd-tree".into(),
                    SearchBackend::BruteForce => "brute-force".into(),
                },
                accuracy,
                seconds,
                ips: if seconds > 0.0 { args.queries as f64 / seconds } else { f64::INFINITY },
                distance_computations,
            });
        }
    }

    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let path = args.out.join(format!("bench_tree_{}.csv", kind.name()));
    let csv_err = |source| Error::Csv {
        path: path.clone(),
        source,
    };
    let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
    for r in &rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(rows)
}
