//! Evaluation protocols, prequential accuracy and result files.

use std::collections::VecDeque;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::EngineConfig;
use crate::engine::{Engine, EngineCounters};
use crate::error::{Error, Result};
use crate::streams::{self, StreamEvent, StreamSpec};
use crate::types::{ClassLabel, LabeledInstance};

/// Anything the harness can evaluate.
pub trait StreamLearner {
    fn predict(&mut self, features: &[f64]) -> Result<ClassLabel>;
    fn train(&mut self, instance: &LabeledInstance) -> Result<()>;

    /// Predicts and then trains on the same instance.
    fn test_then_train(&mut self, instance: &LabeledInstance) -> Result<ClassLabel> {
        let p = self.predict(&instance.features)?;
        self.train(instance)?;
        Ok(p)
    }

    fn counters(&self) -> Option<EngineCounters> {
        None
    }
}

impl StreamLearner for Engine {
    fn predict(&mut self, features: &[f64]) -> Result<ClassLabel> {
        Ok(self.classify(features)?.label)
    }

    fn train(&mut self, instance: &LabeledInstance) -> Result<()> {
        self.train_step(instance).map(drop)
    }

    fn test_then_train(&mut self, instance: &LabeledInstance) -> Result<ClassLabel> {
        Ok(Engine::test_then_train(self, instance)?.0.label)
    }

    fn counters(&self) -> Option<EngineCounters> {
        Some(Engine::counters(self))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    #[default]
    #[serde(rename = "ttt")]
    TestThenTrain,
    #[serde(rename = "delayed")]
    DelayedPartial,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::TestThenTrain => "ttt",
            Mode::DelayedPartial => "delayed",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProtocolSpec {
    pub mode: Mode,
    /// Instances between testing a labeled instance and training on it.
    pub delay: u64,
    /// Share of instances that receive a label.
    pub label_fraction: f64,
    pub preq_window: usize,
}

impl Default for ProtocolSpec {
    fn default() -> Self {
        ProtocolSpec {
            mode: Mode::TestThenTrain,
            delay: 0,
            label_fraction: 1.0,
            preq_window: 1000,
        }
    }
}

impl ProtocolSpec {
    pub fn test_then_train() -> Self {
        Self::default()
    }

    pub fn delayed_partial(delay: u64) -> Self {
        ProtocolSpec {
            mode: Mode::DelayedPartial,
            delay,
            label_fraction: 0.5,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.preq_window == 0 {
            return Err(Error::config("prequential window must be at least 1"));
        }
        if !(self.label_fraction > 0.0 && self.label_fraction <= 1.0) {
            return Err(Error::config(format!(
                "label fraction must be in (0, 1], got {}",
                self.label_fraction
            )));
        }
        Ok(())
    }

    /// Whether the instance at arrival index `pos` is labeled. For a
    /// fraction of one half this marks the even positions.
    pub fn is_labeled(&self, pos: u64) -> bool {
        let f = self.label_fraction;
        ((pos + 1) as f64 * f).ceil() > (pos as f64 * f).ceil()
    }

    pub fn event(&self, pos: u64, instance: LabeledInstance) -> StreamEvent {
        let label_available = match self.mode {
            Mode::TestThenTrain => true,
            Mode::DelayedPartial => self.is_labeled(pos),
        };
        let delay = match self.mode {
            Mode::TestThenTrain => 0,
            Mode::DelayedPartial => self.delay,
        };
        StreamEvent {
            label_release_seq: pos + delay,
            instance,
            label_available,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub dataset: String,
    pub seed: u64,
    pub mode: Mode,
    pub delay: u64,
    pub total: u64,
    pub correct: u64,
    pub accuracy: f64,
    pub instances_per_second: f64,
    /// Time spent inside the learner, both testing and training.
    pub elapsed: Duration,
    pub predictions: Vec<ClassLabel>,
    pub prequential: Vec<(u64, f64)>,
    pub labels_delivered: u64,
    /// Training calls that happened before their release position.
    pub leakage_violations: u64,
    pub counters: Option<EngineCounters>,
    /// Set when the learner failed mid-stream; the other fields cover the
    /// instances processed until then.
    pub error: Option<String>,
}

impl RunResult {
    pub fn is_valid(&self) -> bool {
        self.error.is_none()
    }

    pub fn drifts(&self) -> u64 {
        self.counters.map_or(0, |c| c.drifts)
    }

    pub fn overlap_hit_rate(&self) -> f64 {
        self.counters.map_or(0.0, |c| c.overlap_hit_rate())
    }
}

struct Recorder {
    outcomes: Vec<bool>,
    predictions: Vec<ClassLabel>,
    elapsed: Duration,
}

impl Recorder {
    fn new(capacity: usize) -> Self {
        Recorder {
            outcomes: Vec::with_capacity(capacity),
            predictions: Vec::with_capacity(capacity),
            elapsed: Duration::ZERO,
        }
    }

    fn record(&mut self, prediction: ClassLabel, truth: ClassLabel) {
        self.predictions.push(prediction);
        self.outcomes.push(prediction == truth);
    }

    fn finish(
        self,
        learner: &dyn StreamLearner,
        protocol: &ProtocolSpec,
        labels_delivered: u64,
        leakage_violations: u64,
        error: Option<String>,
    ) -> RunResult {
        let total = self.outcomes.len() as u64;
        let correct = self.outcomes.iter().filter(|&&o| o).count() as u64;
        let secs = self.elapsed.as_secs_f64();
        let series = prequential_accuracy(&self.outcomes, protocol.preq_window);
        RunResult {
            dataset: String::new(),
            seed: 0,
            mode: protocol.mode,
            delay: if protocol.mode == Mode::DelayedPartial { protocol.delay } else { 0 },
            total,
            correct,
            accuracy: if total == 0 { 0.0 } else { correct as f64 / total as f64 },
            instances_per_second: if secs > 0.0 { total as f64 / secs } else { f64::INFINITY },
            elapsed: self.elapsed,
            predictions: self.predictions,
            prequential: series.into_iter().enumerate().map(|(i, a)| (i as u64, a)).collect(),
            labels_delivered,
            leakage_violations,
            counters: learner.counters(),
            error,
        }
    }
}

/// Every instance is tested and then immediately trained on.
pub fn run_test_then_train<L, I>(learner: &mut L, source: I, protocol: &ProtocolSpec) -> RunResult
where
    L: StreamLearner,
    I: IntoIterator<Item = LabeledInstance>,
{
    let source = source.into_iter();
    let mut rec = Recorder::new(source.size_hint().0);
    let mut error = None;
    let mut delivered = 0;
    for inst in source {
        let t = Instant::now();
        let r = learner.test_then_train(&inst);
        rec.elapsed += t.elapsed();
        match r {
            Ok(p) => {
                rec.record(p, inst.label);
                delivered += 1;
            }
            Err(e) => {
                error = Some(e.to_string());
                break;
            }
        }
    }
    let protocol = ProtocolSpec {
        mode: Mode::TestThenTrain,
        ..*protocol
    };
    rec.finish(learner, &protocol, delivered, 0, error)
}

/// Every instance is tested on arrival; labeled instances are trained on
/// `delay` arrivals later. Labels still pending at the end are dropped.
pub fn run_delayed_partial<L, I>(learner: &mut L, source: I, protocol: &ProtocolSpec) -> RunResult
where
    L: StreamLearner,
    I: IntoIterator<Item = LabeledInstance>,
{
    let protocol = ProtocolSpec {
        mode: Mode::DelayedPartial,
        ..*protocol
    };
    let source = source.into_iter();
    let mut rec = Recorder::new(source.size_hint().0);
    let mut pending: VecDeque<StreamEvent> = VecDeque::new();
    let mut error = None;
    let mut delivered = 0;
    let mut violations = 0;

    'stream: for (pos, inst) in source.enumerate() {
        let pos = pos as u64;
        let event = protocol.event(pos, inst);
        let immediate = event.label_available && protocol.delay == 0;
        let t = Instant::now();
        let r = if immediate {
            learner.test_then_train(&event.instance)
        } else {
            learner.predict(&event.instance.features)
        };
        rec.elapsed += t.elapsed();
        match r {
            Ok(p) => rec.record(p, event.instance.label),
            Err(e) => {
                error = Some(e.to_string());
                break;
            }
        }
        if immediate {
            delivered += 1;
            continue;
        }
        if event.label_available {
            pending.push_back(event);
        }
        while pending.front().is_some_and(|e| e.label_release_seq <= pos) {
            let e = pending.pop_front().expect("front exists");
            // the prediction at the release position must already exist
            if rec.outcomes.len() as u64 <= e.label_release_seq {
                violations += 1;
            }
            let t = Instant::now();
            let r = learner.train(&e.instance);
            rec.elapsed += t.elapsed();
            if let Err(err) = r {
                error = Some(err.to_string());
                break 'stream;
            }
            delivered += 1;
        }
    }
    rec.finish(learner, &protocol, delivered, violations, error)
}

pub fn run<L, I>(learner: &mut L, source: I, protocol: &ProtocolSpec) -> RunResult
where
    L: StreamLearner,
    I: IntoIterator<Item = LabeledInstance>,
{
    match protocol.mode {
        Mode::TestThenTrain => run_test_then_train(learner, source, protocol),
        Mode::DelayedPartial => run_delayed_partial(learner, source, protocol),
    }
}

/// Windowed accuracy; early points average over the outcomes seen so far.
pub fn prequential_accuracy(outcomes: &[bool], window: usize) -> Vec<f64> {
    let window = window.max(1);
    let mut hits = 0usize;
    outcomes
        .iter()
        .enumerate()
        .map(|(t, &o)| {
            hits += o as usize;
            if t >= window && outcomes[t - window] {
                hits -= 1;
            }
            hits as f64 / (t + 1).min(window) as f64
        })
        .collect()
}

/// One dataset x seed evaluation.
#[derive(Clone, Debug)]
pub struct RunJob {
    pub dataset: String,
    pub stream: StreamSpec,
    pub engine: EngineConfig,
    pub protocol: ProtocolSpec,
}

pub fn execute(job: &RunJob) -> Result<RunResult> {
    job.protocol.validate()?;
    let stream = streams::open(&job.stream)?;
    let mut engine = Engine::new(job.engine.clone(), stream.schema.dim(), stream.schema.num_classes())?;
    let mut result = run(&mut engine, stream.instances, &job.protocol);
    result.dataset = job.dataset.clone();
    result.seed = job.stream.seed;
    Ok(result)
}

/// Runs jobs on a pool of `threads` workers (0 = all cores); results keep
/// the job order.
pub fn execute_all(jobs: &[RunJob], threads: usize) -> Result<Vec<Result<RunResult>>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| jobs.par_iter().map(execute).collect()))
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct SummaryRow {
    pub dataset: String,
    pub seed: u64,
    pub mode: Mode,
    pub delay: u64,
    pub accuracy: f64,
    pub ips: f64,
    pub drifts: u64,
    pub overlap_hit_rate: f64,
}

impl From<&RunResult> for SummaryRow {
    fn from(r: &RunResult) -> Self {
        SummaryRow {
            dataset: r.dataset.clone(),
            seed: r.seed,
            mode: r.mode,
            delay: r.delay,
            accuracy: r.accuracy,
            ips: r.instances_per_second,
            drifts: r.drifts(),
            overlap_hit_rate: r.overlap_hit_rate(),
        }
    }
}

pub const SUMMARY_FILE: &str = "summary.csv";

/// File name of a run's prequential series.
pub fn series_file_name(r: &RunResult) -> String {
    let safe: String = r
        .dataset
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect();
    format!("{safe}_{}_d{}_s{}.csv", r.mode.as_str(), r.delay, r.seed)
}

/// Writes `summary.csv` and one series file per run into `dir`.
pub fn write_results(results: &[RunResult], dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let summary = dir.join(SUMMARY_FILE);
    let csv_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| Error::Csv { path, source }
    };

    let mut w = csv::Writer::from_path(&summary).map_err(csv_err(&summary))?;
    if results.is_empty() {
        w.write_record([
            "dataset",
            "seed",
            "mode",
            "delay",
            "accuracy",
            "ips",
            "drifts",
            "overlap_hit_rate",
        ])
        .map_err(csv_err(&summary))?;
    }
    for r in results {
        w.serialize(SummaryRow::from(r)).map_err(csv_err(&summary))?;
    }
    w.flush().map_err(|e| Error::io(&summary, e))?;

    let mut written = vec![summary];
    for r in results {
        let path = dir.join(series_file_name(r));
        let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
        w.write_record(["seq", "accuracy"]).map_err(csv_err(&path))?;
        for (seq, acc) in &r.prequential {
            w.write_record([seq.to_string(), acc.to_string()])
                .map_err(csv_err(&path))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

pub fn read_summary(path: impl AsRef<Path>) -> Result<Vec<SummaryRow>> {
    let path = path.as_ref();
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize().collect::<std::result::Result<_, _>>().map_err(csv_err)
}
