//! Command-line front end. Every flag can also be set through an
//! `INCADES_*` environment variable.

pub mod bench;

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{EngineConfig, SearchBackend};
use crate::detectors::DetectorKind;
use crate::distance::DistanceKind;
use crate::error::{Error, Result};
use crate::eval::{self, Mode, ProtocolSpec, RunJob, RunResult};
use crate::learners::LearnerKind;
use crate::streams::{self, DriftSchedule, GeneratorKind, SourceKind, StreamSpec};

pub use bench::{bench_tree, BenchRow};

#[derive(Debug, Parser)]
#[command(name = "incades", version, about = "Dynamic ensemble selection for drifting data streams")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the engine on a generated or file stream.
    Run(RunArgs),
    /// Write a generated (or virtually drifted) stream to CSV.
    Generate(GenerateArgs),
    /// Compare k-d tree and brute-force neighbor search on filled windows.
    BenchTree(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Ttt,
    Delayed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DetectorArg {
    Ddm,
    Rddm,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DistanceArg {
    Canberra,
    Euclidean,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    KdTree,
    BruteForce,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LearnerArg {
    HoeffdingTree,
    NaiveBayes,
}

#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// Generator name (sea, sine, stagger, agrawal, hyperplane, led,
    /// random-rbf) or `virtual` to reorder --input.
    #[arg(long, env = "INCADES_STREAM", conflicts_with = "file")]
    pub stream: Option<String>,

    /// CSV or ARFF file to read instead of a generator.
    #[arg(long, env = "INCADES_FILE")]
    pub file: Option<PathBuf>,

    /// Dataset for `--stream virtual` (CSV or ARFF).
    #[arg(long, env = "INCADES_INPUT")]
    pub input: Option<PathBuf>,

    /// Chunk size for `--stream virtual`.
    #[arg(long, env = "INCADES_CHUNK", default_value_t = 200)]
    pub chunk: usize,

    /// Instances to generate (files: read at most this many).
    #[arg(long, env = "INCADES_INSTANCES", default_value_t = 100_000)]
    pub instances: u64,

    /// Switch concepts round-robin every N instances.
    #[arg(long, env = "INCADES_DRIFT_EVERY", group = "schedule")]
    pub drift_every: Option<u64>,

    /// Gradual drift window as START,END.
    #[arg(long, env = "INCADES_GRADUAL", value_delimiter = ',', num_args = 2, group = "schedule")]
    pub gradual: Option<Vec<u64>>,

    /// Continuous drift at this rate for the whole stream (hyperplane, RBF).
    #[arg(long, env = "INCADES_DRIFT_RATE", group = "schedule")]
    pub drift_rate: Option<f64>,

    /// Keep the first concept for the whole stream.
    #[arg(long, env = "INCADES_STATIONARY", group = "schedule")]
    pub stationary: bool,

    /// Noise level; defaults to the generator's own.
    #[arg(long, env = "INCADES_NOISE")]
    pub noise: Option<f64>,

    /// CSV label column (0-based); defaults to the last column.
    #[arg(long, env = "INCADES_LABEL_COLUMN")]
    pub label_column: Option<usize>,

    /// The CSV file has no header row.
    #[arg(long, env = "INCADES_NO_HEADER")]
    pub no_header: bool,
}

impl SourceArgs {
    fn schedule(&self, kind: GeneratorKind) -> DriftSchedule {
        if let Some(period) = self.drift_every {
            DriftSchedule::Recurrent { period }
        } else if let Some(g) = &self.gradual {
            DriftSchedule::Gradual {
                start: g[0],
                end: g[1],
            }
        } else if let Some(rate) = self.drift_rate {
            DriftSchedule::Incremental { rate }
        } else if self.stationary {
            DriftSchedule::Stationary
        } else {
            kind.default_schedule(self.instances)
        }
    }

    fn file_spec(&self, path: PathBuf, seed: u64) -> StreamSpec {
        StreamSpec {
            source: SourceKind::File {
                path,
                label_column: self.label_column,
                has_header: !self.no_header,
            },
            total_instances: self.instances,
            schedule: DriftSchedule::Stationary,
            noise: None,
            seed,
        }
    }

    /// The stream for `seed` and a dataset name for result files.
    pub fn spec(&self, seed: u64) -> Result<(String, StreamSpec)> {
        if let Some(path) = &self.file {
            return Ok((file_name(path), self.file_spec(path.clone(), seed)));
        }
        let name = self
            .stream
            .as_deref()
            .ok_or_else(|| Error::config("give --stream NAME or --file PATH"))?;
        if name.eq_ignore_ascii_case("virtual") {
            let input = self
                .input
                .clone()
                .ok_or_else(|| Error::config("--stream virtual needs --input PATH"))?;
            let dataset = format!("virtual-{}", file_name(&input));
            let inner = self.file_spec(input, seed);
            return Ok((
                dataset,
                StreamSpec {
                    source: SourceKind::VirtualDrift {
                        inner: Box::new(inner),
                        chunk: self.chunk,
                    },
                    total_instances: self.instances,
                    schedule: DriftSchedule::Stationary,
                    noise: None,
                    seed,
                },
            ));
        }
        let kind = GeneratorKind::from_name(name)
            .ok_or_else(|| Error::config(format!("unknown generator {name:?}")))?;
        let spec = StreamSpec {
            source: SourceKind::Generator(kind),
            total_instances: self.instances,
            schedule: self.schedule(kind),
            noise: self.noise,
            seed,
        };
        Ok((kind.name().to_owned(), spec))
    }
}

fn file_name(path: &std::path::Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "file".into())
}

#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    /// Pool capacity D.
    #[arg(long, env = "INCADES_POOL_SIZE", default_value_t = 75)]
    pub pool_size: usize,

    /// Training instances per classifier F.
    #[arg(long, env = "INCADES_MAX_TRAINING", default_value_t = 200)]
    pub max_training: u64,

    /// Region-of-competence size.
    #[arg(short, long, env = "INCADES_K", default_value_t = 5)]
    pub k: usize,

    /// Overlap-filter majority rate.
    #[arg(long, env = "INCADES_OMEGA", default_value_t = 0.8)]
    pub omega: f64,

    /// Always run dynamic selection.
    #[arg(long, env = "INCADES_NO_OVERLAP_FILTER")]
    pub no_overlap_filter: bool,

    /// Validation window capacity W (unbounded when omitted).
    #[arg(long, env = "INCADES_WINDOW")]
    pub window: Option<usize>,

    /// Inactive-node fraction that triggers a k-d tree rebuild.
    #[arg(long, env = "INCADES_BETA", default_value_t = 0.3)]
    pub beta: f64,

    #[arg(long, env = "INCADES_DETECTOR", value_enum, default_value_t = DetectorArg::Rddm)]
    pub detector: DetectorArg,

    #[arg(long, env = "INCADES_DISTANCE", value_enum, default_value_t = DistanceArg::Canberra)]
    pub distance: DistanceArg,

    #[arg(long, env = "INCADES_BACKEND", value_enum, default_value_t = BackendArg::KdTree)]
    pub backend: BackendArg,

    #[arg(long, env = "INCADES_LEARNER", value_enum, default_value_t = LearnerArg::HoeffdingTree)]
    pub learner: LearnerArg,
}

impl EngineArgs {
    pub fn config(&self) -> EngineConfig {
        EngineConfig {
            max_window: self.window,
            pool_size: self.pool_size,
            max_training: self.max_training,
            k: self.k,
            omega: self.omega,
            overlap_filter: !self.no_overlap_filter,
            beta: self.beta,
            detector: match self.detector {
                DetectorArg::Ddm => DetectorKind::Ddm,
                DetectorArg::Rddm => DetectorKind::Rddm,
                DetectorArg::None => DetectorKind::Disabled,
            },
            distance: match self.distance {
                DistanceArg::Canberra => DistanceKind::Canberra,
                DistanceArg::Euclidean => DistanceKind::Euclidean,
            },
            backend: match self.backend {
                BackendArg::KdTree => SearchBackend::KdTree,
                BackendArg::BruteForce => SearchBackend::BruteForce,
            },
            learner: match self.learner {
                LearnerArg::HoeffdingTree => LearnerKind::HoeffdingTree,
                LearnerArg::NaiveBayes => LearnerKind::NaiveBayes,
            },
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub source: SourceArgs,

    #[command(flatten)]
    pub engine: EngineArgs,

    #[arg(long, env = "INCADES_MODE", value_enum, default_value_t = ModeArg::Ttt)]
    pub mode: ModeArg,

    /// Label delay for the delayed mode.
    #[arg(long, env = "INCADES_DELAY", default_value_t = 1000)]
    pub delay: u64,

    /// Share of labeled instances for the delayed mode.
    #[arg(long, env = "INCADES_LABEL_FRACTION", default_value_t = 0.5)]
    pub label_fraction: f64,

    /// Prequential accuracy window.
    #[arg(long, env = "INCADES_PREQ_WINDOW", default_value_t = 1000)]
    pub preq_window: usize,

    /// Number of runs; run i uses seed + i.
    #[arg(long, env = "INCADES_SEEDS", default_value_t = 1)]
    pub seeds: u64,

    /// Base seed.
    #[arg(long, env = "INCADES_SEED", default_value_t = 1)]
    pub seed: u64,

    /// Worker threads (0 = all cores).
    #[arg(long, env = "INCADES_JOBS", default_value_t = 0)]
    pub jobs: usize,

    /// Output directory.
    #[arg(long, env = "INCADES_OUT", default_value = "results")]
    pub out: PathBuf,
}

impl RunArgs {
    pub fn protocol(&self) -> ProtocolSpec {
        match self.mode {
            ModeArg::Ttt => ProtocolSpec {
                preq_window: self.preq_window,
                ..ProtocolSpec::test_then_train()
            },
            ModeArg::Delayed => ProtocolSpec {
                mode: Mode::DelayedPartial,
                delay: self.delay,
                label_fraction: self.label_fraction,
                preq_window: self.preq_window,
            },
        }
    }

    pub fn jobs(&self) -> Result<Vec<RunJob>> {
        let engine = self.engine.config();
        engine.validate()?;
        let protocol = self.protocol();
        protocol.validate()?;
        // file streams are deterministic, so extra seeds only matter for
        // generators and the virtual-drift reordering
        (0..self.seeds.max(1))
            .map(|i| {
                let (dataset, stream) = self.source.spec(self.seed + i)?;
                Ok(RunJob {
                    dataset,
                    stream,
                    engine: engine.clone(),
                    protocol,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub source: SourceArgs,

    #[arg(long, env = "INCADES_SEED", default_value_t = 1)]
    pub seed: u64,

    /// Output directory; the file is named after the stream and seed.
    #[arg(long, env = "INCADES_OUT", default_value = "results")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Generator providing the single stable concept.
    #[arg(long, env = "INCADES_STREAM", default_value = "sine")]
    pub stream: String,

    /// Window sizes to fill.
    #[arg(long, env = "INCADES_SIZES", value_delimiter = ',', default_values_t = [1_000usize, 10_000, 25_000, 50_000])]
    pub sizes: Vec<usize>,

    /// Classifications per window size and backend.
    #[arg(long, env = "INCADES_QUERIES", default_value_t = 100_000)]
    pub queries: usize,

    /// Instances to generate; defaults to the largest size plus the queries.
    #[arg(long, env = "INCADES_INSTANCES")]
    pub instances: Option<u64>,

    #[arg(long, env = "INCADES_SEED", default_value_t = 1)]
    pub seed: u64,

    #[arg(long, env = "INCADES_NOISE")]
    pub noise: Option<f64>,

    #[command(flatten)]
    pub engine: EngineArgs,

    #[arg(long, env = "INCADES_OUT", default_value = "results")]
    pub out: PathBuf,
}

fn print_run(r: &RunResult) {
    let state = match &r.error {
        None => String::new(),
        Some(e) => format!(" ABORTED: {e}"),
    };
    println!(
        "{} seed={} mode={} delay={} accuracy={:.4} ips={:.0} drifts={} overlap_hit_rate={:.3}{}",
        r.dataset,
        r.seed,
        r.mode.as_str(),
        r.delay,
        r.accuracy,
        r.instances_per_second,
        r.drifts(),
        r.overlap_hit_rate(),
        state
    );
}

pub fn run(args: &RunArgs) -> Result<bool> {
    let jobs = args.jobs()?;
    let outcomes = eval::execute_all(&jobs, args.jobs)?;
    let mut results = Vec::with_capacity(outcomes.len());
    let mut ok = true;
    for o in outcomes {
        let r = o?;
        print_run(&r);
        ok &= r.is_valid();
        results.push(r);
    }
    eval::write_results(&results, &args.out)?;
    Ok(ok)
}

pub fn generate(args: &GenerateArgs) -> Result<PathBuf> {
    let (dataset, spec) = args.source.spec(args.seed)?;
    let stream = streams::open(&spec)?;
    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let path = args.out.join(format!("{dataset}_seed{}.csv", args.seed));
    let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
    streams::write_csv(BufWriter::new(file), &stream.schema, stream.instances).map_err(|source| {
        Error::Csv {
            path: path.clone(),
            source,
        }
    })?;
    Ok(path)
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = match &cli.command {
        Command::Run(a) => run(a).map(|ok| if ok { 0 } else { 1 }),
        Command::Generate(a) => generate(a).map(|p| {
            println!("{}", p.display());
            0
        }),
        Command::BenchTree(a) => bench_tree(a).map(|rows| {
            for r in &rows {
                println!(
                    "{} n={} backend={} accuracy={:.4} seconds={:.3} ips={:.0}",
                    r.dataset, r.n, r.backend, r.accuracy, r.seconds, r.ips
                );
            }
            0
        }),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
