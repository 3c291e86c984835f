//! Synthetic stream generators. Constants are listed in `docs/generators.md`.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{DriftSchedule, SourceKind, StreamSpec};
use crate::error::{Error, Result};
use crate::types::{ClassLabel, FeatureVector, LabeledInstance, Schema};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    Sea,
    Sine,
    Stagger,
    Agrawal,
    Hyperplane,
    Led,
    RandomRbf,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 7] = [
        GeneratorKind::Sea,
        GeneratorKind::Sine,
        GeneratorKind::Stagger,
        GeneratorKind::Agrawal,
        GeneratorKind::Hyperplane,
        GeneratorKind::Led,
        GeneratorKind::RandomRbf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GeneratorKind::Sea => "sea",
            GeneratorKind::Sine => "sine",
            GeneratorKind::Stagger => "stagger",
            GeneratorKind::Agrawal => "agrawal",
            GeneratorKind::Hyperplane => "hyperplane",
            GeneratorKind::Led => "led",
            GeneratorKind::RandomRbf => "random-rbf",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        let n = name.to_ascii_lowercase().replace('_', "-");
        let n = if n == "randomrbf" || n == "rbf" { "random-rbf".to_owned() } else { n };
        Self::ALL.into_iter().find(|k| k.name() == n)
    }

    /// Recurrent every 10,000 for the concept-switching generators; a
    /// 500-instance gradual window at 50,000 for hyperplane and LED; constant
    /// centroid motion for RBF.
    pub fn default_schedule(self, total: u64) -> DriftSchedule {
        match self {
            GeneratorKind::Sea
            | GeneratorKind::Sine
            | GeneratorKind::Stagger
            | GeneratorKind::Agrawal => DriftSchedule::Recurrent { period: 10_000 },
            GeneratorKind::Hyperplane | GeneratorKind::Led => {
                if total > 50_500 {
                    DriftSchedule::Gradual {
                        start: 50_000,
                        end: 50_500,
                    }
                } else {
                    let start = total / 2;
                    DriftSchedule::Gradual {
                        start,
                        end: start + (total / 200).max(1),
                    }
                }
            }
            GeneratorKind::RandomRbf => DriftSchedule::Incremental {
                rate: RandomRbf::DEFAULT_SPEED,
            },
        }
    }

    pub fn build(self, noise: Option<f64>, rng: &mut ChaCha8Rng) -> Result<Box<dyn Generator>> {
        if let Some(n) = noise {
            if !(0.0..=1.0).contains(&n) {
                return Err(Error::config(format!("noise must be in [0, 1], got {n}")));
            }
        }
        Ok(match self {
            GeneratorKind::Sea => Box::new(Sea::new(noise.unwrap_or(0.1))),
            GeneratorKind::Sine => Box::new(Sine::new(noise.unwrap_or(0.0))),
            GeneratorKind::Stagger => Box::new(Stagger::new(noise.unwrap_or(0.0))),
            GeneratorKind::Agrawal => Box::new(Agrawal::new(noise.unwrap_or(0.05))),
            GeneratorKind::Hyperplane => Box::new(Hyperplane::new(noise.unwrap_or(0.05), rng)),
            GeneratorKind::Led => Box::new(Led::new(noise.unwrap_or(0.1))),
            GeneratorKind::RandomRbf => Box::new(RandomRbf::new(noise.unwrap_or(0.0), rng)),
        })
    }
}

impl std::fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One synthetic data source with a fixed set of concepts.
pub trait Generator: Send {
    fn schema(&self) -> &Schema;

    fn num_concepts(&self) -> usize {
        1
    }

    /// Draws one instance from `concept`.
    fn sample(&mut self, concept: usize, rng: &mut ChaCha8Rng) -> (Vec<f64>, u32);

    /// Rate of continuous drift inside a gradual window; 0 for generators
    /// that drift by switching concepts.
    fn default_drift_rate(&self) -> f64 {
        0.0
    }

    /// Advances continuous drift by one instance.
    fn drift_step(&mut self, _rate: f64, _rng: &mut ChaCha8Rng) {}
}

fn flip_binary(label: u32, noise: f64, rng: &mut ChaCha8Rng) -> u32 {
    if noise > 0.0 && rng.random::<f64>() < noise {
        1 - label
    } else {
        label
    }
}

fn one_hot(out: &mut Vec<f64>, value: usize, width: usize) {
    out.extend((0..width).map(|i| if i == value { 1.0 } else { 0.0 }));
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

pub struct Sea {
    schema: Schema,
    noise: f64,
}

impl Sea {
    pub const THRESHOLDS: [f64; 4] = [8.0, 9.0, 7.0, 9.5];

    pub fn new(noise: f64) -> Self {
        Sea {
            schema: Schema::numeric("sea", &["a1", "a2", "a3"], &["groupA", "groupB"]),
            noise,
        }
    }

    /// Noise-free label of a point under `concept`.
    pub fn classify(concept: usize, x: &[f64]) -> u32 {
        if x[0] + x[1] <= Self::THRESHOLDS[concept] {
            0
        } else {
            1
        }
    }
}

impl Generator for Sea {
    fn schema(&self) -> &Schema {
        &self.schema
    }

    fn num_concepts(&self) -> usize {
        4
    }

    fn sample(&mut self, concept: usize, rng: &mut ChaCha8Rng) -> (Vec<f64>, u32) {
        let x: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..10.0)).collect();
        let y = flip_binary(Self::classify(concept, &x), self.noise, rng);
        (x, y)
    }
}

pub struct Sine {
    schema: Schema,
    noise: f64,
}

impl Sine {
    pub fn new(noise: f64) -> Self {
        Sine {
            schema: Schema::numeric("sine", &["x", "y"], &["positive", "negative"]),
            noise,
        }
    }

    /// Concepts 0/1: y against sin(x); 2/3: y against 0.5 + 0.3 sin(3 pi x).
    /// Odd concepts swap the labels.
    pub fn classify(concept: usize, x: &[f64]) -> u32 {
        let below = match concept {
            0 | 1 => x[1] < x[0].sin(),
            _ => x[1] < 0.5 + 0.3 * (3.0 * std::f64::consts::PI * x[0]).sin(),
        };
        let y = if below { 0 } else { 1 };
        if concept % 2 == 1 {
            1 - y
        } else {
            y
        }
    }
}

impl Generator for Sine {
    fn schema(&self) -> &Schema {
        &self.schema
    }

    fn num_concepts(&self) -> usize {
        4
    }

    fn sample(&mut self, concept: usize, rng: &mut ChaCha8Rng) -> (Vec<f64>, u32) {
        let x = vec![rng.random::<f64>(), rng.random::<f64>()];
        let y = flip_binary(Self::classify(concept, &x), self.noise, rng);
        (x, y)
    }
}

pub struct Stagger {
    schema: Schema,
    noise: f64,
}

impl Stagger {
    pub const SIZES: [&'static str; 3] = ["small", "medium", "large"];
    pub const COLORS: [&'static str; 3] = ["red", "green", "blue"];
    pub const SHAPES: [&'static str; 3] = ["circle", "square", "triangle"];

    pub fn new(noise: f64) -> Self {
        let mut feature_names = Vec::with_capacity(9);
        for (attr, values) in [
            ("size", Self::SIZES),
            ("color", Self::COLORS),
            ("shape", Self::SHAPES),
        ] {
            feature_names.extend(values.iter().map(|v| format!("{attr}={v}")));
        }
        Stagger {
            schema: Schema {
                name: "stagger".into(),
                attribute_count: 3,
                feature_names,
                label_names: vec!["false".into(), "true".into()],
            },
            noise,
        }
    }

    pub fn rule(concept: usize, size: usize, color: usize, shape: usize) -> bool {
        match concept {
            0 => size == 0 && color == 0,
            1 => color == 1 || shape == 0,
            _ => size == 1 || size == 2,
        }
    }
}

impl Generator for Stagger {
    fn schema(&self) -> &Schema {
        &self.schema
    }

    fn num_concepts(&self) -> usize {
        3
    }

    fn sample(&mut self, concept: usize, rng: &mut ChaCha8Rng) -> (Vec<f64>, u32) {
        let size = rng.random_range(0..3);
        let color = rng.random_range(0..3);
        let shape = rng.random_range(0..3);
        let mut x = Vec::with_capacity(9);
        one_hot(&mut x, size, 3);
        one_hot(&mut x, color, 3);
        one_hot(&mut x, shape, 3);
        let y = flip_binary(Self::rule(concept, size, color, shape) as u32, self.noise, rng);
        (x, y)
    }
}

/// Raw attributes of one loan applicant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Applicant {
    pub salary: f64,
    pub commission: f64,
    pub age: f64,
    pub elevel: usize,
    pub car: usize,
    pub zipcode: usize,
    pub hvalue: f64,
    pub hyears: f64,
    pub loan: f64,
}

pub struct Agrawal {
    schema: Schema,
    perturbation: f64,
}

impl Agrawal {
    pub fn new(perturbation: f64) -> Self {
        let mut feature_names: Vec<String> =
            ["salary", "commission", "age"].iter().map(|s| s.to_string()).collect();
        feature_names.extend(names("elevel=", 5));
        feature_names.extend((1..=20).map(|c| format!("car={c}")));
        feature_names.extend(names("zipcode=", 9));
        feature_names.extend(["hvalue", "hyears", "loan"].iter().map(|s| s.to_string()));
        Agrawal {
            schema: Schema {
                name: "agrawal".into(),
                attribute_count: 9,
                feature_names,
                label_names: vec!["groupA".into(), "groupB".into()],
            },
            perturbation,
        }
    }

    /// Group A (class 0) membership under classification function `f`.
    pub fn group_a(f: usize, a: &Applicant) -> bool {
        let in_range = |v: f64, lo: f64, hi: f64| lo <= v && v <= hi;
        let (age, salary, elevel, loan) = (a.age, a.salary, a.elevel, a.loan);
        let by_age = |young: bool, middle: bool, old: bool| {
            if age < 40.0 {
                young
            } else if age < 60.0 {
                middle
            } else {
                old
            }
        };
        match f {
            0 => age < 40.0 || age >= 60.0,
            1 => by_age(
                in_range(salary, 50_000.0, 100_000.0),
                in_range(salary, 75_000.0, 125_000.0),
                in_range(salary, 25_000.0, 75_000.0),
            ),
            2 => by_age(elevel <= 1, (1..=3).contains(&elevel), (2..=4).contains(&elevel)),
            3 => by_age(
                if elevel <= 1 {
                    in_range(salary, 25_000.0, 75_000.0)
                } else {
                    in_range(salary, 50_000.0, 100_000.0)
                },
                if (1..=3).contains(&elevel) {
                    in_range(salary, 50_000.0, 100_000.0)
                } else {
                    in_range(salary, 75_000.0, 125_000.0)
                },
                if (2..=4).contains(&elevel) {
                    in_range(salary, 50_000.0, 100_000.0)
                } else {
                    in_range(salary, 25_000.0, 75_000.0)
                },
            ),
            4 => by_age(
                if in_range(salary, 50_000.0, 100_000.0) {
                    in_range(loan, 100_000.0, 300_000.0)
                } else {
                    in_range(loan, 200_000.0, 400_000.0)
                },
                if in_range(salary, 75_000.0, 125_000.0) {
                    in_range(loan, 200_000.0, 400_000.0)
                } else {
                    in_range(loan, 300_000.0, 500_000.0)
                },
                if in_range(salary, 25_000.0, 75_000.0) {
                    in_range(loan, 300_000.0, 500_000.0)
                } else {
                    in_range(loan, 100_000.0, 300_000.0)
                },
            ),
            5 => {
                let total = salary + a.commission;
                by_age(
                    in_range(total, 50_000.0, 100_000.0),
                    in_range(total, 75_000.0, 125_000.0),
                    in_range(total, 25_000.0, 75_000.0),
                )
            }
            6 => 2.0 * (salary + a.commission) / 3.0 - loan / 5.0 - 20_000.0 > 0.0,
            7 => 2.0 * (salary + a.commission) / 3.0 - 5_000.0 * elevel as f64 - 20_000.0 > 0.0,
            8 => {
                2.0 * (salary + a.commission) / 3.0 - 5_000.0 * elevel as f64 - loan / 5.0
                    - 10_000.0
                    > 0.0
            }
            _ => {
                let equity = if a.hyears >= 20.0 {
                    a.hvalue * (a.hyears - 20.0) / 10.0
                } else {
                    0.0
                };
                2.0 * (salary + a.commission) / 3.0 - 5_000.0 * elevel as f64 + equity / 5.0
                    - 10_000.0
                    > 0.0
            }
        }
    }

    fn draw(rng: &mut ChaCha8Rng) -> Applicant {
        let salary = rng.random_range(20_000.0..150_000.0);
        let commission = if salary >= 75_000.0 {
            0.0
        } else {
            rng.random_range(10_000.0..75_000.0)
        };
        let age = rng.random_range(20..=80) as f64;
        let elevel = rng.random_range(0..5);
        let car = rng.random_range(1..=20);
        let zipcode = rng.random_range(0..9);
        let hvalue = (9.0 - zipcode as f64) * 100_000.0 * (0.5 + rng.random::<f64>());
        let hyears = rng.random_range(1..=30) as f64;
        let loan = rng.random_range(0.0..500_000.0);
        Applicant {
            salary,
            commission,
            age,
            elevel,
            car,
            zipcode,
            hvalue,
            hyears,
            loan,
        }
    }

    fn perturb(&self, v: f64, range: f64, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> f64 {
        let v = v + range * (2.0 * (rng.random::<f64>() - 0.5)) * self.perturbation;
        v.clamp(lo, hi)
    }

    pub fn encode(a: &Applicant) -> Vec<f64> {
        let mut x = Vec::with_capacity(40);
        x.extend([a.salary, a.commission, a.age]);
        one_hot(&mut x, a.elevel, 5);
        one_hot(&mut x, a.car - 1, 20);
        one_hot(&mut x, a.zipcode, 9);
        x.extend([a.hvalue, a.hyears, a.loan]);
        x
    }
}

impl Generator for Agrawal {
    fn schema(&self) -> &Schema {
        &self.schema
    }

    fn num_concepts(&self) -> usize {
        10
    }

    fn sample(&mut self, concept: usize, rng: &mut ChaCha8Rng) -> (Vec<f64>, u32) {
        let mut a = Self::draw(rng);
        let y = if Self::group_a(concept, &a) { 0 } else { 1 };
        if self.perturbation > 0.0 {
            a.salary = self.perturb(a.salary, 130_000.0, 20_000.0, 150_000.0, rng);
            if a.commission > 0.0 {
                a.commission = self.perturb(a.commission, 65_000.0, 10_000.0, 75_000.0, rng);
            }
            a.age = self.perturb(a.age, 60.0, 20.0, 80.0, rng).round();
            let hrange = (9.0 - a.zipcode as f64) * 100_000.0;
            a.hvalue = self.perturb(a.hvalue, hrange, 0.0, 1_350_000.0, rng);
            a.hyears = self.perturb(a.hyears, 29.0, 1.0, 30.0, rng).round();
            a.loan = self.perturb(a.loan, 500_000.0, 0.0, 500_000.0, rng);
        }
        (Self::encode(&a), y)
    }
}

pub struct Hyperplane {
    schema: Schema,
    noise: f64,
    weights: Vec<f64>,
    directions: Vec<f64>,
}

impl Hyperplane {
    pub const DIM: usize = 10;
    pub const DRIFTING_ATTRIBUTES: usize = 2;
    pub const DEFAULT_MAGNITUDE: f64 = 0.001;
    pub const REVERSAL_PROBABILITY: f64 = 0.1;

    pub fn new(noise: f64, rng: &mut ChaCha8Rng) -> Self {
        let feature_names = names("x", Self::DIM);
        let refs: Vec<&str> = feature_names.iter().map(String::as_str).collect();
        Hyperplane {
            schema: Schema::numeric("hyperplane", &refs, &["class0", "class1"]),
            noise,
            weights: (0..Self::DIM).map(|_| rng.random::<f64>()).collect(),
            directions: (0..Self::DIM)
                .map(|i| if i < Self::DRIFTING_ATTRIBUTES { 1.0 } else { 0.0 })
                .collect(),
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl Generator for Hyperplane {
    fn schema(&self) -> &Schema {
        &self.schema
    }

    fn sample(&mut self, _concept: usize, rng: &mut ChaCha8Rng) -> (Vec<f64>, u32) {
        let x: Vec<f64> = (0..Self::DIM).map(|_| rng.random::<f64>()).collect();
        let dot: f64 = x.iter().zip(&self.weights).map(|(a, w)| a * w).sum();
        let total: f64 = self.weights.iter().sum();
        let y = if dot >= 0.5 * total { 1 } else { 0 };
        (x, flip_binary(y, self.noise, rng))
    }

    fn default_drift_rate(&self) -> f64 {
        Self::DEFAULT_MAGNITUDE
    }

    fn drift_step(&mut self, rate: f64, rng: &mut ChaCha8Rng) {
        for i in 0..Self::DRIFTING_ATTRIBUTES {
            self.weights[i] += self.directions[i] * rate;
            if rng.random::<f64>() < Self::REVERSAL_PROBABILITY {
                self.directions[i] = -self.directions[i];
            }
        }
    }
}

pub struct Led {
    schema: Schema,
    noise: f64,
}

impl Led {
    pub const ATTRIBUTES: usize = 24;
    /// Seven-segment encodings of the digits 0-9.
    pub const SEGMENTS: [[u8; 7]; 10] = [
        [1, 1, 1, 0, 1, 1, 1],
        [0, 0, 1, 0, 0, 1, 0],
        [1, 0, 1, 1, 1, 0, 1],
        [1, 0, 1, 1, 0, 1, 1],
        [0, 1, 1, 1, 0, 1, 0],
        [1, 1, 0, 1, 0, 1, 1],
        [1, 1, 0, 1, 1, 1, 1],
        [1, 0, 1, 0, 0, 1, 0],
        [1, 1, 1, 1, 1, 1, 1],
        [1, 1, 1, 1, 0, 1, 1],
    ];

    pub fn new(noise: f64) -> Self {
        let feature_names = names("a", Self::ATTRIBUTES);
        let refs: Vec<&str> = feature_names.iter().map(String::as_str).collect();
        let labels: Vec<String> = (0..10).map(|d| d.to_string()).collect();
        let label_refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        Led {
            schema: Schema::numeric("led", &refs, &label_refs),
            noise,
        }
    }

    /// Attribute index carrying segment `segment` under `concept`.
    pub fn segment_position(concept: usize, segment: usize) -> usize {
        (segment + 7 * concept) % Self::ATTRIBUTES
    }
}

impl Generator for Led {
    fn schema(&self) -> &Schema {
        &self.schema
    }

    fn num_concepts(&self) -> usize {
        4
    }

    fn sample(&mut self, concept: usize, rng: &mut ChaCha8Rng) -> (Vec<f64>, u32) {
        let digit = rng.random_range(0..10usize);
        let mut x = vec![0.0; Self::ATTRIBUTES];
        let mut informative = [false; Self::ATTRIBUTES];
        for (s, &bit) in Self::SEGMENTS[digit].iter().enumerate() {
            let flip = self.noise > 0.0 && rng.random::<f64>() < self.noise;
            let pos = Self::segment_position(concept, s);
            informative[pos] = true;
            x[pos] = f64::from(bit ^ flip as u8);
        }
        for (v, _) in x.iter_mut().zip(informative).filter(|(_, inf)| !inf) {
            *v = if rng.random::<bool>() { 1.0 } else { 0.0 };
        }
        (x, digit as u32)
    }
}

struct Centroid {
    centre: Vec<f64>,
    label: u32,
    std_dev: f64,
    speed: Vec<f64>,
}

pub struct RandomRbf {
    schema: Schema,
    noise: f64,
    centroids: Vec<Centroid>,
    chooser: WeightedIndex<f64>,
}

impl RandomRbf {
    pub const DIM: usize = 10;
    pub const CENTROIDS: usize = 50;
    pub const CLASSES: u32 = 2;
    pub const DEFAULT_SPEED: f64 = 0.0001;

    pub fn new(noise: f64, rng: &mut ChaCha8Rng) -> Self {
        let feature_names = names("x", Self::DIM);
        let refs: Vec<&str> = feature_names.iter().map(String::as_str).collect();
        let mut centroids = Vec::with_capacity(Self::CENTROIDS);
        let mut weights = Vec::with_capacity(Self::CENTROIDS);
        for _ in 0..Self::CENTROIDS {
            let centre = (0..Self::DIM).map(|_| rng.random::<f64>()).collect();
            let label = rng.random_range(0..Self::CLASSES);
            let std_dev = rng.random::<f64>();
            weights.push(rng.random::<f64>());
            let speed = unit_vector(rng, |r| r.random::<f64>() * 2.0 - 1.0);
            centroids.push(Centroid {
                centre,
                label,
                std_dev,
                speed,
            });
        }
        RandomRbf {
            schema: Schema::numeric("random-rbf", &refs, &["class0", "class1"]),
            noise,
            centroids,
            chooser: WeightedIndex::new(&weights).expect("centroid weights are positive"),
        }
    }
}

fn unit_vector(rng: &mut ChaCha8Rng, mut draw: impl FnMut(&mut ChaCha8Rng) -> f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..RandomRbf::DIM).map(|_| draw(rng)).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 0.0 {
            return v.into_iter().map(|a| a / norm).collect();
        }
    }
}

impl Generator for RandomRbf {
    fn schema(&self) -> &Schema {
        &self.schema
    }

    fn sample(&mut self, _concept: usize, rng: &mut ChaCha8Rng) -> (Vec<f64>, u32) {
        let c = &self.centroids[self.chooser.sample(rng)];
        let dir = unit_vector(rng, |r| r.sample(StandardNormal));
        let magnitude: f64 = rng.sample::<f64, _>(StandardNormal) * c.std_dev;
        let x = c.centre.iter().zip(&dir).map(|(m, d)| m + d * magnitude).collect();
        let label = c.label;
        (x, flip_binary(label, self.noise, rng))
    }

    fn default_drift_rate(&self) -> f64 {
        Self::DEFAULT_SPEED
    }

    fn drift_step(&mut self, rate: f64, _rng: &mut ChaCha8Rng) {
        for c in &mut self.centroids {
            for (m, s) in c.centre.iter_mut().zip(c.speed.iter_mut()) {
                *m += *s * rate;
                if *m > 1.0 {
                    *m = 1.0;
                    *s = -*s;
                } else if *m < 0.0 {
                    *m = 0.0;
                    *s = -*s;
                }
            }
        }
    }
}

/// A generator driven through a drift schedule.
pub struct GeneratorStream {
    generator: Box<dyn Generator>,
    rng: ChaCha8Rng,
    schedule: DriftSchedule,
    seq: u64,
    total: u64,
}

impl GeneratorStream {
    pub fn new(kind: GeneratorKind, spec: &StreamSpec) -> Result<Self> {
        if !matches!(spec.source, SourceKind::Generator(k) if k == kind) {
            return Err(Error::config("stream spec does not describe this generator"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let generator = kind.build(spec.noise, &mut rng)?;
        spec.schedule
            .validate(spec.total_instances, generator.num_concepts())?;
        if matches!(spec.schedule, DriftSchedule::Incremental { .. })
            && generator.default_drift_rate() == 0.0
        {
            return Err(Error::config(format!(
                "{kind} has no continuous drift; use an abrupt, recurrent or gradual schedule"
            )));
        }
        Ok(GeneratorStream {
            generator,
            rng,
            schedule: spec.schedule.clone(),
            seq: 0,
            total: spec.total_instances,
        })
    }

    pub fn schema(&self) -> &Schema {
        self.generator.schema()
    }

    /// Concept in force at `seq` for deterministic schedules; inside a
    /// gradual window this is the old concept.
    pub fn base_concept(&self, seq: u64) -> usize {
        let n = self.generator.num_concepts();
        match &self.schedule {
            DriftSchedule::Stationary | DriftSchedule::Incremental { .. } => 0,
            DriftSchedule::Abrupt(points) => points
                .iter()
                .take_while(|(p, _)| *p <= seq)
                .last()
                .map_or(0, |&(_, c)| c),
            DriftSchedule::Recurrent { period } => ((seq / period) % n as u64) as usize,
            DriftSchedule::Gradual { end, .. } => {
                if seq >= *end {
                    1 % n
                } else {
                    0
                }
            }
        }
    }

    fn concept_at(&mut self, seq: u64) -> usize {
        if let DriftSchedule::Gradual { start, end } = self.schedule {
            let n = self.generator.num_concepts();
            if n > 1 && (start..end).contains(&seq) {
                let p = (seq - start) as f64 / (end - start) as f64;
                return if self.rng.random::<f64>() < p { 1 % n } else { 0 };
            }
        }
        self.base_concept(seq)
    }

    fn drift_rate_at(&self, seq: u64) -> f64 {
        match self.schedule {
            DriftSchedule::Incremental { rate } => rate,
            DriftSchedule::Gradual { start, end } if (start..end).contains(&seq) => {
                self.generator.default_drift_rate()
            }
            _ => 0.0,
        }
    }
}

impl Iterator for GeneratorStream {
    type Item = LabeledInstance;

    fn next(&mut self) -> Option<LabeledInstance> {
        if self.seq >= self.total {
            return None;
        }
        let seq = self.seq;
        let concept = self.concept_at(seq);
        let (x, y) = self.generator.sample(concept, &mut self.rng);
        let rate = self.drift_rate_at(seq);
        if rate > 0.0 {
            self.generator.drift_step(rate, &mut self.rng);
        }
        self.seq += 1;
        Some(LabeledInstance::new(
            FeatureVector::new(x).expect("generators produce finite values"),
            ClassLabel(y),
            seq,
        ))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = usize::try_from(self.total - self.seq).unwrap_or(usize::MAX);
        (left, Some(left))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn collect(kind: GeneratorKind, n: u64, seed: u64) -> Vec<LabeledInstance> {
        GeneratorStream::new(kind, &StreamSpec::generator(kind, n, seed))
            .unwrap()
            .collect()
    }

    #[test]
    fn sea_rule_example() {
        assert_eq!(Sea::classify(0, &[3.9, 4.0, 9.0]), 0);
        assert_eq!(Sea::classify(0, &[4.1, 4.0, 0.0]), 1);
        assert_eq!(Sea::classify(3, &[4.1, 4.0, 0.0]), 0);
    }

    #[test]
    fn dimensions_match_schemas() {
        for kind in GeneratorKind::ALL {
            let xs = collect(kind, 50, 3);
            assert_eq!(xs.len(), 50);
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let g = kind.build(None, &mut rng).unwrap();
            let schema = g.schema();
            for (i, inst) in xs.iter().enumerate() {
                assert_eq!(inst.seq, i as u64);
                assert_eq!(inst.features.dim(), schema.dim(), "{kind}");
                assert!(inst.label.index() < schema.num_classes());
            }
        }
    }

    #[test]
    fn expected_dimensions() {
        let dims: Vec<usize> = GeneratorKind::ALL
            .iter()
            .map(|k| collect(*k, 1, 0)[0].features.dim())
            .collect();
        assert_eq!(dims, vec![3, 2, 9, 40, 10, 24, 10]);
    }

    #[test]
    fn same_seed_same_stream() {
        for kind in GeneratorKind::ALL {
            assert_eq!(collect(kind, 300, 11), collect(kind, 300, 11));
            assert_ne!(collect(kind, 300, 11), collect(kind, 300, 12));
        }
    }

    #[test]
    fn recurrent_concepts_cycle() {
        let spec = StreamSpec::generator(GeneratorKind::Stagger, 100_000, 0);
        let g = GeneratorStream::new(GeneratorKind::Stagger, &spec).unwrap();
        assert_eq!(g.base_concept(9_999), 0);
        assert_eq!(g.base_concept(10_000), 1);
        assert_eq!(g.base_concept(29_999), 2);
        assert_eq!(g.base_concept(30_000), 0);
    }

    #[test]
    fn led_lookup_without_noise() {
        let spec = StreamSpec::generator(GeneratorKind::Led, 2_000, 5).with_noise(0.0);
        for inst in GeneratorStream::new(GeneratorKind::Led, &spec).unwrap() {
            let concept = if inst.seq < 1_000 { 0 } else { 1 };
            if (1_000..1_010).contains(&inst.seq) {
                continue;
            }
            let bits: Vec<u8> = (0..7)
                .map(|s| inst.features[Led::segment_position(concept, s)] as u8)
                .collect();
            let digit = Led::SEGMENTS.iter().position(|d| d[..] == bits[..]);
            assert_eq!(digit, Some(inst.label.index()), "seq {}", inst.seq);
        }
    }

    #[test]
    fn hyperplane_step_moves_drifting_weights() {
        let mut h = Hyperplane::new(0.0, &mut ChaCha8Rng::seed_from_u64(9));
        let before = h.weights().to_vec();
        h.drift_step(0.001, &mut ChaCha8Rng::seed_from_u64(1));
        let moved: Vec<f64> = h.weights().iter().zip(&before).map(|(a, b)| (a - b).abs()).collect();
        assert!((moved[0] - 0.001).abs() < 1e-12 && (moved[1] - 0.001).abs() < 1e-12);
        assert!(moved[2..].iter().all(|&m| m == 0.0));
    }

    #[test]
    fn incremental_rejected_for_switching_generators() {
        let spec = StreamSpec::generator(GeneratorKind::Sea, 100, 0)
            .with_schedule(DriftSchedule::Incremental { rate: 0.1 });
        assert!(GeneratorStream::new(GeneratorKind::Sea, &spec).is_err());
    }

    #[test]
    fn names_round_trip() {
        for kind in GeneratorKind::ALL {
            assert_eq!(GeneratorKind::from_name(kind.name()), Some(kind));
        }
        assert_eq!(GeneratorKind::from_name("RandomRBF"), Some(GeneratorKind::RandomRbf));
        assert_eq!(GeneratorKind::from_name("nope"), None);
    }
}
