//! Synthetic generators with known distributions, dataset transforms and
//! fold splitting.
//!
//! Three generator kinds are available:
//!
//! * `linear-gaussian-regression`: `x ~ N(0, I_p)`, `y = w*·x + noise_sigma·ε`.
//! * `linear-threshold-classification`: `x ~ N(0, I_p)`, `y = sign(w*·x)`
//!   flipped with probability `label_flip_prob`.
//! * `grid-image-classification`: `k×k` images. A latent class picks one of two
//!   Gaussian blob prototypes, pixel noise of scale `noise_sigma` is added and
//!   the label is `sign(w*·x)` (flipped with `label_flip_prob`), where
//!   `w* = prototype₊ − prototype₋`.
//!
//! Labels are always encoded as `±1`. With `random_labels` set the label is an
//! independent fair coin, so the conditional mean is identically zero.

use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::rng::{self, Rng};
use crate::scalar::{dot, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    LinearGaussianRegression,
    LinearThresholdClassification,
    GridImageClassification,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Regression,
    Classification,
}

/// Descriptor of a fully known distribution `P(x, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Generator {
    pub kind: GeneratorKind,
    pub feature_dim: usize,
    #[serde(default)]
    pub true_weights: Vec<f64>,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub label_flip_prob: f64,
    #[serde(default)]
    pub random_labels: bool,
    #[serde(default)]
    pub seed: u64,
}

impl Generator {
    pub fn linear_gaussian(true_weights: Vec<f64>, noise_sigma: f64) -> Result<Self> {
        let g = Generator {
            kind: GeneratorKind::LinearGaussianRegression,
            feature_dim: true_weights.len(),
            true_weights,
            noise_sigma,
            label_flip_prob: 0.0,
            random_labels: false,
            seed: 0,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn linear_threshold(true_weights: Vec<f64>, label_flip_prob: f64) -> Result<Self> {
        let g = Generator {
            kind: GeneratorKind::LinearThresholdClassification,
            feature_dim: true_weights.len(),
            true_weights,
            noise_sigma: 0.0,
            label_flip_prob,
            random_labels: false,
            seed: 0,
        };
        g.validate()?;
        Ok(g)
    }

    /// `k×k` blob images with pixel noise `noise_sigma`.
    pub fn grid_image(k: usize, noise_sigma: f64, label_flip_prob: f64) -> Result<Self> {
        if k < 2 {
            return Err(Error::config("grid size must be at least 2"));
        }
        let (plus, minus) = grid_prototypes(k);
        let g = Generator {
            kind: GeneratorKind::GridImageClassification,
            feature_dim: k * k,
            true_weights: plus.iter().zip(&minus).map(|(a, b)| a - b).collect(),
            noise_sigma,
            label_flip_prob,
            random_labels: false,
            seed: 0,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Same marginal on `x`, labels replaced by independent fair coins.
    pub fn with_random_labels(mut self) -> Self {
        self.random_labels = true;
        self
    }

    pub fn task(&self) -> Task {
        match self.kind {
            GeneratorKind::LinearGaussianRegression => Task::Regression,
            _ => Task::Classification,
        }
    }

    pub fn grid_size(&self) -> Option<usize> {
        match self.kind {
            GeneratorKind::GridImageClassification => {
                let k = (self.feature_dim as f64).sqrt().round() as usize;
                (k * k == self.feature_dim).then_some(k)
            }
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.feature_dim == 0 {
            return Err(Error::config("feature_dim must be positive"));
        }
        if self.true_weights.len() != self.feature_dim {
            return Err(Error::config(format!(
                "true_weights has length {}, expected feature_dim {}",
                self.true_weights.len(),
                self.feature_dim
            )));
        }
        if self.true_weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::config("true_weights must be finite"));
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return Err(Error::config("noise_sigma must be a nonnegative real"));
        }
        if !(0.0..0.5).contains(&self.label_flip_prob) {
            return Err(Error::config("label_flip_prob must lie in [0, 0.5)"));
        }
        if self.kind == GeneratorKind::GridImageClassification {
            let k = self
                .grid_size()
                .ok_or_else(|| Error::config("grid-image feature_dim must be a perfect square"))?;
            let (plus, minus) = grid_prototypes(k);
            let expected: Vec<f64> = plus.iter().zip(&minus).map(|(a, b)| a - b).collect();
            if expected != self.true_weights {
                return Err(Error::config(
                    "grid-image true_weights must equal the prototype difference",
                ));
            }
        }
        if self.task() == Task::Regression && self.random_labels {
            return Err(Error::config("random_labels applies to classification kinds only"));
        }
        Ok(())
    }

    /// `h(x) = E[y | x]`.
    pub fn conditional_mean<T: Scalar>(&self, x: &[T]) -> Result<T> {
        check_dim("x", x.len(), self.feature_dim)?;
        let w: Vec<T> = self.weights();
        let s = dot(&w, x);
        Ok(match self.task() {
            Task::Regression => s,
            Task::Classification if self.random_labels => T::zero(),
            Task::Classification => T::of(1.0 - 2.0 * self.label_flip_prob) * s.sign_pm(),
        })
    }

    /// `Var[y | x]`, constant for every kind here.
    pub fn noise_variance(&self) -> f64 {
        match self.task() {
            Task::Regression => self.noise_sigma * self.noise_sigma,
            Task::Classification if self.random_labels => 1.0,
            Task::Classification => 4.0 * self.label_flip_prob * (1.0 - self.label_flip_prob),
        }
    }

    pub fn weights<T: Scalar>(&self) -> Vec<T> {
        self.true_weights.iter().map(|&w| T::of(w)).collect()
    }

    pub(crate) fn sample_x<T: Scalar>(&self, rng: &mut Rng) -> Vec<T> {
        match self.kind {
            GeneratorKind::GridImageClassification => {
                let k = self.grid_size().expect("validated grid");
                let (plus, minus) = grid_prototypes(k);
                let proto = if rng.random::<bool>() { plus } else { minus };
                proto
                    .iter()
                    .map(|&c| T::of(c) + T::of(self.noise_sigma) * rng::normal::<T>(rng))
                    .collect()
            }
            _ => (0..self.feature_dim).map(|_| rng::normal(rng)).collect(),
        }
    }

    pub(crate) fn sample_y<T: Scalar>(&self, x: &[T], rng: &mut Rng) -> T {
        let w: Vec<T> = self.weights();
        let s = dot(&w, x);
        match self.task() {
            Task::Regression => s + T::of(self.noise_sigma) * rng::normal::<T>(rng),
            Task::Classification => {
                if self.random_labels {
                    return rng::sign(rng);
                }
                let flip = rng.random::<f64>() < self.label_flip_prob;
                if flip {
                    -s.sign_pm()
                } else {
                    s.sign_pm()
                }
            }
        }
    }

    pub(crate) fn sample<T: Scalar>(&self, rng: &mut Rng) -> LabeledSample<T> {
        let x = self.sample_x(rng);
        let y = self.sample_y(&x, rng);
        LabeledSample { x, y }
    }
}

/// Blob prototypes for the two latent classes of a `k×k` grid.
///
/// The blobs are mirror images under the 180° rotation of the grid, so both
/// prototypes have equal norm and the optimal separating hyperplane passes
/// through the origin.
pub fn grid_prototypes(k: usize) -> (Vec<f64>, Vec<f64>) {
    let km1 = (k - 1) as f64;
    let width = (k as f64 / 6.0).max(0.5);
    let blob = |ci: f64, cj: f64| -> Vec<f64> {
        let mut v = Vec::with_capacity(k * k);
        for i in 0..k {
            for j in 0..k {
                let (di, dj) = (i as f64 - ci, j as f64 - cj);
                v.push((-(di * di + dj * dj) / (2.0 * width * width)).exp());
            }
        }
        v
    };
    (blob(km1 / 4.0, km1 / 4.0), blob(3.0 * km1 / 4.0, 3.0 * km1 / 4.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample<T> {
    pub x: Vec<T>,
    pub y: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum Transform {
    RandomizeLabels { seed: u64 },
    RandomizeFeatures { seed: u64 },
    Select { indices: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum Origin {
    Generated { generator: Generator, n: usize, seed: u64 },
    Imported,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub origin: Origin,
    pub transforms: Vec<Transform>,
}

/// An immutable, nonempty labeled sample `S`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset<T> {
    samples: Vec<LabeledSample<T>>,
    feature_dim: usize,
    task: Task,
    provenance: Provenance,
}

impl<T: Scalar> Dataset<T> {
    /// Builds a dataset from explicit samples.
    pub fn new(task: Task, samples: Vec<LabeledSample<T>>) -> Result<Self> {
        Self::with_origin(task, samples, Origin::Explicit)
    }

    fn with_origin(task: Task, samples: Vec<LabeledSample<T>>, origin: Origin) -> Result<Self> {
        let first = samples
            .first()
            .ok_or_else(|| Error::input("dataset must contain at least one sample"))?;
        let p = first.x.len();
        if p == 0 {
            return Err(Error::input("feature vectors must be nonempty"));
        }
        for s in &samples {
            check_dim("x", s.x.len(), p)?;
            if s.x.iter().any(|v| !v.is_finite()) || !s.y.is_finite() {
                return Err(Error::input("features and targets must be finite"));
            }
            if task == Task::Classification && !s.y.is_pm_one() {
                return Err(Error::input(format!(
                    "classification label {} is not ±1",
                    s.y
                )));
            }
        }
        Ok(Dataset {
            samples,
            feature_dim: p,
            task,
            provenance: Provenance {
                origin,
                transforms: Vec::new(),
            },
        })
    }

    pub fn from_xy(task: Task, xs: Vec<Vec<T>>, ys: Vec<T>) -> Result<Self> {
        check_dim("labels", ys.len(), xs.len())?;
        let samples = xs
            .into_iter()
            .zip(ys)
            .map(|(x, y)| LabeledSample { x, y })
            .collect();
        Self::new(task, samples)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn samples(&self) -> &[LabeledSample<T>] {
        &self.samples
    }

    pub fn x(&self, i: usize) -> &[T] {
        &self.samples[i].x
    }

    pub fn y(&self, i: usize) -> T {
        self.samples[i].y
    }

    pub fn xs(&self) -> impl Iterator<Item = &[T]> + '_ {
        self.samples.iter().map(|s| s.x.as_slice())
    }

    pub fn ys(&self) -> Vec<T> {
        self.samples.iter().map(|s| s.y).collect()
    }

    /// Sub-dataset on `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::input("selection must be nonempty"));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(Error::input(format!("index {bad} out of range")));
        }
        let mut out = self.derived(indices.iter().map(|&i| self.samples[i].clone()).collect());
        out.provenance.transforms.push(Transform::Select {
            indices: indices.to_vec(),
        });
        Ok(out)
    }

    fn derived(&self, samples: Vec<LabeledSample<T>>) -> Self {
        Dataset {
            samples,
            feature_dim: self.feature_dim,
            task: self.task,
            provenance: self.provenance.clone(),
        }
    }

    /// Writes `x1,...,xp,y` CSV with shortest round-trip floats.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let header: Vec<String> = (1..=self.feature_dim)
            .map(|j| format!("x{j}"))
            .chain(std::iter::once("y".to_string()))
            .collect();
        writeln!(w, "{}", header.join(","))?;
        for s in &self.samples {
            let row: Vec<String> = s
                .x
                .iter()
                .chain(std::iter::once(&s.y))
                .map(|v| v.to_string())
                .collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn read_csv<R: BufRead>(task: Task, r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::input("empty CSV"))?
            .map_err(|e| Error::input(e.to_string()))?;
        let cols: Vec<&str> = header.trim().split(',').collect();
        let p = cols.len().saturating_sub(1);
        let expected: Vec<String> = (1..=p).map(|j| format!("x{j}")).chain(["y".into()]).collect();
        if p == 0 || cols != expected.iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(Error::input("CSV header must be x1,...,xp,y"));
        }
        let mut samples = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::input(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let vals = line
                .trim()
                .split(',')
                .map(|f| {
                    f.trim().parse::<f64>().map(T::of).map_err(|_| {
                        Error::input(format!("line {}: cannot parse {f:?}", lineno + 2))
                    })
                })
                .collect::<Result<Vec<T>>>()?;
            check_dim("CSV row", vals.len(), p + 1)?;
            let y = vals[p];
            samples.push(LabeledSample {
                x: vals[..p].to_vec(),
                y,
            });
        }
        Self::with_origin(task, samples, Origin::Imported)
    }
}

/// Draws `n` i.i.d. samples from `gen`.
pub fn generate<T: Scalar>(gen: &Generator, n: usize, seed: u64) -> Result<Dataset<T>> {
    gen.validate()?;
    if n == 0 {
        return Err(Error::config("n must be at least 1"));
    }
    let mut rng = rng::stream(seed, "generate", gen.seed);
    let samples = (0..n).map(|_| gen.sample(&mut rng)).collect();
    Dataset::with_origin(
        gen.task(),
        samples,
        Origin::Generated {
            generator: gen.clone(),
            n,
            seed,
        },
    )
}

pub fn conditional_mean<T: Scalar>(gen: &Generator, x: &[T]) -> Result<T> {
    gen.conditional_mean(x)
}

/// Replaces every label by an independent fair ±1 coin.
pub fn randomize_labels<T: Scalar>(ds: &Dataset<T>, seed: u64) -> Result<Dataset<T>> {
    if ds.task() != Task::Classification {
        return Err(Error::unsupported(
            "label randomization requires a classification dataset",
        ));
    }
    let mut rng = rng::stream(seed, "randomize-labels", 0);
    let samples = ds
        .samples
        .iter()
        .map(|s| LabeledSample {
            x: s.x.clone(),
            y: rng::sign(&mut rng),
        })
        .collect();
    let mut out = ds.derived(samples);
    out.provenance
        .transforms
        .push(Transform::RandomizeLabels { seed });
    Ok(out)
}

/// Replaces every feature vector by i.i.d. standard normal entries.
pub fn randomize_features<T: Scalar>(ds: &Dataset<T>, seed: u64) -> Result<Dataset<T>> {
    let mut rng = rng::stream(seed, "randomize-features", 0);
    let p = ds.feature_dim();
    let samples = ds
        .samples
        .iter()
        .map(|s| LabeledSample {
            x: (0..p).map(|_| rng::normal(&mut rng)).collect(),
            y: s.y,
        })
        .collect();
    let mut out = ds.derived(samples);
    out.provenance
        .transforms
        .push(Transform::RandomizeFeatures { seed });
    Ok(out)
}

/// Random partition of the sample indices into `r` folds.
///
/// `assignments[i]` is the zero-based fold of sample `i`; fold sizes differ
/// by at most one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub r: usize,
    pub assignments: Vec<usize>,
}

impl FoldSplit {
    /// Indices of the held-out fold `j` (the test set `T_j`).
    pub fn test_indices(&self, j: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == j)
            .collect()
    }

    /// Indices of the training part `S_j`, everything outside fold `j`.
    pub fn train_indices(&self, j: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != j)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.r];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }
}

pub fn split_folds<T: Scalar>(ds: &Dataset<T>, r: usize, seed: u64) -> Result<FoldSplit> {
    split_indices(ds.len(), r, seed)
}

pub fn split_indices(n: usize, r: usize, seed: u64) -> Result<FoldSplit> {
    if r < 2 {
        return Err(Error::config("fold count r must be at least 2"));
    }
    if r > n {
        return Err(Error::config(format!("fold count r = {r} exceeds n = {n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::stream(seed, "folds", 0));
    let mut assignments = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        assignments[i] = pos % r;
    }
    Ok(FoldSplit { r, assignments })
}
