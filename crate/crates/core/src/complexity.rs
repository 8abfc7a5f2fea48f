//! Rademacher complexity, the sup-correlation subproblem, and VC dimension.
//!
//! The empirical complexity of a class on `S = (z₁..zₙ)` is
//! `E_σ[ sup_{h∈F} (1/n) Σ σᵢ h(zᵢ) ]` with `σ` uniform on `{−1, +1}ⁿ`.
//!
//! * Finite classes: the sup is an exact max over members, and the
//!   expectation can be enumerated over all `2ⁿ` sign vectors for `n ≤ 20`.
//! * Linear-threshold and MLP classes: the sup is approximated by fitting
//!   the class to `σ` as targets (square-loss surrogate, best of several
//!   restarts) and scoring the thresholded correlation. The result is a
//!   lower bound on the true sup.
//! * Norm-bounded linear classes without intercept: the sup has the closed
//!   form `c·‖(1/n) Σ σᵢ xᵢ‖_*` with `‖·‖_*` the dual norm.

use std::collections::HashSet;

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::{generate, Dataset, Generator, Task};
use crate::erm::{self, fit_mlp, TrainerConfig};
use crate::error::{check_dim, Error, Result};
use crate::hypotheses::{ClassKind, Constraint, HypothesisClass, LossFn, NormOrder, OutputMode};
use crate::rng;
use crate::scalar::{mean_stderr, Scalar};

/// Largest sample size accepted by exact σ-enumeration.
pub const MAX_EXACT_N: usize = 20;
/// Largest candidate point set accepted by the shattering search.
pub const MAX_VC_POINTS: usize = 25;
pub const HISTOGRAM_BINS: usize = 20;

/// A Rademacher sign vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignVector(Vec<i8>);

impl SignVector {
    pub fn new(entries: Vec<i8>) -> Result<Self> {
        if entries.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::input("sign vector entries must be ±1"));
        }
        Ok(SignVector(entries))
    }

    /// Uniform draw from the stream `(seed, "sigma", index)`.
    pub fn sample(n: usize, seed: u64, index: u64) -> Self {
        let mut r = rng::stream(seed, "sigma", index);
        SignVector((0..n).map(|_| rng::sign::<f64>(&mut r) as i8).collect())
    }

    /// The sign vector whose bit `i` of `mask` set means `σᵢ = +1`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        SignVector((0..n).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[i8] {
        &self.0
    }

    pub fn to_scalars<T: Scalar>(&self) -> Vec<T> {
        self.0.iter().map(|&s| T::of(s as f64)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactEnumeration,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum SupSolver {
    Enumeration,
    FitBased { restarts: usize },
    ClosedForm,
}

impl SupSolver {
    /// Whether the reported sup is exact or only a lower bound.
    pub fn is_exact(self) -> bool {
        !matches!(self, SupSolver::FitBased { .. })
    }
}

/// Summary of the per-σ achieved correlations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub min: f64,
    pub max: f64,
    /// Number of σ for which the sup reached 1 (a perfect fit).
    pub perfect_fits: u64,
    /// Counts over 20 equal bins on `[−1, 1]`.
    pub histogram: Vec<u64>,
    /// Mean number of restarts a fit-based solver used per σ.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_restarts_used: Option<f64>,
    /// The sup is only a lower bound for fit-based solvers.
    pub lower_bound: bool,
}

impl Diagnostics {
    fn empty(lower_bound: bool) -> Self {
        Diagnostics {
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            perfect_fits: 0,
            histogram: vec![0; HISTOGRAM_BINS],
            mean_restarts_used: None,
            lower_bound,
        }
    }

    fn record(&mut self, v: f64) {
        self.min = self.min.min(v);
        self.max = self.max.max(v);
        if v >= 1.0 {
            self.perfect_fits += 1;
        }
        self.histogram[histogram_bin(v)] += 1;
    }

    fn merge(&mut self, other: &Diagnostics) {
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
        self.perfect_fits += other.perfect_fits;
        for (a, b) in self.histogram.iter_mut().zip(&other.histogram) {
            *a += b;
        }
    }
}

pub fn histogram_bin(v: f64) -> usize {
    let pos = ((v + 1.0) / 2.0 * HISTOGRAM_BINS as f64).floor();
    (pos.max(0.0) as usize).min(HISTOGRAM_BINS - 1)
}

/// A complexity value with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct ComplexityEstimate<T> {
    pub value: T,
    pub stderr: T,
    pub method: Method,
    pub n_sigma: u64,
    pub sup_solver: SupSolver,
    pub diagnostics: Diagnostics,
}

impl<T: Scalar> ComplexityEstimate<T> {
    /// Histogram as CSV rows `bin_lo,bin_hi,count`.
    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("bin_lo,bin_hi,count\n");
        let w = 2.0 / HISTOGRAM_BINS as f64;
        for (i, c) in self.diagnostics.histogram.iter().enumerate() {
            let lo = -1.0 + w * i as f64;
            out.push_str(&format!("{},{},{}\n", lo, lo + w, c));
        }
        out
    }
}

/// Result of one sup-correlation solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct SupCorrelation<T> {
    pub value: T,
    /// Maximizing member (finite classes) or restart (fit-based).
    pub argmax: Option<usize>,
    pub restarts_used: usize,
    pub solver: SupSolver,
}

/// The sup over `F` prepared once per sample, then queried per σ.
enum SupEngine<'a, T> {
    Matrix(Vec<Vec<T>>),
    Fit {
        class: &'a HypothesisClass<T>,
        ds: &'a Dataset<T>,
        cfg: &'a TrainerConfig,
    },
    DualNorm {
        c: T,
        order: NormOrder,
        xs: Vec<Vec<T>>,
    },
}

impl<'a, T: Scalar> SupEngine<'a, T> {
    fn new(f: &'a HypothesisClass<T>, ds: &'a Dataset<T>, cfg: &'a TrainerConfig) -> Result<Self> {
        check_dim("dataset feature_dim", ds.feature_dim(), f.feature_dim)?;
        match &f.kind {
            ClassKind::Finite { .. } => Ok(SupEngine::Matrix(f.prediction_matrix(ds)?)),
            ClassKind::LinearThreshold { .. } | ClassKind::Mlp { .. } => {
                cfg.validate()?;
                Ok(SupEngine::Fit { class: f, ds, cfg })
            }
            ClassKind::RidgeLinear { bias } | ClassKind::LassoLinear { bias } => {
                let Some(Constraint::NormBound { c, order }) = f.constraint else {
                    return Err(Error::unsupported(
                        "the sup over an unconstrained real-valued linear class is unbounded",
                    ));
                };
                if *bias {
                    return Err(Error::unsupported(
                        "the sup over linear classes with a free intercept is unbounded",
                    ));
                }
                Ok(SupEngine::DualNorm {
                    c: T::of(c),
                    order,
                    xs: ds.xs().map(<[T]>::to_vec).collect(),
                })
            }
        }
    }

    fn solver(&self) -> SupSolver {
        match self {
            SupEngine::Matrix(_) => SupSolver::Enumeration,
            SupEngine::Fit { cfg, .. } => SupSolver::FitBased {
                restarts: cfg.restarts,
            },
            SupEngine::DualNorm { .. } => SupSolver::ClosedForm,
        }
    }

    fn solve(&self, sigma: &SignVector, index: u64) -> Result<SupCorrelation<T>> {
        let s = sigma.to_scalars::<T>();
        match self {
            SupEngine::Matrix(m) => {
                let n = T::of_usize(s.len());
                let mut best: Option<(usize, T)> = None;
                for (j, row) in m.iter().enumerate() {
                    check_dim("sign vector", s.len(), row.len())?;
                    let c = row.iter().zip(&s).map(|(&h, &si)| h * si).sum::<T>() / n;
                    if best.is_none_or(|(_, b)| c > b) {
                        best = Some((j, c));
                    }
                }
                let (j, v) = best.expect("nonempty class");
                Ok(SupCorrelation {
                    value: v,
                    argmax: Some(j),
                    restarts_used: 0,
                    solver: SupSolver::Enumeration,
                })
            }
            SupEngine::DualNorm { c, order, xs } => {
                check_dim("sign vector", s.len(), xs.len())?;
                let n = T::of_usize(xs.len());
                let p = xs[0].len();
                let avg: Vec<T> = (0..p)
                    .map(|j| xs.iter().zip(&s).map(|(x, &si)| x[j] * si).sum::<T>() / n)
                    .collect();
                let dual = match order {
                    // ‖·‖₂ is self-dual; the dual of ‖·‖₁ is ‖·‖_∞.
                    NormOrder::L2 => avg.iter().map(|&v| v * v).sum::<T>().sqrt(),
                    NormOrder::L1 => avg.iter().fold(T::zero(), |a, &v| a.max(v.abs())),
                };
                Ok(SupCorrelation {
                    value: *c * dual,
                    argmax: None,
                    restarts_used: 0,
                    solver: SupSolver::ClosedForm,
                })
            }
            SupEngine::Fit { class, ds, cfg } => fit_sup(class, ds, &s, cfg, index),
        }
    }
}

fn correlation<T: Scalar>(preds: &[T], sigma: &[T]) -> T {
    preds.iter().zip(sigma).map(|(&h, &s)| h * s).sum::<T>() / T::of_usize(sigma.len())
}

fn fit_sup<T: Scalar>(
    class: &HypothesisClass<T>,
    ds: &Dataset<T>,
    sigma: &[T],
    cfg: &TrainerConfig,
    index: u64,
) -> Result<SupCorrelation<T>> {
    let solver = SupSolver::FitBased {
        restarts: cfg.restarts,
    };
    match &class.kind {
        ClassKind::LinearThreshold { bias } => {
            let relabeled = Dataset::from_xy(
                Task::Classification,
                ds.xs().map(<[T]>::to_vec).collect(),
                sigma.to_vec(),
            )?;
            let h = match erm::ridge(&relabeled, 0.0, *bias, OutputMode::SignThresholded) {
                Err(Error::Degenerate(_)) => {
                    erm::ridge(&relabeled, 1e-9, *bias, OutputMode::SignThresholded)?
                }
                other => other?,
            };
            let preds = h.predict_all(ds)?;
            Ok(SupCorrelation {
                value: correlation(&preds, sigma),
                argmax: Some(0),
                restarts_used: 1,
                solver,
            })
        }
        ClassKind::Mlp { activation, .. } => {
            let widths = class.mlp_widths().expect("mlp class");
            let mut best: Option<(usize, T)> = None;
            let mut used = 0;
            for r in 0..cfg.restarts {
                used += 1;
                let run_cfg = TrainerConfig {
                    restarts: 1,
                    seed: rng::derive_seed(cfg.seed, "sup-fit", index << 16 | r as u64),
                    early_stopping: None,
                    record_trace: false,
                    ..cfg.clone()
                };
                let fitted = fit_mlp(
                    &widths,
                    *activation,
                    ds,
                    sigma,
                    LossFn::ZeroOne,
                    0.0,
                    NormOrder::L2,
                    &run_cfg,
                )?;
                let preds = fitted.hypothesis.predict_all(ds)?;
                let c = correlation(&preds, sigma);
                if best.is_none_or(|(_, b)| c > b) {
                    best = Some((r, c));
                }
                if c >= T::one() {
                    break;
                }
            }
            let (r, v) = best.expect("restarts ≥ 1");
            Ok(SupCorrelation {
                value: v,
                argmax: Some(r),
                restarts_used: used,
                solver,
            })
        }
        _ => unreachable!("fit engine only for threshold and mlp classes"),
    }
}

/// `sup_{h∈F} (1/n) Σ σᵢ h(zᵢ)`: exact for finite classes, a lower bound
/// for fit-based classes.
pub fn sup_correlation<T: Scalar>(
    f: &HypothesisClass<T>,
    s: &Dataset<T>,
    sigma: &SignVector,
    cfg: &TrainerConfig,
) -> Result<SupCorrelation<T>> {
    check_dim("sign vector", sigma.len(), s.len())?;
    SupEngine::new(f, s, cfg)?.solve(sigma, 0)
}

/// Exact expectation over all `2ⁿ` sign vectors of the max correlation of
/// the rows of `values` (`values[member][sample]`).
///
/// Each row's partial sums are tabulated separately over the low and high
/// halves of the sample so a σ costs one addition per member.
pub fn exact_from_matrix<T: Scalar>(values: &[Vec<T>]) -> Result<(T, Diagnostics)> {
    let first = values
        .first()
        .ok_or_else(|| Error::input("class must have at least one member"))?;
    let n = first.len();
    if n == 0 {
        return Err(Error::input("sample must be nonempty"));
    }
    if n > MAX_EXACT_N {
        return Err(Error::Guard(format!(
            "exact enumeration needs n ≤ {MAX_EXACT_N} (2ⁿ sign vectors), got n = {n}"
        )));
    }
    for row in values {
        check_dim("member predictions", row.len(), n)?;
    }
    let n_lo = n / 2;
    let n_hi = n - n_lo;
    let tabulate = |row: &[T]| -> Vec<T> {
        (0..1usize << row.len())
            .map(|mask| {
                row.iter()
                    .enumerate()
                    .map(|(i, &h)| if mask >> i & 1 == 1 { h } else { -h })
                    .sum::<T>()
            })
            .collect()
    };
    let lo: Vec<Vec<T>> = values.iter().map(|r| tabulate(&r[..n_lo])).collect();
    let hi: Vec<Vec<T>> = values.iter().map(|r| tabulate(&r[n_lo..])).collect();
    let nf = T::of_usize(n);
    let blocks: Vec<(T, Diagnostics)> = (0..1usize << n_hi)
        .into_par_iter()
        .map(|b| {
            let mut diag = Diagnostics::empty(false);
            let mut total = T::zero();
            for a in 0..1usize << n_lo {
                let mut best = T::neg_infinity();
                for (l, h) in lo.iter().zip(&hi) {
                    let v = l[a] + h[b];
                    if v > best {
                        best = v;
                    }
                }
                let c = best / nf;
                diag.record(c.f64());
                total += c;
            }
            (total, diag)
        })
        .collect();
    let mut diag = Diagnostics::empty(false);
    let mut total = T::zero();
    for (t, d) in &blocks {
        total += *t;
        diag.merge(d);
    }
    Ok((total / T::of((1u64 << n) as f64), diag))
}

/// Empirical Rademacher complexity of a finite class by full enumeration.
pub fn rademacher_exact<T: Scalar>(f: &HypothesisClass<T>, s: &Dataset<T>) -> Result<ComplexityEstimate<T>> {
    if !f.is_finite() {
        return Err(Error::unsupported("exact Rademacher complexity needs a finite class"));
    }
    if s.len() > MAX_EXACT_N {
        return Err(Error::Guard(format!(
            "exact enumeration needs n ≤ {MAX_EXACT_N} (2ⁿ sign vectors), got n = {}",
            s.len()
        )));
    }
    let (value, diagnostics) = exact_from_matrix(&f.prediction_matrix(s)?)?;
    Ok(ComplexityEstimate {
        value,
        stderr: T::zero(),
        method: Method::ExactEnumeration,
        n_sigma: 1u64 << s.len(),
        sup_solver: SupSolver::Enumeration,
        diagnostics,
    })
}

/// Monte-Carlo estimate over `n_sigma` uniform sign vectors.
pub fn rademacher_mc<T: Scalar>(
    f: &HypothesisClass<T>,
    s: &Dataset<T>,
    n_sigma: usize,
    cfg: &TrainerConfig,
    seed: u64,
) -> Result<ComplexityEstimate<T>> {
    if n_sigma < 2 {
        return Err(Error::config("n_sigma must be at least 2"));
    }
    let engine = SupEngine::new(f, s, cfg)?;
    let n = s.len();
    let sups: Vec<SupCorrelation<T>> = (0..n_sigma as u64)
        .into_par_iter()
        .map(|i| engine.solve(&SignVector::sample(n, seed, i), i))
        .collect::<Result<_>>()?;
    let values: Vec<T> = sups.iter().map(|r| r.value).collect();
    let (value, stderr) = mean_stderr(&values);
    let solver = engine.solver();
    let mut diagnostics = Diagnostics::empty(!solver.is_exact());
    for v in &values {
        diagnostics.record(v.f64());
    }
    if let SupSolver::FitBased { .. } = solver {
        let used: usize = sups.iter().map(|r| r.restarts_used).sum();
        diagnostics.mean_restarts_used = Some(used as f64 / n_sigma as f64);
    }
    Ok(ComplexityEstimate {
        value,
        stderr,
        method: Method::MonteCarlo,
        n_sigma: n_sigma as u64,
        sup_solver: solver,
        diagnostics,
    })
}

/// The `t`-th dataset drawn by [`rademacher_population`].
pub fn population_sample<T: Scalar>(gen: &Generator, n: usize, seed: u64, t: usize) -> Result<Dataset<T>> {
    generate(gen, n, rng::derive_seed(seed, "population-sample", t as u64))
}

/// Population complexity `E_P[R̂ad_n(F)]` averaged over `n_samples` datasets
/// of size `n`.
///
/// With `n_sigma = None` each inner value is the exact enumeration (finite
/// classes, `n ≤ 20`); otherwise each inner value is a Monte-Carlo estimate
/// with `n_sigma` draws. The standard error is the spread of the per-sample
/// values, which carries both the sampling and the σ noise; with a single
/// sample it falls back to the inner standard error.
pub fn rademacher_population<T: Scalar>(
    f: &HypothesisClass<T>,
    gen: &Generator,
    n: usize,
    n_samples: usize,
    n_sigma: Option<usize>,
    cfg: &TrainerConfig,
    seed: u64,
) -> Result<ComplexityEstimate<T>> {
    if n == 0 || n_samples == 0 {
        return Err(Error::config("n and n_samples must be at least 1"));
    }
    let inner: Vec<ComplexityEstimate<T>> = (0..n_samples)
        .map(|t| {
            let ds = population_sample(gen, n, seed, t)?;
            match n_sigma {
                None => rademacher_exact(f, &ds),
                Some(k) => rademacher_mc(
                    f,
                    &ds,
                    k,
                    cfg,
                    rng::derive_seed(seed, "population-sigma", t as u64),
                ),
            }
        })
        .collect::<Result<_>>()?;
    let values: Vec<T> = inner.iter().map(|e| e.value).collect();
    let (value, mut stderr) = mean_stderr(&values);
    if n_samples == 1 {
        stderr = inner[0].stderr;
    }
    let mut diagnostics = Diagnostics::empty(!inner[0].sup_solver.is_exact());
    for e in &inner {
        diagnostics.merge(&e.diagnostics);
    }
    Ok(ComplexityEstimate {
        value,
        stderr,
        method: Method::MonteCarlo,
        n_sigma: inner.iter().map(|e| e.n_sigma).sum(),
        sup_solver: inner[0].sup_solver,
        diagnostics,
    })
}

/// `(R̂ad(aF + b), |a|·R̂ad(F))` by exact enumeration of both classes.
pub fn affine_class_complexity<T: Scalar>(
    f: &HypothesisClass<T>,
    a: T,
    b: T,
    s: &Dataset<T>,
) -> Result<(T, T)> {
    if !f.is_finite() {
        return Err(Error::unsupported("affine check needs a finite class"));
    }
    let m = f.prediction_matrix(s)?;
    let transformed: Vec<Vec<T>> = m
        .iter()
        .map(|row| row.iter().map(|&h| a * h + b).collect())
        .collect();
    let (lhs, _) = exact_from_matrix(&transformed)?;
    let (base, _) = exact_from_matrix(&m)?;
    Ok((lhs, a.abs() * base))
}

/// Complexity of the zero-one loss class from that of a binary class.
pub fn loss_class_complexity<T: Scalar>(rad_f: T) -> Result<T> {
    if !(rad_f >= T::zero() && rad_f <= T::one()) {
        return Err(Error::input("binary-class complexity must lie in [0, 1]"));
    }
    Ok(rad_f / T::of(2.0))
}

/// Exact complexity of the explicit loss class
/// `{(x, y) ↦ (1 − y f(x))/2 : f ∈ F}` next to `R̂ad(F)/2`.
pub fn loss_class_complexity_direct<T: Scalar>(f: &HypothesisClass<T>, s: &Dataset<T>) -> Result<(T, T)> {
    if s.task() != Task::Classification {
        return Err(Error::input("loss-class check needs ±1 labels"));
    }
    let m = f.prediction_matrix(s)?;
    if m.iter().flatten().any(|v| !v.is_pm_one()) {
        return Err(Error::input("loss-class check needs a binary class"));
    }
    let ys = s.ys();
    let half = T::of(0.5);
    let losses: Vec<Vec<T>> = m
        .iter()
        .map(|row| row.iter().zip(&ys).map(|(&h, &y)| (T::one() - y * h) * half).collect())
        .collect();
    let (direct, _) = exact_from_matrix(&losses)?;
    let (rad_f, _) = exact_from_matrix(&m)?;
    Ok((direct, loss_class_complexity(rad_f)?))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VcDimension {
    pub dimension: usize,
    /// Indices of a shattered candidate subset of that size.
    pub witness: Vec<usize>,
}

enum Realizer<T> {
    /// Bit `i` of each pattern is set when the member outputs +1 on point `i`.
    Patterns(Vec<u32>),
    Separator { points: Vec<Vec<T>>, bias: bool },
}

impl<T: Scalar> Realizer<T> {
    fn shatters(&self, subset: &[usize]) -> bool {
        let d = subset.len();
        match self {
            Realizer::Patterns(pats) => {
                let seen: HashSet<u32> = pats
                    .iter()
                    .map(|&p| {
                        subset
                            .iter()
                            .enumerate()
                            .fold(0u32, |acc, (k, &i)| acc | ((p >> i & 1) << k))
                    })
                    .collect();
                seen.len() == 1 << d
            }
            Realizer::Separator { points, bias } => (0..1u32 << d).all(|labels| {
                let pts: Vec<&[T]> = subset.iter().map(|&i| points[i].as_slice()).collect();
                let ys: Vec<bool> = (0..d).map(|k| labels >> k & 1 == 1).collect();
                linearly_separable(&pts, &ys, *bias)
            }),
        }
    }
}

/// Whether some `(w, b)` realizes the labeling under the `sign(0) = +1` rule:
/// `w·x + b ≥ 0` on positives and `w·x + b ≤ −1` on negatives.
pub fn linearly_separable<T: Scalar>(points: &[&[T]], positive: &[bool], bias: bool) -> bool {
    let Some(first) = points.first() else {
        return true;
    };
    let p = first.len();
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let free = (f64::NEG_INFINITY, f64::INFINITY);
    let w: Vec<_> = (0..p).map(|_| lp.add_var(0.0, free)).collect();
    let b = bias.then(|| lp.add_var(0.0, free));
    for (x, &pos) in points.iter().zip(positive) {
        let mut expr: Vec<_> = w.iter().zip(x.iter()).map(|(&v, c)| (v, c.f64())).collect();
        if let Some(b) = b {
            expr.push((b, 1.0));
        }
        if pos {
            lp.add_constraint(expr.as_slice(), ComparisonOp::Ge, 0.0);
        } else {
            lp.add_constraint(expr.as_slice(), ComparisonOp::Le, -1.0);
        }
    }
    lp.solve().is_ok()
}

/// Size of the largest shattered subset of `candidate_points`, capped at
/// `d_max`.
///
/// Levels are built bottom-up: a `d`-subset is only tested when all of its
/// `(d−1)`-subsets are shattered, since subsets of shattered sets are
/// shattered.
pub fn vc_dimension<T: Scalar>(
    f: &HypothesisClass<T>,
    candidate_points: &[Vec<T>],
    d_max: usize,
) -> Result<VcDimension> {
    let m = candidate_points.len();
    if m > MAX_VC_POINTS {
        return Err(Error::Guard(format!(
            "shattering search accepts at most {MAX_VC_POINTS} candidate points, got {m}"
        )));
    }
    for x in candidate_points {
        check_dim("candidate point", x.len(), f.feature_dim)?;
    }
    let realizer = match &f.kind {
        ClassKind::Finite { members } => Realizer::Patterns(
            members
                .iter()
                .map(|h| {
                    candidate_points.iter().enumerate().try_fold(0u32, |acc, (i, x)| {
                        Ok::<_, Error>(acc | ((h.predict(x)?.sign_pm() > T::zero()) as u32) << i)
                    })
                })
                .collect::<Result<_>>()?,
        ),
        ClassKind::LinearThreshold { bias } => Realizer::Separator {
            points: candidate_points.to_vec(),
            bias: *bias,
        },
        _ => {
            return Err(Error::unsupported(
                "VC dimension needs a finite or linear-threshold class",
            ))
        }
    };
    let mut best = VcDimension {
        dimension: 0,
        witness: Vec::new(),
    };
    let mut level: Vec<Vec<usize>> = vec![Vec::new()];
    for d in 1..=d_max.min(m) {
        let prev: HashSet<Vec<usize>> = level.iter().cloned().collect();
        let candidates: Vec<Vec<usize>> = level
            .iter()
            .flat_map(|s| {
                let start = s.last().map_or(0, |&l| l + 1);
                (start..m).map(move |i| {
                    let mut t = s.clone();
                    t.push(i);
                    t
                })
            })
            .filter(|t| {
                (0..t.len()).all(|skip| {
                    let sub: Vec<usize> = t
                        .iter()
                        .enumerate()
                        .filter(|&(k, _)| k != skip)
                        .map(|(_, &i)| i)
                        .collect();
                    prev.contains(&sub)
                })
            })
            .collect();
        let shattered: Vec<Vec<usize>> = candidates
            .into_par_iter()
            .filter(|t| realizer.shatters(t))
            .collect();
        if shattered.is_empty() {
            break;
        }
        best = VcDimension {
            dimension: d,
            witness: shattered[0].clone(),
        };
        level = shattered;
    }
    Ok(best)
}

/// `√(2 d ln n / n)`.
pub fn vc_rad_bound(d: usize, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::input("VC bound needs n ≥ 2"));
    }
    if d < 1 {
        return Err(Error::input("VC bound needs d ≥ 1"));
    }
    let (d, n) = (d as f64, n as f64);
    Ok((2.0 * d * n.ln() / n).sqrt())
}
