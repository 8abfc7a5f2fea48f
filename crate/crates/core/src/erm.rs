//! Empirical and population errors, regularized objectives and fitters.
//!
//! Fitters by class kind:
//!
//! * finite: exact argmin by enumeration, ties to the lowest member index;
//! * ridge-linear (square loss): closed form `(XᵀX + nλI)⁻¹Xᵀy`;
//! * linear-threshold: the same closed form against `±1` targets, then
//!   sign-thresholded;
//! * lasso-linear: cyclic coordinate descent;
//! * mlp: mini-batch or full-batch gradient descent on the square loss with
//!   multiple random restarts and optional early stopping.
//!
//! Penalties never include bias terms.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::{Dataset, Generator, GeneratorKind, Task};
use crate::error::{check_dim, Error, Result};
use crate::hypotheses::{
    ClassKind, Constraint, Hypothesis, HypothesisClass, LossFn, Model, NormOrder, OutputMode,
};
use crate::linalg::cholesky_solve;
use crate::mlp::Mlp;
use crate::rng;
use crate::scalar::{dot, mean_stderr, norm1, norm2_sq, Scalar};

const LASSO_TOL: f64 = 1e-8;
const LASSO_MAX_SWEEPS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EarlyStopping {
    pub validation_fraction: f64,
    pub patience: usize,
}

/// Gradient-descent settings. Only the MLP fitter reads most of these.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainerConfig {
    pub max_epochs: usize,
    pub learning_rate: f64,
    /// `None` means full batch.
    pub batch_size: Option<usize>,
    pub restarts: usize,
    /// `None` means `1/√fan_in` per layer.
    pub init_scale: Option<f64>,
    pub early_stopping: Option<EarlyStopping>,
    /// Stop once the per-epoch objective improves by less than this.
    pub tolerance: f64,
    /// Stop once every training target's sign is reproduced.
    pub stop_on_interpolation: bool,
    pub record_trace: bool,
    pub seed: u64,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig {
            max_epochs: 500,
            learning_rate: 0.05,
            batch_size: None,
            restarts: 1,
            init_scale: None,
            early_stopping: None,
            tolerance: 1e-12,
            stop_on_interpolation: false,
            record_trace: false,
            seed: 0,
        }
    }
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::config("restarts must be at least 1"));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::config("learning_rate must be positive"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::config("tolerance must be positive"));
        }
        if self.batch_size == Some(0) {
            return Err(Error::config("batch_size must be positive"));
        }
        if let Some(s) = self.init_scale {
            if !(s > 0.0) {
                return Err(Error::config("init_scale must be positive"));
            }
        }
        if let Some(es) = self.early_stopping {
            if !(es.validation_fraction > 0.0 && es.validation_fraction < 1.0) {
                return Err(Error::config("validation_fraction must lie in (0, 1)"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub epoch: usize,
    pub train_objective: f64,
    pub validation_error: Option<f64>,
    pub best_validation_error: Option<f64>,
}

/// Renders a fit trace as CSV.
pub fn trace_csv(trace: &[TraceRow]) -> String {
    let mut out = String::from("epoch,train_objective,validation_error,best_validation_error\n");
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in trace {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.epoch,
            r.train_objective,
            opt(r.validation_error),
            opt(r.best_validation_error)
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct FitResult<T> {
    pub hypothesis: Hypothesis<T>,
    /// Regularized objective under the requested loss; the minimum over restarts.
    pub final_objective: T,
    pub epochs_run: usize,
    pub restart_index: usize,
    pub stopped_early: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceRow>,
}

fn check_loss_task<T: Scalar>(ds: &Dataset<T>, l: LossFn) -> Result<()> {
    if l == LossFn::ZeroOne && ds.task() != Task::Classification {
        return Err(Error::input("zero-one loss needs a classification dataset"));
    }
    Ok(())
}

fn pointwise_loss<T: Scalar>(l: LossFn, y: T, pred: T) -> Result<T> {
    match l {
        LossFn::ZeroOne => l.eval(y, pred.sign_pm()),
        LossFn::Square => l.eval(y, pred),
    }
}

/// `(1/n) Σ ℓ(yᵢ, f(xᵢ))`. Under zero-one loss predictions are thresholded
/// with the `sign(0) = +1` rule.
pub fn empirical_error<T: Scalar>(f: &Hypothesis<T>, s: &Dataset<T>, l: LossFn) -> Result<T> {
    check_loss_task(s, l)?;
    let mut total = T::zero();
    for smp in s.samples() {
        total += pointwise_loss(l, smp.y, f.predict(&smp.x)?)?;
    }
    Ok(total / T::of_usize(s.len()))
}

pub fn empirical_error_of_predictions<T: Scalar>(preds: &[T], ys: &[T], l: LossFn) -> Result<T> {
    check_dim("predictions", preds.len(), ys.len())?;
    if ys.is_empty() {
        return Err(Error::input("empty sample"));
    }
    let mut total = T::zero();
    for (&p, &y) in preds.iter().zip(ys) {
        total += pointwise_loss(l, y, p)?;
    }
    Ok(total / T::of_usize(ys.len()))
}

/// Closed form of `E_P[ℓ_f]` when one is known.
pub fn analytic_population_error<T: Scalar>(f: &Hypothesis<T>, gen: &Generator, l: LossFn) -> Option<f64> {
    let Model::Linear { weights, bias } = &f.model else {
        return None;
    };
    if weights.len() != gen.feature_dim {
        return None;
    }
    let b = bias.map_or(0.0, |b| b.f64());
    match (gen.kind, l, f.output_mode) {
        (GeneratorKind::LinearGaussianRegression, LossFn::Square, OutputMode::RealValued) => {
            // x ~ N(0, I): E(y − w·x − b)² = ‖w − w*‖² + b² + σ².
            let d2: f64 = weights
                .iter()
                .zip(&gen.true_weights)
                .map(|(w, t)| (w.f64() - t).powi(2))
                .sum();
            Some(d2 + b * b + gen.noise_sigma * gen.noise_sigma)
        }
        (GeneratorKind::LinearThresholdClassification, LossFn::ZeroOne, OutputMode::SignThresholded)
            if b == 0.0 && !gen.random_labels =>
        {
            let w: Vec<f64> = weights.iter().map(|v| v.f64()).collect();
            let nw = dot(&w, &w).sqrt();
            let nt = dot(&gen.true_weights, &gen.true_weights).sqrt();
            if nt == 0.0 {
                return None;
            }
            let q = gen.label_flip_prob;
            if nw == 0.0 {
                // constant +1 prediction against symmetric labels
                return Some(0.5);
            }
            let cos = (dot(&w, &gen.true_weights) / (nw * nt)).clamp(-1.0, 1.0);
            let disagreement = cos.acos() / std::f64::consts::PI;
            Some(q + (1.0 - 2.0 * q) * disagreement)
        }
        _ => None,
    }
}

/// Monte-Carlo estimate of `E_P[ℓ_f]` from `m` fresh draws, with its
/// standard error.
pub fn population_error_mc<T: Scalar>(
    f: &Hypothesis<T>,
    gen: &Generator,
    l: LossFn,
    m: usize,
    seed: u64,
) -> Result<(T, T)> {
    if m < 2 {
        return Err(Error::config("need at least 2 draws"));
    }
    gen.validate()?;
    if l == LossFn::ZeroOne && gen.task() != Task::Classification {
        return Err(Error::input("zero-one loss needs a classification generator"));
    }
    const CHUNK: usize = 4096;
    let chunks: Vec<Vec<T>> = (0..m.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut r = rng::stream(seed, "population", c as u64);
            let len = CHUNK.min(m - c * CHUNK);
            (0..len)
                .map(|_| {
                    let s = gen.sample::<T>(&mut r);
                    pointwise_loss(l, s.y, f.predict(&s.x)?)
                })
                .collect::<Result<Vec<T>>>()
        })
        .collect::<Result<_>>()?;
    let all: Vec<T> = chunks.into_iter().flatten().collect();
    Ok(mean_stderr(&all))
}

/// Population error `E_P[ℓ_f]`; exact (stderr 0) when a closed form exists,
/// Monte Carlo over `m` draws otherwise.
pub fn population_error<T: Scalar>(
    f: &Hypothesis<T>,
    gen: &Generator,
    l: LossFn,
    m: usize,
    seed: u64,
) -> Result<(T, T)> {
    if m < 100 {
        return Err(Error::config("population_error needs m ≥ 100"));
    }
    gen.validate()?;
    check_dim("hypothesis feature_dim", f.feature_dim(), gen.feature_dim)?;
    if let Some(v) = analytic_population_error(f, gen, l) {
        return Ok((T::of(v), T::zero()));
    }
    population_error_mc(f, gen, l, m, seed)
}

pub fn penalty<T: Scalar>(params: &[T], order: NormOrder) -> T {
    match order {
        NormOrder::L1 => norm1(params),
        NormOrder::L2 => norm2_sq(params),
    }
}

/// `err_S[f_w] + λ·‖w‖₁` (order 1) or `+ λ·‖w‖₂²` (order 2).
pub fn regularized_objective<T: Scalar>(
    f: &Hypothesis<T>,
    s: &Dataset<T>,
    l: LossFn,
    lambda: f64,
    order: NormOrder,
) -> Result<T> {
    if !(lambda >= 0.0) {
        return Err(Error::config("λ must be nonnegative"));
    }
    let params = f.penalized_params()?;
    let emp = empirical_error(f, s, l)?;
    if lambda == 0.0 {
        return Ok(emp);
    }
    Ok(emp + T::of(lambda) * penalty(&params, order))
}

fn class_penalty(f: &HypothesisClass<impl Scalar>, lambda: f64, default: NormOrder) -> (f64, NormOrder) {
    match f.constraint {
        Some(Constraint::Penalty { lambda: cl, order }) if lambda == 0.0 => (cl, order),
        Some(Constraint::Penalty { order, .. }) => (lambda, order),
        _ => (lambda, default),
    }
}

/// Regularized ERM over `F` on `S`.
pub fn fit<T: Scalar>(
    f: &HypothesisClass<T>,
    s: &Dataset<T>,
    l: LossFn,
    lambda: f64,
    cfg: &TrainerConfig,
) -> Result<FitResult<T>> {
    if !(lambda >= 0.0) {
        return Err(Error::config("λ must be nonnegative"));
    }
    check_loss_task(s, l)?;
    check_dim("dataset feature_dim", s.feature_dim(), f.feature_dim)?;
    match &f.kind {
        ClassKind::Finite { members } => fit_finite(members, s, l, lambda),
        ClassKind::RidgeLinear { bias } => {
            if l != LossFn::Square {
                return Err(Error::unsupported("ridge-linear fits use the square loss"));
            }
            if let Some(Constraint::NormBound { c, order }) = f.constraint {
                if order != NormOrder::L2 {
                    return Err(Error::unsupported("ridge classes take an L2 norm bound"));
                }
                return fit_ridge_bounded(s, *bias, c);
            }
            let (lam, order) = class_penalty(f, lambda, NormOrder::L2);
            if order != NormOrder::L2 {
                return Err(Error::unsupported("ridge classes use the L2 penalty"));
            }
            let h = ridge(s, lam, *bias, OutputMode::RealValued)?;
            finish_exact(h, s, l, lam, NormOrder::L2)
        }
        ClassKind::LinearThreshold { bias } => {
            let (lam, _) = class_penalty(f, lambda, NormOrder::L2);
            let h = ridge(s, lam, *bias, OutputMode::SignThresholded)?;
            finish_exact(h, s, l, lam, NormOrder::L2)
        }
        ClassKind::LassoLinear { bias } => {
            if l != LossFn::Square {
                return Err(Error::unsupported("lasso-linear fits use the square loss"));
            }
            if let Some(Constraint::NormBound { c, order }) = f.constraint {
                if order != NormOrder::L1 {
                    return Err(Error::unsupported("lasso classes take an L1 norm bound"));
                }
                return fit_lasso_bounded(s, *bias, c);
            }
            let (lam, order) = class_penalty(f, lambda, NormOrder::L1);
            if order != NormOrder::L1 {
                return Err(Error::unsupported("lasso classes use the L1 penalty"));
            }
            let (h, sweeps) = lasso(s, lam, *bias)?;
            let mut r = finish_exact(h, s, l, lam, NormOrder::L1)?;
            r.epochs_run = sweeps;
            Ok(r)
        }
        ClassKind::Mlp { activation, .. } => {
            if matches!(f.constraint, Some(Constraint::NormBound { .. })) {
                return Err(Error::unsupported("norm-bounded MLP classes cannot be fitted"));
            }
            let (lam, order) = class_penalty(f, lambda, NormOrder::L2);
            let widths = f.mlp_widths().expect("mlp class");
            let targets = s.ys();
            fit_mlp(&widths, *activation, s, &targets, l, lam, order, cfg)
        }
    }
}

fn finish_exact<T: Scalar>(
    h: Hypothesis<T>,
    s: &Dataset<T>,
    l: LossFn,
    lambda: f64,
    order: NormOrder,
) -> Result<FitResult<T>> {
    let final_objective = regularized_objective(&h, s, l, lambda, order)?;
    Ok(FitResult {
        hypothesis: h,
        final_objective,
        epochs_run: 0,
        restart_index: 0,
        stopped_early: false,
        trace: Vec::new(),
    })
}

fn fit_finite<T: Scalar>(
    members: &[Hypothesis<T>],
    s: &Dataset<T>,
    l: LossFn,
    lambda: f64,
) -> Result<FitResult<T>> {
    let mut best: Option<(usize, T)> = None;
    for (i, h) in members.iter().enumerate() {
        let obj = if lambda == 0.0 {
            empirical_error(h, s, l)?
        } else {
            regularized_objective(h, s, l, lambda, NormOrder::L2)?
        };
        // strict comparison keeps the lowest index among ties
        if best.is_none_or(|(_, b)| obj < b) {
            best = Some((i, obj));
        }
    }
    let (i, obj) = best.expect("finite classes are nonempty");
    Ok(FitResult {
        hypothesis: members[i].clone(),
        final_objective: obj,
        epochs_run: 0,
        restart_index: i,
        stopped_early: false,
        trace: Vec::new(),
    })
}

/// Closed-form ridge `(XᵀX + nλD)⁻¹Xᵀy`, `D` the identity on weights and
/// zero on the optional intercept.
pub fn ridge<T: Scalar>(s: &Dataset<T>, lambda: f64, bias: bool, mode: OutputMode) -> Result<Hypothesis<T>> {
    let p = s.feature_dim();
    let d = p + bias as usize;
    let n = s.len();
    let mut a = vec![T::zero(); d * d];
    let mut b = vec![T::zero(); d];
    let mut row = vec![T::one(); d];
    for smp in s.samples() {
        row[..p].copy_from_slice(&smp.x);
        for i in 0..d {
            b[i] += row[i] * smp.y;
            for j in 0..=i {
                a[i * d + j] += row[i] * row[j];
            }
        }
    }
    for i in 0..d {
        for j in 0..i {
            a[j * d + i] = a[i * d + j];
        }
    }
    let shrink = T::of(lambda) * T::of_usize(n);
    for i in 0..p {
        a[i * d + i] += shrink;
    }
    let sol = cholesky_solve(a, &b)?;
    Ok(Hypothesis::linear(
        sol[..p].to_vec(),
        bias.then(|| sol[p]),
        mode,
    ))
}

fn soft_threshold<T: Scalar>(v: T, t: T) -> T {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        T::zero()
    }
}

/// Cyclic coordinate descent on `(1/n)‖y − Xw − b‖² + λ‖w‖₁`.
///
/// Returns the hypothesis and the number of sweeps.
pub fn lasso<T: Scalar>(s: &Dataset<T>, lambda: f64, bias: bool) -> Result<(Hypothesis<T>, usize)> {
    if !(lambda >= 0.0) {
        return Err(Error::config("λ must be nonnegative"));
    }
    let p = s.feature_dim();
    let n = s.len();
    let nf = T::of_usize(n);
    let xs: Vec<&[T]> = s.xs().collect();
    let mut resid = s.ys();
    let z: Vec<T> = (0..p)
        .map(|j| xs.iter().map(|x| x[j] * x[j]).sum::<T>() / nf)
        .collect();
    let half_lambda = T::of(lambda / 2.0);
    let mut w = vec![T::zero(); p];
    let mut b = T::zero();
    let tol = T::of(LASSO_TOL);
    let mut sweeps = 0;
    while sweeps < LASSO_MAX_SWEEPS {
        sweeps += 1;
        let mut max_step = T::zero();
        if bias {
            let shift = resid.iter().copied().sum::<T>() / nf;
            b += shift;
            resid.iter_mut().for_each(|r| *r -= shift);
            max_step = max_step.max(shift.abs());
        }
        for j in 0..p {
            if z[j] == T::zero() {
                continue;
            }
            let rho = xs.iter().zip(&resid).map(|(x, &r)| x[j] * r).sum::<T>() / nf + z[j] * w[j];
            let new = soft_threshold(rho, half_lambda) / z[j];
            let step = new - w[j];
            if step != T::zero() {
                for (x, r) in xs.iter().zip(resid.iter_mut()) {
                    *r -= x[j] * step;
                }
                w[j] = new;
            }
            max_step = max_step.max(step.abs());
        }
        if max_step < tol {
            break;
        }
    }
    Ok((
        Hypothesis::linear(w, bias.then_some(b), OutputMode::RealValued),
        sweeps,
    ))
}

fn weight_norm<T: Scalar>(h: &Hypothesis<T>, order: NormOrder) -> T {
    let w = h.penalized_params().expect("linear hypothesis");
    match order {
        NormOrder::L1 => norm1(&w),
        NormOrder::L2 => norm2_sq(&w).sqrt(),
    }
}

/// Smallest λ on a bisection in log-space with `‖ŵ(λ)‖ ≤ c`, using the
/// monotone λ ↦ ‖ŵ(λ)‖ correspondence.
fn bisect_lambda<T: Scalar, F>(c: f64, order: NormOrder, solve: F) -> Result<(Hypothesis<T>, f64)>
where
    F: Fn(f64) -> Result<Hypothesis<T>>,
{
    if !(c >= 0.0) {
        return Err(Error::config("norm bound c must be nonnegative"));
    }
    if let Ok(h) = solve(0.0) {
        if weight_norm(&h, order).f64() <= c {
            return Ok((h, 0.0));
        }
    }
    let (mut lo, mut hi) = (1e-12f64, 1.0f64);
    while weight_norm(&solve(hi)?, order).f64() > c {
        lo = hi;
        hi *= 10.0;
        if hi > 1e12 {
            break;
        }
    }
    for _ in 0..100 {
        let mid = (lo * hi).sqrt();
        if weight_norm(&solve(mid)?, order).f64() > c {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo < 1.0 + 1e-10 {
            break;
        }
    }
    Ok((solve(hi)?, hi))
}

fn fit_ridge_bounded<T: Scalar>(s: &Dataset<T>, bias: bool, c: f64) -> Result<FitResult<T>> {
    let (h, lam) = bisect_lambda(c, NormOrder::L2, |lam| ridge(s, lam, bias, OutputMode::RealValued))?;
    finish_exact(h, s, LossFn::Square, lam, NormOrder::L2)
}

fn fit_lasso_bounded<T: Scalar>(s: &Dataset<T>, bias: bool, c: f64) -> Result<FitResult<T>> {
    let (h, lam) = bisect_lambda(c, NormOrder::L1, |lam| lasso(s, lam, bias).map(|r| r.0))?;
    finish_exact(h, s, LossFn::Square, lam, NormOrder::L1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceRow {
    pub lambda: f64,
    /// `‖ŵ(λ)‖`, the constraint level `c` this λ corresponds to.
    pub norm: f64,
}

/// Norm of the ridge (order 2) or lasso (order 1) solution along a λ grid.
pub fn constraint_lambda_correspondence<T: Scalar>(
    f: &HypothesisClass<T>,
    s: &Dataset<T>,
    l: LossFn,
    lambda_grid: &[f64],
) -> Result<Vec<CorrespondenceRow>> {
    if l != LossFn::Square {
        return Err(Error::unsupported("the correspondence table uses the square loss"));
    }
    let (bias, order) = match f.kind {
        ClassKind::RidgeLinear { bias } => (bias, NormOrder::L2),
        ClassKind::LassoLinear { bias } => (bias, NormOrder::L1),
        _ => return Err(Error::unsupported("correspondence needs a ridge or lasso class")),
    };
    lambda_grid
        .iter()
        .map(|&lam| {
            let h = match order {
                NormOrder::L2 => ridge(s, lam, bias, OutputMode::RealValued)?,
                NormOrder::L1 => lasso(s, lam, bias)?.0,
            };
            Ok(CorrespondenceRow {
                lambda: lam,
                norm: weight_norm(&h, order).f64(),
            })
        })
        .collect()
}

/// Fits an MLP of the given widths to `targets` on the features of `s`.
///
/// Training minimizes the mean square loss (plus penalty) against
/// `targets`; `l` decides the output mode of the returned hypothesis and
/// the objective used to pick the best restart.
pub fn fit_mlp<T: Scalar>(
    widths: &[usize],
    activation: crate::mlp::Activation,
    s: &Dataset<T>,
    targets: &[T],
    l: LossFn,
    lambda: f64,
    order: NormOrder,
    cfg: &TrainerConfig,
) -> Result<FitResult<T>> {
    cfg.validate()?;
    check_dim("targets", targets.len(), s.len())?;
    if l == LossFn::ZeroOne && !targets.iter().all(|t| t.is_pm_one()) {
        return Err(Error::input("zero-one fits need ±1 targets"));
    }
    let n = s.len();
    let (train_idx, val_idx) = match cfg.early_stopping {
        Some(es) => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng::stream(cfg.seed, "validation-split", 0));
            if n < 2 {
                return Err(Error::config("early stopping needs at least 2 samples"));
            }
            let nv = ((n as f64) * es.validation_fraction).round() as usize;
            let nv = nv.clamp(1, n - 1);
            let mut val = order[..nv].to_vec();
            let mut tr = order[nv..].to_vec();
            val.sort_unstable();
            tr.sort_unstable();
            (tr, val)
        }
        None => ((0..n).collect(), Vec::new()),
    };
    let mode = match l {
        LossFn::ZeroOne => OutputMode::SignThresholded,
        LossFn::Square => OutputMode::RealValued,
    };
    let runs: Vec<Result<RunOutcome<T>>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            train_one(
                widths, activation, s, targets, &train_idx, &val_idx, l, lambda, order, cfg, r,
            )
        })
        .collect();
    let mut best: Option<(usize, RunOutcome<T>)> = None;
    for (r, run) in runs.into_iter().enumerate() {
        let run = run?;
        let better = match &best {
            None => true,
            Some((_, b)) => {
                run.objective < b.objective
                    || (run.objective == b.objective && run.surrogate < b.surrogate)
            }
        };
        if better {
            best = Some((r, run));
        }
    }
    let (r, run) = best.expect("restarts ≥ 1");
    if !run.surrogate.is_finite() {
        return Err(Error::Degenerate("gradient descent diverged in every restart".into()));
    }
    Ok(FitResult {
        hypothesis: Hypothesis::mlp(run.net, mode),
        final_objective: run.objective,
        epochs_run: run.epochs,
        restart_index: r,
        stopped_early: run.stopped_early,
        trace: run.trace,
    })
}

struct RunOutcome<T> {
    net: Mlp<T>,
    objective: T,
    surrogate: T,
    epochs: usize,
    stopped_early: bool,
    trace: Vec<TraceRow>,
}

fn penalty_grad<T: Scalar>(net: &Mlp<T>, mask: &[bool], lambda: T, order: NormOrder, grad: &mut [T]) {
    if lambda == T::zero() {
        return;
    }
    for ((g, &p), &m) in grad.iter_mut().zip(&net.params).zip(mask) {
        if m {
            *g += match order {
                NormOrder::L2 => T::of(2.0) * lambda * p,
                NormOrder::L1 => {
                    if p > T::zero() {
                        lambda
                    } else if p < T::zero() {
                        -lambda
                    } else {
                        T::zero()
                    }
                }
            };
        }
    }
}

fn net_penalty<T: Scalar>(net: &Mlp<T>, mask: &[bool], order: NormOrder) -> T {
    let w: Vec<T> = net
        .params
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|(&p, _)| p)
        .collect();
    penalty(&w, order)
}

fn train_one<T: Scalar>(
    widths: &[usize],
    activation: crate::mlp::Activation,
    s: &Dataset<T>,
    targets: &[T],
    train_idx: &[usize],
    val_idx: &[usize],
    l: LossFn,
    lambda: f64,
    order: NormOrder,
    cfg: &TrainerConfig,
    restart: usize,
) -> Result<RunOutcome<T>> {
    let mut init_rng = rng::stream(cfg.seed, "mlp-init", restart as u64);
    let mut batch_rng = rng::stream(cfg.seed, "mlp-batches", restart as u64);
    let mut net = Mlp::random(widths.to_vec(), activation, cfg.init_scale, &mut init_rng)?;
    let mask = net.weight_mask();
    let lam = T::of(lambda);
    let lr = T::of(cfg.learning_rate);
    let tx: Vec<&[T]> = train_idx.iter().map(|&i| s.x(i)).collect();
    let ty: Vec<T> = train_idx.iter().map(|&i| targets[i]).collect();
    let m = tx.len();
    let batch = cfg.batch_size.unwrap_or(m).min(m);
    let mut grad = vec![T::zero(); net.param_count()];
    let mut order_idx: Vec<usize> = (0..m).collect();
    let mut bx: Vec<&[T]> = Vec::with_capacity(batch);
    let mut by: Vec<T> = Vec::with_capacity(batch);
    let mut scratch = crate::mlp::Scratch::default();

    let surrogate_and_fit = |net: &Mlp<T>, scratch: &mut crate::mlp::Scratch<T>| -> (T, bool) {
        let mut total = T::zero();
        let mut all_signs = true;
        for (x, &t) in tx.iter().zip(&ty) {
            let o = net.forward_with(x, scratch);
            total += (o - t) * (o - t);
            if o.sign_pm() != t {
                all_signs = false;
            }
        }
        (total / T::of_usize(m) + lam * net_penalty(net, &mask, order), all_signs)
    };
    let val_error = |net: &Mlp<T>, scratch: &mut crate::mlp::Scratch<T>| -> Result<T> {
        let preds: Vec<T> = val_idx.iter().map(|&i| net.forward_with(s.x(i), scratch)).collect();
        let ys: Vec<T> = val_idx.iter().map(|&i| targets[i]).collect();
        empirical_error_of_predictions(&preds, &ys, l)
    };

    let (mut prev, mut interpolates) = surrogate_and_fit(&net, &mut scratch);
    let mut best_val: Option<(T, Mlp<T>)> = None;
    let mut since_best = 0;
    let mut epochs = 0;
    let mut stopped_early = false;
    let mut trace = Vec::new();
    if !val_idx.is_empty() {
        best_val = Some((val_error(&net, &mut scratch)?, net.clone()));
    }

    while epochs < cfg.max_epochs && !(cfg.stop_on_interpolation && interpolates) {
        epochs += 1;
        if batch < m {
            order_idx.shuffle(&mut batch_rng);
        }
        for chunk in order_idx.chunks(batch) {
            bx.clear();
            by.clear();
            for &i in chunk {
                bx.push(tx[i]);
                by.push(ty[i]);
            }
            net.square_loss_grad(&bx, &by, &mut grad);
            penalty_grad(&net, &mask, lam, order, &mut grad);
            for (p, g) in net.params.iter_mut().zip(&grad) {
                *p -= lr * *g;
            }
        }
        let (obj, fits) = surrogate_and_fit(&net, &mut scratch);
        interpolates = fits;
        if !obj.is_finite() {
            prev = obj;
            break;
        }
        let mut row_val = None;
        if let Some((best, _)) = &best_val {
            let v = val_error(&net, &mut scratch)?;
            row_val = Some(v.f64());
            if v < *best {
                best_val = Some((v, net.clone()));
                since_best = 0;
            } else {
                since_best += 1;
            }
        }
        if cfg.record_trace {
            trace.push(TraceRow {
                epoch: epochs,
                train_objective: obj.f64(),
                validation_error: row_val,
                best_validation_error: best_val.as_ref().map(|(b, _)| b.f64()),
            });
        }
        let improvement = prev - obj;
        prev = obj;
        if let Some(es) = cfg.early_stopping {
            if since_best >= es.patience {
                stopped_early = true;
                break;
            }
        }
        if improvement >= T::zero() && improvement < T::of(cfg.tolerance) {
            break;
        }
    }
    if let Some((_, best_net)) = best_val {
        net = best_net;
        prev = surrogate_and_fit(&net, &mut scratch).0;
    }
    let objective = if prev.is_finite() {
        let preds: Vec<T> = tx.iter().map(|x| net.forward_with(x, &mut scratch)).collect();
        empirical_error_of_predictions(&preds, &ty, l)? + lam * net_penalty(&net, &mask, order)
    } else {
        T::infinity()
    };
    Ok(RunOutcome {
        net,
        objective,
        surrogate: if prev.is_finite() { prev } else { T::infinity() },
        epochs,
        stopped_early,
        trace,
    })
}
