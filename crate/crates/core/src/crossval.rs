//! k-fold cross-validation of the expected loss over a λ grid.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::biasvariance::check_grid;
use crate::datagen::{split_folds, Dataset, FoldSplit};
use crate::erm::{empirical_error, fit, TrainerConfig};
use crate::error::{Error, Result};
use crate::hypotheses::{HypothesisClass, LossFn};
use crate::rng;
use crate::scalar::Scalar;

pub const DEFAULT_GRID_POINTS: usize = 12;
pub const DEFAULT_HOLDOUT_FRACTION: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CVResult {
    pub lambda_grid: Vec<f64>,
    /// `per_fold_errors[j][k]`: test error on fold `j` of the fit at `λ_k`.
    pub per_fold_errors: Vec<Vec<f64>>,
    pub ahat_el: Vec<f64>,
    /// Error of the whole-sample fit on the whole sample, per `λ`.
    pub train_errors: Vec<f64>,
    pub lambda_hat: f64,
    pub r: usize,
}

impl CVResult {
    /// Columns `lambda,ael_hat,train_error,fold_1..fold_r`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,ael_hat,train_error");
        for j in 1..=self.per_fold_errors.len() {
            out.push_str(&format!(",fold_{j}"));
        }
        out.push('\n');
        for (k, lam) in self.lambda_grid.iter().enumerate() {
            out.push_str(&format!("{},{},{}", lam, self.ahat_el[k], self.train_errors[k]));
            for fold in &self.per_fold_errors {
                out.push_str(&format!(",{}", fold[k]));
            }
            out.push('\n');
        }
        out
    }
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::config("log grid needs 0 < lo < hi"));
    }
    if count < 2 {
        return Err(Error::config("log grid needs at least 2 points"));
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut g: Vec<f64> = (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect();
    g[0] = lo;
    g[count - 1] = hi;
    Ok(g)
}

/// Argmin of `ahat_el`; among equal values the largest `λ` wins.
pub fn select_lambda(res: &CVResult) -> f64 {
    let mut best = 0;
    for (k, &v) in res.ahat_el.iter().enumerate() {
        if v <= res.ahat_el[best] {
            best = k;
        }
    }
    res.lambda_grid[best]
}

fn sweep<T: Scalar>(
    ds: &Dataset<T>,
    f: &HypothesisClass<T>,
    l: LossFn,
    grid: &[f64],
    parts: &[(Vec<usize>, Vec<usize>)],
    cfg: &TrainerConfig,
) -> Result<CVResult> {
    check_grid(grid)?;
    let subsets: Vec<(Dataset<T>, Dataset<T>)> = parts
        .iter()
        .map(|(tr, te)| Ok((ds.select(tr)?, ds.select(te)?)))
        .collect::<Result<_>>()?;
    let cells: Vec<(usize, usize)> = (0..parts.len())
        .flat_map(|j| (0..grid.len()).map(move |k| (j, k)))
        .collect();
    let errs: Vec<f64> = cells
        .par_iter()
        .map(|&(j, k)| {
            let (train, test) = &subsets[j];
            let h = fit(f, train, l, grid[k], cfg)?.hypothesis;
            Ok(empirical_error(&h, test, l)?.f64())
        })
        .collect::<Result<_>>()?;
    let per_fold_errors: Vec<Vec<f64>> = errs.chunks(grid.len()).map(<[f64]>::to_vec).collect();
    let train_errors: Vec<f64> = grid
        .par_iter()
        .map(|&lam| {
            let h = fit(f, ds, l, lam, cfg)?.hypothesis;
            Ok(empirical_error(&h, ds, l)?.f64())
        })
        .collect::<Result<_>>()?;
    let r = per_fold_errors.len();
    let ahat_el: Vec<f64> = (0..grid.len())
        .map(|k| per_fold_errors.iter().map(|row| row[k]).sum::<f64>() / r as f64)
        .collect();
    let mut res = CVResult {
        lambda_grid: grid.to_vec(),
        per_fold_errors,
        ahat_el,
        train_errors,
        lambda_hat: grid[0],
        r,
    };
    res.lambda_hat = select_lambda(&res);
    Ok(res)
}

/// Cross-validated error over `λ_grid` using a given fold assignment: each
/// fit uses everything outside fold `j` and is scored on fold `j`.
pub fn cv_sweep_with_split<T: Scalar>(
    ds: &Dataset<T>,
    f: &HypothesisClass<T>,
    l: LossFn,
    lambda_grid: &[f64],
    split: &FoldSplit,
    cfg: &TrainerConfig,
) -> Result<CVResult> {
    if split.assignments.len() != ds.len() {
        return Err(Error::input("fold assignment does not match the sample size"));
    }
    let parts: Vec<_> = (0..split.r)
        .map(|j| (split.train_indices(j), split.test_indices(j)))
        .collect();
    sweep(ds, f, l, lambda_grid, &parts, cfg)
}

/// `r`-fold cross-validation with folds drawn from `seed`. `r = 1` is a
/// single holdout split with a quarter of the sample held out.
pub fn cv_sweep<T: Scalar>(
    ds: &Dataset<T>,
    f: &HypothesisClass<T>,
    l: LossFn,
    lambda_grid: &[f64],
    r: usize,
    cfg: &TrainerConfig,
    seed: u64,
) -> Result<CVResult> {
    if r == 1 {
        return holdout_sweep(ds, f, l, lambda_grid, DEFAULT_HOLDOUT_FRACTION, cfg, seed);
    }
    let split = split_folds(ds, r, seed)?;
    cv_sweep_with_split(ds, f, l, lambda_grid, &split, cfg)
}

/// One random train/test split with `test_fraction` of the sample held out.
pub fn holdout_sweep<T: Scalar>(
    ds: &Dataset<T>,
    f: &HypothesisClass<T>,
    l: LossFn,
    lambda_grid: &[f64],
    test_fraction: f64,
    cfg: &TrainerConfig,
    seed: u64,
) -> Result<CVResult> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::config("holdout test fraction must lie in (0, 1)"));
    }
    let n = ds.len();
    if n < 2 {
        return Err(Error::config("holdout needs at least 2 samples"));
    }
    let n_test = ((n as f64 * test_fraction).round() as usize).clamp(1, n - 1);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::stream(seed, "holdout", 0));
    let mut test = order[..n_test].to_vec();
    let mut train = order[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    sweep(ds, f, l, lambda_grid, &[(train, test)], cfg)
}
