//! Monte-Carlo bias²/variance/noise decomposition of the average expected
//! square loss against generators with a known conditional mean.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::{generate, Generator};
use crate::erm::{fit, TrainerConfig};
use crate::error::{Error, Result};
use crate::hypotheses::{HypothesisClass, LossFn};
use crate::rng;
use crate::scalar::{mean_stderr, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BVDecomposition {
    pub bias_sq: f64,
    pub variance: f64,
    pub noise: f64,
    pub sum: f64,
    /// Mean of `(ĥ_S(x) − y)²` over fresh `(x, y)` per train set.
    pub aesl_direct: f64,
    pub aesl_stderr: f64,
    /// Standard error of `sum` over train sets and evaluation points.
    pub sum_stderr: f64,
    pub n_train_sets: usize,
    pub n_eval_points: usize,
}

impl BVDecomposition {
    pub fn combined_stderr(&self) -> f64 {
        self.aesl_stderr.hypot(self.sum_stderr)
    }
}

struct Prepared<T> {
    eval_x: Vec<Vec<T>>,
    target: Vec<f64>,
}

fn prepare<T: Scalar>(gen: &Generator, n_eval_points: usize, seed: u64) -> Result<Prepared<T>> {
    gen.validate()?;
    let mut r = rng::stream(seed, "bv-eval", 0);
    let eval_x: Vec<Vec<T>> = (0..n_eval_points).map(|_| gen.sample_x(&mut r)).collect();
    let target = eval_x
        .iter()
        .map(|x| gen.conditional_mean(x).map(|v: T| v.f64()))
        .collect::<Result<_>>()?;
    Ok(Prepared { eval_x, target })
}

fn decompose<T: Scalar>(
    f: &HypothesisClass<T>,
    gen: &Generator,
    n: usize,
    lambda: f64,
    cfg: &TrainerConfig,
    n_train_sets: usize,
    prep: &Prepared<T>,
    seed: u64,
) -> Result<BVDecomposition> {
    let m = prep.eval_x.len();
    // Per train set: predictions at the shared points, and the mean square
    // loss on fresh (x, y) pairs.
    let per_set: Vec<(Vec<f64>, f64)> = (0..n_train_sets as u64)
        .into_par_iter()
        .map(|t| {
            let ds = generate::<T>(gen, n, rng::derive_seed(seed, "bv-train", t))?;
            let h = fit(f, &ds, LossFn::Square, lambda, cfg)?.hypothesis;
            let preds = prep
                .eval_x
                .iter()
                .map(|x| h.predict(x).map(|v| v.f64()))
                .collect::<Result<Vec<f64>>>()?;
            let mut r = rng::stream(seed, "bv-direct", t);
            let mut loss = 0.0;
            for _ in 0..m {
                let s = gen.sample::<T>(&mut r);
                loss += (h.predict(&s.x)?.f64() - s.y.f64()).powi(2);
            }
            Ok((preds, loss / m as f64))
        })
        .collect::<Result<_>>()?;

    let tf = n_train_sets as f64;
    let mut bias_sq = 0.0;
    let mut variance = 0.0;
    // (ĥ_t(x) − h(x))² averaged over x for each t, and over t for each x
    let mut by_set = vec![0.0; n_train_sets];
    let mut by_point = vec![0.0; m];
    for j in 0..m {
        let mean = per_set.iter().map(|(p, _)| p[j]).sum::<f64>() / tf;
        let var = per_set.iter().map(|(p, _)| (p[j] - mean).powi(2)).sum::<f64>() / tf;
        bias_sq += (mean - prep.target[j]).powi(2);
        variance += var;
        for (t, (p, _)) in per_set.iter().enumerate() {
            let e = (p[j] - prep.target[j]).powi(2);
            by_set[t] += e / m as f64;
            by_point[j] += e / tf;
        }
    }
    bias_sq /= m as f64;
    variance /= m as f64;
    let noise = gen.noise_variance();
    let direct: Vec<f64> = per_set.iter().map(|(_, l)| *l).collect();
    let (aesl_direct, aesl_stderr) = mean_stderr(&direct);
    let (_, se_t) = mean_stderr(&by_set);
    let (_, se_x) = mean_stderr(&by_point);
    Ok(BVDecomposition {
        bias_sq,
        variance,
        noise,
        sum: bias_sq + variance + noise,
        aesl_direct,
        aesl_stderr,
        sum_stderr: se_t.hypot(se_x),
        n_train_sets,
        n_eval_points: m,
    })
}

fn check_counts(n: usize, n_train_sets: usize, n_eval_points: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::config("n must be at least 1"));
    }
    if n_train_sets < 2 || n_eval_points < 2 {
        return Err(Error::config("need at least 2 train sets and 2 evaluation points"));
    }
    Ok(())
}

/// Decomposes the square-loss AESL of `F` fitted with penalty `λ` on samples
/// of size `n`.
///
/// `n_train_sets` independent samples are fitted; bias² and variance are
/// averaged over `n_eval_points` points drawn once from the generator's
/// x-marginal. The noise term is the generator's analytic conditional
/// variance. `aesl_direct` is an independent estimate from fresh `(x, y)`
/// pairs, one batch of `n_eval_points` per fitted predictor.
pub fn bias_variance_noise<T: Scalar>(
    f: &HypothesisClass<T>,
    gen: &Generator,
    n: usize,
    lambda: f64,
    cfg: &TrainerConfig,
    n_train_sets: usize,
    n_eval_points: usize,
    seed: u64,
) -> Result<BVDecomposition> {
    check_counts(n, n_train_sets, n_eval_points)?;
    let prep = prepare::<T>(gen, n_eval_points, seed)?;
    decompose(f, gen, n, lambda, cfg, n_train_sets, &prep, seed)
}

/// One decomposition per `λ`, all sharing the same train sets and
/// evaluation points.
pub fn aesl_sweep<T: Scalar>(
    f: &HypothesisClass<T>,
    gen: &Generator,
    n: usize,
    lambda_grid: &[f64],
    cfg: &TrainerConfig,
    n_train_sets: usize,
    n_eval_points: usize,
    seed: u64,
) -> Result<Vec<(f64, BVDecomposition)>> {
    check_grid(lambda_grid)?;
    check_counts(n, n_train_sets, n_eval_points)?;
    let prep = prepare::<T>(gen, n_eval_points, seed)?;
    lambda_grid
        .iter()
        .map(|&lam| Ok((lam, decompose(f, gen, n, lam, cfg, n_train_sets, &prep, seed)?)))
        .collect()
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::config("λ grid must be nonempty"));
    }
    if grid.iter().any(|l| !(*l >= 0.0) || !l.is_finite()) {
        return Err(Error::config("λ grid values must be finite and nonnegative"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config("λ grid must be strictly ascending"));
    }
    Ok(())
}

pub fn sweep_csv(rows: &[(f64, BVDecomposition)]) -> String {
    let mut out = String::from("lambda,bias_sq,variance,noise,sum,aesl_direct,stderr\n");
    for (lam, d) in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            lam,
            d.bias_sq,
            d.variance,
            d.noise,
            d.sum,
            d.aesl_direct,
            d.combined_stderr()
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(sigma: f64) -> (HypothesisClass<f64>, Generator) {
        let gen = Generator::linear_gaussian(vec![0.5, -0.4, 0.3, 0.2, -0.6], sigma).unwrap();
        (HypothesisClass::ridge_linear(5, false), gen)
    }

    #[test]
    fn correctly_specified_ridge() {
        let (f, gen) = setup(0.5);
        let cfg = TrainerConfig::default();
        let d = bias_variance_noise(&f, &gen, 500, 0.0, &cfg, 200, 200, 1).unwrap();
        assert_eq!(d.noise, 0.25);
        assert!(d.bias_sq < 0.01);
        assert_eq!(d.sum, d.bias_sq + d.variance + d.noise);
        assert!((d.aesl_direct - d.sum).abs() <= 5.0 * d.combined_stderr());
    }

    #[test]
    fn heavy_penalty_shrinks_to_zero() {
        let (f, gen) = setup(0.5);
        let cfg = TrainerConfig::default();
        let d = bias_variance_noise(&f, &gen, 50, 1e6, &cfg, 100, 400, 2).unwrap();
        assert!(d.variance <= 1e-4);
        // E[(w*·x)²] = ‖w*‖² for x ~ N(0, I), estimated on the shared points
        let prep = prepare::<f64>(&gen, 400, 2).unwrap();
        let sq: Vec<f64> = prep.target.iter().map(|v| v * v).collect();
        let (m, se) = mean_stderr(&sq);
        assert!((d.bias_sq - m).abs() <= 1e-3, "{} vs {m}", d.bias_sq);
        let w2: f64 = gen.true_weights.iter().map(|w| w * w).sum();
        assert!((m - w2).abs() <= 3.0 * se + 1e-3);
    }

    #[test]
    fn noiseless_recovery() {
        let (f, gen) = setup(0.0);
        let d = bias_variance_noise(&f, &gen, 20, 0.0, &TrainerConfig::default(), 20, 50, 3).unwrap();
        assert!(d.bias_sq <= 1e-6 && d.variance <= 1e-6 && d.noise <= 1e-6);
    }

    #[test]
    fn sweep_shares_noise_and_checks_grid() {
        let (f, gen) = setup(0.5);
        let cfg = TrainerConfig::default();
        let rows = aesl_sweep(&f, &gen, 30, &[0.0, 0.1, 1.0], &cfg, 50, 50, 4).unwrap();
        assert!(rows.iter().all(|(_, d)| d.noise == 0.25));
        assert!(rows[0].1.variance >= rows[2].1.variance);
        assert!(rows[0].1.bias_sq <= rows[2].1.bias_sq);
        let csv = sweep_csv(&rows);
        assert_eq!(csv.lines().count(), 4);
        assert!(aesl_sweep(&f, &gen, 30, &[], &cfg, 50, 50, 4).is_err());
        assert!(aesl_sweep(&f, &gen, 30, &[1.0, 0.1], &cfg, 50, 50, 4).is_err());
    }
}
