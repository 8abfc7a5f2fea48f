//! Rademacher generalization bounds and an empirical coverage check.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complexity::{rademacher_exact, rademacher_mc, MAX_EXACT_N};
use crate::datagen::{generate, Generator, Task};
use crate::erm::{empirical_error, fit, population_error, TrainerConfig};
use crate::error::{Error, Result};
use crate::hypotheses::{HypothesisClass, LossFn};
use crate::rng;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundVariant {
    /// Bounded loss in `[0, 1]`, `rad` the complexity of the loss class:
    /// `emp + 2·rad + confidence`.
    General,
    /// Zero-one loss, `rad` the complexity of the ±1 hypothesis class:
    /// `emp + rad + confidence`.
    Classification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub empirical_error: f64,
    pub complexity_term: f64,
    pub confidence_term: f64,
    pub total_bound: f64,
    pub delta: f64,
    pub n: usize,
    pub variant: BoundVariant,
    /// A zero-one bound of at least 1 carries no information.
    pub vacuous: bool,
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "bound {:.4} = emp {:.4} + complexity {:.4} + confidence {:.4} (n={}, delta={}){}",
            self.total_bound,
            self.empirical_error,
            self.complexity_term,
            self.confidence_term,
            self.n,
            self.delta,
            if self.vacuous { " [VACUOUS]" } else { "" }
        )
    }
}

/// `3·√(ln(2/δ)/n)`.
pub fn confidence_term(n: usize, delta: f64) -> f64 {
    3.0 * ((2.0 / delta).ln() / n as f64).sqrt()
}

/// Upper bound on the population error holding with probability at least
/// `1 − δ` over the draw of the sample. The same `δ` plays the role of the
/// failure probability in both variants.
pub fn generalization_bound(
    emp_err: f64,
    rad: f64,
    n: usize,
    delta: f64,
    variant: BoundVariant,
) -> Result<BoundReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::config(format!("delta must lie in (0, 1), got {delta}")));
    }
    if n == 0 {
        return Err(Error::config("n must be at least 1"));
    }
    if !(rad >= 0.0) {
        return Err(Error::input(format!("complexity must be nonnegative, got {rad}")));
    }
    if !emp_err.is_finite() {
        return Err(Error::input("empirical error must be finite"));
    }
    let complexity_term = match variant {
        BoundVariant::General => 2.0 * rad,
        BoundVariant::Classification => rad,
    };
    let confidence_term = confidence_term(n, delta);
    let total_bound = emp_err + complexity_term + confidence_term;
    Ok(BoundReport {
        empirical_error: emp_err,
        complexity_term,
        confidence_term,
        total_bound,
        delta,
        n,
        variant,
        vacuous: total_bound >= 1.0,
    })
}

/// One trial of [`bound_coverage`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageTrial {
    pub empirical_error: f64,
    pub rad: f64,
    pub population_error: f64,
    pub population_stderr: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub coverage: f64,
    pub delta: f64,
    pub n: usize,
    pub trials: Vec<CoverageTrial>,
}

/// Draws `trials` datasets, fits `F` by exact ERM under zero-one loss and
/// records how often the classification bound covers the fitted
/// hypothesis's population error.
///
/// The population error is analytic when available and otherwise estimated
/// from 10⁵ draws; a Monte-Carlo trial counts as covered when
/// `err_P − 3·stderr ≤ bound`. The complexity is exact for `n ≤ 20` and a
/// 2000-draw Monte-Carlo estimate beyond.
pub fn bound_coverage<T: Scalar>(
    f: &HypothesisClass<T>,
    gen: &Generator,
    n: usize,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<CoverageReport> {
    if !f.is_finite() {
        return Err(Error::unsupported("bound coverage needs a finite class"));
    }
    if trials < 100 {
        return Err(Error::config("bound coverage needs at least 100 trials"));
    }
    if gen.task() != Task::Classification {
        return Err(Error::input("bound coverage needs a classification generator"));
    }
    generalization_bound(0.0, 0.0, n.max(1), delta, BoundVariant::Classification)?;
    let cfg = TrainerConfig::default();
    let rows: Vec<CoverageTrial> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let ds = generate::<T>(gen, n, rng::derive_seed(seed, "coverage-sample", t))?;
            let h = fit(f, &ds, LossFn::ZeroOne, 0.0, &cfg)?.hypothesis;
            let emp = empirical_error(&h, &ds, LossFn::ZeroOne)?.f64();
            let rad = if n <= MAX_EXACT_N {
                rademacher_exact(f, &ds)?.value.f64()
            } else {
                rademacher_mc(f, &ds, 2000, &cfg, rng::derive_seed(seed, "coverage-sigma", t))?
                    .value
                    .f64()
            };
            let (pop, se) = population_error(
                &h,
                gen,
                LossFn::ZeroOne,
                100_000,
                rng::derive_seed(seed, "coverage-population", t),
            )?;
            let bound = generalization_bound(emp, rad, n, delta, BoundVariant::Classification)?.total_bound;
            let (pop, se) = (pop.f64(), se.f64());
            Ok(CoverageTrial {
                empirical_error: emp,
                rad,
                population_error: pop,
                population_stderr: se,
                bound,
                holds: pop - 3.0 * se <= bound,
            })
        })
        .collect::<Result<_>>()?;
    let held = rows.iter().filter(|r| r.holds).count();
    Ok(CoverageReport {
        coverage: held as f64 / trials as f64,
        delta,
        n,
        trials: rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_examples() {
        let r = generalization_bound(0.0, 1.0, 100, 0.05, BoundVariant::Classification).unwrap();
        assert!((r.total_bound - 1.5762).abs() < 1e-4);
        assert!(r.vacuous);
        assert_eq!(r.total_bound, r.empirical_error + r.complexity_term + r.confidence_term);

        let r = generalization_bound(0.1, 0.2, 400, 0.1, BoundVariant::General).unwrap();
        // 0.1 + 0.4 + 3·√(ln 20 / 400) = 0.759623…
        assert!((r.total_bound - 0.759_623).abs() < 1e-6);
        assert!(!r.vacuous);

        let r = generalization_bound(0.2, 0.0, 1_000_000_000, 0.05, BoundVariant::Classification).unwrap();
        assert!((r.total_bound - 0.2).abs() < 3e-4);
    }

    #[test]
    fn rejects_bad_inputs() {
        for d in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(matches!(
                generalization_bound(0.0, 0.1, 10, d, BoundVariant::General),
                Err(Error::Config(_))
            ));
        }
        assert!(generalization_bound(0.0, -0.1, 10, 0.1, BoundVariant::General).is_err());
        assert!(generalization_bound(0.0, 0.1, 0, 0.1, BoundVariant::General).is_err());
    }

    #[test]
    fn variants_agree_under_halving() {
        let a = generalization_bound(0.13, 0.21, 77, 0.03, BoundVariant::General).unwrap();
        let b = generalization_bound(0.13, 0.42, 77, 0.03, BoundVariant::Classification).unwrap();
        assert!((a.total_bound - b.total_bound).abs() <= 1e-12);
    }

    #[test]
    fn display_flags_vacuity() {
        let r = generalization_bound(0.0, 1.0, 100, 0.05, BoundVariant::Classification).unwrap();
        assert!(r.to_string().contains("VACUOUS"));
    }
}
