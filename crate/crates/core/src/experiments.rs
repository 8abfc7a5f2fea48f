//! Desk-scale randomization experiments: memorization of random labels and
//! random features by over-parameterized MLPs, and what that does to the
//! Rademacher bound.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bounds::{generalization_bound, BoundReport, BoundVariant};
use crate::complexity::{rademacher_mc, ComplexityEstimate};
use crate::datagen::{generate, randomize_features, randomize_labels, Dataset, Generator, Task, Transform};
use crate::erm::{empirical_error, fit, EarlyStopping, TrainerConfig};
use crate::error::{Error, Result};
use crate::hypotheses::{ClassKind, HypothesisClass, LossFn};
use crate::rng;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConditionTag {
    TrueLabels,
    RandomLabels,
    RandomFeatures,
    RandomBoth,
}

impl ConditionTag {
    pub const ALL: [ConditionTag; 4] = [
        ConditionTag::TrueLabels,
        ConditionTag::RandomLabels,
        ConditionTag::RandomFeatures,
        ConditionTag::RandomBoth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ConditionTag::TrueLabels => "true-labels",
            ConditionTag::RandomLabels => "random-labels",
            ConditionTag::RandomFeatures => "random-features",
            ConditionTag::RandomBoth => "random-both",
        }
    }
}

/// A tag with the transform chain it stands for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub tag: ConditionTag,
    pub transforms: Vec<Transform>,
}

impl Condition {
    pub fn new(tag: ConditionTag, seed: u64) -> Self {
        let labels = Transform::RandomizeLabels {
            seed: rng::derive_seed(seed, "condition-labels", 0),
        };
        let features = Transform::RandomizeFeatures {
            seed: rng::derive_seed(seed, "condition-features", 0),
        };
        let transforms = match tag {
            ConditionTag::TrueLabels => vec![],
            ConditionTag::RandomLabels => vec![labels],
            ConditionTag::RandomFeatures => vec![features],
            ConditionTag::RandomBoth => vec![features, labels],
        };
        Condition { tag, transforms }
    }

    pub fn apply<T: Scalar>(&self, ds: &Dataset<T>) -> Result<Dataset<T>> {
        let mut out = ds.clone();
        for t in &self.transforms {
            out = match t {
                Transform::RandomizeLabels { seed } => randomize_labels(&out, *seed)?,
                Transform::RandomizeFeatures { seed } => randomize_features(&out, *seed)?,
                Transform::Select { indices } => out.select(indices)?,
            };
        }
        Ok(out)
    }
}

/// Settings of the comparison run with explicit regularization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegularizedRun {
    pub lambda: f64,
    pub early_stopping: EarlyStopping,
}

impl Default for RegularizedRun {
    fn default() -> Self {
        RegularizedRun {
            lambda: 1e-3,
            early_stopping: EarlyStopping {
                validation_fraction: 0.2,
                patience: 50,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteOptions {
    pub n: usize,
    /// Fresh points per condition for the test error.
    pub n_test: usize,
    pub n_sigma: usize,
    /// Restarts per σ in the fit-based sup.
    pub sigma_restarts: usize,
    pub delta: f64,
    pub fact1_threshold: f64,
    pub fact2_threshold: f64,
    pub regularized: Option<RegularizedRun>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            n: 256,
            n_test: 4000,
            n_sigma: 64,
            sigma_restarts: 3,
            delta: 0.05,
            fact1_threshold: 0.95,
            fact2_threshold: 0.15,
            regularized: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionRow {
    pub tag: ConditionTag,
    pub train_error: f64,
    pub test_error: f64,
    pub epochs: usize,
    pub param_count: usize,
    pub n: usize,
    pub k_over_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Facts {
    /// The complexity estimate reached `fact1_threshold`.
    pub fact1_fired: bool,
    /// The true-label test error stayed at or below `fact2_threshold`.
    pub fact2_fired: bool,
    /// Both facts hold while the bound is vacuous.
    pub conclusion_fired: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomizationReport {
    pub options: SuiteOptions,
    pub conditions: Vec<Condition>,
    pub rows: Vec<ConditionRow>,
    pub rad_estimate: ComplexityEstimate<f64>,
    pub bound_report: BoundReport,
    pub facts: Facts,
    /// Same conditions refit with an L2 penalty and early stopping.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regularized_rows: Option<Vec<ConditionRow>>,
}

fn to_f64<T: Scalar>(e: ComplexityEstimate<T>) -> ComplexityEstimate<f64> {
    ComplexityEstimate {
        value: e.value.f64(),
        stderr: e.stderr.f64(),
        method: e.method,
        n_sigma: e.n_sigma,
        sup_solver: e.sup_solver,
        diagnostics: e.diagnostics,
    }
}

fn condition_row<T: Scalar>(
    f: &HypothesisClass<T>,
    cond: &Condition,
    test_cond: &Condition,
    train: &Dataset<T>,
    test: &Dataset<T>,
    lambda: f64,
    cfg: &TrainerConfig,
    k: usize,
) -> Result<ConditionRow> {
    let tr = cond.apply(train)?;
    let te = test_cond.apply(test)?;
    let fitted = fit(f, &tr, LossFn::ZeroOne, lambda, cfg)?;
    let n = tr.len();
    Ok(ConditionRow {
        tag: cond.tag,
        train_error: empirical_error(&fitted.hypothesis, &tr, LossFn::ZeroOne)?.f64(),
        test_error: empirical_error(&fitted.hypothesis, &te, LossFn::ZeroOne)?.f64(),
        epochs: fitted.epochs_run,
        param_count: k,
        n,
        k_over_n: k as f64 / n as f64,
    })
}

/// Fits `F` without explicit regularization under each condition, then
/// estimates the complexity of `F` on the true-feature sample and evaluates
/// the classification bound for the true-label fit.
///
/// `cfg.early_stopping` is ignored for the main table. The class must have
/// more parameters than samples.
pub fn run_randomization_suite<T: Scalar>(
    f: &HypothesisClass<T>,
    gen: &Generator,
    opts: &SuiteOptions,
    cfg: &TrainerConfig,
    seed: u64,
) -> Result<RandomizationReport> {
    if !matches!(f.kind, ClassKind::Mlp { .. }) {
        return Err(Error::unsupported("the randomization suite needs an MLP class"));
    }
    gen.validate()?;
    if gen.task() != Task::Classification || gen.random_labels {
        return Err(Error::input("the randomization suite needs a ±1 generator with informative labels"));
    }
    let k = f.param_count()?;
    if k <= opts.n {
        return Err(Error::config(format!(
            "the suite studies the over-parameterized regime k > n; got k = {k} parameters for n = {} samples",
            opts.n
        )));
    }
    if opts.n_test == 0 {
        return Err(Error::config("n_test must be at least 1"));
    }
    generalization_bound(0.0, 0.0, opts.n, opts.delta, BoundVariant::Classification)?;

    let train = generate::<T>(gen, opts.n, rng::derive_seed(seed, "suite-train", 0))?;
    let test = generate::<T>(gen, opts.n_test, rng::derive_seed(seed, "suite-test", 0))?;
    let conditions: Vec<Condition> = ConditionTag::ALL
        .iter()
        .map(|&t| Condition::new(t, rng::derive_seed(seed, "suite-condition", 0)))
        .collect();
    let test_conditions: Vec<Condition> = ConditionTag::ALL
        .iter()
        .map(|&t| Condition::new(t, rng::derive_seed(seed, "suite-condition", 1)))
        .collect();

    let plain = TrainerConfig {
        early_stopping: None,
        ..cfg.clone()
    };
    let rows: Vec<ConditionRow> = conditions
        .iter()
        .zip(&test_conditions)
        .map(|(c, tc)| condition_row(f, c, tc, &train, &test, 0.0, &plain, k))
        .collect::<Result<_>>()?;

    let regularized_rows = match &opts.regularized {
        None => None,
        Some(reg) => {
            let rcfg = TrainerConfig {
                early_stopping: Some(reg.early_stopping),
                ..cfg.clone()
            };
            Some(
                conditions
                    .iter()
                    .zip(&test_conditions)
                    .map(|(c, tc)| condition_row(f, c, tc, &train, &test, reg.lambda, &rcfg, k))
                    .collect::<Result<_>>()?,
            )
        }
    };

    let sigma_cfg = TrainerConfig {
        restarts: opts.sigma_restarts,
        ..plain
    };
    let rad = to_f64(rademacher_mc(
        f,
        &train,
        opts.n_sigma,
        &sigma_cfg,
        rng::derive_seed(seed, "suite-sigma", 0),
    )?);
    let true_row = &rows[0];
    let bound = generalization_bound(
        true_row.train_error,
        rad.value,
        opts.n,
        opts.delta,
        BoundVariant::Classification,
    )?;
    let fact1_fired = rad.value >= opts.fact1_threshold;
    let fact2_fired = true_row.test_error <= opts.fact2_threshold;
    Ok(RandomizationReport {
        options: opts.clone(),
        conditions,
        rows,
        rad_estimate: rad,
        facts: Facts {
            fact1_fired,
            fact2_fired,
            conclusion_fired: fact1_fired && fact2_fired && bound.vacuous,
        },
        bound_report: bound,
        regularized_rows,
    })
}

fn render_rows(out: &mut String, rows: &[ConditionRow]) {
    let _ = writeln!(
        out,
        "{:<16} {:>11} {:>10} {:>7} {:>8} {:>5} {:>7}",
        "condition", "train_error", "test_error", "epochs", "k", "n", "k/n"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<16} {:>11.4} {:>10.4} {:>7} {:>8} {:>5} {:>7.1}",
            r.tag.name(),
            r.train_error,
            r.test_error,
            r.epochs,
            r.param_count,
            r.n,
            r.k_over_n
        );
    }
}

/// Plain-text rendering of a report.
pub fn render_text(report: &RandomizationReport) -> String {
    let o = &report.options;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "randomization suite (fact thresholds: complexity >= {}, true-label test error <= {}; \
         train-error target 0.002 is a desk-scale analog, not a replication)",
        o.fact1_threshold, o.fact2_threshold
    );
    render_rows(&mut out, &report.rows);
    let r = &report.rad_estimate;
    let _ = writeln!(
        out,
        "rademacher estimate {:.4} +/- {:.4} ({} sign vectors, fit-based lower bound: {})",
        r.value, r.stderr, r.n_sigma, r.diagnostics.lower_bound
    );
    let _ = writeln!(out, "{}", report.bound_report);
    let f = &report.facts;
    let _ = writeln!(
        out,
        "fact1 {}  fact2 {}  conclusion {}",
        f.fact1_fired, f.fact2_fired, f.conclusion_fired
    );
    if let Some(rows) = &report.regularized_rows {
        let _ = writeln!(out, "with L2 penalty and early stopping:");
        render_rows(&mut out, rows);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemorizationRow {
    pub param_count: usize,
    pub k_over_n: f64,
    pub train_error: f64,
    pub epochs: usize,
}

/// Train error of each class on one fixed random-label sample of size `n`.
pub fn memorization_curve<T: Scalar>(
    family: &[HypothesisClass<T>],
    gen: &Generator,
    n: usize,
    cfg: &TrainerConfig,
    seed: u64,
) -> Result<Vec<MemorizationRow>> {
    if family.is_empty() {
        return Err(Error::config("the class family must be nonempty"));
    }
    if gen.task() != Task::Classification {
        return Err(Error::input("memorization needs a ±1 generator"));
    }
    let base = generate::<T>(gen, n, rng::derive_seed(seed, "memorization-sample", 0))?;
    let ds = randomize_labels(&base, rng::derive_seed(seed, "memorization-labels", 0))?;
    family
        .iter()
        .map(|f| {
            let k = f.param_count()?;
            let fitted = fit(f, &ds, LossFn::ZeroOne, 0.0, cfg)?;
            Ok(MemorizationRow {
                param_count: k,
                k_over_n: k as f64 / n as f64,
                train_error: empirical_error(&fitted.hypothesis, &ds, LossFn::ZeroOne)?.f64(),
                epochs: fitted.epochs_run,
            })
        })
        .collect()
}

pub fn memorization_csv(rows: &[MemorizationRow]) -> String {
    let mut out = String::from("k,k_over_n,train_error,epochs\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.param_count, r.k_over_n, r.train_error, r.epochs);
    }
    out
}
