//! Subcommand bodies: each returns the files to write, keyed by name.

use genlab::biasvariance::{aesl_sweep, sweep_csv};
use genlab::bounds::{bound_coverage, generalization_bound};
use genlab::complexity::{rademacher_exact, rademacher_mc, vc_dimension, vc_rad_bound};
use genlab::crossval::cv_sweep;
use genlab::datagen::Generator;
use genlab::experiments::{render_text, run_randomization_suite};
use genlab::hypotheses::HypothesisClass;
use serde::Serialize;

use crate::config::*;
use crate::svg::{line_chart, Series};
use crate::CliError;

pub struct Output {
    pub files: Vec<(String, String)>,
    pub summary: String,
    pub exit_code: i32,
}

impl Output {
    fn new(summary: String) -> Self {
        Output {
            files: Vec::new(),
            summary,
            exit_code: 0,
        }
    }

    fn add(&mut self, name: &str, body: String) {
        self.files.push((name.to_string(), body));
    }

    fn add_json<T: Serialize>(&mut self, name: &str, v: &T) -> Result<(), CliError> {
        let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::numeric(e.to_string()))?;
        s.push('\n');
        self.add(name, s);
        Ok(())
    }
}

/// Shown whenever a bound is evaluated for a class picked by CV on the same
/// sample.
pub const CV_CAVEAT: &str = "caveat: the class was selected by cross-validation on the same sample, \
so it depends on the data; the bound assumes a class fixed before sampling and is not rigorous here.";

pub fn rad(p: &RadParams, seed: u64) -> Result<Output, CliError> {
    let ds = p.data.load(seed)?;
    let points: Vec<Vec<f64>> = ds.xs().map(<[f64]>::to_vec).collect();
    let f = p.class.build(&points, ds.feature_dim(), seed)?;
    let est = match p.method {
        RadMethod::Exact => rademacher_exact(&f, &ds)?,
        RadMethod::MonteCarlo => rademacher_mc(
            &f,
            &ds,
            p.n_sigma,
            &trainer_with_seed(&p.trainer, seed),
            genlab::rng::derive_seed(seed, "cli-sigma", 0),
        )?,
    };
    let mut out = Output::new(format!(
        "rademacher {} +/- {} ({:?}, {} sign vectors, n = {})",
        est.value,
        est.stderr,
        est.method,
        est.n_sigma,
        ds.len()
    ));
    out.add_json("rad.json", &est)?;
    out.add("histogram.csv", est.histogram_csv());
    Ok(out)
}

pub fn bv(p: &BvParams, seed: u64) -> Result<Output, CliError> {
    let g = &p.generator;
    let f = p.class.build(&[], g.feature_dim, seed)?;
    let grid = p.lambda_grid.values()?;
    let rows = aesl_sweep(
        &f,
        g,
        p.n,
        &grid,
        &trainer_with_seed(&p.trainer, seed),
        p.n_train_sets,
        p.n_eval_points,
        genlab::rng::derive_seed(seed, "cli-bv", 0),
    )?;
    let mut out = Output::new(format!("bias-variance sweep over {} λ values", rows.len()));
    #[derive(Serialize)]
    struct Row<'a> {
        lambda: f64,
        #[serde(flatten)]
        decomposition: &'a genlab::BVDecomposition,
    }
    let json: Vec<Row> = rows
        .iter()
        .map(|(l, d)| Row {
            lambda: *l,
            decomposition: d,
        })
        .collect();
    out.add_json("bv.json", &json)?;
    out.add("bv.csv", sweep_csv(&rows));
    Ok(out)
}

pub fn cv(p: &CvParams, seed: u64) -> Result<Output, CliError> {
    let ds = p.data.load(seed)?;
    let points: Vec<Vec<f64>> = ds.xs().map(<[f64]>::to_vec).collect();
    let f = p.class.build(&points, ds.feature_dim(), seed)?;
    let grid = p.lambda_grid.values()?;
    let res = cv_sweep(
        &ds,
        &f,
        p.loss,
        &grid,
        p.folds,
        &trainer_with_seed(&p.trainer, seed),
        genlab::rng::derive_seed(seed, "cli-folds", 0),
    )?;
    let mut out = Output::new(format!("cross-validation: lambda_hat = {} over {} folds", res.lambda_hat, res.r));
    out.add_json("cv.json", &res)?;
    out.add("cv.csv", res.to_csv());
    let log_l: Vec<f64> = res.lambda_grid.iter().map(|l| l.log10()).collect();
    out.add(
        "cv.svg",
        line_chart(
            "train error and cross-validated error",
            "log10(lambda)",
            "error",
            &log_l,
            &[
                Series {
                    name: "train error",
                    color: "#1f77b4",
                    ys: &res.train_errors,
                },
                Series {
                    name: "cv error",
                    color: "#d62728",
                    ys: &res.ahat_el,
                },
            ],
        ),
    );
    Ok(out)
}

pub fn bound(p: &BoundParams, seed: u64) -> Result<Output, CliError> {
    match p {
        BoundParams::Evaluate {
            empirical_error,
            rad,
            n,
            delta,
            variant,
            cv_selected,
        } => {
            let r = generalization_bound(*empirical_error, *rad, *n, *delta, *variant)?;
            let mut summary = r.to_string();
            if *cv_selected {
                summary.push('\n');
                summary.push_str(CV_CAVEAT);
            }
            let mut out = Output::new(summary);
            #[derive(Serialize)]
            struct WithCaveat<'a> {
                #[serde(flatten)]
                report: &'a genlab::BoundReport,
                #[serde(skip_serializing_if = "Option::is_none")]
                caveat: Option<&'static str>,
            }
            out.add_json(
                "bound.json",
                &WithCaveat {
                    report: &r,
                    caveat: cv_selected.then_some(CV_CAVEAT),
                },
            )?;
            Ok(out)
        }
        BoundParams::Coverage {
            class,
            generator,
            n,
            delta,
            trials,
        } => {
            let f = finite_class(class, generator, seed)?;
            let rep = bound_coverage(&f, generator, *n, *delta, *trials, genlab::rng::derive_seed(seed, "cli-coverage", 0))?;
            let mut out = Output::new(format!(
                "coverage {} over {} trials (target at least {})",
                rep.coverage,
                rep.trials.len(),
                1.0 - delta
            ));
            out.add_json("coverage.json", &rep)?;
            let mut csv = String::from("trial,empirical_error,rad,population_error,population_stderr,bound,holds\n");
            for (i, t) in rep.trials.iter().enumerate() {
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    i, t.empirical_error, t.rad, t.population_error, t.population_stderr, t.bound, t.holds
                ));
            }
            out.add("coverage.csv", csv);
            Ok(out)
        }
    }
}

fn finite_class(spec: &ClassSpec, g: &Generator, seed: u64) -> Result<HypothesisClass<f64>, CliError> {
    match spec {
        ClassSpec::RandomLinearThresholds { .. } | ClassSpec::Explicit { .. } => spec.build(&[], g.feature_dim, seed),
        _ => Err(CliError::config(
            "params.class: coverage needs `random-linear-thresholds` or an `explicit` finite class",
        )),
    }
}

pub fn randomization(p: &RandomizationParams, seed: u64) -> Result<Output, CliError> {
    let g = Generator::grid_image(p.grid_size, p.noise_sigma, p.label_flip_prob)?;
    let f = HypothesisClass::<f64>::mlp(g.feature_dim, p.hidden.clone(), p.activation);
    let report = run_randomization_suite(
        &f,
        &g,
        &p.suite,
        &trainer_with_seed(&p.trainer, seed),
        genlab::rng::derive_seed(seed, "cli-suite", 0),
    )?;
    let text = render_text(&report);
    let mut out = Output::new(text.trim_end().to_string());
    out.exit_code = if report.facts.conclusion_fired { 0 } else { 4 };
    out.add_json("randomization.json", &report)?;
    out.add("randomization.txt", text);
    let mut csv = String::from("condition,train_error,test_error,epochs,k,n,k_over_n\n");
    for r in &report.rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.tag.name(),
            r.train_error,
            r.test_error,
            r.epochs,
            r.param_count,
            r.n,
            r.k_over_n
        ));
    }
    out.add("randomization.csv", csv);
    Ok(out)
}

pub fn vc(p: &VcParams, seed: u64) -> Result<Output, CliError> {
    let points = p.points.points(seed);
    let dim = points.first().map_or(0, Vec::len);
    let f = p.class.build(&points, dim, seed)?;
    let res = vc_dimension(&f, &points, p.d_max)?;
    let bounds: Vec<(usize, Option<f64>)> = p
        .bound_n
        .iter()
        .map(|&n| (n, vc_rad_bound(res.dimension, n).ok()))
        .collect();
    let mut out = Output::new(format!(
        "VC dimension {} on {} candidate points (witness {:?})",
        res.dimension,
        points.len(),
        res.witness
    ));
    #[derive(Serialize)]
    struct VcOut<'a> {
        dimension: usize,
        witness: &'a [usize],
        points: &'a [Vec<f64>],
        bound: Vec<BoundRow>,
    }
    #[derive(Serialize)]
    struct BoundRow {
        n: usize,
        rad_bound: Option<f64>,
    }
    out.add_json(
        "vc.json",
        &VcOut {
            dimension: res.dimension,
            witness: &res.witness,
            points: &points,
            bound: bounds.iter().map(|&(n, b)| BoundRow { n, rad_bound: b }).collect(),
        },
    )?;
    let mut csv = String::from("n,rad_bound\n");
    for (n, b) in &bounds {
        csv.push_str(&format!("{},{}\n", n, b.map_or(String::new(), |v| v.to_string())));
    }
    out.add("vc_bound.csv", csv);
    Ok(out)
}
