//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p genlab-cli --test acceptance`.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use genlab::biasvariance::{aesl_sweep, bias_variance_noise};
use genlab::bounds::{bound_coverage, generalization_bound, BoundVariant};
use genlab::complexity::{
    affine_class_complexity, loss_class_complexity_direct, rademacher_exact, rademacher_mc, vc_dimension,
    vc_rad_bound,
};
use genlab::crossval::{cv_sweep, log_grid};
use genlab::datagen::{generate, Dataset, Generator, Task};
use genlab::experiments::{run_randomization_suite, ConditionTag, RandomizationReport, SuiteOptions};
use genlab::hypotheses::{HypothesisClass, LossFn};
use genlab::mlp::{gradient_check, Activation, Mlp};
use genlab::{rng, TrainerConfig};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: String) -> Outcome {
    if cond {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn genlab() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_genlab"));
    c.env_remove("GENLAB_SEED");
    c
}

fn reference_suite() -> (RandomizationReport, f64) {
    let gen = Generator::grid_image(16, 1.0, 0.0).unwrap();
    let f = HypothesisClass::<f64>::mlp(256, vec![32], Activation::Tanh);
    let cfg = TrainerConfig {
        max_epochs: 3000,
        learning_rate: 0.05,
        stop_on_interpolation: true,
        seed: 1,
        ..TrainerConfig::default()
    };
    let opts = SuiteOptions {
        n: 256,
        n_test: 4000,
        n_sigma: 64,
        sigma_restarts: 3,
        delta: 0.05,
        ..SuiteOptions::default()
    };
    let t = Instant::now();
    let report = run_randomization_suite(&f, &gen, &opts, &cfg, 2024).unwrap();
    (report, t.elapsed().as_secs_f64())
}

fn c1_memorization(rep: &RandomizationReport, secs: f64) -> Outcome {
    let row = rep.rows.iter().find(|r| r.tag == ConditionTag::RandomLabels).unwrap();
    check(
        row.k_over_n >= 20.0
            && row.n == 256
            && row.train_error <= 0.002
            && (0.45..=0.55).contains(&row.test_error)
            && secs < 300.0,
        format!(
            "k/n = {:.1}, random-label train error {} (<= 0.002), test error {:.4} in [0.45, 0.55], suite {:.1}s (< 300s)",
            row.k_over_n, row.train_error, row.test_error, secs
        ),
    )
}

fn c2_fact1(rep: &RandomizationReport) -> Outcome {
    let r = &rep.rad_estimate;
    check(
        r.value >= 0.95 && r.n_sigma >= 64 && rep.options.sigma_restarts >= 3,
        format!(
            "fit-based Rademacher estimate {:.4} +/- {:.4} over {} sign vectors, {} restarts (>= 0.95)",
            r.value, r.stderr, r.n_sigma, rep.options.sigma_restarts
        ),
    )
}

fn c3_conclusion(rep: &RandomizationReport) -> Outcome {
    let true_row = &rep.rows[0];
    let tmp = tempfile::tempdir().unwrap();
    let status = genlab()
        .args(["randomization", "--config"])
        .arg(configs().join("randomization.json"))
        .arg("--out")
        .arg(tmp.path())
        .output()
        .unwrap()
        .status;
    check(
        rep.bound_report.total_bound >= 1.0
            && rep.bound_report.vacuous
            && rep.bound_report.delta == 0.05
            && true_row.test_error <= 0.15
            && rep.facts.conclusion_fired
            && status.code() == Some(0),
        format!(
            "bound {:.4} (>= 1, vacuous), true-label test error {:.4} (<= 0.15), `genlab randomization` exit {:?}",
            rep.bound_report.total_bound,
            true_row.test_error,
            status.code()
        ),
    )
}

fn c4_exact_oracle() -> Outcome {
    let t = Instant::now();
    let cfg = TrainerConfig::default();
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    let classes = 60;
    for i in 0..classes {
        let mut r = rng::stream(404, "acceptance-classes", i);
        let n = 2 + (i as usize % 9);
        let size = 1 + (rng::uniform::<f64>(&mut r, 0.0, 64.0) as usize).min(63);
        let xs: Vec<Vec<f64>> = (0..n).map(|_| vec![rng::normal(&mut r), rng::normal(&mut r)]).collect();
        let ds = Dataset::from_xy(Task::Classification, xs.clone(), vec![1.0; n]).unwrap();
        let f = if i % 2 == 0 {
            HypothesisClass::random_sign_tables(&xs, size, i).unwrap()
        } else {
            HypothesisClass::random_linear_thresholds(2, size, true, i).unwrap()
        };
        let exact = rademacher_exact(&f, &ds).unwrap().value;
        let mc = rademacher_mc(&f, &ds, 10_000, &cfg, i).unwrap();
        let dev = (mc.value - exact).abs();
        worst = worst.max(dev);
        if dev > 0.02f64.max(4.0 * mc.stderr) {
            failures += 1;
        }
    }
    let secs = t.elapsed().as_secs_f64();
    check(
        failures == 0 && secs < 60.0,
        format!("{classes} classes, {failures} outside max(0.02, 4 stderr), worst |mc - exact| {worst:.4}, {secs:.1}s (< 60s)"),
    )
}

fn c5_identities() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..20u64 {
        let mut r = rng::stream(505, "acceptance-affine", i);
        let n = 2 + i as usize % 8;
        let xs: Vec<Vec<f64>> = (0..n).map(|_| vec![rng::normal(&mut r)]).collect();
        let a = rng::uniform::<f64>(&mut r, -4.0, 4.0);
        let b = rng::uniform::<f64>(&mut r, -4.0, 4.0);
        let f = HypothesisClass::random_sign_tables(&xs, 1 + i as usize * 3, i).unwrap();
        let ds = Dataset::from_xy(Task::Classification, xs, vec![1.0; n]).unwrap();
        let (lhs, rhs) = affine_class_complexity(&f, a, b, &ds).unwrap();
        worst = worst.max((lhs - rhs).abs());
    }
    let affine_worst = worst;
    let mut loss_worst: f64 = 0.0;
    for i in 0..20u64 {
        let gen = Generator::linear_threshold(vec![1.0, -1.0], 0.2).unwrap();
        let ds = generate::<f64>(&gen, 3 + i as usize % 8, i).unwrap();
        let f = HypothesisClass::random_linear_thresholds(2, 10, true, i).unwrap();
        let (direct, half) = loss_class_complexity_direct(&f, &ds).unwrap();
        loss_worst = loss_worst.max((direct - half).abs());
    }
    let mut variant_worst: f64 = 0.0;
    for i in 0..20u64 {
        let mut r = rng::stream(506, "acceptance-variants", i);
        let emp = rng::uniform::<f64>(&mut r, 0.0, 1.0);
        let rad_h = rng::uniform::<f64>(&mut r, 0.0, 0.5);
        let n = 1 + (rng::uniform::<f64>(&mut r, 0.0, 1000.0) as usize);
        let d = rng::uniform::<f64>(&mut r, 0.01, 0.5);
        let g = generalization_bound(emp, rad_h, n, d, BoundVariant::General).unwrap().total_bound;
        let c = generalization_bound(emp, 2.0 * rad_h, n, d, BoundVariant::Classification).unwrap().total_bound;
        variant_worst = variant_worst.max((g - c).abs());
    }
    check(
        affine_worst <= 1e-12 && loss_worst <= 1e-12 && variant_worst <= 1e-12,
        format!(
            "max deviation: affine {affine_worst:.1e}, loss class {loss_worst:.1e}, bound variants {variant_worst:.1e} (<= 1e-12)"
        ),
    )
}

fn c6_bias_variance() -> Outcome {
    let gen = Generator::linear_gaussian(vec![0.6, -0.4, 0.3, 0.5, -0.3], 0.5).unwrap();
    let f = HypothesisClass::<f64>::ridge_linear(5, false);
    let cfg = TrainerConfig::default();
    let d = bias_variance_noise(&f, &gen, 50, 0.0, &cfg, 2000, 300, 61).unwrap();
    let identity = (d.aesl_direct - d.sum).abs();
    let grid = log_grid(1e-2, 1e2, 12).unwrap();
    let rows = aesl_sweep(&f, &gen, 50, &grid, &cfg, 2000, 300, 62).unwrap();
    let var_ok = rows.windows(2).all(|w| w[1].1.variance <= w[0].1.variance);
    let bias_ok = rows.windows(2).all(|w| w[1].1.bias_sq >= w[0].1.bias_sq);
    let noise_ok = d.noise == 0.25 && rows.iter().all(|(_, r)| r.noise == 0.25);
    let sweep_ok = rows
        .iter()
        .all(|(_, r)| (r.aesl_direct - r.sum).abs() <= 5.0 * r.combined_stderr());
    check(
        noise_ok && identity <= 5.0 * d.combined_stderr() && var_ok && bias_ok && sweep_ok,
        format!(
            "noise {} (== 0.25), |direct - sum| {:.2e} vs 5 stderr {:.2e}, variance nonincreasing {}, bias² nondecreasing {} over 12 λ",
            d.noise,
            identity,
            5.0 * d.combined_stderr(),
            var_ok,
            bias_ok
        ),
    )
}

fn c7_coverage() -> Outcome {
    let gen = Generator::linear_threshold(vec![1.0, -0.5, 0.25], 0.1).unwrap();
    let f = HypothesisClass::<f64>::random_linear_thresholds(3, 16, false, 4).unwrap();
    let rep = bound_coverage(&f, &gen, 16, 0.1, 500, 71).unwrap();
    check(
        rep.coverage >= 0.9 && rep.trials.len() == 500,
        format!("coverage {:.3} over 500 trials at delta = 0.1 (>= 0.9)", rep.coverage),
    )
}

fn c8_vc() -> Outcome {
    let mut r = rng::stream(808, "acceptance-vc", 0);
    let pts: Vec<Vec<f64>> = (0..8).map(|_| vec![rng::normal(&mut r), rng::normal(&mut r)]).collect();
    let f = HypothesisClass::<f64>::linear_threshold(2, true);
    let vc = vc_dimension(&f, &pts, 6).unwrap().dimension;
    let b = vc_rad_bound(2, 10).unwrap();
    let ns = [10, 100, 1_000, 10_000, 100_000, 1_000_000];
    let bs: Vec<f64> = ns.iter().map(|&n| vc_rad_bound(2, n).unwrap()).collect();
    let mono = bs.windows(2).all(|w| w[1] < w[0]);
    check(
        vc == 3 && (b - 0.9597).abs() <= 1e-4 && mono,
        format!("VC dimension {vc} (== 3), bound(2, 10) = {b:.6}, decreasing along 10..1e6: {mono}"),
    )
}

fn c9_cv() -> Outcome {
    let gen = Generator::linear_gaussian(vec![10f64.sqrt().recip(); 50], 1.0).unwrap();
    let f = HypothesisClass::<f64>::ridge_linear(50, false);
    let grid = log_grid(1e-4, 1e3, 12).unwrap();
    let cfg = TrainerConfig::default();
    let mut interior = 0;
    let mut train = vec![0.0; grid.len()];
    let mut cv = vec![0.0; grid.len()];
    for seed in 0..20 {
        let ds = generate::<f64>(&gen, 40, 900 + seed).unwrap();
        let res = cv_sweep(&ds, &f, LossFn::Square, &grid, 5, &cfg, seed).unwrap();
        if res.lambda_hat > grid[0] && res.lambda_hat < grid[grid.len() - 1] {
            interior += 1;
        }
        for k in 0..grid.len() {
            train[k] += res.train_errors[k] / 20.0;
            cv[k] += res.ahat_el[k] / 20.0;
        }
    }
    let below = train.iter().zip(&cv).all(|(t, c)| t < c);
    check(
        interior >= 16 && below,
        format!("interior lambda_hat in {interior}/20 seeds (>= 16), mean train < mean CV at all 12 λ: {below}"),
    )
}

fn run_cli(args: &[&str], cfg: Option<&Path>, out: &Path, threads: &str) -> bool {
    let mut c = genlab();
    c.args(args).arg("--out").arg(out).args(["--threads", threads]);
    if let Some(p) = cfg {
        c.arg("--config").arg(p);
    }
    c.output().unwrap().status.code().is_some_and(|s| s == 0 || s == 4)
}

fn same_dirs(a: &Path, b: &Path) -> bool {
    let names = |d: &Path| {
        let mut v: Vec<_> = std::fs::read_dir(d).unwrap().map(|e| e.unwrap().file_name()).collect();
        v.sort();
        v
    };
    let na = names(a);
    na == names(b) && na.iter().all(|n| std::fs::read(a.join(n)).unwrap() == std::fs::read(b.join(n)).unwrap())
}

fn c10_hygiene() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..20u64 {
        let mut r = rng::stream(1010, "acceptance-grad", i);
        let input = 1 + i as usize % 4;
        let widths = vec![input, 2 + i as usize % 5, 1 + i as usize % 3, 1];
        let act = if i % 2 == 0 { Activation::Tanh } else { Activation::Relu };
        let mut net = Mlp::random(widths, act, Some(0.8), &mut r).unwrap();
        for p in net.params.iter_mut() {
            *p = rng::normal::<f64>(&mut r) * 0.8;
        }
        let xs: Vec<Vec<f64>> = (0..6).map(|_| (0..input).map(|_| rng::normal(&mut r)).collect()).collect();
        let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
        let ts: Vec<f64> = (0..6).map(|_| rng::normal(&mut r)).collect();
        worst = worst.max(gradient_check(&net, &refs, &ts, 1e-6));
    }

    let tmp = tempfile::tempdir().unwrap();
    let small_rand = tmp.path().join("rand.json");
    std::fs::write(
        &small_rand,
        r#"{ "seed": 3, "params": { "grid_size": 8, "hidden": [16],
             "suite": { "n": 64, "n_test": 500, "n_sigma": 8, "sigma_restarts": 2 } } }"#,
    )
    .unwrap();
    let cfgs = configs();
    let jobs: Vec<(&str, Option<PathBuf>)> = vec![
        ("rad", Some(cfgs.join("rad_exact.json"))),
        ("rad", None),
        ("bv", None),
        ("cv", Some(cfgs.join("cv_ucurve.json"))),
        ("bound", None),
        ("vc", Some(cfgs.join("vc_plane.json"))),
        ("randomization", Some(small_rand)),
    ];
    let mut mismatches = Vec::new();
    for (k, (cmd, cfg)) in jobs.iter().enumerate() {
        let dirs: Vec<PathBuf> = ["1a", "1b", "4"].iter().map(|s| tmp.path().join(format!("{k}-{s}"))).collect();
        let ok = run_cli(&[cmd], cfg.as_deref(), &dirs[0], "1")
            && run_cli(&[cmd], cfg.as_deref(), &dirs[1], "1")
            && run_cli(&[cmd], cfg.as_deref(), &dirs[2], "4");
        if !ok || !same_dirs(&dirs[0], &dirs[1]) || !same_dirs(&dirs[0], &dirs[2]) {
            mismatches.push(*cmd);
        }
    }
    check(
        worst <= 1e-4 && mismatches.is_empty(),
        format!(
            "worst gradient relative error {worst:.2e} over 20 networks (<= 1e-4); CLI outputs identical across runs and threads 1/4 for {} jobs (mismatches: {mismatches:?})",
            jobs.len()
        ),
    )
}

fn main() {
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut record = |i: usize, name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let out = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        let (tag, msg) = match &out {
            Ok(m) => ("PASS", m),
            Err(m) => ("FAIL", m),
        };
        println!("{tag} criterion {i:>2} [{name}]: {msg}");
        results.push((i, name, out));
    };
    let suite = std::panic::catch_unwind(reference_suite).ok();
    let suite_ref = suite.as_ref();
    let missing = || Err("reference suite failed to run".to_string());
    record(1, "memorization", &mut || suite_ref.map_or_else(missing, |(r, s)| c1_memorization(r, *s)));
    record(2, "complexity near one", &mut || suite_ref.map_or_else(missing, |(r, _)| c2_fact1(r)));
    record(3, "vacuous bound, good test error", &mut || suite_ref.map_or_else(missing, |(r, _)| c3_conclusion(r)));
    record(4, "exact oracle", &mut c4_exact_oracle);
    record(5, "algebraic identities", &mut c5_identities);
    record(6, "bias-variance", &mut c6_bias_variance);
    record(7, "bound coverage", &mut c7_coverage);
    record(8, "VC suite", &mut c8_vc);
    record(9, "CV U-curve", &mut c9_cv);
    record(10, "numerical hygiene", &mut c10_hygiene);
    let failed = results.iter().filter(|(_, _, o)| o.is_err()).count();
    println!("acceptance: {} passed, {} failed", results.len() - failed, failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
