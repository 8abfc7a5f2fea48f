use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn genlab() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_genlab"));
    c.env_remove("GENLAB_SEED");
    c
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    genlab().args(args).output().unwrap()
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const EXACT_RAD: &str = r#"{
  "params": {
    "class": { "type": "random-sign-tables", "count": 8 },
    "data": {
      "source": "generated",
      "generator": { "kind": "linear-gaussian-regression", "feature_dim": 2, "true_weights": [1.0, 0.5] },
      "n": N
    },
    "method": "exact"
  }
}"#;

#[test]
fn exact_rad_has_zero_stderr_and_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.json", &EXACT_RAD.replace("N", "8"));
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for d in [&a, &b] {
        let o = run(&["rad", "--config", cfg.to_str().unwrap(), "--out", d.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let v: serde_json::Value = serde_json::from_slice(&read(&a, "rad.json")).unwrap();
    assert_eq!(v["stderr"], 0.0);
    assert_eq!(v["method"], "exact-enumeration");
    for f in ["rad.json", "histogram.csv", "manifest.json"] {
        assert_eq!(read(&a, f), read(&b, f), "{f}");
    }
}

#[test]
fn exact_rad_refuses_large_n() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.json", &EXACT_RAD.replace("N", "25"));
    let o = run(&["rad", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("n ≤ 20"), "{}", stderr(&o));
}

#[test]
fn unknown_keys_are_named() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.json", r#"{ "params": { "n_sigmaa": 10 } }"#);
    let o = run(&["rad", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("n_sigmaa"), "{}", stderr(&o));
    let cfg = write(tmp.path(), "d.json", r#"{ "sed": 1 }"#);
    let o = run(&["vc", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("sed"));
}

#[test]
fn bound_rejects_zero_delta() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.json",
        r#"{ "params": { "mode": "evaluate", "empirical_error": 0.0, "rad": 0.5, "n": 100, "delta": 0.0 } }"#,
    );
    let o = run(&["bound", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("delta"));
}

#[test]
fn bound_prints_caveat_for_cv_selected_classes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.json",
        r#"{ "params": { "mode": "evaluate", "empirical_error": 0.1, "rad": 0.2, "n": 400, "delta": 0.1, "cv_selected": true } }"#,
    );
    let o = run(&["bound", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("caveat"));
    let v: serde_json::Value = serde_json::from_slice(&read(tmp.path(), "bound.json")).unwrap();
    assert!(v["caveat"].is_string());
    assert_eq!(v["vacuous"], false);
}

#[test]
fn cv_emits_two_curve_svg() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("cv_ucurve.json");
    let o = run(&["cv", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let svg = String::from_utf8(read(tmp.path(), "cv.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
    let csv = String::from_utf8(read(tmp.path(), "cv.csv")).unwrap();
    assert!(csv.starts_with("lambda,ael_hat,train_error,fold_1"));
    assert_eq!(csv.lines().count(), 13);
}

#[test]
fn format_flag_filters_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("cv_ucurve.json");
    let o = run(&["cv", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap(), "--format", "csv"]);
    assert!(o.status.success());
    assert!(tmp.path().join("cv.csv").exists());
    assert!(!tmp.path().join("cv.svg").exists());
    assert!(!tmp.path().join("cv.json").exists());
    assert!(tmp.path().join("manifest.json").exists());
    let o = run(&["cv", "--out", tmp.path().to_str().unwrap(), "--format", "png"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn manifest_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let cfg = configs().join("vc_plane.json");
    assert!(run(&["vc", "--config", cfg.to_str().unwrap(), "--out", a.to_str().unwrap(), "--seed", "9"]).status.success());
    let manifest = a.join("manifest.json");
    assert!(run(&["vc", "--config", manifest.to_str().unwrap(), "--out", b.to_str().unwrap()]).status.success());
    for f in ["vc.json", "vc_bound.csv"] {
        assert_eq!(read(&a, f), read(&b, f), "{f}");
    }
    let m: serde_json::Value = serde_json::from_slice(&read(&a, "manifest.json")).unwrap();
    assert_eq!(m["seed"], 9);
    assert_eq!(m["sources"]["seed"], "flag");
    assert_eq!(m["params"]["d_max"], 6);
}

#[test]
fn seed_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let seeded = write(tmp.path(), "s.json", r#"{ "seed": 5 }"#);
    let seed_of = |dir: &Path| -> (u64, String) {
        let m: serde_json::Value = serde_json::from_slice(&read(dir, "manifest.json")).unwrap();
        (m["seed"].as_u64().unwrap(), m["sources"]["seed"].as_str().unwrap().to_string())
    };
    let d = tmp.path().join("env");
    let o = genlab().env("GENLAB_SEED", "42").args(["bound", "--out", d.to_str().unwrap()]).output().unwrap();
    assert!(o.status.success());
    assert_eq!(seed_of(&d), (42, "env".into()));
    let d = tmp.path().join("file");
    let o = genlab()
        .env("GENLAB_SEED", "42")
        .args(["bound", "--config", seeded.to_str().unwrap(), "--out", d.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(seed_of(&d), (5, "file".into()));
    let d = tmp.path().join("flag");
    let o = genlab()
        .env("GENLAB_SEED", "42")
        .args(["bound", "--config", seeded.to_str().unwrap(), "--seed", "1", "--out", d.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(seed_of(&d), (1, "flag".into()));
    let o = genlab().env("GENLAB_SEED", "x").args(["bound", "--out", d.to_str().unwrap()]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.json",
        r#"{ "seed": 4, "params": { "n_sigma": 300, "data": { "source": "generated", "n": 30,
             "generator": { "kind": "linear-threshold-classification", "feature_dim": 2, "true_weights": [1.0, 2.0] } } } }"#,
    );
    let one = tmp.path().join("t1");
    let four = tmp.path().join("t4");
    for (d, t) in [(&one, "1"), (&four, "4")] {
        let o = run(&["rad", "--config", cfg.to_str().unwrap(), "--out", d.to_str().unwrap(), "--threads", t]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for f in ["rad.json", "histogram.csv", "manifest.json"] {
        assert_eq!(read(&one, f), read(&four, f), "{f}");
    }
}

#[test]
fn help_exits_zero() {
    let o = run(&["--help"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("randomization"));
    assert_eq!(run(&["nonsense"]).status.code(), Some(1));
}
