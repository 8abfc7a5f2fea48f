use genlab::complexity::{rademacher_exact, rademacher_mc};
use genlab::datagen::{generate, Generator};
use genlab::erm::{empirical_error, fit};
use genlab::hypotheses::HypothesisClass;
use genlab::{single, LossFn, TrainerConfig};

#[test]
fn f32_pipeline_matches_f64() {
    let gen = Generator::linear_gaussian(vec![1.0, -0.5, 0.25], 0.1).unwrap();
    let ds32: single::Dataset = generate(&gen, 40, 3).unwrap();
    let ds64: genlab::Dataset = generate(&gen, 40, 3).unwrap();
    let f32c: single::HypothesisClass = HypothesisClass::ridge_linear(3, true);
    let f64c: genlab::HypothesisClass = HypothesisClass::ridge_linear(3, true);
    let cfg = TrainerConfig::default();
    let e32 = empirical_error(&fit(&f32c, &ds32, LossFn::Square, 0.01, &cfg).unwrap().hypothesis, &ds32, LossFn::Square).unwrap();
    let e64 = empirical_error(&fit(&f64c, &ds64, LossFn::Square, 0.01, &cfg).unwrap().hypothesis, &ds64, LossFn::Square).unwrap();
    assert!((e32 as f64 - e64).abs() < 1e-4, "{e32} vs {e64}");

    let cls = Generator::linear_threshold(vec![1.0, 1.0], 0.1).unwrap();
    let s32: single::Dataset = generate(&cls, 8, 1).unwrap();
    let s64: genlab::Dataset = generate(&cls, 8, 1).unwrap();
    let t32: single::HypothesisClass = HypothesisClass::random_linear_thresholds(2, 10, true, 5).unwrap();
    let t64: genlab::HypothesisClass = HypothesisClass::random_linear_thresholds(2, 10, true, 5).unwrap();
    let r32 = rademacher_exact(&t32, &s32).unwrap().value;
    let r64 = rademacher_exact(&t64, &s64).unwrap().value;
    assert!((r32 as f64 - r64).abs() < 1e-6);
    let mc: single::ComplexityEstimate = rademacher_mc(&t32, &s32, 500, &cfg, 2).unwrap();
    assert!((mc.value - r32).abs() < 0.05);
}
