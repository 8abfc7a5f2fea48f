use genlab::bounds::{generalization_bound, BoundVariant};
use genlab::complexity::{
    affine_class_complexity, exact_from_matrix, linearly_separable, rademacher_exact, sup_correlation, SignVector,
};
use genlab::datagen::{split_indices, Dataset, Task};
use genlab::hypotheses::HypothesisClass;
use genlab::mlp::{gradient_check, Activation, Mlp};
use genlab::{rng, TrainerConfig};
use proptest::prelude::*;

fn points(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng::stream(seed, "test-points", 0);
    (0..n).map(|_| vec![rng::normal(&mut r), rng::normal(&mut r)]).collect()
}

fn unlabeled(xs: Vec<Vec<f64>>) -> Dataset<f64> {
    let n = xs.len();
    Dataset::from_xy(Task::Classification, xs, vec![1.0; n]).unwrap()
}

/// Exact sup over linear thresholds: best correlation among the labelings an
/// LP certifies as realizable.
fn realizable_sup(xs: &[Vec<f64>], sigma: &[f64], bias: bool) -> f64 {
    let n = xs.len();
    let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
    let mut best = f64::NEG_INFINITY;
    for mask in 0..1u32 << n {
        let pos: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
        if linearly_separable(&refs, &pos, bias) {
            let c = pos
                .iter()
                .zip(sigma)
                .map(|(&p, s)| if p { *s } else { -s })
                .sum::<f64>()
                / n as f64;
            best = best.max(c);
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn folds_partition_the_sample(n in 2usize..200, r_frac in 0.0f64..1.0, seed in any::<u64>()) {
        let r = 2 + ((n - 2) as f64 * r_frac) as usize;
        let split = split_indices(n, r, seed).unwrap();
        let sizes = split.fold_sizes();
        prop_assert_eq!(sizes.iter().sum::<usize>(), n);
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        for j in 0..r {
            let mut all = split.train_indices(j);
            all.extend(split.test_indices(j));
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        }
        prop_assert_eq!(split_indices(n, r, seed).unwrap(), split);
    }

    #[test]
    fn exact_rademacher_invariants(n in 1usize..9, members in 1usize..20, seed in any::<u64>()) {
        let xs = points(n, seed);
        let ds = unlabeled(xs.clone());
        let f = HypothesisClass::random_sign_tables(&xs, members, seed).unwrap();
        let rad = rademacher_exact(&f, &ds).unwrap().value;
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&rad));
        // adding members cannot lower the sup
        let bigger = HypothesisClass::random_sign_tables(&xs, members + 3, seed).unwrap();
        let mut joined = f.members().unwrap().to_vec();
        joined.extend_from_slice(bigger.members().unwrap());
        let union = HypothesisClass::finite(joined).unwrap();
        prop_assert!(rademacher_exact(&union, &ds).unwrap().value >= rad - 1e-12);
        // σ ↦ −σ is a bijection of the sign cube
        let neg = rademacher_exact(&f.negated().unwrap(), &ds).unwrap().value;
        prop_assert!((neg - rad).abs() <= 1e-12);
        let all = HypothesisClass::all_labelings(&xs).unwrap();
        prop_assert_eq!(rademacher_exact(&all, &ds).unwrap().value, 1.0);
    }

    #[test]
    fn affine_scaling(n in 1usize..8, a in -5.0f64..5.0, b in -5.0f64..5.0, seed in any::<u64>()) {
        let xs = points(n, seed);
        let f = HypothesisClass::random_sign_tables(&xs, 6, seed ^ 1).unwrap();
        let (lhs, rhs) = affine_class_complexity(&f, a, b, &unlabeled(xs)).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn half_tables_match_direct_sum(n in 1usize..10, members in 1usize..8, seed in any::<u64>()) {
        let mut r = rng::stream(seed, "matrix", 0);
        let m: Vec<Vec<f64>> = (0..members)
            .map(|_| (0..n).map(|_| rng::uniform(&mut r, -2.0, 2.0)).collect())
            .collect();
        let (v, _) = exact_from_matrix(&m).unwrap();
        let mut total = 0.0;
        for mask in 0..1u64 << n {
            let s = SignVector::from_mask(n, mask).to_scalars::<f64>();
            total += m
                .iter()
                .map(|row| row.iter().zip(&s).map(|(a, b)| a * b).sum::<f64>() / n as f64)
                .fold(f64::NEG_INFINITY, f64::max);
        }
        prop_assert!((v - total / (1u64 << n) as f64).abs() <= 1e-12);
    }

    #[test]
    fn fit_based_sup_is_a_lower_bound(n in 2usize..7, bias in any::<bool>(), seed in any::<u64>()) {
        let xs = points(n, seed);
        let ds = unlabeled(xs.clone());
        let f = HypothesisClass::<f64>::linear_threshold(2, bias);
        let sigma = SignVector::sample(n, seed, 0);
        let fitted = sup_correlation(&f, &ds, &sigma, &TrainerConfig::default()).unwrap().value;
        let exact = realizable_sup(&xs, &sigma.to_scalars::<f64>(), bias);
        prop_assert!(fitted <= exact + 1e-12, "{} > {}", fitted, exact);
    }

    #[test]
    fn bound_monotonicity(emp in 0.0f64..1.0, rad in 0.0f64..1.0, d in 0.001f64..0.5, n in 1usize..10_000) {
        let b = |e: f64, r: f64, n: usize, d: f64| {
            generalization_bound(e, r, n, d, BoundVariant::Classification).unwrap().total_bound
        };
        let base = b(emp, rad, n, d);
        prop_assert!(b(emp, rad + 0.1, n, d) >= base);
        prop_assert!(b(emp, rad, n, d * 1.5) <= base);
        prop_assert!(b(emp, rad, n + 10, d) <= base);
        let general = generalization_bound(emp, rad / 2.0, n, d, BoundVariant::General).unwrap().total_bound;
        prop_assert!((general - base).abs() <= 1e-12);
    }

    #[test]
    fn backprop_matches_finite_differences(
        input in 1usize..5,
        hidden in prop::collection::vec(1usize..6, 0..3),
        relu in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let mut widths = vec![input];
        widths.extend(&hidden);
        widths.push(1);
        let act = if relu { Activation::Relu } else { Activation::Tanh };
        let mut r = rng::stream(seed, "gradcheck", 0);
        // random biases too: zero biases put ReLU units exactly on their kink
        let mut net = Mlp::random(widths, act, Some(0.8), &mut r).unwrap();
        for p in net.params.iter_mut() {
            *p = rng::normal::<f64>(&mut r) * 0.8;
        }
        let xs: Vec<Vec<f64>> = (0..5).map(|_| (0..input).map(|_| rng::normal(&mut r)).collect()).collect();
        let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
        let ts: Vec<f64> = (0..5).map(|_| rng::normal(&mut r)).collect();
        let e = gradient_check(&net, &refs, &ts, 1e-6);
        prop_assert!(e <= 1e-4, "relative error {}", e);
    }
}
