mod support;

use nnk::estimators::EstimateMethod;
use nnk::{
    biased_estimate, eval_kernel, knn, loss, nnk_neighborhood, plug_in_classify,
    unbiased_estimate, winn_estimate, EmbeddingSet, InterpolationEstimate, KernelSpec,
    LabeledDataset, LossKind, DEFAULT_TOL,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::{gaussian_rows, to_f32};

fn labelled(seed: u64, n: usize, d: usize, classes: u32) -> LabeledDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = EmbeddingSet::from_rows(&gaussian_rows(&mut rng, n, d)).unwrap();
    let labels = (0..n).map(|_| rng.random_range(0..classes)).collect();
    LabeledDataset::new(points, labels, classes).unwrap()
}

fn spec(gaussian: bool) -> KernelSpec {
    if gaussian {
        KernelSpec::gaussian(1.5).unwrap()
    } else {
        KernelSpec::cosine()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn estimates_are_distributions(seed in any::<u64>(), k in 1usize..20, classes in 2u32..5, g in any::<bool>()) {
        let d = labelled(seed, 40, 4, classes);
        let q = to_f32(&gaussian_rows(&mut ChaCha8Rng::seed_from_u64(!seed), 1, 4)[0]);
        let spec = spec(g);
        let n = nnk_neighborhood(&spec, d.points(), &q, k, DEFAULT_TOL, &[]).unwrap();
        let unbiased = unbiased_estimate(&n, &d).unwrap();
        let biased = biased_estimate(&n, &d).unwrap();
        let winn = winn_estimate(&spec, &d, &q, k, &[]).unwrap();
        let total_theta: f64 = n.support.iter().map(|s| s.theta).sum();
        for e in [&unbiased, &winn] {
            prop_assert_eq!(e.probs.len(), classes as usize);
            prop_assert!((e.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(e.probs.iter().all(|&p| (0.0..=1.0 + 1e-12).contains(&p)));
        }
        prop_assert!((biased.probs.iter().sum::<f64>() - total_theta).abs() < 1e-12);
        for (b, u) in biased.probs.iter().zip(&unbiased.probs) {
            prop_assert!((b - u * total_theta).abs() < 1e-12);
        }
        prop_assert_eq!(unbiased.method, EstimateMethod::NnkUnbiased);
        prop_assert_eq!(unbiased.k_hat, n.k_hat);

        let c = plug_in_classify(&unbiased) as usize;
        prop_assert!(unbiased.probs.iter().all(|&p| p <= unbiased.probs[c]));
        prop_assert!(unbiased.probs[..c].iter().all(|&p| p < unbiased.probs[c]));
        let sq = loss(&unbiased, d.label(0), LossKind::Squared).unwrap();
        prop_assert!((0.0..=2.0 + 1e-12).contains(&sq));
    }

    #[test]
    fn single_candidate_is_nearest_neighbor(seed in any::<u64>(), g in any::<bool>()) {
        let d = labelled(seed, 30, 3, 3);
        let q = to_f32(&gaussian_rows(&mut ChaCha8Rng::seed_from_u64(seed ^ 99), 1, 3)[0]);
        let spec = spec(g);
        let nearest = (0..d.len())
            .map(|i| (eval_kernel(&spec, d.row(i), &q).unwrap(), i))
            .fold((f64::NEG_INFINITY, 0), |best, cur| if cur.0 > best.0 { cur } else { best })
            .1;
        let n = nnk_neighborhood(&spec, d.points(), &q, 1, DEFAULT_TOL, &[]).unwrap();
        let nnk = unbiased_estimate(&n, &d).unwrap();
        let winn = winn_estimate(&spec, &d, &q, 1, &[]).unwrap();
        prop_assert_eq!(knn(&spec, d.points(), &q, 1, &[]).unwrap().indices[0], nearest);
        prop_assert_eq!(plug_in_classify(&nnk), d.label(nearest));
        prop_assert_eq!(plug_in_classify(&winn), d.label(nearest));
        prop_assert_eq!(n.k_hat, 1);
    }
}

fn estimate(probs: Vec<f64>) -> InterpolationEstimate {
    InterpolationEstimate {
        probs,
        method: EstimateMethod::NnkUnbiased,
        k_hat: 1,
        fallback: false,
    }
}

#[test]
fn pruned_example_weights() {
    // theta = [0.8, 0] from the two-candidate pruning case, label 1 on the survivor.
    let d = LabeledDataset::new(
        EmbeddingSet::from_rows(&[vec![1.0, 0.0], vec![0.9, 0.1]]).unwrap(),
        vec![1, 0],
        2,
    )
    .unwrap();
    let w = nnk::solve_nnk(
        &nnk::KernelSlice::new(vec![vec![1.0, 0.9], vec![0.9, 1.0]], vec![0.8, 0.6]).unwrap(),
        DEFAULT_TOL,
    )
    .unwrap();
    assert_eq!(w.support, vec![0]);
    assert!((w.theta[0] - 0.8).abs() < 1e-12);
    let probs: Vec<f64> = (0..2)
        .map(|c| if d.label(0) == c { w.theta[0] } else { 0.0 })
        .collect();
    assert_eq!(probs, vec![0.0, 0.8]);
}

#[test]
fn ties_and_losses() {
    assert_eq!(plug_in_classify(&estimate(vec![0.5, 0.5])), 0);
    assert_eq!(plug_in_classify(&estimate(vec![0.2, 0.4, 0.4])), 1);
    let e = estimate(vec![0.25, 0.75]);
    assert_eq!(loss(&e, 1, LossKind::ZeroOne).unwrap(), 0.0);
    assert_eq!(loss(&e, 0, LossKind::ZeroOne).unwrap(), 1.0);
    assert!((loss(&e, 1, LossKind::Squared).unwrap() - 0.125).abs() < 1e-15);
    assert!(loss(&e, 2, LossKind::ZeroOne).is_err());
}
