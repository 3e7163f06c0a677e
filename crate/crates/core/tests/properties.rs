use ksd::stein::{quadratic_forms, stein_gram, GramOptions};
use ksd::targets::{GaussianTarget, PseudoHuberTarget, SymmetricMixtureTarget};
use ksd::{ksd, ksd_value, stein_kernel_sum, Norm, RadialKernel, Sample};
use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::Array2;
use proptest::prelude::*;

fn kernel_strategy() -> impl Strategy<Value = RadialKernel> {
    prop_oneof![
        (0.3f64..3.0, -0.95f64..-0.05).prop_map(|(c, b)| RadialKernel::imq(c, b).unwrap()),
        (0.2f64..5.0, -0.95f64..-0.05).prop_map(|(h, b)| RadialKernel::scaled_imq(h, b).unwrap()),
        (0.2f64..5.0).prop_map(|h| RadialKernel::gaussian(h).unwrap()),
        Just(RadialKernel::Matern32),
    ]
}

fn points(n: usize, d: usize) -> impl Strategy<Value = Array2<f64>> {
    prop::collection::vec(-3.0f64..3.0, n * d).prop_map(move |v| Array2::from_shape_vec((n, d), v).unwrap())
}

fn sample(max_n: usize, d: usize) -> impl Strategy<Value = Sample> {
    (1..=max_n).prop_flat_map(move |n| {
        (points(n, d), prop::collection::vec(0.05f64..1.0, n)).prop_map(|(p, w)| Sample::new(p, w).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn base_gram_is_positive_semidefinite(k in kernel_strategy(), p in points(12, 3)) {
        let g = k.gram(p.view());
        let m = DMatrix::from_fn(12, 12, |i, j| g[[i, j]]);
        let trace = m.trace();
        let min = SymmetricEigen::new(m).eigenvalues.min();
        prop_assert!(min >= -1e-8 * trace, "min eigenvalue {min}");
    }

    #[test]
    fn stein_gram_is_symmetric_and_positive_semidefinite(
        k in kernel_strategy(),
        p in points(10, 2),
        delta in 0.0f64..2.0,
    ) {
        let t = SymmetricMixtureTarget::new(2, delta).unwrap();
        let g = stein_gram(&t, &k, &Sample::uniform(p).unwrap()).unwrap().matrix;
        let m = DMatrix::from_fn(10, 10, |i, j| g[[i, j]]);
        prop_assert_eq!(m.clone(), m.transpose());
        let trace = m.trace();
        let min = SymmetricEigen::new(m).eigenvalues.min();
        prop_assert!(min >= -1e-8 * trace, "min eigenvalue {min}");
    }

    #[test]
    fn norms_are_ordered(k in kernel_strategy(), s in sample(15, 4)) {
        let t = GaussianTarget::new(vec![0.3, -0.2, 0.0, 1.0]).unwrap();
        let r = ksd(&t, &k, &s, Norm::L2).unwrap();
        let (l1, l2, li) = (r.with_norm(Norm::L1).value, r.value, r.with_norm(Norm::LInf).value);
        let tol = 1e-12 * l1;
        prop_assert!(li <= l2 + tol);
        prop_assert!(l2 <= l1 + tol);
        prop_assert!(l1 <= 2.0 * l2 + tol);
        prop_assert!(2.0 * l2 <= 4.0 * li + tol);
        prop_assert!(r.w.iter().all(|&w| w >= 0.0));
    }

    #[test]
    fn splitting_a_point_preserves_the_discrepancy(
        k in kernel_strategy(),
        s in sample(10, 2),
        frac in 0.05f64..0.95,
        pick in any::<prop::sample::Index>(),
    ) {
        let t = PseudoHuberTarget::new(2).unwrap();
        let i = pick.index(s.len());
        let n = s.len();
        let mut pts = Array2::zeros((n + 1, 2));
        pts.slice_mut(ndarray::s![..n, ..]).assign(&s.points());
        pts.row_mut(n).assign(&s.points().row(i));
        let mut w = s.weights().to_vec();
        let wi = w[i];
        w[i] = frac * wi;
        w.push((1.0 - frac) * wi);
        let split = Sample::new(pts, w).unwrap();
        let a = ksd_value(&t, &k, &s).unwrap();
        let b = ksd_value(&t, &k, &split).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300), "{a} vs {b}");
    }

    #[test]
    fn permuting_points_preserves_the_discrepancy(k in kernel_strategy(), s in sample(12, 3), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let t = GaussianTarget::standard(3).unwrap();
        let mut order: Vec<usize> = (0..s.len()).collect();
        order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let pts = Array2::from_shape_fn((s.len(), 3), |(r, c)| s.points()[[order[r], c]]);
        let w = order.iter().map(|&r| s.weights()[r]).collect();
        let a = ksd_value(&t, &k, &s).unwrap();
        let b = ksd_value(&t, &k, &Sample::new(pts, w).unwrap()).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn streamed_forms_match_the_gram(k in kernel_strategy(), s in sample(20, 2)) {
        let t = SymmetricMixtureTarget::new(2, 1.5).unwrap();
        let streamed: f64 = quadratic_forms(&t, &k, &s).unwrap().iter().sum();
        let g = stein_gram(&t, &k, &s).unwrap().matrix;
        let q = ndarray::ArrayView1::from(s.weights());
        let direct = q.dot(&g.dot(&q));
        prop_assert!((streamed - direct).abs() <= 1e-10 * streamed.abs().max(1e-12));
    }

    #[test]
    fn stein_kernel_is_symmetric(k in kernel_strategy(), x in prop::collection::vec(-4.0f64..4.0, 3), y in prop::collection::vec(-4.0f64..4.0, 3)) {
        let t = SymmetricMixtureTarget::new(3, 1.0).unwrap();
        let a = stein_kernel_sum(&t, &k, &x, &y).unwrap();
        let b = stein_kernel_sum(&t, &k, &y, &x).unwrap();
        prop_assert!((a - b).abs() <= 1e-13 * a.abs().max(1.0));
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let t = SymmetricMixtureTarget::new(3, 1.5).unwrap();
    let k = RadialKernel::imq_default();
    let s = ksd::sequences::mixture_iid(700, 3, 1.5, 3).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                let r = ksd(&t, &k, &s, Norm::L2).unwrap();
                let g = stein_gram(&t, &k, &s).unwrap();
                (
                    r.w,
                    g.per_coord_quadratic,
                    ksd::gof::ksd_test(&t, &k, &s, 99, 1).unwrap().p_value,
                )
            })
    };
    let one = run(1);
    for threads in [2, 3, 8] {
        assert_eq!(run(threads), one, "{threads} threads");
    }
}

#[test]
fn gram_memory_budget_is_enforced() {
    let t = GaussianTarget::standard(1).unwrap();
    let s = ksd::sequences::iid_gaussian(100, &[0.0], 1).unwrap();
    let err = ksd::stein::stein_gram_with(
        &t,
        &RadialKernel::imq_default(),
        &s,
        GramOptions { memory_budget: 1000 },
    )
    .unwrap_err();
    assert!(matches!(err, ksd::Error::Resource(_)), "{err}");
    // The streamed path is unaffected.
    assert!(ksd_value(&t, &RadialKernel::imq_default(), &s).is_ok());
}
