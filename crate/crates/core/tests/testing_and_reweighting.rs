use ksd::gof::{ksd_test, parametric_null_test, shifted_gaussian_sample};
use ksd::reweight::{bbis_weights, minimize_on_simplex};
use ksd::sequences::iid_gaussian;
use ksd::stein::stein_gram;
use ksd::targets::GaussianTarget;
use ksd::RadialKernel;

#[test]
fn statistic_grows_with_signal() {
    let t = GaussianTarget::standard(3).unwrap();
    let k = RadialKernel::imq_default();
    let stats: Vec<f64> = [0.0, 0.5, 1.0, 2.0, 4.0]
        .iter()
        .map(|&shift| {
            let s = shifted_gaussian_sample(400, 3, shift, 11).unwrap();
            ksd_test(&t, &k, &s, 99, 11).unwrap().statistic
        })
        .collect();
    assert!(stats.windows(2).all(|w| w[0] < w[1]), "{stats:?}");
}

#[test]
fn bootstrap_p_value_agrees_with_parametric_null() {
    let t = GaussianTarget::standard(1).unwrap();
    let k = RadialKernel::imq_default();
    let draw = |seed| iid_gaussian(100, &[0.0], seed);
    for (shift, seed) in [(0.0, 21), (0.4, 22), (0.8, 23)] {
        let s = shifted_gaussian_sample(100, 1, shift, seed).unwrap();
        let boot = ksd_test(&t, &k, &s, 999, seed).unwrap();
        let exact = parametric_null_test(&t, &k, &s, 999, seed, draw).unwrap();
        assert!((boot.statistic - exact.statistic).abs() <= 1e-10 * boot.statistic);
        assert!(
            (boot.p_value - exact.p_value).abs() < 0.1,
            "shift {shift}: bootstrap {} vs parametric {}",
            boot.p_value,
            exact.p_value
        );
    }
}

#[test]
fn test_is_deterministic_under_seed() {
    let t = GaussianTarget::standard(2).unwrap();
    let k = RadialKernel::imq_default();
    let s = shifted_gaussian_sample(120, 2, 0.3, 5).unwrap();
    let a = ksd_test(&t, &k, &s, 199, 9).unwrap();
    assert_eq!(a, ksd_test(&t, &k, &s, 199, 9).unwrap());
    assert_ne!(a.p_value.to_bits(), 0);
}

#[test]
fn reweighting_lowers_the_objective_monotonically_in_iterations() {
    let t = GaussianTarget::standard(2).unwrap();
    let k = RadialKernel::imq_default();
    let s = iid_gaussian(60, &[0.0, 0.0], 4).unwrap();
    let gram = stein_gram(&t, &k, &s).unwrap().matrix;
    let objectives: Vec<f64> = [1, 2, 5, 10, 50, 200, 1000]
        .iter()
        .map(|&iters| minimize_on_simplex(&gram, iters, 0.0).unwrap().objective)
        .collect();
    assert!(objectives.windows(2).all(|w| w[1] <= w[0]), "{objectives:?}");
    let full = bbis_weights(&t, &k, s.points(), 5000, 1e-10).unwrap();
    assert!(full.objective < full.initial_objective);
    assert!(full.weights.iter().all(|&w| w >= 0.0));
    assert!((full.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn reweighting_reaches_the_optimum_of_a_diagonal_problem() {
    // min Σ q_i² d_i over the simplex has q_i ∝ 1/d_i.
    let d = [1.0, 2.0, 4.0, 8.0];
    let gram = ndarray::Array2::from_diag(&ndarray::arr1(&d));
    let r = minimize_on_simplex(&gram, 20_000, 1e-15).unwrap();
    let z: f64 = d.iter().map(|v| 1.0 / v).sum();
    for (w, v) in r.weights.iter().zip(d) {
        assert!((w - 1.0 / (v * z)).abs() < 1e-5, "{:?}", r.weights);
    }
    assert!((r.objective - 1.0 / z).abs() < 1e-9);
}
