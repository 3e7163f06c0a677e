//! One-sample goodness-of-fit testing with the KSD V-statistic.
//!
//! The statistic is `n · KSD²= (1/n) Σ_{i,i'} k0(x_i, x_i')` (diagonal kept).
//! Its null distribution is simulated with a wild bootstrap: each replicate
//! is `(1/n) Σ_{i,i'} ε_i ε_i' k0(x_i, x_i')` for i.i.d. Rademacher signs `ε`.

use ndarray::{Array2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{KernelSpec, RadialKernel};
use crate::rng::{self, Stream};
use crate::stein::{stein_gram, Sample};
use crate::targets::Target;

/// Smallest number of bootstrap replicates accepted.
pub const MIN_REPLICATES: usize = 99;

/// Bootstrap replicates are generated in blocks of this many columns.
const BLOCK: usize = 256;

pub const TEST_RESULT_SCHEMA: &str = "ksd-test/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub schema: String,
    /// `n · KSD²` under the L2 norm.
    pub statistic: f64,
    /// `(1 + #{replicates >= statistic}) / (B + 1)`.
    pub p_value: f64,
    pub replicates: usize,
    pub seed: u64,
    pub n: usize,
    pub kernel: String,
    pub target: String,
}

impl TestResult {
    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value <= alpha
    }
}

fn p_value(statistic: f64, replicates: &[f64]) -> f64 {
    let exceed = replicates.iter().filter(|&&r| r >= statistic).count();
    (1 + exceed) as f64 / (replicates.len() + 1) as f64
}

/// Wild-bootstrap replicates `(1/n) ε^T K ε` for `count` sign vectors.
fn wild_bootstrap(gram: &Array2<f64>, count: usize, seed: u64) -> Vec<f64> {
    let n = gram.nrows();
    let mut rng = rng::stream(seed, Stream::Bootstrap);
    let mut out = Vec::with_capacity(count);
    let mut done = 0;
    while done < count {
        let cols = BLOCK.min(count - done);
        // Column-major draw order: replicate b's signs are contiguous in the
        // stream regardless of the block size.
        let signs = Array2::from_shape_fn((cols, n), |_| if rng.random::<bool>() { 1.0 } else { -1.0 }).reversed_axes();
        let product = gram.dot(&signs);
        for (e, m) in signs.axis_iter(Axis(1)).zip(product.axis_iter(Axis(1))) {
            out.push(e.dot(&m) / n as f64);
        }
        done += cols;
    }
    out
}

/// Wild-bootstrap KSD test of `H0: sample ~ target` for a uniformly
/// weighted sample.
pub fn ksd_test<T: Target + ?Sized>(
    target: &T,
    kernel: &RadialKernel,
    sample: &Sample,
    replicates: usize,
    seed: u64,
) -> Result<TestResult> {
    if replicates < MIN_REPLICATES {
        return Err(Error::arg(format!(
            "bootstrap needs at least {MIN_REPLICATES} replicates, got {replicates}"
        )));
    }
    if !sample.is_uniform() {
        return Err(Error::arg("the KSD test requires a uniformly weighted sample"));
    }
    let n = sample.len();
    let gram = stein_gram(target, kernel, sample)?;
    let statistic = n as f64 * gram.total_quadratic();
    let boot = wild_bootstrap(&gram.matrix, replicates, seed);
    Ok(TestResult {
        schema: TEST_RESULT_SCHEMA.into(),
        statistic,
        p_value: p_value(statistic, &boot),
        replicates,
        seed,
        n,
        kernel: kernel.to_string(),
        target: target.describe(),
    })
}

/// Parametric Monte Carlo version of the test: the null distribution is
/// simulated by computing the statistic on fresh samples from the target
/// itself, produced by `draw(replicate_seed)`. Slow, but exact up to Monte
/// Carlo error, which makes it a reference for the bootstrap.
pub fn parametric_null_test<T, F>(
    target: &T,
    kernel: &RadialKernel,
    sample: &Sample,
    replicates: usize,
    seed: u64,
    draw: F,
) -> Result<TestResult>
where
    T: Target + ?Sized,
    F: Fn(u64) -> Result<Sample> + Sync,
{
    if replicates == 0 {
        return Err(Error::arg("parametric null needs at least one replicate"));
    }
    let statistic_of = |s: &Sample| -> Result<f64> {
        let forms = crate::stein::quadratic_forms(target, kernel, s)?;
        Ok(s.len() as f64 * forms.iter().sum::<f64>())
    };
    let statistic = statistic_of(sample)?;
    let null: Vec<f64> = (0..replicates as u64)
        .into_par_iter()
        .map(|b| statistic_of(&draw(rng::sub_seed(seed, b))?))
        .collect::<Result<_>>()?;
    Ok(TestResult {
        schema: TEST_RESULT_SCHEMA.into(),
        statistic,
        p_value: p_value(statistic, &null),
        replicates,
        seed,
        n: sample.len(),
        kernel: kernel.to_string(),
        target: target.describe(),
    })
}

/// Power study against `N(0, I_d)` with the shifted alternative
/// `x_i = z_i + shift · u_i e1`, `z_i ~ N(0, I)`, `u_i ~ Unif[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerStudy {
    pub kernels: Vec<KernelSpec>,
    pub dims: Vec<usize>,
    pub n: usize,
    pub trials: usize,
    pub alpha: f64,
    pub replicates: usize,
    pub seed: u64,
    /// 1 for the alternative, 0 to simulate the null.
    pub shift: f64,
}

impl Default for PowerStudy {
    fn default() -> Self {
        Self {
            kernels: vec![
                KernelSpec::Imq {
                    c: 1.0,
                    beta: -0.5,
                    h: None,
                },
                KernelSpec::Gaussian {
                    h: crate::kernels::Bandwidth::Median,
                },
            ],
            dims: vec![2, 5, 10, 15, 20, 25],
            n: 500,
            trials: 100,
            alpha: 0.05,
            replicates: 500,
            seed: 0,
            shift: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub kernel: String,
    pub dim: usize,
    pub rejections: usize,
    pub trials: usize,
    pub power: f64,
}

/// Draws one shifted-alternative sample.
pub fn shifted_gaussian_sample(n: usize, dim: usize, shift: f64, seed: u64) -> Result<Sample> {
    if n == 0 || dim == 0 {
        return Err(Error::arg("need n >= 1 and dim >= 1"));
    }
    let mut rng = rng::stream(seed, Stream::PowerStudy);
    let points = Array2::from_shape_fn((n, dim), |_| rng.sample::<f64, _>(StandardNormal));
    let mut points = points;
    for mut row in points.axis_iter_mut(Axis(0)) {
        let u: f64 = rng.random();
        row[0] += shift * u;
    }
    Sample::uniform(points)
}

/// Rejection rates per `(kernel, dim)`, in kernel-major order. Every kernel
/// sees the same samples; sample-dependent bandwidths are re-chosen per trial.
pub fn power_study(config: &PowerStudy) -> Result<Vec<PowerRow>> {
    if config.trials == 0 {
        return Err(Error::arg("power study needs trials >= 1"));
    }
    if !(0.0..=1.0).contains(&config.alpha) {
        return Err(Error::arg(format!("alpha must lie in [0, 1], got {}", config.alpha)));
    }
    if config.kernels.is_empty() || config.dims.is_empty() {
        return Err(Error::arg("power study needs at least one kernel and one dimension"));
    }
    let mut rows = Vec::new();
    for spec in &config.kernels {
        for &dim in &config.dims {
            let target = crate::targets::GaussianTarget::standard(dim)?;
            let rejections: Vec<bool> = (0..config.trials as u64)
                .into_par_iter()
                .map(|t| {
                    let trial_seed = rng::sub_seed(rng::sub_seed(config.seed, dim as u64), t);
                    let sample = shifted_gaussian_sample(config.n, dim, config.shift, trial_seed)?;
                    let kernel = spec.resolve(Some(sample.points()))?;
                    let result = ksd_test(&target, &kernel, &sample, config.replicates, trial_seed)?;
                    Ok(result.rejects(config.alpha))
                })
                .collect::<Result<_>>()?;
            let count = rejections.iter().filter(|&&r| r).count();
            rows.push(PowerRow {
                kernel: spec.to_string(),
                dim,
                rejections: count,
                trials: config.trials,
                power: count as f64 / config.trials as f64,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::iid_gaussian;
    use crate::targets::GaussianTarget;

    #[test]
    fn p_value_formula() {
        assert_eq!(p_value(1.0, &[0.0, 2.0, 1.0, 0.5]), 3.0 / 5.0);
        assert_eq!(p_value(10.0, &[0.0; 99]), 0.01);
    }

    #[test]
    fn bootstrap_matches_naive_double_sum() {
        let t = GaussianTarget::standard(2).unwrap();
        let s = iid_gaussian(30, &[0.0, 0.0], 1).unwrap();
        let g = stein_gram(&t, &RadialKernel::imq_default(), &s).unwrap();
        let boot = wild_bootstrap(&g.matrix, 300, 5);
        // Regenerate the same signs in the same (replicate-major) order.
        let mut rng = rng::stream(5, Stream::Bootstrap);
        let n = 30;
        for (b, &value) in boot.iter().enumerate() {
            let eps: Vec<f64> = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
            let mut naive = 0.0;
            for i in 0..n {
                for j in 0..n {
                    naive += eps[i] * eps[j] * g.matrix[[i, j]];
                }
            }
            naive /= n as f64;
            assert!((naive - value).abs() <= 1e-12 * naive.abs().max(1.0), "replicate {b}");
        }
    }

    #[test]
    fn p_value_range_and_argument_checks() {
        let t = GaussianTarget::standard(1).unwrap();
        let k = RadialKernel::imq_default();
        let s = iid_gaussian(50, &[0.0], 2).unwrap();
        let r = ksd_test(&t, &k, &s, 99, 3).unwrap();
        assert!(r.p_value >= 1.0 / 100.0 && r.p_value <= 1.0);
        assert!((r.statistic - 50.0 * crate::stein::ksd_value(&t, &k, &s).unwrap().powi(2)).abs() < 1e-9);
        assert!(ksd_test(&t, &k, &s, 98, 3).is_err());
        let weighted = s.with_weights((1..=50).map(f64::from).collect()).unwrap();
        assert!(matches!(
            ksd_test(&t, &k, &weighted, 99, 3),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn strong_shift_is_rejected() {
        let t = GaussianTarget::standard(10).unwrap();
        let s = shifted_gaussian_sample(500, 10, 1.0, 4).unwrap();
        let r = ksd_test(&t, &RadialKernel::imq_default(), &s, 200, 4).unwrap();
        assert!(r.rejects(0.05), "p = {}", r.p_value);
    }

    #[test]
    fn alpha_one_always_rejects() {
        let rows = power_study(&PowerStudy {
            dims: vec![2],
            n: 20,
            trials: 3,
            alpha: 1.0,
            replicates: 99,
            shift: 0.0,
            ..PowerStudy::default()
        })
        .unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.power == 1.0));
    }
}
