//! KSD-minimizing weights on a fixed support ("black-box importance
//! sampling").
//!
//! Minimizes the convex quadratic `q^T K0 q` over the probability simplex by
//! exponentiated gradient (entropic mirror descent):
//!
//! ```text
//! q <- q ⊙ exp(-η ∇) / Σ(q ⊙ exp(-η ∇)),   ∇ = 2 K0 q
//! ```
//!
//! starting from uniform weights. The step size starts at
//! `1 / (2 max_i K0_ii)`, is halved until the objective does not increase and
//! doubles after every accepted step.

use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::kernels::RadialKernel;
use crate::stein::{stein_gram_with, GramOptions, Sample};
use crate::targets::Target;

pub const DEFAULT_MAX_ITERS: usize = 5000;
pub const DEFAULT_TOL: f64 = 1e-10;

/// Backtracking gives up once the step shrinks by this factor below its
/// starting value.
const MIN_STEP_RATIO: f64 = 1e-14;

pub const REWEIGHT_SCHEMA: &str = "ksd-reweight/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReweightResult {
    pub schema: String,
    pub weights: Vec<f64>,
    /// `q^T K0 q` at the returned weights (the squared L2 discrepancy).
    pub objective: f64,
    /// Objective at uniform weights.
    pub initial_objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct ReweightOptions {
    pub max_iters: usize,
    /// Stop once an accepted step lowers the objective by less than this
    /// fraction.
    pub tol: f64,
    pub gram: GramOptions,
}

impl Default for ReweightOptions {
    fn default() -> Self {
        Self {
            max_iters: DEFAULT_MAX_ITERS,
            tol: DEFAULT_TOL,
            gram: GramOptions::default(),
        }
    }
}

/// Weights on the rows of `points` minimizing the squared KSD.
pub fn bbis_weights<T: Target + ?Sized>(
    target: &T,
    kernel: &RadialKernel,
    points: ArrayView2<'_, f64>,
    max_iters: usize,
    tol: f64,
) -> Result<ReweightResult> {
    bbis_weights_with(
        target,
        kernel,
        points,
        ReweightOptions {
            max_iters,
            tol,
            ..ReweightOptions::default()
        },
    )
}

pub fn bbis_weights_with<T: Target + ?Sized>(
    target: &T,
    kernel: &RadialKernel,
    points: ArrayView2<'_, f64>,
    options: ReweightOptions,
) -> Result<ReweightResult> {
    let sample = Sample::uniform(points.to_owned())?;
    let gram = stein_gram_with(target, kernel, &sample, options.gram)?;
    minimize_on_simplex(&gram.matrix, options.max_iters, options.tol)
}

fn objective(gram: &Array2<f64>, q: &Array1<f64>) -> (f64, Array1<f64>) {
    let kq = gram.dot(q);
    (q.dot(&kq), kq)
}

/// Exponentiated-gradient minimization of `q^T K q` over the simplex for a
/// symmetric positive semidefinite `K`.
pub fn minimize_on_simplex(gram: &Array2<f64>, max_iters: usize, tol: f64) -> Result<ReweightResult> {
    let n = gram.nrows();
    if n == 0 || gram.ncols() != n {
        return Err(Error::arg("reweighting needs a non-empty square matrix"));
    }
    if tol.is_nan() || tol < 0.0 {
        return Err(Error::arg(format!("tolerance must be >= 0, got {tol}")));
    }
    let mut q = Array1::from_elem(n, 1.0 / n as f64);
    let (mut f, mut kq) = objective(gram, &q);
    if !f.is_finite() {
        return Err(Error::Numerical("non-finite objective at uniform weights".into()));
    }
    let initial = f;
    if n == 1 {
        return Ok(ReweightResult {
            schema: REWEIGHT_SCHEMA.into(),
            weights: q.to_vec(),
            objective: f,
            initial_objective: initial,
            iterations: 0,
            converged: true,
        });
    }

    let max_diag = gram.diag().iter().copied().fold(f64::MIN_POSITIVE, f64::max);
    let base_step = 1.0 / (2.0 * max_diag);
    let mut step = base_step;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iters {
        iterations += 1;
        let grad = kq.mapv(|v| 2.0 * v);
        let gmin = grad.iter().copied().fold(f64::INFINITY, f64::min);
        let accepted = loop {
            let mut cand = &q * &grad.mapv(|g| (-step * (g - gmin)).exp());
            let total = cand.sum();
            cand /= total;
            let (fc, kqc) = objective(gram, &cand);
            if !fc.is_finite() {
                return Err(Error::Numerical(format!(
                    "non-finite objective at iteration {iterations}"
                )));
            }
            if fc <= f {
                break Some((cand, fc, kqc));
            }
            step *= 0.5;
            if step < base_step * MIN_STEP_RATIO {
                break None;
            }
        };
        let Some((cand, fc, kqc)) = accepted else {
            converged = true;
            break;
        };
        let decrease = (f - fc) / f.abs().max(f64::MIN_POSITIVE);
        q = cand;
        f = fc;
        kq = kqc;
        if decrease < tol {
            converged = true;
            break;
        }
        step *= 2.0;
    }
    Ok(ReweightResult {
        schema: REWEIGHT_SCHEMA.into(),
        weights: q.to_vec(),
        objective: f,
        initial_objective: initial,
        iterations,
        converged,
    })
}

/// `(1/d) |true_mean - Σ_i w_i x_i|²`.
pub fn mean_mse(weights: &[f64], points: ArrayView2<'_, f64>, true_mean: &[f64]) -> Result<f64> {
    check_dim(points.nrows(), weights.len())?;
    check_dim(points.ncols(), true_mean.len())?;
    let d = true_mean.len();
    if d == 0 {
        return Err(Error::arg("mean_mse needs dim >= 1"));
    }
    let estimate = points.t().dot(&ndarray::ArrayView1::from(weights));
    Ok(estimate
        .iter()
        .zip(true_mean)
        .map(|(e, m)| (m - e) * (m - e))
        .sum::<f64>()
        / d as f64)
}
