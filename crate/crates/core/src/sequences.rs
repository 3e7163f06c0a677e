//! Sample generators: on-target i.i.d. draws, off-target sequences that
//! expose weak kernels, and unadjusted Langevin chains.
//!
//! Every generator is a pure function of its arguments and seed; see
//! [`crate::rng`] for the stream layout.

use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, check_finite, Error, Result};
use crate::rng::{self, Stream, StreamRng};
use crate::stein::Sample;
use crate::targets::{random_unit, Target, TargetSpec};

/// Iterates whose norm exceeds this are reported as a diverged chain.
pub const DIVERGENCE_NORM: f64 = 1e8;

/// Default number of consecutive rejections before packing gives up.
pub const DEFAULT_MAX_REJECTIONS: u64 = 1_000_000;

fn check_size(n: usize, dim: usize) -> Result<()> {
    if n == 0 || dim == 0 {
        return Err(Error::arg(format!("need n >= 1 and dim >= 1, got n={n}, dim={dim}")));
    }
    Ok(())
}

fn from_rows(n: usize, dim: usize, data: Vec<f64>) -> Result<Sample> {
    Sample::uniform(Array2::from_shape_vec((n, dim), data).expect("generator filled n*dim values"))
}

fn fill_normal(rng: &mut StreamRng, out: &mut [f64]) {
    for o in out {
        *o = rng.sample(StandardNormal);
    }
}

/// `n` i.i.d. draws from `N(mean, I)` with uniform weights.
pub fn iid_gaussian(n: usize, mean: &[f64], seed: u64) -> Result<Sample> {
    check_size(n, mean.len())?;
    check_finite(mean, "mean")?;
    let d = mean.len();
    let mut rng = rng::stream(seed, Stream::IidGaussian);
    let mut data = vec![0.0; n * d];
    for row in data.chunks_exact_mut(d) {
        fill_normal(&mut rng, row);
        for (x, m) in row.iter_mut().zip(mean) {
            *x += m;
        }
    }
    from_rows(n, d, data)
}

/// `n` i.i.d. draws from the equal mixture of `N(±delta e1, I)`.
pub fn mixture_iid(n: usize, dim: usize, delta: f64, seed: u64) -> Result<Sample> {
    check_size(n, dim)?;
    let mut rng = rng::stream(seed, Stream::MixtureIid);
    let mut data = vec![0.0; n * dim];
    for row in data.chunks_exact_mut(dim) {
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        fill_normal(&mut rng, row);
        row[0] += sign * delta;
    }
    from_rows(n, dim, data)
}

/// `n` i.i.d. draws from the single mixture component `N(-delta e1, I)`.
pub fn single_component(n: usize, dim: usize, delta: f64, seed: u64) -> Result<Sample> {
    check_size(n, dim)?;
    let mut rng = rng::stream(seed, Stream::SingleComponent);
    let mut data = vec![0.0; n * dim];
    for row in data.chunks_exact_mut(dim) {
        fill_normal(&mut rng, row);
        row[0] -= delta;
    }
    from_rows(n, dim, data)
}

/// Radius `2 n^{1/d} log n` of the ball holding a packing of `n` points.
pub fn packing_radius(n: usize, dim: usize) -> f64 {
    2.0 * (n as f64).powf(1.0 / dim as f64) * (n as f64).ln()
}

/// Pairwise separation `2 log n` enforced by a packing of `n` points.
pub fn packing_separation(n: usize) -> f64 {
    2.0 * (n as f64).ln()
}

#[derive(Debug, Clone, Copy)]
pub struct PackingOptions {
    pub max_rejections: u64,
}

impl Default for PackingOptions {
    fn default() -> Self {
        Self {
            max_rejections: DEFAULT_MAX_REJECTIONS,
        }
    }
}

/// Uniform-weight packing: `n` points with pairwise distances greater than
/// `2 log n` inside the ball of radius `2 n^{1/d} log n`, drawn by rejection
/// from the uniform distribution on the ball.
///
/// This sequence does not converge to `N(0, I)`, yet for `d >= 3` it drives
/// light-tailed (Gaussian, Matérn) discrepancies to zero. Below `d = 3` the
/// packing is valid but does not have that property.
pub fn packing(n: usize, dim: usize, seed: u64) -> Result<Sample> {
    packing_with(n, dim, seed, PackingOptions::default())
}

/// [`packing`] with a custom rejection cap. When the cap is hit the search
/// restarts once on a fresh stream before reporting a capacity error.
pub fn packing_with(n: usize, dim: usize, seed: u64, options: PackingOptions) -> Result<Sample> {
    check_size(n, dim)?;
    if n < 2 {
        return Err(Error::arg("packing needs n >= 2"));
    }
    match pack_once(n, dim, rng::stream(seed, Stream::Packing), options) {
        Ok(data) => from_rows(n, dim, data),
        Err(Error::Capacity { .. }) => {
            let data = pack_once(n, dim, rng::stream(seed, Stream::PackingRetry), options)?;
            from_rows(n, dim, data)
        }
        Err(e) => Err(e),
    }
}

fn pack_once(n: usize, dim: usize, mut rng: StreamRng, options: PackingOptions) -> Result<Vec<f64>> {
    let radius = packing_radius(n, dim);
    let sep_sq = packing_separation(n).powi(2);
    let mut accepted: Vec<f64> = Vec::with_capacity(n * dim);
    let mut candidate = vec![0.0; dim];
    let mut rejections = 0u64;
    while accepted.len() < n * dim {
        random_unit(&mut rng, &mut candidate);
        let u: f64 = rng.random();
        let r = radius * u.powf(1.0 / dim as f64);
        candidate.iter_mut().for_each(|c| *c *= r);
        // Rounding can push |candidate| a hair past the radius.
        if candidate.iter().map(|c| c * c).sum::<f64>().sqrt() > radius {
            continue;
        }
        let clear = accepted
            .chunks_exact(dim)
            .all(|p| p.iter().zip(&candidate).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() > sep_sq);
        if clear {
            accepted.extend_from_slice(&candidate);
            rejections = 0;
        } else {
            rejections += 1;
            if rejections >= options.max_rejections {
                return Err(Error::Capacity {
                    accepted: accepted.len() / dim,
                    requested: n,
                    attempts: rejections,
                });
            }
        }
    }
    Ok(accepted)
}

/// Deterministic points `x_i = i n e1`, `i = 1..n`, uniformly weighted.
/// Consecutive points are `n` apart.
pub fn bounded_score_line(n: usize, dim: usize) -> Result<Sample> {
    check_size(n, dim)?;
    let mut data = vec![0.0; n * dim];
    for (i, row) in data.chunks_exact_mut(dim).enumerate() {
        row[0] = ((i + 1) * n) as f64;
    }
    from_rows(n, dim, data)
}

/// Unadjusted Langevin chain `x_{t+1} = x_t + (ε/2) b(x_t) + √ε ξ_t` started
/// at `x0`; the sample holds `x_1, ..., x_n` with uniform weights.
pub fn ula_chain<T: Target + ?Sized>(target: &T, n: usize, step: f64, x0: &[f64], seed: u64) -> Result<Sample> {
    check_size(n, x0.len())?;
    check_dim(target.dim(), x0.len())?;
    check_finite(x0, "x0")?;
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::arg(format!("ULA step size must be positive, got {step}")));
    }
    let d = x0.len();
    let mut rng = rng::stream(seed, Stream::UlaChain);
    let mut x = x0.to_vec();
    let mut b = vec![0.0; d];
    let mut data = Vec::with_capacity(n * d);
    let noise = step.sqrt();
    for t in 0..n {
        target.score_into(&x, &mut b);
        for (xi, bi) in x.iter_mut().zip(&b) {
            let xi_noise: f64 = rng.sample(StandardNormal);
            *xi += 0.5 * step * bi + noise * xi_noise;
        }
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm.is_nan() || norm > DIVERGENCE_NORM {
            return Err(Error::Numerical(format!(
                "ULA chain with step size {step} diverged at iteration {} (|x| = {norm:e})",
                t + 1
            )));
        }
        data.extend_from_slice(&x);
    }
    from_rows(n, d, data)
}

/// JSON description of a generator run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SequenceSpec {
    IidGaussian {
        n: usize,
        dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mean: Option<Vec<f64>>,
        seed: u64,
    },
    MixtureIid {
        n: usize,
        dim: usize,
        delta: f64,
        seed: u64,
    },
    SingleComponent {
        n: usize,
        dim: usize,
        delta: f64,
        seed: u64,
    },
    Packing {
        n: usize,
        dim: usize,
        seed: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_rejections: Option<u64>,
    },
    BoundedScoreLine {
        n: usize,
        dim: usize,
    },
    UlaChain {
        target: TargetSpec,
        n: usize,
        step: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x0: Option<Vec<f64>>,
        seed: u64,
    },
}

impl SequenceSpec {
    pub fn generate(&self) -> Result<Sample> {
        match self {
            SequenceSpec::IidGaussian { n, dim, mean, seed } => {
                let mean = match mean {
                    Some(m) => {
                        check_dim(*dim, m.len())?;
                        m.clone()
                    }
                    None => vec![0.0; *dim],
                };
                iid_gaussian(*n, &mean, *seed)
            }
            SequenceSpec::MixtureIid { n, dim, delta, seed } => mixture_iid(*n, *dim, *delta, *seed),
            SequenceSpec::SingleComponent { n, dim, delta, seed } => single_component(*n, *dim, *delta, *seed),
            SequenceSpec::Packing {
                n,
                dim,
                seed,
                max_rejections,
            } => packing_with(
                *n,
                *dim,
                *seed,
                PackingOptions {
                    max_rejections: max_rejections.unwrap_or(DEFAULT_MAX_REJECTIONS),
                },
            ),
            SequenceSpec::BoundedScoreLine { n, dim } => bounded_score_line(*n, *dim),
            SequenceSpec::UlaChain {
                target,
                n,
                step,
                x0,
                seed,
            } => {
                let target = target.build()?;
                let x0 = x0.clone().unwrap_or_else(|| vec![0.0; target.dim()]);
                ula_chain(&target, *n, *step, &x0, *seed)
            }
        }
    }
}
