//! Radial base kernels `k(x, y) = f(|x - y|²)`.
//!
//! Each kernel exposes its profile `f` together with `f'` and `f''` in the
//! squared distance `s`. Every derivative the Stein kernel consumes follows
//! from the chain rule:
//!
//! ```text
//! ∇_{x_j} k       =  2 (x_j - y_j) f'(s)
//! ∇_{y_j} k       = -2 (x_j - y_j) f'(s)
//! ∇_{x_j}∇_{y_j} k = -2 f'(s) - 4 (x_j - y_j)² f''(s)
//! ```

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Values of a radial profile and its first two derivatives at `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Profile {
    pub f: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Below this distance the Matérn-3/2 second derivative term is replaced by
/// its limit.
const MATERN_DIAGONAL: f64 = 1e-9;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// A radial base kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialKernel {
    /// Inverse multiquadric `(c² + s)^β`, `β ∈ (-1, 0)`.
    Imq { c: f64, beta: f64 },
    /// Bandwidth-scaled inverse multiquadric `(1 + s/h)^β`.
    ScaledImq { h: f64, beta: f64 },
    /// Gaussian `exp(-s/h)`.
    Gaussian { h: f64 },
    /// Matérn-3/2 `(1 + √3 r) exp(-√3 r)`, `r = √s`.
    Matern32,
}

impl RadialKernel {
    pub fn imq(c: f64, beta: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::arg(format!("IMQ c must be positive, got {c}")));
        }
        check_imq_beta(beta)?;
        Ok(RadialKernel::Imq { c, beta })
    }

    /// `(c² + s)^{-1/2}` with `c = 1`.
    pub fn imq_default() -> Self {
        RadialKernel::Imq { c: 1.0, beta: -0.5 }
    }

    pub fn scaled_imq(h: f64, beta: f64) -> Result<Self> {
        check_bandwidth(h)?;
        check_imq_beta(beta)?;
        Ok(RadialKernel::ScaledImq { h, beta })
    }

    pub fn gaussian(h: f64) -> Result<Self> {
        check_bandwidth(h)?;
        Ok(RadialKernel::Gaussian { h })
    }

    pub fn matern32() -> Self {
        RadialKernel::Matern32
    }

    pub fn name(&self) -> &'static str {
        match self {
            RadialKernel::Imq { .. } => "imq",
            RadialKernel::ScaledImq { .. } => "scaled_imq",
            RadialKernel::Gaussian { .. } => "gaussian",
            RadialKernel::Matern32 => "matern32",
        }
    }

    /// Profile triple at squared distance `s >= 0`.
    pub fn profile(&self, s: f64) -> Profile {
        match *self {
            RadialKernel::Imq { c, beta } => {
                let base = c * c + s;
                let f = base.powf(beta);
                let d1 = beta * f / base;
                Profile {
                    f,
                    d1,
                    d2: (beta - 1.0) * d1 / base,
                }
            }
            RadialKernel::ScaledImq { h, beta } => {
                let base = 1.0 + s / h;
                let f = base.powf(beta);
                let d1 = beta * f / (base * h);
                Profile {
                    f,
                    d1,
                    d2: (beta - 1.0) * d1 / (base * h),
                }
            }
            RadialKernel::Gaussian { h } => {
                let f = (-s / h).exp();
                Profile {
                    f,
                    d1: -f / h,
                    d2: f / (h * h),
                }
            }
            RadialKernel::Matern32 => {
                let r = s.sqrt();
                let e = (-SQRT3 * r).exp();
                // f'' = 3√3 e / (4r) has a removable singularity in every
                // expression it enters ((x_j - y_j)² f'' -> 0), so it is
                // reported as 0 on the diagonal.
                let d2 = if r < MATERN_DIAGONAL {
                    0.0
                } else {
                    3.0 * SQRT3 * e / (4.0 * r)
                };
                Profile {
                    f: (1.0 + SQRT3 * r) * e,
                    d1: -1.5 * e,
                    d2,
                }
            }
        }
    }

    /// `k(x, y)`.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_dim(x.len(), y.len())?;
        Ok(self.profile(sq_dist(x, y)).f)
    }

    /// `∇_{x_j} k(x, y)`.
    pub fn grad_x_coord(&self, j: usize, x: &[f64], y: &[f64]) -> Result<f64> {
        check_coord(j, x, y)?;
        Ok(2.0 * (x[j] - y[j]) * self.profile(sq_dist(x, y)).d1)
    }

    /// `∇_{y_j} k(x, y) = -∇_{x_j} k(x, y)`.
    pub fn grad_y_coord(&self, j: usize, x: &[f64], y: &[f64]) -> Result<f64> {
        Ok(-self.grad_x_coord(j, x, y)?)
    }

    /// `∇_{x_j}∇_{y_j} k(x, y)`.
    pub fn cross_coord(&self, j: usize, x: &[f64], y: &[f64]) -> Result<f64> {
        check_coord(j, x, y)?;
        let p = self.profile(sq_dist(x, y));
        let u = x[j] - y[j];
        Ok(-2.0 * p.d1 - 4.0 * u * u * p.d2)
    }

    /// Gram matrix `k(x_i, x_j)` over the rows of `points`.
    pub fn gram(&self, points: ArrayView2<'_, f64>) -> Array2<f64> {
        let n = points.nrows();
        let mut k = Array2::zeros((n, n));
        for i in 0..n {
            for j in i..n {
                let v = self.profile(sq_dist_views(points.row(i), points.row(j))).f;
                k[[i, j]] = v;
                k[[j, i]] = v;
            }
        }
        k
    }
}

fn check_imq_beta(beta: f64) -> Result<()> {
    if !(beta > -1.0 && beta < 0.0) {
        return Err(Error::arg(format!("IMQ beta must lie in (-1, 0), got {beta}")));
    }
    Ok(())
}

fn check_bandwidth(h: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::arg(format!("bandwidth must be positive and finite, got {h}")));
    }
    Ok(())
}

fn check_coord(j: usize, x: &[f64], y: &[f64]) -> Result<()> {
    check_dim(x.len(), y.len())?;
    if j >= x.len() {
        return Err(Error::arg(format!("coordinate {j} out of range for dim {}", x.len())));
    }
    Ok(())
}

#[inline]
pub(crate) fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn sq_dist_views(x: ndarray::ArrayView1<'_, f64>, y: ndarray::ArrayView1<'_, f64>) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| (a - b) * (a - b)).sum()
}

impl fmt::Display for RadialKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadialKernel::Imq { c, beta } => write!(f, "imq(c={c}, beta={beta})"),
            RadialKernel::ScaledImq { h, beta } => write!(f, "scaled_imq(h={h}, beta={beta})"),
            RadialKernel::Gaussian { h } => write!(f, "gaussian(h={h})"),
            RadialKernel::Matern32 => f.write_str("matern32"),
        }
    }
}

/// Median of the squared Euclidean distances over all unordered pairs of
/// rows; the mean of the two central values when the pair count is even.
pub fn median_bandwidth(points: ArrayView2<'_, f64>) -> Result<f64> {
    let n = points.nrows();
    if n < 2 {
        return Err(Error::arg(format!("median bandwidth needs n >= 2 points, got {n}")));
    }
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            dists.push(sq_dist_views(points.row(i), points.row(j)));
        }
    }
    let m = dists.len();
    let mid = m / 2;
    let (_, &mut upper, _) = dists.select_nth_unstable_by(mid, f64::total_cmp);
    let median = if m % 2 == 1 {
        upper
    } else {
        let lower = dists[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    };
    if median <= 0.0 {
        return Err(Error::Degenerate("median pairwise squared distance is 0".into()));
    }
    if !median.is_finite() {
        return Err(Error::arg("non-finite point coordinates"));
    }
    Ok(median)
}

/// Bandwidth that is either fixed or chosen by the median heuristic on the
/// sample at hand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    Fixed(f64),
    Median,
}

impl Serialize for Bandwidth {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Bandwidth::Fixed(h) => s.serialize_f64(*h),
            Bandwidth::Median => s.serialize_str("median"),
        }
    }
}

impl<'de> Deserialize<'de> for Bandwidth {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(h) => Ok(Bandwidth::Fixed(h)),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl FromStr for Bandwidth {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("median") {
            return Ok(Bandwidth::Median);
        }
        s.parse::<f64>()
            .map(Bandwidth::Fixed)
            .map_err(|_| Error::Parse(format!("bandwidth must be a number or \"median\", got {s:?}")))
    }
}

impl fmt::Display for Bandwidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bandwidth::Fixed(h) => write!(f, "{h}"),
            Bandwidth::Median => f.write_str("median"),
        }
    }
}

fn default_c() -> f64 {
    1.0
}
fn default_beta() -> f64 {
    -0.5
}

/// JSON / command-line description of a kernel, possibly with a
/// sample-dependent bandwidth, e.g. `{"kind": "gaussian", "h": "median"}`.
///
/// An IMQ spec with `h` set builds the bandwidth-scaled form `(1 + s/h)^β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    Imq {
        #[serde(default = "default_c")]
        c: f64,
        #[serde(default = "default_beta")]
        beta: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        h: Option<Bandwidth>,
    },
    Gaussian {
        h: Bandwidth,
    },
    Matern32,
}

impl KernelSpec {
    pub fn needs_sample(&self) -> bool {
        matches!(
            self,
            KernelSpec::Imq {
                h: Some(Bandwidth::Median),
                ..
            } | KernelSpec::Gaussian { h: Bandwidth::Median }
        )
    }

    /// Builds the kernel; `points` is consulted only for a median bandwidth.
    pub fn resolve(&self, points: Option<ArrayView2<'_, f64>>) -> Result<RadialKernel> {
        let bandwidth = |b: Bandwidth| -> Result<f64> {
            match b {
                Bandwidth::Fixed(h) => Ok(h),
                Bandwidth::Median => match points {
                    Some(p) => median_bandwidth(p),
                    None => Err(Error::arg("median bandwidth requires a sample")),
                },
            }
        };
        match *self {
            KernelSpec::Imq { c, beta, h: None } => RadialKernel::imq(c, beta),
            KernelSpec::Imq { beta, h: Some(h), .. } => RadialKernel::scaled_imq(bandwidth(h)?, beta),
            KernelSpec::Gaussian { h } => RadialKernel::gaussian(bandwidth(h)?),
            KernelSpec::Matern32 => Ok(RadialKernel::Matern32),
        }
    }
}

impl From<RadialKernel> for KernelSpec {
    fn from(k: RadialKernel) -> Self {
        match k {
            RadialKernel::Imq { c, beta } => KernelSpec::Imq { c, beta, h: None },
            RadialKernel::ScaledImq { h, beta } => KernelSpec::Imq {
                c: 1.0,
                beta,
                h: Some(Bandwidth::Fixed(h)),
            },
            RadialKernel::Gaussian { h } => KernelSpec::Gaussian { h: Bandwidth::Fixed(h) },
            RadialKernel::Matern32 => KernelSpec::Matern32,
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Imq { c, beta, h: None } => write!(f, "imq(c={c}, beta={beta})"),
            KernelSpec::Imq { beta, h: Some(h), .. } => write!(f, "imq(h={h}, beta={beta})"),
            KernelSpec::Gaussian { h } => write!(f, "gaussian(h={h})"),
            KernelSpec::Matern32 => f.write_str("matern32"),
        }
    }
}
