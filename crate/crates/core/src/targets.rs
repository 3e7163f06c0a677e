//! Target distributions, described through their score `b(x) = ∇ log p(x)`.
//!
//! Only the score is needed for a Stein discrepancy, so targets never carry a
//! normalizing constant. Targets that know their unnormalized log-density
//! expose it so the score can be cross-checked by finite differences.

use std::fmt;
use std::io::Read;
use std::path::PathBuf;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, check_finite, Error, Result};
use crate::rng::{self, Stream};

/// An unnormalized target density on `R^dim`.
pub trait Target: Send + Sync {
    fn dim(&self) -> usize;

    /// Writes `∇ log p(x)` into `out`. Both slices have length `dim()`.
    fn score_into(&self, x: &[f64], out: &mut [f64]);

    /// Unnormalized log-density, when available.
    fn log_density(&self, _x: &[f64]) -> Option<f64> {
        None
    }

    /// Short human-readable description used in reports.
    fn describe(&self) -> String;
}

/// Validated score evaluation.
pub fn score<T: Target + ?Sized>(target: &T, x: &[f64]) -> Result<Vec<f64>> {
    check_dim(target.dim(), x.len())?;
    check_finite(x, "score input")?;
    let mut out = vec![0.0; x.len()];
    target.score_into(x, &mut out);
    Ok(out)
}

/// `N(mean, I)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianTarget {
    mean: Vec<f64>,
}

impl GaussianTarget {
    pub fn new(mean: Vec<f64>) -> Result<Self> {
        if mean.is_empty() {
            return Err(Error::arg("gaussian target needs dim >= 1"));
        }
        check_finite(&mean, "gaussian mean")?;
        Ok(Self { mean })
    }

    pub fn standard(dim: usize) -> Result<Self> {
        Self::new(vec![0.0; dim])
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }
}

impl Target for GaussianTarget {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn score_into(&self, x: &[f64], out: &mut [f64]) {
        for ((o, xi), mi) in out.iter_mut().zip(x).zip(&self.mean) {
            *o = mi - xi;
        }
    }

    fn log_density(&self, x: &[f64]) -> Option<f64> {
        Some(-0.5 * x.iter().zip(&self.mean).map(|(a, m)| (a - m) * (a - m)).sum::<f64>())
    }

    fn describe(&self) -> String {
        if self.mean.iter().all(|&m| m == 0.0) {
            format!("gaussian(d={})", self.dim())
        } else {
            format!("gaussian(d={}, mean={:?})", self.dim(), self.mean)
        }
    }
}

/// Equal mixture of `N(-delta e1, I)` and `N(delta e1, I)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetricMixtureTarget {
    dim: usize,
    delta: f64,
}

impl SymmetricMixtureTarget {
    pub fn new(dim: usize, delta: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::arg("mixture target needs dim >= 1"));
        }
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(Error::arg(format!(
                "mixture delta must be finite and >= 0, got {delta}"
            )));
        }
        Ok(Self { dim, delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

impl Target for SymmetricMixtureTarget {
    fn dim(&self) -> usize {
        self.dim
    }

    // tanh form; the ratio of exponentials overflows for |x1| beyond ~40.
    fn score_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, xi) in out.iter_mut().zip(x) {
            *o = -xi;
        }
        out[0] += self.delta * (self.delta * x[0]).tanh();
    }

    fn log_density(&self, x: &[f64]) -> Option<f64> {
        // log(e^{-|x+Δe1|²/2} + e^{-|x-Δe1|²/2}) = -|x|²/2 - Δ²/2 + log(2 cosh(Δ x1))
        let sq: f64 = x.iter().map(|v| v * v).sum();
        let a = (self.delta * x[0]).abs();
        let log_2cosh = a + (-2.0 * a).exp().ln_1p();
        Some(-0.5 * sq - 0.5 * self.delta * self.delta + log_2cosh)
    }

    fn describe(&self) -> String {
        format!("mixture(d={}, delta={})", self.dim, self.delta)
    }
}

/// Bayesian logistic regression posterior under a flat prior, labels in {0, 1}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticRegressionTarget {
    dim: usize,
    /// Row-major `L x dim`.
    covariates: Vec<f64>,
    labels: Vec<f64>,
}

impl LogisticRegressionTarget {
    pub fn new(covariates: Vec<Vec<f64>>, labels: Vec<f64>) -> Result<Self> {
        let dim = covariates.first().map_or(0, Vec::len);
        if dim == 0 {
            return Err(Error::arg(
                "logistic target needs at least one covariate row with dim >= 1",
            ));
        }
        if covariates.len() != labels.len() {
            return Err(Error::arg(format!(
                "logistic target: {} covariate rows but {} labels",
                covariates.len(),
                labels.len()
            )));
        }
        let mut flat = Vec::with_capacity(dim * covariates.len());
        for (i, row) in covariates.iter().enumerate() {
            check_dim(dim, row.len())?;
            check_finite(row, &format!("covariate row {i}"))?;
            flat.extend_from_slice(row);
        }
        if let Some(bad) = labels.iter().find(|&&y| y != 0.0 && y != 1.0) {
            return Err(Error::arg(format!("logistic labels must be 0 or 1, got {bad}")));
        }
        Ok(Self {
            dim,
            covariates: flat,
            labels,
        })
    }

    /// Reads observations from CSV: one row per observation, covariates
    /// followed by the label in the last column. A header row is skipped if
    /// its first field is not numeric.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let rows = crate::io::read_numeric_rows(reader)?;
        let mut covariates = Vec::with_capacity(rows.len());
        let mut labels = Vec::with_capacity(rows.len());
        for mut row in rows {
            if row.len() < 2 {
                return Err(Error::Parse("logistic CSV rows need covariates and a label".into()));
            }
            labels.push(row.pop().unwrap());
            covariates.push(row);
        }
        Self::new(covariates, labels)
    }

    pub fn observations(&self) -> usize {
        self.labels.len()
    }

    fn rows(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.covariates.chunks_exact(self.dim).zip(self.labels.iter().copied())
    }
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^t)` without overflow.
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

impl Target for LogisticRegressionTarget {
    fn dim(&self) -> usize {
        self.dim
    }

    fn score_into(&self, theta: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (v, y) in self.rows() {
            let t: f64 = v.iter().zip(theta).map(|(a, b)| a * b).sum();
            let resid = y - sigmoid(t);
            for (o, vk) in out.iter_mut().zip(v) {
                *o += resid * vk;
            }
        }
    }

    fn log_density(&self, theta: &[f64]) -> Option<f64> {
        // y log σ(t) + (1-y) log(1-σ(t)) = y t - log(1 + e^t)
        Some(
            self.rows()
                .map(|(v, y)| {
                    let t: f64 = v.iter().zip(theta).map(|(a, b)| a * b).sum();
                    y * t - softplus(t)
                })
                .sum(),
        )
    }

    fn describe(&self) -> String {
        format!("logistic(d={}, observations={})", self.dim, self.observations())
    }
}

/// `log p(x) = -sqrt(1 + |x|²)`: a light-tailed target whose score is
/// bounded by 1 in norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PseudoHuberTarget {
    dim: usize,
}

impl PseudoHuberTarget {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::arg("pseudo-Huber target needs dim >= 1"));
        }
        Ok(Self { dim })
    }
}

impl Target for PseudoHuberTarget {
    fn dim(&self) -> usize {
        self.dim
    }

    fn score_into(&self, x: &[f64], out: &mut [f64]) {
        let scale = 1.0 / (1.0 + x.iter().map(|v| v * v).sum::<f64>()).sqrt();
        for (o, xi) in out.iter_mut().zip(x) {
            *o = -xi * scale;
        }
    }

    fn log_density(&self, x: &[f64]) -> Option<f64> {
        Some(-(1.0 + x.iter().map(|v| v * v).sum::<f64>()).sqrt())
    }

    fn describe(&self) -> String {
        format!("pseudo_huber(d={})", self.dim)
    }
}

/// JSON description of a shipped target, e.g.
/// `{"kind": "mixture", "dim": 1, "delta": 1.5}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSpec {
    Gaussian {
        dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mean: Option<Vec<f64>>,
    },
    Mixture {
        dim: usize,
        delta: f64,
    },
    Logistic {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        covariates: Option<Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<f64>>,
        /// CSV of observations, label in the last column.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        csv: Option<PathBuf>,
    },
    PseudoHuber {
        dim: usize,
    },
}

impl TargetSpec {
    pub fn build(&self) -> Result<AnyTarget> {
        Ok(match self {
            TargetSpec::Gaussian { dim, mean } => {
                let mean = match mean {
                    Some(m) => {
                        check_dim(*dim, m.len())?;
                        m.clone()
                    }
                    None => vec![0.0; *dim],
                };
                AnyTarget::Gaussian(GaussianTarget::new(mean)?)
            }
            TargetSpec::Mixture { dim, delta } => AnyTarget::Mixture(SymmetricMixtureTarget::new(*dim, *delta)?),
            TargetSpec::Logistic {
                covariates,
                labels,
                csv,
            } => {
                let target = match (covariates, labels, csv) {
                    (Some(c), Some(l), None) => LogisticRegressionTarget::new(c.clone(), l.clone())?,
                    (None, None, Some(path)) => LogisticRegressionTarget::from_csv(std::fs::File::open(path)?)?,
                    _ => return Err(Error::arg("logistic target needs either covariates+labels or csv")),
                };
                AnyTarget::Logistic(target)
            }
            TargetSpec::PseudoHuber { dim } => AnyTarget::PseudoHuber(PseudoHuberTarget::new(*dim)?),
        })
    }
}

/// Any of the shipped targets.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyTarget {
    Gaussian(GaussianTarget),
    Mixture(SymmetricMixtureTarget),
    Logistic(LogisticRegressionTarget),
    PseudoHuber(PseudoHuberTarget),
}

impl AnyTarget {
    fn inner(&self) -> &dyn Target {
        match self {
            AnyTarget::Gaussian(t) => t,
            AnyTarget::Mixture(t) => t,
            AnyTarget::Logistic(t) => t,
            AnyTarget::PseudoHuber(t) => t,
        }
    }
}

impl Target for AnyTarget {
    fn dim(&self) -> usize {
        self.inner().dim()
    }
    fn score_into(&self, x: &[f64], out: &mut [f64]) {
        self.inner().score_into(x, out)
    }
    fn log_density(&self, x: &[f64]) -> Option<f64> {
        self.inner().log_density(x)
    }
    fn describe(&self) -> String {
        self.inner().describe()
    }
}

impl fmt::Display for AnyTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

/// Region from which the first point of each probe pair is drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeBox {
    pub half_width: f64,
}

impl Default for ProbeBox {
    fn default() -> Self {
        Self { half_width: 10.0 }
    }
}

/// Monte Carlo upper estimate of the distant-dissipativity profile
/// `κ(r) = inf { -2<b(x)-b(y), x-y> / |x-y|² : |x-y| = r }`, probing
/// `trials` pairs with `x` uniform in `[-10, 10]^d`.
pub fn dissipativity_profile<T: Target + ?Sized>(target: &T, r: f64, trials: usize, seed: u64) -> Result<f64> {
    dissipativity_profile_in(target, r, trials, seed, ProbeBox::default())
}

/// [`dissipativity_profile`] over a custom probe box.
///
/// Pairs are drawn sequentially from one stream, so the estimate with `m`
/// trials is the running minimum after the first `m` pairs of any longer run.
pub fn dissipativity_profile_in<T: Target + ?Sized>(
    target: &T,
    r: f64,
    trials: usize,
    seed: u64,
    probe: ProbeBox,
) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::arg(format!("dissipativity radius must be positive, got {r}")));
    }
    if trials == 0 {
        return Err(Error::arg("dissipativity profile needs trials >= 1"));
    }
    if !(probe.half_width > 0.0 && probe.half_width.is_finite()) {
        return Err(Error::arg("probe half-width must be positive"));
    }
    let d = target.dim();
    let mut rng = rng::stream(seed, Stream::Dissipativity);
    let mut x = vec![0.0; d];
    let mut y = vec![0.0; d];
    let mut dir = vec![0.0; d];
    let mut bx = vec![0.0; d];
    let mut by = vec![0.0; d];
    let mut best = f64::INFINITY;
    for _ in 0..trials {
        for xi in x.iter_mut() {
            *xi = rng.random_range(-probe.half_width..=probe.half_width);
        }
        random_unit(&mut rng, &mut dir);
        for ((yi, xi), ui) in y.iter_mut().zip(&x).zip(&dir) {
            *yi = xi + r * ui;
        }
        target.score_into(&x, &mut bx);
        target.score_into(&y, &mut by);
        let mut inner = 0.0;
        let mut sq = 0.0;
        for k in 0..d {
            let dx = x[k] - y[k];
            inner += (bx[k] - by[k]) * dx;
            sq += dx * dx;
        }
        best = best.min(-2.0 * inner / sq);
    }
    Ok(best)
}

pub(crate) fn random_unit<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    loop {
        let mut norm_sq = 0.0;
        for o in out.iter_mut() {
            *o = rng.sample(StandardNormal);
            norm_sq += *o * *o;
        }
        if norm_sq > 1e-300 {
            let inv = norm_sq.sqrt().recip();
            out.iter_mut().for_each(|o| *o *= inv);
            return;
        }
    }
}
