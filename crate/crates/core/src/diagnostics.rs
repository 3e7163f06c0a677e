//! Reference quality measures: the exact univariate Wasserstein-1 distance
//! to a known CDF, and log-log decay-rate fits.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{check_dim, Error, Result};
use crate::stein::Sample;

/// Tails are truncated once `F(x)(1 - F(x))` drops below this.
pub const TAIL_CUTOFF: f64 = 1e-12;

/// Absolute tolerance targeted by [`univariate_wasserstein`].
pub const WASSERSTEIN_TOL: f64 = 1e-6;

const GL_ORDER: usize = 64;
const MAX_DEPTH: u32 = 30;
const MAX_TAIL_STEPS: usize = 200;

/// CDF of `N(mean, sd²)`.
pub fn normal_cdf(x: f64, mean: f64, sd: f64) -> f64 {
    0.5 * erfc(-(x - mean) / (sd * std::f64::consts::SQRT_2))
}

/// First-coordinate marginal CDF of the equal mixture of `N(±delta, 1)`.
pub fn mixture_cdf(x: f64, delta: f64) -> f64 {
    0.5 * normal_cdf(x, -delta, 1.0) + 0.5 * normal_cdf(x, delta, 1.0)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on the
/// Legendre polynomial.
fn gauss_legendre() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_ORDER;
        let mut rule = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            rule.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
        }
        rule
    })
}

fn gl(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    half * gauss_legendre()
        .iter()
        .map(|&(x, w)| w * f(mid + half * x))
        .sum::<f64>()
}

/// Adaptive composite Gauss-Legendre on `[a, b]`.
fn integrate(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &impl Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (l, r) = (gl(f, a, m), gl(f, m, b));
        if depth >= MAX_DEPTH || (l + r - whole).abs() <= tol {
            return l + r;
        }
        rec(f, a, m, l, 0.5 * tol, depth + 1) + rec(f, m, b, r, 0.5 * tol, depth + 1)
    }
    if b <= a {
        return 0.0;
    }
    rec(f, a, b, gl(f, a, b), tol, 0)
}

/// Point where the monotone `cdf` crosses `level` inside `[a, b]`.
fn crossing(cdf: &impl Fn(f64) -> f64, level: f64, mut a: f64, mut b: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if cdf(m) < level {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// `∫ |F_n(x) - F(x)| dx` between the weighted empirical CDF of a
/// one-dimensional sample and the target CDF `cdf`.
///
/// Between consecutive sample points the empirical CDF is a constant `c`;
/// the segment is split where `F` crosses `c` and each piece is integrated by
/// adaptive 64-point Gauss-Legendre quadrature. The tails are integrated
/// outward in doubling steps until `F(1 - F)` falls below [`TAIL_CUTOFF`].
pub fn univariate_wasserstein(sample: &Sample, cdf: impl Fn(f64) -> f64) -> Result<f64> {
    check_dim(1, sample.dim())?;
    let mut atoms: Vec<(f64, f64)> = (0..sample.len())
        .map(|i| (sample.point(i)[0], sample.weights()[i]))
        .collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut support: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
    for (x, w) in atoms {
        match support.last_mut() {
            Some(last) if last.0 == x => last.1 += w,
            _ => support.push((x, w)),
        }
    }

    let n_seg = support.len() + 1;
    let seg_tol = WASSERSTEIN_TOL * 1e-3 / n_seg as f64;
    let lo = support[0].0;
    let hi = support[support.len() - 1].0;
    let width = (hi - lo).max(1.0);
    let tail_done = |x: f64| {
        let f = cdf(x);
        f * (1.0 - f) < TAIL_CUTOFF
    };

    let mut total = 0.0;

    // Left tail: ∫_{-∞}^{lo} F.
    let (mut b, mut w) = (lo, width);
    for _ in 0..MAX_TAIL_STEPS {
        if tail_done(b) && cdf(b) < 0.5 {
            break;
        }
        total += integrate(&cdf, b - w, b, seg_tol);
        b -= w;
        w *= 2.0;
    }

    // Interior segments.
    let mut level = 0.0;
    for pair in support.windows(2) {
        level += pair[0].1;
        let (a, b) = (pair[0].0, pair[1].0);
        let c = level.min(1.0);
        let gap = |x: f64| (c - cdf(x)).abs();
        let (fa, fb) = (cdf(a), cdf(b));
        total += if fa < c && c < fb {
            let m = crossing(&cdf, c, a, b);
            integrate(&gap, a, m, seg_tol) + integrate(&gap, m, b, seg_tol)
        } else {
            integrate(&gap, a, b, seg_tol)
        };
    }

    // Right tail: ∫_{hi}^{∞} (1 - F).
    let survival = |x: f64| 1.0 - cdf(x);
    let (mut a, mut w) = (hi, width);
    for _ in 0..MAX_TAIL_STEPS {
        if tail_done(a) && cdf(a) > 0.5 {
            break;
        }
        total += integrate(&survival, a, a + w, seg_tol);
        a += w;
        w *= 2.0;
    }

    if !total.is_finite() {
        return Err(Error::Numerical("Wasserstein integral is not finite".into()));
    }
    Ok(total)
}

/// Least-squares fit of `log(value) = intercept + slope · log(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares of `log(values)` on `log(ns)`.
pub fn decay_slope(ns: &[f64], values: &[f64]) -> Result<DecayFit> {
    if ns.len() != values.len() {
        return Err(Error::arg(format!(
            "decay fit needs equal lengths, got {} and {}",
            ns.len(),
            values.len()
        )));
    }
    if ns.len() < 3 {
        return Err(Error::arg("decay fit needs at least 3 points"));
    }
    if let Some(bad) = ns.iter().chain(values).find(|&&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::arg(format!("decay fit needs positive finite inputs, got {bad}")));
    }
    let x: Vec<f64> = ns.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("all n values are equal".into()));
    }
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(&y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r_squared = if syy <= f64::EPSILON * m * my.abs().max(1.0) {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(DecayFit {
        slope,
        intercept,
        r_squared,
    })
}
