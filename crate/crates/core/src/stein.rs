//! Langevin Stein kernels and the closed-form kernel Stein discrepancy.
//!
//! For a target with score `b` and a radial base kernel `k`, coordinate `j`
//! of the Stein kernel is
//!
//! ```text
//! k0_j(x, y) = b_j(x) b_j(y) k(x, y) + b_j(x) ∇_{y_j} k(x, y)
//!            + b_j(y) ∇_{x_j} k(x, y) + ∇_{x_j}∇_{y_j} k(x, y)
//! ```
//!
//! and the discrepancy of a weighted sample `Q = Σ q_i δ_{x_i}` under a norm
//! `‖·‖` is `‖w‖` with `w_j = sqrt(Σ_{i,i'} q_i q_i' k0_j(x_i, x_i'))`.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, check_finite, Error, Result};
use crate::kernels::{sq_dist, Profile, RadialKernel};
use crate::targets::Target;

/// Quadratic forms below this are treated as a broken kernel/target pairing
/// rather than roundoff.
pub const NEGATIVE_FORM_TOLERANCE: f64 = 1e-10;

/// Default cap on the size of a materialized Stein Gram matrix (2 GiB).
pub const DEFAULT_MEMORY_BUDGET: usize = 2 << 30;

/// A weighted point set `Σ q_i δ_{x_i}`; weights lie on the simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    points: Array2<f64>,
    weights: Vec<f64>,
    weight_correction: f64,
}

impl Sample {
    /// Builds a sample from rows of `points` and nonnegative weights, which
    /// are normalized to sum to one.
    pub fn new(points: Array2<f64>, weights: Vec<f64>) -> Result<Self> {
        let n = points.nrows();
        if n == 0 || points.ncols() == 0 {
            return Err(Error::arg("sample needs n >= 1 points of dim >= 1"));
        }
        check_dim(n, weights.len())?;
        let points = points.as_standard_layout().into_owned();
        check_finite(points.as_slice().expect("standard layout"), "sample points")?;
        check_finite(&weights, "sample weights")?;
        if let Some(w) = weights.iter().find(|&&w| w < 0.0) {
            return Err(Error::arg(format!("sample weights must be nonnegative, got {w}")));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::arg("sample weights sum to zero"));
        }
        let weights = if total == 1.0 {
            weights
        } else {
            weights.into_iter().map(|w| w / total).collect()
        };
        Ok(Self {
            points,
            weights,
            weight_correction: total - 1.0,
        })
    }

    pub fn uniform(points: Array2<f64>) -> Result<Self> {
        let n = points.nrows();
        Self::new(points, vec![1.0 / n.max(1) as f64; n])
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.points.as_slice().expect("standard layout")[i * d..(i + 1) * d]
    }

    pub fn points(&self) -> ArrayView2<'_, f64> {
        self.points.view()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Sum of the supplied weights minus one, before normalization.
    pub fn weight_correction(&self) -> f64 {
        self.weight_correction
    }

    /// The first `m` points, reweighted uniformly.
    pub fn head(&self, m: usize) -> Result<Sample> {
        if m == 0 || m > self.len() {
            return Err(Error::arg(format!("head({m}) of a sample with {} points", self.len())));
        }
        Sample::uniform(self.points.slice(ndarray::s![..m, ..]).to_owned())
    }

    /// Same support, new weights.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Sample> {
        Sample::new(self.points.clone(), weights)
    }

    /// True when every weight equals `1/n` up to roundoff.
    pub fn is_uniform(&self) -> bool {
        let u = 1.0 / self.len() as f64;
        self.weights
            .iter()
            .all(|w| (w - u).abs() <= 1e-12 * u.max(1e-300) + 1e-15)
    }
}

/// `k0_j` at one coordinate, from precomputed scores and the profile at `|x-y|²`.
#[inline]
fn coord_term(bx: f64, by: f64, u: f64, p: &Profile) -> f64 {
    bx * by * p.f + 2.0 * p.d1 * u * (by - bx) - 2.0 * p.d1 - 4.0 * u * u * p.d2
}

/// Writes every `k0_j(x, y)` into `out` and returns their sum (accumulated in
/// coordinate order). The kernel profile is evaluated once.
#[inline]
fn stein_terms(kernel: &RadialKernel, x: &[f64], y: &[f64], bx: &[f64], by: &[f64], out: &mut [f64]) -> f64 {
    let p = kernel.profile(sq_dist(x, y));
    let mut total = 0.0;
    for j in 0..x.len() {
        let v = coord_term(bx[j], by[j], x[j] - y[j], &p);
        out[j] = v;
        total += v;
    }
    total
}

fn scores_of<T: Target + ?Sized>(target: &T, x: &[f64], y: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    check_dim(target.dim(), x.len())?;
    check_dim(target.dim(), y.len())?;
    check_finite(x, "x")?;
    check_finite(y, "y")?;
    let mut bx = vec![0.0; x.len()];
    let mut by = vec![0.0; y.len()];
    target.score_into(x, &mut bx);
    target.score_into(y, &mut by);
    Ok((bx, by))
}

/// Coordinate `j` of the Stein kernel, `k0_j(x, y)`.
pub fn stein_kernel_coord<T: Target + ?Sized>(
    target: &T,
    kernel: &RadialKernel,
    j: usize,
    x: &[f64],
    y: &[f64],
) -> Result<f64> {
    let (bx, by) = scores_of(target, x, y)?;
    if j >= x.len() {
        return Err(Error::arg(format!("coordinate {j} out of range for dim {}", x.len())));
    }
    let p = kernel.profile(sq_dist(x, y));
    Ok(coord_term(bx[j], by[j], x[j] - y[j], &p))
}

/// `k0(x, y) = Σ_j k0_j(x, y)`.
pub fn stein_kernel_sum<T: Target + ?Sized>(target: &T, kernel: &RadialKernel, x: &[f64], y: &[f64]) -> Result<f64> {
    let (bx, by) = scores_of(target, x, y)?;
    let mut scratch = vec![0.0; x.len()];
    Ok(stein_terms(kernel, x, y, &bx, &by, &mut scratch))
}

/// Sums `values` with a fixed pairwise tree, so the result depends only on
/// the input order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 16;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let (a, b) = values.split_at(values.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// A sample together with the target score at every point.
struct Scored<'a> {
    sample: &'a Sample,
    scores: Vec<f64>,
}

impl<'a> Scored<'a> {
    fn new<T: Target + ?Sized>(target: &T, sample: &'a Sample) -> Result<Self> {
        check_dim(target.dim(), sample.dim())?;
        let d = sample.dim();
        let mut scores = vec![0.0; sample.len() * d];
        scores
            .par_chunks_mut(d)
            .enumerate()
            .for_each(|(i, out)| target.score_into(sample.point(i), out));
        if let Some(i) = scores.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("non-finite score at sample point {}", i / d)));
        }
        Ok(Self { sample, scores })
    }

    fn score(&self, i: usize) -> &[f64] {
        let d = self.sample.dim();
        &self.scores[i * d..(i + 1) * d]
    }

    /// Upper-triangular pass over row `i`: returns the per-coordinate
    /// contribution `q_i (q_i k0_j(x_i,x_i) + 2 Σ_{i'>i} q_i' k0_j(x_i,x_i'))`
    /// and, when requested, the summed kernel entries for `i' >= i`.
    fn row(&self, kernel: &RadialKernel, i: usize, keep_entries: bool) -> (Vec<f64>, Vec<f64>) {
        let n = self.sample.len();
        let d = self.sample.dim();
        let q = self.sample.weights();
        let xi = self.sample.point(i);
        let bi = self.score(i);
        let mut terms = vec![0.0; d];
        let mut acc = vec![0.0; d];
        let mut entries = Vec::with_capacity(if keep_entries { n - i } else { 0 });
        for (ip, &qp) in q.iter().enumerate().skip(i) {
            let total = stein_terms(kernel, xi, self.sample.point(ip), bi, self.score(ip), &mut terms);
            if keep_entries {
                entries.push(total);
            }
            let c = if ip == i { qp } else { 2.0 * qp };
            for (a, t) in acc.iter_mut().zip(&terms) {
                *a += c * t;
            }
        }
        acc.iter_mut().for_each(|a| *a *= q[i]);
        (acc, entries)
    }

    /// Per-coordinate quadratic forms from per-row contributions.
    fn reduce(rows: &[Vec<f64>], d: usize) -> Vec<f64> {
        let mut column = vec![0.0; rows.len()];
        (0..d)
            .map(|j| {
                for (c, r) in column.iter_mut().zip(rows) {
                    *c = r[j];
                }
                pairwise_sum(&column)
            })
            .collect()
    }

    fn quadratic_forms(&self, kernel: &RadialKernel) -> Vec<f64> {
        let rows: Vec<Vec<f64>> = (0..self.sample.len())
            .into_par_iter()
            .map(|i| self.row(kernel, i, false).0)
            .collect();
        Self::reduce(&rows, self.sample.dim())
    }
}

/// Per-coordinate quadratic forms `q^T K0_j q`, computed row by row without
/// storing the Gram matrix.
pub fn quadratic_forms<T: Target + ?Sized>(target: &T, kernel: &RadialKernel, sample: &Sample) -> Result<Vec<f64>> {
    Ok(Scored::new(target, sample)?.quadratic_forms(kernel))
}

/// Materialized Stein Gram matrix `K0[i][i'] = k0(x_i, x_i')`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteinGram {
    pub matrix: Array2<f64>,
    /// `q^T K0_j q` for each coordinate `j`.
    pub per_coord_quadratic: Vec<f64>,
}

impl SteinGram {
    /// `Σ_j q^T K0_j q`, i.e. the squared L2 discrepancy.
    pub fn total_quadratic(&self) -> f64 {
        self.per_coord_quadratic.iter().sum()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GramOptions {
    /// Largest matrix, in bytes, that will be allocated.
    pub memory_budget: usize,
}

impl Default for GramOptions {
    fn default() -> Self {
        Self {
            memory_budget: DEFAULT_MEMORY_BUDGET,
        }
    }
}

/// Assembles the Stein Gram matrix and the per-coordinate quadratic forms.
///
/// Only `i <= i'` entries are computed. Rows are independent tasks, so the
/// matrix does not depend on the thread schedule, and the quadratic forms use
/// the same fixed-order reduction as [`quadratic_forms`].
pub fn stein_gram<T: Target + ?Sized>(target: &T, kernel: &RadialKernel, sample: &Sample) -> Result<SteinGram> {
    stein_gram_with(target, kernel, sample, GramOptions::default())
}

pub fn stein_gram_with<T: Target + ?Sized>(
    target: &T,
    kernel: &RadialKernel,
    sample: &Sample,
    options: GramOptions,
) -> Result<SteinGram> {
    let n = sample.len();
    let bytes = n.checked_mul(n).and_then(|m| m.checked_mul(std::mem::size_of::<f64>()));
    match bytes {
        Some(b) if b <= options.memory_budget => {}
        _ => {
            return Err(Error::Resource(format!(
                "a {n}x{n} Stein Gram matrix exceeds the memory budget of {} bytes; \
                 the largest n that fits is {}",
                options.memory_budget,
                ((options.memory_budget / 8) as f64).sqrt().floor() as usize
            )))
        }
    }
    let scored = Scored::new(target, sample)?;
    let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..n).into_par_iter().map(|i| scored.row(kernel, i, true)).collect();
    let mut matrix = Array2::zeros((n, n));
    for (i, (_, entries)) in rows.iter().enumerate() {
        for (off, &v) in entries.iter().enumerate() {
            matrix[[i, i + off]] = v;
            matrix[[i + off, i]] = v;
        }
    }
    let contributions: Vec<Vec<f64>> = rows.into_iter().map(|(c, _)| c).collect();
    Ok(SteinGram {
        matrix,
        per_coord_quadratic: Scored::reduce(&contributions, sample.dim()),
    })
}

/// Norm applied to the per-coordinate vector `w`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    #[default]
    L2,
    LInf,
}

impl Norm {
    pub fn apply(&self, w: &[f64]) -> f64 {
        match self {
            Norm::L1 => w.iter().sum(),
            Norm::L2 => w.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Norm::LInf => w.iter().copied().fold(0.0, f64::max),
        }
    }
}

impl FromStr for Norm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Norm::L1),
            "l2" => Ok(Norm::L2),
            "linf" | "l_inf" | "inf" => Ok(Norm::LInf),
            other => Err(Error::Parse(format!("unknown norm {other:?} (expected l1, l2, linf)"))),
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Norm::L1 => "l1",
            Norm::L2 => "l2",
            Norm::LInf => "linf",
        })
    }
}

pub const KSD_REPORT_SCHEMA: &str = "ksd-report/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsdReport {
    pub schema: String,
    pub w: Vec<f64>,
    pub norm: Norm,
    pub value: f64,
    pub n: usize,
    pub d: usize,
    pub kernel: String,
    pub target: String,
    pub seconds: f64,
}

impl KsdReport {
    /// The same report under another norm.
    pub fn with_norm(&self, norm: Norm) -> KsdReport {
        KsdReport {
            norm,
            value: norm.apply(&self.w),
            ..self.clone()
        }
    }
}

/// Square roots of the per-coordinate forms, clamping roundoff negatives.
pub(crate) fn forms_to_w(forms: &[f64]) -> Result<Vec<f64>> {
    forms
        .iter()
        .enumerate()
        .map(|(j, &v)| {
            if !v.is_finite() {
                Err(Error::Numerical(format!("non-finite quadratic form at coordinate {j}")))
            } else if v < -NEGATIVE_FORM_TOLERANCE {
                Err(Error::Numerical(format!(
                    "quadratic form for coordinate {j} is {v:e} < -{NEGATIVE_FORM_TOLERANCE:e}; \
                     the Stein kernel is not positive semidefinite for this kernel/target pair"
                )))
            } else {
                Ok(v.max(0.0).sqrt())
            }
        })
        .collect()
}

/// Kernel Stein discrepancy of `sample` under `norm`.
pub fn ksd<T: Target + ?Sized>(target: &T, kernel: &RadialKernel, sample: &Sample, norm: Norm) -> Result<KsdReport> {
    let start = Instant::now();
    let w = forms_to_w(&quadratic_forms(target, kernel, sample)?)?;
    Ok(KsdReport {
        schema: KSD_REPORT_SCHEMA.to_string(),
        value: norm.apply(&w),
        w,
        norm,
        n: sample.len(),
        d: sample.dim(),
        kernel: kernel.to_string(),
        target: target.describe(),
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// L2 discrepancy as a bare number.
pub fn ksd_value<T: Target + ?Sized>(target: &T, kernel: &RadialKernel, sample: &Sample) -> Result<f64> {
    Ok(ksd(target, kernel, sample, Norm::L2)?.value)
}

/// The optimal Stein functions `g_j` and the discriminating test function
/// `h = T g` attained by the L2 discrepancy of a sample.
pub struct SteinWitness<'a, T: Target + ?Sized> {
    target: &'a T,
    kernel: RadialKernel,
    scored: Scored<'a>,
    discrepancy: f64,
}

impl<'a, T: Target + ?Sized> SteinWitness<'a, T> {
    pub fn new(target: &'a T, kernel: &RadialKernel, sample: &'a Sample) -> Result<Self> {
        let scored = Scored::new(target, sample)?;
        let w = forms_to_w(&scored.quadratic_forms(kernel))?;
        let discrepancy = Norm::L2.apply(&w);
        if discrepancy <= 0.0 {
            return Err(Error::Degenerate(
                "the sample has zero discrepancy; Stein functions are undefined".into(),
            ));
        }
        Ok(Self {
            target,
            kernel: *kernel,
            scored,
            discrepancy,
        })
    }

    /// The L2 discrepancy used as normalizer.
    pub fn discrepancy(&self) -> f64 {
        self.discrepancy
    }

    fn check_point(&self, y: &[f64]) -> Result<()> {
        check_dim(self.target.dim(), y.len())?;
        check_finite(y, "evaluation point")
    }

    /// `g_j(y) = Σ_i q_i (b_j(x_i) k(x_i, y) + ∇_{x_j} k(x_i, y)) / KSD`.
    pub fn stein_function(&self, j: usize, y: &[f64]) -> Result<f64> {
        self.check_point(y)?;
        if j >= y.len() {
            return Err(Error::arg(format!("coordinate {j} out of range for dim {}", y.len())));
        }
        let s = self.scored.sample;
        let terms: Vec<f64> = (0..s.len())
            .map(|i| {
                let x = s.point(i);
                let p = self.kernel.profile(sq_dist(x, y));
                s.weights()[i] * (self.scored.score(i)[j] * p.f + 2.0 * (x[j] - y[j]) * p.d1)
            })
            .collect();
        Ok(pairwise_sum(&terms) / self.discrepancy)
    }

    /// `h(y) = Σ_i q_i k0(x_i, y) / KSD`.
    pub fn test_function(&self, y: &[f64]) -> Result<f64> {
        self.check_point(y)?;
        let mut by = vec![0.0; y.len()];
        self.target.score_into(y, &mut by);
        let s = self.scored.sample;
        let mut scratch = vec![0.0; y.len()];
        let terms: Vec<f64> = (0..s.len())
            .map(|i| s.weights()[i] * stein_terms(&self.kernel, s.point(i), y, self.scored.score(i), &by, &mut scratch))
            .collect();
        Ok(pairwise_sum(&terms) / self.discrepancy)
    }
}

/// `g_j(y)` for a one-off evaluation; build a [`SteinWitness`] to evaluate many points.
pub fn optimal_stein_function<T: Target + ?Sized>(
    target: &T,
    kernel: &RadialKernel,
    sample: &Sample,
    j: usize,
    y: &[f64],
) -> Result<f64> {
    SteinWitness::new(target, kernel, sample)?.stein_function(j, y)
}

/// `h(y)` for a one-off evaluation.
pub fn discriminating_test<T: Target + ?Sized>(
    target: &T,
    kernel: &RadialKernel,
    sample: &Sample,
    y: &[f64],
) -> Result<f64> {
    SteinWitness::new(target, kernel, sample)?.test_function(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::targets::GaussianTarget;
    use ndarray::array;

    fn std_normal(d: usize) -> GaussianTarget {
        GaussianTarget::standard(d).unwrap()
    }

    #[test]
    fn coord_examples() {
        let t = std_normal(1);
        let imq = RadialKernel::imq_default();
        assert_eq!(stein_kernel_coord(&t, &imq, 0, &[0.0], &[0.0]).unwrap(), 1.0);
        let g = RadialKernel::gaussian(2.0).unwrap();
        for a in [-2.0, 0.3, 1.7] {
            let v = stein_kernel_coord(&t, &g, 0, &[a], &[a]).unwrap();
            assert!((v - (a * a + 1.0)).abs() < 1e-12);
        }
        let x = [0.4, -1.1];
        let y = [2.0, 0.3];
        let t2 = std_normal(2);
        for j in 0..2 {
            assert_eq!(
                stein_kernel_coord(&t2, &imq, j, &x, &y).unwrap(),
                stein_kernel_coord(&t2, &imq, j, &y, &x).unwrap()
            );
        }
    }

    #[test]
    fn sum_examples() {
        let imq = RadialKernel::imq_default();
        assert_eq!(
            stein_kernel_sum(&std_normal(3), &imq, &[0.0; 3], &[0.0; 3]).unwrap(),
            3.0
        );
        let t1 = std_normal(1);
        assert_eq!(
            stein_kernel_sum(&t1, &imq, &[0.7], &[-0.2]).unwrap(),
            stein_kernel_coord(&t1, &imq, 0, &[0.7], &[-0.2]).unwrap()
        );
        let g = RadialKernel::gaussian(2.0).unwrap();
        let (a, b) = (0.8, -1.3);
        let v = stein_kernel_sum(&std_normal(2), &g, &[a, b], &[a, b]).unwrap();
        assert!((v - (a * a + b * b + 2.0)).abs() < 1e-12);
        assert!(stein_kernel_sum(&std_normal(2), &g, &[a], &[a, b]).is_err());
    }

    #[test]
    fn gram_small_cases() {
        let t = std_normal(1);
        let k = RadialKernel::imq_default();
        let s = Sample::uniform(array![[0.5]]).unwrap();
        let g = stein_gram(&t, &k, &s).unwrap();
        assert_eq!(g.matrix[[0, 0]], stein_kernel_sum(&t, &k, &[0.5], &[0.5]).unwrap());

        let s = Sample::uniform(array![[0.5], [-1.0]]).unwrap();
        let g = stein_gram(&t, &k, &s).unwrap();
        let (a, b, c) = (g.matrix[[0, 0]], g.matrix[[1, 1]], g.matrix[[0, 1]]);
        assert_eq!(c, g.matrix[[1, 0]]);
        assert!((g.per_coord_quadratic[0] - (a + b + 2.0 * c) / 4.0).abs() < 1e-15);
    }

    #[test]
    fn gram_respects_memory_budget() {
        let t = std_normal(1);
        let s = Sample::uniform(Array2::zeros((100, 1))).unwrap();
        let err = stein_gram_with(
            &t,
            &RadialKernel::imq_default(),
            &s,
            GramOptions { memory_budget: 1000 },
        )
        .unwrap_err();
        assert!(matches!(err, Error::Resource(ref m) if m.contains("1000")));
    }

    #[test]
    fn point_mass_examples() {
        let t = std_normal(1);
        let k = RadialKernel::imq_default();
        let s = Sample::uniform(array![[0.0]]).unwrap();
        let r = ksd(&t, &k, &s, Norm::L2).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(optimal_stein_function(&t, &k, &s, 0, &[0.0]).unwrap(), 0.0);
        assert_eq!(discriminating_test(&t, &k, &s, &[0.0]).unwrap(), 1.0);
    }

    #[test]
    fn norms_coincide_in_one_dimension() {
        let t = std_normal(1);
        let k = RadialKernel::gaussian(1.0).unwrap();
        let s = Sample::new(array![[0.1], [2.0], [-0.7]], vec![0.2, 0.3, 0.5]).unwrap();
        let vals: Vec<f64> = [Norm::L1, Norm::L2, Norm::LInf]
            .iter()
            .map(|&n| ksd(&t, &k, &s, n).unwrap().value)
            .collect();
        assert_eq!(vals[0], vals[1]);
        assert_eq!(vals[1], vals[2]);
    }

    #[test]
    fn negative_forms_are_errors() {
        assert!(forms_to_w(&[-1e-11]).unwrap()[0] == 0.0);
        assert!(matches!(forms_to_w(&[-1e-9]), Err(Error::Numerical(_))));
        assert!(matches!(forms_to_w(&[f64::NAN]), Err(Error::Numerical(_))));
    }

    #[test]
    fn sample_normalizes_weights() {
        let s = Sample::new(array![[0.0], [1.0]], vec![1.0, 3.0]).unwrap();
        assert_eq!(s.weights(), &[0.25, 0.75]);
        assert_eq!(s.weight_correction(), 3.0);
        assert!(Sample::new(array![[0.0]], vec![-1.0]).is_err());
        assert!(Sample::new(array![[0.0]], vec![0.0]).is_err());
        assert!(Sample::new(array![[f64::INFINITY]], vec![1.0]).is_err());
        assert!(Sample::new(Array2::zeros((0, 2)), vec![]).is_err());
        assert!(Sample::uniform(array![[1.0], [2.0], [3.0]]).unwrap().is_uniform());
        assert!(!s.is_uniform());
    }

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 499_500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn far_away_stein_function_is_small() {
        let t = std_normal(1);
        let k = RadialKernel::imq_default();
        let s = Sample::uniform(array![[-0.5], [0.2], [1.0]]).unwrap();
        let w = SteinWitness::new(&t, &k, &s).unwrap();
        for y in [1e3, -1e3] {
            assert!(w.stein_function(0, &[y]).unwrap().abs() < 1e-2);
        }
    }
}
