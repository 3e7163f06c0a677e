//! Bundled experiments. Each writes its CSV tables and a `manifest.json`
//! holding the full configuration, so a rerun with the same flags reproduces
//! every file byte for byte.

use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use ksd::diagnostics::{decay_slope, mixture_cdf, univariate_wasserstein};
use ksd::gof::{power_study, PowerStudy};
use ksd::reweight::{bbis_weights, mean_mse, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use ksd::rng::sub_seed;
use ksd::sequences::{bounded_score_line, iid_gaussian, mixture_iid, packing, single_component, ula_chain};
use ksd::stein::{ksd_value, stein_kernel_sum, SteinWitness};
use ksd::targets::{GaussianTarget, PseudoHuberTarget, SymmetricMixtureTarget};
use ksd::{median_bandwidth, Bandwidth, KernelSpec, RadialKernel, Sample};
use serde::Serialize;

use crate::commands::warn_small_packing;
use crate::io::{load_spec, prepare_dir, write_json, Table};
use crate::CliError;

#[derive(Debug, Subcommand)]
pub enum Experiment {
    /// On- and off-target decay of the IMQ KSD and Wasserstein distance for
    /// the 1-d mixture, plus the optimal Stein functions.
    Fig1(Fig1),
    /// Gaussian, Matérn and IMQ KSDs on packing versus i.i.d. samples.
    Fig2(Fig2),
    /// Power of the KSD test against a shifted Gaussian.
    Table1(Table1),
    /// Mean-estimation error of KSD-reweighted i.i.d. samples.
    Bbis(Bbis),
    /// KSD of Langevin chains across step sizes.
    UlaTuning(UlaTuning),
    /// KSD of the diverging line sequence under a bounded-score target.
    BoundedScore(BoundedScore),
}

#[derive(Serialize)]
struct Manifest<'a, C: Serialize> {
    schema: &'static str,
    experiment: &'static str,
    ksd_version: &'static str,
    config: &'a C,
    outputs: Vec<String>,
}

fn finish<C: Serialize>(
    dir: &Path,
    experiment: &'static str,
    config: &C,
    tables: &[(&str, &Table)],
) -> Result<(), CliError> {
    let mut outputs = Vec::new();
    for (name, table) in tables {
        table.save(&dir.join(name))?;
        outputs.push(name.to_string());
    }
    let manifest = Manifest {
        schema: "ksd-manifest/1",
        experiment,
        ksd_version: ksd::VERSION,
        config,
        outputs,
    };
    write_json(Some(&dir.join("manifest.json")), &manifest)?;
    eprintln!("wrote {} table(s) and manifest.json to {}", tables.len(), dir.display());
    Ok(())
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

pub fn run(e: Experiment) -> Result<(), CliError> {
    match e {
        Experiment::Fig1(c) => fig1(c),
        Experiment::Fig2(c) => fig2(c),
        Experiment::Table1(c) => table1(c),
        Experiment::Bbis(c) => bbis(c),
        Experiment::UlaTuning(c) => ula_tuning(c),
        Experiment::BoundedScore(c) => bounded_score(c),
    }
}

#[derive(Debug, Args, Serialize)]
pub struct Fig1 {
    #[arg(long, value_delimiter = ',', default_values_t = vec![100, 316, 1000, 3162, 10_000])]
    ns: Vec<usize>,
    /// Independent samples per sequence.
    #[arg(long, default_value_t = 5)]
    seeds: u64,
    #[arg(long, default_value_t = 1.5)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Points of the grid on which the Stein functions are evaluated.
    #[arg(long, default_value_t = 241)]
    grid: usize,
    #[arg(long, default_value = "results/fig1")]
    #[serde(skip)]
    out: PathBuf,
}

type Draw = fn(usize, usize, f64, u64) -> ksd::Result<Sample>;

fn fig1(c: Fig1) -> Result<(), CliError> {
    let dir = prepare_dir(&c.out)?;
    if c.seeds == 0 || c.grid < 2 {
        return Err(CliError::Usage("need --seeds >= 1 and --grid >= 2".into()));
    }
    let target = SymmetricMixtureTarget::new(1, c.delta)?;
    let kernel = RadialKernel::imq_default();
    let n_max = *c.ns.iter().max().unwrap();
    let mut rows = Table::new(&["sample", "seed", "n", "ksd", "wasserstein"]);
    let mut slopes = Table::new(&["sample", "measure", "slope", "intercept", "r_squared"]);
    let mut functions = Table::new(&["sample", "y", "stein_function", "test_function"]);
    let sequences: [(&str, Draw); 2] = [("on_target", mixture_iid), ("single_component", single_component)];
    for (name, draw) in sequences {
        let samples = (0..c.seeds)
            .map(|s| draw(n_max, 1, c.delta, sub_seed(c.seed, s)))
            .collect::<ksd::Result<Vec<_>>>()?;
        let mut ksd_medians = Vec::new();
        let mut wass_medians = Vec::new();
        for &n in &c.ns {
            let (mut ks, mut ws) = (Vec::new(), Vec::new());
            for (s, sample) in samples.iter().enumerate() {
                let head = sample.head(n)?;
                let k = ksd_value(&target, &kernel, &head)?;
                let w = univariate_wasserstein(&head, |x| mixture_cdf(x, c.delta))?;
                rows.push(vec![name.into(), s.into(), n.into(), k.into(), w.into()]);
                ks.push(k);
                ws.push(w);
            }
            ksd_medians.push(median(ks));
            wass_medians.push(median(ws));
        }
        if c.ns.len() >= 3 {
            let ns: Vec<f64> = c.ns.iter().map(|&n| n as f64).collect();
            for (measure, values) in [("ksd", &ksd_medians), ("wasserstein", &wass_medians)] {
                let fit = decay_slope(&ns, values)?;
                slopes.push(vec![
                    name.into(),
                    measure.into(),
                    fit.slope.into(),
                    fit.intercept.into(),
                    fit.r_squared.into(),
                ]);
            }
        }
        let witness = SteinWitness::new(&target, &kernel, &samples[0])?;
        for i in 0..c.grid {
            let y = -6.0 + 12.0 * i as f64 / (c.grid - 1) as f64;
            functions.push(vec![
                name.into(),
                y.into(),
                witness.stein_function(0, &[y])?.into(),
                witness.test_function(&[y])?.into(),
            ]);
        }
    }
    finish(
        &dir,
        "fig1",
        &c,
        &[
            ("discrepancy.csv", &rows),
            ("slopes.csv", &slopes),
            ("stein_functions.csv", &functions),
        ],
    )
}

#[derive(Debug, Args, Serialize)]
pub struct Fig2 {
    #[arg(long, value_delimiter = ',', default_values_t = vec![5, 8, 13])]
    dims: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![200, 500, 1000, 2000])]
    ns: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "results/fig2")]
    #[serde(skip)]
    out: PathBuf,
}

fn fig2(c: Fig2) -> Result<(), CliError> {
    let dir = prepare_dir(&c.out)?;
    let kernels = [
        RadialKernel::gaussian(2.0)?,
        RadialKernel::Matern32,
        RadialKernel::imq_default(),
    ];
    let mut rows = Table::new(&["kernel", "sequence", "dim", "n", "ksd"]);
    for &dim in &c.dims {
        warn_small_packing(dim);
        let target = GaussianTarget::standard(dim)?;
        for &n in &c.ns {
            let seed = sub_seed(sub_seed(c.seed, dim as u64), n as u64);
            let samples = [
                ("packing", packing(n, dim, seed)?),
                ("iid", iid_gaussian(n, &vec![0.0; dim], seed)?),
            ];
            for kernel in &kernels {
                for (name, sample) in &samples {
                    let v = ksd_value(&target, kernel, sample)?;
                    rows.push(vec![
                        kernel.to_string().into(),
                        (*name).into(),
                        dim.into(),
                        n.into(),
                        v.into(),
                    ]);
                }
            }
        }
    }
    finish(&dir, "fig2", &c, &[("ksd.csv", &rows)])
}

fn parse_kernel(s: &str) -> Result<KernelSpec, String> {
    load_spec(s).map_err(|e| e.to_string())
}

#[derive(Debug, Args, Serialize)]
pub struct Table1 {
    /// Kernel to compare; repeat the flag for several.
    #[arg(long = "kernel", value_parser = parse_kernel,
          default_values = ["imq:c=1,beta=-0.5", "gaussian:h=median"])]
    kernels: Vec<KernelSpec>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![2, 5, 10, 15, 20, 25])]
    dims: Vec<usize>,
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long = "B", default_value_t = 500)]
    replicates: usize,
    /// Size of the uniform shift along the first axis; 0 simulates the null.
    #[arg(long, default_value_t = 1.0)]
    shift: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "results/table1")]
    #[serde(skip)]
    out: PathBuf,
}

fn table1(c: Table1) -> Result<(), CliError> {
    let dir = prepare_dir(&c.out)?;
    let power = power_study(&PowerStudy {
        kernels: c.kernels.clone(),
        dims: c.dims.clone(),
        n: c.n,
        trials: c.trials,
        alpha: c.alpha,
        replicates: c.replicates,
        seed: c.seed,
        shift: c.shift,
    })?;
    let mut rows = Table::new(&["kernel", "dim", "rejections", "trials", "power"]);
    for r in power {
        rows.push(vec![
            r.kernel.into(),
            r.dim.into(),
            r.rejections.into(),
            r.trials.into(),
            r.power.into(),
        ]);
    }
    finish(&dir, "table1", &c, &[("power.csv", &rows)])
}

#[derive(Debug, Args, Serialize)]
pub struct Bbis {
    #[arg(long, value_delimiter = ',', default_values_t = vec![2, 5, 10])]
    dims: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    max_iters: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "results/bbis")]
    #[serde(skip)]
    out: PathBuf,
}

fn bbis(c: Bbis) -> Result<(), CliError> {
    let dir = prepare_dir(&c.out)?;
    if c.n < 2 || c.trials == 0 {
        return Err(CliError::Usage("need --n >= 2 and --trials >= 1".into()));
    }
    let mut rows = Table::new(&["dim", "trial", "uniform_mse", "imq_mse", "gaussian_mse"]);
    let mut summary = Table::new(&["dim", "uniform_mse", "imq_mse", "gaussian_mse"]);
    for &dim in &c.dims {
        let target = GaussianTarget::standard(dim)?;
        let zero = vec![0.0; dim];
        let mut totals = [0.0; 3];
        for t in 0..c.trials {
            let s = iid_gaussian(c.n, &zero, sub_seed(sub_seed(c.seed, dim as u64), t as u64))?;
            let h = median_bandwidth(s.points())?;
            let mut mse = [mean_mse(s.weights(), s.points(), &zero)?, 0.0, 0.0];
            for (slot, kernel) in [(1, RadialKernel::scaled_imq(h, -0.5)?), (2, RadialKernel::gaussian(h)?)] {
                let r = bbis_weights(&target, &kernel, s.points(), c.max_iters, c.tol)?;
                mse[slot] = mean_mse(&r.weights, s.points(), &zero)?;
            }
            for (total, m) in totals.iter_mut().zip(mse) {
                *total += m / c.trials as f64;
            }
            rows.push(vec![dim.into(), t.into(), mse[0].into(), mse[1].into(), mse[2].into()]);
        }
        summary.push(vec![dim.into(), totals[0].into(), totals[1].into(), totals[2].into()]);
    }
    finish(&dir, "bbis", &c, &[("trials.csv", &rows), ("summary.csv", &summary)])
}

#[derive(Debug, Args, Serialize)]
pub struct UlaTuning {
    #[arg(long, value_delimiter = ',', default_values_t = vec![1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3, 1.0])]
    steps: Vec<f64>,
    /// Chain length.
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    seeds: u64,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 1.5)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "results/ula_tuning")]
    #[serde(skip)]
    out: PathBuf,
}

fn ula_tuning(c: UlaTuning) -> Result<(), CliError> {
    let dir = prepare_dir(&c.out)?;
    if c.seeds == 0 {
        return Err(CliError::Usage("need --seeds >= 1".into()));
    }
    let target = SymmetricMixtureTarget::new(c.dim, c.delta)?;
    let kernel = RadialKernel::imq_default();
    let x0 = vec![0.0; c.dim];
    let mut rows = Table::new(&["step", "seed", "ksd"]);
    let mut summary = Table::new(&["step", "median_ksd"]);
    for &step in &c.steps {
        let mut values = Vec::new();
        for s in 0..c.seeds {
            // A diverged chain is a legitimate outcome for large steps.
            let v = match ula_chain(&target, c.n, step, &x0, sub_seed(c.seed, s)) {
                Ok(chain) => ksd_value(&target, &kernel, &chain)?,
                Err(ksd::Error::Numerical(msg)) => {
                    eprintln!("warning: {msg}");
                    f64::INFINITY
                }
                Err(e) => return Err(e.into()),
            };
            rows.push(vec![step.into(), s.into(), v.into()]);
            values.push(v);
        }
        summary.push(vec![step.into(), median(values).into()]);
    }
    finish(
        &dir,
        "ula_tuning",
        &c,
        &[("chains.csv", &rows), ("summary.csv", &summary)],
    )
}

#[derive(Debug, Args, Serialize)]
pub struct BoundedScore {
    #[arg(long, value_delimiter = ',', default_values_t = vec![50, 100, 200, 400, 800])]
    ns: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long, value_parser = parse_kernel, default_value = "imq:c=1,beta=-0.5")]
    kernel: KernelSpec,
    #[arg(long, default_value = "results/bounded_score")]
    #[serde(skip)]
    out: PathBuf,
}

fn bounded_score(c: BoundedScore) -> Result<(), CliError> {
    let dir = prepare_dir(&c.out)?;
    let target = PseudoHuberTarget::new(c.dim)?;
    // The line sequence has no meaningful median spread; fixed bandwidths only.
    if matches!(
        c.kernel,
        KernelSpec::Gaussian { h: Bandwidth::Median }
            | KernelSpec::Imq {
                h: Some(Bandwidth::Median),
                ..
            }
    ) {
        return Err(CliError::Usage("bounded_score needs a fixed-bandwidth kernel".into()));
    }
    let kernel = c.kernel.resolve(None)?;
    let mut rows = Table::new(&["n", "ksd", "diagonal_part"]);
    for &n in &c.ns {
        let s = bounded_score_line(n, c.dim)?;
        let v = ksd_value(&target, &kernel, &s)?;
        let diag: f64 = (0..n)
            .map(|i| stein_kernel_sum(&target, &kernel, s.point(i), s.point(i)))
            .sum::<ksd::Result<f64>>()?;
        rows.push(vec![n.into(), v.into(), (diag.sqrt() / n as f64).into()]);
    }
    finish(&dir, "bounded_score", &c, &[("ksd.csv", &rows)])
}
