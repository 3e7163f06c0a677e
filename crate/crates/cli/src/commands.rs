use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, ValueEnum};
use ksd::diagnostics::{mixture_cdf, normal_cdf, univariate_wasserstein};
use ksd::gof::{ksd_test, TestResult};
use ksd::reweight::{bbis_weights_with, ReweightOptions, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use ksd::sequences::SequenceSpec;
use ksd::stein::stein_gram;
use ksd::{KernelSpec, Norm, Sample, TargetSpec};
use serde::Serialize;

use crate::io::{load_spec, output, read_sample, write_json};
use crate::CliError;

#[derive(Debug, Args)]
pub struct Input {
    /// Target: compact form (gaussian:d=2, mixture:d=1,delta=1.5, pseudo_huber:d=3,
    /// logistic:csv=data.csv), inline JSON, or a JSON file.
    #[arg(long)]
    target: String,
    /// Base kernel: imq[:c=..,beta=..,h=..], gaussian:h=<num|median>, matern32,
    /// inline JSON, or a JSON file.
    #[arg(long, default_value = "imq:c=1,beta=-0.5")]
    kernel: String,
    /// Sample CSV (one point per row, optional header); `-` reads stdin.
    #[arg(long)]
    sample: PathBuf,
    /// The last CSV column holds (unnormalized) weights.
    #[arg(long)]
    weighted: bool,
}

struct Resolved {
    target: ksd::targets::AnyTarget,
    kernel: ksd::RadialKernel,
    sample: Sample,
}

impl Input {
    fn resolve(&self) -> Result<Resolved, CliError> {
        let target = load_spec::<TargetSpec>(&self.target)?.build()?;
        let kernel_spec = load_spec::<KernelSpec>(&self.kernel)?;
        let sample = read_sample(&self.sample, self.weighted)?;
        let kernel = kernel_spec.resolve(Some(sample.points()))?;
        Ok(Resolved { target, kernel, sample })
    }
}

#[derive(Debug, Args)]
pub struct KsdArgs {
    #[command(flatten)]
    input: Input,
    /// Norm combining the per-coordinate discrepancies.
    #[arg(long, default_value = "l2")]
    norm: Norm,
    /// Output file [default: stdout].
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn ksd(args: KsdArgs) -> Result<(), CliError> {
    let r = args.input.resolve()?;
    let report = ksd::ksd(&r.target, &r.kernel, &r.sample, args.norm)?;
    write_json(args.out.as_deref(), &report)
}

#[derive(Debug, Args)]
pub struct GramArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn gram(args: GramArgs) -> Result<(), CliError> {
    let r = args.input.resolve()?;
    let g = stein_gram(&r.target, &r.kernel, &r.sample)?;
    let mut w = output(args.out.as_deref())?;
    let io_err = |e: std::io::Error| CliError::Core(e.into());
    for row in g.matrix.rows() {
        let line: Vec<String> = row.iter().map(|&v| ksd::io::format_f64(v)).collect();
        writeln!(w, "{}", line.join(",")).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[command(flatten)]
    input: Input,
    /// Bootstrap replicates (at least 99).
    #[arg(long = "B", visible_alias = "replicates", default_value_t = 500)]
    replicates: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct TestOutput {
    #[serde(flatten)]
    result: TestResult,
    alpha: f64,
    reject: bool,
}

pub fn test(args: TestArgs) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&args.alpha) {
        return Err(CliError::Usage(format!(
            "--alpha must lie in [0, 1], got {}",
            args.alpha
        )));
    }
    let r = args.input.resolve()?;
    let result = ksd_test(&r.target, &r.kernel, &r.sample, args.replicates, args.seed)?;
    let reject = result.rejects(args.alpha);
    write_json(
        args.out.as_deref(),
        &TestOutput {
            result,
            alpha: args.alpha,
            reject,
        },
    )
}

#[derive(Debug, Args)]
pub struct ReweightArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    max_iters: usize,
    /// Stop when an iteration lowers the objective by less than this fraction.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Also write the points with their new weights as a weighted CSV.
    #[arg(long)]
    weights_out: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn reweight(args: ReweightArgs) -> Result<(), CliError> {
    let r = args.input.resolve()?;
    let result = bbis_weights_with(
        &r.target,
        &r.kernel,
        r.sample.points(),
        ReweightOptions {
            max_iters: args.max_iters,
            tol: args.tol,
            ..ReweightOptions::default()
        },
    )?;
    if let Some(path) = &args.weights_out {
        let weighted = r.sample.with_weights(result.weights.clone())?;
        write_sample_csv(Some(path), &weighted, true)?;
    }
    write_json(args.out.as_deref(), &result)
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Kind {
    IidGaussian,
    MixtureIid,
    SingleComponent,
    Packing,
    BoundedScoreLine,
    UlaChain,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Generator; alternatively give a full JSON spec with --spec.
    #[arg(long, required_unless_present = "spec", conflicts_with = "spec")]
    kind: Option<Kind>,
    /// Sequence spec as inline JSON or a JSON file.
    #[arg(long)]
    spec: Option<String>,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Mixture half-separation.
    #[arg(long, default_value_t = 1.5)]
    delta: f64,
    /// Mean of the i.i.d. Gaussian sample, `;`-separated [default: 0].
    #[arg(long)]
    mean: Option<String>,
    /// Langevin step size.
    #[arg(long, default_value_t = 0.1)]
    step: f64,
    /// Target of the Langevin chain [default: mixture of the given dim and delta].
    #[arg(long)]
    target: Option<String>,
    /// Starting point of the Langevin chain, `;`-separated [default: 0].
    #[arg(long)]
    x0: Option<String>,
    /// Consecutive rejections tolerated by the packing sampler.
    #[arg(long)]
    max_rejections: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_vector(flag: &str, s: &str) -> Result<Vec<f64>, CliError> {
    s.split(';')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| CliError::Usage(format!("--{flag} must be ';'-separated numbers, got {s:?}")))
}

impl GenerateArgs {
    fn spec(&self) -> Result<SequenceSpec, CliError> {
        if let Some(s) = &self.spec {
            let text = if Path::new(s).is_file() {
                std::fs::read_to_string(s).map_err(ksd::Error::from)?
            } else {
                s.clone()
            };
            return Ok(serde_json::from_str(&text).map_err(ksd::Error::from)?);
        }
        let (n, dim, seed, delta) = (self.n, self.dim, self.seed, self.delta);
        Ok(match self.kind.expect("clap enforces --kind or --spec") {
            Kind::IidGaussian => SequenceSpec::IidGaussian {
                n,
                dim,
                mean: self.mean.as_deref().map(|m| parse_vector("mean", m)).transpose()?,
                seed,
            },
            Kind::MixtureIid => SequenceSpec::MixtureIid { n, dim, delta, seed },
            Kind::SingleComponent => SequenceSpec::SingleComponent { n, dim, delta, seed },
            Kind::Packing => SequenceSpec::Packing {
                n,
                dim,
                seed,
                max_rejections: self.max_rejections,
            },
            Kind::BoundedScoreLine => SequenceSpec::BoundedScoreLine { n, dim },
            Kind::UlaChain => SequenceSpec::UlaChain {
                target: match &self.target {
                    Some(t) => load_spec(t)?,
                    None => TargetSpec::Mixture { dim, delta },
                },
                n,
                step: self.step,
                x0: self.x0.as_deref().map(|x| parse_vector("x0", x)).transpose()?,
                seed,
            },
        })
    }
}

pub fn warn_small_packing(dim: usize) {
    if dim < 3 {
        eprintln!("warning: packing sequences in dimension {dim} < 3 need not drive light-tailed KSDs to zero");
    }
}

fn write_sample_csv(path: Option<&Path>, sample: &Sample, weighted: bool) -> Result<(), CliError> {
    let w = output(path)?;
    ksd::io::write_sample(w, sample, weighted)?;
    Ok(())
}

pub fn generate(args: GenerateArgs) -> Result<(), CliError> {
    let spec = args.spec()?;
    if let SequenceSpec::Packing { dim, .. } = spec {
        warn_small_packing(dim);
    }
    let sample = spec.generate()?;
    write_sample_csv(args.out.as_deref(), &sample, false)
}

#[derive(Debug, Args)]
pub struct WassArgs {
    /// One-dimensional target with a known CDF: gaussian:d=1[,mean=m] or
    /// mixture:d=1,delta=..
    #[arg(long)]
    target: String,
    #[arg(long)]
    sample: PathBuf,
    #[arg(long)]
    weighted: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct WassOutput {
    schema: &'static str,
    value: f64,
    n: usize,
    target: String,
    seconds: f64,
}

pub fn wass(args: WassArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let spec: TargetSpec = load_spec(&args.target)?;
    let sample = read_sample(&args.sample, args.weighted)?;
    let value = match &spec {
        TargetSpec::Gaussian { dim: 1, mean } => {
            let m = mean.as_ref().map_or(0.0, |m| m[0]);
            univariate_wasserstein(&sample, |x| normal_cdf(x, m, 1.0))?
        }
        TargetSpec::Mixture { dim: 1, delta } => univariate_wasserstein(&sample, |x| mixture_cdf(x, *delta))?,
        _ => {
            return Err(CliError::Usage(
                "wass needs a one-dimensional gaussian or mixture target".into(),
            ))
        }
    };
    write_json(
        args.out.as_deref(),
        &WassOutput {
            schema: "ksd-wasserstein/1",
            value,
            n: sample.len(),
            target: spec.build()?.to_string(),
            seconds: start.elapsed().as_secs_f64(),
        },
    )
}
