//! Kernel Stein discrepancies for judging how well a weighted sample
//! approximates a target known only up to normalization.
//!
//! The crate is organized around the pieces of the discrepancy:
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`targets`] | score functions `∇ log p` and the dissipativity profile |
//! | [`kernels`] | radial base kernels (IMQ, Gaussian, Matérn-3/2) and the median heuristic |
//! | [`stein`] | Stein kernels, Gram assembly, closed-form KSD, optimal Stein functions |
//! | [`sequences`] | sample generators: i.i.d., off-target, packing, ULA chains |
//! | [`gof`] | wild-bootstrap goodness-of-fit test and power studies |
//! | [`reweight`] | KSD-minimizing weights on fixed support points |
//! | [`diagnostics`] | univariate Wasserstein distance and decay-rate fits |
//!
//! ```
//! use ksd::{ksd, GaussianTarget, Norm, RadialKernel, Sample};
//! use ndarray::array;
//!
//! let target = GaussianTarget::standard(1).unwrap();
//! let sample = Sample::uniform(array![[0.0]]).unwrap();
//! let report = ksd(&target, &RadialKernel::imq_default(), &sample, Norm::L2).unwrap();
//! assert_eq!(report.value, 1.0);
//! ```

pub mod diagnostics;
pub mod error;
pub mod gof;
pub mod io;
pub mod kernels;
pub mod reweight;
pub mod rng;
pub mod sequences;
pub mod spec;
pub mod stein;
pub mod targets;

pub use error::{Error, Result};

/// Crate version, recorded in experiment manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub use kernels::{median_bandwidth, Bandwidth, KernelSpec, RadialKernel};
pub use stein::{
    discriminating_test, ksd, ksd_value, optimal_stein_function, quadratic_forms, stein_gram, stein_kernel_coord,
    stein_kernel_sum, KsdReport, Norm, Sample, SteinGram, SteinWitness,
};
pub use targets::{
    dissipativity_profile, score, AnyTarget, GaussianTarget, LogisticRegressionTarget, PseudoHuberTarget,
    SymmetricMixtureTarget, Target, TargetSpec,
};
