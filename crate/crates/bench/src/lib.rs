//! Shared fixtures for the benchmarks.

use ksd::sequences::mixture_iid;
use ksd::{Sample, SymmetricMixtureTarget};

/// Mixture target and an on-target sample of `n` points in `dim` dimensions.
pub fn mixture_fixture(n: usize, dim: usize) -> (SymmetricMixtureTarget, Sample) {
    let target = SymmetricMixtureTarget::new(dim, 1.5).expect("valid mixture");
    let sample = mixture_iid(n, dim, 1.5, 42).expect("valid sample");
    (target, sample)
}
