//! Shared fixtures for the criterion benches.

use coreset_core::{generate, DatasetKind, WeightedDataset};

/// Well-separated Gaussian mixture with `k` planted clusters.
pub fn mixture(n: usize, d: usize, k: usize) -> WeightedDataset {
    generate(&DatasetKind::GaussianMixture { n, d, k, separation: 10.0, sigma: 1.0 }, 0xbe7c)
        .expect("valid fixture parameters")
}
