//! Inverse-CDF draws from non-negative masses.

use rand::Rng;

/// Prefix sums of non-negative masses, for repeated draws with replacement.
#[derive(Debug, Clone)]
pub struct CumulativeTable {
    prefix: Vec<f64>,
}

impl CumulativeTable {
    pub fn new(masses: impl IntoIterator<Item = f64>) -> Self {
        let mut acc = 0.0;
        let prefix = masses
            .into_iter()
            .map(|m| {
                acc += m;
                acc
            })
            .collect();
        Self { prefix }
    }

    pub fn total(&self) -> f64 {
        self.prefix.last().copied().unwrap_or(0.0)
    }

    /// Draws index `i` with probability `mass[i] / total`. Entries with zero
    /// mass are never returned. Panics if the total is not positive.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = self.total();
        assert!(total > 0.0, "cannot sample from zero total mass");
        let u = rng.random::<f64>() * total;
        let i = self.prefix.partition_point(|&c| c <= u);
        if i < self.prefix.len() {
            i
        } else {
            // u rounded up to the total; take the last entry with positive mass
            let last = self.prefix.len() - 1;
            (0..=last).rev().find(|&j| j == 0 || self.prefix[j] > self.prefix[j - 1]).unwrap_or(last)
        }
    }
}
