//! D²-sampling (k-means++ seeding) and the best-of-runs bicriteria solution.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CoresetError, Result};
use crate::model::{sq_dist, total_cost, CostModel, Query, WeightedDataset};
use crate::rng::{derive_seed, rng_from_seed, tag};
use crate::sampling::CumulativeTable;

/// Output of one D²-sampling run.
#[derive(Debug, Clone, PartialEq)]
pub struct Seeding {
    pub centers: Query,
    /// Index in the dataset of every chosen center.
    pub indices: Vec<usize>,
    /// Set when fewer than `k` distinct points were available and centers
    /// had to be repeated.
    pub padded: bool,
}

/// Draws `k` centers: the first proportionally to the weights, each later one
/// proportionally to `μ(x)·d(x, B)²` against the centers drawn so far.
pub fn d2_sample<R: rand::Rng + ?Sized>(data: &WeightedDataset, k: usize, rng: &mut R) -> Result<Seeding> {
    if k == 0 {
        return Err(CoresetError::InvalidK);
    }
    let n = data.len();
    let first = CumulativeTable::new(data.weights().iter().copied()).draw(rng);
    let mut indices = Vec::with_capacity(k);
    indices.push(first);
    let mut dist: Vec<f64> = data.rows().map(|x| sq_dist(x, data.point(first))).collect();
    let mut padded = false;

    while indices.len() < k {
        let table = CumulativeTable::new(dist.iter().zip(data.weights()).map(|(d, w)| d * w));
        let next = if table.total() > 0.0 {
            table.draw(rng)
        } else {
            // All weighted mass is covered. Remaining uncovered points (if any)
            // carry zero weight; pick among them uniformly.
            let uncovered: Vec<usize> = (0..n).filter(|&i| dist[i] > 0.0).collect();
            if uncovered.is_empty() {
                padded = true;
                break;
            }
            uncovered[rng.random_range(0..uncovered.len())]
        };
        indices.push(next);
        let c = data.point(next);
        for (d, x) in dist.iter_mut().zip(data.rows()) {
            let dn = sq_dist(x, c);
            if dn < *d {
                *d = dn;
            }
        }
    }
    if padded {
        // every chosen center is distinct; repeat them cyclically
        let distinct = indices.len();
        for j in distinct..k {
            indices.push(indices[j % distinct]);
        }
    }
    let centers = data.select(&indices)?;
    Ok(Seeding { centers: Query::new(centers.raw_points().to_vec(), data.dim())?, indices, padded })
}

/// Approximation factor of the best D²-seeding out of several runs.
pub fn d2_alpha(k: usize) -> f64 {
    16.0 * ((k as f64).log2() + 2.0)
}

/// Settings for [`bicriteria`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BicriteriaConfig {
    /// Runs are `max(1, ceil(run_factor · ln(1/δ)))`.
    pub run_factor: f64,
    /// Overrides the computed number of runs.
    pub runs: Option<usize>,
}

impl Default for BicriteriaConfig {
    fn default() -> Self {
        Self { run_factor: 3.0, runs: None }
    }
}

impl BicriteriaConfig {
    pub fn runs_for(&self, delta: f64) -> usize {
        self.runs
            .unwrap_or_else(|| ((self.run_factor * (1.0 / delta).ln()).ceil() as usize).max(1))
            .max(1)
    }
}

/// An `(α, β)`-bicriteria solution with `β = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bicriteria {
    pub centers: Query,
    pub indices: Vec<usize>,
    pub alpha: f64,
    pub beta: f64,
    /// `total_cost(X, centers)`.
    pub seed_cost: f64,
    pub runs_taken: usize,
    /// Cost of every run, in run order.
    pub run_costs: Vec<f64>,
    pub padded: bool,
}

/// Runs D²-sampling `R` times with derived seeds and keeps the cheapest run
/// (ties to the lowest run index).
pub fn bicriteria(
    data: &WeightedDataset,
    k: usize,
    delta: f64,
    config: &BicriteriaConfig,
    seed: u64,
) -> Result<Bicriteria> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(CoresetError::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")));
    }
    if k == 0 {
        return Err(CoresetError::InvalidK);
    }
    let runs = config.runs_for(delta);
    let results: Vec<(Seeding, f64)> = (0..runs)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_from_seed(derive_seed(seed, tag::BICRITERIA_RUN, r as u64));
            let s = d2_sample(data, k, &mut rng)?;
            let c = total_cost(data, &s.centers, &CostModel::SquaredEuclidean)?;
            Ok((s, c))
        })
        .collect::<Result<_>>()?;
    let run_costs: Vec<f64> = results.iter().map(|(_, c)| *c).collect();
    let mut best = 0;
    for (r, &c) in run_costs.iter().enumerate() {
        if c < run_costs[best] {
            best = r;
        }
    }
    let (seeding, seed_cost) = results.into_iter().nth(best).expect("runs >= 1");
    Ok(Bicriteria {
        centers: seeding.centers,
        indices: seeding.indices,
        alpha: d2_alpha(k),
        beta: 1.0,
        seed_cost,
        runs_taken: runs,
        run_costs,
        padded: seeding.padded,
    })
}
