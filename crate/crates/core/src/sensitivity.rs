//! Sensitivity upper bounds derived from a bicriteria solution, plus two
//! independent references used to check them: the exact 1-means
//! sensitivity and a brute-force maximum over a finite grid of queries.
//!
//! Bounds in [`SensitivityProfile::s`] are scale-free: they bound
//! `sup_Q f_Q(x) / ((1/W) Σ μ f_Q)` where `W` is the total weight. Divide by
//! `W` (see [`SensitivityProfile::bound_for_weights`]) to compare with the
//! sensitivity of the weighted set itself.

use serde::{Deserialize, Serialize};

use crate::error::{CoresetError, Result};
use crate::model::{nearest_sq, point_costs, sq_dist, total_cost, CostModel, Query, WeightedDataset};
use crate::seeding::Bicriteria;

/// Coefficients of the per-point bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum BoundConstants {
    /// `2α d²/c̄ + 4α C_b/(|X_b| c̄) + 4n/|X_b|`.
    #[default]
    Standard,
    /// `α d²/c̄ + 2α C_b/(|X_b| c̄) + 4n/|X_b|`.
    Halved,
}

impl BoundConstants {
    fn coefficients(self) -> (f64, f64) {
        match self {
            BoundConstants::Standard => (2.0, 4.0),
            BoundConstants::Halved => (1.0, 2.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SensitivityOptions {
    pub constants: BoundConstants,
    /// Accept non-uniform weights by replacing counts with cluster masses and
    /// `n` with the total weight.
    pub generalized_weights: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityProfile {
    /// Upper bound `s(x)` per point, strictly positive.
    pub s: Vec<f64>,
    /// Index of the nearest center (`b_x`), ties to the lowest index.
    pub cluster_of: Vec<usize>,
    /// Number of points per center.
    pub cluster_sizes: Vec<usize>,
    /// Weight per center; equals the size on the uniform path.
    pub cluster_mass: Vec<f64>,
    /// `Σ d(x', b)²` over each cluster (weighted on the generalized path).
    pub cluster_cost: Vec<f64>,
    /// `c̄_B`, the average squared distance to `B`.
    pub mean_seed_cost: f64,
    /// `S = (1/W) Σ μ(x) s(x)`, which is `(1/n) Σ s(x)` for uniform weights.
    pub total: f64,
    pub alpha: f64,
    pub beta: f64,
    pub total_weight: f64,
    pub constants: BoundConstants,
    pub generalized: bool,
}

impl SensitivityProfile {
    pub fn nonempty_clusters(&self) -> usize {
        self.cluster_sizes.iter().filter(|&&c| c > 0).count()
    }

    /// Closed-form value of `total`: `6α + 4|B|` with the default constants
    /// (`3α + 4|B|` with [`BoundConstants::Halved`]), where `|B|` counts
    /// centers that own at least one point. The `α` terms vanish when
    /// `c̄_B = 0`.
    pub fn expected_total(&self) -> f64 {
        let (a, b) = self.constants.coefficients();
        let alpha_part = if self.mean_seed_cost > 0.0 { (a + b) * self.alpha } else { 0.0 };
        alpha_part + 4.0 * self.nonempty_clusters() as f64
    }

    /// Upper bound on the sensitivity of point `i` in the weighted set as given.
    pub fn bound_for_weights(&self, i: usize) -> f64 {
        self.s[i] / self.total_weight
    }

    /// Sampling distribution `q(x) = μ(x) s(x) / Σ μ s`, which reduces to
    /// `s(x) / Σ s` for uniform weights.
    pub fn sampling_distribution(&self, data: &WeightedDataset) -> Vec<f64> {
        if !self.generalized {
            let sum: f64 = self.s.iter().sum();
            return self.s.iter().map(|s| s / sum).collect();
        }
        let masses: Vec<f64> = self.s.iter().zip(data.weights()).map(|(s, w)| s * w).collect();
        let sum: f64 = masses.iter().sum();
        masses.into_iter().map(|m| m / sum).collect()
    }
}

/// Per-point bound from the bicriteria centers `B`.
pub fn sensitivity_bound(data: &WeightedDataset, b: &Bicriteria, opts: &SensitivityOptions) -> Result<SensitivityProfile> {
    sensitivity_bound_for(data, &b.centers, b.alpha, b.beta, opts)
}

/// Same as [`sensitivity_bound`] for an arbitrary center set and factor `α`.
pub fn sensitivity_bound_for(
    data: &WeightedDataset,
    centers: &Query,
    alpha: f64,
    beta: f64,
    opts: &SensitivityOptions,
) -> Result<SensitivityProfile> {
    if centers.dim() != data.dim() {
        return Err(CoresetError::DimensionMismatch { expected: data.dim(), got: centers.dim() });
    }
    let uniform = data.has_uniform_weights();
    if !uniform && !opts.generalized_weights {
        return Err(CoresetError::NonUniformWeights);
    }
    let k = centers.k();
    let n = data.len();

    // pass 1: assignment and per-cluster statistics
    let mut cluster_of = Vec::with_capacity(n);
    let mut dist = Vec::with_capacity(n);
    let mut cluster_sizes = vec![0usize; k];
    let mut cluster_mass = vec![0.0; k];
    let mut cluster_cost = vec![0.0; k];
    for (x, &w) in data.rows().zip(data.weights()) {
        let (d, j) = nearest_sq(x, centers);
        cluster_of.push(j);
        dist.push(d);
        cluster_sizes[j] += 1;
        if uniform {
            cluster_mass[j] += 1.0;
            cluster_cost[j] += d;
        } else {
            cluster_mass[j] += w;
            cluster_cost[j] += w * d;
        }
    }
    let mass_total: f64 = if uniform { n as f64 } else { data.total_weight() };
    let mean_seed_cost = cluster_cost.iter().sum::<f64>() / mass_total;

    // pass 2: evaluate the bound
    let (c_point, c_cluster) = opts.constants.coefficients();
    let s: Vec<f64> = dist
        .iter()
        .zip(&cluster_of)
        .map(|(&d, &j)| {
            let size_term = 4.0 * mass_total / cluster_mass[j];
            if mean_seed_cost > 0.0 {
                c_point * alpha * d / mean_seed_cost
                    + c_cluster * alpha * cluster_cost[j] / (cluster_mass[j] * mean_seed_cost)
                    + size_term
            } else {
                size_term
            }
        })
        .collect();

    let total = if uniform {
        s.iter().sum::<f64>() / n as f64
    } else {
        s.iter().zip(data.weights()).map(|(s, w)| s * w).sum::<f64>() / mass_total
    };

    Ok(SensitivityProfile {
        s,
        cluster_of,
        cluster_sizes,
        cluster_mass,
        cluster_cost,
        mean_seed_cost,
        total,
        alpha,
        beta,
        total_weight: data.total_weight(),
        constants: opts.constants,
        generalized: !uniform,
    })
}

/// The bound `s(x) = n` that holds for any uniformly weighted set.
pub fn trivial_bound(data: &WeightedDataset) -> Vec<f64> {
    vec![data.len() as f64; data.len()]
}

/// Exact sensitivities for `k = 1` under squared Euclidean cost:
/// `σ(x) = 1/W + ||x - m||² / V` with `m` the weighted mean,
/// `V = Σ μ(x) ||x - m||²` and `W` the total weight. `Σ μ σ = 2`.
pub fn exact_sensitivity_1means(data: &WeightedDataset) -> Result<Vec<f64>> {
    let mean = data.weighted_mean();
    let sq: Vec<f64> = data.rows().map(|x| sq_dist(x, &mean)).collect();
    let variance: f64 = sq.iter().zip(data.weights()).map(|(d, w)| d * w).sum();
    if !(variance > 0.0) {
        return Err(CoresetError::ZeroVariance);
    }
    let inv_w = 1.0 / data.total_weight();
    Ok(sq.into_iter().map(|d| inv_w + d / variance).collect())
}

/// Lower bound on each point's sensitivity: the maximum over `grid` of
/// `f_Q(x) / cost(X, Q)`. Queries with zero cost are skipped.
pub fn grid_sensitivity_oracle(data: &WeightedDataset, k: usize, grid: &[Query]) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Err(CoresetError::EmptySuite);
    }
    let model = CostModel::SquaredEuclidean;
    let mut best = vec![f64::NEG_INFINITY; data.len()];
    let mut used = 0usize;
    for q in grid {
        if q.k() != k {
            return Err(CoresetError::InvalidParameter(format!("grid query has {} centers, expected {k}", q.k())));
        }
        let cost = total_cost(data, q, &model)?;
        if !(cost > 0.0) {
            continue;
        }
        used += 1;
        for (b, f) in best.iter_mut().zip(point_costs(data, q, &model)?) {
            let r = f / cost;
            if r > *b {
                *b = r;
            }
        }
    }
    if used == 0 {
        return Err(CoresetError::AllQueriesDegenerate);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::{bicriteria, d2_alpha, BicriteriaConfig};
    use rand::{Rng, SeedableRng};

    fn uniform1(xs: &[f64]) -> WeightedDataset {
        WeightedDataset::uniform(xs.to_vec(), 1).unwrap()
    }

    fn q1(c: &[f64]) -> Query {
        Query::new(c.to_vec(), 1).unwrap()
    }

    #[test]
    fn two_point_example() {
        // c̄ = 0.5, one cluster of size 2 with cost 1
        let alpha = 7.0;
        let p = sensitivity_bound_for(&uniform1(&[0.0, 1.0]), &q1(&[0.0]), alpha, 1.0, &Default::default()).unwrap();
        assert_eq!(p.mean_seed_cost, 0.5);
        assert_eq!(p.cluster_sizes, vec![2]);
        assert_eq!(p.cluster_cost, vec![1.0]);
        assert_eq!(p.s, vec![4.0 * alpha + 4.0, 8.0 * alpha + 4.0]);
        assert_eq!(p.total, 6.0 * alpha + 4.0);
        assert_eq!(p.expected_total(), 6.0 * alpha + 4.0);
    }

    #[test]
    fn degenerate_seed_cost() {
        let x = uniform1(&[3.0, 3.0, 3.0, 3.0]);
        let p = sensitivity_bound_for(&x, &q1(&[3.0]), 32.0, 1.0, &Default::default()).unwrap();
        assert_eq!(p.mean_seed_cost, 0.0);
        assert!(p.s.iter().all(|&s| s == 4.0));
        assert_eq!(p.total, 4.0);
        assert_eq!(p.expected_total(), 4.0);
    }

    #[test]
    fn algorithm2_constants() {
        let alpha = 5.0;
        let opts = SensitivityOptions { constants: BoundConstants::Halved, generalized_weights: false };
        let p = sensitivity_bound_for(&uniform1(&[0.0, 1.0]), &q1(&[0.0]), alpha, 1.0, &opts).unwrap();
        assert_eq!(p.s, vec![2.0 * alpha + 4.0, 4.0 * alpha + 4.0]);
        assert_eq!(p.total, 3.0 * alpha + 4.0);
    }

    #[test]
    fn non_uniform_weights_need_the_flag() {
        let x = WeightedDataset::new(vec![0.0, 1.0, 5.0], vec![1.0, 2.0, 1.0], 1).unwrap();
        assert_eq!(
            sensitivity_bound_for(&x, &q1(&[0.0]), 32.0, 1.0, &Default::default()),
            Err(CoresetError::NonUniformWeights)
        );
        let opts = SensitivityOptions { generalized_weights: true, ..Default::default() };
        let p = sensitivity_bound_for(&x, &q1(&[0.0, 5.0]), 40.0, 1.0, &opts).unwrap();
        assert!(p.generalized);
        assert!((p.total - p.expected_total()).abs() < 1e-12 * p.total);
    }

    #[test]
    fn generalized_path_agrees_with_uniform_path_on_equal_weights() {
        let x = uniform1(&[0.0, 0.5, 2.0, 7.0, 7.5]);
        let scaled = x.scale_weights(3.0).unwrap();
        let q = q1(&[0.0, 7.0]);
        let a = sensitivity_bound_for(&x, &q, 48.0, 1.0, &Default::default()).unwrap();
        let b = sensitivity_bound_for(&scaled, &q, 48.0, 1.0, &Default::default()).unwrap();
        for (u, v) in a.s.iter().zip(&b.s) {
            assert!((u - v).abs() < 1e-12 * u);
        }
    }

    #[test]
    fn total_counts_every_nonempty_cluster() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let pts: Vec<f64> = (0..600).map(|_| rng.random_range(-10.0..10.0)).collect();
        let x = WeightedDataset::uniform(pts, 3).unwrap();
        for k in 1..=6 {
            let b = bicriteria(&x, k, 0.1, &BicriteriaConfig::default(), k as u64).unwrap();
            let p = sensitivity_bound(&x, &b, &Default::default()).unwrap();
            assert_eq!(p.cluster_sizes.iter().sum::<usize>(), x.len());
            assert!(p.s.iter().all(|&s| s > 0.0));
            let expected = 6.0 * d2_alpha(k) + 4.0 * k as f64;
            assert!((p.total - expected).abs() <= 1e-9 * expected, "k={k}: {} vs {expected}", p.total);
        }
    }

    #[test]
    fn exact_1means_examples() {
        let s = exact_sensitivity_1means(&uniform1(&[0.0, 1.0])).unwrap();
        assert_eq!(s, vec![2.0, 2.0]);
        let s = exact_sensitivity_1means(&uniform1(&[0.0, 0.0, 0.0, 1.0])).unwrap();
        assert!((s[3] - 4.0).abs() < 1e-12);
        assert!((s[0] - 4.0 / 3.0).abs() < 1e-12);
        assert_eq!(exact_sensitivity_1means(&uniform1(&[2.0, 2.0])), Err(CoresetError::ZeroVariance));
    }

    #[test]
    fn trivial_bound_dominates_exact_1means() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let n = rng.random_range(2..50);
            let pts: Vec<f64> = (0..n * 2).map(|_| rng.random_range(-3.0..3.0)).collect();
            let x = WeightedDataset::uniform(pts, 2).unwrap();
            let exact = exact_sensitivity_1means(&x).unwrap();
            for (t, e) in trivial_bound(&x).iter().zip(&exact) {
                assert!(*t >= *e - 1e-9);
            }
        }
    }

    #[test]
    fn grid_oracle_single_query_ratio() {
        let x = uniform1(&[0.0, 1.0, 2.0]);
        // covers 0 and 1, point 2 carries all cost: ratio = n
        let r = grid_sensitivity_oracle(&x, 2, &[q1(&[0.0, 1.0])]).unwrap();
        assert!((r[2] - 3.0).abs() < 1e-12);
        assert!(r[2] >= 1.0);
        assert_eq!(r[0], 0.0);
    }

    #[test]
    fn grid_oracle_skips_zero_cost_queries() {
        let x = uniform1(&[0.0, 1.0]);
        assert_eq!(grid_sensitivity_oracle(&x, 2, &[q1(&[0.0, 1.0])]), Err(CoresetError::AllQueriesDegenerate));
        assert_eq!(grid_sensitivity_oracle(&x, 1, &[]), Err(CoresetError::EmptySuite));
        assert!(grid_sensitivity_oracle(&x, 1, &[q1(&[0.0, 1.0])]).is_err());
    }

    #[test]
    fn grid_sweep_reaches_two_point_closed_form() {
        let x = uniform1(&[0.0, 1.0]);
        let grid: Vec<Query> = (0..=110_000).map(|i| q1(&[-5.0 + i as f64 * 1e-4])).collect();
        for r in grid_sensitivity_oracle(&x, 1, &grid).unwrap() {
            assert!((r - 2.0).abs() < 0.01, "{r}");
        }
    }
}
