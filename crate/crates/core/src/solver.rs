//! Weighted Lloyd iterations, exhaustive partition search, and solving the
//! full problem through a coreset.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::builder::{build_kmeans_coreset, BuildConfig, Coreset};
use crate::error::{CoresetError, Result};
use crate::model::{nearest_sq, sq_dist, total_cost, whiten, CostModel, Query, WeightedDataset};
use crate::rng::{derive_seed, rng_from_seed, tag};
use crate::seeding::d2_sample;

const PAR_THRESHOLD: usize = 4096;

/// Default number of partitions [`ptas_exhaustive`] may enumerate.
pub const DEFAULT_PARTITION_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub query: Query,
    /// Cost of `query` on the set it was solved on.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after every iteration, starting with the initial centers.
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LloydConfig {
    pub max_iters: usize,
    /// Stop once the relative objective decrease falls below this.
    pub tol: f64,
}

impl Default for LloydConfig {
    fn default() -> Self {
        Self { max_iters: 300, tol: 1e-9 }
    }
}

fn assign(data: &WeightedDataset, centers: &Query) -> (Vec<usize>, f64) {
    let pairs: Vec<(f64, usize)> = if data.len() >= PAR_THRESHOLD {
        data.raw_points().par_chunks_exact(data.dim()).map(|x| nearest_sq(x, centers)).collect()
    } else {
        data.rows().map(|x| nearest_sq(x, centers)).collect()
    };
    let objective = pairs.iter().zip(data.weights()).fold(0.0, |acc, ((d, _), w)| acc + w * d);
    (pairs.into_iter().map(|(_, j)| j).collect(), objective)
}

fn update(data: &WeightedDataset, centers: &Query, labels: &[usize]) -> Result<Query> {
    let (k, d) = (centers.k(), data.dim());
    let mut sums = vec![0.0; k * d];
    let mut mass = vec![0.0; k];
    for ((x, &w), &j) in data.rows().zip(data.weights()).zip(labels) {
        mass[j] += w;
        for (s, v) in sums[j * d..(j + 1) * d].iter_mut().zip(x) {
            *s += w * v;
        }
    }
    let empty: Vec<usize> = (0..k).filter(|&j| !(mass[j] > 0.0)).collect();
    if !empty.is_empty() {
        // reseed each empty center at the point with the largest weighted cost
        let mut costs: Vec<f64> = data
            .rows()
            .zip(data.weights())
            .zip(labels)
            .map(|((x, w), &j)| w * sq_dist(x, centers.center(j)))
            .collect();
        for &j in &empty {
            let mut arg = 0;
            for (i, &c) in costs.iter().enumerate() {
                if c > costs[arg] {
                    arg = i;
                }
            }
            sums[j * d..(j + 1) * d].copy_from_slice(data.point(arg));
            mass[j] = 1.0;
            costs[arg] = 0.0;
        }
    }
    for j in 0..k {
        if !empty.contains(&j) {
            sums[j * d..(j + 1) * d].iter_mut().for_each(|s| *s /= mass[j]);
        }
    }
    Query::new(sums, d)
}

/// Weighted Lloyd iterations from `init`.
pub fn weighted_lloyd(data: &WeightedDataset, k: usize, init: &Query, config: &LloydConfig) -> Result<Solution> {
    if k == 0 {
        return Err(CoresetError::InvalidK);
    }
    if init.k() != k {
        return Err(CoresetError::InvalidParameter(format!("init has {} centers, expected {k}", init.k())));
    }
    if init.dim() != data.dim() {
        return Err(CoresetError::DimensionMismatch { expected: data.dim(), got: init.dim() });
    }
    if config.max_iters == 0 {
        return Err(CoresetError::InvalidParameter("max_iters must be >= 1".into()));
    }
    let distinct = data.distinct_count();
    if k > distinct {
        return Err(CoresetError::TooFewDistinctPoints { k, distinct });
    }

    let mut centers = init.clone();
    let (mut labels, mut objective) = assign(data, &centers);
    let mut history = vec![objective];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iters {
        iterations += 1;
        let next = update(data, &centers, &labels)?;
        let (next_labels, next_objective) = assign(data, &next);
        history.push(next_objective);
        let decrease = objective - next_objective;
        centers = next;
        labels = next_labels;
        let previous = objective;
        objective = next_objective;
        if decrease <= config.tol * previous {
            converged = true;
            break;
        }
    }
    Ok(Solution { query: centers, objective, iterations, converged, history })
}

/// Best of `restarts` Lloyd runs, each started from a D²-seeding drawn with
/// `derive_seed(seed, RESTART, r)`. Ties go to the lowest restart index.
pub fn lloyd_restarts(
    data: &WeightedDataset,
    k: usize,
    restarts: usize,
    config: &LloydConfig,
    seed: u64,
) -> Result<Solution> {
    let restarts = restarts.max(1);
    let runs: Vec<Solution> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_from_seed(derive_seed(seed, tag::RESTART, r as u64));
            let init = d2_sample(data, k, &mut rng)?;
            weighted_lloyd(data, k, &init.centers, config)
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (r, s) in runs.iter().enumerate() {
        if s.objective < runs[best].objective {
            best = r;
        }
    }
    Ok(runs.into_iter().nth(best).expect("restarts >= 1"))
}

/// Stirling numbers of the second kind `S(n, j)` for `j <= k`, summed.
pub fn partition_count(n: usize, k: usize) -> u128 {
    let k = k.min(n);
    // row[j] = S(i, j)
    let mut row = vec![0u128; k + 1];
    row[0] = 1;
    for _ in 0..n {
        for j in (1..=k).rev() {
            row[j] = row[j].saturating_mul(j as u128).saturating_add(row[j - 1]);
        }
        row[0] = 0;
    }
    row[1..].iter().fold(0u128, |a, &b| a.saturating_add(b))
}

/// Visits every restricted growth string of length `n` with at most `k`
/// distinct values, i.e. every partition of `n` items into at most `k`
/// nonempty groups, in lexicographic order.
pub fn for_each_partition(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if n == 0 || k == 0 {
        return;
    }
    let mut a = vec![0usize; n];
    // prefix_max[i] = max(a[0..=i])
    let mut prefix_max = vec![0usize; n];
    loop {
        visit(&a);
        // find the rightmost position that can be incremented
        let mut i = n - 1;
        loop {
            if i == 0 {
                return;
            }
            let bound = prefix_max[i - 1] + 1;
            if a[i] < bound && a[i] + 1 < k {
                break;
            }
            i -= 1;
        }
        a[i] += 1;
        prefix_max[i] = prefix_max[i - 1].max(a[i]);
        for j in i + 1..n {
            a[j] = 0;
            prefix_max[j] = prefix_max[i];
        }
    }
}

/// Exact k-means optimum by enumerating every partition of the distinct
/// positive-weight points into at most `k` groups and taking group centroids.
pub fn ptas_exhaustive(data: &WeightedDataset, k: usize, cap: u128) -> Result<Solution> {
    if k == 0 {
        return Err(CoresetError::InvalidK);
    }
    let d = data.dim();
    // collapse identical points, drop zero-weight ones
    let mut points: Vec<&[f64]> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    for (x, &w) in data.rows().zip(data.weights()) {
        if w <= 0.0 {
            continue;
        }
        match points.iter().position(|p| *p == x) {
            Some(j) => weights[j] += w,
            None => {
                points.push(x);
                weights.push(w);
            }
        }
    }
    let p = points.len();
    let required = partition_count(p, k);
    if required > cap {
        return Err(CoresetError::PartitionCapExceeded { required, cap });
    }

    let groups = k.min(p);
    let mut best_cost = f64::INFINITY;
    let mut best_centers = vec![0.0; groups * d];
    let mut sums = vec![0.0; groups * d];
    let mut mass = vec![0.0; groups];
    for_each_partition(p, groups, |labels| {
        sums.iter_mut().for_each(|s| *s = 0.0);
        mass.iter_mut().for_each(|m| *m = 0.0);
        for (i, &g) in labels.iter().enumerate() {
            mass[g] += weights[i];
            for (s, v) in sums[g * d..(g + 1) * d].iter_mut().zip(points[i]) {
                *s += weights[i] * v;
            }
        }
        for g in 0..groups {
            if mass[g] > 0.0 {
                sums[g * d..(g + 1) * d].iter_mut().for_each(|s| *s /= mass[g]);
            }
        }
        let mut cost = 0.0;
        for (i, &g) in labels.iter().enumerate() {
            cost += weights[i] * sq_dist(points[i], &sums[g * d..(g + 1) * d]);
            if cost >= best_cost {
                return;
            }
        }
        if cost < best_cost {
            best_cost = cost;
            // unused trailing groups keep a copy of group 0
            let used = labels.iter().max().map_or(0, |m| m + 1);
            for g in 0..groups {
                let src = if g < used { g } else { 0 } * d;
                best_centers[g * d..(g + 1) * d].copy_from_slice(&sums[src..src + d]);
            }
        }
    });

    let mut centers = best_centers;
    for j in groups..k {
        // k exceeds the number of distinct points: repeat existing centers
        let src = (j % groups) * d;
        let chunk: Vec<f64> = centers[src..src + d].to_vec();
        centers.extend_from_slice(&chunk);
    }
    let query = Query::new(centers, d)?;
    let objective = total_cost(data, &query, &CostModel::SquaredEuclidean)?;
    Ok(Solution { query, objective, iterations: 1, converged: true, history: vec![objective] })
}

/// [`ptas_exhaustive`] under a Mahalanobis cost: solves on the whitened
/// points and returns the group centroids in the original coordinates.
pub fn ptas_exhaustive_model(data: &WeightedDataset, k: usize, model: &CostModel, cap: u128) -> Result<Solution> {
    let a = match model {
        CostModel::SquaredEuclidean => return ptas_exhaustive(data, k, cap),
        CostModel::Mahalanobis(a) => a,
    };
    let white = whiten(data, a)?;
    let sol = ptas_exhaustive(&white, k, cap)?;
    // centroids commute with the linear map, so map labels back
    let d = data.dim();
    let mut sums = vec![0.0; k * d];
    let mut mass = vec![0.0; k];
    for (i, x) in white.rows().enumerate() {
        let (_, j) = nearest_sq(x, &sol.query);
        mass[j] += data.weight(i);
        for (s, v) in sums[j * d..(j + 1) * d].iter_mut().zip(data.point(i)) {
            *s += data.weight(i) * v;
        }
    }
    for j in 0..k {
        if mass[j] > 0.0 {
            sums[j * d..(j + 1) * d].iter_mut().for_each(|s| *s /= mass[j]);
        } else {
            let chunk: Vec<f64> = sums[0..d].to_vec();
            sums[j * d..(j + 1) * d].copy_from_slice(&chunk);
        }
    }
    let query = Query::new(sums, d)?;
    let objective = total_cost(data, &query, model)?;
    Ok(Solution { query, objective, ..sol })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum SolveMethod {
    Lloyd { restarts: usize },
    Ptas { cap: u128 },
}

impl SolveMethod {
    pub fn solve(&self, data: &WeightedDataset, k: usize, lloyd: &LloydConfig, seed: u64) -> Result<Solution> {
        match *self {
            SolveMethod::Lloyd { restarts } => lloyd_restarts(data, k, restarts, lloyd, seed),
            SolveMethod::Ptas { cap } => ptas_exhaustive(data, k, cap),
        }
    }

    /// True when the method returns the exact optimum.
    pub fn is_exact(&self) -> bool {
        matches!(self, SolveMethod::Ptas { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViaCoresetConfig {
    pub build: BuildConfig,
    /// Solver run on the coreset.
    pub method: SolveMethod,
    /// Solver for the reference optimum on the full data.
    pub reference: SolveMethod,
    pub lloyd: LloydConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViaCoresetReport {
    pub coreset: Coreset,
    pub coreset_solution: Solution,
    pub reference_solution: Solution,
    /// `cost(X, Q_C)`.
    pub objective_on_full: f64,
    /// `cost(C, Q_C)`.
    pub objective_on_coreset: f64,
    /// `cost(X, Q_C) / cost(X, Q_X)`.
    pub ratio: f64,
    /// False when the reference comes from Lloyd restarts.
    pub reference_exact: bool,
}

/// Builds a coreset, solves on it, and compares the resulting centers on
/// the full data against a reference solution of the full data.
pub fn solve_via_coreset(data: &WeightedDataset, k: usize, config: &ViaCoresetConfig) -> Result<ViaCoresetReport> {
    let build = BuildConfig { k, ..config.build.clone() };
    let coreset = build_kmeans_coreset(data, &build)?;
    solve_on_coreset(data, coreset, k, config)
}

/// Second half of [`solve_via_coreset`] for an already built coreset.
pub fn solve_on_coreset(
    data: &WeightedDataset,
    coreset: Coreset,
    k: usize,
    config: &ViaCoresetConfig,
) -> Result<ViaCoresetReport> {
    let seed = config.build.seed;
    let coreset_solution = config.method.solve(&coreset.data, k, &config.lloyd, seed)?;
    let reference_solution = config.reference.solve(data, k, &config.lloyd, seed)?;
    let objective_on_full = total_cost(data, &coreset_solution.query, &CostModel::SquaredEuclidean)?;
    let ratio = objective_on_full / reference_solution.objective;
    Ok(ViaCoresetReport {
        objective_on_coreset: coreset_solution.objective,
        coreset,
        coreset_solution,
        reference_exact: config.reference.is_exact(),
        reference_solution,
        objective_on_full,
        ratio,
    })
}
