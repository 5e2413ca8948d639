//! Empirical checks of the coreset property, sample-size helpers and
//! synthetic data generators.
//!
//! The coreset property quantifies over every query; [`coreset_error`] can
//! only evaluate a finite [`QuerySuite`], so the reported maximum is a lower
//! bound on the true worst-case error.

use rand::Rng;
use rand_distr::{Distribution as _, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::builder::{build_kmeans_coreset, uniform_baseline, BuildConfig, Coreset, Distribution};
use crate::error::{CoresetError, Result};
use crate::model::{nearest_sq, point_costs, total_cost, CostModel, Query, WeightedDataset};
use crate::rng::{derive_seed, rng_from_seed, tag};
use crate::seeding::d2_sample;
use crate::solver::{lloyd_restarts, LloydConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QueryKind {
    RandomBox,
    D2Seeded,
    ReferenceOptimum,
    PerturbedOptimum,
    /// Supplied by the caller.
    External,
}

/// Finite set of queries, all with the same `k` and dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct QuerySuite {
    pub queries: Vec<Query>,
    pub kinds: Vec<QueryKind>,
}

impl QuerySuite {
    pub fn new() -> Self {
        Self { queries: Vec::new(), kinds: Vec::new() }
    }

    pub fn from_queries(queries: Vec<Query>) -> Result<Self> {
        let kinds = vec![QueryKind::External; queries.len()];
        let suite = Self { queries, kinds };
        suite.validate()?;
        Ok(suite)
    }

    pub fn push(&mut self, query: Query, kind: QueryKind) {
        self.queries.push(query);
        self.kinds.push(kind);
    }

    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let first = self.queries.first().ok_or(CoresetError::EmptySuite)?;
        for q in &self.queries {
            if q.dim() != first.dim() {
                return Err(CoresetError::DimensionMismatch { expected: first.dim(), got: q.dim() });
            }
            if q.k() != first.k() {
                return Err(CoresetError::InvalidParameter("queries in a suite must share k".into()));
            }
        }
        Ok(())
    }
}

impl Default for QuerySuite {
    fn default() -> Self {
        Self::new()
    }
}

/// Composition of the default suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub random_box: usize,
    pub d2_seeded: usize,
    pub perturbations: usize,
    /// Perturbation standard deviation as a fraction of the average
    /// nearest-center distance under the reference optimum.
    pub perturbation_scale: f64,
    /// Lloyd restarts used to find the reference optimum.
    pub reference_restarts: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { random_box: 50, d2_seeded: 20, perturbations: 10, perturbation_scale: 0.1, reference_restarts: 10 }
    }
}

/// Random-box, D²-seeded, reference-optimum and perturbed-optimum queries.
/// When `reference` is `None` the optimum is approximated by Lloyd restarts.
pub fn default_suite(
    data: &WeightedDataset,
    k: usize,
    config: &SuiteConfig,
    reference: Option<&Query>,
    seed: u64,
) -> Result<QuerySuite> {
    if k == 0 {
        return Err(CoresetError::InvalidK);
    }
    let d = data.dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for x in data.rows() {
        for j in 0..d {
            lo[j] = lo[j].min(x[j]);
            hi[j] = hi[j].max(x[j]);
        }
    }
    let mut suite = QuerySuite::new();
    let mut rng = rng_from_seed(derive_seed(seed, tag::SUITE, 0));
    for _ in 0..config.random_box {
        let centers: Vec<f64> = (0..k * d)
            .map(|i| {
                let j = i % d;
                if hi[j] > lo[j] {
                    rng.random_range(lo[j]..=hi[j])
                } else {
                    lo[j]
                }
            })
            .collect();
        suite.push(Query::new(centers, d)?, QueryKind::RandomBox);
    }
    for r in 0..config.d2_seeded {
        let mut rng = rng_from_seed(derive_seed(seed, tag::SUITE, 1 + r as u64));
        suite.push(d2_sample(data, k, &mut rng)?.centers, QueryKind::D2Seeded);
    }
    let optimum = match reference {
        Some(q) => q.clone(),
        None => lloyd_restarts(data, k, config.reference_restarts, &LloydConfig::default(), derive_seed(seed, tag::SUITE, u64::MAX))?
            .query,
    };
    // average nearest-center distance (weighted)
    let total_w = data.total_weight();
    let avg_dist = data
        .rows()
        .zip(data.weights())
        .map(|(x, w)| w * nearest_sq(x, &optimum).0.sqrt())
        .sum::<f64>()
        / total_w;
    let scale = config.perturbation_scale * avg_dist;
    suite.push(optimum.clone(), QueryKind::ReferenceOptimum);
    if scale > 0.0 {
        let noise = Normal::new(0.0, scale).map_err(|e| CoresetError::InvalidParameter(e.to_string()))?;
        for _ in 0..config.perturbations {
            let centers: Vec<f64> = optimum.raw_centers().iter().map(|c| c + noise.sample(&mut rng)).collect();
            suite.push(Query::new(centers, d)?, QueryKind::PerturbedOptimum);
        }
    }
    Ok(suite)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryError {
    pub kind: QueryKind,
    pub full_cost: f64,
    pub coreset_cost: f64,
    /// `|cost(X,Q) - cost(C,Q)| / cost(X,Q)`; `None` when `cost(X,Q) = 0`.
    pub relative: Option<f64>,
    pub absolute: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub per_query: Vec<QueryError>,
    /// Largest relative error over queries with positive full cost.
    pub max_error: f64,
    pub mean_error: f64,
    /// Queries excluded because their full cost is zero.
    pub zero_cost_queries: usize,
}

/// Relative error of `coreset` against `full` on every query of `suite`.
pub fn coreset_error(full: &WeightedDataset, coreset: &WeightedDataset, suite: &QuerySuite) -> Result<ErrorReport> {
    suite.validate()?;
    let model = CostModel::SquaredEuclidean;
    let per_query: Vec<QueryError> = suite
        .queries
        .par_iter()
        .zip(&suite.kinds)
        .map(|(q, &kind)| {
            let full_cost = total_cost(full, q, &model)?;
            let coreset_cost = total_cost(coreset, q, &model)?;
            let absolute = (full_cost - coreset_cost).abs();
            let relative = (full_cost > 0.0).then(|| absolute / full_cost);
            Ok(QueryError { kind, full_cost, coreset_cost, relative, absolute })
        })
        .collect::<Result<_>>()?;
    let rel: Vec<f64> = per_query.iter().filter_map(|e| e.relative).collect();
    if rel.is_empty() {
        return Err(CoresetError::AllQueriesDegenerate);
    }
    let max_error = rel.iter().copied().fold(0.0, f64::max);
    let mean_error = rel.iter().sum::<f64>() / rel.len() as f64;
    let zero_cost_queries = suite.len() - rel.len();
    Ok(ErrorReport { per_query, max_error, mean_error, zero_cost_queries })
}

/// Values of `g_Q(x) = μ(x) f_Q(x) / cost(X, Q) · 1 / (S q(x))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GReport {
    pub values: Vec<f64>,
    pub min: f64,
    pub max: f64,
    /// `Σ q(x) g_Q(x)`, which equals `1/S`.
    pub mean_under_q: f64,
    /// Indices where `g > 1 + 1e-9`, i.e. the sensitivity bound is violated.
    pub violations: Vec<usize>,
}

/// Slack above 1 tolerated before a value counts as a violation.
pub const G_SLACK: f64 = 1e-9;

/// `g_Q` for sampling distribution `q` and total sensitivity `s_total`.
/// Points with `q(x) = 0` (zero weight) get `g = 0`.
pub fn g_function(data: &WeightedDataset, q: &[f64], s_total: f64, query: &Query) -> Result<GReport> {
    if q.len() != data.len() {
        return Err(CoresetError::DimensionMismatch { expected: data.len(), got: q.len() });
    }
    if !(s_total > 0.0) {
        return Err(CoresetError::InvalidParameter("total sensitivity must be positive".into()));
    }
    let model = CostModel::SquaredEuclidean;
    let cost = total_cost(data, query, &model)?;
    if !(cost > 0.0) {
        return Err(CoresetError::AllQueriesDegenerate);
    }
    let f = point_costs(data, query, &model)?;
    let values: Vec<f64> = f
        .iter()
        .zip(data.weights())
        .zip(q)
        .map(|((f, w), &q)| if q > 0.0 { w * f / cost / (s_total * q) } else { 0.0 })
        .collect();
    let mean_under_q = values.iter().zip(q).map(|(g, q)| g * q).sum();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let violations = values.iter().enumerate().filter(|(_, &g)| g > 1.0 + G_SLACK).map(|(i, _)| i).collect();
    Ok(GReport { values, min, max, mean_under_q, violations })
}

/// Single-query sample size `ceil(S² / (2ε²) · ln(2/δ))`.
pub fn hoeffding_m(s_total: f64, epsilon: f64, delta: f64) -> Result<usize> {
    if !(s_total > 0.0) {
        return Err(CoresetError::InvalidParameter("S must be positive".into()));
    }
    if !(epsilon > 0.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(CoresetError::InvalidParameter("need epsilon > 0 and 0 < delta < 1".into()));
    }
    Ok((s_total * s_total / (2.0 * epsilon * epsilon) * (2.0 / delta).ln()).ceil() as usize)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetKind {
    /// `n - 1` points at the origin and one point at 1, in one dimension.
    Adversarial { n: usize },
    /// Balanced isotropic Gaussian clusters around centers that are pairwise
    /// at least `separation` apart.
    GaussianMixture { n: usize, d: usize, k: usize, separation: f64, sigma: f64 },
    /// Uniform on `[0, 1]^d`.
    UniformBox { n: usize, d: usize },
}

/// A generated dataset with its planted centers, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub data: WeightedDataset,
    pub planted: Option<Query>,
    /// Planted cluster of each point.
    pub labels: Option<Vec<usize>>,
}

/// Deterministic synthetic data with uniform weights `1/n`.
pub fn generate(kind: &DatasetKind, seed: u64) -> Result<WeightedDataset> {
    generate_with_truth(kind, seed).map(|g| g.data)
}

pub fn generate_with_truth(kind: &DatasetKind, seed: u64) -> Result<Generated> {
    let mut rng = rng_from_seed(derive_seed(seed, tag::GENERATOR, 0));
    match *kind {
        DatasetKind::Adversarial { n } => {
            if n < 2 {
                return Err(CoresetError::InvalidParameter("adversarial set needs n >= 2".into()));
            }
            let mut pts = vec![0.0; n];
            pts[n - 1] = 1.0;
            Ok(Generated { data: WeightedDataset::uniform(pts, 1)?, planted: None, labels: None })
        }
        DatasetKind::UniformBox { n, d } => {
            if n == 0 || d == 0 {
                return Err(CoresetError::InvalidParameter("uniform box needs n, d >= 1".into()));
            }
            let pts: Vec<f64> = (0..n * d).map(|_| rng.random::<f64>()).collect();
            Ok(Generated { data: WeightedDataset::uniform(pts, d)?, planted: None, labels: None })
        }
        DatasetKind::GaussianMixture { n, d, k, separation, sigma } => {
            if n == 0 || d == 0 || k == 0 || !(separation > 0.0) || !(sigma >= 0.0) {
                return Err(CoresetError::InvalidParameter("gaussian mixture needs n, d, k >= 1, separation > 0, sigma >= 0".into()));
            }
            let side = separation * (k as f64).powf(1.0 / d as f64) * 2.0;
            let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
            let mut attempts = 0usize;
            while centers.len() < k {
                let c: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..side)).collect();
                attempts += 1;
                let far = centers.iter().all(|o| crate::model::sq_dist(o, &c) >= separation * separation);
                if far || attempts > 10_000 * k {
                    centers.push(c);
                }
            }
            let noise = Normal::new(0.0, sigma).map_err(|e| CoresetError::InvalidParameter(e.to_string()))?;
            let mut pts = Vec::with_capacity(n * d);
            let mut labels = Vec::with_capacity(n);
            for i in 0..n {
                let j = i % k;
                labels.push(j);
                pts.extend(centers[j].iter().map(|c| c + noise.sample(&mut rng)));
            }
            Ok(Generated {
                data: WeightedDataset::uniform(pts, d)?,
                planted: Some(Query::from_rows(&centers)?),
                labels: Some(labels),
            })
        }
    }
}

/// Outcome of one sampler in [`compare_samplers`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerSummary {
    pub distribution: Distribution,
    /// Suite error `ε̂` of every trial.
    pub trial_errors: Vec<f64>,
    pub max_error: f64,
    pub mean_error: f64,
    pub median_error: f64,
    pub mean_size: f64,
}

fn summarize(distribution: Distribution, trial_errors: Vec<f64>, sizes: &[usize]) -> SamplerSummary {
    let mut sorted = trial_errors.clone();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len().max(1) as f64;
    SamplerSummary {
        distribution,
        max_error: sorted.last().copied().unwrap_or(0.0),
        mean_error: sorted.iter().sum::<f64>() / n,
        median_error: sorted.get(sorted.len() / 2).copied().unwrap_or(0.0),
        mean_size: sizes.iter().sum::<usize>() as f64 / n,
        trial_errors,
    }
}

/// Builds `trials` coresets of `m` draws with each distribution and measures
/// each against `suite`. Trial `t` uses seed `derive_seed(seed, REBUILD, t)`.
pub fn compare_samplers(
    data: &WeightedDataset,
    build: &BuildConfig,
    distributions: &[Distribution],
    trials: usize,
    suite: &QuerySuite,
    seed: u64,
) -> Result<Vec<SamplerSummary>> {
    let m = build.sample_size(data.dim())?;
    distributions
        .iter()
        .map(|&dist| {
            let runs: Vec<(f64, usize)> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let s = derive_seed(seed, tag::REBUILD, t as u64);
                    let c: Coreset = match dist {
                        Distribution::Uniform => uniform_baseline(data, m, build.merge_duplicates, s)?,
                        _ => build_kmeans_coreset(data, &BuildConfig { m: Some(m), seed: s, ..build.clone() })?,
                    };
                    Ok((coreset_error(data, &c.data, suite)?.max_error, c.len()))
                })
                .collect::<Result<_>>()?;
            let (errors, sizes): (Vec<f64>, Vec<usize>) = runs.into_iter().unzip();
            Ok(summarize(dist, errors, &sizes))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationStep {
    pub c_size: f64,
    pub m: usize,
    pub pass_rate: f64,
    pub worst_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// Smallest candidate whose pass rate reaches the target, if any.
    pub c_size: Option<f64>,
    pub steps: Vec<CalibrationStep>,
}

/// Scans `candidates` in ascending order and reports the smallest leading
/// constant for which `ε̂ <= ε` in at least `target_rate` of `seeds` builds.
pub fn calibrate_c_size(
    data: &WeightedDataset,
    build: &BuildConfig,
    candidates: &[f64],
    seeds: usize,
    target_rate: f64,
    suite: &QuerySuite,
) -> Result<Calibration> {
    let mut sorted = candidates.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut steps = Vec::new();
    let mut found = None;
    for c in sorted {
        let cfg = BuildConfig { c_size: c, m: None, ..build.clone() };
        let m = cfg.sample_size(data.dim())?;
        let errors: Vec<f64> = (0..seeds.max(1))
            .into_par_iter()
            .map(|t| {
                let s = derive_seed(build.seed, tag::REBUILD, t as u64);
                let coreset = build_kmeans_coreset(data, &BuildConfig { seed: s, ..cfg.clone() })?;
                Ok(coreset_error(data, &coreset.data, suite)?.max_error)
            })
            .collect::<Result<_>>()?;
        let passes = errors.iter().filter(|&&e| e <= build.epsilon).count();
        let pass_rate = passes as f64 / errors.len() as f64;
        steps.push(CalibrationStep { c_size: c, m, pass_rate, worst_error: errors.iter().copied().fold(0.0, f64::max) });
        if pass_rate >= target_rate {
            found = Some(c);
            break;
        }
    }
    Ok(Calibration { c_size: found, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::{bicriteria, BicriteriaConfig};
    use crate::sensitivity::{sensitivity_bound, trivial_bound};

    fn q1(c: &[f64]) -> Query {
        Query::new(c.to_vec(), 1).unwrap()
    }

    #[test]
    fn identity_coreset_has_zero_error() {
        let x = generate(&DatasetKind::UniformBox { n: 300, d: 3 }, 1).unwrap();
        let suite = default_suite(&x, 4, &SuiteConfig::default(), None, 2).unwrap();
        assert_eq!(suite.len(), 81);
        let r = coreset_error(&x, &x, &suite).unwrap();
        assert_eq!(r.max_error, 0.0);
    }

    #[test]
    fn missing_outlier_gives_error_one() {
        let x = generate(&DatasetKind::Adversarial { n: 100 }, 0).unwrap();
        let c = WeightedDataset::uniform(vec![0.0; 10], 1).unwrap();
        let suite = QuerySuite::from_queries(vec![q1(&[0.0])]).unwrap();
        assert_eq!(coreset_error(&x, &c, &suite).unwrap().max_error, 1.0);
    }

    #[test]
    fn zero_cost_queries_are_skipped() {
        let x = WeightedDataset::uniform(vec![0.0, 1.0], 1).unwrap();
        let c = WeightedDataset::uniform(vec![0.0], 1).unwrap();
        let suite = QuerySuite::from_queries(vec![q1(&[0.0, 1.0]), q1(&[0.5, 7.0])]).unwrap();
        let r = coreset_error(&x, &c, &suite).unwrap();
        assert_eq!(r.zero_cost_queries, 1);
        assert_eq!(r.per_query[0].relative, None);
        assert_eq!(r.per_query[0].absolute, 0.0);
        let only_zero = QuerySuite::from_queries(vec![q1(&[0.0, 1.0])]).unwrap();
        assert_eq!(coreset_error(&x, &c, &only_zero), Err(CoresetError::AllQueriesDegenerate));
    }

    #[test]
    fn suite_error_is_monotone_in_queries() {
        let x = generate(&DatasetKind::UniformBox { n: 500, d: 2 }, 3).unwrap();
        let c = build_kmeans_coreset(&x, &BuildConfig::new(3, 0.2, 0.1, 1).with_m(40)).unwrap();
        let full = default_suite(&x, 3, &SuiteConfig::default(), None, 4).unwrap();
        let mut prev = 0.0;
        for len in 1..=full.len() {
            let sub = QuerySuite { queries: full.queries[..len].to_vec(), kinds: full.kinds[..len].to_vec() };
            let e = coreset_error(&x, &c.data, &sub).unwrap().max_error;
            assert!(e >= prev);
            prev = e;
        }
    }

    #[test]
    fn hoeffding_examples() {
        assert_eq!(hoeffding_m(2.0, 0.1, 0.05).unwrap(), 738);
        let a = hoeffding_m(10.0, 0.2, 0.1).unwrap() as f64;
        let b = hoeffding_m(10.0, 0.1, 0.1).unwrap() as f64;
        assert!((b / a - 4.0).abs() < 1e-3);
        // trivial bound S = n grows quadratically
        let m1 = hoeffding_m(1000.0, 0.1, 0.1).unwrap() as f64;
        let m2 = hoeffding_m(2000.0, 0.1, 0.1).unwrap() as f64;
        assert!((m2 / m1 - 4.0).abs() < 1e-3);
    }

    #[test]
    fn adversarial_generator() {
        let x = generate(&DatasetKind::Adversarial { n: 4 }, 9).unwrap();
        assert_eq!(x.raw_points(), &[0.0, 0.0, 0.0, 1.0]);
        assert_eq!(x.weights(), &[0.25; 4]);
    }

    #[test]
    fn generators_are_deterministic() {
        let kind = DatasetKind::GaussianMixture { n: 100, d: 3, k: 4, separation: 10.0, sigma: 0.5 };
        assert_eq!(generate(&kind, 5).unwrap(), generate(&kind, 5).unwrap());
        assert_ne!(generate(&kind, 5).unwrap(), generate(&kind, 6).unwrap());
        let g = generate_with_truth(&kind, 5).unwrap();
        let planted = g.planted.unwrap();
        for i in 0..planted.k() {
            for j in 0..i {
                assert!(crate::model::sq_dist(planted.center(i), planted.center(j)) >= 100.0);
            }
        }
    }

    #[test]
    fn uniform_box_shuffle_keeps_multiset() {
        let x = generate(&DatasetKind::UniformBox { n: 50, d: 1 }, 2).unwrap();
        let mut sorted = x.raw_points().to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut rev: Vec<f64> = x.raw_points().iter().rev().copied().collect();
        rev.sort_by(f64::total_cmp);
        assert_eq!(sorted, rev);
        assert!(x.raw_points().iter().all(|v| (0.0..1.0).contains(v)));
    }

    #[test]
    fn g_with_trivial_bound_and_identities() {
        let x = generate(&DatasetKind::UniformBox { n: 200, d: 2 }, 7).unwrap();
        let s = trivial_bound(&x);
        let sum: f64 = s.iter().sum();
        let q: Vec<f64> = s.iter().map(|v| v / sum).collect();
        let s_total = s.iter().zip(x.weights()).map(|(s, w)| s * w).sum::<f64>() / x.total_weight();
        let query = Query::new(vec![0.3, 0.3, 0.9, 0.1], 2).unwrap();
        let g = g_function(&x, &q, s_total, &query).unwrap();
        assert!(g.violations.is_empty());
        assert!(g.min >= 0.0 && g.max <= 1.0 + G_SLACK);
        assert!((g.mean_under_q - 1.0 / s_total).abs() < 1e-9);
    }

    #[test]
    fn g_on_adversarial_set_with_bicriteria_bound() {
        let x = generate(&DatasetKind::Adversarial { n: 500 }, 0).unwrap();
        let b = bicriteria(&x, 1, 0.1, &BicriteriaConfig::default(), 3).unwrap();
        let p = sensitivity_bound(&x, &b, &Default::default()).unwrap();
        let q = p.sampling_distribution(&x);
        for c in [-2.0, 0.0, 0.3, 1.0, 4.0] {
            let g = g_function(&x, &q, p.total, &q1(&[c])).unwrap();
            assert!(g.violations.is_empty(), "center {c}: max {}", g.max);
            assert!((g.mean_under_q - 1.0 / p.total).abs() < 1e-9);
            // second form: f_Q(x) / (cost · s(x)/W)
            let cost = total_cost(&x, &q1(&[c]), &CostModel::SquaredEuclidean).unwrap();
            for (i, v) in g.values.iter().enumerate() {
                let f = crate::model::sq_dist(x.point(i), &[c]);
                let alt = f / (cost * p.bound_for_weights(i));
                assert!((v - alt).abs() <= 1e-9 * alt.max(1e-12));
            }
        }
    }
}
