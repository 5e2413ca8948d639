//! Weighted datasets, queries and the decomposable k-means cost.
//!
//! The cost of a query `Q` on a weighted dataset is the weighted sum of each
//! point's squared distance to its nearest center. Everything else in the
//! crate is expressed through [`point_cost`] and [`total_cost`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CoresetError, Result};

/// Points per rayon task when evaluating costs in parallel. Below this many
/// points the sequential loop is used.
const PAR_THRESHOLD: usize = 4096;

/// Immutable set of points in `R^d` with non-negative weights.
///
/// Points are stored row-major in a single buffer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedDataset {
    points: Vec<f64>,
    weights: Vec<f64>,
    dim: usize,
}

impl WeightedDataset {
    /// Builds a dataset from a row-major buffer of `weights.len()` points.
    pub fn new(points: Vec<f64>, weights: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(CoresetError::ZeroDimension);
        }
        if weights.is_empty() {
            return Err(CoresetError::EmptyDataset);
        }
        if points.len() != weights.len() * dim {
            return Err(CoresetError::DimensionMismatch {
                expected: weights.len() * dim,
                got: points.len(),
            });
        }
        for (index, &value) in weights.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(CoresetError::InvalidWeight { index, value });
            }
        }
        if let Some(pos) = points.iter().position(|v| !v.is_finite()) {
            return Err(CoresetError::NonFinitePoint { index: pos / dim });
        }
        if !weights.iter().any(|&w| w > 0.0) {
            return Err(CoresetError::ZeroTotalWeight);
        }
        Ok(Self { points, weights, dim })
    }

    /// Dataset with explicit uniform weights `1/n`.
    pub fn uniform(points: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(CoresetError::ZeroDimension);
        }
        let n = points.len() / dim;
        Self::new(points, vec![1.0 / n.max(1) as f64; n], dim)
    }

    pub fn from_rows(rows: &[Vec<f64>], weights: Vec<f64>) -> Result<Self> {
        let dim = rows.first().map(Vec::len).ok_or(CoresetError::EmptyDataset)?;
        let mut points = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            if row.len() != dim {
                return Err(CoresetError::DimensionMismatch { expected: dim, got: row.len() });
            }
            points.extend_from_slice(row);
        }
        Self::new(points, weights, dim)
    }

    pub fn uniform_from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len().max(1);
        Self::from_rows(rows, vec![1.0 / n as f64; rows.len()])
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    /// Always false; construction rejects empty datasets.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn raw_points(&self) -> &[f64] {
        &self.points
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.points.chunks_exact(self.dim)
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// True when every weight is bitwise equal to the first one.
    pub fn has_uniform_weights(&self) -> bool {
        let w0 = self.weights[0];
        self.weights.iter().all(|&w| w == w0)
    }

    /// Number of distinct points (bitwise comparison of coordinates).
    pub fn distinct_count(&self) -> usize {
        let mut rows: Vec<&[f64]> = self.rows().collect();
        rows.sort_by(|a, b| cmp_rows(a, b));
        rows.dedup_by(|a, b| cmp_rows(a, b).is_eq());
        rows.len()
    }

    /// Indices of the first occurrence of each distinct point, in index order.
    pub fn distinct_indices(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| cmp_rows(self.point(a), self.point(b)).then(a.cmp(&b)));
        let mut keep = Vec::new();
        for (pos, &i) in order.iter().enumerate() {
            if pos == 0 || !cmp_rows(self.point(order[pos - 1]), self.point(i)).is_eq() {
                keep.push(i);
            }
        }
        keep.sort_unstable();
        keep
    }

    /// Subset by index (indices may repeat), keeping the original weights.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut points = Vec::with_capacity(indices.len() * self.dim);
        let mut weights = Vec::with_capacity(indices.len());
        for &i in indices {
            points.extend_from_slice(self.point(i));
            weights.push(self.weights[i]);
        }
        Self::new(points, weights, self.dim)
    }

    /// Same points with replaced weights.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        Self::new(self.points.clone(), weights, self.dim)
    }

    /// Disjoint union (multiset concatenation) of weighted sets.
    pub fn union(parts: &[&WeightedDataset]) -> Result<Self> {
        let first = parts.first().ok_or(CoresetError::EmptyDataset)?;
        let dim = first.dim;
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for part in parts {
            if part.dim != dim {
                return Err(CoresetError::DimensionMismatch { expected: dim, got: part.dim });
            }
            points.extend_from_slice(&part.points);
            weights.extend_from_slice(&part.weights);
        }
        Self::new(points, weights, dim)
    }

    pub fn scale_weights(&self, factor: f64) -> Result<Self> {
        Self::new(self.points.clone(), self.weights.iter().map(|w| w * factor).collect(), self.dim)
    }

    /// Weighted mean of the points.
    pub fn weighted_mean(&self) -> Vec<f64> {
        let total = self.total_weight();
        let mut mean = vec![0.0; self.dim];
        for (row, &w) in self.rows().zip(&self.weights) {
            for (m, &x) in mean.iter_mut().zip(row) {
                *m += w * x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= total);
        mean
    }
}

fn cmp_rows(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        let ord = x.total_cmp(y);
        if !ord.is_eq() {
            return ord;
        }
    }
    std::cmp::Ordering::Equal
}

/// A set of `k >= 1` candidate centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Query {
    centers: Vec<f64>,
    dim: usize,
}

impl Query {
    pub fn new(centers: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(CoresetError::ZeroDimension);
        }
        if centers.is_empty() {
            return Err(CoresetError::EmptyQuery);
        }
        if !centers.len().is_multiple_of(dim) {
            return Err(CoresetError::DimensionMismatch { expected: dim, got: centers.len() % dim });
        }
        if centers.iter().any(|v| !v.is_finite()) {
            return Err(CoresetError::InvalidParameter("non-finite center coordinate".into()));
        }
        Ok(Self { centers, dim })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map(Vec::len).ok_or(CoresetError::EmptyQuery)?;
        let mut centers = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            if row.len() != dim {
                return Err(CoresetError::DimensionMismatch { expected: dim, got: row.len() });
            }
            centers.extend_from_slice(row);
        }
        Self::new(centers, dim)
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.centers.len() / self.dim
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn center(&self, j: usize) -> &[f64] {
        &self.centers[j * self.dim..(j + 1) * self.dim]
    }

    pub fn centers(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.centers.chunks_exact(self.dim)
    }

    pub fn raw_centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.centers().map(<[f64]>::to_vec).collect()
    }
}

/// Symmetric positive-definite matrix together with its Cholesky factor.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix {
    dim: usize,
    entries: Vec<f64>,
    // lower-triangular L with A = L Lᵀ, row-major
    lower: Vec<f64>,
}

impl SpdMatrix {
    /// Validates symmetry and factorizes. Fails if `A` is not SPD.
    pub fn new(entries: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(CoresetError::ZeroDimension);
        }
        if entries.len() != dim * dim {
            return Err(CoresetError::DimensionMismatch { expected: dim * dim, got: entries.len() });
        }
        let scale = entries.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        for i in 0..dim {
            for j in 0..i {
                if (entries[i * dim + j] - entries[j * dim + i]).abs() > 1e-12 * scale {
                    return Err(CoresetError::NotPositiveDefinite);
                }
            }
        }
        let lower = cholesky(&entries, dim)?;
        Ok(Self { dim, entries, lower })
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1.0;
        }
        Self::new(entries, dim).expect("identity is SPD")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Quadratic form `vᵀ A v`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        let d = self.dim;
        self.entries
            .chunks_exact(d)
            .zip(v)
            .map(|(row, vi)| vi * row.iter().zip(v).map(|(a, vj)| a * vj).sum::<f64>())
            .sum()
    }

    /// Maps `x` to `Lᵀ x`, so that `||Lᵀ(p - q)||² = (p - q)ᵀ A (p - q)`.
    pub fn transform(&self, x: &[f64], out: &mut [f64]) {
        let d = self.dim;
        for (i, o) in out.iter_mut().enumerate().take(d) {
            // (Lᵀ)[i][j] = L[j][i], nonzero for j >= i
            *o = (i..d).map(|j| self.lower[j * d + i] * x[j]).sum();
        }
    }
}

fn cholesky(a: &[f64], d: usize) -> Result<Vec<f64>> {
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut sum = a[i * d + j];
            for p in 0..j {
                sum -= l[i * d + p] * l[j * d + p];
            }
            if i == j {
                if !(sum > 0.0) || !sum.is_finite() {
                    return Err(CoresetError::NotPositiveDefinite);
                }
                l[i * d + i] = sum.sqrt();
            } else {
                l[i * d + j] = sum / l[j * d + j];
            }
        }
    }
    Ok(l)
}

/// Distance used by the cost.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum CostModel {
    #[default]
    SquaredEuclidean,
    /// Squared Mahalanobis distance `(x - q)ᵀ A (x - q)`.
    Mahalanobis(SpdMatrix),
}

impl CostModel {
    pub fn distance(&self, x: &[f64], q: &[f64]) -> f64 {
        match self {
            CostModel::SquaredEuclidean => sq_dist(x, q),
            CostModel::Mahalanobis(a) => {
                let diff: Vec<f64> = x.iter().zip(q).map(|(a, b)| a - b).collect();
                a.quadratic_form(&diff)
            }
        }
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        match self {
            CostModel::Mahalanobis(a) if a.dim() != dim => {
                Err(CoresetError::DimensionMismatch { expected: a.dim(), got: dim })
            }
            _ => Ok(()),
        }
    }
}

#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Squared Euclidean distance to the nearest center, ties to the lowest index.
/// No dimension checks; callers validate once up front.
#[inline]
pub fn nearest_sq(x: &[f64], query: &Query) -> (f64, usize) {
    let mut best = f64::INFINITY;
    let mut arg = 0;
    for (j, c) in query.centers().enumerate() {
        let d = sq_dist(x, c);
        if d < best {
            best = d;
            arg = j;
        }
    }
    (best, arg)
}

/// Cost of one point: the minimum distance over centers and the argmin
/// (lowest index among ties).
pub fn point_cost(x: &[f64], query: &Query, model: &CostModel) -> Result<(f64, usize)> {
    if x.len() != query.dim() {
        return Err(CoresetError::DimensionMismatch { expected: query.dim(), got: x.len() });
    }
    model.check_dim(x.len())?;
    if let CostModel::SquaredEuclidean = model {
        return Ok(nearest_sq(x, query));
    }
    let mut best = f64::INFINITY;
    let mut arg = 0;
    for (j, c) in query.centers().enumerate() {
        let d = model.distance(x, c);
        if d < best {
            best = d;
            arg = j;
        }
    }
    Ok((best, arg))
}

fn check_compatible(data: &WeightedDataset, query: &Query, model: &CostModel) -> Result<()> {
    if data.dim() != query.dim() {
        return Err(CoresetError::DimensionMismatch { expected: data.dim(), got: query.dim() });
    }
    model.check_dim(data.dim())
}

/// Per-point unweighted costs `f_Q(x)` in index order.
pub fn point_costs(data: &WeightedDataset, query: &Query, model: &CostModel) -> Result<Vec<f64>> {
    check_compatible(data, query, model)?;
    let eval = |x: &[f64]| match model {
        CostModel::SquaredEuclidean => nearest_sq(x, query).0,
        _ => query.centers().map(|c| model.distance(x, c)).fold(f64::INFINITY, f64::min),
    };
    if data.len() >= PAR_THRESHOLD {
        Ok(data.points.par_chunks_exact(data.dim).map(eval).collect())
    } else {
        Ok(data.rows().map(eval).collect())
    }
}

/// Weighted cost `Σ μ(x) f_Q(x)`, summed in index order.
///
/// Per-point terms may be computed in parallel; the reduction is always the
/// sequential left fold so the result does not depend on thread count.
pub fn total_cost(data: &WeightedDataset, query: &Query, model: &CostModel) -> Result<f64> {
    let costs = point_costs(data, query, model)?;
    Ok(costs.iter().zip(&data.weights).fold(0.0, |acc, (c, w)| acc + w * c))
}

/// Same as [`total_cost`] with Neumaier-compensated summation.
pub fn total_cost_compensated(data: &WeightedDataset, query: &Query, model: &CostModel) -> Result<f64> {
    let costs = point_costs(data, query, model)?;
    Ok(compensated_sum(costs.iter().zip(&data.weights).map(|(c, w)| w * c)))
}

/// Neumaier summation.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Maps every point through the Cholesky factor of `a`, reducing the
/// Mahalanobis cost to squared Euclidean cost.
pub fn whiten(data: &WeightedDataset, a: &SpdMatrix) -> Result<WeightedDataset> {
    if a.dim() != data.dim() {
        return Err(CoresetError::DimensionMismatch { expected: a.dim(), got: data.dim() });
    }
    let d = data.dim();
    let mut points = vec![0.0; data.points.len()];
    for (src, dst) in data.rows().zip(points.chunks_exact_mut(d)) {
        a.transform(src, dst);
    }
    WeightedDataset::new(points, data.weights.clone(), d)
}

/// Whitened counterpart of a query.
pub fn whiten_query(query: &Query, a: &SpdMatrix) -> Result<Query> {
    if a.dim() != query.dim() {
        return Err(CoresetError::DimensionMismatch { expected: a.dim(), got: query.dim() });
    }
    let d = query.dim();
    let mut centers = vec![0.0; query.raw_centers().len()];
    for (src, dst) in query.centers().zip(centers.chunks_exact_mut(d)) {
        a.transform(src, dst);
    }
    Query::new(centers, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn q1(c: &[f64]) -> Query {
        Query::new(c.to_vec(), 1).unwrap()
    }

    #[test]
    fn point_cost_examples() {
        let sq = CostModel::SquaredEuclidean;
        assert_eq!(point_cost(&[0.0], &q1(&[0.0]), &sq).unwrap(), (0.0, 0));
        assert_eq!(point_cost(&[1.0], &q1(&[0.0, 3.0]), &sq).unwrap(), (1.0, 0));
        let a = SpdMatrix::new(vec![2.0, 0.0, 0.0, 2.0], 2).unwrap();
        let q = Query::new(vec![0.0, 0.0], 2).unwrap();
        let (c, j) = point_cost(&[1.0, 0.0], &q, &CostModel::Mahalanobis(a)).unwrap();
        assert_eq!((c, j), (2.0, 0));
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let q = q1(&[-1.0, 1.0, 1.0]);
        assert_eq!(point_cost(&[0.0], &q, &CostModel::SquaredEuclidean).unwrap(), (1.0, 0));
        assert_eq!(point_cost(&[2.0], &q, &CostModel::SquaredEuclidean).unwrap(), (1.0, 1));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let q = Query::new(vec![0.0, 0.0], 2).unwrap();
        assert!(matches!(
            point_cost(&[1.0], &q, &CostModel::SquaredEuclidean),
            Err(CoresetError::DimensionMismatch { .. })
        ));
        let x = WeightedDataset::uniform(vec![0.0, 1.0], 1).unwrap();
        assert!(total_cost(&x, &q, &CostModel::SquaredEuclidean).is_err());
    }

    #[test]
    fn total_cost_examples() {
        let n = 1000;
        let mut pts = vec![0.0; n];
        pts[n - 1] = 1.0;
        let x = WeightedDataset::uniform(pts, 1).unwrap();
        let c = total_cost(&x, &q1(&[0.0]), &CostModel::SquaredEuclidean).unwrap();
        assert_eq!(c, 1.0 / n as f64);

        let x = WeightedDataset::new(vec![0.0, 1.0], vec![0.5, 0.5], 1).unwrap();
        assert_eq!(total_cost(&x, &q1(&[0.0]), &CostModel::SquaredEuclidean).unwrap(), 0.5);

        let x = WeightedDataset::uniform(vec![0.3, -2.0, 7.5], 1).unwrap();
        let cover = q1(&[7.5, 0.3, -2.0]);
        assert_eq!(total_cost(&x, &cover, &CostModel::SquaredEuclidean).unwrap(), 0.0);
    }

    #[test]
    fn rejects_invalid_datasets() {
        assert_eq!(WeightedDataset::new(vec![], vec![], 1), Err(CoresetError::EmptyDataset));
        assert_eq!(WeightedDataset::new(vec![1.0], vec![0.0], 1), Err(CoresetError::ZeroTotalWeight));
        assert!(matches!(
            WeightedDataset::new(vec![1.0], vec![-1.0], 1),
            Err(CoresetError::InvalidWeight { .. })
        ));
        assert_eq!(WeightedDataset::new(vec![1.0], vec![1.0], 0), Err(CoresetError::ZeroDimension));
        assert!(Query::new(vec![], 2).is_err());
    }

    #[test]
    fn whiten_identity_and_scaled() {
        let x = WeightedDataset::uniform(vec![1.0, 2.0, -3.0, 0.5], 2).unwrap();
        assert_eq!(whiten(&x, &SpdMatrix::identity(2)).unwrap(), x);

        let a = SpdMatrix::new(vec![4.0], 1).unwrap();
        let w = whiten(&WeightedDataset::uniform(vec![1.0], 1).unwrap(), &a).unwrap();
        assert_eq!(w.point(0), &[2.0]);
        assert_eq!(CostModel::Mahalanobis(a).distance(&[1.0], &[0.0]), 4.0);
    }

    #[test]
    fn whiten_rejects_non_spd() {
        assert_eq!(SpdMatrix::new(vec![1.0, 2.0, 2.0, 1.0], 2), Err(CoresetError::NotPositiveDefinite));
        assert_eq!(SpdMatrix::new(vec![1.0, 0.5, 0.0, 1.0], 2), Err(CoresetError::NotPositiveDefinite));
        assert_eq!(SpdMatrix::new(vec![0.0], 1), Err(CoresetError::NotPositiveDefinite));
    }

    fn random_spd(rng: &mut impl Rng, d: usize) -> SpdMatrix {
        let m: Vec<f64> = (0..d * d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut a = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                a[i * d + j] = (0..d).map(|p| m[p * d + i] * m[p * d + j]).sum::<f64>();
            }
            a[i * d + i] += 0.1;
        }
        SpdMatrix::new(a, d).unwrap()
    }

    #[test]
    fn whitened_distance_matches_mahalanobis() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for d in 1..=6 {
            let a = random_spd(&mut rng, d);
            for _ in 0..10 {
                let p: Vec<f64> = (0..d).map(|_| rng.random_range(-5.0..5.0)).collect();
                let q: Vec<f64> = (0..d).map(|_| rng.random_range(-5.0..5.0)).collect();
                let direct = CostModel::Mahalanobis(a.clone()).distance(&p, &q);
                let (mut lp, mut lq) = (vec![0.0; d], vec![0.0; d]);
                a.transform(&p, &mut lp);
                a.transform(&q, &mut lq);
                let white = sq_dist(&lp, &lq);
                assert!((direct - white).abs() <= 1e-9 * direct.abs().max(1e-300), "{direct} vs {white}");
            }
        }
    }

    #[test]
    fn mahalanobis_total_cost_equals_whitened_cost() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let d = 3;
        let a = random_spd(&mut rng, d);
        let pts: Vec<f64> = (0..300 * d).map(|_| rng.random_range(-3.0..3.0)).collect();
        let x = WeightedDataset::uniform(pts, d).unwrap();
        let q = Query::new((0..4 * d).map(|_| rng.random_range(-3.0..3.0)).collect(), d).unwrap();
        let direct = total_cost(&x, &q, &CostModel::Mahalanobis(a.clone())).unwrap();
        let white = total_cost(&whiten(&x, &a).unwrap(), &whiten_query(&q, &a).unwrap(), &CostModel::SquaredEuclidean)
            .unwrap();
        assert!((direct - white).abs() <= 1e-9 * direct);
    }

    #[test]
    fn parallel_path_matches_sequential_fold() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 3 * PAR_THRESHOLD;
        let pts: Vec<f64> = (0..n * 2).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x = WeightedDataset::uniform(pts, 2).unwrap();
        let q = Query::new(vec![0.1, 0.2, -0.5, 0.3], 2).unwrap();
        let seq = x
            .rows()
            .zip(x.weights())
            .fold(0.0, |acc, (p, w)| acc + w * nearest_sq(p, &q).0);
        assert_eq!(total_cost(&x, &q, &CostModel::SquaredEuclidean).unwrap().to_bits(), seq.to_bits());
    }

    #[test]
    fn distinct_helpers() {
        let x = WeightedDataset::uniform(vec![1.0, 0.0, 1.0, 2.0, 0.0], 1).unwrap();
        assert_eq!(x.distinct_count(), 3);
        assert_eq!(x.distinct_indices(), vec![0, 1, 3]);
    }

    fn dataset_strategy() -> impl Strategy<Value = (WeightedDataset, Query)> {
        (1usize..4, 1usize..40, 1usize..5).prop_flat_map(|(d, n, k)| {
            (
                prop::collection::vec(-100.0f64..100.0, n * d),
                prop::collection::vec(0.01f64..10.0, n),
                prop::collection::vec(-100.0f64..100.0, k * d),
            )
                .prop_map(move |(p, w, c)| {
                    (WeightedDataset::new(p, w, d).unwrap(), Query::new(c, d).unwrap())
                })
        })
    }

    proptest! {
        #[test]
        fn cost_is_nonnegative_additive_and_homogeneous((x, q) in dataset_strategy(), split in 0usize..40, c in 0.1f64..10.0) {
            let sq = CostModel::SquaredEuclidean;
            let total = total_cost(&x, &q, &sq).unwrap();
            prop_assert!(total >= 0.0);
            let cut = split.min(x.len());
            if cut > 0 && cut < x.len() {
                let left = x.select(&(0..cut).collect::<Vec<_>>()).unwrap();
                let right = x.select(&(cut..x.len()).collect::<Vec<_>>()).unwrap();
                let sum = total_cost(&left, &q, &sq).unwrap() + total_cost(&right, &q, &sq).unwrap();
                prop_assert!((sum - total).abs() <= 1e-12 * total.max(1.0));
            }
            let scaled = total_cost(&x.scale_weights(c).unwrap(), &q, &sq).unwrap();
            prop_assert!((scaled - c * total).abs() <= 1e-12 * (c * total).max(1e-300));
        }
    }
}
