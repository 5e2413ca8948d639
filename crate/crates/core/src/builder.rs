//! Importance sampling and the end-to-end k-means coreset construction.

use serde::{Deserialize, Serialize};

use crate::error::{CoresetError, Result};
use crate::model::{compensated_sum, WeightedDataset};
use crate::rng::{derive_seed, rng_from_seed, tag};
use crate::sampling::CumulativeTable;
use crate::seeding::{bicriteria, d2_alpha, BicriteriaConfig};
use crate::sensitivity::{sensitivity_bound, SensitivityOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    Sensitivity,
    Uniform,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// Number of draws.
    pub m: usize,
    pub seed: Option<u64>,
    pub epsilon_target: Option<f64>,
    pub delta: Option<f64>,
    pub k: Option<usize>,
    pub source_n: usize,
    pub distribution: Distribution,
    pub merged_duplicates: bool,
    /// `S` of the sensitivity profile, when sampling by sensitivity.
    pub total_sensitivity: Option<f64>,
    pub alpha: Option<f64>,
    pub bicriteria_cost: Option<f64>,
}

/// A weighted sample standing in for a larger weighted set.
#[derive(Debug, Clone, PartialEq)]
pub struct Coreset {
    pub data: WeightedDataset,
    /// Row index in the source set of every coreset point.
    pub source_indices: Vec<usize>,
    pub provenance: Provenance,
}

impl Coreset {
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn contains_source(&self, index: usize) -> bool {
        self.source_indices.contains(&index)
    }
}

/// Draws `m` points with replacement from `q` and weights every draw by
/// `μ(x) / (m q(x))`. With `merge_duplicates`, repeated draws of one source
/// point collapse into a single row carrying the summed weight, ordered by
/// source index; otherwise rows appear in draw order.
pub fn importance_sample<R: rand::Rng + ?Sized>(
    data: &WeightedDataset,
    q: &[f64],
    m: usize,
    merge_duplicates: bool,
    rng: &mut R,
) -> Result<Coreset> {
    if m == 0 {
        return Err(CoresetError::ZeroSampleSize);
    }
    if q.len() != data.len() {
        return Err(CoresetError::DimensionMismatch { expected: data.len(), got: q.len() });
    }
    if let Some(index) = q.iter().position(|p| !p.is_finite() || *p < 0.0) {
        return Err(CoresetError::InvalidParameter(format!("invalid probability at index {index}")));
    }
    let sum = compensated_sum(q.iter().copied());
    if (sum - 1.0).abs() > 1e-12 {
        return Err(CoresetError::UnnormalizedProbabilities { sum });
    }
    if let Some(index) = (0..data.len()).find(|&i| data.weight(i) > 0.0 && q[i] == 0.0) {
        return Err(CoresetError::ZeroProbability { index });
    }

    let table = CumulativeTable::new(q.iter().copied());
    let unit = |i: usize| data.weight(i) / (m as f64 * q[i]);
    let (indices, weights) = if merge_duplicates {
        let mut counts = vec![0u32; data.len()];
        for _ in 0..m {
            counts[table.draw(rng)] += 1;
        }
        counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (i, c as f64 * unit(i)))
            .unzip::<_, _, Vec<usize>, Vec<f64>>()
    } else {
        (0..m).map(|_| table.draw(rng)).map(|i| (i, unit(i))).unzip()
    };
    let points = data.select(&indices)?;
    Ok(Coreset {
        data: points.with_weights(weights)?,
        source_indices: indices,
        provenance: Provenance {
            m,
            seed: None,
            epsilon_target: None,
            delta: None,
            k: None,
            source_n: data.len(),
            distribution: Distribution::Custom,
            merged_duplicates: merge_duplicates,
            total_sensitivity: None,
            alpha: None,
            bicriteria_cost: None,
        },
    })
}

/// Inputs to the sample-size calculator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSizeSpec {
    pub d: usize,
    pub k: usize,
    pub epsilon: f64,
    pub delta: f64,
    /// Leading constant hidden in the asymptotic bound.
    pub c_size: f64,
    /// Pseudo-dimension to use with the generic `S²(d' + ln 1/δ)/ε²` shape.
    pub pdim_override: Option<usize>,
}

impl SampleSizeSpec {
    pub fn new(d: usize, k: usize, epsilon: f64, delta: f64) -> Self {
        Self { d, k, epsilon, delta, c_size: 1.0, pdim_override: None }
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(CoresetError::InvalidParameter(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(CoresetError::InvalidParameter(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if self.k == 0 {
            return Err(CoresetError::InvalidK);
        }
        if self.d == 0 {
            return Err(CoresetError::ZeroDimension);
        }
        if !(self.c_size > 0.0) {
            return Err(CoresetError::InvalidParameter("c_size must be positive".into()));
        }
        Ok(())
    }
}

/// Sample size `ceil(c (d k³ log₂ k + k² ln 1/δ) / ε²)` (with `log₂` taken at
/// `max(k, 2)`), or `ceil(c S² (d' + ln 1/δ) / ε²)` with `S = 6α + 4k` when a
/// pseudo-dimension `d'` is supplied.
pub fn recommended_m(spec: &SampleSizeSpec) -> Result<usize> {
    spec.validate()?;
    let k = spec.k as f64;
    let log_delta = (1.0 / spec.delta).ln();
    let raw = match spec.pdim_override {
        None => spec.c_size * (spec.d as f64 * k.powi(3) * k.max(2.0).log2() + k * k * log_delta) / spec.epsilon.powi(2),
        Some(pdim) => {
            let s = 6.0 * d2_alpha(spec.k) + 4.0 * k;
            spec.c_size * s * s * (pdim as f64 + log_delta) / spec.epsilon.powi(2)
        }
    };
    Ok(raw.ceil().max(1.0) as usize)
}

/// Settings of the end-to-end construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildConfig {
    pub k: usize,
    pub epsilon: f64,
    pub delta: f64,
    /// Number of draws; the calculator's value at `δ/2` when unset.
    pub m: Option<usize>,
    pub c_size: f64,
    pub bicriteria: BicriteriaConfig,
    pub sensitivity: SensitivityOptions,
    pub merge_duplicates: bool,
    pub seed: u64,
}

impl BuildConfig {
    pub fn new(k: usize, epsilon: f64, delta: f64, seed: u64) -> Self {
        Self {
            k,
            epsilon,
            delta,
            m: None,
            c_size: 1.0,
            bicriteria: BicriteriaConfig::default(),
            sensitivity: SensitivityOptions::default(),
            merge_duplicates: true,
            seed,
        }
    }

    pub fn with_m(mut self, m: usize) -> Self {
        self.m = Some(m);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn sample_size(&self, dim: usize) -> Result<usize> {
        match self.m {
            Some(0) => Err(CoresetError::ZeroSampleSize),
            Some(m) => Ok(m),
            None => recommended_m(&SampleSizeSpec {
                c_size: self.c_size,
                ..SampleSizeSpec::new(dim, self.k, self.epsilon, self.delta / 2.0)
            }),
        }
    }
}

/// Bicriteria seeding at `δ/2`, sensitivity bound, then importance sampling
/// with `q(x) = s(x) / Σ s` (or `μ s / Σ μ s` for non-uniform weights).
pub fn build_kmeans_coreset(data: &WeightedDataset, config: &BuildConfig) -> Result<Coreset> {
    if !(config.epsilon > 0.0 && config.epsilon < 1.0) {
        return Err(CoresetError::InvalidParameter(format!("epsilon must lie in (0, 1), got {}", config.epsilon)));
    }
    let m = config.sample_size(data.dim())?;
    let b = bicriteria(data, config.k, config.delta / 2.0, &config.bicriteria, config.seed)?;
    let profile = sensitivity_bound(data, &b, &config.sensitivity)?;
    let q = profile.sampling_distribution(data);
    let mut rng = rng_from_seed(derive_seed(config.seed, tag::SAMPLE, 0));
    let mut coreset = importance_sample(data, &q, m, config.merge_duplicates, &mut rng)?;
    coreset.provenance = Provenance {
        seed: Some(config.seed),
        epsilon_target: Some(config.epsilon),
        delta: Some(config.delta),
        k: Some(config.k),
        distribution: Distribution::Sensitivity,
        total_sensitivity: Some(profile.total),
        alpha: Some(b.alpha),
        bicriteria_cost: Some(b.seed_cost),
        ..coreset.provenance
    };
    Ok(coreset)
}

/// Baseline: `m` draws proportional to the weights.
pub fn uniform_baseline(data: &WeightedDataset, m: usize, merge_duplicates: bool, seed: u64) -> Result<Coreset> {
    let total = data.total_weight();
    let q: Vec<f64> = data.weights().iter().map(|w| w / total).collect();
    let mut rng = rng_from_seed(derive_seed(seed, tag::SAMPLE, 0));
    let mut coreset = importance_sample(data, &q, m, merge_duplicates, &mut rng)?;
    coreset.provenance.seed = Some(seed);
    coreset.provenance.distribution = Distribution::Uniform;
    Ok(coreset)
}
