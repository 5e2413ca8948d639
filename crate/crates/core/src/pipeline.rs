//! Streaming merge-reduce coresets and simulated distributed construction.
//!
//! Both rely on two composition rules. The union of coresets of disjoint
//! sets is a coreset of the union with the same error (merge), and a coreset
//! of a coreset compounds errors as `(1 + ε)(1 + ε') - 1` (compress).

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::builder::{build_kmeans_coreset, BuildConfig, Coreset, Distribution, Provenance};
use crate::error::{CoresetError, Result};
use crate::io::binary_size;
use crate::model::WeightedDataset;
use crate::rng::{derive_seed, tag};

/// Seed of the `index`-th leaf block of a stream.
pub fn leaf_seed(seed: u64, index: u64) -> u64 {
    derive_seed(seed, tag::LEAF, index)
}

/// Seed of the `index`-th compression of a stream.
pub fn compress_seed(seed: u64, index: u64) -> u64 {
    derive_seed(seed, tag::COMPRESS, index)
}

/// Seed of worker `index` in a distributed build.
pub fn worker_seed(seed: u64, index: u64) -> u64 {
    derive_seed(seed, tag::WORKER, index)
}

/// Union of coresets as a single coreset; provenance is taken from the first
/// part with `m` summed.
pub fn merge_coresets(parts: &[&Coreset]) -> Result<Coreset> {
    let first = parts.first().ok_or(CoresetError::EmptyDataset)?;
    let data = WeightedDataset::union(&parts.iter().map(|c| &c.data).collect::<Vec<_>>())?;
    let source_indices = parts.iter().flat_map(|c| c.source_indices.iter().copied()).collect();
    Ok(Coreset {
        data,
        source_indices,
        provenance: Provenance {
            m: parts.iter().map(|c| c.provenance.m).sum(),
            source_n: parts.iter().map(|c| c.provenance.source_n).sum(),
            ..first.provenance.clone()
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamConfig {
    pub leaf_block_size: usize,
    /// Target error of every construction in the tree.
    pub level_epsilon: f64,
    /// Builder settings; `epsilon` is overridden by `level_epsilon` and the
    /// seed by the per-block derivation.
    pub build: BuildConfig,
}

impl StreamConfig {
    fn build_config(&self, seed: u64) -> BuildConfig {
        let mut cfg = self.build.clone();
        cfg.epsilon = self.level_epsilon;
        cfg.seed = seed;
        cfg.sensitivity.generalized_weights = true;
        cfg
    }
}

/// Binary-counter tree holding at most one coreset per level.
#[derive(Debug, Clone)]
pub struct MergeReduceTree {
    config: StreamConfig,
    dim: Option<usize>,
    buffer: Vec<f64>,
    buffer_weights: Vec<f64>,
    levels: Vec<Option<Coreset>>,
    points_seen: usize,
    blocks_built: usize,
    compressions: usize,
}

/// Result of [`MergeReduceTree::finalize`].
#[derive(Debug, Clone, PartialEq)]
pub struct StreamSummary {
    pub coreset: Coreset,
    pub points_seen: usize,
    pub blocks: usize,
    pub compressions: usize,
    /// Highest level merged into the output (compressions on the deepest
    /// path).
    pub max_level: usize,
    /// Levels that held a coreset at finalize time.
    pub occupied_levels: Vec<usize>,
    /// Accumulated error budget `(1 + ε')^max_level - 1`, times `(1 + ε_f)`
    /// when a final compression ran.
    pub budget: f64,
}

impl MergeReduceTree {
    pub fn new(config: StreamConfig) -> Result<Self> {
        if config.leaf_block_size == 0 {
            return Err(CoresetError::InvalidParameter("leaf block size must be >= 1".into()));
        }
        if !(config.level_epsilon > 0.0 && config.level_epsilon < 1.0) {
            return Err(CoresetError::InvalidParameter("level epsilon must lie in (0, 1)".into()));
        }
        Ok(Self {
            config,
            dim: None,
            buffer: Vec::new(),
            buffer_weights: Vec::new(),
            levels: Vec::new(),
            points_seen: 0,
            blocks_built: 0,
            compressions: 0,
        })
    }

    pub fn points_seen(&self) -> usize {
        self.points_seen
    }

    pub fn blocks_built(&self) -> usize {
        self.blocks_built
    }

    pub fn compressions(&self) -> usize {
        self.compressions
    }

    /// Levels currently holding a coreset, ascending.
    pub fn occupied_levels(&self) -> Vec<usize> {
        self.levels.iter().enumerate().filter(|(_, c)| c.is_some()).map(|(l, _)| l).collect()
    }

    pub fn level(&self, level: usize) -> Option<&Coreset> {
        self.levels.get(level).and_then(Option::as_ref)
    }

    /// Appends one point. A full buffer becomes a level-0 coreset, and equal
    /// levels are merged and compressed upward until every level holds at
    /// most one coreset.
    pub fn insert(&mut self, point: &[f64], weight: f64) -> Result<()> {
        match self.dim {
            None if point.is_empty() => return Err(CoresetError::ZeroDimension),
            None => self.dim = Some(point.len()),
            Some(d) if d != point.len() => {
                return Err(CoresetError::DimensionMismatch { expected: d, got: point.len() })
            }
            _ => {}
        }
        if !weight.is_finite() || weight < 0.0 {
            return Err(CoresetError::InvalidWeight { index: self.points_seen, value: weight });
        }
        self.buffer.extend_from_slice(point);
        self.buffer_weights.push(weight);
        self.points_seen += 1;
        if self.buffer_weights.len() == self.config.leaf_block_size {
            let leaf = self.build_leaf()?;
            self.carry(leaf, 0)?;
        }
        Ok(())
    }

    fn build_leaf(&mut self) -> Result<Coreset> {
        let dim = self.dim.expect("buffer is nonempty");
        let offset = self.points_seen - self.buffer_weights.len();
        let block = WeightedDataset::new(std::mem::take(&mut self.buffer), std::mem::take(&mut self.buffer_weights), dim)?;
        let seed = leaf_seed(self.config.build.seed, self.blocks_built as u64);
        self.blocks_built += 1;
        let mut coreset = build_kmeans_coreset(&block, &self.config.build_config(seed))?;
        coreset.source_indices.iter_mut().for_each(|i| *i += offset);
        Ok(coreset)
    }

    fn compress(&mut self, union: &Coreset) -> Result<Coreset> {
        let seed = compress_seed(self.config.build.seed, self.compressions as u64);
        self.compressions += 1;
        let mut compressed = build_kmeans_coreset(&union.data, &self.config.build_config(seed))?;
        compressed.source_indices = compressed.source_indices.iter().map(|&i| union.source_indices[i]).collect();
        compressed.provenance.source_n = union.provenance.source_n;
        Ok(compressed)
    }

    fn carry(&mut self, mut coreset: Coreset, mut level: usize) -> Result<()> {
        loop {
            if self.levels.len() <= level {
                self.levels.resize(level + 1, None);
            }
            match self.levels[level].take() {
                None => {
                    self.levels[level] = Some(coreset);
                    return Ok(());
                }
                Some(existing) => {
                    let union = merge_coresets(&[&existing, &coreset])?;
                    coreset = self.compress(&union)?;
                    level += 1;
                }
            }
        }
    }

    /// Builds a leaf from any partial buffer and merges every occupied level
    /// (no compression). With `final_epsilon`, the merged union is compressed
    /// once more at that error.
    pub fn finalize(mut self, final_epsilon: Option<f64>) -> Result<StreamSummary> {
        if self.points_seen == 0 {
            return Err(CoresetError::EmptyStream);
        }
        let mut parts: Vec<(usize, Coreset)> = Vec::new();
        if !self.buffer_weights.is_empty() {
            parts.push((0, self.build_leaf()?));
        }
        let occupied_levels = self.occupied_levels();
        for (level, slot) in self.levels.iter_mut().enumerate() {
            if let Some(c) = slot.take() {
                parts.push((level, c));
            }
        }
        let max_level = parts.iter().map(|(l, _)| *l).max().unwrap_or(0);
        let mut budget = (1.0 + self.config.level_epsilon).powi(max_level as i32) - 1.0;
        let mut coreset = if parts.len() == 1 {
            parts.pop().expect("one part").1
        } else {
            merge_coresets(&parts.iter().map(|(_, c)| c).collect::<Vec<_>>())?
        };
        if let Some(eps) = final_epsilon {
            let mut cfg = self.config.build_config(derive_seed(self.config.build.seed, tag::FINALIZE, 0));
            cfg.epsilon = eps;
            let mut compressed = build_kmeans_coreset(&coreset.data, &cfg)?;
            compressed.source_indices = compressed.source_indices.iter().map(|&i| coreset.source_indices[i]).collect();
            compressed.provenance.source_n = coreset.provenance.source_n;
            coreset = compressed;
            budget = (1.0 + budget) * (1.0 + eps) - 1.0;
        }
        Ok(StreamSummary {
            coreset,
            points_seen: self.points_seen,
            blocks: self.blocks_built,
            compressions: self.compressions,
            max_level,
            occupied_levels,
            budget,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartitionRule {
    #[serde(rename = "rr")]
    RoundRobin,
    #[serde(rename = "contig")]
    Contiguous,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributedPlan {
    pub workers: usize,
    pub rule: PartitionRule,
    pub seed: u64,
}

impl DistributedPlan {
    /// Row indices per worker; a disjoint cover of `0..n`.
    pub fn partition(&self, n: usize) -> Vec<Vec<usize>> {
        let w = self.workers.max(1);
        match self.rule {
            PartitionRule::RoundRobin => (0..w).map(|j| (j..n).step_by(w).collect()).collect(),
            PartitionRule::Contiguous => {
                let base = n / w;
                let extra = n % w;
                let mut start = 0;
                (0..w)
                    .map(|j| {
                        let len = base + usize::from(j < extra);
                        let part = (start..start + len).collect();
                        start += len;
                        part
                    })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkerOutput {
    pub worker: usize,
    pub seed: u64,
    pub points: usize,
    /// `None` when the worker received no points.
    pub coreset: Option<Coreset>,
    /// Size of the worker's coreset in the binary format.
    pub bytes_sent: usize,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributedResult {
    pub coreset: Coreset,
    pub workers: Vec<WorkerOutput>,
    pub empty_workers: Vec<usize>,
}

impl DistributedResult {
    pub fn bytes_per_worker(&self) -> Vec<usize> {
        self.workers.iter().map(|w| w.bytes_sent).collect()
    }
}

/// Every worker builds a coreset of its share with its own derived seed, and
/// the coordinator takes the union in worker order.
pub fn distributed_build(data: &WeightedDataset, plan: &DistributedPlan, build: &BuildConfig) -> Result<DistributedResult> {
    if plan.workers == 0 {
        return Err(CoresetError::InvalidParameter("workers must be >= 1".into()));
    }
    let shares = plan.partition(data.len());
    let workers: Vec<WorkerOutput> = shares
        .par_iter()
        .enumerate()
        .map(|(j, rows)| {
            let start = Instant::now();
            let seed = worker_seed(plan.seed, j as u64);
            if rows.is_empty() {
                return Ok(WorkerOutput { worker: j, seed, points: 0, coreset: None, bytes_sent: 0, elapsed: start.elapsed() });
            }
            let local = data.select(rows)?;
            let mut coreset = build_kmeans_coreset(&local, &BuildConfig { seed, ..build.clone() })?;
            coreset.source_indices = coreset.source_indices.iter().map(|&i| rows[i]).collect();
            let bytes_sent = binary_size(coreset.len(), data.dim(), true);
            Ok(WorkerOutput { worker: j, seed, points: rows.len(), coreset: Some(coreset), bytes_sent, elapsed: start.elapsed() })
        })
        .collect::<Result<_>>()?;
    let parts: Vec<&Coreset> = workers.iter().filter_map(|w| w.coreset.as_ref()).collect();
    let mut coreset = merge_coresets(&parts)?;
    coreset.provenance.seed = Some(plan.seed);
    coreset.provenance.distribution = Distribution::Sensitivity;
    let empty_workers = workers.iter().filter(|w| w.coreset.is_none()).map(|w| w.worker).collect();
    Ok(DistributedResult { coreset, workers, empty_workers })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{generate, DatasetKind};
    use crate::io::encode_binary;

    fn stream_config(block: usize, m: usize, seed: u64) -> StreamConfig {
        StreamConfig { leaf_block_size: block, level_epsilon: 0.1, build: BuildConfig::new(3, 0.1, 0.1, seed).with_m(m) }
    }

    fn feed(tree: &mut MergeReduceTree, data: &WeightedDataset) {
        for (x, &w) in data.rows().zip(data.weights()) {
            tree.insert(x, w).unwrap();
        }
    }

    #[test]
    fn binary_counter_law() {
        let data = generate(&DatasetKind::UniformBox { n: 13 * 20, d: 2 }, 1).unwrap();
        let mut tree = MergeReduceTree::new(stream_config(20, 15, 4)).unwrap();
        for (i, (x, &w)) in data.rows().zip(data.weights()).enumerate() {
            tree.insert(x, w).unwrap();
            if (i + 1) % 20 == 0 {
                let blocks = (i + 1) / 20;
                let expected: Vec<usize> = (0..usize::BITS as usize).filter(|b| blocks >> b & 1 == 1).collect();
                assert_eq!(tree.occupied_levels(), expected);
                let bound = ((tree.points_seen() as f64 / 20.0).log2().ceil() as usize) + 1;
                assert!(tree.occupied_levels().len() <= bound);
            }
        }
        assert_eq!(tree.compressions(), 13 - 13usize.count_ones() as usize);
    }

    #[test]
    fn single_partial_block_equals_batch_build() {
        let data = generate(&DatasetKind::UniformBox { n: 37, d: 2 }, 2).unwrap();
        let cfg = stream_config(50, 12, 9);
        let mut tree = MergeReduceTree::new(cfg.clone()).unwrap();
        feed(&mut tree, &data);
        let out = tree.finalize(None).unwrap();
        let batch = build_kmeans_coreset(&data, &cfg.build_config(leaf_seed(9, 0))).unwrap();
        assert_eq!(out.coreset, batch);
        assert_eq!(encode_binary(&out.coreset.data), encode_binary(&batch.data));
    }

    #[test]
    fn exactly_one_full_block_returns_level_zero_unchanged() {
        let data = generate(&DatasetKind::UniformBox { n: 40, d: 2 }, 3).unwrap();
        let cfg = stream_config(40, 12, 9);
        let mut tree = MergeReduceTree::new(cfg.clone()).unwrap();
        feed(&mut tree, &data);
        let stored = tree.level(0).cloned().unwrap();
        let out = tree.finalize(None).unwrap();
        assert_eq!(out.coreset, stored);
        assert_eq!(out.max_level, 0);
        assert_eq!(out.budget, 0.0);
    }

    #[test]
    fn stream_errors() {
        let tree = MergeReduceTree::new(stream_config(10, 5, 0)).unwrap();
        assert_eq!(tree.finalize(None).unwrap_err(), CoresetError::EmptyStream);
        let mut tree = MergeReduceTree::new(stream_config(10, 5, 0)).unwrap();
        tree.insert(&[1.0, 2.0], 1.0).unwrap();
        assert!(matches!(tree.insert(&[1.0], 1.0), Err(CoresetError::DimensionMismatch { .. })));
        assert!(MergeReduceTree::new(stream_config(0, 5, 0)).is_err());
    }

    #[test]
    fn streaming_is_deterministic_and_tracks_sources() {
        let data = generate(&DatasetKind::UniformBox { n: 170, d: 2 }, 5).unwrap();
        let run = || {
            let mut tree = MergeReduceTree::new(stream_config(30, 20, 11)).unwrap();
            feed(&mut tree, &data);
            tree.finalize(Some(0.2)).unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a, b);
        for (row, &src) in a.coreset.data.rows().zip(&a.coreset.source_indices) {
            assert_eq!(row, data.point(src));
        }
        assert_eq!(a.max_level, 2);
        assert!((a.budget - (1.1f64.powi(2) * 1.2 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn partitions_are_disjoint_covers() {
        for rule in [PartitionRule::RoundRobin, PartitionRule::Contiguous] {
            for workers in 1..7 {
                let plan = DistributedPlan { workers, rule, seed: 0 };
                let mut all: Vec<usize> = plan.partition(23).concat();
                all.sort_unstable();
                assert_eq!(all, (0..23).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn one_worker_equals_batch_build() {
        let data = generate(&DatasetKind::UniformBox { n: 300, d: 2 }, 6).unwrap();
        let build = BuildConfig::new(3, 0.1, 0.1, 0).with_m(50);
        let plan = DistributedPlan { workers: 1, rule: PartitionRule::Contiguous, seed: 21 };
        let out = distributed_build(&data, &plan, &build).unwrap();
        let batch = build_kmeans_coreset(&data, &BuildConfig { seed: worker_seed(21, 0), ..build }).unwrap();
        assert_eq!(out.coreset.data, batch.data);
        assert_eq!(out.coreset.source_indices, batch.source_indices);
    }

    #[test]
    fn more_workers_than_points_flags_empty_shares() {
        let data = generate(&DatasetKind::UniformBox { n: 3, d: 1 }, 6).unwrap();
        let build = BuildConfig::new(1, 0.1, 0.1, 0).with_m(4);
        let plan = DistributedPlan { workers: 5, rule: PartitionRule::RoundRobin, seed: 2 };
        let out = distributed_build(&data, &plan, &build).unwrap();
        assert_eq!(out.empty_workers, vec![3, 4]);
        assert_eq!(out.bytes_per_worker()[3], 0);
    }

    #[test]
    fn bytes_follow_binary_layout() {
        let data = generate(&DatasetKind::UniformBox { n: 400, d: 3 }, 7).unwrap();
        let build = BuildConfig::new(2, 0.1, 0.1, 0).with_m(30);
        let plan = DistributedPlan { workers: 3, rule: PartitionRule::RoundRobin, seed: 8 };
        let out = distributed_build(&data, &plan, &build).unwrap();
        for w in &out.workers {
            let c = w.coreset.as_ref().unwrap();
            assert_eq!(w.bytes_sent, 8 * c.len() * (3 + 1) + 21);
            assert_eq!(w.bytes_sent, encode_binary(&c.data).len());
        }
    }
}
