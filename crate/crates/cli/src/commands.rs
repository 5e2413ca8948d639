use std::io::Read;
use std::path::Path;
use std::time::Instant;

use coreset_core::harness::{compare_samplers, SuiteConfig};
use coreset_core::io::{read_binary, CsvRows, MAGIC};
use coreset_core::seeding::{bicriteria, BicriteriaConfig};
use coreset_core::sensitivity::{BoundConstants, SensitivityOptions};
use coreset_core::solver::{SolveMethod, ViaCoresetConfig};
use coreset_core::{
    build_kmeans_coreset, coreset_error, default_suite, distributed_build, generate, sensitivity_bound,
    solve_via_coreset, uniform_baseline, BuildConfig, Coreset, DatasetKind, DistributedPlan, LloydConfig,
    MergeReduceTree, PartitionRule, Query, QuerySuite, StreamConfig, WeightedDataset,
};
use coreset_core::{io::format_f64, Distribution};
use serde_json::{json, Value};

use crate::args::*;
use crate::report::{emit_dataset, emit_report, open_input, read_dataset, Report};
use crate::CliError;

pub fn run(global: &GlobalArgs, command: &Command) -> Result<i32, CliError> {
    match command {
        Command::Gen(a) => gen(global, a),
        Command::Build(a) => build(global, a),
        Command::Sensitivity(a) => sensitivity(global, a),
        Command::Solve(a) => solve(global, a),
        Command::Check(a) => check(global, a),
        Command::Stream(a) => stream(global, a),
        Command::Distribute(a) => distribute(global, a),
        Command::Bench(a) => bench(global, a),
    }
}

fn dataset_kind(kind: Kind, n: usize, d: usize, clusters: usize, separation: f64, sigma: f64) -> DatasetKind {
    match kind {
        Kind::Adversarial => DatasetKind::Adversarial { n },
        Kind::Gmm => DatasetKind::GaussianMixture { n, d, k: clusters, separation, sigma },
        Kind::Uniform => DatasetKind::UniformBox { n, d },
    }
}

fn build_config(a: &BuildArgs, seed: u64) -> BuildConfig {
    BuildConfig {
        m: a.m,
        c_size: a.c_size,
        bicriteria: BicriteriaConfig { runs: a.bicriteria_runs, ..BicriteriaConfig::default() },
        sensitivity: SensitivityOptions {
            constants: if a.alg2_constants { BoundConstants::Halved } else { BoundConstants::Standard },
            generalized_weights: a.generalized_weights,
        },
        merge_duplicates: !a.no_merge,
        ..BuildConfig::new(a.k, a.epsilon, a.delta, seed)
    }
}

fn build_json(a: &BuildArgs) -> Value {
    json!({
        "k": a.k,
        "epsilon": a.epsilon,
        "delta": a.delta,
        "m": a.m,
        "c_size": a.c_size,
        "distribution": format!("{:?}", a.distribution).to_lowercase(),
        "bicriteria_runs": a.bicriteria_runs,
        "alg2_constants": a.alg2_constants,
        "generalized_weights": a.generalized_weights,
        "merge_duplicates": !a.no_merge,
    })
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn make_coreset(data: &WeightedDataset, a: &BuildArgs, seed: u64) -> Result<Coreset, CliError> {
    let cfg = build_config(a, seed);
    Ok(match a.distribution {
        DistributionArg::Sensitivity => build_kmeans_coreset(data, &cfg)?,
        DistributionArg::Uniform => uniform_baseline(data, cfg.sample_size(data.dim())?, cfg.merge_duplicates, seed)?,
    })
}

fn coreset_summary(report: &mut Report, coreset: &Coreset) -> Result<(), CliError> {
    report.set("size", coreset.len());
    report.set("total_weight", coreset.data.total_weight());
    report.set_json("provenance", &coreset.provenance)
}

fn gen(global: &GlobalArgs, a: &GenArgs) -> Result<i32, CliError> {
    let kind = dataset_kind(a.kind, a.n, a.d, a.clusters, a.separation, a.sigma);
    let data = generate(&kind, global.seed)?;
    emit_dataset(global, &data, None, false)?;
    let mut report = Report::new("gen", global.seed, serde_json::to_value(&kind)?);
    report.set("n", data.len());
    report.set("dim", data.dim());
    emit_report(global, &report, global.out.is_none())?;
    Ok(0)
}

fn build(global: &GlobalArgs, a: &BuildCmd) -> Result<i32, CliError> {
    let start = Instant::now();
    let data = read_dataset(&a.input)?;
    let coreset = make_coreset(&data, &a.build, global.seed)?;
    emit_dataset(global, &coreset.data, Some(&coreset.source_indices), true)?;
    let mut config = build_json(&a.build);
    config["input"] = json!(path_str(&a.input));
    let mut report = Report::new("build", global.seed, config);
    report.set("source_n", data.len());
    coreset_summary(&mut report, &coreset)?;
    report.time("total_seconds", start.elapsed().as_secs_f64());
    emit_report(global, &report, global.out.is_none())?;
    Ok(0)
}

fn sensitivity(global: &GlobalArgs, a: &SensitivityCmd) -> Result<i32, CliError> {
    let data = read_dataset(&a.input)?;
    let cfg = BicriteriaConfig { runs: a.bicriteria_runs, ..BicriteriaConfig::default() };
    let opts = SensitivityOptions {
        constants: if a.alg2_constants { BoundConstants::Halved } else { BoundConstants::Standard },
        generalized_weights: a.generalized_weights,
    };
    let b = bicriteria(&data, a.k, a.delta, &cfg, global.seed)?;
    let profile = sensitivity_bound(&data, &b, &opts)?;
    let mut csv = String::from("s\n");
    for v in &profile.s {
        csv.push_str(&format_f64(*v));
        csv.push('\n');
    }
    match &global.out {
        Some(p) => std::fs::write(p, csv).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
        None => print!("{csv}"),
    }
    let config = json!({
        "input": path_str(&a.input),
        "k": a.k,
        "delta": a.delta,
        "bicriteria_runs": a.bicriteria_runs,
        "alg2_constants": a.alg2_constants,
        "generalized_weights": a.generalized_weights,
    });
    let mut report = Report::new("sensitivity", global.seed, config);
    report.set("alpha", profile.alpha);
    report.set("beta", profile.beta);
    report.set("total", profile.total);
    report.set("expected_total", profile.expected_total());
    report.set("cluster_sizes", json!(profile.cluster_sizes));
    report.set("bicriteria_cost", b.seed_cost);
    report.set("bicriteria_runs", b.runs_taken);
    emit_report(global, &report, global.out.is_none())?;
    Ok(0)
}

fn write_centers(global: &GlobalArgs, q: &Query) -> Result<(), CliError> {
    let centers = WeightedDataset::uniform(q.raw_centers().to_vec(), q.dim())?;
    emit_dataset(global, &centers, None, false)
}

fn solve(global: &GlobalArgs, a: &SolveCmd) -> Result<i32, CliError> {
    let start = Instant::now();
    let data = read_dataset(&a.input)?;
    let method = match a.method {
        MethodArg::Lloyd => SolveMethod::Lloyd { restarts: a.restarts },
        MethodArg::Ptas => SolveMethod::Ptas { cap: a.cap },
    };
    let mut config = json!({
        "input": path_str(&a.input),
        "method": method,
        "via_coreset": a.via_coreset,
    });
    let lloyd = LloydConfig::default();
    let mut report;
    let centers;
    if a.via_coreset {
        config["build"] = build_json(&a.build);
        report = Report::new("solve", global.seed, config);
        let cfg = ViaCoresetConfig { build: build_config(&a.build, global.seed), method, reference: method, lloyd };
        let r = solve_via_coreset(&data, a.build.k, &cfg)?;
        report.set("objective_on_full", r.objective_on_full);
        report.set("objective_on_coreset", r.objective_on_coreset);
        report.set("reference_objective", r.reference_solution.objective);
        report.set("ratio", r.ratio);
        report.set("reference_exact", r.reference_exact);
        report.set("iterations", r.coreset_solution.iterations);
        report.set("coreset_size", r.coreset.len());
        report.set_json("centers", &r.coreset_solution.query.to_rows())?;
        centers = r.coreset_solution.query;
    } else {
        config["k"] = json!(a.build.k);
        report = Report::new("solve", global.seed, config);
        let s = method.solve(&data, a.build.k, &lloyd, global.seed)?;
        report.set("objective", s.objective);
        report.set("iterations", s.iterations);
        report.set("converged", s.converged);
        report.set_json("centers", &s.query.to_rows())?;
        centers = s.query;
    }
    if global.out.is_some() {
        write_centers(global, &centers)?;
    }
    report.time("total_seconds", start.elapsed().as_secs_f64());
    emit_report(global, &report, false)?;
    Ok(0)
}

fn load_suite(a: &CheckCmd, full: &WeightedDataset, seed: u64) -> Result<QuerySuite, CliError> {
    if a.suite == "default" {
        let k = a.k.ok_or_else(|| CliError::Usage("--k is required with the default suite".into()))?;
        return Ok(default_suite(full, k, &SuiteConfig::default(), None, seed)?);
    }
    let mut text = String::new();
    open_input(Path::new(&a.suite))?.read_to_string(&mut text)?;
    let queries: Vec<Query> = serde_json::from_str(&text)?;
    Ok(QuerySuite::from_queries(queries)?)
}

fn check(global: &GlobalArgs, a: &CheckCmd) -> Result<i32, CliError> {
    let full = read_dataset(&a.full)?;
    let coreset = read_dataset(&a.coreset)?;
    let suite = load_suite(a, &full, global.seed)?;
    let err = coreset_error(&full, &coreset, &suite)?;
    let config = json!({
        "full": path_str(&a.full),
        "coreset": path_str(&a.coreset),
        "suite": a.suite,
        "k": a.k,
        "epsilon_budget": a.epsilon_budget,
    });
    let mut report = Report::new("check", global.seed, config);
    report.set("queries", suite.len());
    report.set_json("error", &err)?;
    let violated = a.epsilon_budget.is_some_and(|b| err.max_error > b);
    report.set("budget_violated", violated);
    emit_report(global, &report, false)?;
    Ok(if violated { 3 } else { 0 })
}

fn stream(global: &GlobalArgs, a: &StreamCmd) -> Result<i32, CliError> {
    let start = Instant::now();
    let config = StreamConfig {
        leaf_block_size: a.block_size,
        level_epsilon: a.level_epsilon,
        build: build_config(&a.build, global.seed),
    };
    let mut tree = MergeReduceTree::new(config)?;
    let mut input = open_input(&a.input)?;
    let unweighted = if input.fill_buf()?.starts_with(MAGIC) {
        let data = read_binary(input)?;
        for (x, &w) in data.rows().zip(data.weights()) {
            tree.insert(x, w)?;
        }
        false
    } else {
        let rows = CsvRows::new(input)?;
        let unweighted = !rows.has_weight_column();
        for row in rows {
            let row = row?;
            tree.insert(&row.point, row.weight.unwrap_or(1.0))?;
        }
        unweighted
    };
    let mut summary = tree.finalize(a.final_epsilon)?;
    if unweighted {
        // rows without weights carry mass 1/n once n is known
        summary.coreset.data = summary.coreset.data.scale_weights(1.0 / summary.points_seen as f64)?;
    }
    emit_dataset(global, &summary.coreset.data, Some(&summary.coreset.source_indices), true)?;
    let mut cfg = build_json(&a.build);
    cfg["input"] = json!(path_str(&a.input));
    cfg["block_size"] = json!(a.block_size);
    cfg["level_epsilon"] = json!(a.level_epsilon);
    cfg["final_epsilon"] = json!(a.final_epsilon);
    let mut report = Report::new("stream", global.seed, cfg);
    report.set("points_seen", summary.points_seen);
    report.set("blocks", summary.blocks);
    report.set("compressions", summary.compressions);
    report.set("max_level", summary.max_level);
    report.set("occupied_levels", json!(summary.occupied_levels));
    report.set("error_budget", summary.budget);
    report.set("size", summary.coreset.len());
    report.set("total_weight", summary.coreset.data.total_weight());
    report.time("total_seconds", start.elapsed().as_secs_f64());
    emit_report(global, &report, global.out.is_none())?;
    Ok(0)
}

fn distribute(global: &GlobalArgs, a: &DistributeCmd) -> Result<i32, CliError> {
    let data = read_dataset(&a.input)?;
    let rule = match a.partition {
        PartitionArg::Rr => PartitionRule::RoundRobin,
        PartitionArg::Contig => PartitionRule::Contiguous,
    };
    let plan = DistributedPlan { workers: a.workers, rule, seed: global.seed };
    let result = distributed_build(&data, &plan, &build_config(&a.build, global.seed))?;
    emit_dataset(global, &result.coreset.data, Some(&result.coreset.source_indices), true)?;
    let mut cfg = build_json(&a.build);
    cfg["input"] = json!(path_str(&a.input));
    cfg["workers"] = json!(a.workers);
    cfg["partition"] = json!(format!("{:?}", a.partition).to_lowercase());
    let mut report = Report::new("distribute", global.seed, cfg);
    let workers: Vec<Value> = result
        .workers
        .iter()
        .map(|w| {
            json!({
                "worker": w.worker,
                "seed": w.seed,
                "points": w.points,
                "coreset_size": w.coreset.as_ref().map_or(0, Coreset::len),
                "bytes_sent": w.bytes_sent,
            })
        })
        .collect();
    report.set("workers", workers);
    report.set("empty_workers", json!(result.empty_workers));
    report.set("total_bytes", result.bytes_per_worker().iter().sum::<usize>());
    report.set("size", result.coreset.len());
    for w in &result.workers {
        report.time(&format!("worker_{}_seconds", w.worker), w.elapsed.as_secs_f64());
    }
    emit_report(global, &report, global.out.is_none())?;
    Ok(0)
}

fn bench(global: &GlobalArgs, a: &BenchCmd) -> Result<i32, CliError> {
    let start = Instant::now();
    let (data, source) = match (&a.input, a.kind) {
        (Some(p), _) => (read_dataset(p)?, json!(path_str(p))),
        (None, Some(kind)) => {
            let n = a.n.ok_or_else(|| CliError::Usage("--n is required with --kind".into()))?;
            let kind = dataset_kind(kind, n, a.d, a.clusters, a.separation, a.sigma);
            (generate(&kind, global.seed)?, serde_json::to_value(&kind)?)
        }
        (None, None) => return Err(CliError::Usage("bench needs --input or --kind".into())),
    };
    let build = build_config(&a.build, global.seed);
    let suite = default_suite(&data, a.build.k, &SuiteConfig::default(), None, global.seed)?;
    let dists: Vec<Distribution> = a
        .compare
        .iter()
        .map(|d| match d {
            DistributionArg::Sensitivity => Distribution::Sensitivity,
            DistributionArg::Uniform => Distribution::Uniform,
        })
        .collect();
    let summaries = compare_samplers(&data, &build, &dists, a.trials, &suite, global.seed)?;
    let mut cfg = build_json(&a.build);
    cfg["data"] = source;
    cfg["trials"] = json!(a.trials);
    cfg["compare"] = json!(dists);
    let mut report = Report::new("bench", global.seed, cfg);
    report.set("m", build.sample_size(data.dim())?);
    report.set("queries", suite.len());
    report.set_json("samplers", &summaries)?;
    report.time("total_seconds", start.elapsed().as_secs_f64());
    emit_report(global, &report, false)?;
    Ok(0)
}

