use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn workdir(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn coreset(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coreset")).args(args).env_remove("CORESET_SEED").output().unwrap()
}

fn json_file(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_adversarial_prints_the_outlier_set() {
    let out = coreset(&["gen", "--kind", "adversarial", "--n", "4"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "x0\n0\n0\n0\n1\n");
}

#[test]
fn identity_coreset_passes_check() {
    let dir = workdir("identity");
    let data = dir.join("x.csv");
    assert!(coreset(&["gen", "--kind", "uniform", "--n", "300", "--out", s(&data)]).status.success());
    let report = dir.join("check.json");
    let out = coreset(&["check", "--full", s(&data), "--coreset", s(&data), "--k", "3", "--epsilon-budget", "0", "--report", s(&report)]);
    assert_eq!(out.status.code(), Some(0));
    let r = json_file(&report);
    assert_eq!(r["schema"], "coreset-report/1");
    assert_eq!(r["result"]["error"]["max_error"], 0.0);
}

#[test]
fn check_exits_3_over_budget() {
    let dir = workdir("budget");
    let data = dir.join("x.csv");
    let core = dir.join("c.csv");
    assert!(coreset(&["gen", "--kind", "gmm", "--n", "2000", "--out", s(&data)]).status.success());
    assert!(coreset(&["build", "--input", s(&data), "--k", "3", "--m", "20", "--out", s(&core)]).status.success());
    let out = coreset(&["check", "--full", s(&data), "--coreset", s(&core), "--k", "3", "--epsilon-budget", "1e-6"]);
    assert_eq!(out.status.code(), Some(3));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["result"]["budget_violated"], true);
}

#[test]
fn usage_and_validation_exit_codes() {
    assert_eq!(coreset(&["build", "--k", "3"]).status.code(), Some(2));
    assert_eq!(coreset(&["frobnicate"]).status.code(), Some(2));
    let dir = workdir("codes");
    let data = dir.join("x.csv");
    assert!(coreset(&["gen", "--kind", "uniform", "--n", "50", "--out", s(&data)]).status.success());
    assert_eq!(coreset(&["build", "--input", s(&data), "--k", "0"]).status.code(), Some(1));
    assert_eq!(coreset(&["build", "--input", s(&dir.join("missing.csv")), "--k", "2"]).status.code(), Some(1));
    assert_eq!(coreset(&["check", "--full", s(&data), "--coreset", s(&data)]).status.code(), Some(2));
}

#[test]
fn seed_falls_back_to_environment() {
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_coreset"));
        cmd.args(["gen", "--kind", "uniform", "--n", "5"]).env_remove("CORESET_SEED");
        if let Some(v) = env {
            cmd.env("CORESET_SEED", v);
        }
        if let Some(v) = flag {
            cmd.args(["--seed", v]);
        }
        cmd.output().unwrap().stdout
    };
    assert_eq!(run(Some("11"), None), run(None, Some("11")));
    assert_ne!(run(Some("11"), None), run(None, None));
}

#[test]
fn binary_and_csv_inputs_give_identical_coresets() {
    let dir = workdir("formats");
    let csv = dir.join("x.csv");
    let bin = dir.join("x.bin");
    for p in [&csv, &bin] {
        assert!(coreset(&["gen", "--kind", "gmm", "--n", "3000", "--seed", "4", "--out", s(p)]).status.success());
    }
    let from_csv = dir.join("a.bin");
    let from_bin = dir.join("b.bin");
    for (input, out) in [(&csv, &from_csv), (&bin, &from_bin)] {
        assert!(coreset(&["build", "--input", s(input), "--k", "3", "--m", "100", "--out", s(out)]).status.success());
    }
    assert_eq!(std::fs::read(&from_csv).unwrap(), std::fs::read(&from_bin).unwrap());
    assert_eq!(&std::fs::read(&from_bin).unwrap()[..4], b"CSK1");
}

#[test]
fn reports_carry_provenance() {
    let dir = workdir("provenance");
    let data = dir.join("x.csv");
    let core = dir.join("c.csv");
    assert!(coreset(&["gen", "--kind", "uniform", "--n", "400", "--out", s(&data)]).status.success());
    assert!(coreset(&["build", "--input", s(&data), "--k", "2", "--m", "50", "--seed", "8", "--out", s(&core)]).status.success());
    let r = json_file(&dir.join("c.csv.json"));
    assert_eq!(r["provenance"]["seed"], 8);
    assert_eq!(r["provenance"]["config_hash"].as_str().unwrap().len(), 64);
    assert!(r["provenance"]["git_describe"].is_string());
    assert!(r.get("timing").is_none());
    let header = std::fs::read_to_string(&core).unwrap();
    assert!(header.starts_with("x0,x1,weight\n"));
}

#[test]
fn sensitivity_summary_matches_corrected_total() {
    let dir = workdir("sensitivity");
    let data = dir.join("x.csv");
    let out = dir.join("s.csv");
    assert!(coreset(&["gen", "--kind", "gmm", "--n", "900", "--clusters", "3", "--out", s(&data)]).status.success());
    assert!(coreset(&["sensitivity", "--input", s(&data), "--k", "3", "--out", s(&out)]).status.success());
    let r = json_file(&dir.join("s.csv.json"));
    let total = r["result"]["total"].as_f64().unwrap();
    let expected = r["result"]["expected_total"].as_f64().unwrap();
    assert!((total - expected).abs() <= 1e-9 * expected);
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 901);
}

#[test]
fn bench_compares_samplers_on_adversarial_data() {
    let out = coreset(&["bench", "--kind", "adversarial", "--n", "10000", "--k", "1", "--m", "100", "--trials", "10"]);
    assert!(out.status.success());
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    let samplers = r["result"]["samplers"].as_array().unwrap();
    let median = |name: &str| {
        samplers.iter().find(|x| x["distribution"] == name).unwrap()["median_error"].as_f64().unwrap()
    };
    assert!(median("uniform") >= 0.99);
    assert!(median("sensitivity") <= 0.2);
}

#[test]
fn stream_and_distribute_emit_communication_reports() {
    let dir = workdir("pipeline");
    let data = dir.join("x.csv");
    assert!(coreset(&["gen", "--kind", "uniform", "--n", "2500", "--out", s(&data)]).status.success());
    let st = dir.join("st.csv");
    assert!(coreset(&["stream", "--input", s(&data), "--k", "3", "--m", "60", "--block-size", "500", "--out", s(&st)]).status.success());
    let r = json_file(&dir.join("st.csv.json"));
    assert_eq!(r["result"]["points_seen"], 2500);
    assert_eq!(r["result"]["blocks"], 5);
    assert!((r["result"]["total_weight"].as_f64().unwrap() - 1.0).abs() < 0.5);

    let dist = dir.join("d.bin");
    assert!(coreset(&["distribute", "--input", s(&data), "--k", "3", "--m", "60", "--workers", "4", "--partition", "contig", "--out", s(&dist)]).status.success());
    let r = json_file(&dir.join("d.bin.json"));
    let workers = r["result"]["workers"].as_array().unwrap();
    assert_eq!(workers.len(), 4);
    for w in workers {
        let size = w["coreset_size"].as_u64().unwrap();
        assert_eq!(w["bytes_sent"].as_u64().unwrap(), 21 + 8 * size * 3);
    }
}
