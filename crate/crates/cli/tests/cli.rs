use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mwrc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mwrc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write_ordering(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn close(v: &Value, expect: f64, tol: f64) -> bool {
    (v.as_f64().unwrap() - expect).abs() <= tol
}

#[test]
fn rate_on_chain_file() {
    let dir = tempfile::tempdir().unwrap();
    let chain = write_ordering(dir.path(), "chain.json", r#"{"n":3,"pairs":[[1,2],[2,3]]}"#);
    let v = json(&mwrc(&[
        "rate",
        "--ordering",
        &chain,
        "--snr",
        "1,2,4",
        "--bound",
        "weak",
    ]));
    assert!(close(&v["sum_rate"], 0.964_955_585_487_935, 1e-12));
    assert!(close(&v["common_rate"], 0.103_759_374_819_711, 1e-12));
    assert_eq!(v["bound_kind"], "weak");
    assert_eq!(v["per_user"].as_array().unwrap().len(), 3);
}

#[test]
fn rate_reports_per_user_in_input_order() {
    let dir = tempfile::tempdir().unwrap();
    // users given as (4, 1, 2); the chain over sorted users is 2-3-1
    let chain = write_ordering(dir.path(), "c.json", r#"{"n":3,"pairs":[[2,3],[3,1]]}"#);
    let v = json(&mwrc(&[
        "rate",
        "--ordering",
        &chain,
        "--snr",
        "4,1,2",
        "--bound",
        "weak",
    ]));
    let per_user = v["per_user"].as_array().unwrap();
    assert!(close(&per_user[0], 0.555_598_105_334_112, 1e-12));
    assert!(close(&per_user[1], 0.103_759_374_819_711, 1e-12));
    assert!(close(&per_user[2], 0.305_598_105_334_112, 1e-12));
}

#[test]
fn rate_single_pair_exact() {
    let dir = tempfile::tempdir().unwrap();
    let pair = write_ordering(dir.path(), "p.json", r#"{"n":2,"pairs":[[1,2]]}"#);
    let v = json(&mwrc(&[
        "rate",
        "--ordering",
        &pair,
        "--snr",
        "1,1",
        "--bound",
        "exact",
    ]));
    for r in v["per_user"].as_array().unwrap() {
        assert!(close(r, 0.292_481_250_360_578_1, 1e-15));
    }
}

#[test]
fn rate_rejects_triangle_when_tree_required() {
    let dir = tempfile::tempdir().unwrap();
    let tri = write_ordering(dir.path(), "t.json", r#"{"n":3,"pairs":[[1,2],[2,3],[3,1]]}"#);
    let out = mwrc(&["rate", "--ordering", &tri, "--snr", "1,2,4", "--require-tree"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not a tree ordering"));

    // without the guard the triangle is feasible and uses M = 3 phases
    let v = json(&mwrc(&[
        "rate",
        "--ordering",
        &tri,
        "--snr",
        "1,1,1",
        "--bound",
        "weak",
    ]));
    assert!(close(&v["common_rate"], 1.5f64.log2() / 6.0, 1e-15));
}

#[test]
fn rate_domain_errors() {
    let dir = tempfile::tempdir().unwrap();
    let split = write_ordering(dir.path(), "s.json", r#"{"n":4,"pairs":[[1,2],[3,4],[1,2]]}"#);
    let out = mwrc(&["rate", "--ordering", &split, "--snr", "1,2,3,4"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("repeated") || stderr.contains("not connected"),
        "{stderr}"
    );

    let chain = write_ordering(dir.path(), "c.json", r#"{"n":3,"pairs":[[1,2],[2,3]]}"#);
    let out = mwrc(&["rate", "--ordering", &chain, "--snr", "1,2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = mwrc(&["rate", "--ordering", &chain, "--snr", "1,0,2"]);
    assert_eq!(out.status.code(), Some(2));
    let bad = write_ordering(dir.path(), "b.json", "{not json");
    assert_eq!(
        mwrc(&["rate", "--ordering", &bad, "--snr", "1,2,3"]).status.code(),
        Some(2)
    );
    let missing = dir.path().join("missing.json");
    let out = mwrc(&["rate", "--ordering", missing.to_str().unwrap(), "--snr", "1,2,3"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn duplicate_pair_warns_but_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let dup = write_ordering(dir.path(), "d.json", r#"{"n":2,"pairs":[[1,2],[1,2]]}"#);
    let out = mwrc(&["rate", "--ordering", &dup, "--snr", "1,1", "--bound", "weak"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("repeated"));
}

#[test]
fn optimal_common_uses_input_labels() {
    let v = json(&mwrc(&["optimal", "--snr", "4,1,2", "--objective", "common"]));
    assert_eq!(v["ordering"]["pairs"], serde_json::json!([[2, 3], [3, 1]]));
    assert_eq!(v["ordering"]["n"], 3);
    assert!(close(&v["closed_form"], 0.103_759_374_819_711, 1e-12));
    assert_eq!(v["closed_form"], v["evaluated_weak"]);
}

#[test]
fn optimal_sum_star() {
    let v = json(&mwrc(&["optimal", "--snr", "1,2,4", "--objective", "sum"]));
    assert_eq!(v["ordering"]["pairs"], serde_json::json!([[2, 1], [3, 1]]));
    assert!(close(&v["closed_form"], 0.985_276_577_736_608, 1e-12));
    assert_eq!(v["low_snr"], false);

    let out = mwrc(&["optimal", "--snr", "0.1,0.2,10", "--objective", "sum"]);
    let v = json(&out);
    assert_eq!(v["low_snr"], true);
    assert!(v["closed_form"].as_f64().unwrap() > v["evaluated_weak"].as_f64().unwrap());
    assert!(String::from_utf8_lossy(&out.stderr).contains("low-SNR"));
}

#[test]
fn optimal_db_input() {
    let lin = json(&mwrc(&["optimal", "--snr", "1,10,100", "--objective", "sum"]));
    let db = json(&mwrc(&["optimal", "--snr", "0,10,20", "--db", "--objective", "sum"]));
    assert!(close(&db["closed_form"], lin["closed_form"].as_f64().unwrap(), 1e-12));
}

#[test]
fn optimal_needs_two_users() {
    let out = mwrc(&["optimal", "--snr", "5", "--objective", "common"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("at least 2 users"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(mwrc(&["optimal", "--snr", "1,2"]).status.code(), Some(1));
    assert_eq!(mwrc(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(mwrc(&["simulate", "--n", "4"]).status.code(), Some(1));
    assert_eq!(
        mwrc(&["simulate", "--n", "4", "--seed", "1", "--trials", "0"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(mwrc(&["--help"]).status.code(), Some(0));
}

#[test]
fn brute_common_flags_chain() {
    let v = json(&mwrc(&[
        "brute",
        "--snr",
        "1,2,4",
        "--objective",
        "common",
        "--bound",
        "weak",
    ]));
    assert!(close(&v["best_value"], 0.103_759_374_819_711, 1e-12));
    assert_eq!(v["constructive_co_optimal"], true);
    assert_eq!(v["trees_searched"], 3);
    let co = v["co_optimal"].as_array().unwrap();
    assert_eq!(co.len(), 1);
    assert_eq!(co[0]["prufer_code"], serde_json::json!([2]));
    assert_eq!(co[0]["ordering"]["pairs"], serde_json::json!([[1, 2], [2, 3]]));
}

#[test]
fn brute_symmetric_all_co_optimal() {
    let v = json(&mwrc(&["brute", "--snr", "1,1,1", "--objective", "common"]));
    assert_eq!(v["co_optimal"].as_array().unwrap().len(), 3);
    assert_eq!(v["constructive_co_optimal"], true);
}

#[test]
fn brute_enumeration_cap() {
    let ten = ["1"; 10].join(",");
    let out = mwrc(&["brute", "--snr", &ten, "--objective", "sum"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("enumeration cap"));
    let out = mwrc(&["brute", "--snr", "1,2,3", "--objective", "sum", "--cap", "2"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn simulate_single_trial_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for (path, threads) in [(&a, "1"), (&b, "3")] {
        let out = mwrc(&[
            "simulate",
            "--n",
            "4",
            "--trials",
            "1",
            "--seed",
            "7",
            "--threads",
            threads,
            "--output",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    let text = std::fs::read(&a).unwrap();
    assert_eq!(text, std::fs::read(&b).unwrap());
    let text = String::from_utf8(text).unwrap();
    assert!(text.starts_with("snr_db,n,trials,mean_cr_opt,mean_cr_rand,mean_sr_opt,mean_sr_rand,g_c,g_s\n"));
    assert_eq!(text.lines().count(), 9);
}

#[test]
fn verify_small_ranges_pass() {
    let out = mwrc(&["verify", "--n", "2", "--profiles", "50", "--seed", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = mwrc(&["verify", "--n", "3:4", "--profiles", "100", "--seed", "5"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("0 failed, seed 5"));
    assert!(!text.contains("FAIL"));
    assert_eq!(mwrc(&["verify", "--n", "3:10", "--seed", "1"]).status.code(), Some(3));
}
