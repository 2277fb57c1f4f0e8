use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mbo-admm"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn solve_mixed_cover_with_trace_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "builtin", "mixed-cover", "--out", "p.json"]);
    ok(
        d,
        &[
            "solve", "p.json", "--blocks", "3", "--rho-fixed", "--rho-init", "1001", "--beta", "1000", "--c", "900",
            "--oracle", "exact", "--trace", "t.csv", "--out", "r.json",
        ],
    );
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("r.json")).unwrap()).unwrap();
    assert_eq!(report["best_point"]["x"], serde_json::json!([1, 0, 0]));
    let u = report["best_point"]["u"][0].as_f64().unwrap();
    assert!((u - 2.0).abs() < 5e-3, "u = {u}");

    let trace = std::fs::read_to_string(d.join("t.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(
        lines.next().unwrap(),
        "k,objective,merit,r,rr,rho,beta,qubo_exact_gap,elapsed_seconds"
    );
    assert_eq!(lines.count(), report["iterations"].as_u64().unwrap() as usize);
}

#[test]
fn infeasible_outcome_still_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "builtin", "three-bit-cover", "--out", "p.json"]);
    let out = ok(
        d,
        &["solve", "p.json", "--rho-fixed", "--rho-init", "1001", "--beta", "1000", "--beta-fixed", "--c", "0"],
    );
    assert!(out.contains("feasible false"), "{out}");
}

#[test]
fn usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "builtin", "two-bit-cover", "--out", "p.json"]);
    let out = run(d, &["solve", "p.json", "--blocks", "4"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("blocks"));

    let out = run(d, &["bench-misk", "--group", "3"]);
    assert!(!out.status.success());

    let out = run(d, &["solve", "missing.json"]);
    assert!(!out.status.success());

    std::fs::write(d.join("bad.json"), "{\"n_bin\": 2}").unwrap();
    let out = run(d, &["solve", "bad.json"]);
    assert!(!out.status.success());
}

#[test]
fn exact_oracle_guard() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "bp", "--n", "6", "--cap", "40", "--out", "p.json"]);
    let out = run(d, &["solve", "p.json", "--oracle", "exact"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--oracle sa"));
}

#[test]
fn empty_bin_packing_campaign() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["bench-bp", "--instances", "0", "--out-dir", "out"]);
    let csv: Vec<_> = std::fs::read_dir(d.join("out"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    assert_eq!(csv.len(), 1);
    let text = std::fs::read_to_string(&csv[0]).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "instance,n_bin,IT,gap,feasible,optimal,qubo_frac,runtime_s"
    );
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn bin_packing_campaign_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = ok(
        d,
        &["bench-bp", "--sizes", "2,3", "--instances", "2", "--blocks", "2,3", "--track-qubo", "--out-dir", "out"],
    );
    assert!(out.contains("bp-2block") && out.contains("bp-3block"));
    let mut names: Vec<_> = std::fs::read_dir(d.join("out"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names.len(), 6, "{names:?}");
    let csv = names.iter().find(|n| n.starts_with("bp-3block") && n.ends_with(".csv")).unwrap();
    assert!(csv.starts_with("bp-3block-s0-"));
    let text = std::fs::read_to_string(d.join("out").join(csv)).unwrap();
    assert_eq!(text.lines().count(), 6);
    let stem = csv.trim_end_matches(".csv");
    assert_eq!(std::fs::read_dir(d.join("out").join(stem)).unwrap().count(), 4);
}

#[test]
fn scholl_input_with_local_search() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "bp", "--n", "8", "--cap", "100", "--seed", "3", "--format", "scholl", "--out", "s.txt"]);
    let out = ok(
        d,
        &[
            "bench-bp", "--scholl", "s.txt", "--oracle", "sa", "--sa-sweeps", "200", "--local-search", "--no-reference",
            "--max-iter", "20", "--out-dir", "out",
        ],
    );
    let row = out.lines().find(|l| l.starts_with("s ")).expect("one row");
    assert!(row.split_whitespace().nth(4) == Some("true"), "{row}");
}

#[test]
fn misk_campaign_runs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = ok(
        d,
        &["bench-misk", "--group", "2", "--ks", "3", "--t", "4", "--polish", "--out-dir", "out"],
    );
    assert!(out.contains("3 instances"), "{out}");
}

#[test]
fn solve_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "builtin", "three-bit-cover", "--out", "p.json"]);
    for name in ["a.csv", "b.csv"] {
        ok(
            d,
            &["solve", "p.json", "--oracle", "noisy", "--seed", "5", "--rho-fixed", "--rho-init", "1001", "--trace", name],
        );
    }
    let strip = |name: &str| -> Vec<String> {
        std::fs::read_to_string(d.join(name))
            .unwrap()
            .lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect()
    };
    assert_eq!(strip("a.csv"), strip("b.csv"));
}
