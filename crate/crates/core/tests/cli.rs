//! End-to-end runs of the `behavemine` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

fn bm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_behavemine"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn stages_chain_through_files() {
    let dir = tempdir().unwrap();
    let low = dir.path().join("user2.lll");
    let high = dir.path().join("user2.hll");
    let net = dir.path().join("net.json");
    let opt_low = dir.path().join("optimal.lll");
    let opt_high = dir.path().join("optimal.hll");

    ok(&bm(&["simulate", "--profile", "user2", "--traces", "40", "--seed", "7", "-o", path(&low)]));
    let text = fs::read_to_string(&low).unwrap();
    let ids: std::collections::BTreeSet<&str> = text.lines().map(|l| l.split(';').next().unwrap()).collect();
    assert_eq!(ids.len(), 40);

    ok(&bm(&["translate", path(&low), "-o", path(&high), "--verify"]));
    ok(&bm(&["discover", path(&high), "--eta", "0.4", "--epsilon", "0.4", "-o", path(&net)]));
    assert!(fs::read_to_string(&net).unwrap().contains("\"places\""));

    ok(&bm(&["simulate", "--profile", "optimal", "--traces", "1", "--seed", "7", "-o", path(&opt_low)]));
    ok(&bm(&["translate", path(&opt_low), "-o", path(&opt_high)]));

    let replay = ok(&bm(&["replay", path(&high), "--net", path(&net), "--optimal", path(&opt_high)]));
    assert!(replay.contains("fitness:") && replay.contains("optimal fitness:"));

    let recs = ok(&bm(&["recommend", path(&high), "--optimal", path(&opt_high), "--format", "json"]));
    let parsed: serde_json::Value = serde_json::from_str(&recs).unwrap();
    assert!(parsed.as_array().is_some_and(|a| !a.is_empty()));

    let dot = ok(&bm(&["discover", path(&high), "--format", "dot"]));
    assert!(dot.starts_with("digraph"));
}

#[test]
fn same_seed_same_file() {
    let dir = tempdir().unwrap();
    let a = dir.path().join("a.lll");
    let b = dir.path().join("b.lll");
    for p in [&a, &b] {
        ok(&bm(&["simulate", "--profile", "user4", "--traces", "5", "--seed", "3", "-o", path(p)]));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn zero_traces_write_an_empty_log() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("empty.lll");
    ok(&bm(&["simulate", "--traces", "0", "-o", path(&out)]));
    assert!(fs::read_to_string(&out).unwrap().is_empty());
    let high = ok(&bm(&["translate", path(&out)]));
    assert!(high.is_empty());
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "profile=user3\ntrace_count=30\nseed=5\nformat=json\n").unwrap();
    let a = ok(&bm(&["pipeline", "--config", path(&cfg)]));
    let b = ok(&bm(&["pipeline", "--config", path(&cfg)]));
    assert_eq!(a, b);
    let report: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert!(report["metrics"]["user_fitness"].as_f64().is_some());

    let text = ok(&bm(&["pipeline", "--config", path(&cfg), "--format", "text", "--seed", "6"]));
    assert!(text.starts_with("User's Fitness"));
}

#[test]
fn errors_name_their_stage() {
    let dir = tempdir().unwrap();
    let bad = dir.path().join("bad.lll");
    fs::write(&bad, "t;0;M;1,1\nt;5;NOPE;x\n").unwrap();
    let out = bm(&["translate", path(&bad)]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("translate") && err.contains("line 2"), "{err}");

    let out = bm(&["pipeline", "--profile", "user7"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("config"));

    let out = bm(&["discover", path(&dir.path().join("missing.hll"))]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("discover"));
}
