use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn bnctl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bnctl")).args(args).output().expect("binary runs")
}

fn json(path: &std::path::Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn chain_is_controllable_in_two_steps() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let out = bnctl(&["check", fixture("chain.bn").to_str().unwrap(), "--json", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&report);
    assert_eq!(r["schema"], "bnctl-report/1");
    assert_eq!(r["verdicts"]["eta"], 2);
}

#[test]
fn tcell_check_lists_cycles_and_fails() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let dot = dir.path().join("g.dot");
    let out = bnctl(&[
        "check",
        fixture("tcell.bn").to_str().unwrap(),
        "--json",
        report.to_str().unwrap(),
        "--dot",
        dot.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let r = json(&report);
    assert!(!r["artifacts"]["cycles"].as_array().unwrap().is_empty());
    assert!(std::fs::read_to_string(dot).unwrap().starts_with("digraph"));
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let p = dir.path().join(name);
        let out = bnctl(&["pin", fixture("tcell.bn").to_str().unwrap(), "--fixture", "tcell-paper", "--json", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        std::fs::read(p).unwrap()
    };
    assert_eq!(run("a.json"), run("b.json"));
}

#[test]
fn pinned_network_is_written_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out_bn = dir.path().join("pinned.bn");
    let out = bnctl(&["pin", fixture("tcell.bn").to_str().unwrap(), "--out", out_bn.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let out = bnctl(&["check", out_bn.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn exit_codes_for_errors() {
    assert_eq!(bnctl(&["check", "/nonexistent.bn"]).status.code(), Some(2));
    assert_eq!(bnctl(&["frobnicate"]).status.code(), Some(2));
    let target = "0".repeat(38);
    let out = bnctl(&["pbn-check", fixture("tcell_pbn.bn").to_str().unwrap(), "--target", &target]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let out = bnctl(&["pbn-check", fixture("tcell_pbn.bn").to_str().unwrap(), "--target", "01"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pbn_commands_on_small_chains() {
    let dir = tempfile::tempdir().unwrap();
    let coin = dir.path().join("coin.bn");
    std::fs::write(&coin, "mode p=0.5 {\nx1 = x1\n}\nmode p=0.5 {\nx1 = !x1\n}\n").unwrap();
    let csv = dir.path().join("rows.csv");
    let out = bnctl(&["pbn-check", coin.to_str().unwrap(), "--target", "1", "--csv", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let rows = std::fs::read_to_string(csv).unwrap();
    assert!(rows.starts_with("t,x0,probability\n0,1,1"));
    let toggle = dir.path().join("toggle.bn");
    std::fs::write(&toggle, "x1 = !x1\n").unwrap();
    assert_eq!(bnctl(&["pbn-check", toggle.to_str().unwrap(), "--target", "1"]).status.code(), Some(1));
    let two = dir.path().join("two.bn");
    std::fs::write(&two, "mode p=0.5 {\nx1 = x2\nx2 = x1\n}\nmode p=0.5 {\nx1 = !x1\nx2 = x1 & x2\n}\n").unwrap();
    let report = dir.path().join("s.json");
    let out = bnctl(&["pbn-stabilize", two.to_str().unwrap(), "--target", "10", "--runs", "2000", "--json", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&report)["verdicts"]["sp"], true);
}

#[test]
fn oracle_modes() {
    let chain = fixture("chain.bn");
    for mode in ["assr", "class", "mincontrol", "eta"] {
        let out = bnctl(&["oracle", chain.to_str().unwrap(), "--mode", mode]);
        assert_eq!(out.status.code(), Some(0), "{mode}: {}", String::from_utf8_lossy(&out.stdout));
    }
}
