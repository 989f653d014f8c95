//! End-to-end tests of the command-line surface: exit-code contract,
//! deterministic file output, and the round trips between commands.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_roundlab"))
}

fn corpus_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../claims/corpus.json")
}

struct Workdir(PathBuf);

impl Workdir {
    fn new(tag: &str) -> Workdir {
        let dir = std::env::temp_dir().join(format!("roundlab-cli-{tag}-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        Workdir(dir)
    }

    fn file(&self, name: &str, contents: &str) -> PathBuf {
        let path = self.0.join(name);
        fs::write(&path, contents).unwrap();
        path
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }
}

impl Drop for Workdir {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.0);
    }
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).to_string()
}

const IIS: &str = r#"{"comm":"iis","box":"none"}"#;
const IIS_TS: &str = r#"{"comm":"iis","box":"ts"}"#;
const CONSENSUS2: &str = r#"{"kind":"consensus","n":2}"#;

#[test]
fn gen_protocol_reports_subdivision_counts() {
    let dir = Workdir::new("gen");
    let out = dir.path("complex.json");
    let dot = dir.path("complex.dot");
    let output = bin()
        .args(["gen-protocol", "--n", "3", "--rounds", "1"])
        .args(["--out", out.to_str().unwrap(), "--dot", dot.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let text = stdout(&output);
    assert!(text.contains("vertices: 12"));
    assert!(text.contains("facets: 13"));
    assert!(fs::read_to_string(&dot).unwrap().starts_with("graph complex {"));

    // Canonical re-emission is byte-stable.
    let first = fs::read_to_string(&out).unwrap();
    let exported = bin()
        .args(["export", "--input", out.to_str().unwrap(), "--format", "json"])
        .output()
        .unwrap();
    assert_eq!(exported.status.code(), Some(0));
    assert_eq!(stdout(&exported), first);
}

#[test]
fn solve_exit_codes_follow_the_verdict() {
    let dir = Workdir::new("solve");
    let task = dir.file("task.json", CONSENSUS2);
    let iis = dir.file("iis.json", IIS);
    let ts = dir.file("ts.json", IIS_TS);
    let witness = dir.path("witness.json");

    let unsolvable = bin()
        .args(["solve", "--task", task.to_str().unwrap()])
        .args(["--model", iis.to_str().unwrap(), "--rounds", "1"])
        .output()
        .unwrap();
    assert_eq!(unsolvable.status.code(), Some(1));
    assert!(stdout(&unsolvable).contains("unsolvable"));

    let solvable = bin()
        .args(["solve", "--task", task.to_str().unwrap()])
        .args(["--model", ts.to_str().unwrap(), "--rounds", "1"])
        .args(["--witness", witness.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(solvable.status.code(), Some(0));
    assert!(fs::read_to_string(&witness).unwrap().contains("\"map\""));
}

#[test]
fn budget_overrun_exits_three() {
    let dir = Workdir::new("budget");
    let task = dir.file("task.json", r#"{"kind":"approx","n":3,"m":2,"eps_num":1}"#);
    let iis = dir.file("iis.json", IIS);
    let output = bin()
        .args(["solve", "--task", task.to_str().unwrap()])
        .args(["--model", iis.to_str().unwrap(), "--rounds", "1", "--budget", "1"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn malformed_input_exits_two() {
    let dir = Workdir::new("bad");
    let task = dir.file("task.json", "{ not json");
    let iis = dir.file("iis.json", IIS);
    let output = bin()
        .args(["solve", "--task", task.to_str().unwrap()])
        .args(["--model", iis.to_str().unwrap(), "--rounds", "0"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));

    // Unknown flag: usage error from the parser.
    let usage = bin().args(["solve", "--nope"]).output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
}

#[test]
fn closure_and_fixed_point() {
    let dir = Workdir::new("closure");
    let task = dir.file("task.json", r#"{"kind":"approx","n":2,"m":9,"eps_num":1}"#);
    let iis = dir.file("iis.json", IIS);
    let closed = dir.path("closed.json");

    let output = bin()
        .args(["closure", "--task", task.to_str().unwrap()])
        .args(["--model", iis.to_str().unwrap(), "--out", closed.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));

    // The closure tripled eps, so it is not a fixed point...
    let not_fixed = bin()
        .args(["fixed-point", "--task", task.to_str().unwrap()])
        .args(["--model", iis.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(not_fixed.status.code(), Some(1));

    // ...while consensus is.
    let consensus = dir.file("consensus.json", CONSENSUS2);
    let fixed = bin()
        .args(["fixed-point", "--task", consensus.to_str().unwrap()])
        .args(["--model", iis.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(fixed.status.code(), Some(0));

    // The written closure is a loadable custom task equal to 3/9-agreement:
    // its closure in turn is 9/9-agreement, which is zero-round solvable.
    let reclosed = dir.path("reclosed.json");
    let output = bin()
        .args(["closure", "--task", closed.to_str().unwrap()])
        .args(["--model", iis.to_str().unwrap(), "--out", reclosed.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let solved = bin()
        .args(["solve", "--task", reclosed.to_str().unwrap()])
        .args(["--model", iis.to_str().unwrap(), "--rounds", "0"])
        .output()
        .unwrap();
    assert_eq!(solved.status.code(), Some(0));
}

#[test]
fn lower_bound_fast_family_matches_the_generic_chain() {
    let dir = Workdir::new("chain");
    let task = dir.file("task.json", r#"{"kind":"approx","n":2,"m":9,"eps_num":1}"#);
    let iis = dir.file("iis.json", IIS);

    let generic = bin()
        .args(["lower-bound", "--task", task.to_str().unwrap()])
        .args(["--model", iis.to_str().unwrap(), "--max-steps", "4"])
        .output()
        .unwrap();
    assert_eq!(generic.status.code(), Some(0));
    assert!(stdout(&generic).contains("lower bound: 2"));

    let fast = bin()
        .args(["lower-bound", "--task", task.to_str().unwrap()])
        .args(["--model", iis.to_str().unwrap(), "--max-steps", "4", "--fast-family"])
        .output()
        .unwrap();
    assert_eq!(fast.status.code(), Some(0));
    assert!(stdout(&fast).contains("lower bound: 2"));
}

#[test]
fn run_rule_exit_codes() {
    let dir = Workdir::new("rule");
    let task = dir.file("task.json", CONSENSUS2);
    let ts = dir.file("ts.json", IIS_TS);
    let output = bin()
        .args(["run-rule", "--rule", "ts-consensus"])
        .args(["--task", task.to_str().unwrap()])
        .args(["--model", ts.to_str().unwrap(), "--rounds", "1"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    assert!(stdout(&output).contains("true"));
}

#[test]
fn verify_claims_filter_and_exit_codes() {
    let corpus = corpus_path();
    let filtered = bin()
        .args(["verify-claims", "--corpus", corpus.to_str().unwrap()])
        .args(["--filter", "counts-*"])
        .output()
        .unwrap();
    assert_eq!(filtered.status.code(), Some(0));
    let text = stdout(&filtered);
    assert!(text.contains("PASS counts-iis-3"));
    assert!(!text.contains("consensus-ts-solvable"));

    let empty = bin()
        .args(["verify-claims", "--corpus", corpus.to_str().unwrap()])
        .args(["--filter", "no-such-claim-*"])
        .output()
        .unwrap();
    assert_eq!(empty.status.code(), Some(0));
    assert!(stdout(&empty).contains("warning"));
}

#[test]
fn export_renders_tasks_and_rejects_mismatched_formats() {
    let dir = Workdir::new("export");
    let task = dir.file("task.json", CONSENSUS2);

    let table = bin()
        .args(["export", "--input", task.to_str().unwrap(), "--format", "table"])
        .output()
        .unwrap();
    assert_eq!(table.status.code(), Some(0));
    assert!(stdout(&table).contains("->"));

    let bad = bin()
        .args(["export", "--input", task.to_str().unwrap(), "--format", "dot"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
