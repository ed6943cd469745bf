use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const THREE_CYCLE: &str = "problem: sr\nagent a\nagent b\nagent c\npref a: b > c\npref b: c > a\npref c: a > b\n";
const MUTUAL_PAIR: &str = "problem: sr\nagent a\nagent b\npref a: b\npref b: a\n";

struct Dir(TempDir);

impl Dir {
    fn new() -> Self {
        Dir(TempDir::new().unwrap())
    }

    fn file(&self, name: &str, text: &str) -> PathBuf {
        let path = self.0.path().join(name);
        fs::write(&path, text).unwrap();
        path
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stablectl"))
        .args(args)
        .env_remove("STABLECTL_CAP")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn validate_exit_codes() {
    let d = Dir::new();
    let ok = run(&["validate", p(&d.file("ok.txt", MUTUAL_PAIR))]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(stdout(&ok), "ok\n");

    let asym = d.file("asym.txt", "problem: sr\nagent a\nagent b\npref a: b\npref b:\n");
    let out = run(&["validate", p(&asym)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("{a,b}"));

    let broken = d.file("broken.txt", "problem: sr\nagent a\nfoo\n");
    let out = run(&["validate", p(&broken)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn stable_reports() {
    let d = Dir::new();
    let pair = d.file("pair.txt", MUTUAL_PAIR);
    assert_eq!(stdout(&run(&["stable", p(&pair)])), "match a b\n");

    let cycle = d.file("cycle.txt", THREE_CYCLE);
    let out = run(&["stable", p(&cycle), "--partition"]);
    assert_eq!(stdout(&out), "none\nparty (a b c) odd\n");
    let out = run(&["stable", p(&cycle), "--enumerate"]);
    assert_eq!(stdout(&out), "count: 0\n");
    assert_eq!(run(&["stable", p(&cycle), "--enumerate", "--cap", "2"]).status.code(), Some(4));
}

#[test]
fn cap_from_environment() {
    let d = Dir::new();
    let cycle = d.file("cycle.txt", THREE_CYCLE);
    let out = Command::new(env!("CARGO_BIN_EXE_stablectl"))
        .args(["stable", p(&cycle), "--enumerate"])
        .env("STABLECTL_CAP", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    let out = Command::new(env!("CARGO_BIN_EXE_stablectl"))
        .args(["stable", p(&cycle), "--enumerate"])
        .env("STABLECTL_CAP", "30")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn solve_with_both_methods() {
    let d = Dir::new();
    let cycle = d.file("cycle.txt", THREE_CYCLE);
    for method in ["auto", "poly", "exact"] {
        let out = run(&[
            "solve", p(&cycle), "--problem", "delag-mp", "--target-pair", "a,b", "--budget", "1", "--method", method,
        ]);
        assert_eq!(out.status.code(), Some(0));
        let text = stdout(&out);
        assert!(text.contains("verdict: yes\noptimum: 1\nactions: c\n"), "{text}");
    }
    let out = run(&["solve", p(&cycle), "--problem", "delag-esm", "--budget", "1", "--method", "poly"]);
    assert_eq!(out.status.code(), Some(3));
    let out = run(&["solve", p(&cycle), "--problem", "delag-ma", "--target", "zz", "--budget", "1"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn solve_stable_matching_target() {
    let d = Dir::new();
    let pair = d.file("pair.txt", MUTUAL_PAIR);
    let m = d.file("m.txt", "match a b\n");
    let out = run(&["solve", p(&pair), "--problem", "delacc-ms", "--matching", p(&m), "--budget", "0"]);
    assert_eq!(stdout(&out), "problem: delacc-ms\nmethod: poly\nbudget: 0\nverdict: yes\noptimum: 0\nactions: -\n");
}

#[test]
fn reduce_writes_instance_and_query() {
    let d = Dir::new();
    let k3 = d.file("k3.txt", "vertices x y z\nedge x y\nedge y z\nedge x z\n");
    let out_path = d.path("k3.inst");
    let out = run(&["reduce", "--from", "clique", "--to", "csm-addag-ma", "--k", "2", p(&k3), "--out", p(&out_path)]);
    assert_eq!(out.status.code(), Some(0));
    let query = fs::read_to_string(d.path("k3.inst.query")).unwrap();
    assert!(query.contains("budget 3\n") && query.contains("target wstar\n"), "{query}");
    assert!(fs::read_to_string(&out_path).unwrap().starts_with("# "));
    let validate = run(&["validate", p(&out_path)]);
    assert_eq!(validate.status.code(), Some(0));

    let one = d.file("one.txt", "vertices v\n");
    let out_path = d.path("one.inst");
    run(&["reduce", "--from", "is", "--to", "csr-addag-ms", "--k", "1", p(&one), "--out", p(&out_path)]);
    let query = fs::read_to_string(d.path("one.inst.query")).unwrap();
    assert!(query.contains("budget 1\n"), "{query}");

    let edge = d.file("edge.txt", "vertices u v\nedge u v\n");
    let out_path = d.path("edge.inst");
    run(&["reduce", "--from", "is", "--to", "csr-addag-esm", "--k", "1", p(&edge), "--out", p(&out_path)]);
    let query_path = d.path("edge.inst.query");
    assert!(fs::read_to_string(&query_path).unwrap().contains("budget 1\n"));
    let out = run(&["solve", p(&out_path), "--query", p(&query_path)]);
    let text = stdout(&out);
    assert!(text.contains("verdict: yes\n") && text.contains("actions: u\n"), "{text}");
}

#[test]
fn reduce_rejects_bad_requests() {
    let d = Dir::new();
    let edge = d.file("edge.txt", "vertices u v\nedge u v\n");
    let out_path = d.path("x.inst");
    let mismatch = run(&["reduce", "--from", "clique", "--to", "csr-addag-ms", "--k", "1", p(&edge), "--out", p(&out_path)]);
    assert_eq!(mismatch.status.code(), Some(3));
    let too_big = run(&["reduce", "--from", "is", "--to", "csr-addag-ms", "--k", "3", p(&edge), "--out", p(&out_path)]);
    assert_eq!(too_big.status.code(), Some(3));
}

#[test]
fn gen_is_deterministic() {
    let a = stdout(&run(&["gen", "--n", "6", "--density", "0.5", "--seed", "11"]));
    let b = stdout(&run(&["gen", "--n", "6", "--density", "0.5", "--seed", "11"]));
    assert_eq!(a, b);
    assert!(a.starts_with("problem: sr\n"));
    let sm = stdout(&run(&["gen", "--na", "2", "--nb", "3", "--density", "1", "--seed", "1"]));
    assert!(sm.starts_with("problem: sm\n"));
    assert_eq!(sm.matches("side=b").count(), 3);
    assert_eq!(run(&["gen", "--n", "3", "--density", "2"]).status.code(), Some(3));
    assert_eq!(run(&["gen", "--na", "3"]).status.code(), Some(3));
}
