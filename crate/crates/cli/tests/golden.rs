mod common;

use std::fs;

use common::*;
use wsoe_cli::{Mode, EXIT_OK};

const GOLDEN: &str = "bookstore_seed0.jsonl";

#[test]
fn bookstore_run_reproduces_the_golden_trace() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.jsonl");
    let mut c = bookstore("requests.jsonl", Mode::Run);
    c.trace_out = Some(path.clone());
    assert_eq!(invoke(&c).code, EXIT_OK);
    let got = fs::read(&path).unwrap();
    if std::env::var_os("WSOE_BLESS").is_some() {
        fs::write(golden(GOLDEN), &got).unwrap();
    }
    assert!(got == fs::read(golden(GOLDEN)).unwrap(), "trace differs from tests/golden/{GOLDEN}");
}

#[test]
fn golden_trace_has_the_bookstore_rule_shape() {
    let text = fs::read_to_string(golden(GOLDEN)).unwrap();
    let records: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(bookstore_rule_shape(&records, 6), Vec::<String>::new());
}

#[test]
fn every_seed_has_the_bookstore_rule_shape() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.jsonl");
    for seed in 0..20 {
        let mut c = bookstore("requests.jsonl", Mode::Run);
        c.seed = seed;
        c.trace_out = Some(path.clone());
        assert_eq!(invoke(&c).code, EXIT_OK);
        let text = fs::read_to_string(&path).unwrap();
        let records: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(bookstore_rule_shape(&records, 6), Vec::<String>::new(), "seed {seed}");
    }
}
