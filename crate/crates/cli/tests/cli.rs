mod common;

use std::fs;
use std::process::Command;

use common::*;
use wsoe_cli::formats::{read_requests, read_trace_records, rebuild_trace};
use wsoe_cli::{Mode, EXIT_BOUND, EXIT_INPUT, EXIT_OK, EXIT_VIOLATION};
use wsoe_core::fixtures::*;
use wsoe_core::{Engine, Registry, WorkflowDef};

#[test]
fn shipped_fixtures_match_the_library_fixtures() {
    assert_eq!(WorkflowDef::load(fixture("bookstore/workflow.json")).unwrap(), bookstore_workflow());
    assert_eq!(Registry::load(fixture("bookstore/registry.jsonl")).unwrap(), bookstore_registry());
    assert_eq!(
        read_requests(&fixture("bookstore/requests.jsonl")).unwrap(),
        [bookstore_request("c1", BOOKSTORE_FEASIBLE)]
    );
    assert_eq!(
        read_requests(&fixture("bookstore/requests_infeasible.jsonl")).unwrap(),
        [bookstore_request("c1", BOOKSTORE_INFEASIBLE)]
    );
    assert_eq!(WorkflowDef::load(fixture("small/one_activity.json")).unwrap(), one_activity_workflow());
    assert_eq!(WorkflowDef::load(fixture("small/two_activity.json")).unwrap(), two_activity_workflow());
    assert_eq!(Registry::load(fixture("small/registry.jsonl")).unwrap(), small_registry());
    assert_eq!(
        read_requests(&fixture("small/two_requests.jsonl")).unwrap(),
        [small_request("c1", SMALL_FEASIBLE), small_request("c2", SMALL_FEASIBLE)]
    );
}

#[test]
fn run_reports_each_outcome() {
    let o = invoke(&bookstore("requests.jsonl", Mode::Run));
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
    assert_eq!(o.out, "c1: Completed, qos=(240ms,30c) <= (250ms,40c)\n");
    let o = invoke(&bookstore("requests_infeasible.jsonl", Mode::Run));
    assert_eq!((o.code, o.out.as_str()), (EXIT_OK, "c1: Denied\n"));
    let o = invoke(&bookstore("requests_mixed.jsonl", Mode::Run));
    let lines: Vec<&str> = o.out.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("c1: Completed"));
    assert!(lines[1].starts_with("c2: Completed"));
    assert_eq!(lines[2], "c3: Denied");
}

#[test]
fn input_errors_exit_one_and_name_the_file() {
    let mut c = bookstore("requests.jsonl", Mode::Run);
    c.registry = fixture("bookstore/nope.jsonl");
    let o = invoke(&c);
    assert_eq!(o.code, EXIT_INPUT);
    assert!(o.err.contains("nope.jsonl"), "{}", o.err);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("requests.jsonl");
    fs::write(&bad, "{\"client_id\": \"c1\"}\n").unwrap();
    let mut c = bookstore("requests.jsonl", Mode::Run);
    c.requests = bad.clone();
    let o = invoke(&c);
    assert_eq!(o.code, EXIT_INPUT);
    assert!(o.err.contains("requests.jsonl:1"), "{}", o.err);

    let line = fs::read_to_string(fixture("bookstore/requests.jsonl")).unwrap();
    fs::write(&bad, format!("{line}{line}")).unwrap();
    assert_eq!(invoke(&c).code, EXIT_INPUT);

    fs::write(&bad, line.replace("BookStore", "FlowerShop")).unwrap();
    assert_eq!(invoke(&c).code, EXIT_INPUT);

    let mut c = bookstore("requests.jsonl", Mode::Explore);
    c.max_traces = 0;
    assert_eq!(invoke(&c).code, EXIT_INPUT);
}

#[test]
fn explore_prints_count_and_layer_verdicts() {
    let o = invoke(&small("one_activity.json", "one_request.jsonl", Mode::Explore));
    assert_eq!((o.code, o.out.as_str()), (EXIT_OK, "traces: 1; behavior: pass; system: pass; service: pass\n"));
    let mut full = small("one_activity.json", "one_request.jsonl", Mode::Explore);
    full.all_interleavings = true;
    assert_eq!(invoke(&full).out, "traces: 3; behavior: pass; system: pass; service: pass\n");
}

#[test]
fn explore_over_the_bound_exits_three() {
    let mut c = bookstore("requests.jsonl", Mode::Explore);
    c.max_transitions = 1;
    let o = invoke(&c);
    assert_eq!(o.code, EXIT_BOUND);
    assert!(o.err.contains("limit"), "{}", o.err);
}

#[test]
fn run_then_check_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.jsonl");
    for requests in ["requests.jsonl", "requests_infeasible.jsonl", "requests_mixed.jsonl"] {
        let mut run = bookstore(requests, Mode::Run);
        run.seed = 11;
        run.trace_out = Some(path.clone());
        assert_eq!(invoke(&run).code, EXIT_OK);

        let mut check = bookstore(requests, Mode::Check);
        check.trace_in = Some(path.clone());
        let o = invoke(&check);
        assert_eq!(o.code, EXIT_OK, "{}{}", o.out, o.err);
        assert!(o.out.ends_with("conformant\n"));

        // The rebuilt trace is the executed one, configuration for configuration.
        let engine = Engine::new(bookstore_workflow(), bookstore_registry()).unwrap();
        let reqs = read_requests(&fixture(&format!("bookstore/{requests}"))).unwrap();
        let original = engine.run(&reqs, 11).unwrap();
        let (rebuilt, v) =
            rebuild_trace(engine.initial_configuration(&reqs).unwrap(), &read_trace_records(&path).unwrap());
        assert!(v.is_empty());
        assert!(rebuilt.configurations().eq(original.configurations()));
        assert!(rebuilt.labels().eq(original.labels()));
    }
}

#[test]
fn edited_state_is_a_violation_at_its_transition() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.jsonl");
    let mut run = bookstore("requests.jsonl", Mode::Run);
    run.trace_out = Some(path.clone());
    assert_eq!(invoke(&run).code, EXIT_OK);
    let text = fs::read_to_string(&path).unwrap();
    // Record 2 grants the instance; claim it was denied instead.
    let mut lines: Vec<String> = text.lines().map(str::to_owned).collect();
    assert!(lines[2].contains("\"state\":\"Granted\""));
    lines[2] = lines[2].replacen("\"state\":\"Granted\"", "\"state\":\"Denied\"", 1);
    fs::write(&path, lines.join("\n") + "\n").unwrap();

    let mut check = bookstore("requests.jsonl", Mode::Check);
    check.trace_in = Some(path);
    let o = invoke(&check);
    assert_eq!(o.code, EXIT_VIOLATION);
    let records: Vec<serde_json::Value> = o.out.lines().skip(1).map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(!records.is_empty());
    assert!(records.iter().any(|r| r["transition"] == 2 && r["property"] == "behavior.rule-replay"));
}

#[test]
fn empty_trace_is_vacuously_conformant_and_missing_trace_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.jsonl");
    fs::write(&path, "").unwrap();
    let mut check = bookstore("requests.jsonl", Mode::Check);
    check.trace_in = Some(path);
    assert_eq!(invoke(&check).code, EXIT_OK);
    check.trace_in = Some(dir.path().join("absent.jsonl"));
    assert_eq!(invoke(&check).code, EXIT_INPUT);
    let garbage = dir.path().join("garbage.jsonl");
    fs::write(&garbage, "not json\n").unwrap();
    check.trace_in = Some(garbage);
    assert_eq!(invoke(&check).code, EXIT_INPUT);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_wsoe");
    let args = |sub: &str, req: &str| {
        vec![
            sub.to_owned(),
            "--workflow".into(),
            fixture("bookstore/workflow.json").display().to_string(),
            "--registry".into(),
            fixture("bookstore/registry.jsonl").display().to_string(),
            "--requests".into(),
            fixture(&format!("bookstore/{req}")).display().to_string(),
        ]
    };
    let out = Command::new(bin).args(args("run", "requests.jsonl")).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("c1: Completed"));
    let mut a = args("explore", "requests.jsonl");
    a.extend(["--max-transitions".into(), "1".into()]);
    assert_eq!(Command::new(bin).args(a).output().unwrap().status.code(), Some(3));
    let mut a = args("run", "requests.jsonl");
    a[4] = "/nonexistent/registry.jsonl".into();
    let out = Command::new(bin).args(a).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/registry.jsonl"));
}
