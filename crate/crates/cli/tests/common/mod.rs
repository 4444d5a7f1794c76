#![allow(dead_code)]

use std::path::PathBuf;

use wsoe_cli::{execute, Mode, RunConfig};

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

pub fn golden(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(rel)
}

pub fn bookstore(requests: &str, mode: Mode) -> RunConfig {
    let mut c = RunConfig::new(
        fixture("bookstore/workflow.json"),
        fixture("bookstore/registry.jsonl"),
        fixture(&format!("bookstore/{requests}")),
    );
    c.mode = mode;
    c
}

pub fn small(workflow: &str, requests: &str, mode: Mode) -> RunConfig {
    let mut c = RunConfig::new(
        fixture(&format!("small/{workflow}")),
        fixture("small/registry.jsonl"),
        fixture(&format!("small/{requests}")),
    );
    c.mode = mode;
    c
}

pub struct Outcome {
    pub code: i32,
    pub out: String,
    pub err: String,
}

pub fn invoke(config: &RunConfig) -> Outcome {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = execute(config, &mut out, &mut err);
    Outcome { code, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() }
}

/// Problems with a BookStore trace's rule sequence: creation, selection and
/// grant first; then per activity invoke, call and return in that order,
/// one acknowledgement and one notification each; the final notification
/// completing the instance.
pub fn bookstore_rule_shape(records: &[serde_json::Value], activities: usize) -> Vec<String> {
    let rule = |r: &serde_json::Value| r["rule"].as_str().unwrap_or_default().to_owned();
    let rules: Vec<String> = records.iter().map(rule).collect();
    let mut bad = Vec::new();
    if rules.len() != 3 + 5 * activities {
        bad.push(format!("{} transitions, expected {}", rules.len(), 3 + 5 * activities));
    }
    if rules.iter().take(3).map(String::as_str).ne(["R1_WsoimCreate", "R5_SsSelect", "R2b_SelectGranted"]) {
        bad.push(format!("starts with {:?}", &rules[..rules.len().min(3)]));
    }
    let count = |p: &str| rules.iter().filter(|r| r.starts_with(p)).count();
    for p in ["R6_", "R8_", "R7_", "R3_"] {
        if count(p) != activities {
            bad.push(format!("{} {p} transitions", count(p)));
        }
    }
    if count("R4b_") != activities - 1
        || count("R4a_") != 1
        || rules.last().map(String::as_str) != Some("R4a_NotifyAllReturned")
    {
        bad.push("notifications do not end in exactly one completion".into());
    }
    if count("R2a_") + count("R1_") + count("R5_") + count("R2b_") != 3 {
        bad.push("selection stage repeats".into());
    }
    // Per activity: invoke, then service call, then return.
    let mut order: std::collections::BTreeMap<String, Vec<String>> = Default::default();
    for r in records {
        let rl = rule(r);
        let actor = match &rl[..3] {
            "R6_" | "R7_" => r["consumed"]["receiver"].as_str(),
            "R8_" => r["consumed"]["sender"].as_str(),
            _ => None,
        };
        if let Some(a) = actor {
            order.entry(a.to_owned()).or_default().push(rl[..2].to_owned());
        }
    }
    if order.len() != activities {
        bad.push(format!("{} activities served", order.len()));
    }
    for (a, seq) in order {
        if seq != ["R6", "R8", "R7"] {
            bad.push(format!("{a} ran {seq:?}"));
        }
    }
    bad
}
