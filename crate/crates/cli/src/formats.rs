//! Line-delimited JSON readers and writers for requests and traces.
//! Workflows and registries are parsed by the core crate.

use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use wsoe_core::model::ActorChange;
use wsoe_core::{Configuration, Label, Message, PropertyId, RuleId, Trace, Transition, Violation, WsoRequest};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
}

/// One transition of a trace file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub index: usize,
    pub rule: RuleId,
    pub consumed: Message,
    pub emitted: Vec<Message>,
    pub changed: Vec<ActorChange>,
}

impl TraceRecord {
    pub fn of(index: usize, t: &Transition) -> Self {
        Self {
            index,
            rule: t.label.rule,
            consumed: t.label.message.clone(),
            emitted: t.emitted.clone(),
            changed: t.source.diff(&t.target),
        }
    }
}

fn read(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|e| FormatError::Io { path: path.display().to_string(), message: e.to_string() })
}

fn jsonl<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<Vec<T>, FormatError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| FormatError::Parse {
                path: path.display().to_string(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Requests, one per line; client ids must be unique.
pub fn read_requests(path: &Path) -> Result<Vec<WsoRequest>, FormatError> {
    let text = read(path)?;
    let requests: Vec<WsoRequest> = jsonl(path, &text)?;
    let mut seen = BTreeSet::new();
    for (i, r) in requests.iter().enumerate() {
        if !seen.insert(r.client_id().clone()) {
            return Err(FormatError::Parse {
                path: path.display().to_string(),
                line: i + 1,
                message: format!("duplicate client_id `{}`", r.client_id()),
            });
        }
    }
    Ok(requests)
}

pub fn requests_to_jsonl(requests: &[WsoRequest]) -> String {
    requests.iter().map(|r| serde_json::to_string(r).expect("serializable") + "\n").collect()
}

pub fn trace_to_jsonl(trace: &Trace) -> String {
    trace
        .transitions()
        .iter()
        .enumerate()
        .map(|(i, t)| serde_json::to_string(&TraceRecord::of(i, t)).expect("serializable") + "\n")
        .collect()
}

pub fn write_trace(path: &Path, trace: &Trace) -> io::Result<()> {
    let mut f = io::BufWriter::new(fs::File::create(path)?);
    f.write_all(trace_to_jsonl(trace).as_bytes())?;
    f.flush()
}

pub fn read_trace_records(path: &Path) -> Result<Vec<TraceRecord>, FormatError> {
    let text = read(path)?;
    jsonl(path, &text)
}

/// Rebuilds a trace from its records, starting at `initial`.
///
/// Records that cannot be applied as written are reported as replay
/// violations. A recorded `before` snapshot that disagrees with the rebuilt
/// configuration is reported and then ignored; a message that is not
/// deliverable ends reconstruction.
pub fn rebuild_trace(initial: Configuration, records: &[TraceRecord]) -> (Trace, Vec<Violation>) {
    let mut violations = Vec::new();
    let mut report = |i: usize, w: String| {
        violations.push(Violation { property: PropertyId::RuleReplay, trace: 0, transition: Some(i), witness: w })
    };
    let mut config = Arc::new(initial);
    let mut transitions = Vec::new();
    for (i, rec) in records.iter().enumerate() {
        if rec.index != i {
            report(i, format!("record {i} carries index {}", rec.index));
        }
        let current = config.snapshots();
        let changes: Vec<ActorChange> = rec
            .changed
            .iter()
            .map(|c| {
                let actual = current.get(&c.actor).cloned();
                if actual != c.before {
                    report(i, format!("recorded prior state of {} differs from the replayed one", c.actor));
                }
                ActorChange { actor: c.actor.clone(), before: actual, after: c.after.clone() }
            })
            .collect();
        match config.apply_recorded(&rec.consumed, &rec.emitted, &changes) {
            Ok(next) => {
                let next = Arc::new(next);
                transitions.push(Transition {
                    source: Arc::clone(&config),
                    label: Label { rule: rec.rule, message: rec.consumed.clone() },
                    target: Arc::clone(&next),
                    emitted: rec.emitted.clone(),
                });
                config = next;
            }
            Err(e) => {
                report(i, format!("cannot apply record: {e}"));
                break;
            }
        }
    }
    let trace = Trace::new(transitions).expect("built adjacent");
    (trace, violations)
}

pub fn violations_to_jsonl(violations: &[Violation]) -> String {
    violations.iter().map(|v| serde_json::to_string(v).expect("serializable") + "\n").collect()
}
