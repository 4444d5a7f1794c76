//! A read-only service registry indexed by ontology.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Deserialize;

use crate::model::QoSSpec;
use crate::selection::CandidateService;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegistryError {
    #[error("cannot read registry {path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: duplicate candidate id `{candidate_id}`")]
    DuplicateId { line: usize, candidate_id: String },
    #[error("line {line}: candidate `{candidate_id}` has negative {field}")]
    NegativeQos { line: usize, candidate_id: String, field: &'static str },
}

/// Candidates grouped by ontology, each list ordered by candidate id.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Registry {
    entries: BTreeMap<String, Vec<CandidateService>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    candidate_id: String,
    ontology: String,
    response_time_ms: serde_json::Number,
    cost_cents: serde_json::Number,
}

impl Registry {
    /// Builds a registry, rejecting duplicate candidate ids.
    pub fn from_candidates(candidates: impl IntoIterator<Item = CandidateService>) -> Result<Self, RegistryError> {
        let mut seen = BTreeSet::new();
        let mut entries: BTreeMap<String, Vec<CandidateService>> = BTreeMap::new();
        for (i, c) in candidates.into_iter().enumerate() {
            if !seen.insert(c.candidate_id.clone()) {
                return Err(RegistryError::DuplicateId { line: i + 1, candidate_id: c.candidate_id });
            }
            entries.entry(c.ontology.clone()).or_default().push(c);
        }
        for list in entries.values_mut() {
            list.sort_by(|a, b| a.candidate_id.cmp(&b.candidate_id));
        }
        Ok(Self { entries })
    }

    /// Parses line-delimited JSON records, one candidate per non-blank line.
    pub fn parse(text: &str) -> Result<Self, RegistryError> {
        let mut seen = BTreeSet::new();
        let mut candidates = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let rec: Record =
                serde_json::from_str(raw).map_err(|e| RegistryError::Parse { line, message: e.to_string() })?;
            let response_time_ms = non_negative(&rec.response_time_ms, line, &rec.candidate_id, "response_time_ms")?;
            let cost_cents = non_negative(&rec.cost_cents, line, &rec.candidate_id, "cost_cents")?;
            if !seen.insert(rec.candidate_id.clone()) {
                return Err(RegistryError::DuplicateId { line, candidate_id: rec.candidate_id });
            }
            candidates.push(CandidateService {
                candidate_id: rec.candidate_id,
                ontology: rec.ontology,
                qos: QoSSpec::new(response_time_ms, cost_cents),
            });
        }
        Self::from_candidates(candidates)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, RegistryError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| RegistryError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::parse(&text)
    }

    /// Serializes back to the line-delimited record format, ordered by
    /// ontology then candidate id.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for c in self.iter() {
            let rec = serde_json::json!({
                "candidate_id": c.candidate_id,
                "ontology": c.ontology,
                "response_time_ms": c.qos.response_time_ms,
                "cost_cents": c.qos.cost_cents,
            });
            out.push_str(&rec.to_string());
            out.push('\n');
        }
        out
    }

    /// Candidates of `ontology` whose advertised QoS fits `max_qos`
    /// (every candidate when no bound is given). Unknown ontologies yield
    /// an empty list.
    pub fn query(&self, ontology: &str, max_qos: Option<QoSSpec>) -> Vec<&CandidateService> {
        self.candidates(ontology).iter().filter(|c| max_qos.is_none_or(|m| c.qos.fits_within(&m))).collect()
    }

    pub fn candidates(&self, ontology: &str) -> &[CandidateService] {
        self.entries.get(ontology).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn knows(&self, ontology: &str) -> bool {
        self.entries.contains_key(ontology)
    }

    pub fn ontologies(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn find(&self, candidate_id: &str) -> Option<&CandidateService> {
        self.iter().find(|c| c.candidate_id == candidate_id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &CandidateService> {
        self.entries.values().flatten()
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Loads a registry file.
pub fn load_registry(path: impl AsRef<Path>) -> Result<Registry, RegistryError> {
    Registry::load(path)
}

fn non_negative(
    n: &serde_json::Number,
    line: usize,
    candidate_id: &str,
    field: &'static str,
) -> Result<u64, RegistryError> {
    if let Some(v) = n.as_u64() {
        return Ok(v);
    }
    match n.as_i64() {
        Some(v) if v < 0 => Err(RegistryError::NegativeQos { line, candidate_id: candidate_id.to_owned(), field }),
        _ if n.as_f64().is_some_and(|v| v < 0.0) => {
            Err(RegistryError::NegativeQos { line, candidate_id: candidate_id.to_owned(), field })
        }
        _ => Err(RegistryError::Parse { line, message: format!("{field} must be a non-negative integer, got {n}") }),
    }
}
