//! QoS aggregation, budget allocation over registry candidates, and the
//! parameter routing between an instance and its activities.
//!
//! Activities run in parallel, so an instance costs the sum of its
//! services' costs and responds as slowly as its slowest service.
//!
//! Allocation picks one candidate per activity such that the aggregate fits
//! the request's budget (inclusive on both axes). Among feasible
//! assignments the winner has the lowest total cost, then the lowest
//! maximum response time, then the lexicographically smallest sequence of
//! candidate ids in activity order. Small instances are searched
//! exhaustively; above [`EXHAUSTIVE_LIMIT`] combinations a per-activity
//! greedy pass is used. Because response time aggregates by `max`, filtering
//! each activity by the time bound and then taking its cheapest candidate is
//! already optimal, so both regimes agree.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{ParamMap, QoSSpec};
use crate::registry::Registry;

/// Above this many candidate combinations the greedy regime is used.
pub const EXHAUSTIVE_LIMIT: u128 = 4096;

/// A registry entry: a concrete service for some ontology.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CandidateService {
    pub candidate_id: String,
    pub ontology: String,
    pub qos: QoSSpec,
}

/// One activity slot of a workflow: its name and the ontology it needs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ActivityDef {
    pub name: String,
    pub ontology: String,
}

impl ActivityDef {
    pub fn new(name: impl Into<String>, ontology: impl Into<String>) -> Self {
        Self { name: name.into(), ontology: ontology.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Granted,
    Denied,
}

/// Outcome of [`qos_allocate`]. `per_activity` is empty unless granted and
/// maps each activity to its chosen candidate and allocated QoS.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllocationResult {
    pub decision: Decision,
    pub per_activity: BTreeMap<String, (CandidateService, QoSSpec)>,
}

impl AllocationResult {
    fn denied() -> Self {
        Self { decision: Decision::Denied, per_activity: BTreeMap::new() }
    }

    pub fn is_granted(&self) -> bool {
        self.decision == Decision::Granted
    }

    /// Aggregate QoS of the chosen services; zero when denied.
    pub fn aggregate(&self) -> QoSSpec {
        aggregate_qos(self.per_activity.values().map(|(_, q)| *q))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SelectionError {
    #[error("no registry entry provides ontology `{0}`")]
    UnknownOntology(String),
    #[error("cannot allocate QoS for a workflow without activities")]
    NoActivities,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParamError {
    #[error("activity `{0}` has no output parameters yet")]
    IncompleteOutputs(String),
}

/// Max of response times, sum of costs. The empty aggregate is zero.
pub fn aggregate_qos(bindings: impl IntoIterator<Item = QoSSpec>) -> QoSSpec {
    bindings.into_iter().fold(QoSSpec::ZERO, |acc, q| QoSSpec {
        response_time_ms: acc.response_time_ms.max(q.response_time_ms),
        cost_cents: acc.cost_cents.saturating_add(q.cost_cents),
    })
}

/// Chooses one candidate per activity under `request_qos`, or denies.
pub fn qos_allocate(
    request_qos: QoSSpec,
    activities: &[ActivityDef],
    registry: &Registry,
) -> Result<AllocationResult, SelectionError> {
    let lists = candidate_lists(activities, registry)?;
    let combinations = lists.iter().map(|l| l.len() as u128).try_fold(1u128, |acc, n| acc.checked_mul(n));
    let chosen = match combinations {
        Some(n) if n <= EXHAUSTIVE_LIMIT => exhaustive(request_qos, &lists),
        _ => greedy(request_qos, &lists),
    };
    Ok(match chosen {
        Some(picks) => AllocationResult {
            decision: Decision::Granted,
            per_activity: activities.iter().zip(picks).map(|(a, c)| (a.name.clone(), (c.clone(), c.qos))).collect(),
        },
        None => AllocationResult::denied(),
    })
}

/// The cheapest candidate for every activity, ignoring the budget.
pub fn min_cost_assignment<'r>(
    activities: &[ActivityDef],
    registry: &'r Registry,
) -> Result<Vec<&'r CandidateService>, SelectionError> {
    let lists = candidate_lists(activities, registry)?;
    Ok(lists
        .iter()
        .map(|l| l.iter().min_by_key(|c| (c.qos.cost_cents, c.qos.response_time_ms, &c.candidate_id)).unwrap())
        .collect())
}

fn candidate_lists<'r>(
    activities: &[ActivityDef],
    registry: &'r Registry,
) -> Result<Vec<&'r [CandidateService]>, SelectionError> {
    if activities.is_empty() {
        return Err(SelectionError::NoActivities);
    }
    activities
        .iter()
        .map(|a| {
            let list = registry.candidates(&a.ontology);
            if list.is_empty() {
                Err(SelectionError::UnknownOntology(a.ontology.clone()))
            } else {
                Ok(list)
            }
        })
        .collect()
}

type Rank<'a> = (u64, u64, Vec<&'a str>);

fn rank<'a>(picks: &[&'a CandidateService]) -> Rank<'a> {
    let agg = aggregate_qos(picks.iter().map(|c| c.qos));
    (agg.cost_cents, agg.response_time_ms, picks.iter().map(|c| c.candidate_id.as_str()).collect())
}

fn exhaustive<'a>(bound: QoSSpec, lists: &[&'a [CandidateService]]) -> Option<Vec<&'a CandidateService>> {
    // Candidates that break the bound on their own can never be part of a
    // feasible assignment.
    let usable: Vec<Vec<&CandidateService>> =
        lists.iter().map(|l| l.iter().filter(|c| c.qos.fits_within(&bound)).collect()).collect();
    if usable.iter().any(Vec::is_empty) {
        return None;
    }
    let mut odometer = vec![0usize; usable.len()];
    let mut best: Option<(Rank<'a>, Vec<&'a CandidateService>)> = None;
    loop {
        let picks: Vec<&CandidateService> = odometer.iter().zip(&usable).map(|(&i, l)| l[i]).collect();
        if aggregate_qos(picks.iter().map(|c| c.qos)).fits_within(&bound) {
            let r = rank(&picks);
            if best.as_ref().is_none_or(|(b, _)| r < *b) {
                best = Some((r, picks));
            }
        }
        // Advance the rightmost digit that still has room.
        let mut pos = usable.len();
        loop {
            if pos == 0 {
                return best.map(|(_, p)| p);
            }
            pos -= 1;
            odometer[pos] += 1;
            if odometer[pos] < usable[pos].len() {
                break;
            }
            odometer[pos] = 0;
        }
    }
}

fn greedy<'a>(bound: QoSSpec, lists: &[&'a [CandidateService]]) -> Option<Vec<&'a CandidateService>> {
    let mut cheapest = Vec::with_capacity(lists.len());
    for list in lists {
        let fast: Vec<&CandidateService> =
            list.iter().filter(|c| c.qos.response_time_ms <= bound.response_time_ms).collect();
        let min_cost = fast.iter().map(|c| c.qos.cost_cents).min()?;
        cheapest.push(fast.into_iter().filter(|c| c.qos.cost_cents == min_cost).collect::<Vec<_>>());
    }
    // Lowest achievable max response time among cheapest assignments.
    let max_rt = cheapest.iter().map(|l| l.iter().map(|c| c.qos.response_time_ms).min().unwrap()).max().unwrap_or(0);
    let picks: Vec<&CandidateService> = cheapest
        .iter()
        .map(|l| {
            *l.iter()
                .filter(|c| c.qos.response_time_ms <= max_rt)
                .min_by(|a, b| a.candidate_id.cmp(&b.candidate_id))
                .unwrap()
        })
        .collect();
    aggregate_qos(picks.iter().map(|c| c.qos)).fits_within(&bound).then_some(picks)
}

/// Splits instance inputs across activities. A key `"<activity>.<name>"`
/// goes only to that activity as `<name>`; the activity may be written with
/// or without its spaces. Any other key is given to every activity.
pub fn map_input_parameters<'a>(
    instance_inputs: &ParamMap,
    activity_names: impl IntoIterator<Item = &'a str>,
) -> BTreeMap<String, ParamMap> {
    let names: Vec<&str> = activity_names.into_iter().collect();
    let mut out: BTreeMap<String, ParamMap> = names.iter().map(|n| (n.to_string(), ParamMap::new())).collect();
    for (key, value) in instance_inputs {
        let routed = key.split_once('.').and_then(|(prefix, rest)| {
            names.iter().find(|n| **n == prefix || compact(n) == prefix).map(|n| (*n, rest))
        });
        match routed {
            Some((name, rest)) => {
                out.get_mut(name).unwrap().insert(rest.to_owned(), value.clone());
            }
            None => {
                for params in out.values_mut() {
                    params.insert(key.clone(), value.clone());
                }
            }
        }
    }
    out
}

/// Merges activity outputs into instance outputs, prefixing every key with
/// `"<activity>."`.
pub fn map_output_parameters(activity_outputs: &BTreeMap<String, Option<ParamMap>>) -> Result<ParamMap, ParamError> {
    let mut out = ParamMap::new();
    for (name, outputs) in activity_outputs {
        let outputs = outputs.as_ref().ok_or_else(|| ParamError::IncompleteOutputs(name.clone()))?;
        for (k, v) in outputs {
            out.insert(format!("{name}.{k}"), v.clone());
        }
    }
    Ok(out)
}

/// An activity name with its whitespace removed, as accepted in input keys.
pub fn compact(name: &str) -> String {
    name.chars().filter(|c| !c.is_whitespace()).collect()
}
