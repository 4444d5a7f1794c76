//! Checkers for traces and trace sets, in three layers:
//!
//! * **behavior**: every configuration is well formed, every message matches
//!   the message table, every transition is reproduced by the rules;
//! * **system**: each request creates exactly one correctly initialised
//!   instance, instance lifecycles progress and stay monotone, requests and
//!   activity sets stay constant, and bindings exist only on granted
//!   instances;
//! * **service**: each request is either accepted within its budget or
//!   rejected because no assignment could meet it, never both.
//!
//! Eventual properties are judged on the finite traces handed in, which
//! the engine only produces maximal.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::engine::Engine;
use crate::model::{Address, ClientId, Configuration, InstanceState, MessageBody, Trace, WsoInstance, WsoRequest};
use crate::registry::Registry;
use crate::selection::{aggregate_qos, ActivityDef};

/// A checked property. Each id names one clause of one layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "&'static str", try_from = "String")]
pub enum PropertyId {
    StateDomain,
    MessageTable,
    RuleReplay,
    InstanceSuccession,
    ActivitySuccession,
    SameInitial,
    UniqueCreation,
    InitialParameters,
    EventualDecision,
    EventualCompletion,
    RequestConstancy,
    MonotoneLifecycle,
    DeniedUnbound,
    BoundImpliesGranted,
    Dichotomy,
    GrantFeasibility,
    RejectionJustified,
}

impl PropertyId {
    const ALL: [PropertyId; 17] = [
        PropertyId::StateDomain,
        PropertyId::MessageTable,
        PropertyId::RuleReplay,
        PropertyId::InstanceSuccession,
        PropertyId::ActivitySuccession,
        PropertyId::SameInitial,
        PropertyId::UniqueCreation,
        PropertyId::InitialParameters,
        PropertyId::EventualDecision,
        PropertyId::EventualCompletion,
        PropertyId::RequestConstancy,
        PropertyId::MonotoneLifecycle,
        PropertyId::DeniedUnbound,
        PropertyId::BoundImpliesGranted,
        PropertyId::Dichotomy,
        PropertyId::GrantFeasibility,
        PropertyId::RejectionJustified,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PropertyId::StateDomain => "behavior.state-domain",
            PropertyId::MessageTable => "behavior.message-table",
            PropertyId::RuleReplay => "behavior.rule-replay",
            PropertyId::InstanceSuccession => "behavior.instance-succession",
            PropertyId::ActivitySuccession => "behavior.activity-succession",
            PropertyId::SameInitial => "set.same-initial",
            PropertyId::UniqueCreation => "system.unique-creation",
            PropertyId::InitialParameters => "system.initial-parameters",
            PropertyId::EventualDecision => "system.eventually-granted-or-denied",
            PropertyId::EventualCompletion => "system.granted-eventually-completed",
            PropertyId::RequestConstancy => "system.request-and-activities-constant",
            PropertyId::MonotoneLifecycle => "system.monotone-lifecycle",
            PropertyId::DeniedUnbound => "system.denied-has-no-bindings",
            PropertyId::BoundImpliesGranted => "system.bound-implies-granted",
            PropertyId::Dichotomy => "service.accepted-xor-rejected",
            PropertyId::GrantFeasibility => "service.accepted-within-budget",
            PropertyId::RejectionJustified => "service.rejected-only-if-infeasible",
        }
    }

    pub fn layer(self) -> Option<Layer> {
        let s = self.as_str();
        if s.starts_with("behavior.") {
            Some(Layer::Behavior)
        } else if s.starts_with("system.") {
            Some(Layer::System)
        } else if s.starts_with("service.") {
            Some(Layer::Service)
        } else {
            None
        }
    }
}

impl fmt::Display for PropertyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<PropertyId> for &'static str {
    fn from(p: PropertyId) -> Self {
        p.as_str()
    }
}

impl TryFrom<String> for PropertyId {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        PropertyId::ALL.into_iter().find(|p| p.as_str() == s).ok_or_else(|| format!("unknown property `{s}`"))
    }
}

/// One failed property with its location.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub property: PropertyId,
    pub trace: usize,
    /// Transition index, when the failure is tied to one.
    pub transition: Option<usize>,
    pub witness: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at trace {}", self.property, self.trace)?;
        if let Some(t) = self.transition {
            write!(f, ", transition {t}")?;
        }
        write!(f, ": {}", self.witness)
    }
}

/// Result of a check; it passes exactly when no violation was found.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    violations: Vec<Violation>,
}

impl Verdict {
    pub fn from_violations(violations: Vec<Violation>) -> Self {
        Self { violations }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    pub fn has(&self, property: PropertyId) -> bool {
        self.violations.iter().any(|v| v.property == property)
    }

    fn push(&mut self, property: PropertyId, trace: usize, transition: Option<usize>, witness: impl Into<String>) {
        self.violations.push(Violation { property, trace, transition, witness: witness.into() });
    }

    fn extend(&mut self, other: Verdict) {
        self.violations.extend(other.violations);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Layer {
    Behavior,
    System,
    Service,
}

/// Verdicts of all three layers over one trace set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PyramidReport {
    pub behavior: Verdict,
    pub system: Verdict,
    pub service: Verdict,
}

impl PyramidReport {
    /// Every layer passed.
    pub fn passed(&self) -> bool {
        self.behavior.passed() && self.system.passed() && self.service.passed()
    }

    /// No layer passed while the one above it failed.
    pub fn implications_hold(&self) -> bool {
        (!self.behavior.passed() || self.system.passed()) && (!self.system.passed() || self.service.passed())
    }

    /// The lowest failing layer.
    pub fn first_broken(&self) -> Option<Layer> {
        self.layers().into_iter().find(|(_, v)| !v.passed()).map(|(l, _)| l)
    }

    pub fn layers(&self) -> [(Layer, &Verdict); 3] {
        [(Layer::Behavior, &self.behavior), (Layer::System, &self.system), (Layer::Service, &self.service)]
    }

    /// All violations of all layers.
    pub fn verdict(&self) -> Verdict {
        let mut v = self.behavior.clone();
        v.extend(self.system.clone());
        v.extend(self.service.clone());
        v
    }
}

/// Behavior of one trace, replayed against `engine`'s rules.
pub fn check_behavior(engine: &Engine, trace: &Trace) -> Verdict {
    behavior_of(engine, 0, trace)
}

/// Behavior of every trace of a set.
pub fn check_behavior_all(engine: &Engine, traces: &[Trace]) -> Verdict {
    let mut v = Verdict::default();
    for (i, t) in traces.iter().enumerate() {
        v.extend(behavior_of(engine, i, t));
    }
    v
}

fn behavior_of(engine: &Engine, ti: usize, trace: &Trace) -> Verdict {
    let mut v = Verdict::default();
    for (k, config) in trace.configurations().enumerate() {
        // Configuration k is the source of transition k and the target of k-1.
        let at = Some(k.saturating_sub(1).min(trace.len().saturating_sub(1)));
        for w in state_domain(config) {
            v.push(PropertyId::StateDomain, ti, at, w);
        }
        for w in message_closure(config) {
            v.push(PropertyId::MessageTable, ti, at, w);
        }
    }
    for (i, t) in trace.transitions().iter().enumerate() {
        for m in std::iter::once(&t.label.message).chain(&t.emitted) {
            if let Err(e) = m.check_table() {
                v.push(PropertyId::MessageTable, ti, Some(i), format!("{m}: {e}"));
            }
        }
        for (c, before) in inst_map(&t.source) {
            match t.target.get_wsoi(c) {
                None => v.push(PropertyId::InstanceSuccession, ti, Some(i), format!("instance {c} vanished")),
                Some(after) => {
                    if !before.state.may_become(after.state) {
                        v.push(
                            PropertyId::InstanceSuccession,
                            ti,
                            Some(i),
                            format!("instance {c} moved {:?} -> {:?}", before.state, after.state),
                        );
                    }
                    for aa in before.activities() {
                        if let Ok(next) = after.get_aa(&aa.aa_name) {
                            if !aa.state.may_become(next.state) {
                                v.push(
                                    PropertyId::ActivitySuccession,
                                    ti,
                                    Some(i),
                                    format!("activity {c}/{} moved {:?} -> {:?}", aa.aa_name, aa.state, next.state),
                                );
                            }
                        }
                    }
                }
            }
        }
        match engine.step(&t.source, &t.label.message) {
            Err(e) => v.push(PropertyId::RuleReplay, ti, Some(i), format!("replaying {}: {e}", t.label)),
            Ok(replayed) => {
                if replayed.label.rule != t.label.rule {
                    v.push(
                        PropertyId::RuleReplay,
                        ti,
                        Some(i),
                        format!("recorded {} but the rules fire {}", t.label.rule, replayed.label.rule),
                    );
                } else if replayed.emitted != t.emitted {
                    v.push(PropertyId::RuleReplay, ti, Some(i), format!("{} emits different messages", t.label));
                } else if *replayed.target != *t.target {
                    let changed: Vec<String> =
                        replayed.target.diff(&t.target).into_iter().map(|c| c.actor.to_string()).collect();
                    let what = if changed.is_empty() { "undelivered messages".to_owned() } else { changed.join(", ") };
                    v.push(
                        PropertyId::RuleReplay,
                        ti,
                        Some(i),
                        format!("{} yields a different target: {what}", t.label),
                    );
                }
            }
        }
    }
    v
}

fn inst_map(config: &Configuration) -> impl Iterator<Item = (&ClientId, &WsoInstance)> {
    config.instances().map(|i| (i.client_id(), i))
}

fn state_domain(config: &Configuration) -> Vec<String> {
    let mut out = Vec::new();
    for inst in config.instances() {
        let c = inst.client_id();
        if inst.output_parameters.is_some() && inst.state != InstanceState::Completed {
            out.push(format!("instance {c} has outputs in state {:?}", inst.state));
        }
        for aa in inst.activities() {
            let ws = &aa.ws;
            if aa.wsoi_id != *c || ws.wsoi_id != *c || ws.aa_name != aa.aa_name {
                out.push(format!("activity {c}/{} is linked to another instance or activity", aa.aa_name));
            }
            if !ws.is_well_formed() {
                out.push(format!("activity {c}/{} has a half-set binding", aa.aa_name));
            }
            if aa.output_parameters.is_some() && aa.state != crate::model::ActivityState::Returned {
                out.push(format!("activity {c}/{} has outputs in state {:?}", aa.aa_name, aa.state));
            }
        }
    }
    out
}

fn message_closure(config: &Configuration) -> Vec<String> {
    let cast = config.cast();
    let known = |a: &Address| match a {
        Address::Client(c) => config.is_declared_client(c),
        other => cast.contains(other),
    };
    let mut out = Vec::new();
    for m in config.all_messages() {
        if let Err(e) = m.check_table() {
            out.push(format!("{m}: {e}"));
        }
        for a in [&m.sender, &m.receiver] {
            if !known(a) {
                out.push(format!("{m}: address {a} is neither an actor nor a declared client"));
            }
        }
    }
    out
}

/// Requests seeded in a configuration, by client.
fn seeded_requests(config: &Configuration) -> BTreeMap<ClientId, WsoRequest> {
    config
        .undelivered_requests()
        .into_iter()
        .filter_map(|m| match &m.body {
            MessageBody::WsoReq { client_id, ontology, qos, input_parameters } => Some((
                client_id.clone(),
                WsoRequest::new(client_id.clone(), ontology.clone(), input_parameters.clone(), *qos),
            )),
            _ => None,
        })
        .collect()
}

fn same_initial(traces: &[Trace], v: &mut Verdict) {
    let Some(first) = traces.iter().find_map(Trace::initial) else { return };
    for (ti, t) in traces.iter().enumerate() {
        if t.initial().is_some_and(|c| c != first) {
            v.push(PropertyId::SameInitial, ti, Some(0), "initial configuration differs from the first trace's");
        }
    }
}

/// System properties over a trace set sharing one initial configuration.
pub fn check_system(engine: &Engine, traces: &[Trace]) -> Verdict {
    let mut v = Verdict::default();
    same_initial(traces, &mut v);
    let names: Vec<&str> = engine.workflow().activity_names().collect();
    for (ti, trace) in traces.iter().enumerate() {
        let Some(initial) = trace.initial() else { continue };
        let seeded = seeded_requests(initial);
        let configs: Vec<&Configuration> = trace.configurations().collect();

        // Creation: exactly one transition per seeded request, yielding the
        // prescribed initial instance.
        let mut created: BTreeMap<ClientId, Vec<usize>> = BTreeMap::new();
        for (i, t) in trace.transitions().iter().enumerate() {
            for inst in t.target.instances() {
                if t.source.get_wsoi(inst.client_id()).is_none() {
                    created.entry(inst.client_id().clone()).or_default().push(i);
                }
            }
        }
        for (c, req) in &seeded {
            let stages = created.get(c).map(Vec::as_slice).unwrap_or(&[]);
            match stages {
                [i] => {
                    let t = &trace.transitions()[*i];
                    let consumes_request =
                        matches!(&t.label.message.body, MessageBody::WsoReq { client_id, .. } if client_id == c);
                    if !consumes_request {
                        v.push(
                            PropertyId::UniqueCreation,
                            ti,
                            Some(*i),
                            format!("instance {c} created by {}", t.label),
                        );
                    }
                    let inst = t.target.get_wsoi(c).expect("created");
                    for w in initial_parameter_faults(inst, req, &names) {
                        v.push(PropertyId::InitialParameters, ti, Some(*i), w);
                    }
                }
                [] if initial.get_wsoi(c).is_none() => {
                    v.push(PropertyId::UniqueCreation, ti, None, format!("request {c} is never processed"))
                }
                [] => {}
                many => v.push(
                    PropertyId::UniqueCreation,
                    ti,
                    Some(many[1]),
                    format!("request {c} creates an instance at stages {many:?}"),
                ),
            }
        }
        for (c, stages) in &created {
            if !seeded.contains_key(c) {
                v.push(PropertyId::UniqueCreation, ti, Some(stages[0]), format!("instance {c} has no seeded request"));
            }
        }

        // Eventualities, judged from the end of the trace backwards.
        let clients: Vec<ClientId> =
            configs.iter().flat_map(|c| c.instances().map(|i| i.client_id().clone())).collect();
        let mut clients = clients;
        clients.sort();
        clients.dedup();
        for c in &clients {
            let states: Vec<Option<InstanceState>> =
                configs.iter().map(|cfg| cfg.get_wsoi(c).map(|i| i.state)).collect();
            let (mut decided, mut servicing, mut completed) = (false, false, false);
            for k in (0..states.len()).rev() {
                let at = Some(k.saturating_sub(1).min(trace.len().saturating_sub(1)));
                match states[k] {
                    Some(InstanceState::Waiting) if !decided => {
                        v.push(
                            PropertyId::EventualDecision,
                            ti,
                            at,
                            format!("instance {c} waits at configuration {k} and is never granted or denied"),
                        );
                        decided = true; // report once
                    }
                    Some(InstanceState::Granted) if !(servicing && completed) => {
                        v.push(
                            PropertyId::EventualCompletion,
                            ti,
                            at,
                            format!(
                                "instance {c} granted at configuration {k} but never {}",
                                if servicing { "completed" } else { "serviced" }
                            ),
                        );
                        servicing = true;
                        completed = true;
                    }
                    _ => {}
                }
                match states[k] {
                    Some(InstanceState::Granted | InstanceState::Denied) => decided = true,
                    Some(InstanceState::Servicing) => servicing = true,
                    Some(InstanceState::Completed) => completed = true,
                    _ => {}
                }
            }
        }

        for (i, t) in trace.transitions().iter().enumerate() {
            for (c, before) in inst_map(&t.source) {
                let Some(after) = t.target.get_wsoi(c) else {
                    v.push(PropertyId::RequestConstancy, ti, Some(i), format!("instance {c} disappears"));
                    continue;
                };
                if before.request() != after.request() {
                    v.push(PropertyId::RequestConstancy, ti, Some(i), format!("request of {c} changes"));
                }
                if !before.activity_names().eq(after.activity_names()) {
                    v.push(PropertyId::RequestConstancy, ti, Some(i), format!("activity set of {c} changes"));
                }
                if after.activities().any(|aa| aa.wsoi_id != *c) {
                    v.push(
                        PropertyId::RequestConstancy,
                        ti,
                        Some(i),
                        format!("an activity of {c} names another instance"),
                    );
                }
                if !before.state.may_become(after.state) {
                    v.push(
                        PropertyId::MonotoneLifecycle,
                        ti,
                        Some(i),
                        format!("instance {c} moved {:?} -> {:?}", before.state, after.state),
                    );
                }
                if before.state == InstanceState::Denied && (before.any_bound() || after.any_bound()) {
                    v.push(PropertyId::DeniedUnbound, ti, Some(i), format!("denied instance {c} holds a binding"));
                }
            }
        }

        for (k, cfg) in configs.iter().enumerate() {
            let at = Some(k.saturating_sub(1).min(trace.len().saturating_sub(1)));
            for inst in cfg.instances() {
                if inst.any_bound() && !inst.state.admits_bindings() {
                    v.push(
                        PropertyId::BoundImpliesGranted,
                        ti,
                        at,
                        format!("instance {} is {:?} but holds a binding", inst.client_id(), inst.state),
                    );
                }
            }
        }
    }
    v
}

fn initial_parameter_faults(inst: &WsoInstance, req: &WsoRequest, names: &[&str]) -> Vec<String> {
    let c = req.client_id();
    let mut out = Vec::new();
    if inst.request() != req {
        out.push(format!("instance {c} does not hold the seeded request"));
    }
    if inst.state != InstanceState::Waiting {
        out.push(format!("instance {c} starts in {:?}", inst.state));
    }
    if inst.output_parameters.is_some() {
        out.push(format!("instance {c} starts with outputs"));
    }
    if !inst.activity_names().eq(names.iter().copied().collect::<std::collections::BTreeSet<_>>()) {
        out.push(format!("instance {c} starts with the wrong activities"));
    }
    for aa in inst.activities() {
        if !aa.is_pristine() || aa.wsoi_id != *c {
            out.push(format!("activity {c}/{} is not initialised as Preparing with nil fields", aa.aa_name));
        }
    }
    out
}

/// Service properties: acceptance within budget xor justified rejection.
pub fn check_service(engine: &Engine, traces: &[Trace]) -> Verdict {
    let mut v = Verdict::default();
    same_initial(traces, &mut v);
    let activities = &engine.workflow().activities;
    for (ti, trace) in traces.iter().enumerate() {
        let Some(initial) = trace.initial() else { continue };
        let last = trace.last().expect("non-empty");
        for (c, req) in seeded_requests(initial) {
            let replies = |pick: fn(&MessageBody) -> bool| -> Vec<usize> {
                trace
                    .transitions()
                    .iter()
                    .enumerate()
                    .flat_map(|(i, t)| t.emitted.iter().map(move |m| (i, m)))
                    .filter(|(_, m)| m.receiver == Address::Client(c.clone()) && pick(&m.body))
                    .map(|(i, _)| i)
                    .collect()
            };
            let granted = replies(|b| matches!(b, MessageBody::GrantedReply { .. }));
            let completed = replies(|b| matches!(b, MessageBody::CompletedReply { .. }));
            let denied = replies(|b| matches!(b, MessageBody::DeniedReply { .. }));
            let accepted = granted.len() == 1 && completed.len() == 1 && denied.is_empty();
            let rejected = denied.len() == 1 && granted.is_empty() && completed.is_empty();
            if !(accepted || rejected) {
                let at = denied.first().or(granted.first()).copied();
                v.push(
                    PropertyId::Dichotomy,
                    ti,
                    at,
                    format!(
                        "client {c} got {} granted, {} completed and {} denied replies",
                        granted.len(),
                        completed.len(),
                        denied.len()
                    ),
                );
            }
            if let Some(&i) = granted.first() {
                let fits = last.get_wsoi(&c).is_some_and(|inst| {
                    let wses = inst.get_wses();
                    wses.iter().all(|b| b.is_bound())
                        && aggregate_qos(wses.iter().filter_map(|b| b.advertised_qos)).fits_within(&req.qos())
                });
                if !fits {
                    v.push(
                        PropertyId::GrantFeasibility,
                        ti,
                        Some(i),
                        format!("client {c} accepted but its bound services exceed {}", req.qos()),
                    );
                }
            }
            for &i in &denied {
                if let Some(witness) = feasible_assignment(req.qos(), activities, engine.registry()) {
                    v.push(
                        PropertyId::RejectionJustified,
                        ti,
                        Some(i),
                        format!("client {c} rejected although [{}] fits {}", witness.join(", "), req.qos()),
                    );
                }
            }
        }
    }
    v
}

/// All three layers over one trace set.
pub fn check_pyramid(engine: &Engine, traces: &[Trace]) -> PyramidReport {
    PyramidReport {
        behavior: check_behavior_all(engine, traces),
        system: check_system(engine, traces),
        service: check_service(engine, traces),
    }
}

/// Any assignment of candidates to activities meeting `bound`, found by
/// plain depth-first enumeration of the registry.
pub fn feasible_assignment(
    bound: crate::model::QoSSpec,
    activities: &[ActivityDef],
    registry: &Registry,
) -> Option<Vec<String>> {
    fn go(
        bound: crate::model::QoSSpec,
        rest: &[ActivityDef],
        registry: &Registry,
        slowest: u64,
        spent: u64,
        picked: &mut Vec<String>,
    ) -> bool {
        let Some((first, tail)) = rest.split_first() else {
            return slowest <= bound.response_time_ms && spent <= bound.cost_cents;
        };
        for c in registry.iter().filter(|c| c.ontology == first.ontology) {
            picked.push(c.candidate_id.clone());
            if go(bound, tail, registry, slowest.max(c.qos.response_time_ms), spent + c.qos.cost_cents, picked) {
                return true;
            }
            picked.pop();
        }
        false
    }
    let mut picked = Vec::new();
    go(bound, activities, registry, 0, 0, &mut picked).then_some(picked)
}
