//! The transition system: rules, a seeded scheduler and a bounded
//! exhaustive explorer.

mod explore;
mod rules;

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use explore::ExploreLimits;
pub use rules::{simulated_outputs, Footprint, RuleId};

use crate::model::{Configuration, Label, Message, ModelError, Trace, Transition, WsoRequest};
use crate::registry::Registry;
use crate::selection::{compact, ActivityDef, ParamError, SelectionError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("invalid workflow: {0}")]
    InvalidWorkflow(String),
    #[error("request `{client_id}` asks for `{ontology}`, but the engine runs `{expected}`")]
    UnknownWso { client_id: String, ontology: String, expected: String },
    #[error("no rule applies to {0}")]
    NoRuleApplies(String),
    #[error("rules {rules:?} all apply to {message}")]
    AmbiguousRule { message: String, rules: Vec<RuleId> },
    #[error("{pending} message(s) remain undelivered but none can be delivered")]
    Stuck { pending: usize },
    #[error("state-space limit exceeded: {0}")]
    StateSpaceLimit(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Selection(#[from] SelectionError),
    #[error(transparent)]
    Params(#[from] ParamError),
}

/// An orchestration: its ontology and the activities it runs, each
/// needing a service of some component ontology.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkflowDef {
    pub ontology: String,
    pub activities: Vec<ActivityDef>,
}

impl WorkflowDef {
    /// Activity names must be non-empty, unique (also with whitespace
    /// removed) and free of `.` and `/`, which parameter keys and actor
    /// addresses use as separators.
    pub fn new(ontology: impl Into<String>, activities: Vec<ActivityDef>) -> Result<Self, EngineError> {
        let wf = Self { ontology: ontology.into(), activities };
        wf.validate()?;
        Ok(wf)
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |m: String| Err(EngineError::InvalidWorkflow(m));
        if self.activities.is_empty() {
            return bad("a workflow needs at least one activity".into());
        }
        let mut names = BTreeSet::new();
        let mut compacted = BTreeSet::new();
        for a in &self.activities {
            if a.name.trim().is_empty() || a.name.contains(['.', '/']) {
                return bad(format!("activity name `{}` must be non-empty and free of `.` and `/`", a.name));
            }
            if !names.insert(a.name.as_str()) {
                return bad(format!("duplicate activity name `{}`", a.name));
            }
            if !compacted.insert(compact(&a.name)) {
                return bad(format!("activity name `{}` collides with another once spaces are removed", a.name));
            }
        }
        Ok(())
    }

    pub fn activity_names(&self) -> impl Iterator<Item = &str> {
        self.activities.iter().map(|a| a.name.as_str())
    }

    pub fn parse(text: &str) -> Result<Self, EngineError> {
        let wf: WorkflowDef = serde_json::from_str(text).map_err(|e| EngineError::InvalidWorkflow(e.to_string()))?;
        wf.validate()?;
        Ok(wf)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, EngineError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| EngineError::InvalidWorkflow(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// Deliberate rule defects used to show which conformance layer notices
/// them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mutation {
    /// The selector always grants the cheapest assignment and the instance
    /// accepts a grant without checking it against the budget.
    UncheckedGrant,
    /// A denied instance asks for selection again and accepts the
    /// resulting grant, leaving `Denied` for `Granted`.
    RegrantAfterDenial,
}

/// The rule set bound to one workflow and registry.
#[derive(Debug, Clone)]
pub struct Engine {
    workflow: WorkflowDef,
    registry: Registry,
    mutation: Option<Mutation>,
}

impl Engine {
    pub fn new(workflow: WorkflowDef, registry: Registry) -> Result<Self, EngineError> {
        workflow.validate()?;
        Ok(Self { workflow, registry, mutation: None })
    }

    pub fn with_mutation(mut self, mutation: Mutation) -> Self {
        self.mutation = Some(mutation);
        self
    }

    pub fn workflow(&self) -> &WorkflowDef {
        &self.workflow
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn mutation(&self) -> Option<Mutation> {
        self.mutation
    }

    /// Seeds the requests; every request must target this workflow.
    pub fn initial_configuration(&self, requests: &[WsoRequest]) -> Result<Configuration, EngineError> {
        if let Some(r) = requests.iter().find(|r| r.ontology() != self.workflow.ontology) {
            return Err(EngineError::UnknownWso {
                client_id: r.client_id().to_string(),
                ontology: r.ontology().to_owned(),
                expected: self.workflow.ontology.clone(),
            });
        }
        Ok(Configuration::initial(requests)?)
    }

    /// Delivers `message`, which must be at the head of its channel.
    pub fn step(&self, config: &Arc<Configuration>, message: &Message) -> Result<Transition, EngineError> {
        if !config.is_deliverable(message) {
            return Err(ModelError::NotDeliverable(message.to_string()).into());
        }
        let rule = match self.matching_rules(config, message).as_slice() {
            [] => return Err(EngineError::NoRuleApplies(message.to_string())),
            [one] => *one,
            many => return Err(EngineError::AmbiguousRule { message: message.to_string(), rules: many.to_vec() }),
        };
        let (target, emitted) = self.fire(rule, config, message)?;
        Ok(Transition {
            source: Arc::clone(config),
            label: Label { rule, message: message.clone() },
            target: Arc::new(target),
            emitted,
        })
    }

    /// Deliverable messages paired with the rule each would fire, in
    /// message order.
    pub fn enabled(&self, config: &Configuration) -> Vec<(Message, RuleId)> {
        config
            .channel_heads()
            .into_iter()
            .filter_map(|m| match self.matching_rules(config, m).as_slice() {
                [one] => Some((m.clone(), *one)),
                _ => None,
            })
            .collect()
    }

    /// Runs to quiescence, choosing among enabled messages with a
    /// generator seeded by `seed`.
    pub fn run(&self, requests: &[WsoRequest], seed: u64) -> Result<Trace, EngineError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut config = Arc::new(self.initial_configuration(requests)?);
        let mut transitions = Vec::new();
        loop {
            let enabled = self.enabled(&config);
            if enabled.is_empty() {
                return self.finish(&config, transitions);
            }
            let (msg, _) = &enabled[rng.random_range(0..enabled.len())];
            let t = self.step(&config, msg)?;
            config = Arc::clone(&t.target);
            transitions.push(t);
        }
    }

    fn finish(&self, config: &Configuration, transitions: Vec<Transition>) -> Result<Trace, EngineError> {
        if !config.is_quiescent() {
            let head = config.channel_heads()[0];
            return match self.matching_rules(config, head).as_slice() {
                [] => Err(EngineError::NoRuleApplies(head.to_string())),
                [_] => Err(EngineError::Stuck { pending: config.undelivered_count() }),
                many => Err(EngineError::AmbiguousRule { message: head.to_string(), rules: many.to_vec() }),
            };
        }
        Ok(Trace::new(transitions)?)
    }
}

/// Runs `requests` through `workflow` on `registry`; see [`Engine::run`].
pub fn run(
    workflow: &WorkflowDef,
    registry: &Registry,
    requests: &[WsoRequest],
    seed: u64,
) -> Result<Trace, EngineError> {
    Engine::new(workflow.clone(), registry.clone())?.run(requests, seed)
}

/// Enumerates maximal traces; see [`Engine::explore`].
pub fn explore(
    workflow: &WorkflowDef,
    registry: &Registry,
    requests: &[WsoRequest],
    limits: &ExploreLimits,
) -> Result<Vec<Trace>, EngineError> {
    Engine::new(workflow.clone(), registry.clone())?.explore(requests, limits)
}
