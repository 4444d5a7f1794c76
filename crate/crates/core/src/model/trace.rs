use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Configuration, Message, ModelError};
use crate::engine::RuleId;

/// What a transition did: which rule fired on which message.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Label {
    pub rule: RuleId,
    pub message: Message,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.rule, self.message)
    }
}

/// One labeled step between two configurations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub source: Arc<Configuration>,
    pub label: Label,
    pub target: Arc<Configuration>,
    pub emitted: Vec<Message>,
}

/// A finite computation path: each transition starts where the previous
/// one ended.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Trace {
    transitions: Vec<Transition>,
}

impl Trace {
    pub fn new(transitions: Vec<Transition>) -> Result<Self, ModelError> {
        for (i, pair) in transitions.windows(2).enumerate() {
            let (a, b) = (&pair[0], &pair[1]);
            if !Arc::ptr_eq(&a.target, &b.source) && *a.target != *b.source {
                return Err(ModelError::NotAdjacent { index: i + 1 });
            }
        }
        Ok(Self { transitions })
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn initial(&self) -> Option<&Configuration> {
        self.transitions.first().map(|t| &*t.source)
    }

    pub fn last(&self) -> Option<&Configuration> {
        self.transitions.last().map(|t| &*t.target)
    }

    /// `source(0), target(0), target(1), ...`; empty for an empty trace.
    pub fn configurations(&self) -> impl Iterator<Item = &Configuration> {
        self.transitions.first().map(|t| &*t.source).into_iter().chain(self.transitions.iter().map(|t| &*t.target))
    }

    pub fn labels(&self) -> impl Iterator<Item = &Label> {
        self.transitions.iter().map(|t| &t.label)
    }

    pub fn rules(&self) -> Vec<RuleId> {
        self.labels().map(|l| l.rule).collect()
    }
}
