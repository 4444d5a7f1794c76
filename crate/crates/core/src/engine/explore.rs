use std::collections::BTreeSet;
use std::sync::Arc;

use super::{Engine, EngineError, Footprint};
use crate::model::{Configuration, Message, Trace, Transition, WsoRequest};

/// Bounds and reduction for [`Engine::explore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExploreLimits {
    /// Longest path allowed before giving up.
    pub max_transitions: usize,
    /// Most maximal traces collected before giving up.
    pub max_traces: usize,
    /// When set, only one interleaving is kept per class of traces that
    /// differ by swapping adjacent transitions with disjoint footprints.
    pub commute_independent: bool,
}

impl Default for ExploreLimits {
    fn default() -> Self {
        Self { max_transitions: 10_000, max_traces: 100_000, commute_independent: true }
    }
}

type Sleeper = (Message, BTreeSet<Footprint>);

struct Search<'a> {
    engine: &'a Engine,
    limits: &'a ExploreLimits,
    path: Vec<Transition>,
    found: Vec<Trace>,
}

impl Engine {
    /// Every maximal trace from the seeded requests, depth first in message
    /// order.
    ///
    /// With `commute_independent` the search carries sleep sets: after a
    /// sibling branch on message `m` has been explored, `m` stays asleep in
    /// later siblings until a transition that conflicts with it fires.
    /// Branches where every enabled message is asleep are dropped; the
    /// traces that remain are pairwise inequivalent and cover every class.
    pub fn explore(&self, requests: &[WsoRequest], limits: &ExploreLimits) -> Result<Vec<Trace>, EngineError> {
        let initial = Arc::new(self.initial_configuration(requests)?);
        if initial.is_quiescent() {
            return Ok(Vec::new());
        }
        let mut search = Search { engine: self, limits, path: Vec::new(), found: Vec::new() };
        search.visit(initial, Vec::new())?;
        Ok(search.found)
    }
}

impl Search<'_> {
    fn visit(&mut self, config: Arc<Configuration>, sleep: Vec<Sleeper>) -> Result<(), EngineError> {
        let enabled = self.engine.enabled(&config);
        if enabled.is_empty() {
            // Reuses the scheduler's diagnosis of a non-quiescent dead end.
            let trace = self.engine.finish(&config, self.path.clone())?;
            self.found.push(trace);
            if self.found.len() > self.limits.max_traces {
                return Err(EngineError::StateSpaceLimit(format!(
                    "more than {} maximal traces",
                    self.limits.max_traces
                )));
            }
            return Ok(());
        }
        if self.path.len() >= self.limits.max_transitions {
            return Err(EngineError::StateSpaceLimit(format!(
                "a path is longer than {} transitions",
                self.limits.max_transitions
            )));
        }
        let mut done: Vec<Sleeper> = Vec::new();
        for (msg, _) in enabled {
            if self.limits.commute_independent && sleep.iter().any(|(m, _)| *m == msg) {
                continue;
            }
            let fp = self.engine.footprint(&msg);
            let t = self.engine.step(&config, &msg)?;
            let next = Arc::clone(&t.target);
            let child_sleep = if self.limits.commute_independent {
                sleep.iter().chain(&done).filter(|(_, f)| f.is_disjoint(&fp)).cloned().collect()
            } else {
                Vec::new()
            };
            self.path.push(t);
            self.visit(next, child_sleep)?;
            self.path.pop();
            if self.limits.commute_independent {
                done.push((msg, fp));
            }
        }
        Ok(())
    }
}
