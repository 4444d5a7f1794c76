use std::fmt;

use serde::{Deserialize, Serialize};

/// A response-time bound paired with a cost budget.
///
/// The same couple describes both what a customer asks for and what a
/// candidate service advertises. Response times are milliseconds, costs are
/// cents; `u64` keeps both non-negative by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct QoSSpec {
    pub response_time_ms: u64,
    pub cost_cents: u64,
}

impl QoSSpec {
    pub const ZERO: QoSSpec = QoSSpec { response_time_ms: 0, cost_cents: 0 };

    pub const fn new(response_time_ms: u64, cost_cents: u64) -> Self {
        Self { response_time_ms, cost_cents }
    }

    /// Component-wise `<=`, inclusive on both axes.
    pub fn fits_within(&self, bound: &QoSSpec) -> bool {
        self.response_time_ms <= bound.response_time_ms && self.cost_cents <= bound.cost_cents
    }
}

impl fmt::Display for QoSSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}ms,{}c)", self.response_time_ms, self.cost_cents)
    }
}
