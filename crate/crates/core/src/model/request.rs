use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ParamMap, QoSSpec};

/// Identifies a client and, one-to-one, the instance created for its request.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClientId(String);

impl ClientId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ClientId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ClientId {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

/// A customer's request: who asks, for which orchestration, with what inputs
/// and under which QoS budget. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WsoRequest {
    client_id: ClientId,
    ontology: String,
    #[serde(default)]
    input_parameters: ParamMap,
    qos: QoSSpec,
}

impl WsoRequest {
    pub fn new(
        client_id: impl Into<ClientId>,
        ontology: impl Into<String>,
        input_parameters: ParamMap,
        qos: QoSSpec,
    ) -> Self {
        Self { client_id: client_id.into(), ontology: ontology.into(), input_parameters, qos }
    }

    pub fn client_id(&self) -> &ClientId {
        &self.client_id
    }

    pub fn ontology(&self) -> &str {
        &self.ontology
    }

    pub fn input_parameters(&self) -> &ParamMap {
        &self.input_parameters
    }

    pub fn qos(&self) -> QoSSpec {
        self.qos
    }
}

impl From<String> for ClientId {
    fn from(s: String) -> Self {
        Self(s)
    }
}
