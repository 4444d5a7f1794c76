//! Domain types of the orchestration model: requests, instances,
//! activities, bindings, messages, configurations and traces.

mod config;
mod instance;
mod message;
mod qos;
mod request;
mod trace;

use std::collections::BTreeMap;

pub use config::{ActorChange, ActorSnapshot, Configuration};
pub use instance::{ActivityActor, ActivityState, InstanceState, WsBinding, WsoInstance};
pub use message::{Address, AddressParseError, Allocation, Message, MessageBody, MessageKind, Role, TableViolation};
pub use qos::QoSSpec;
pub use request::{ClientId, WsoRequest};
pub use trace::{Label, Trace, Transition};

/// Ordered name to value parameter map.
pub type ParamMap = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("instance `{client_id}` has no activity named `{aa_name}`")]
    UnknownActivity { client_id: ClientId, aa_name: String },
    #[error("no instance exists for client `{0}`")]
    UnknownInstance(ClientId),
    #[error("client id `{0}` appears in more than one request")]
    DuplicateClient(ClientId),
    #[error("client id `{0}` must be non-empty and free of `/`")]
    InvalidClientId(ClientId),
    #[error("message is not at the head of its channel: {0}")]
    NotDeliverable(String),
    #[error("recorded `before` snapshot of {0} does not match the configuration")]
    StaleSnapshot(Address),
    #[error("snapshot kind does not match actor {0}")]
    SnapshotKind(Address),
    #[error("transition {index} does not start where the previous one ended")]
    NotAdjacent { index: usize },
}

/// Looks up the instance created for `client_id`, if any.
pub fn get_wsoi<'a>(config: &'a Configuration, client_id: &ClientId) -> Option<&'a WsoInstance> {
    config.get_wsoi(client_id)
}

/// Looks up an activity of an instance by name.
pub fn get_aa<'a>(instance: &'a WsoInstance, aa_name: &str) -> Result<&'a ActivityActor, ModelError> {
    instance.get_aa(aa_name)
}

/// Bindings of every activity of an instance, sorted by activity name.
pub fn get_wses(instance: &WsoInstance) -> Vec<&WsBinding> {
    instance.get_wses()
}

/// Undelivered customer requests, ordered by client id.
pub fn undelivered_requests(config: &Configuration) -> Vec<&Message> {
    config.undelivered_requests()
}
