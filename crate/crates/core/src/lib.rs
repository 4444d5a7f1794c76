//! An executable actor model of a QoS-aware web service orchestration
//! engine.
//!
//! Customer requests become orchestration instances; a selector binds each
//! activity to a registry service within the request's response-time and
//! cost budget, or denies the request; granted instances invoke their
//! services and complete. Every execution is a [`Trace`] of labeled
//! transitions, and the [`conformance`] checkers verify behavior, system
//! and service properties over single traces or explored trace sets.

pub mod conformance;
pub mod engine;
pub mod fixtures;
pub mod model;
pub mod registry;
pub mod selection;

pub use conformance::{
    check_behavior, check_behavior_all, check_pyramid, check_service, check_system, feasible_assignment, Layer,
    PropertyId, PyramidReport, Verdict, Violation,
};
pub use engine::{Engine, EngineError, ExploreLimits, Mutation, RuleId, WorkflowDef};
pub use model::{
    ActivityActor, ActivityState, Address, ClientId, Configuration, InstanceState, Label, Message, MessageBody,
    MessageKind, ParamMap, QoSSpec, Trace, Transition, WsBinding, WsoInstance, WsoRequest,
};
pub use registry::{load_registry, Registry, RegistryError};
pub use selection::{
    aggregate_qos, qos_allocate, ActivityDef, AllocationResult, CandidateService, Decision, SelectionError,
};
