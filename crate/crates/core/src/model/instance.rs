use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ClientId, ModelError, ParamMap, QoSSpec, WsoRequest};

/// Lifecycle of an orchestration instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum InstanceState {
    Waiting,
    Granted,
    Denied,
    Servicing,
    Completed,
}

impl InstanceState {
    pub const ALL: [InstanceState; 5] = [
        InstanceState::Waiting,
        InstanceState::Granted,
        InstanceState::Denied,
        InstanceState::Servicing,
        InstanceState::Completed,
    ];

    /// Whether `next` is a legal successor of `self` across one transition.
    /// Staying put is always legal.
    pub fn may_become(self, next: InstanceState) -> bool {
        use InstanceState::*;
        matches!(
            (self, next),
            (Waiting, Waiting | Granted | Denied)
                | (Granted, Granted | Servicing)
                | (Servicing, Servicing | Completed)
                | (Denied, Denied)
                | (Completed, Completed)
        )
    }

    /// States in which an instance may hold bound services.
    pub fn admits_bindings(self) -> bool {
        matches!(self, InstanceState::Granted | InstanceState::Servicing | InstanceState::Completed)
    }

    pub fn is_terminal(self) -> bool {
        matches!(self, InstanceState::Denied | InstanceState::Completed)
    }
}

/// Lifecycle of one activity inside an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ActivityState {
    Preparing,
    Invoking,
    Returned,
}

impl ActivityState {
    pub const ALL: [ActivityState; 3] = [ActivityState::Preparing, ActivityState::Invoking, ActivityState::Returned];

    pub fn may_become(self, next: ActivityState) -> bool {
        use ActivityState::*;
        matches!(
            (self, next),
            (Preparing, Preparing | Invoking) | (Invoking, Invoking | Returned) | (Returned, Returned)
        )
    }
}

/// The component service bound to an activity, identified by the owning
/// instance and the activity name. `endpoint` and `advertised_qos` are both
/// present or both absent.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WsBinding {
    pub wsoi_id: ClientId,
    pub aa_name: String,
    pub endpoint: Option<String>,
    pub advertised_qos: Option<QoSSpec>,
}

impl WsBinding {
    pub fn unbound(wsoi_id: ClientId, aa_name: impl Into<String>) -> Self {
        Self { wsoi_id, aa_name: aa_name.into(), endpoint: None, advertised_qos: None }
    }

    pub fn bound(
        wsoi_id: ClientId,
        aa_name: impl Into<String>,
        endpoint: impl Into<String>,
        advertised_qos: QoSSpec,
    ) -> Self {
        Self { wsoi_id, aa_name: aa_name.into(), endpoint: Some(endpoint.into()), advertised_qos: Some(advertised_qos) }
    }

    pub fn is_bound(&self) -> bool {
        self.endpoint.is_some() && self.advertised_qos.is_some()
    }

    /// The endpoint/qos pair is all-or-nothing.
    pub fn is_well_formed(&self) -> bool {
        self.endpoint.is_some() == self.advertised_qos.is_some()
    }
}

/// One activity of an instance.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ActivityActor {
    pub aa_name: String,
    pub wsoi_id: ClientId,
    pub qos: Option<QoSSpec>,
    pub input_parameters: Option<ParamMap>,
    pub output_parameters: Option<ParamMap>,
    pub state: ActivityState,
    pub ws: WsBinding,
}

impl ActivityActor {
    /// A freshly created activity: `Preparing`, everything else nil.
    pub fn new(wsoi_id: ClientId, aa_name: impl Into<String>) -> Self {
        let aa_name = aa_name.into();
        Self {
            ws: WsBinding::unbound(wsoi_id.clone(), aa_name.clone()),
            aa_name,
            wsoi_id,
            qos: None,
            input_parameters: None,
            output_parameters: None,
            state: ActivityState::Preparing,
        }
    }

    pub fn is_pristine(&self) -> bool {
        self.state == ActivityState::Preparing
            && self.qos.is_none()
            && self.input_parameters.is_none()
            && self.output_parameters.is_none()
            && !self.ws.is_bound()
            && self.ws.advertised_qos.is_none()
    }
}

/// An orchestration instance created for exactly one request.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WsoInstance {
    request: WsoRequest,
    pub state: InstanceState,
    activities: BTreeMap<String, ActivityActor>,
    pub output_parameters: Option<ParamMap>,
}

impl WsoInstance {
    /// Creates an instance in `Waiting` with one pristine activity per name.
    pub fn create<'a>(request: WsoRequest, activity_names: impl IntoIterator<Item = &'a str>) -> Self {
        let id = request.client_id().clone();
        let activities =
            activity_names.into_iter().map(|name| (name.to_owned(), ActivityActor::new(id.clone(), name))).collect();
        Self { request, state: InstanceState::Waiting, activities, output_parameters: None }
    }

    /// Rebuilds an instance from its parts, as read back from a trace file.
    pub fn from_parts(
        request: WsoRequest,
        state: InstanceState,
        activities: BTreeMap<String, ActivityActor>,
        output_parameters: Option<ParamMap>,
    ) -> Self {
        Self { request, state, activities, output_parameters }
    }

    pub fn request(&self) -> &WsoRequest {
        &self.request
    }

    pub fn client_id(&self) -> &ClientId {
        self.request.client_id()
    }

    pub fn activities(&self) -> impl Iterator<Item = &ActivityActor> {
        self.activities.values()
    }

    pub fn activity_names(&self) -> impl Iterator<Item = &str> {
        self.activities.keys().map(String::as_str)
    }

    pub fn activity_count(&self) -> usize {
        self.activities.len()
    }

    /// Looks up an activity by name.
    pub fn get_aa(&self, aa_name: &str) -> Result<&ActivityActor, ModelError> {
        self.activities.get(aa_name).ok_or_else(|| ModelError::UnknownActivity {
            client_id: self.client_id().clone(),
            aa_name: aa_name.to_owned(),
        })
    }

    /// Mutable access used while building the next configuration; the set of
    /// names itself cannot change through this handle.
    pub fn get_aa_mut(&mut self, aa_name: &str) -> Result<&mut ActivityActor, ModelError> {
        let client_id = self.request.client_id().clone();
        self.activities
            .get_mut(aa_name)
            .ok_or_else(|| ModelError::UnknownActivity { client_id, aa_name: aa_name.to_owned() })
    }

    pub(crate) fn put_activity(&mut self, aa_name: &str, actor: ActivityActor) {
        self.activities.insert(aa_name.to_owned(), actor);
    }

    pub(crate) fn remove_activity(&mut self, aa_name: &str) {
        self.activities.remove(aa_name);
    }

    pub(crate) fn activities_mut(&mut self) -> impl Iterator<Item = &mut ActivityActor> {
        self.activities.values_mut()
    }

    /// Bindings of every activity, ordered by activity name.
    pub fn get_wses(&self) -> Vec<&WsBinding> {
        self.activities.values().map(|aa| &aa.ws).collect()
    }

    pub fn all_returned(&self) -> bool {
        self.activities.values().all(|aa| aa.state == ActivityState::Returned)
    }

    pub fn any_bound(&self) -> bool {
        self.activities.values().any(|aa| aa.ws.is_bound())
    }
}
