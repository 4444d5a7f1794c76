use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::{
    ActivityActor, Address, ClientId, InstanceState, Message, MessageBody, ModelError, ParamMap, WsoInstance,
    WsoRequest,
};

/// A snapshot of every actor plus the messages still in flight.
///
/// Channels are keyed by `(sender, receiver)` and deliver in send order.
/// Replies addressed to a client leave the system immediately and are kept
/// in that client's record. The manager and selector actors carry no state
/// and are always present.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Configuration {
    instances: BTreeMap<ClientId, WsoInstance>,
    clients: BTreeMap<ClientId, Vec<Message>>,
    channels: BTreeMap<(Address, Address), VecDeque<Message>>,
}

/// The state of one addressable actor as recorded in traces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ActorSnapshot {
    Wsoi { request: WsoRequest, state: InstanceState, output_parameters: Option<ParamMap>, activities: Vec<String> },
    Aa(ActivityActor),
}

/// One actor whose snapshot differs between two configurations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActorChange {
    pub actor: Address,
    pub before: Option<ActorSnapshot>,
    pub after: Option<ActorSnapshot>,
}

impl Configuration {
    /// The initial configuration: every request in flight from its client to
    /// the instance manager, nothing created yet.
    pub fn initial(requests: &[WsoRequest]) -> Result<Self, ModelError> {
        let mut config = Configuration::default();
        for req in requests {
            let id = req.client_id();
            if id.as_str().is_empty() || id.as_str().contains('/') {
                return Err(ModelError::InvalidClientId(id.clone()));
            }
            if config.clients.insert(id.clone(), Vec::new()).is_some() {
                return Err(ModelError::DuplicateClient(id.clone()));
            }
            config.post(Message::new(
                Address::Client(id.clone()),
                Address::Wsoim,
                MessageBody::WsoReq {
                    client_id: id.clone(),
                    ontology: req.ontology().to_owned(),
                    qos: req.qos(),
                    input_parameters: req.input_parameters().clone(),
                },
            ));
        }
        Ok(config)
    }

    pub fn get_wsoi(&self, client_id: &ClientId) -> Option<&WsoInstance> {
        self.instances.get(client_id)
    }

    pub fn instances(&self) -> impl Iterator<Item = &WsoInstance> {
        self.instances.values()
    }

    /// Declared external clients.
    pub fn clients(&self) -> impl Iterator<Item = &ClientId> {
        self.clients.keys()
    }

    pub fn is_declared_client(&self, client_id: &ClientId) -> bool {
        self.clients.contains_key(client_id)
    }

    /// Replies a client has received so far, in arrival order.
    pub fn inbox(&self, client_id: &ClientId) -> &[Message] {
        self.clients.get(client_id).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Every message in flight, sorted by kind, sender, receiver, client.
    pub fn undelivered(&self) -> Vec<&Message> {
        let mut all: Vec<&Message> = self.channels.values().flatten().collect();
        all.sort();
        all
    }

    pub fn undelivered_count(&self) -> usize {
        self.channels.values().map(VecDeque::len).sum()
    }

    pub fn is_quiescent(&self) -> bool {
        self.channels.is_empty()
    }

    /// Undelivered customer requests ordered by client id.
    pub fn undelivered_requests(&self) -> Vec<&Message> {
        let mut reqs: Vec<&Message> =
            self.channels.values().flatten().filter(|m| matches!(m.body, MessageBody::WsoReq { .. })).collect();
        reqs.sort_by(|a, b| a.client().cmp(&b.client()));
        reqs
    }

    /// The next message of every non-empty channel, in message order.
    pub fn channel_heads(&self) -> Vec<&Message> {
        let mut heads: Vec<&Message> = self.channels.values().filter_map(VecDeque::front).collect();
        heads.sort();
        heads
    }

    /// Whether `message` is at the head of its channel.
    pub fn is_deliverable(&self, message: &Message) -> bool {
        self.channels.get(&(message.sender.clone(), message.receiver.clone())).and_then(VecDeque::front)
            == Some(message)
    }

    /// Messages in flight towards `receiver`, in per-channel order.
    pub fn in_flight_to<'a>(&'a self, receiver: &'a Address) -> impl Iterator<Item = &'a Message> + 'a {
        self.channels.iter().filter(move |((_, r), _)| r == receiver).flat_map(|(_, q)| q.iter())
    }

    /// Every message that appears anywhere in the configuration.
    pub fn all_messages(&self) -> impl Iterator<Item = &Message> {
        self.channels.values().flatten().chain(self.clients.values().flatten())
    }

    /// Names of the actors present: the two service actors, then each
    /// instance with its activities and their services.
    pub fn cast(&self) -> BTreeSet<Address> {
        let mut cast = BTreeSet::from([Address::Wsoim, Address::Ss]);
        for inst in self.instances.values() {
            let id = inst.client_id();
            cast.insert(Address::Wsoi(id.clone()));
            for name in inst.activity_names() {
                cast.insert(Address::aa(id, name));
                cast.insert(Address::ws(id, name));
            }
        }
        cast
    }

    /// Snapshots of every stateful actor, keyed by address.
    pub fn snapshots(&self) -> BTreeMap<Address, ActorSnapshot> {
        let mut out = BTreeMap::new();
        for inst in self.instances.values() {
            let id = inst.client_id();
            out.insert(Address::Wsoi(id.clone()), wsoi_snapshot(inst));
            for aa in inst.activities() {
                out.insert(Address::aa(id, &aa.aa_name), ActorSnapshot::Aa(aa.clone()));
            }
        }
        out
    }

    /// Actors whose snapshot differs from `self` to `next`.
    pub fn diff(&self, next: &Configuration) -> Vec<ActorChange> {
        let before = self.snapshots();
        let after = next.snapshots();
        let keys: BTreeSet<&Address> = before.keys().chain(after.keys()).collect();
        keys.into_iter()
            .filter_map(|addr| {
                let b = before.get(addr);
                let a = after.get(addr);
                (b != a).then(|| ActorChange { actor: addr.clone(), before: b.cloned(), after: a.cloned() })
            })
            .collect()
    }

    /// Rebuilds a successor from a recorded transition: `consumed` leaves
    /// the head of its channel, `emitted` is posted in order and `changes`
    /// overwrite actor snapshots. Recorded `before` snapshots are checked
    /// against `self`.
    pub fn apply_recorded(
        &self,
        consumed: &Message,
        emitted: &[Message],
        changes: &[ActorChange],
    ) -> Result<Configuration, ModelError> {
        let mut next = self.clone();
        next.take(consumed)?;
        let current = self.snapshots();
        for change in changes {
            if current.get(&change.actor) != change.before.as_ref() {
                return Err(ModelError::StaleSnapshot(change.actor.clone()));
            }
        }
        // Instances first so activity changes find their owner.
        let (wsoi, aa): (Vec<&ActorChange>, Vec<&ActorChange>) =
            changes.iter().partition(|c| matches!(c.actor, Address::Wsoi(_)));
        for change in wsoi {
            let Address::Wsoi(id) = &change.actor else { unreachable!() };
            match &change.after {
                None => {
                    next.instances.remove(id);
                }
                Some(ActorSnapshot::Wsoi { request, state, output_parameters, activities }) => {
                    let old = next.instances.remove(id);
                    let acts = activities
                        .iter()
                        .map(|name| {
                            let aa = old
                                .as_ref()
                                .and_then(|o| o.get_aa(name).ok().cloned())
                                .unwrap_or_else(|| ActivityActor::new(id.clone(), name.as_str()));
                            (name.clone(), aa)
                        })
                        .collect();
                    next.instances.insert(
                        id.clone(),
                        WsoInstance::from_parts(request.clone(), *state, acts, output_parameters.clone()),
                    );
                }
                Some(ActorSnapshot::Aa(_)) => return Err(ModelError::SnapshotKind(change.actor.clone())),
            }
        }
        for change in aa {
            let Address::Aa(id, name) = &change.actor else {
                return Err(ModelError::SnapshotKind(change.actor.clone()));
            };
            let inst = next.instances.get_mut(id).ok_or_else(|| ModelError::UnknownInstance(id.clone()))?;
            match &change.after {
                Some(ActorSnapshot::Aa(actor)) => inst.put_activity(name, actor.clone()),
                None => inst.remove_activity(name),
                Some(ActorSnapshot::Wsoi { .. }) => return Err(ModelError::SnapshotKind(change.actor.clone())),
            }
        }
        for m in emitted {
            next.post(m.clone());
        }
        Ok(next)
    }

    // Crate-internal builders used by the engine on a fresh clone.

    pub(crate) fn take(&mut self, message: &Message) -> Result<(), ModelError> {
        let key = (message.sender.clone(), message.receiver.clone());
        let queue = self.channels.get_mut(&key);
        match queue {
            Some(q) if q.front() == Some(message) => {
                q.pop_front();
                if q.is_empty() {
                    self.channels.remove(&key);
                }
                Ok(())
            }
            _ => Err(ModelError::NotDeliverable(message.to_string())),
        }
    }

    pub(crate) fn post(&mut self, message: Message) {
        if let Address::Client(c) = &message.receiver {
            self.clients.entry(c.clone()).or_default().push(message);
        } else {
            self.channels.entry((message.sender.clone(), message.receiver.clone())).or_default().push_back(message);
        }
    }

    pub(crate) fn insert_instance(&mut self, instance: WsoInstance) {
        self.instances.insert(instance.client_id().clone(), instance);
    }

    pub(crate) fn instance_mut(&mut self, client_id: &ClientId) -> Option<&mut WsoInstance> {
        self.instances.get_mut(client_id)
    }
}

fn wsoi_snapshot(inst: &WsoInstance) -> ActorSnapshot {
    ActorSnapshot::Wsoi {
        request: inst.request().clone(),
        state: inst.state,
        output_parameters: inst.output_parameters.clone(),
        activities: inst.activity_names().map(str::to_owned).collect(),
    }
}
