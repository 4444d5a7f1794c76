use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Engine, EngineError, Mutation};
use crate::model::{
    ActivityState, Address, Allocation, ClientId, Configuration, InstanceState, Message, MessageBody, MessageKind,
    ParamMap, WsBinding, WsoInstance,
};
use crate::selection::{self, aggregate_qos, Decision};

/// The transition rules of the engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RuleId {
    /// Manager turns a request into a new instance and asks for selection.
    #[serde(rename = "R1_WsoimCreate")]
    R1WsoimCreate,
    /// Waiting instance receives a denial.
    #[serde(rename = "R2a_SelectDenied")]
    R2aSelectDenied,
    /// Waiting instance receives a grant and starts every activity.
    #[serde(rename = "R2b_SelectGranted")]
    R2bSelectGranted,
    /// Instance hears back from an activity that it started invoking.
    #[serde(rename = "R3_InvokeAck")]
    R3InvokeAck,
    /// Last activity notification completes the instance.
    #[serde(rename = "R4a_NotifyAllReturned")]
    R4aNotifyAllReturned,
    /// Activity notification while others are still outstanding.
    #[serde(rename = "R4b_NotifySomePending")]
    R4bNotifySomePending,
    /// Selector grants or denies.
    #[serde(rename = "R5_SsSelect")]
    R5SsSelect,
    /// Activity invokes its bound service.
    #[serde(rename = "R6_AaInvoke")]
    R6AaInvoke,
    /// Activity stores the service's results and notifies its instance.
    #[serde(rename = "R7_AaReturn")]
    R7AaReturn,
    /// Service computes and replies.
    #[serde(rename = "R8_WsInvoke")]
    R8WsInvoke,
}

impl RuleId {
    pub const ALL: [RuleId; 10] = [
        RuleId::R1WsoimCreate,
        RuleId::R2aSelectDenied,
        RuleId::R2bSelectGranted,
        RuleId::R3InvokeAck,
        RuleId::R4aNotifyAllReturned,
        RuleId::R4bNotifySomePending,
        RuleId::R5SsSelect,
        RuleId::R6AaInvoke,
        RuleId::R7AaReturn,
        RuleId::R8WsInvoke,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RuleId::R1WsoimCreate => "R1_WsoimCreate",
            RuleId::R2aSelectDenied => "R2a_SelectDenied",
            RuleId::R2bSelectGranted => "R2b_SelectGranted",
            RuleId::R3InvokeAck => "R3_InvokeAck",
            RuleId::R4aNotifyAllReturned => "R4a_NotifyAllReturned",
            RuleId::R4bNotifySomePending => "R4b_NotifySomePending",
            RuleId::R5SsSelect => "R5_SsSelect",
            RuleId::R6AaInvoke => "R6_AaInvoke",
            RuleId::R7AaReturn => "R7_AaReturn",
            RuleId::R8WsInvoke => "R8_WsInvoke",
        }
    }

    /// The message kind this rule consumes.
    pub fn trigger(self) -> MessageKind {
        match self {
            RuleId::R1WsoimCreate => MessageKind::WsoReq,
            RuleId::R2aSelectDenied => MessageKind::SelectReplyDenied,
            RuleId::R2bSelectGranted => MessageKind::SelectReplyGranted,
            RuleId::R3InvokeAck => MessageKind::InvokeAck,
            RuleId::R4aNotifyAllReturned | RuleId::R4bNotifySomePending => MessageKind::Notify,
            RuleId::R5SsSelect => MessageKind::Select,
            RuleId::R6AaInvoke => MessageKind::Invoke,
            RuleId::R7AaReturn => MessageKind::InvokeReply,
            RuleId::R8WsInvoke => MessageKind::InvokeWs,
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-request state a transition reads or writes. Transitions with
/// disjoint footprints commute.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Footprint {
    Wsoi(ClientId),
    Aa(ClientId, String),
    Ws(ClientId, String),
}

impl Engine {
    /// Every rule whose trigger and condition match delivering `message`
    /// in `config`. The reference rules never return more than one.
    pub fn matching_rules(&self, config: &Configuration, message: &Message) -> Vec<RuleId> {
        RuleId::ALL.into_iter().filter(|r| self.guard(*r, config, message)).collect()
    }

    fn guard(&self, rule: RuleId, config: &Configuration, msg: &Message) -> bool {
        if rule.trigger() != msg.kind() {
            return false;
        }
        let wsoi = |c: &ClientId| config.get_wsoi(c);
        match (rule, &msg.sender, &msg.receiver, &msg.body) {
            (
                RuleId::R1WsoimCreate,
                Address::Client(c),
                Address::Wsoim,
                MessageBody::WsoReq { client_id, ontology, .. },
            ) => c == client_id && wsoi(c).is_none() && *ontology == self.workflow.ontology,
            (RuleId::R5SsSelect, Address::Wsoi(c), Address::Ss, MessageBody::Select { .. }) => wsoi(c).is_some(),
            (RuleId::R2aSelectDenied, Address::Ss, Address::Wsoi(c), _) => {
                wsoi(c).is_some_and(|i| i.state == InstanceState::Waiting)
            }
            (
                RuleId::R2bSelectGranted,
                Address::Ss,
                Address::Wsoi(c),
                MessageBody::SelectReplyGranted { allocation },
            ) => wsoi(c).is_some_and(|i| {
                let from_ok = match self.mutation {
                    Some(Mutation::RegrantAfterDenial) => {
                        matches!(i.state, InstanceState::Waiting | InstanceState::Denied)
                    }
                    _ => i.state == InstanceState::Waiting,
                };
                from_ok && self.grant_is_acceptable(i, allocation)
            }),
            (RuleId::R3InvokeAck, Address::Aa(c, n), Address::Wsoi(d), _) if c == d => wsoi(c).is_some_and(|i| {
                i.get_aa(n).is_ok() && matches!(i.state, InstanceState::Granted | InstanceState::Servicing)
            }),
            (
                RuleId::R4aNotifyAllReturned | RuleId::R4bNotifySomePending,
                Address::Aa(c, n),
                Address::Wsoi(d),
                MessageBody::Notify { state: ActivityState::Returned },
            ) if c == d => wsoi(c).is_some_and(|i| {
                if i.state != InstanceState::Servicing || i.get_aa(n).is_err() {
                    return false;
                }
                let last = i.all_returned() && outstanding_reports(config, &msg.receiver) == 1;
                last == (rule == RuleId::R4aNotifyAllReturned)
            }),
            (RuleId::R6AaInvoke, Address::Wsoi(c), Address::Aa(d, n), _) if c == d => wsoi(c)
                .and_then(|i| i.get_aa(n).ok())
                .is_some_and(|aa| aa.state == ActivityState::Preparing && aa.ws.is_bound()),
            (RuleId::R8WsInvoke, Address::Aa(c, n), Address::Ws(d, m), _) if c == d && n == m => {
                wsoi(c).and_then(|i| i.get_aa(n).ok()).is_some_and(|aa| aa.ws.is_bound())
            }
            (RuleId::R7AaReturn, Address::Ws(c, n), Address::Aa(d, m), _) if c == d && n == m => {
                wsoi(c).and_then(|i| i.get_aa(n).ok()).is_some_and(|aa| aa.state == ActivityState::Invoking)
            }
            _ => false,
        }
    }

    /// A grant must cover exactly the instance's activities and, unless the
    /// engine is mutated, fit the request's budget.
    fn grant_is_acceptable(&self, inst: &WsoInstance, allocation: &BTreeMap<String, Allocation>) -> bool {
        if !allocation.keys().map(String::as_str).eq(inst.activity_names()) {
            return false;
        }
        match self.mutation {
            Some(_) => true,
            None => aggregate_qos(allocation.values().map(|a| a.qos)).fits_within(&inst.request().qos()),
        }
    }

    /// Applies `rule` to deliver `msg`, returning the next configuration and
    /// the messages sent. Callers have already checked the guard.
    pub(super) fn fire(
        &self,
        rule: RuleId,
        config: &Configuration,
        msg: &Message,
    ) -> Result<(Configuration, Vec<Message>), EngineError> {
        let mut next = config.clone();
        next.take(msg)?;
        let mut out = Vec::new();
        match (rule, &msg.body) {
            (RuleId::R1WsoimCreate, MessageBody::WsoReq { client_id, ontology, qos, input_parameters }) => {
                let request =
                    crate::model::WsoRequest::new(client_id.clone(), ontology.clone(), input_parameters.clone(), *qos);
                next.insert_instance(WsoInstance::create(request, self.workflow.activity_names()));
                out.push(Message::new(
                    Address::Wsoi(client_id.clone()),
                    Address::Ss,
                    MessageBody::Select { qos: *qos, ontology: ontology.clone() },
                ));
            }
            (RuleId::R5SsSelect, MessageBody::Select { qos, .. }) => {
                let Address::Wsoi(c) = &msg.sender else { unreachable!("guarded") };
                let denied_before = config.get_wsoi(c).is_some_and(|i| i.state == InstanceState::Denied);
                let mutated = matches!(self.mutation, Some(Mutation::UncheckedGrant))
                    || (matches!(self.mutation, Some(Mutation::RegrantAfterDenial)) && denied_before);
                let allocation: Option<BTreeMap<String, Allocation>> = if mutated {
                    let picks = selection::min_cost_assignment(&self.workflow.activities, &self.registry)?;
                    Some(
                        self.workflow
                            .activities
                            .iter()
                            .zip(picks)
                            .map(|(a, c)| {
                                (a.name.clone(), Allocation { candidate_id: c.candidate_id.clone(), qos: c.qos })
                            })
                            .collect(),
                    )
                } else {
                    let result = selection::qos_allocate(*qos, &self.workflow.activities, &self.registry)?;
                    (result.decision == Decision::Granted).then(|| {
                        result
                            .per_activity
                            .into_iter()
                            .map(|(name, (cand, allocated))| {
                                (name, Allocation { candidate_id: cand.candidate_id, qos: allocated })
                            })
                            .collect()
                    })
                };
                let body = match allocation {
                    Some(allocation) => MessageBody::SelectReplyGranted { allocation },
                    None => MessageBody::SelectReplyDenied,
                };
                out.push(Message::new(Address::Ss, msg.sender.clone(), body));
            }
            (RuleId::R2aSelectDenied, _) => {
                let c = receiver_client(msg);
                let inst = next.instance_mut(&c).expect("guarded");
                inst.state = InstanceState::Denied;
                let req = inst.request().clone();
                out.push(reply_to_client(
                    &c,
                    MessageBody::DeniedReply { ontology: req.ontology().to_owned(), qos: req.qos() },
                ));
                if matches!(self.mutation, Some(Mutation::RegrantAfterDenial)) {
                    out.push(Message::new(
                        Address::Wsoi(c.clone()),
                        Address::Ss,
                        MessageBody::Select { qos: req.qos(), ontology: req.ontology().to_owned() },
                    ));
                }
            }
            (RuleId::R2bSelectGranted, MessageBody::SelectReplyGranted { allocation }) => {
                let c = receiver_client(msg);
                let inst = next.instance_mut(&c).expect("guarded");
                let inputs = selection::map_input_parameters(inst.request().input_parameters(), inst.activity_names());
                for aa in inst.activities_mut() {
                    let alloc = &allocation[&aa.aa_name];
                    aa.qos = Some(alloc.qos);
                    aa.input_parameters = Some(inputs[&aa.aa_name].clone());
                    aa.ws = WsBinding::bound(c.clone(), aa.aa_name.clone(), alloc.candidate_id.clone(), alloc.qos);
                }
                inst.state = InstanceState::Granted;
                let req = inst.request().clone();
                out.push(reply_to_client(
                    &c,
                    MessageBody::GrantedReply { ontology: req.ontology().to_owned(), qos: req.qos() },
                ));
                for name in inst.activity_names() {
                    out.push(Message::new(Address::Wsoi(c.clone()), Address::aa(&c, name), MessageBody::Invoke));
                }
            }
            (RuleId::R3InvokeAck, _) => {
                let c = receiver_client(msg);
                next.instance_mut(&c).expect("guarded").state = InstanceState::Servicing;
            }
            (RuleId::R4aNotifyAllReturned, _) => {
                let c = receiver_client(msg);
                let inst = next.instance_mut(&c).expect("guarded");
                let outputs: BTreeMap<String, Option<ParamMap>> =
                    inst.activities().map(|aa| (aa.aa_name.clone(), aa.output_parameters.clone())).collect();
                let ops = selection::map_output_parameters(&outputs)?;
                inst.state = InstanceState::Completed;
                inst.output_parameters = Some(ops.clone());
                let req = inst.request().clone();
                out.push(reply_to_client(
                    &c,
                    MessageBody::CompletedReply {
                        ontology: req.ontology().to_owned(),
                        qos: req.qos(),
                        output_parameters: ops,
                    },
                ));
            }
            (RuleId::R4bNotifySomePending, _) => {}
            (RuleId::R6AaInvoke, _) => {
                let Address::Aa(c, n) = &msg.receiver else { unreachable!("guarded") };
                let aa = next.instance_mut(c).expect("guarded").get_aa_mut(n)?;
                aa.state = ActivityState::Invoking;
                let ips = aa.input_parameters.clone().unwrap_or_default();
                out.push(Message::new(msg.receiver.clone(), Address::Wsoi(c.clone()), MessageBody::InvokeAck));
                out.push(Message::new(
                    msg.receiver.clone(),
                    Address::ws(c, n),
                    MessageBody::InvokeWs { input_parameters: ips },
                ));
            }
            (RuleId::R8WsInvoke, MessageBody::InvokeWs { input_parameters }) => {
                let Address::Ws(c, n) = &msg.receiver else { unreachable!("guarded") };
                let endpoint = config
                    .get_wsoi(c)
                    .and_then(|i| i.get_aa(n).ok())
                    .and_then(|aa| aa.ws.endpoint.clone())
                    .expect("guarded");
                out.push(Message::new(
                    msg.receiver.clone(),
                    Address::aa(c, n),
                    MessageBody::InvokeReply { output_parameters: simulated_outputs(&endpoint, input_parameters) },
                ));
            }
            (RuleId::R7AaReturn, MessageBody::InvokeReply { output_parameters }) => {
                let Address::Aa(c, n) = &msg.receiver else { unreachable!("guarded") };
                let aa = next.instance_mut(c).expect("guarded").get_aa_mut(n)?;
                aa.state = ActivityState::Returned;
                aa.output_parameters = Some(output_parameters.clone());
                out.push(Message::new(
                    msg.receiver.clone(),
                    Address::Wsoi(c.clone()),
                    MessageBody::Notify { state: ActivityState::Returned },
                ));
            }
            _ => unreachable!("guard admitted {rule} for {msg}"),
        }
        for m in &out {
            next.post(m.clone());
        }
        Ok((next, out))
    }

    /// What delivering `msg` may touch. Depends only on the message, so a
    /// pending message keeps its footprint across configurations.
    pub fn footprint(&self, msg: &Message) -> BTreeSet<Footprint> {
        let mut fp = BTreeSet::new();
        let all_aas = |fp: &mut BTreeSet<Footprint>, c: &ClientId| {
            for name in self.workflow.activity_names() {
                fp.insert(Footprint::Aa(c.clone(), name.to_owned()));
            }
        };
        match (&msg.receiver, msg.kind()) {
            (Address::Wsoim, _) => {
                if let Some(c) = msg.client() {
                    fp.insert(Footprint::Wsoi(c.clone()));
                    all_aas(&mut fp, c);
                }
            }
            (Address::Ss, _) => {
                if let Some(c) = msg.sender.client() {
                    fp.insert(Footprint::Wsoi(c.clone()));
                }
            }
            (Address::Wsoi(c), MessageKind::InvokeAck) => {
                fp.insert(Footprint::Wsoi(c.clone()));
            }
            (Address::Wsoi(c), _) => {
                fp.insert(Footprint::Wsoi(c.clone()));
                all_aas(&mut fp, c);
            }
            (Address::Aa(c, n), _) => {
                fp.insert(Footprint::Aa(c.clone(), n.clone()));
            }
            (Address::Ws(c, n), _) => {
                fp.insert(Footprint::Ws(c.clone(), n.clone()));
            }
            (Address::Client(c), _) => {
                fp.insert(Footprint::Wsoi(c.clone()));
            }
        }
        fp
    }
}

/// Acknowledgements and notifications still in flight to an instance.
fn outstanding_reports(config: &Configuration, wsoi: &Address) -> usize {
    config.in_flight_to(wsoi).filter(|m| matches!(m.kind(), MessageKind::InvokeAck | MessageKind::Notify)).count()
}

fn receiver_client(msg: &Message) -> ClientId {
    match &msg.receiver {
        Address::Wsoi(c) => c.clone(),
        other => unreachable!("not an instance address: {other}"),
    }
}

fn reply_to_client(c: &ClientId, body: MessageBody) -> Message {
    Message::new(Address::Wsoi(c.clone()), Address::Client(c.clone()), body)
}

/// Deterministic stand-in for a remote service's results:
/// `{"result": "<endpoint>:<digest of inputs>"}`.
pub fn simulated_outputs(endpoint: &str, inputs: &ParamMap) -> ParamMap {
    let canonical = serde_json::to_string(inputs).expect("string map serializes");
    let digest = Sha256::digest(canonical.as_bytes());
    let hex: String = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
    ParamMap::from([("result".to_owned(), format!("{endpoint}:{hex}"))])
}
