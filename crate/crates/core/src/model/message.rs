use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{ActivityState, ClientId, ParamMap, QoSSpec};

/// Where a message comes from or goes to.
///
/// Web services are known only by the activity they serve, so a `Ws`
/// address carries the same pair as the `Aa` it is bound to.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Address {
    Client(ClientId),
    Wsoim,
    Ss,
    Wsoi(ClientId),
    Aa(ClientId, String),
    Ws(ClientId, String),
}

impl Address {
    pub fn aa(client: &ClientId, aa_name: &str) -> Self {
        Address::Aa(client.clone(), aa_name.to_owned())
    }

    pub fn ws(client: &ClientId, aa_name: &str) -> Self {
        Address::Ws(client.clone(), aa_name.to_owned())
    }

    pub fn role(&self) -> Role {
        match self {
            Address::Client(_) => Role::Ca,
            Address::Wsoim => Role::Wsoim,
            Address::Ss => Role::Ss,
            Address::Wsoi(_) => Role::Wsoi,
            Address::Aa(..) => Role::Aa,
            Address::Ws(..) => Role::Ws,
        }
    }

    /// The client this address belongs to, if it is per-request.
    pub fn client(&self) -> Option<&ClientId> {
        match self {
            Address::Client(c) | Address::Wsoi(c) | Address::Aa(c, _) | Address::Ws(c, _) => Some(c),
            Address::Wsoim | Address::Ss => None,
        }
    }

    pub fn activity(&self) -> Option<&str> {
        match self {
            Address::Aa(_, n) | Address::Ws(_, n) => Some(n),
            _ => None,
        }
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Address::Client(c) => write!(f, "CA/{c}"),
            Address::Wsoim => f.write_str("WSOIM"),
            Address::Ss => f.write_str("SS"),
            Address::Wsoi(c) => write!(f, "WSOI/{c}"),
            Address::Aa(c, n) => write!(f, "AA/{c}/{n}"),
            Address::Ws(c, n) => write!(f, "WS/{c}/{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed actor address `{0}`")]
pub struct AddressParseError(pub String);

impl FromStr for Address {
    type Err = AddressParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || AddressParseError(s.to_owned());
        match s {
            "WSOIM" => return Ok(Address::Wsoim),
            "SS" => return Ok(Address::Ss),
            _ => {}
        }
        let (role, rest) = s.split_once('/').ok_or_else(bad)?;
        let nonempty = |part: &str| if part.is_empty() { Err(bad()) } else { Ok(part.to_owned()) };
        match role {
            "CA" => Ok(Address::Client(ClientId::new(nonempty(rest)?))),
            "WSOI" => Ok(Address::Wsoi(ClientId::new(nonempty(rest)?))),
            "AA" | "WS" => {
                let (client, name) = rest.split_once('/').ok_or_else(bad)?;
                let client = ClientId::new(nonempty(client)?);
                let name = nonempty(name)?;
                Ok(if role == "AA" { Address::Aa(client, name) } else { Address::Ws(client, name) })
            }
            _ => Err(bad()),
        }
    }
}

impl Serialize for Address {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Address {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Actor roles of the engine architecture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Ca,
    Wsoim,
    Wsoi,
    Aa,
    Ss,
    Ws,
}

/// The service picked for one activity by a granting selection.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Allocation {
    pub candidate_id: String,
    pub qos: QoSSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MessageKind {
    WsoReq,
    Select,
    SelectReplyGranted,
    SelectReplyDenied,
    Invoke,
    InvokeAck,
    InvokeWs,
    InvokeReply,
    Notify,
    GrantedReply,
    CompletedReply,
    DeniedReply,
}

impl MessageKind {
    pub const ALL: [MessageKind; 12] = [
        MessageKind::WsoReq,
        MessageKind::Select,
        MessageKind::SelectReplyGranted,
        MessageKind::SelectReplyDenied,
        MessageKind::Invoke,
        MessageKind::InvokeAck,
        MessageKind::InvokeWs,
        MessageKind::InvokeReply,
        MessageKind::Notify,
        MessageKind::GrantedReply,
        MessageKind::CompletedReply,
        MessageKind::DeniedReply,
    ];

    /// The (sender, receiver) roles the message table allows for this kind.
    pub fn roles(self) -> (Role, Role) {
        use MessageKind::*;
        match self {
            WsoReq => (Role::Ca, Role::Wsoim),
            Select => (Role::Wsoi, Role::Ss),
            SelectReplyGranted | SelectReplyDenied => (Role::Ss, Role::Wsoi),
            Invoke => (Role::Wsoi, Role::Aa),
            InvokeAck | Notify => (Role::Aa, Role::Wsoi),
            InvokeWs => (Role::Aa, Role::Ws),
            InvokeReply => (Role::Ws, Role::Aa),
            GrantedReply | CompletedReply | DeniedReply => (Role::Wsoi, Role::Ca),
        }
    }
}

/// Payloads, one variant per row of the message table.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum MessageBody {
    WsoReq { client_id: ClientId, ontology: String, qos: QoSSpec, input_parameters: ParamMap },
    Select { qos: QoSSpec, ontology: String },
    SelectReplyGranted { allocation: BTreeMap<String, Allocation> },
    SelectReplyDenied,
    Invoke,
    InvokeAck,
    InvokeWs { input_parameters: ParamMap },
    InvokeReply { output_parameters: ParamMap },
    Notify { state: ActivityState },
    GrantedReply { ontology: String, qos: QoSSpec },
    CompletedReply { ontology: String, qos: QoSSpec, output_parameters: ParamMap },
    DeniedReply { ontology: String, qos: QoSSpec },
}

impl MessageBody {
    pub fn kind(&self) -> MessageKind {
        match self {
            MessageBody::WsoReq { .. } => MessageKind::WsoReq,
            MessageBody::Select { .. } => MessageKind::Select,
            MessageBody::SelectReplyGranted { .. } => MessageKind::SelectReplyGranted,
            MessageBody::SelectReplyDenied => MessageKind::SelectReplyDenied,
            MessageBody::Invoke => MessageKind::Invoke,
            MessageBody::InvokeAck => MessageKind::InvokeAck,
            MessageBody::InvokeWs { .. } => MessageKind::InvokeWs,
            MessageBody::InvokeReply { .. } => MessageKind::InvokeReply,
            MessageBody::Notify { .. } => MessageKind::Notify,
            MessageBody::GrantedReply { .. } => MessageKind::GrantedReply,
            MessageBody::CompletedReply { .. } => MessageKind::CompletedReply,
            MessageBody::DeniedReply { .. } => MessageKind::DeniedReply,
        }
    }
}

/// A message in flight or delivered.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Message {
    pub sender: Address,
    pub receiver: Address,
    #[serde(flatten)]
    pub body: MessageBody,
}

/// Why a message does not match any row of the message table.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TableViolation {
    #[error("{kind:?} must travel {expected:?}, found {found:?}")]
    Direction { kind: MessageKind, expected: (Role, Role), found: (Role, Role) },
    #[error("{kind:?} links addresses of different requests or activities")]
    Mismatch { kind: MessageKind },
    #[error("notify must carry state Returned, found {0:?}")]
    NotifyState(ActivityState),
}

impl Message {
    pub fn new(sender: Address, receiver: Address, body: MessageBody) -> Self {
        Self { sender, receiver, body }
    }

    pub fn kind(&self) -> MessageKind {
        self.body.kind()
    }

    /// The request this message belongs to.
    pub fn client(&self) -> Option<&ClientId> {
        match &self.body {
            MessageBody::WsoReq { client_id, .. } => Some(client_id),
            _ => self.sender.client().or_else(|| self.receiver.client()),
        }
    }

    /// Checks the message against the closed message table: kind, sender
    /// role, receiver role, and that both ends belong to the same request
    /// (and activity, where one is involved).
    pub fn check_table(&self) -> Result<(), TableViolation> {
        let kind = self.kind();
        let expected = kind.roles();
        let found = (self.sender.role(), self.receiver.role());
        if expected != found {
            return Err(TableViolation::Direction { kind, expected, found });
        }
        let linked = match (&self.sender, &self.receiver) {
            (Address::Client(c), Address::Wsoim) => match &self.body {
                MessageBody::WsoReq { client_id, .. } => c == client_id,
                _ => false,
            },
            (Address::Wsoi(_), Address::Ss) | (Address::Ss, Address::Wsoi(_)) => true,
            (Address::Wsoi(c), Address::Client(d)) => c == d,
            (Address::Wsoi(c), Address::Aa(d, _)) | (Address::Aa(d, _), Address::Wsoi(c)) => c == d,
            (Address::Aa(c, n), Address::Ws(d, m)) | (Address::Ws(d, m), Address::Aa(c, n)) => c == d && n == m,
            _ => false,
        };
        if !linked {
            return Err(TableViolation::Mismatch { kind });
        }
        if let MessageBody::Notify { state } = &self.body {
            if *state != ActivityState::Returned {
                return Err(TableViolation::NotifyState(*state));
            }
        }
        Ok(())
    }
}

impl Ord for Message {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.kind(), &self.sender, &self.receiver, self.client(), &self.body).cmp(&(
            other.kind(),
            &other.sender,
            &other.receiver,
            other.client(),
            &other.body,
        ))
    }
}

impl PartialOrd for Message {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <| {:?} @ {}", self.receiver, self.kind(), self.sender)
    }
}
