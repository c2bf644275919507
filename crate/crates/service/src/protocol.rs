//! Wire messages. Every document carries `"v": 1` and a `"type"` tag.

use catch_core::hand_model::{CableId, Finger, JointId};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::session::SessionState;

pub const PROTOCOL_VERSION: u32 = 1;

/// A state-changing request. Accepted commands are totally ordered by tick.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Command {
    /// Cable reeled in relative to rest, mm; negative pays out slack.
    SetCable { cable: CableId, displacement_mm: f64 },
    SetDirectJoint { joint: JointId, deg: f64 },
    /// Palmar fingertip load; zero removes it.
    SetForce { finger: Finger, newtons: f64 },
    /// Object contact felt by the thumb during MCP flexion.
    SetResistance { active: bool },
    LoadPreset { taxonomy_id: u8 },
    Reset {},
}

#[derive(Clone, Debug, PartialEq)]
pub enum RequestBody {
    Command(Command),
    /// Read-only: the current state, sent to the requester only.
    Snapshot,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Request {
    /// Opaque client correlation id, echoed in the ack.
    pub id: Option<Value>,
    pub body: RequestBody,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ack {
    /// Session tick after handling the request.
    pub tick: u64,
    pub accepted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    /// The accepted command, so an ack log can be replayed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<Value>,
}

impl Ack {
    pub fn accepted(tick: u64, command: Command, id: Option<Value>) -> Self {
        Ack { tick, accepted: true, reason: None, command: Some(command), id }
    }

    pub fn rejected(tick: u64, reason: impl Into<String>, id: Option<Value>) -> Self {
        Ack { tick, accepted: false, reason: Some(reason.into()), command: None, id }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Ack(Ack),
    State(Box<SessionState>),
}

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    v: u32,
    #[serde(flatten)]
    body: T,
}

impl ServerMessage {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&Envelope { v: PROTOCOL_VERSION, body: self }).expect("server messages serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let value: Value = serde_json::from_str(text).map_err(|e| format!("malformed JSON: {e}"))?;
        check_version(&value)?;
        let Value::Object(mut map) = value else { unreachable!("version check requires an object") };
        map.remove("v");
        serde_json::from_value(Value::Object(map)).map_err(|e| e.to_string())
    }
}

impl Request {
    /// Wire form of a command request.
    pub fn command_json(command: &Command) -> String {
        let mut value = serde_json::to_value(command).expect("commands serialize");
        value["v"] = PROTOCOL_VERSION.into();
        value.to_string()
    }
}

fn check_version(value: &Value) -> Result<(), String> {
    let Some(map) = value.as_object() else {
        return Err("message must be a JSON object".into());
    };
    match map.get("v") {
        None => Err("missing protocol version `v`".into()),
        Some(v) if v.as_u64() == Some(u64::from(PROTOCOL_VERSION)) => Ok(()),
        Some(v) => Err(format!("unsupported protocol version {v}; this server speaks {PROTOCOL_VERSION}")),
    }
}

/// Parses one client document. The error string is the rejection reason.
pub fn parse_request(text: &str) -> Result<Request, String> {
    let value: Value = serde_json::from_str(text).map_err(|e| format!("malformed JSON: {e}"))?;
    check_version(&value)?;
    let Value::Object(mut map) = value else { unreachable!("version check requires an object") };
    map.remove("v");
    let id = map.remove("id");
    if map.get("type").and_then(Value::as_str) == Some("snapshot") {
        if map.len() > 1 {
            return Err("snapshot takes no fields".into());
        }
        return Ok(Request { id, body: RequestBody::Snapshot });
    }
    let command = serde_json::from_value(Value::Object(map)).map_err(|e| format!("invalid command: {e}"))?;
    Ok(Request { id, body: RequestBody::Command(command) })
}
