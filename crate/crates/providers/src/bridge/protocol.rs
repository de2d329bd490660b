//! Newline-delimited JSON messages, one object per line.

use serde::{Deserialize, Serialize};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Request {
    Hello {
        version: u32,
        env: String,
    },
    Subgoals {
        id: u64,
        state: String,
        k: usize,
        max_candidates: usize,
    },
    Value {
        id: u64,
        state: String,
    },
    Policy {
        id: u64,
        state: String,
        subgoal: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub state: String,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Response {
    HelloOk {
        version: u32,
    },
    SubgoalsOk {
        id: u64,
        candidates: Vec<Candidate>,
    },
    ValueOk {
        id: u64,
        value: f64,
    },
    PolicyOk {
        id: u64,
        action: String,
    },
    Error {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<u64>,
        message: String,
        /// Set on handshake rejections: the version the server speaks.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        version: Option<u32>,
    },
}

impl Response {
    pub fn id(&self) -> Option<u64> {
        match self {
            Response::HelloOk { .. } => None,
            Response::SubgoalsOk { id, .. } | Response::ValueOk { id, .. } | Response::PolicyOk { id, .. } => Some(*id),
            Response::Error { id, .. } => *id,
        }
    }
}

pub fn encode<T: Serialize>(msg: &T) -> String {
    let mut line = serde_json::to_string(msg).expect("protocol messages serialize");
    line.push('\n');
    line
}
