//! Host/device wire protocol.
//!
//! Layout, little-endian:
//! `"VETP" | type u8 | seq u32 | length u32 | payload | crc32`, where the CRC
//! covers `type | seq | length | payload`. The same [`Message`] values also
//! have a JSON form (tagged by `"type"`) used by the WebSocket gateway.

mod chunk;
mod codec;
mod link;
pub mod schema;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sim::PerceivedLocation;
use crate::stim::StimParams;
use crate::tactile::FingerZone;

pub use chunk::{chunk_frame, FrameAssembler, FRAME_CHUNK_BYTES};
pub use codec::{decode, encode};
pub use link::{in_process_pair, length_prefixed, InProcessEnd, LengthPrefixedReader, LinkError, SeqCounter};

pub const MAGIC: [u8; 4] = *b"VETP";
pub const HEADER_LEN: usize = 13;
pub const CRC_LEN: usize = 4;
pub const MAX_PAYLOAD: usize = 64 * 1024;
pub const DEFAULT_PORT: u16 = 7420;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum MessageType {
    FrameChunk = 0x01,
    StimCommand = 0x02,
    Telemetry = 0x03,
    Ack = 0x04,
    Error = 0x05,
    PerceptEvent = 0x06,
    AppEvent = 0x07,
}

impl MessageType {
    pub const ALL: [MessageType; 7] = [
        MessageType::FrameChunk,
        MessageType::StimCommand,
        MessageType::Telemetry,
        MessageType::Ack,
        MessageType::Error,
        MessageType::PerceptEvent,
        MessageType::AppEvent,
    ];

    pub fn from_byte(b: u8) -> Option<Self> {
        Self::ALL.get((b as usize).wrapping_sub(1)).copied()
    }

    /// JSON tag of this type.
    pub fn name(self) -> &'static str {
        match self {
            MessageType::FrameChunk => "frame_chunk",
            MessageType::StimCommand => "stim_command",
            MessageType::Telemetry => "telemetry",
            MessageType::Ack => "ack",
            MessageType::Error => "error",
            MessageType::PerceptEvent => "percept_event",
            MessageType::AppEvent => "app_event",
        }
    }
}

/// One slice of an encoded tactile frame.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameChunk {
    pub frame_seq: u32,
    pub chunk_index: u16,
    pub chunk_count: u16,
    pub total_len: u32,
    #[serde(with = "base64_bytes")]
    pub data: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Telemetry {
    /// Monitor reading per channel (AC1, AC2).
    pub measured_ma: [f64; 2],
    pub power_draw_ma: f64,
    /// Number of electrodes packed into `switch_states`, two bits each
    /// (0 open, 1 stim, 2 ground): film electrodes first, then returns.
    pub switch_count: u16,
    pub switch_states: Vec<u8>,
    pub timestamp_us: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Ack {
    /// Sequence number being acknowledged, if any.
    #[serde(default)]
    pub acked_seq: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub code: u16,
    pub message: String,
}

impl ErrorReport {
    pub const MALFORMED: u16 = 1;
    pub const REJECTED: u16 = 2;
    pub const DEVICE_DISCONNECTED: u16 = 3;
    pub const INTERNAL: u16 = 4;

    pub fn new(code: u16, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerceptEvent {
    pub location: PerceivedLocation,
    pub intensity_score: f64,
    pub zone: FingerZone,
}

/// Application-level event, e.g. a touchpad press. `data` is free-form JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppEvent {
    pub name: String,
    #[serde(default)]
    pub data: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Payload {
    FrameChunk(FrameChunk),
    StimCommand(StimParams),
    Telemetry(Telemetry),
    Ack(Ack),
    Error(ErrorReport),
    PerceptEvent(PerceptEvent),
    AppEvent(AppEvent),
}

impl Payload {
    pub fn message_type(&self) -> MessageType {
        match self {
            Payload::FrameChunk(_) => MessageType::FrameChunk,
            Payload::StimCommand(_) => MessageType::StimCommand,
            Payload::Telemetry(_) => MessageType::Telemetry,
            Payload::Ack(_) => MessageType::Ack,
            Payload::Error(_) => MessageType::Error,
            Payload::PerceptEvent(_) => MessageType::PerceptEvent,
            Payload::AppEvent(_) => MessageType::AppEvent,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    #[serde(default)]
    pub seq: u32,
    #[serde(flatten)]
    pub payload: Payload,
}

impl Message {
    pub fn new(seq: u32, payload: Payload) -> Self {
        Self { seq, payload }
    }

    pub fn message_type(&self) -> MessageType {
        self.payload.message_type()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("messages serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodeError {
    #[error("payload of {length} bytes exceeds the {MAX_PAYLOAD}-byte limit")]
    Oversized { length: usize },
    #[error("{field} has {count} entries, more than fit in a u16")]
    TooMany { field: &'static str, count: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("bad magic at byte {offset}")]
    BadMagic { offset: usize },
    #[error("truncated at byte {offset}: need {needed} bytes, have {available}")]
    Truncated {
        offset: usize,
        needed: usize,
        available: usize,
    },
    #[error("payload length {length} at byte {offset} exceeds {MAX_PAYLOAD}")]
    Oversized { offset: usize, length: usize },
    #[error("crc mismatch at byte {offset}: stored {stored:#010x}, computed {computed:#010x}")]
    CrcMismatch { offset: usize, stored: u32, computed: u32 },
    #[error("unknown message type {type_byte:#04x} at byte {offset}")]
    UnknownType { offset: usize, type_byte: u8 },
    #[error("malformed payload at byte {offset}: {reason}")]
    Malformed { offset: usize, reason: String },
    #[error("{extra} unexpected bytes after the message at byte {offset}")]
    TrailingBytes { offset: usize, extra: usize },
}

impl DecodeError {
    pub fn offset(&self) -> usize {
        match *self {
            DecodeError::BadMagic { offset }
            | DecodeError::Truncated { offset, .. }
            | DecodeError::Oversized { offset, .. }
            | DecodeError::CrcMismatch { offset, .. }
            | DecodeError::UnknownType { offset, .. }
            | DecodeError::Malformed { offset, .. }
            | DecodeError::TrailingBytes { offset, .. } => offset,
        }
    }
}

mod base64_bytes {
    use base64::engine::general_purpose::STANDARD;
    use base64::Engine;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&STANDARD.encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let text = String::deserialize(d)?;
        STANDARD.decode(text).map_err(serde::de::Error::custom)
    }
}
