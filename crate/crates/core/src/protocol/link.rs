use std::sync::mpsc::{channel, Receiver, RecvError, SendError, Sender, TryRecvError};

use super::{decode, encode, DecodeError, Message, CRC_LEN, HEADER_LEN, MAX_PAYLOAD};

/// Per-direction sequence numbers.
#[derive(Debug, Clone, Default)]
pub struct SeqCounter {
    next: u32,
}

impl SeqCounter {
    pub fn new() -> Self {
        Self::default()
    }

    #[allow(clippy::should_implement_trait)]
    pub fn next(&mut self) -> u32 {
        let s = self.next;
        self.next = self.next.wrapping_add(1);
        s
    }

    pub fn peek(&self) -> u32 {
        self.next
    }
}

/// Stream framing: a u32 little-endian length, then the encoded message.
pub fn length_prefixed(encoded: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(4 + encoded.len());
    out.extend_from_slice(&(encoded.len() as u32).to_le_bytes());
    out.extend_from_slice(encoded);
    out
}

/// Incremental parser for length-prefixed streams.
#[derive(Debug, Default)]
pub struct LengthPrefixedReader {
    buf: Vec<u8>,
}

impl LengthPrefixedReader {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, bytes: &[u8]) {
        self.buf.extend_from_slice(bytes);
    }

    pub fn buffered(&self) -> usize {
        self.buf.len()
    }

    /// Next complete message, if buffered. An oversized length prefix is
    /// unrecoverable; the buffer is cleared.
    pub fn next_message(&mut self) -> Option<Result<Message, DecodeError>> {
        if self.buf.len() < 4 {
            return None;
        }
        let n = u32::from_le_bytes(self.buf[..4].try_into().expect("4 bytes")) as usize;
        if n > HEADER_LEN + MAX_PAYLOAD + CRC_LEN {
            self.buf.clear();
            return Some(Err(DecodeError::Oversized { offset: 0, length: n }));
        }
        if self.buf.len() < 4 + n {
            return None;
        }
        let frame: Vec<u8> = self.buf.drain(..4 + n).skip(4).collect();
        Some(decode(&frame))
    }
}

/// One end of an in-process link. Messages cross as encoded bytes, so the
/// codec is exercised exactly as on a wire.
#[derive(Debug)]
pub struct InProcessEnd {
    tx: Sender<Vec<u8>>,
    rx: Receiver<Vec<u8>>,
}

#[derive(Debug, thiserror::Error)]
pub enum LinkError {
    #[error("peer hung up")]
    Disconnected,
    #[error(transparent)]
    Encode(#[from] super::EncodeError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

impl InProcessEnd {
    pub fn send(&self, msg: &Message) -> Result<(), LinkError> {
        let bytes = encode(msg)?;
        self.tx.send(bytes).map_err(|_: SendError<_>| LinkError::Disconnected)
    }

    pub fn recv(&self) -> Result<Message, LinkError> {
        let bytes = self.rx.recv().map_err(|_: RecvError| LinkError::Disconnected)?;
        Ok(decode(&bytes)?)
    }

    pub fn try_recv(&self) -> Result<Option<Message>, LinkError> {
        match self.rx.try_recv() {
            Ok(bytes) => Ok(Some(decode(&bytes)?)),
            Err(TryRecvError::Empty) => Ok(None),
            Err(TryRecvError::Disconnected) => Err(LinkError::Disconnected),
        }
    }
}

pub fn in_process_pair() -> (InProcessEnd, InProcessEnd) {
    let (atx, arx) = channel();
    let (btx, brx) = channel();
    (InProcessEnd { tx: atx, rx: brx }, InProcessEnd { tx: btx, rx: arx })
}
