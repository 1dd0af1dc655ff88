use std::collections::BTreeMap;

use super::{DecodeError, FrameChunk};

/// Frame bytes carried per chunk; keeps every chunk well under the payload cap.
pub const FRAME_CHUNK_BYTES: usize = 32 * 1024;

/// Splits encoded frame bytes into chunks of at most `chunk_bytes`
/// (clamped to `1..=FRAME_CHUNK_BYTES`). An empty frame still yields one chunk.
pub fn chunk_frame(frame_seq: u32, bytes: &[u8], chunk_bytes: usize) -> Vec<FrameChunk> {
    let size = chunk_bytes.clamp(1, FRAME_CHUNK_BYTES);
    let pieces: Vec<&[u8]> = if bytes.is_empty() {
        vec![&[][..]]
    } else {
        bytes.chunks(size).collect()
    };
    let count = u16::try_from(pieces.len()).expect("frame too large to chunk");
    pieces
        .into_iter()
        .enumerate()
        .map(|(i, data)| FrameChunk {
            frame_seq,
            chunk_index: i as u16,
            chunk_count: count,
            total_len: bytes.len() as u32,
            data: data.to_vec(),
        })
        .collect()
}

#[derive(Debug)]
struct Partial {
    count: u16,
    total_len: u32,
    parts: Vec<Option<Vec<u8>>>,
    received: usize,
}

/// Reassembles frames from chunks arriving in any order and of any sizes.
#[derive(Debug)]
pub struct FrameAssembler {
    pending: BTreeMap<u32, Partial>,
    max_pending: usize,
}

impl Default for FrameAssembler {
    fn default() -> Self {
        Self::new(8)
    }
}

impl FrameAssembler {
    /// Keeps at most `max_pending` incomplete frames; the oldest is dropped first.
    pub fn new(max_pending: usize) -> Self {
        Self {
            pending: BTreeMap::new(),
            max_pending: max_pending.max(1),
        }
    }

    pub fn pending(&self) -> usize {
        self.pending.len()
    }

    /// Adds a chunk. Returns `(frame_seq, bytes)` once a frame is complete.
    pub fn push(&mut self, chunk: FrameChunk) -> Result<Option<(u32, Vec<u8>)>, DecodeError> {
        let bad = |reason: String| DecodeError::Malformed { offset: 0, reason };
        if chunk.chunk_count == 0 || chunk.chunk_index >= chunk.chunk_count {
            return Err(bad(format!(
                "chunk {} of {} in frame {}",
                chunk.chunk_index, chunk.chunk_count, chunk.frame_seq
            )));
        }
        if !self.pending.contains_key(&chunk.frame_seq) && self.pending.len() >= self.max_pending {
            self.pending.pop_first();
        }
        let entry = self.pending.entry(chunk.frame_seq).or_insert_with(|| Partial {
            count: chunk.chunk_count,
            total_len: chunk.total_len,
            parts: vec![None; chunk.chunk_count as usize],
            received: 0,
        });
        if entry.count != chunk.chunk_count || entry.total_len != chunk.total_len {
            let seq = chunk.frame_seq;
            self.pending.remove(&seq);
            return Err(bad(format!("inconsistent chunk headers in frame {seq}")));
        }
        let slot = &mut entry.parts[chunk.chunk_index as usize];
        if slot.is_some() {
            return Err(bad(format!(
                "duplicate chunk {} in frame {}",
                chunk.chunk_index, chunk.frame_seq
            )));
        }
        *slot = Some(chunk.data);
        entry.received += 1;
        if entry.received < entry.count as usize {
            return Ok(None);
        }
        let done = self.pending.remove(&chunk.frame_seq).expect("entry present");
        let bytes: Vec<u8> = done.parts.into_iter().flatten().flatten().collect();
        if bytes.len() != done.total_len as usize {
            return Err(bad(format!(
                "frame {} reassembled to {} bytes, header says {}",
                chunk.frame_seq,
                bytes.len(),
                done.total_len
            )));
        }
        Ok(Some((chunk.frame_seq, bytes)))
    }
}
