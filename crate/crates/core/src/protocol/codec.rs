use std::collections::BTreeSet;

use super::{
    Ack, AppEvent, DecodeError, EncodeError, ErrorReport, FrameChunk, Message, MessageType, Payload, PerceptEvent,
    Telemetry, CRC_LEN, HEADER_LEN, MAGIC, MAX_PAYLOAD,
};
use crate::sim::PerceivedLocation;
use crate::stim::{Channel, Polarity, StimParams};
use crate::tactile::FingerZone;

fn crc(type_seq_len: &[u8], payload: &[u8]) -> u32 {
    let mut h = crc32fast::Hasher::new();
    h.update(type_seq_len);
    h.update(payload);
    h.finalize()
}

fn count_u16(field: &'static str, count: usize) -> Result<u16, EncodeError> {
    u16::try_from(count).map_err(|_| EncodeError::TooMany { field, count })
}

fn encode_payload(payload: &Payload) -> Result<Vec<u8>, EncodeError> {
    let mut out = Vec::new();
    match payload {
        Payload::FrameChunk(c) => {
            out.extend_from_slice(&c.frame_seq.to_le_bytes());
            out.extend_from_slice(&c.chunk_index.to_le_bytes());
            out.extend_from_slice(&c.chunk_count.to_le_bytes());
            out.extend_from_slice(&c.total_len.to_le_bytes());
            out.extend_from_slice(&c.data);
        }
        Payload::StimCommand(p) => {
            out.push(match p.channel {
                Channel::Ac1 => 0,
                Channel::Ac2 => 1,
            });
            out.extend_from_slice(&p.frequency_hz.to_le_bytes());
            out.extend_from_slice(&p.amplitude_ma.to_le_bytes());
            out.push(match p.polarity {
                Polarity::Positive => 0,
                Polarity::Negative => 1,
                Polarity::Alternating => 2,
            });
            out.extend_from_slice(&p.pulse_width_us.to_le_bytes());
            out.extend_from_slice(&p.duration_ms.to_le_bytes());
            out.extend_from_slice(&count_u16("electrodes", p.electrodes.len())?.to_le_bytes());
            for id in &p.electrodes {
                out.extend_from_slice(&id.to_le_bytes());
            }
        }
        Payload::Telemetry(t) => {
            for m in t.measured_ma {
                out.extend_from_slice(&m.to_le_bytes());
            }
            out.extend_from_slice(&t.power_draw_ma.to_le_bytes());
            out.extend_from_slice(&t.switch_count.to_le_bytes());
            out.extend_from_slice(&count_u16("switch_states", t.switch_states.len())?.to_le_bytes());
            out.extend_from_slice(&t.switch_states);
            out.extend_from_slice(&t.timestamp_us.to_le_bytes());
        }
        Payload::Ack(a) => {
            if let Some(s) = a.acked_seq {
                out.extend_from_slice(&s.to_le_bytes());
            }
        }
        Payload::Error(e) => {
            out.extend_from_slice(&e.code.to_le_bytes());
            out.extend_from_slice(e.message.as_bytes());
        }
        Payload::PerceptEvent(p) => {
            out.push(p.location.index());
            out.extend_from_slice(&p.intensity_score.to_le_bytes());
            out.push(p.zone.index());
        }
        Payload::AppEvent(a) => {
            out.extend_from_slice(serde_json::to_string(a).expect("app events serialize").as_bytes());
        }
    }
    Ok(out)
}

/// Serializes a message to its wire form.
pub fn encode(msg: &Message) -> Result<Vec<u8>, EncodeError> {
    let payload = encode_payload(&msg.payload)?;
    if payload.len() > MAX_PAYLOAD {
        return Err(EncodeError::Oversized { length: payload.len() });
    }
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len() + CRC_LEN);
    out.extend_from_slice(&MAGIC);
    out.push(msg.message_type() as u8);
    out.extend_from_slice(&msg.seq.to_le_bytes());
    out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
    let sum = crc(&out[4..], &payload);
    out.extend_from_slice(&payload);
    out.extend_from_slice(&sum.to_le_bytes());
    Ok(out)
}

/// Cursor over a payload that reports absolute byte offsets.
struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    base: usize,
}

impl<'a> Reader<'a> {
    fn offset(&self) -> usize {
        self.base + self.pos
    }

    fn malformed(&self, reason: impl Into<String>) -> DecodeError {
        self.malformed_at(self.offset(), reason)
    }

    fn malformed_at(&self, offset: usize, reason: impl Into<String>) -> DecodeError {
        DecodeError::Malformed {
            offset,
            reason: reason.into(),
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], DecodeError> {
        if self.buf.len() - self.pos < n {
            return Err(self.malformed(format!("needs {n} more bytes")));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], DecodeError> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn u8(&mut self) -> Result<u8, DecodeError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, DecodeError> {
        Ok(u16::from_le_bytes(self.array()?))
    }

    fn u32(&mut self) -> Result<u32, DecodeError> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    fn u64(&mut self) -> Result<u64, DecodeError> {
        Ok(u64::from_le_bytes(self.array()?))
    }

    fn f64(&mut self) -> Result<f64, DecodeError> {
        Ok(f64::from_le_bytes(self.array()?))
    }

    fn rest(&mut self) -> &'a [u8] {
        let s = &self.buf[self.pos..];
        self.pos = self.buf.len();
        s
    }

    fn finish(&self) -> Result<(), DecodeError> {
        if self.pos != self.buf.len() {
            return Err(self.malformed(format!("{} unused payload bytes", self.buf.len() - self.pos)));
        }
        Ok(())
    }
}

fn decode_payload(ty: MessageType, payload: &[u8]) -> Result<Payload, DecodeError> {
    let mut r = Reader {
        buf: payload,
        pos: 0,
        base: HEADER_LEN,
    };
    let p = match ty {
        MessageType::FrameChunk => {
            let frame_seq = r.u32()?;
            let chunk_index = r.u16()?;
            let chunk_count = r.u16()?;
            let total_len = r.u32()?;
            Payload::FrameChunk(FrameChunk {
                frame_seq,
                chunk_index,
                chunk_count,
                total_len,
                data: r.rest().to_vec(),
            })
        }
        MessageType::StimCommand => {
            let at = r.offset();
            let channel = match r.u8()? {
                0 => Channel::Ac1,
                1 => Channel::Ac2,
                c => return Err(r.malformed_at(at, format!("channel {c}"))),
            };
            let frequency_hz = r.f64()?;
            let amplitude_ma = r.f64()?;
            let at = r.offset();
            let polarity = match r.u8()? {
                0 => Polarity::Positive,
                1 => Polarity::Negative,
                2 => Polarity::Alternating,
                p => return Err(r.malformed_at(at, format!("polarity {p}"))),
            };
            let pulse_width_us = r.u32()?;
            let duration_ms = r.u32()?;
            let n = r.u16()?;
            let mut electrodes = BTreeSet::new();
            for _ in 0..n {
                if !electrodes.insert(r.u16()?) {
                    return Err(r.malformed("duplicate electrode id"));
                }
            }
            Payload::StimCommand(StimParams {
                channel,
                frequency_hz,
                amplitude_ma,
                polarity,
                pulse_width_us,
                duration_ms,
                electrodes,
            })
        }
        MessageType::Telemetry => {
            let measured_ma = [r.f64()?, r.f64()?];
            let power_draw_ma = r.f64()?;
            let switch_count = r.u16()?;
            let n = r.u16()? as usize;
            let switch_states = r.take(n)?.to_vec();
            let timestamp_us = r.u64()?;
            Payload::Telemetry(Telemetry {
                measured_ma,
                power_draw_ma,
                switch_count,
                switch_states,
                timestamp_us,
            })
        }
        MessageType::Ack => Payload::Ack(Ack {
            acked_seq: if payload.is_empty() { None } else { Some(r.u32()?) },
        }),
        MessageType::Error => {
            let code = r.u16()?;
            let at = r.offset();
            let message = String::from_utf8(r.rest().to_vec()).map_err(|e| DecodeError::Malformed {
                offset: at + e.utf8_error().valid_up_to(),
                reason: "error text is not utf-8".into(),
            })?;
            Payload::Error(ErrorReport { code, message })
        }
        MessageType::PerceptEvent => {
            let at = r.offset();
            let loc = r.u8()?;
            let location =
                PerceivedLocation::from_index(loc).ok_or_else(|| r.malformed_at(at, format!("location {loc}")))?;
            let intensity_score = r.f64()?;
            let at = r.offset();
            let z = r.u8()?;
            let zone = FingerZone::from_index(z).ok_or_else(|| r.malformed_at(at, format!("zone {z}")))?;
            Payload::PerceptEvent(PerceptEvent {
                location,
                intensity_score,
                zone,
            })
        }
        MessageType::AppEvent => {
            let at = r.offset();
            let event: AppEvent = serde_json::from_slice(r.rest()).map_err(|e| DecodeError::Malformed {
                offset: at,
                reason: format!("app event json: {e}"),
            })?;
            Payload::AppEvent(event)
        }
    };
    r.finish()?;
    Ok(p)
}

/// Parses exactly one message. Checks run in order: magic, length, CRC, type,
/// then payload structure.
pub fn decode(bytes: &[u8]) -> Result<Message, DecodeError> {
    let magic_len = bytes.len().min(MAGIC.len());
    if bytes[..magic_len] != MAGIC[..magic_len] {
        let offset = bytes.iter().zip(MAGIC.iter()).take_while(|(a, b)| a == b).count();
        return Err(DecodeError::BadMagic { offset });
    }
    if bytes.len() < HEADER_LEN {
        return Err(DecodeError::Truncated {
            offset: bytes.len(),
            needed: HEADER_LEN,
            available: bytes.len(),
        });
    }
    let length = u32::from_le_bytes(bytes[9..13].try_into().expect("4 bytes")) as usize;
    if length > MAX_PAYLOAD {
        return Err(DecodeError::Oversized { offset: 9, length });
    }
    let total = HEADER_LEN + length + CRC_LEN;
    if bytes.len() < total {
        return Err(DecodeError::Truncated {
            offset: bytes.len(),
            needed: total,
            available: bytes.len(),
        });
    }
    let payload = &bytes[HEADER_LEN..HEADER_LEN + length];
    let crc_at = HEADER_LEN + length;
    let stored = u32::from_le_bytes(bytes[crc_at..total].try_into().expect("4 bytes"));
    let computed = crc(&bytes[4..HEADER_LEN], payload);
    if stored != computed {
        return Err(DecodeError::CrcMismatch {
            offset: crc_at,
            stored,
            computed,
        });
    }
    if bytes.len() > total {
        return Err(DecodeError::TrailingBytes {
            offset: total,
            extra: bytes.len() - total,
        });
    }
    let ty = MessageType::from_byte(bytes[4]).ok_or(DecodeError::UnknownType {
        offset: 4,
        type_byte: bytes[4],
    })?;
    let seq = u32::from_le_bytes(bytes[5..9].try_into().expect("4 bytes"));
    Ok(Message::new(seq, decode_payload(ty, payload)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stim::StimConfig;

    fn ack() -> Message {
        Message::new(0, Payload::Ack(Ack::default()))
    }

    fn raw(ty: u8, payload: &[u8]) -> Vec<u8> {
        let mut out = MAGIC.to_vec();
        out.push(ty);
        out.extend_from_slice(&7u32.to_le_bytes());
        out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
        let c = crc(&out[4..], payload);
        out.extend_from_slice(payload);
        out.extend_from_slice(&c.to_le_bytes());
        out
    }

    #[test]
    fn empty_ack_layout() {
        let b = encode(&ack()).unwrap();
        assert_eq!(b.len(), 17);
        assert_eq!(&b[..5], &[0x56, 0x45, 0x54, 0x50, 0x04]);
        assert_eq!(decode(&b).unwrap(), ack());
    }

    #[test]
    fn crc_matches_reference_crc32() {
        // Bitwise CRC-32 (reflected, poly 0xEDB88320) as an independent check.
        fn crc32(data: &[u8]) -> u32 {
            let mut c = 0xFFFF_FFFFu32;
            for &b in data {
                c ^= b as u32;
                for _ in 0..8 {
                    c = if c & 1 != 0 { (c >> 1) ^ 0xEDB8_8320 } else { c >> 1 };
                }
            }
            !c
        }
        let b = encode(&Message::new(9, Payload::Ack(Ack { acked_seq: Some(3) }))).unwrap();
        let n = b.len();
        assert_eq!(u32::from_le_bytes(b[n - 4..].try_into().unwrap()), crc32(&b[4..n - 4]));
    }

    #[test]
    fn errors_are_distinct() {
        assert!(matches!(decode(&[]), Err(DecodeError::Truncated { offset: 0, .. })));
        assert!(matches!(decode(b"VE"), Err(DecodeError::Truncated { .. })));
        assert_eq!(decode(b"VEXP"), Err(DecodeError::BadMagic { offset: 2 }));
        let mut b = encode(&ack()).unwrap();
        b.pop();
        assert!(matches!(decode(&b), Err(DecodeError::Truncated { .. })));
        let b = raw(0x09, &[]);
        assert_eq!(
            decode(&b),
            Err(DecodeError::UnknownType {
                offset: 4,
                type_byte: 9
            })
        );
        let mut b = encode(&ack()).unwrap();
        b[13] ^= 1;
        assert!(matches!(decode(&b), Err(DecodeError::CrcMismatch { offset: 13, .. })));
        let mut b = encode(&ack()).unwrap();
        b.push(0);
        assert!(matches!(
            decode(&b),
            Err(DecodeError::TrailingBytes { offset: 17, extra: 1 })
        ));
    }

    #[test]
    fn oversized() {
        let mut b = raw(0x04, &[]);
        b[9..13].copy_from_slice(&(MAX_PAYLOAD as u32 + 1).to_le_bytes());
        assert!(matches!(decode(&b), Err(DecodeError::Oversized { offset: 9, .. })));
        let big = Message::new(0, Payload::Error(ErrorReport::new(1, "x".repeat(MAX_PAYLOAD))));
        assert!(matches!(encode(&big), Err(EncodeError::Oversized { .. })));
    }

    #[test]
    fn malformed_payloads() {
        assert!(matches!(
            decode(&raw(0x02, &[5])),
            Err(DecodeError::Malformed { offset: 13, .. })
        ));
        assert!(matches!(
            decode(&raw(0x04, &[1, 2])),
            Err(DecodeError::Malformed { .. })
        ));
        assert!(matches!(decode(&raw(0x06, &[9])), Err(DecodeError::Malformed { .. })));
        assert!(matches!(
            decode(&raw(0x05, &[0, 0, 0xff])),
            Err(DecodeError::Malformed { offset: 15, .. })
        ));
    }

    #[test]
    fn stim_command_fields_survive() {
        let mut p = StimParams::new(&StimConfig::default(), 2.75, [1, 7, 300].into());
        p.channel = Channel::Ac2;
        p.polarity = Polarity::Negative;
        p.frequency_hz = 0.5000000001;
        p.pulse_width_us = 4321;
        p.duration_ms = 9_999;
        let m = Message::new(u32::MAX, Payload::StimCommand(p.clone()));
        let Payload::StimCommand(q) = decode(&encode(&m).unwrap()).unwrap().payload else {
            panic!("wrong type");
        };
        assert_eq!(q.channel, p.channel);
        assert_eq!(q.frequency_hz.to_bits(), p.frequency_hz.to_bits());
        assert_eq!(q.amplitude_ma.to_bits(), p.amplitude_ma.to_bits());
        assert_eq!(q.polarity, p.polarity);
        assert_eq!(q.pulse_width_us, p.pulse_width_us);
        assert_eq!(q.duration_ms, p.duration_ms);
        assert_eq!(q.electrodes, p.electrodes);
    }
}
