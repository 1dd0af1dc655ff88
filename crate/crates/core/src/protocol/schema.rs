//! Field-level documentation of the JSON message forms, served by the gateway.

use serde_json::{json, Value};

use super::MessageType;

fn fields(ty: MessageType) -> Value {
    match ty {
        MessageType::FrameChunk => json!({
            "frame_seq": "u32, frame counter",
            "chunk_index": "u16",
            "chunk_count": "u16",
            "total_len": "u32, bytes of the reassembled frame",
            "data": "base64; concatenated chunks form a VETF frame (16-byte header, then one luminance byte per pixel)"
        }),
        MessageType::StimCommand => json!({
            "channel": "\"ac1\" | \"ac2\"",
            "frequency_hz": "f64 in [0.5, 100]",
            "amplitude_ma": "f64, regulation setpoint, at most 5",
            "polarity": "\"positive\" | \"negative\" | \"alternating\"",
            "pulse_width_us": "u32",
            "duration_ms": "u32, at most 10000",
            "electrodes": "array of u16 electrode ids"
        }),
        MessageType::Telemetry => json!({
            "measured_ma": "[f64, f64], monitor reading for ac1 and ac2",
            "power_draw_ma": "f64, 130 or 250",
            "switch_count": "u16, electrodes packed in switch_states",
            "switch_states": "array of bytes, 2 bits per electrode, LSB first (0 open, 1 stim, 2 ground)",
            "timestamp_us": "u64, device clock"
        }),
        MessageType::Ack => json!({
            "acked_seq": "u32 or null"
        }),
        MessageType::Error => json!({
            "code": "u16 (1 malformed, 2 rejected, 3 device disconnected, 4 internal)",
            "message": "string"
        }),
        MessageType::PerceptEvent => json!({
            "location": "\"upper_fingertip\" | \"lower_fingertip\" | \"contact_point\"",
            "intensity_score": "f64 in [0, 1]",
            "zone": "\"fingertip\" | \"left\" | \"bottom\" | \"ventral\" | \"right\""
        }),
        MessageType::AppEvent => json!({
            "name": "string, e.g. \"press\", \"release\"",
            "data": "any JSON; \"press\" takes {u, v, pressure} with u, v, pressure in [0, 1]"
        }),
    }
}

/// Schema document: one entry per message type, keyed by its JSON tag.
pub fn schema() -> Value {
    let mut messages = serde_json::Map::new();
    for ty in MessageType::ALL {
        messages.insert(
            ty.name().to_string(),
            json!({ "type_byte": ty as u8, "fields": fields(ty) }),
        );
    }
    json!({
        "envelope": {
            "type": "message tag, one of the keys of `messages`",
            "seq": "u32, optional from clients; assigned per direction"
        },
        "messages": messages
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::*;
    use crate::sim::PerceivedLocation;
    use crate::tactile::FingerZone;
    use std::collections::BTreeSet;

    fn samples() -> Vec<Message> {
        let payloads = vec![
            Payload::FrameChunk(chunk_frame(0, &[1, 2], 8).remove(0)),
            Payload::StimCommand(crate::stim::StimParams::new(
                &Default::default(),
                1.0,
                BTreeSet::from([1]),
            )),
            Payload::Telemetry(Telemetry {
                measured_ma: [0.0, 0.0],
                power_draw_ma: 130.0,
                switch_count: 0,
                switch_states: vec![],
                timestamp_us: 0,
            }),
            Payload::Ack(Ack { acked_seq: Some(1) }),
            Payload::Error(ErrorReport::new(1, "x")),
            Payload::PerceptEvent(PerceptEvent {
                location: PerceivedLocation::ContactPoint,
                intensity_score: 0.5,
                zone: FingerZone::Fingertip,
            }),
            Payload::AppEvent(AppEvent {
                name: "press".into(),
                data: serde_json::json!({}),
            }),
        ];
        payloads.into_iter().map(|p| Message::new(0, p)).collect()
    }

    #[test]
    fn documented_fields_match_serialized_fields() {
        let doc = schema();
        for m in samples() {
            let v: Value = serde_json::from_str(&m.to_json()).unwrap();
            let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
            keys.retain(|k| k != "type" && k != "seq");
            keys.sort();
            let entry = &doc["messages"][m.message_type().name()];
            assert_eq!(entry["type_byte"], m.message_type() as u8);
            let mut documented: Vec<_> = entry["fields"].as_object().unwrap().keys().cloned().collect();
            documented.sort();
            assert_eq!(keys, documented, "{}", m.message_type().name());
            assert_eq!(v["type"], m.message_type().name());
        }
    }
}
