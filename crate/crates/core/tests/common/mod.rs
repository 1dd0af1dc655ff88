#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde_json::json;
use vet_core::protocol::{Ack, AppEvent, ErrorReport, FrameChunk, Message, Payload, PerceptEvent, Telemetry};
use vet_core::sim::{PerceivedLocation, PressEvent};
use vet_core::stim::{Channel, Polarity, StimParams};
use vet_core::tactile::FingerZone;

/// Any finite f64, with the awkward values over-represented.
pub fn finite_f64(rng: &mut impl Rng) -> f64 {
    const SPECIAL: [f64; 7] = [0.0, -0.0, 1.0, f64::MIN_POSITIVE, f64::MAX, f64::MIN, 5e-324];
    if rng.random_bool(0.1) {
        return *SPECIAL.choose(rng).unwrap();
    }
    loop {
        let v = f64::from_bits(rng.random());
        if v.is_finite() {
            return v;
        }
    }
}

fn text(rng: &mut impl Rng, max: usize) -> String {
    const ALPHABET: &[char] = &['a', 'z', 'Q', '0', ' ', '-', 'é', 'ß', '中', '→', '"', '\\'];
    let n = rng.random_range(0..=max);
    (0..n).map(|_| *ALPHABET.choose(rng).unwrap()).collect()
}

fn bytes(rng: &mut impl Rng, max: usize) -> Vec<u8> {
    let n = rng.random_range(0..=max);
    (0..n).map(|_| rng.random()).collect()
}

pub fn random_stim(rng: &mut impl Rng) -> StimParams {
    let n = rng.random_range(0..8);
    StimParams {
        channel: if rng.random() { Channel::Ac1 } else { Channel::Ac2 },
        frequency_hz: finite_f64(rng),
        amplitude_ma: finite_f64(rng),
        polarity: *[Polarity::Positive, Polarity::Negative, Polarity::Alternating]
            .choose(rng)
            .unwrap(),
        pulse_width_us: rng.random(),
        duration_ms: rng.random(),
        electrodes: (0..n).map(|_| rng.random()).collect::<BTreeSet<u16>>(),
    }
}

pub fn random_payload(rng: &mut impl Rng) -> Payload {
    match rng.random_range(0..7) {
        0 => {
            let data = bytes(rng, 300);
            Payload::FrameChunk(FrameChunk {
                frame_seq: rng.random(),
                chunk_index: rng.random(),
                chunk_count: rng.random(),
                total_len: rng.random(),
                data,
            })
        }
        1 => Payload::StimCommand(random_stim(rng)),
        2 => Payload::Telemetry(Telemetry {
            measured_ma: [finite_f64(rng), finite_f64(rng)],
            power_draw_ma: finite_f64(rng),
            switch_count: rng.random(),
            switch_states: bytes(rng, 12),
            timestamp_us: rng.random(),
        }),
        3 => Payload::Ack(Ack {
            acked_seq: rng.random_bool(0.7).then(|| rng.random()),
        }),
        4 => Payload::Error(ErrorReport {
            code: rng.random(),
            message: text(rng, 40),
        }),
        5 => Payload::PerceptEvent(PerceptEvent {
            location: PerceivedLocation::from_index(rng.random_range(0..3)).unwrap(),
            intensity_score: finite_f64(rng),
            zone: *FingerZone::ALL.choose(rng).unwrap(),
        }),
        _ => {
            let v: f64 = rng.random_range(-1e6..1e6);
            let data = match rng.random_range(0..3) {
                0 => serde_json::Value::Null,
                1 => json!({ "u": v, "v": rng.random::<u32>(), "label": text(rng, 8) }),
                _ => json!([v, text(rng, 5), rng.random::<bool>()]),
            };
            Payload::AppEvent(AppEvent {
                name: text(rng, 12),
                data,
            })
        }
    }
}

pub fn random_message(rng: &mut impl Rng) -> Message {
    Message::new(rng.random(), random_payload(rng))
}

/// 1 to 3 presses on a `w`x`h` sensor, kept far enough apart that their
/// rims do not reach each other's centres.
pub fn separated_presses(rng: &mut impl Rng, w: usize, h: usize, cap_mm: f64) -> Vec<PressEvent> {
    let n = rng.random_range(1..=3);
    let mut out: Vec<PressEvent> = Vec::new();
    let mut attempts = 0;
    while out.len() < n && attempts < 200 {
        attempts += 1;
        let radius = rng.random_range(2.5..6.0);
        let margin = 2.0 * radius;
        if margin * 2.0 >= w.min(h) as f64 {
            continue;
        }
        let center = (
            rng.random_range(margin..w as f64 - margin),
            rng.random_range(margin..h as f64 - margin),
        );
        let far = out.iter().all(|p| {
            let d = (p.center.0 - center.0).hypot(p.center.1 - center.1);
            d >= 6.0 * p.radius.max(radius)
        });
        if far {
            out.push(PressEvent::new(center, radius, rng.random_range(0.3..=cap_mm)));
        }
    }
    out
}
