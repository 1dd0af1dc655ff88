//! Fixed workloads shared by the benchmarks.

use vet_core::config::VetConfig;
use vet_core::device::Device;
use vet_core::grid::Grid;
use vet_core::protocol::{chunk_frame, Message, Payload, Telemetry};
use vet_core::sim::{render_frame, MembraneModel, PressEvent};
use vet_core::tactile::fixture::encode_frame;
use vet_core::tactile::{Perception, ReferenceModel, TactileFrame};

pub const SEED: u64 = 7;

pub struct Workload {
    pub config: VetConfig,
    pub membrane: MembraneModel,
    pub baseline: Grid<f64>,
    pub perception: Perception,
    pub reference: ReferenceModel,
    pub press: PressEvent,
    /// A press and the same press moved by (1.5, -0.5) px.
    pub frames: (TactileFrame, TactileFrame),
    pub telemetry: Message,
    pub frame_bytes: Vec<u8>,
}

impl Workload {
    pub fn new() -> Self {
        let config = VetConfig::default();
        let (w, h) = (config.sensor.width, config.sensor.height);
        let membrane = config.membrane.clone();
        let baseline = vet_core::sim::default_baseline(w, h);
        let perception = Perception::new(config.perception.clone());
        let empty: Vec<_> = (0..8)
            .map(|i| render_frame(&[], &membrane, &baseline, SEED + i).unwrap())
            .collect();
        let reference = perception.set_reference(&empty).unwrap();

        let press = PressEvent::new((w as f64 * 0.5, h as f64 * 0.5), 5.0, 1.5);
        let mut moved = press;
        moved.center.0 += 1.5;
        moved.center.1 -= 0.5;
        let a = render_frame(&[press], &membrane, &baseline, SEED + 100).unwrap();
        let b = render_frame(&[moved], &membrane, &baseline, SEED + 101).unwrap();
        let frame_bytes = encode_frame(&a);

        let device = Device::new(config.device(), SEED).unwrap();
        let telemetry = Message::new(1, Payload::Telemetry(device.state().telemetry()));

        Self {
            config,
            membrane,
            baseline,
            perception,
            reference,
            press,
            frames: (a, b),
            telemetry,
            frame_bytes,
        }
    }

    pub fn telemetry_payload(&self) -> &Telemetry {
        match &self.telemetry.payload {
            Payload::Telemetry(t) => t,
            _ => unreachable!(),
        }
    }

    /// Frame chunk messages for the encoded first frame.
    pub fn chunks(&self, chunk_bytes: usize) -> Vec<Message> {
        chunk_frame(0, &self.frame_bytes, chunk_bytes)
            .into_iter()
            .enumerate()
            .map(|(i, c)| Message::new(i as u32, Payload::FrameChunk(c)))
            .collect()
    }
}

impl Default for Workload {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn workload_is_detectable() {
        let w = Workload::new();
        let patch = w.perception.detect_contact(&w.frames.0, &w.reference).unwrap();
        assert!(patch.is_some());
        assert!(!w.chunks(1024).is_empty());
        assert_eq!(w.telemetry_payload().timestamp_us, 0);
    }
}
