use std::collections::BTreeSet;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion, Throughput};
use vet_bench::{Workload, SEED};
use vet_core::device::Device;
use vet_core::protocol::{decode, encode, FrameAssembler, Payload};
use vet_core::sim::{render_frame, SkinLoad};
use vet_core::stim::{synth_sample, Regulator, RegulatorConfig};
use vet_core::{StimConfig, StimParams};

fn sensing(c: &mut Criterion) {
    let w = Workload::new();
    let mut g = c.benchmark_group("sensing");
    g.bench_function("render_frame", |b| {
        b.iter(|| render_frame(&[w.press], &w.membrane, &w.baseline, black_box(SEED)).unwrap())
    });
    g.bench_function("detect_contact", |b| {
        b.iter(|| {
            w.perception
                .detect_contact(black_box(&w.frames.1), &w.reference)
                .unwrap()
        })
    });
    g.bench_function("reconstruct_depth", |b| {
        b.iter(|| {
            w.perception
                .reconstruct_depth(black_box(&w.frames.1), &w.reference)
                .unwrap()
        })
    });
    g.bench_function("estimate_flow", |b| {
        b.iter(|| {
            w.perception
                .estimate_flow(black_box(&w.frames.0), black_box(&w.frames.1), &w.reference)
                .unwrap()
        })
    });
    g.finish();
}

fn stimulation(c: &mut Criterion) {
    let params = StimParams::new(&StimConfig::default(), 2.0, BTreeSet::from([5, 6]));
    let mut g = c.benchmark_group("stimulation");
    g.bench_function("synth_sample", |b| {
        let mut t = 0u64;
        b.iter(|| {
            t = (t + 37) % 1_000_000;
            synth_sample(black_box(&params), t).unwrap()
        })
    });
    g.bench_function("regulator_100ms", |b| {
        let reg = Regulator::new(RegulatorConfig::default());
        let load = SkinLoad::fixed(100.0);
        b.iter(|| {
            let mut s = reg.start(black_box(2.0));
            for _ in 0..100 {
                let measured = load.measure(s.commanded_ma());
                s = reg.regulate(&s, measured, 1.0).unwrap().0;
            }
            s
        })
    });
    g.bench_function("device_tick_1ms", |b| {
        let mut device = Device::new(Workload::new().config.device(), SEED).unwrap();
        b.iter(|| device.tick(1.0).unwrap())
    });
    g.finish();
}

fn protocol(c: &mut Criterion) {
    let w = Workload::new();
    let telemetry = encode(&w.telemetry).unwrap();
    let chunks = w.chunks(vet_core::protocol::FRAME_CHUNK_BYTES);
    let mut g = c.benchmark_group("protocol");
    g.bench_function("encode_telemetry", |b| {
        b.iter(|| encode(black_box(&w.telemetry)).unwrap())
    });
    g.bench_function("decode_telemetry", |b| {
        b.iter(|| decode(black_box(&telemetry)).unwrap())
    });
    g.throughput(Throughput::Bytes(w.frame_bytes.len() as u64));
    g.bench_function("frame_round_trip", |b| {
        b.iter(|| {
            let mut asm = FrameAssembler::new(4);
            let mut done = None;
            for m in &chunks {
                let back = decode(&encode(m).unwrap()).unwrap();
                if let Payload::FrameChunk(c) = back.payload {
                    done = asm.push(c).unwrap().or(done);
                }
            }
            done.unwrap()
        })
    });
    g.finish();
}

criterion_group!(benches, sensing, stimulation, protocol);
criterion_main!(benches);
