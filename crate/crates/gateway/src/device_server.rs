use std::time::Duration;

use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::tcp::OwnedWriteHalf;
use tokio::net::{TcpListener, TcpStream};
use tokio::time::MissedTickBehavior;
use tracing::{info, warn};
use vet_core::device::{Device, DeviceConfig};
use vet_core::protocol::{encode, length_prefixed, ErrorReport, LengthPrefixedReader, Message, Payload, SeqCounter};

use crate::GatewayError;

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceServerOptions {
    /// Simulated time per device tick, ms.
    pub tick_ms: f64,
    /// Wall-clock period between batches of ticks, ms. Each batch advances
    /// the device by this much simulated time and forwards only its last
    /// telemetry sample.
    pub batch_ms: u64,
}

impl Default for DeviceServerOptions {
    fn default() -> Self {
        Self {
            tick_ms: 1.0,
            batch_ms: 20,
        }
    }
}

/// Runs one simulated device behind `listener`, serving hosts one at a time.
/// The device keeps its state across host connections; each connection gets
/// a fresh outgoing sequence.
pub async fn serve_device(
    listener: TcpListener,
    config: DeviceConfig,
    seed: u64,
    options: DeviceServerOptions,
) -> Result<(), GatewayError> {
    let mut device = Device::new(config, seed)?;
    loop {
        let (stream, peer) = listener.accept().await?;
        info!(%peer, "host connected");
        match serve_host(&mut device, stream, &options).await {
            Ok(()) => info!(%peer, "host disconnected"),
            Err(e) => warn!(%peer, error = %e, "host connection failed"),
        }
    }
}

async fn send_all(wr: &mut OwnedWriteHalf, seq: &mut SeqCounter, msgs: Vec<Message>) -> Result<(), GatewayError> {
    let mut bytes = Vec::new();
    for mut m in msgs {
        m.seq = seq.next();
        match encode(&m) {
            Ok(e) => bytes.extend(length_prefixed(&e)),
            Err(e) => warn!(error = %e, "dropping unencodable device message"),
        }
    }
    wr.write_all(&bytes).await?;
    Ok(())
}

async fn serve_host(device: &mut Device, stream: TcpStream, options: &DeviceServerOptions) -> Result<(), GatewayError> {
    stream.set_nodelay(true)?;
    let (mut rd, mut wr) = stream.into_split();
    let mut reader = LengthPrefixedReader::new();
    let mut seq = SeqCounter::new();
    let mut buf = vec![0u8; 16 * 1024];
    let mut batch = tokio::time::interval(Duration::from_millis(options.batch_ms.max(1)));
    batch.set_missed_tick_behavior(MissedTickBehavior::Delay);
    let ticks = ((options.batch_ms.max(1) as f64 / options.tick_ms).round() as usize).max(1);
    loop {
        tokio::select! {
            n = rd.read(&mut buf) => {
                let n = n?;
                if n == 0 {
                    return Ok(());
                }
                reader.push(&buf[..n]);
                let mut out = Vec::new();
                while let Some(next) = reader.next_message() {
                    match next {
                        Ok(m) => out.extend(device.handle(&m)),
                        Err(e) => out.push(Message::new(
                            0,
                            Payload::Error(ErrorReport::new(ErrorReport::MALFORMED, e.to_string())),
                        )),
                    }
                }
                send_all(&mut wr, &mut seq, out).await?;
            }
            _ = batch.tick() => {
                let mut out = Vec::new();
                let mut telemetry = None;
                for _ in 0..ticks {
                    for m in device.tick(options.tick_ms)? {
                        if matches!(m.payload, Payload::Telemetry(_)) {
                            telemetry = Some(m);
                        } else {
                            out.push(m);
                        }
                    }
                }
                out.extend(telemetry);
                send_all(&mut wr, &mut seq, out).await?;
            }
        }
    }
}
