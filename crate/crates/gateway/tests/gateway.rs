use std::net::SocketAddr;
use std::time::Duration;

use futures::{SinkExt, StreamExt};
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::{TcpListener, TcpStream};
use tokio::task::JoinHandle;
use tokio::time::timeout;
use tokio_tungstenite::tungstenite::Message as WsMessage;
use tokio_tungstenite::{connect_async, MaybeTlsStream, WebSocketStream};
use vet_core::device::DeviceConfig;
use vet_core::protocol::{schema::schema, ErrorReport, Message, Payload};
use vet_gateway::{router, serve_device, start_link, DeviceServerOptions, LinkOptions};

type Ws = WebSocketStream<MaybeTlsStream<TcpStream>>;

async fn spawn_device(addr: SocketAddr) -> JoinHandle<()> {
    let listener = TcpListener::bind(addr).await.unwrap();
    tokio::spawn(async move {
        let _ = serve_device(listener, DeviceConfig::default(), 1, DeviceServerOptions::default()).await;
    })
}

async fn spawn_gateway(device: SocketAddr) -> SocketAddr {
    let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let options = LinkOptions {
        reconnect: Duration::from_millis(50),
        ..LinkOptions::default()
    };
    let state = start_link(device.to_string(), options);
    tokio::spawn(async move { axum::serve(listener, router(state)).await.unwrap() });
    addr
}

struct Rig {
    device_addr: SocketAddr,
    device: JoinHandle<()>,
    gateway: SocketAddr,
}

async fn rig() -> Rig {
    let probe = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let device_addr = probe.local_addr().unwrap();
    drop(probe);
    let device = spawn_device(device_addr).await;
    let gateway = spawn_gateway(device_addr).await;
    Rig {
        device_addr,
        device,
        gateway,
    }
}

async fn connect(addr: SocketAddr) -> Ws {
    connect_async(format!("ws://{addr}/ws")).await.unwrap().0
}

/// Next message matching `pred` within `secs`.
async fn wait_for(ws: &mut Ws, secs: f64, pred: impl Fn(&Message) -> bool) -> Option<Message> {
    let deadline = tokio::time::Instant::now() + Duration::from_secs_f64(secs);
    loop {
        let left = deadline.checked_duration_since(tokio::time::Instant::now())?;
        match timeout(left, ws.next()).await {
            Ok(Some(Ok(WsMessage::Text(t)))) => {
                let m = Message::from_json(t.as_str()).expect("gateway sends valid JSON");
                if pred(&m) {
                    return Some(m);
                }
            }
            Ok(Some(Ok(_))) => {}
            _ => return None,
        }
    }
}

fn is_telemetry(m: &Message) -> bool {
    matches!(m.payload, Payload::Telemetry(_))
}

fn is_error(code: u16) -> impl Fn(&Message) -> bool {
    move |m| matches!(&m.payload, Payload::Error(e) if e.code == code)
}

fn stim_json(amplitude_ma: f64) -> String {
    serde_json::json!({
        "type": "stim_command",
        "channel": "ac1",
        "frequency_hz": 50.0,
        "amplitude_ma": amplitude_ma,
        "polarity": "alternating",
        "pulse_width_us": 200,
        "duration_ms": 2000,
        "electrodes": [5, 6],
    })
    .to_string()
}

#[tokio::test]
async fn schema_endpoint() {
    let rig = rig().await;
    let mut s = TcpStream::connect(rig.gateway).await.unwrap();
    s.write_all(b"GET /schema HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n")
        .await
        .unwrap();
    let mut raw = String::new();
    s.read_to_string(&mut raw).await.unwrap();
    assert!(raw.starts_with("HTTP/1.1 200"), "{raw}");
    let body = raw.split("\r\n\r\n").nth(1).unwrap();
    let served: serde_json::Value = serde_json::from_str(body).unwrap();
    assert_eq!(served, schema());
}

#[tokio::test]
async fn telemetry_reaches_every_client() {
    let rig = rig().await;
    let mut a = connect(rig.gateway).await;
    let mut b = connect(rig.gateway).await;
    assert!(wait_for(&mut a, 5.0, is_telemetry).await.is_some());
    assert!(wait_for(&mut b, 5.0, is_telemetry).await.is_some());
}

#[tokio::test]
async fn stim_command_is_bridged_to_the_device() {
    let rig = rig().await;
    let mut ws = connect(rig.gateway).await;
    wait_for(&mut ws, 5.0, is_telemetry).await.unwrap();
    // Past the 200 ms boot so the regulator is running.
    tokio::time::sleep(Duration::from_millis(300)).await;
    ws.send(WsMessage::Text(stim_json(2.0).into())).await.unwrap();
    let ack = wait_for(&mut ws, 5.0, |m| matches!(m.payload, Payload::Ack(_))).await;
    assert!(ack.is_some());
    let settled = wait_for(
        &mut ws,
        5.0,
        |m| matches!(&m.payload, Payload::Telemetry(t) if (t.measured_ma[0] - 2.0).abs() <= 0.1),
    )
    .await;
    assert!(settled.is_some(), "monitor never reached the setpoint");
}

#[tokio::test]
async fn commands_keep_arrival_order() {
    let rig = rig().await;
    let mut ws = connect(rig.gateway).await;
    wait_for(&mut ws, 5.0, is_telemetry).await.unwrap();
    for i in 0..20 {
        ws.send(WsMessage::Text(stim_json(0.1 * (i + 1) as f64).into()))
            .await
            .unwrap();
    }
    let mut acked = Vec::new();
    while acked.len() < 20 {
        let m = wait_for(&mut ws, 5.0, |m| matches!(m.payload, Payload::Ack(_)))
            .await
            .expect("missing ack");
        if let Payload::Ack(a) = m.payload {
            acked.push(a.acked_seq.unwrap());
        }
    }
    assert!(acked.windows(2).all(|w| w[1] == w[0] + 1), "{acked:?}");
}

#[tokio::test]
async fn malformed_json_only_answers_the_sender() {
    let rig = rig().await;
    let mut a = connect(rig.gateway).await;
    let mut b = connect(rig.gateway).await;
    wait_for(&mut a, 5.0, is_telemetry).await.unwrap();
    wait_for(&mut b, 5.0, is_telemetry).await.unwrap();
    a.send(WsMessage::Text("{\"type\": \"stim_command\", \"freq".into()))
        .await
        .unwrap();
    assert!(wait_for(&mut a, 5.0, is_error(ErrorReport::MALFORMED)).await.is_some());
    // Device-to-host types are refused privately too.
    a.send(WsMessage::Text(r#"{"type":"ack","seq":3,"acked_seq":1}"#.into()))
        .await
        .unwrap();
    assert!(wait_for(&mut a, 5.0, is_error(ErrorReport::REJECTED)).await.is_some());
    assert!(wait_for(&mut b, 0.5, |m| matches!(m.payload, Payload::Error(_)))
        .await
        .is_none());
    assert!(wait_for(&mut b, 5.0, is_telemetry).await.is_some());
}

#[tokio::test]
async fn device_disconnect_and_reconnect() {
    let rig = rig().await;
    let mut a = connect(rig.gateway).await;
    let mut b = connect(rig.gateway).await;
    wait_for(&mut a, 5.0, is_telemetry).await.unwrap();
    a.send(WsMessage::Text(stim_json(1.0).into())).await.unwrap();
    wait_for(&mut a, 5.0, |m| matches!(m.payload, Payload::Ack(_)))
        .await
        .unwrap();

    rig.device.abort();
    assert!(wait_for(&mut a, 5.0, is_error(ErrorReport::DEVICE_DISCONNECTED))
        .await
        .is_some());
    assert!(wait_for(&mut b, 5.0, is_error(ErrorReport::DEVICE_DISCONNECTED))
        .await
        .is_some());

    let _device = spawn_device(rig.device_addr).await;
    assert!(wait_for(&mut a, 5.0, is_telemetry).await.is_some());
    a.send(WsMessage::Text(stim_json(1.0).into())).await.unwrap();
    let ack = wait_for(&mut a, 5.0, |m| matches!(m.payload, Payload::Ack(_)))
        .await
        .unwrap();
    // The new link starts its sequence again.
    assert!(matches!(ack.payload, Payload::Ack(a) if a.acked_seq == Some(0)));
}
