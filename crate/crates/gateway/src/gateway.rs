use std::time::Duration;

use axum::extract::ws::{Message as WsMessage, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use futures::{SinkExt, StreamExt};
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::{broadcast, mpsc};
use tracing::{debug, info, warn};
use vet_core::protocol::{
    encode, length_prefixed, schema::schema, ErrorReport, LengthPrefixedReader, Message, Payload, SeqCounter,
};

use crate::{DEFAULT_GATEWAY_ADDR, GATEWAY_ADDR_ENV};

/// Listen address from `VET_GATEWAY_ADDR`, else the default.
pub fn gateway_addr() -> String {
    std::env::var(GATEWAY_ADDR_ENV)
        .ok()
        .filter(|s| !s.trim().is_empty())
        .unwrap_or_else(|| DEFAULT_GATEWAY_ADDR.to_string())
}

#[derive(Debug, Clone)]
pub struct LinkOptions {
    pub reconnect: Duration,
    /// Capacity of the per-client broadcast backlog; slower clients skip ahead.
    pub broadcast_capacity: usize,
}

impl Default for LinkOptions {
    fn default() -> Self {
        Self {
            reconnect: Duration::from_millis(250),
            broadcast_capacity: 1024,
        }
    }
}

struct Command {
    msg: Message,
    reply: mpsc::UnboundedSender<String>,
}

/// Shared by every WebSocket connection: the device event fan-out and the
/// single ordered command queue into the device.
#[derive(Clone)]
pub struct GatewayState {
    events: broadcast::Sender<String>,
    commands: mpsc::Sender<Command>,
}

fn error_json(code: u16, message: impl Into<String>) -> String {
    Message::new(0, Payload::Error(ErrorReport::new(code, message))).to_json()
}

/// Starts the device link task and returns the state to serve clients from.
pub fn start_link(device_addr: String, options: LinkOptions) -> GatewayState {
    let (events, _) = broadcast::channel(options.broadcast_capacity.max(1));
    let (commands, rx) = mpsc::channel(256);
    tokio::spawn(device_link(device_addr, options, rx, events.clone()));
    GatewayState { events, commands }
}

async fn device_link(
    addr: String,
    options: LinkOptions,
    mut commands: mpsc::Receiver<Command>,
    events: broadcast::Sender<String>,
) {
    loop {
        match TcpStream::connect(&addr).await {
            Ok(stream) => {
                info!(%addr, "device connected");
                let reason = match run_link(stream, &mut commands, &events).await {
                    Ok(true) => return,
                    Ok(false) => "device closed the connection".to_string(),
                    Err(e) => format!("device connection lost: {e}"),
                };
                warn!(%addr, %reason);
                let _ = events.send(error_json(ErrorReport::DEVICE_DISCONNECTED, reason));
            }
            Err(e) => debug!(%addr, error = %e, "device not reachable"),
        }
        // Commands that arrive while disconnected are refused, not queued.
        let retry = tokio::time::sleep(options.reconnect);
        tokio::pin!(retry);
        loop {
            tokio::select! {
                _ = &mut retry => break,
                cmd = commands.recv() => match cmd {
                    Some(c) => {
                        let _ = c.reply.send(error_json(ErrorReport::DEVICE_DISCONNECTED, "device is not connected"));
                    }
                    None => return,
                },
            }
        }
    }
}

/// Bridges one device connection. Returns `Ok(true)` once every client
/// handle is gone, `Ok(false)` if the device hung up.
async fn run_link(
    stream: TcpStream,
    commands: &mut mpsc::Receiver<Command>,
    events: &broadcast::Sender<String>,
) -> std::io::Result<bool> {
    stream.set_nodelay(true)?;
    let (mut rd, mut wr) = stream.into_split();
    let mut reader = LengthPrefixedReader::new();
    let mut seq = SeqCounter::new();
    let mut buf = vec![0u8; 64 * 1024];
    loop {
        tokio::select! {
            n = rd.read(&mut buf) => {
                let n = n?;
                if n == 0 {
                    return Ok(false);
                }
                reader.push(&buf[..n]);
                while let Some(next) = reader.next_message() {
                    let text = match next {
                        Ok(m) => m.to_json(),
                        Err(e) => error_json(ErrorReport::MALFORMED, format!("undecodable device message: {e}")),
                    };
                    // No subscribers is fine.
                    let _ = events.send(text);
                }
            }
            cmd = commands.recv() => {
                let Some(Command { mut msg, reply }) = cmd else {
                    return Ok(true);
                };
                msg.seq = seq.next();
                match encode(&msg) {
                    Ok(bytes) => wr.write_all(&length_prefixed(&bytes)).await?,
                    Err(e) => {
                        let _ = reply.send(error_json(ErrorReport::MALFORMED, e.to_string()));
                    }
                }
            }
        }
    }
}

pub fn router(state: GatewayState) -> Router {
    Router::new()
        .route("/ws", get(ws_upgrade))
        .route("/schema", get(|| async { Json(schema()) }))
        .with_state(state)
}

/// Serves `/ws` and `/schema` on `listener`, bridging to the device at `device_addr`.
pub async fn serve_gateway(listener: TcpListener, device_addr: String, options: LinkOptions) -> std::io::Result<()> {
    let state = start_link(device_addr, options);
    axum::serve(listener, router(state)).await
}

async fn ws_upgrade(ws: WebSocketUpgrade, State(state): State<GatewayState>) -> Response {
    ws.on_upgrade(move |socket| client(socket, state)).into_response()
}

async fn client(socket: WebSocket, state: GatewayState) {
    let (mut sink, mut stream) = socket.split();
    let mut events = state.events.subscribe();
    let (private, mut private_rx) = mpsc::unbounded_channel::<String>();

    // The only writer for this socket.
    let writer = tokio::spawn(async move {
        loop {
            let text = tokio::select! {
                m = private_rx.recv() => match m {
                    Some(t) => t,
                    None => break,
                },
                e = events.recv() => match e {
                    Ok(t) => t,
                    Err(broadcast::error::RecvError::Lagged(n)) => {
                        debug!(skipped = n, "client lagging");
                        continue;
                    }
                    Err(broadcast::error::RecvError::Closed) => break,
                },
            };
            if sink.send(WsMessage::Text(text.into())).await.is_err() {
                break;
            }
        }
    });

    while let Some(Ok(frame)) = stream.next().await {
        let text = match frame {
            WsMessage::Text(t) => t,
            WsMessage::Binary(_) => {
                let _ = private.send(error_json(ErrorReport::MALFORMED, "expected a JSON text message"));
                continue;
            }
            WsMessage::Close(_) => break,
            _ => continue,
        };
        let msg = match Message::from_json(text.as_str()) {
            Ok(m) => m,
            Err(e) => {
                let _ = private.send(error_json(ErrorReport::MALFORMED, e.to_string()));
                continue;
            }
        };
        if !matches!(msg.payload, Payload::StimCommand(_) | Payload::AppEvent(_)) {
            let _ = private.send(error_json(
                ErrorReport::REJECTED,
                format!("{} messages are device-to-host only", msg.message_type().name()),
            ));
            continue;
        }
        let cmd = Command {
            msg,
            reply: private.clone(),
        };
        if state.commands.send(cmd).await.is_err() {
            break;
        }
    }
    drop(private);
    writer.abort();
}
