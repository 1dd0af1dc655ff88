//! Transports around the simulated device: a TCP device server speaking the
//! length-prefixed binary protocol, and a WebSocket gateway that mirrors it
//! as JSON for browser clients.

mod device_server;
mod gateway;

pub use device_server::{serve_device, DeviceServerOptions};
pub use gateway::{gateway_addr, router, serve_gateway, start_link, GatewayState, LinkOptions};

use thiserror::Error;

/// Default gateway listen address when `VET_GATEWAY_ADDR` is unset.
pub const DEFAULT_GATEWAY_ADDR: &str = "127.0.0.1:8420";
pub const GATEWAY_ADDR_ENV: &str = "VET_GATEWAY_ADDR";

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Device(#[from] vet_core::device::DeviceError),
}
