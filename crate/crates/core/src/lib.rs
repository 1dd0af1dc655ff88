//! Core of the VET simulator: tactile perception, electrotactile stimulation
//! control, a simulated device, the host/device wire protocol and the
//! closed-loop applications built on top of them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod apps;
pub mod config;
pub mod device;
pub mod grid;
pub mod protocol;
pub mod rng;
pub mod sim;
pub mod stim;
pub mod tactile;

pub use grid::Grid;
pub use sim::{MembraneModel, PressEvent, SkinLoad};
pub use stim::{Channel, Polarity, StimConfig, StimParams};
pub use tactile::{ContactPatch, FingerZone, Perception, PerceptionConfig, TactileFrame, ZoneMap};
