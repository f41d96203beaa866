//! Deterministic discrete-event simulator for hop-by-hop cross-layer
//! congestion control in multi-hop wireless sensor networks.
//!
//! The crate is organised bottom-up: [`sim`] provides the clock, event queue
//! and random streams; [`topology`], [`mac`], [`hccc`] and [`traffic`] model
//! the network pieces; [`network`] wires them into a runnable scenario and
//! [`metrics`] turns packet records into summary figures.

pub mod cli;
pub mod config;
pub mod hccc;
pub mod mac;
pub mod metrics;
pub mod network;
pub mod scenarios;
pub mod sim;
pub mod topology;
pub mod traffic;

pub use config::ScenarioConfig;
pub use network::{Network, NetworkError, RunOutput};
