//! Operator gateway: owns the orchestrator and simulator tick loop, applies
//! operator commands between ticks, streams events as JSON lines, and
//! persists snapshots for restart.

pub mod config;
mod error;
pub mod protocol;
pub mod script;
pub mod server;
mod service;
pub mod snapshot;
pub mod view;

pub use config::ServiceConfig;
pub use error::GatewayError;
pub use protocol::{Ack, Command, CommandAck, CommandKind, EventBody, EventMsg, SessionView, TraceView};
pub use script::{run_script, Script, Step};
pub use server::{ServeOptions, Server};
pub use service::{Service, Summary};
