//! Live simulation session for the CATCH-919 hand and the WebSocket server
//! that exposes it.
//!
//! One [`Session`] owns the authoritative state. Commands are applied one at
//! a time; after each accepted command the hand is re-solved to equilibrium
//! and the tick advances. The wire format is one JSON document per message.

pub mod protocol;
pub mod server;
pub mod session;

pub use protocol::{parse_request, Ack, Command, Request, RequestBody, ServerMessage, PROTOCOL_VERSION};
pub use server::{serve, Server, ServerHandle, DEFAULT_PORT, HEARTBEAT};
pub use session::{Session, SessionError, SessionState, MAX_CABLE_TRAVEL_MM, MAX_FORCE_N};
