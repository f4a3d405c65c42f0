//! Message-passing execution of the consensus protocol over a simulated mesh.
//!
//! Every read of a neighbour's value is a three-leg handshake
//! (request → reply → ack) subject to per-link latency and loss. A node only
//! averages over the neighbours whose handshake completed, renormalising its
//! weights over them; its own value always counts. With lossless links the
//! lockstep runner reproduces the matrix iteration.
//!
//! Everything runs on simulated time in a single-threaded event loop seeded
//! from one integer, so a seed fully determines a run.

mod agent;
mod asynchronous;
mod link;
mod lockstep;
mod network;
mod queue;

use thiserror::Error;

pub use agent::{NodeAgent, Phase};
pub use asynchronous::{run_async, AsyncConfig, AsyncSimulation};
pub use link::{Latency, LinkModel, LinkModelJson, LinkOverrideJson, LinkParams};
pub use lockstep::{run_lockstep, LockstepSimulation, RoundLog};
pub use network::{HandshakeOutcome, MessageEnvelope, MessageKind, Network, NetworkStats};
pub use queue::{EventQueue, SimTime};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeshError {
    #[error("invalid link model: {0}")]
    InvalidLink(String),
    #[error("invalid handshake config: {0}")]
    InvalidHandshake(String),
    #[error("state has {state} entries but the matrix has {matrix} nodes")]
    DimensionMismatch { matrix: usize, state: usize },
    #[error("node {node} is out of range (n = {n})")]
    UnknownNode { node: usize, n: usize },
}

/// Handshake timing.
///
/// The reply must arrive within `timeout_ms` of the request being sent, and
/// the ack must land within `timeout_ms` of being sent. A failed attempt is
/// retried up to `retries` more times.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HandshakeConfig {
    pub timeout_ms: f64,
    pub retries: u32,
}

impl Default for HandshakeConfig {
    fn default() -> Self {
        Self {
            timeout_ms: 50.0,
            retries: 2,
        }
    }
}

impl HandshakeConfig {
    pub fn validate(&self) -> Result<(), MeshError> {
        if !(self.timeout_ms.is_finite() && self.timeout_ms > 0.0) {
            return Err(MeshError::InvalidHandshake(format!(
                "timeout {} ms must be positive",
                self.timeout_ms
            )));
        }
        Ok(())
    }

    pub fn timeout(&self) -> SimTime {
        SimTime::from_ms(self.timeout_ms)
    }
}

/// Everything a mesh run needs besides the weights and the initial state.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MeshConfig {
    pub links: LinkModel,
    pub handshake: HandshakeConfig,
    pub seed: u64,
}

impl MeshConfig {
    pub fn ideal(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn with_links(links: LinkModel, seed: u64) -> Self {
        Self {
            links,
            seed,
            ..Self::default()
        }
    }
}
