//! Core of the Misaka tabletop swarm testbed.
//!
//! The crate is split along the pipeline a session runs through:
//!
//! - [`graph`]: communication topologies, transition matrices and
//!   strongly-connected-component diagnosis/repair.
//! - [`consensus`]: the synchronous iteration `s(k+1) = Q s(k)`, trajectories
//!   and an eigenvector oracle for the limit.
//! - [`mesh`]: the same protocol run by message-passing agents over a lossy,
//!   simulated mesh with a request/reply/ack handshake.
//! - [`swarm`]: robots on the work surface, layouts between algorithm values
//!   and table coordinates, omni-wheel kinematics and messenger choreography.
//! - [`session`]: live sessions that bind the above and apply user commands.
//!
//! Node indices are 0-based inside the crate. Every external format (graph
//! JSON, CSV headers, wire protocol) uses 1-based labels.

pub mod consensus;
pub mod graph;
pub mod mesh;
pub mod session;
pub mod swarm;
pub mod trajectory_csv;

pub use consensus::{ConvergenceConfig, FixedPointPrediction, StateVector, Trajectory};
pub use graph::{DirectedGraph, MatrixMode, SccReport, TransitionMatrix};
