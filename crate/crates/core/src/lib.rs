//! Minimum spectrum provisioning for delay-constrained uplink traffic, with and without
//! device-to-device (D2D) load balancing.
//!
//! * [`model`]: topologies, demands, schedules, validation and metrics.
//! * [`nd`]: per-cell optimum without D2D (intensity search, EDF, LP).
//! * [`flow`]: time-expanded LPs for the D2D optimum and its minimum-overhead schedule.
//! * [`heuristic`]: the λ-parameterized three-step heuristic.
//! * [`bounds`]: closed-form bounds and explicit constructions.
//! * [`scenario`]: synthetic topologies, traces, demands and named fixtures.

pub mod bounds;
pub mod error;
pub mod flow;
pub mod heuristic;
pub mod model;
pub mod nd;
pub mod scalar;
pub mod scenario;

pub use error::{CoreError, Result};
