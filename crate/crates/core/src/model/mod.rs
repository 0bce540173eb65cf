//! Networks, demands, schedules, feasibility validation and the spectrum/overhead metrics.

mod comm_graph;
mod demand;
pub mod io;
mod metrics;
mod schedule;
mod topology;
mod validate;

pub use comm_graph::{build_d2d_comm_graph, discrepancy_params, D2DCommGraph, DiscrepancyParams};
pub use demand::{Demand, DemandSet};
pub use io::{read_schedule_csv, write_schedule_csv, Instance};
pub use metrics::{compute_volumes, metrics, peaks, per_slot_load, Metrics, SpectrumResult};
pub use schedule::{charged_bs, Key, Schedule};
pub use topology::{Link, Node, Topology, TopologyBuilder};
pub use validate::{validate_schedule, Tolerance, ValidationReport, Violation, ViolationKind};
