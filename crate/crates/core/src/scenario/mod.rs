//! Instance generation: geometric topologies with Shannon-rate links, synthetic
//! aggregate traces, demand synthesis from traces, and the canonical named fixtures.
//!
//! All randomness is drawn from ChaCha8 streams derived from a single `u64` seed, one
//! stream per cell, so generation is reproducible and cells can be produced in parallel.

mod demands;
mod fixtures;
mod geo;
mod random;
mod trace;

pub use demands::{synthesize_demands, DemandSynthesis, SplitWeights};
pub use fixtures::{fixture, FixtureSpec};
pub use geo::{generate_topology, hex_positions, shannon_rate, GeneratedTopology, GeoParams};
pub use random::{random_instance, RandomInstance};
pub use trace::{
    read_trace_csv, synthesize_trace, write_trace_csv, TraceProfile, TraceRecord, TRACE_EPOCH,
    WINDOW_SECONDS,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator stream for `cell` under `seed`.
pub(crate) fn cell_rng(seed: u64, cell: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(cell as u64);
    rng
}
