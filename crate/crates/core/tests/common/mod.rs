//! Helpers shared by the integration tests.
#![allow(dead_code)]

use d2dlb_core::flow::{solve_d2d_lexicographic, D2DSolution, FlowOptions};
use d2dlb_core::model::{metrics, validate_schedule, Instance, Metrics, Tolerance};
use d2dlb_core::nd::{nd_total, CellDemand, CellInstance, NdMethod, NdResult};
use d2dlb_core::scenario::{random_instance, GeoParams, RandomInstance};
use d2dlb_core::Result;
use d2dlb_lp::SolveOptions;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random single cell with up to `max_demands` demands and horizon up to `max_horizon`.
pub fn random_cell(seed: u64, max_demands: usize, max_horizon: usize) -> CellInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let horizon = rng.random_range(1..=max_horizon);
    let n = rng.random_range(1..=max_demands);
    let demands = (0..n)
        .map(|id| {
            let start = rng.random_range(1..=horizon);
            let span = rng.random_range(0..=(horizon - start).min(12));
            CellDemand {
                id,
                user: id,
                start,
                end: start + span,
                volume: rng.random_range(0.1..10.0),
                rate: rng.random_range(0.5..20.0),
            }
        })
        .collect();
    CellInstance::from_parts(0, horizon, demands)
        .expect("generated lifetimes lie within the horizon")
}

/// Random geometric instance with 3–6 cells, 5 users per cell and 20–200 demands.
pub fn multicell_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let p = RandomInstance {
        geo: GeoParams {
            users_per_cell: 5,
            d2d_range: 150.0,
            seed,
            ..GeoParams::default()
        },
        cells: rng.random_range(3..=6),
        bs_spacing: 450.0,
        demands: rng.random_range(20..=200),
        horizon: 16,
        max_delay: 4,
        max_volume: 100.0,
    };
    random_instance(&p).expect("valid random instance parameters")
}

/// Outcome of the full D2D pipeline on one instance.
pub struct D2DRun {
    pub nd: NdResult,
    pub f_d2d: f64,
    pub solution: D2DSolution,
    pub metrics: Metrics,
}

/// No-D2D optimum, then the lexicographic D2D optimum, with the schedule validated.
pub fn run_d2d(inst: &Instance) -> Result<D2DRun> {
    let opts = SolveOptions::default();
    let nd = nd_total(&inst.topology, &inst.demands, NdMethod::Yds, &opts)?;
    let (f_d2d, solution) = solve_d2d_lexicographic(
        &inst.topology,
        &inst.demands,
        &FlowOptions::default(),
        &opts,
    )?;
    let report = validate_schedule(
        &solution.schedule,
        &inst.topology,
        &inst.demands,
        Tolerance::default(),
    );
    assert!(
        report.is_valid(),
        "LP schedule fails validation: {:?}",
        report.violations.first()
    );
    let (v_d2d, v_bs) = (solution.spectrum.v_d2d, solution.spectrum.v_bs);
    let metrics = metrics(nd.total(), f_d2d, v_d2d, v_bs)?;
    Ok(D2DRun {
        nd,
        f_d2d,
        solution,
        metrics,
    })
}
