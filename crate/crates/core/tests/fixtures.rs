//! Documented values of the named fixtures through the public pipeline.

mod common;

use d2dlb_core::bounds::{bound_suite, build_intra_cell_instance};
use d2dlb_core::model::{validate_schedule, Instance, Tolerance};
use d2dlb_core::nd::{nd_total, NdMethod};
use d2dlb_core::scenario::fixture;
use d2dlb_lp::SolveOptions;
use num_rational::Rational64;

use common::run_d2d;

#[test]
fn toy_fig1_cells_need_three_each_without_d2d() {
    let inst = fixture("toy-fig1").unwrap();
    let nd = nd_total(
        &inst.topology,
        &inst.demands,
        NdMethod::Yds,
        &SolveOptions::default(),
    )
    .unwrap();
    let per_cell: Vec<f64> = nd.cells.iter().map(|c| c.spectrum).collect();
    assert_eq!(per_cell, [3.0, 3.0]);
    let lp = nd_total(
        &inst.topology,
        &inst.demands,
        NdMethod::Lp,
        &SolveOptions::default(),
    )
    .unwrap();
    assert!((lp.total() - 6.0).abs() < 1e-9);
}

#[test]
fn toy_fig1_d2d_optimum_and_overhead_bound() {
    let inst = fixture("toy-fig1").unwrap();
    let run = run_d2d(&inst).unwrap();
    assert!((run.f_d2d - 4.0).abs() < 1e-9);
    assert!((run.metrics.eta - 0.25).abs() < 1e-6);
    let suite = bound_suite(
        &inst.topology,
        &inst.demands,
        Some(run.metrics.rho),
        Some(run.metrics.eta),
    )
    .unwrap();
    let eta = suite.iter().find(|b| b.name == "overhead_eta").unwrap();
    assert_eq!(eta.bound, 0.5);
    assert_eq!(eta.satisfied, Some(true));
}

#[test]
fn complete_two_by_two_matches_toy_metrics() {
    let inst = fixture("complete(2,2)").unwrap();
    let run = run_d2d(&inst).unwrap();
    assert!((run.metrics.rho - 1.0 / 3.0).abs() < 1e-9);
    assert!((run.metrics.eta - 0.25).abs() < 1e-6);
}

#[test]
fn heuristic_app_f_step_one_peaks() {
    let inst = fixture("heuristic-appF").unwrap();
    let nd = nd_total(
        &inst.topology,
        &inst.demands,
        NdMethod::Yds,
        &SolveOptions::default(),
    )
    .unwrap();
    assert_eq!(
        nd.cells.iter().map(|c| c.spectrum).collect::<Vec<_>>(),
        [40.0, 40.0]
    );
}

#[test]
fn intra_cell_relay_example_is_exact_and_lp_reaches_it() {
    let (r, d, v) = (4, 3usize, 12);
    let c = build_intra_cell_instance(r, d, v).unwrap();
    let exact = Tolerance {
        flow_abs: 0.0,
        volume_rel: 0.0,
    };
    assert!(validate_schedule(&c.schedule, &c.topology, &c.demands, exact).is_valid());
    let m = c.measure().unwrap().metrics;
    assert_eq!(m.rho, Rational64::new(5, 8));
    assert_eq!(m.eta, Rational64::new(1, 2));
    let run = run_d2d(&Instance::new(c.topology, c.demands).unwrap()).unwrap();
    assert!(run.metrics.rho >= 5.0 / 8.0 - 1e-9);
}

#[test]
fn ring_three_lp_reaches_closed_form() {
    let run = run_d2d(&fixture("ring(3)").unwrap()).unwrap();
    assert!(run.metrics.rho >= 4.0 / 7.0 - 1e-6);
}

#[test]
fn no_d2d_links_means_no_reduction() {
    let inst = fixture("heuristic-appF").unwrap();
    let t = inst.topology;
    let bs = (0..t.num_bs()).map(|b| t.bs_name(b).to_string()).collect();
    let users = (0..t.num_users())
        .map(|u| (t.user_name(u).to_string(), t.home(u)))
        .collect();
    let direct = t
        .links()
        .iter()
        .filter(|l| l.dst.is_bs())
        .copied()
        .collect();
    let t = d2dlb_core::model::Topology::new(bs, users, direct).unwrap();
    let run = run_d2d(&Instance::new(t, inst.demands).unwrap()).unwrap();
    assert!(run.metrics.rho.abs() < 1e-9);
    assert!(run.metrics.eta.abs() < 1e-12);
}
