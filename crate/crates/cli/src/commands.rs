//! The subcommands. Each writes its files into the output directory and returns a
//! one-line summary for stdout.

use std::fs::File;
use std::io::BufReader;
use std::time::Instant;

use d2dlb_core::bounds::{bound_suite, frequency_reuse_adjusted, BoundReport, BOUND_SLACK};
use d2dlb_core::flow::{build_min_spectrum_d2d, solve_d2d_lexicographic, D2DSolution, FlowOptions};
use d2dlb_core::heuristic::{
    check_heuristic_bounds, heuristic_from_nd, heuristic_min_overhead, HeuristicBoundInputs,
    HeuristicOptions,
};
use d2dlb_core::model::{
    metrics, read_schedule_csv, validate_schedule, write_schedule_csv, Instance, Metrics, Schedule,
    Tolerance,
};
use d2dlb_core::nd::{nd_total, NdMethod, NdResult};
use d2dlb_core::scenario::write_trace_csv;
use d2dlb_lp::SolveOptions;
use serde::Serialize;

use crate::config::{BoundsArgs, CommonArgs, HeuristicArgs};
use crate::error::{CliError, CliResult};
use crate::output::{OutDir, Provenance};

/// Relative agreement required between the interval search and the LP.
const ND_AGREEMENT: f64 = 1e-6;
/// Relative slack of the second lexicographic stage.
const OVERHEAD_SLACK: f64 = 1e-9;

struct Context {
    instance: Instance,
    provenance: Provenance,
    out: OutDir,
    solve: SolveOptions,
}

fn context(
    command: &'static str,
    args: &impl Serialize,
    common: &CommonArgs,
) -> CliResult<(Context, Option<Vec<d2dlb_core::scenario::TraceRecord>>)> {
    let resolved = common.resolve()?;
    let provenance = Provenance::new(command, args, common, resolved.source)?;
    Ok((
        Context {
            instance: resolved.instance,
            provenance,
            out: OutDir::create(&common.out)?,
            solve: common.solve_options()?,
        },
        resolved.trace,
    ))
}

fn flow_options(common: &CommonArgs) -> FlowOptions {
    FlowOptions {
        pruning: common.pruning(),
        ..FlowOptions::default()
    }
}

fn agree(a: f64, b: f64) -> bool {
    (a - b).abs() <= ND_AGREEMENT * a.abs().max(b.abs()).max(1.0)
}

/// `ρ` and `η`, or `None` when `F^ND` is zero or nothing was sent.
fn metrics_opt(f_nd: f64, f: f64, v_d2d: f64, v_bs: f64) -> Option<Metrics> {
    metrics(f_nd, f, v_d2d, v_bs).ok()
}

#[derive(Serialize)]
struct NdRow {
    bs: String,
    f_nd_interval: f64,
    f_nd_lp: f64,
    critical_start: Option<usize>,
    critical_end: Option<usize>,
}

pub fn cmd_nd(common: &CommonArgs) -> CliResult<String> {
    let (ctx, _) = context("nd", common, common)?;
    let (t, d) = (&ctx.instance.topology, &ctx.instance.demands);
    let yds = nd_total(t, d, NdMethod::Yds, &ctx.solve)?;
    let lp = nd_total(t, d, NdMethod::Lp, &ctx.solve)?;
    let mut rows: Vec<NdRow> = yds
        .cells
        .iter()
        .zip(&lp.cells)
        .map(|(a, b)| NdRow {
            bs: t.bs_name(a.bs).to_string(),
            f_nd_interval: a.spectrum,
            f_nd_lp: b.spectrum,
            critical_start: a.critical_interval.map(|i| i.0),
            critical_end: a.critical_interval.map(|i| i.1),
        })
        .collect();
    rows.push(NdRow {
        bs: "total".into(),
        f_nd_interval: yds.total(),
        f_nd_lp: lp.total(),
        critical_start: None,
        critical_end: None,
    });
    let path = ctx.out.write_csv("nd.csv", &ctx.provenance, &rows)?;
    let diffs: Vec<String> = rows
        .iter()
        .filter(|r| !agree(r.f_nd_interval, r.f_nd_lp))
        .map(|r| {
            format!(
                "{}: interval search {} vs LP {}",
                r.bs, r.f_nd_interval, r.f_nd_lp
            )
        })
        .collect();
    if !diffs.is_empty() {
        return Err(CliError::Violation(format!(
            "no-D2D optima disagree: {}",
            diffs.join("; ")
        )));
    }
    Ok(format!(
        "F^ND = {} over {} cells -> {}",
        yds.total(),
        t.num_bs(),
        path.display()
    ))
}

#[derive(Serialize)]
struct BsSummary {
    bs: String,
    f_nd: f64,
    f_d2d: f64,
}

#[derive(Serialize)]
struct D2dSummary {
    f_nd: f64,
    f_d2d: f64,
    rho: Option<f64>,
    v_d2d: f64,
    v_bs: f64,
    eta: Option<f64>,
    per_bs: Vec<BsSummary>,
    lp_variables: usize,
    lp_constraints: usize,
    lp_iterations: usize,
}

fn check_schedule(schedule: &Schedule, instance: &Instance, what: &str) -> CliResult<()> {
    let report = validate_schedule(
        schedule,
        &instance.topology,
        &instance.demands,
        Tolerance::default(),
    );
    match report.violations.first() {
        None => Ok(()),
        Some(v) => Err(CliError::Violation(format!(
            "{what} fails validation ({} violations, first: {v:?})",
            report.violations.len()
        ))),
    }
}

/// Write the schedule CSV, read it back and validate the copy.
fn write_validated_schedule(
    ctx: &Context,
    name: &str,
    schedule: &Schedule,
) -> CliResult<std::path::PathBuf> {
    check_schedule(schedule, &ctx.instance, "schedule")?;
    let mut buf = Vec::new();
    write_schedule_csv(schedule, &ctx.instance.topology, &mut buf)?;
    let body = String::from_utf8(buf).expect("csv output is UTF-8");
    let path = ctx
        .out
        .write_text(name, &(ctx.provenance.comment_block() + &body))?;
    let file = File::open(&path)
        .map_err(|e| CliError::Config(format!("cannot reopen {}: {e}", path.display())))?;
    let back = read_schedule_csv(
        BufReader::new(file),
        &ctx.instance.topology,
        &path.display().to_string(),
    )?;
    check_schedule(&back, &ctx.instance, "schedule read back from CSV")?;
    Ok(path)
}

fn solve_d2d(ctx: &Context, common: &CommonArgs) -> CliResult<(NdResult, f64, D2DSolution)> {
    let (t, d) = (&ctx.instance.topology, &ctx.instance.demands);
    let nd = nd_total(t, d, NdMethod::Yds, &ctx.solve)?;
    let (f_d2d, sol) = solve_d2d_lexicographic(t, d, &flow_options(common), &ctx.solve)?;
    Ok((nd, f_d2d, sol))
}

pub fn cmd_d2d(common: &CommonArgs) -> CliResult<String> {
    let (ctx, _) = context("d2d", common, common)?;
    let (nd, f_d2d, sol) = solve_d2d(&ctx, common)?;
    let t = &ctx.instance.topology;
    let m = metrics_opt(nd.total(), f_d2d, sol.spectrum.v_d2d, sol.spectrum.v_bs);
    let summary = D2dSummary {
        f_nd: nd.total(),
        f_d2d,
        rho: m.map(|m| m.rho),
        v_d2d: sol.spectrum.v_d2d,
        v_bs: sol.spectrum.v_bs,
        eta: m.map(|m| m.eta),
        per_bs: (0..t.num_bs())
            .map(|b| BsSummary {
                bs: t.bs_name(b).to_string(),
                f_nd: nd.spectrum.per_bs_peak[b],
                f_d2d: sol.spectrum.per_bs_peak[b],
            })
            .collect(),
        lp_variables: sol.num_vars,
        lp_constraints: sol.num_constraints,
        lp_iterations: sol.iterations,
    };
    let schedule = write_validated_schedule(&ctx, "schedule.csv", &sol.schedule)?;
    let json = ctx.out.write_json("d2d.json", &ctx.provenance, &summary)?;
    let fmt = |x: Option<f64>| x.map_or("undefined".to_string(), |v| format!("{v:.6}"));
    Ok(format!(
        "F^ND = {}, F^D2D = {f_d2d}, rho = {}, eta = {} -> {}, {}",
        nd.total(),
        fmt(summary.rho),
        fmt(summary.eta),
        json.display(),
        schedule.display()
    ))
}

#[derive(Serialize)]
struct HeuristicRow {
    lambda: f64,
    f_heuristic: f64,
    rho_heuristic: Option<f64>,
    eta_heuristic: Option<f64>,
    d2d_demands: usize,
    variables: usize,
    rho_lower_bound: Option<f64>,
    rho_upper_bound: Option<f64>,
    eta_upper_bound: Option<f64>,
    bounds_ok: Option<bool>,
}

#[derive(Serialize)]
struct TimingRow {
    lambda: f64,
    wall_seconds: f64,
}

pub fn cmd_heuristic(args: &HeuristicArgs) -> CliResult<String> {
    args.check()?;
    let common = &args.common;
    let (ctx, _) = context("heuristic", args, common)?;
    let (t, d) = (&ctx.instance.topology, &ctx.instance.demands);
    let (nd, f_d2d, _) = solve_d2d(&ctx, common)?;
    let f_nd = nd.total();
    let rho = (f_nd > 0.0).then(|| 1.0 - f_d2d / f_nd);
    let opts = HeuristicOptions {
        step_one: NdMethod::Yds,
        pruning: common.pruning(),
        solve: ctx.solve.clone(),
    };
    let mut rows = Vec::new();
    let mut timing = Vec::new();
    let mut violations = Vec::new();
    for &lambda in &args.lambda_grid {
        let start = Instant::now();
        let h = heuristic_from_nd(t, d, &nd, lambda, &opts)?;
        let o = heuristic_min_overhead(t, d, &nd, &h, OVERHEAD_SLACK, &opts)?;
        timing.push(TimingRow {
            lambda,
            wall_seconds: start.elapsed().as_secs_f64(),
        });
        let m = metrics_opt(f_nd, h.total, o.spectrum.v_d2d, o.spectrum.v_bs);
        let report = match (rho, m) {
            (Some(rho), Some(m)) => Some(check_heuristic_bounds(&HeuristicBoundInputs {
                lambda,
                rho,
                rho_heuristic: m.rho,
                eta_heuristic: m.eta,
                d_max: d.d_max(),
                d2d_volume: h.d2d_volume,
                total_volume: d.total_volume(),
            })),
            _ => None,
        };
        if let Some(r) = report.filter(|r| !r.all_ok()) {
            violations.push(format!("lambda {lambda}: {r:?}"));
        }
        rows.push(HeuristicRow {
            lambda,
            f_heuristic: h.total,
            rho_heuristic: m.map(|m| m.rho),
            eta_heuristic: m.map(|m| m.eta),
            d2d_demands: h.split.d2d_demands().len(),
            variables: h.step3_vars,
            rho_lower_bound: report.map(|r| r.rho_lower),
            rho_upper_bound: report.map(|r| r.rho_upper),
            eta_upper_bound: report.map(|r| r.eta_upper),
            bounds_ok: report.map(|r| r.all_ok()),
        });
    }
    let path = ctx.out.write_csv("heuristic.csv", &ctx.provenance, &rows)?;
    ctx.out
        .write_csv("heuristic_timing.csv", &ctx.provenance, &timing)?;
    if !violations.is_empty() {
        return Err(CliError::Violation(format!(
            "heuristic bounds violated: {}",
            violations.join("; ")
        )));
    }
    Ok(format!(
        "{} lambda values, F^D2D = {f_d2d} -> {}",
        rows.len(),
        path.display()
    ))
}

#[derive(Serialize)]
struct BoundRow {
    name: String,
    bound: f64,
    observed: Option<f64>,
    satisfied: Option<bool>,
    inputs: String,
}

impl From<&BoundReport> for BoundRow {
    fn from(b: &BoundReport) -> Self {
        Self {
            name: b.name.to_string(),
            bound: b.bound,
            observed: b.observed,
            satisfied: b.satisfied,
            inputs: b
                .inputs
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join(";"),
        }
    }
}

pub fn cmd_bounds(args: &BoundsArgs) -> CliResult<String> {
    let common = &args.common;
    let (ctx, _) = context("bounds", args, common)?;
    let (t, d) = (&ctx.instance.topology, &ctx.instance.demands);
    let observed = if args.no_lp {
        None
    } else {
        let (nd, f_d2d, sol) = solve_d2d(&ctx, common)?;
        metrics_opt(nd.total(), f_d2d, sol.spectrum.v_d2d, sol.spectrum.v_bs)
    };
    let suite = bound_suite(t, d, observed.map(|m| m.rho), observed.map(|m| m.eta))?;
    let mut rows: Vec<BoundRow> = suite.iter().map(BoundRow::from).collect();
    if let (Some(m), Some(&[k, k_d2d])) = (observed, args.reuse.as_deref()) {
        rows.push(BoundRow {
            name: "reuse_adjusted_rho".into(),
            bound: frequency_reuse_adjusted(m.rho, k, k_d2d)?,
            observed: None,
            satisfied: None,
            inputs: format!("K={k};K_d2d={k_d2d}"),
        });
    }
    let path = ctx.out.write_csv("bounds.csv", &ctx.provenance, &rows)?;
    let broken: Vec<String> = suite
        .iter()
        .filter(|b| b.satisfied == Some(false))
        .map(|b| {
            format!(
                "{}: bound {} < observed {:?} (slack {BOUND_SLACK})",
                b.name, b.bound, b.observed
            )
        })
        .collect();
    if !broken.is_empty() {
        return Err(CliError::Violation(format!(
            "bounds violated: {}",
            broken.join("; ")
        )));
    }
    Ok(format!("{} bounds -> {}", rows.len(), path.display()))
}

pub fn cmd_generate(common: &CommonArgs) -> CliResult<String> {
    let (ctx, trace) = context("generate", common, common)?;
    let path = ctx.out.path("instance.json");
    ctx.instance.write(&path)?;
    let mut summary = format!(
        "{} cells, {} users, {} links, {} demands, T = {} -> {}",
        ctx.instance.topology.num_bs(),
        ctx.instance.topology.num_users(),
        ctx.instance.topology.links().len(),
        ctx.instance.demands.len(),
        ctx.instance.demands.horizon(),
        path.display()
    );
    if let Some(records) = trace {
        let mut buf = Vec::new();
        write_trace_csv(&records, &mut buf)?;
        let body = String::from_utf8(buf).expect("csv output is UTF-8");
        let trace_path = ctx
            .out
            .write_text("trace.csv", &(ctx.provenance.comment_block() + &body))?;
        summary.push_str(&format!(", {}", trace_path.display()));
    }
    ctx.out.write_json(
        "generate.json",
        &ctx.provenance,
        &serde_json::json!({ "instance": "instance.json" }),
    )?;
    Ok(summary)
}

pub fn cmd_lp_dump(common: &CommonArgs) -> CliResult<String> {
    let (ctx, _) = context("lp-dump", common, common)?;
    let model = build_min_spectrum_d2d(
        &ctx.instance.topology,
        &ctx.instance.demands,
        &flow_options(common),
    )?;
    let header: String = serde_json::to_value(&ctx.provenance)
        .ok()
        .and_then(|v| v.as_object().cloned())
        .into_iter()
        .flatten()
        .map(|(k, v)| format!("\\ {k}: {v}\n"))
        .collect();
    let path = ctx.out.write_text(
        "d2d.lp",
        &(header + &d2dlb_lp::lpformat::write_lp(&model.lp)),
    )?;
    Ok(format!(
        "{} variables, {} constraints -> {}",
        model.lp.num_vars(),
        model.lp.num_constraints(),
        path.display()
    ))
}
