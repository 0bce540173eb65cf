//! Command-line arguments and the experiment configuration they resolve to.

use std::fs::File;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use d2dlb_core::model::Instance;
use d2dlb_core::scenario::{
    fixture, generate_topology, hex_positions, read_trace_csv, synthesize_demands,
    synthesize_trace, DemandSynthesis, GeoParams, TraceProfile,
};
use d2dlb_lp::{Backend, ExternalSolver, SolveOptions};
use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "d2dlb",
    version,
    about = "Spectrum provisioning with and without D2D load balancing"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-cell no-D2D spectrum from the interval search, cross-checked against the LP.
    Nd(CommonArgs),
    /// Minimum spectrum with D2D, then minimum D2D traffic at that spectrum.
    D2d(CommonArgs),
    /// Three-step heuristic over a grid of split parameters.
    Heuristic(HeuristicArgs),
    /// Every applicable reduction and overhead bound against the LP optimum.
    Bounds(BoundsArgs),
    /// Write the resolved instance (and, for generated instances, the trace) to files.
    Generate(CommonArgs),
    /// Write the minimum-spectrum D2D LP in LP text format.
    LpDump(CommonArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendChoice {
    Reference,
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Toggle {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Diurnal,
    Uniform,
    Bursty,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CommonArgs {
    /// Named fixture, e.g. `toy-fig1`, `ring(3)` or `complete(4,2)`.
    #[arg(long, group = "source")]
    pub fixture: Option<String>,
    /// Instance JSON file.
    #[arg(long, group = "source")]
    pub instance: Option<PathBuf>,
    /// Trace CSV (`timestamp,cell_id,volume_bits`) over a generated topology whose cells are
    /// named `bs0`, `bs1`, ...
    #[arg(long, group = "source")]
    pub trace: Option<PathBuf>,
    /// Generated topology with a synthetic trace.
    #[arg(long, group = "source")]
    pub generated: bool,

    /// Seed for every random draw.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = BackendChoice::Reference)]
    pub backend: BackendChoice,
    /// External solver command line; `{lp}` and `{sol}` are replaced by file paths.
    #[arg(long)]
    pub external_cmd: Option<String>,
    #[arg(long, value_enum, default_value_t = Toggle::On)]
    pub pruning: Toggle,
    #[arg(long, default_value_t = 1e-9)]
    pub primal_tolerance: f64,
    #[arg(long, default_value_t = 1e-7)]
    pub optimality_tolerance: f64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    #[serde(skip)]
    pub out: PathBuf,

    #[command(flatten)]
    pub geo: GeoArgs,
    #[command(flatten)]
    pub synthesis: SynthesisArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GeoArgs {
    /// Number of cells of a generated topology.
    #[arg(long, default_value_t = 6)]
    pub cells: usize,
    /// Distance between neighbouring BSs in meters.
    #[arg(long, default_value_t = 450.0)]
    pub bs_spacing: f64,
    #[arg(long, default_value_t = 300.0)]
    pub cell_radius: f64,
    #[arg(long, default_value_t = 30.0)]
    pub d2d_range: f64,
    #[arg(long, default_value_t = 40)]
    pub users_per_cell: usize,
    #[arg(long, default_value_t = 21.0, allow_negative_numbers = true)]
    pub tx_power_dbm: f64,
    #[arg(long, default_value_t = -102.0, allow_negative_numbers = true)]
    pub noise_dbm: f64,
    #[arg(long, default_value_t = 3.5)]
    pub path_loss_exponent: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SynthesisArgs {
    /// Days of synthetic trace for `--generated`.
    #[arg(long, default_value_t = 1)]
    pub days: usize,
    #[arg(long, value_enum, default_value_t = Profile::Diurnal)]
    pub profile: Profile,
    /// Demands per cell and window.
    #[arg(long, default_value_t = 120)]
    pub splits: usize,
    /// Candidate delays, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "3,4,5")]
    pub delays: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    pub slot_seconds: i64,
    /// Demand window; a multiple of 900 that divides a day.
    #[arg(long, default_value_t = 900)]
    pub window_seconds: i64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HeuristicArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Split parameters in [0, 1], comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75,1")]
    pub lambda_grid: Vec<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Only evaluate the bounds; do not solve the LP for observed values.
    #[arg(long)]
    pub no_lp: bool,
    /// Reuse factors `K,K_d2d` for the reuse-adjusted reduction.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub reuse: Option<Vec<f64>>,
}

/// Where an instance came from, for provenance.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "value")]
pub enum Source {
    Fixture(String),
    Instance(String),
    Trace(String),
    Generated,
}

/// A resolved instance and, for generated instances, the trace it was synthesized from.
pub struct Resolved {
    pub instance: Instance,
    pub source: Source,
    pub trace: Option<Vec<d2dlb_core::scenario::TraceRecord>>,
}

impl CommonArgs {
    pub fn source(&self) -> CliResult<Source> {
        match (&self.fixture, &self.instance, &self.trace, self.generated) {
            (Some(f), None, None, false) => Ok(Source::Fixture(f.clone())),
            (None, Some(p), None, false) => Ok(Source::Instance(p.display().to_string())),
            (None, None, Some(p), false) => Ok(Source::Trace(p.display().to_string())),
            (None, None, None, true) => Ok(Source::Generated),
            _ => Err(CliError::Config(
                "exactly one of --fixture, --instance, --trace or --generated is required".into(),
            )),
        }
    }

    pub fn geo_params(&self) -> GeoParams {
        GeoParams {
            cell_radius: self.geo.cell_radius,
            d2d_range: self.geo.d2d_range,
            users_per_cell: self.geo.users_per_cell,
            tx_power_dbm: self.geo.tx_power_dbm,
            noise_dbm: self.geo.noise_dbm,
            path_loss_exponent: self.geo.path_loss_exponent,
            seed: self.seed,
        }
    }

    fn synthesis(&self) -> DemandSynthesis {
        DemandSynthesis {
            splits: self.synthesis.splits,
            delays: self.synthesis.delays.clone(),
            slot_seconds: self.synthesis.slot_seconds,
            window_seconds: self.synthesis.window_seconds,
            seed: self.seed,
            ..DemandSynthesis::default()
        }
    }

    fn profile(&self) -> TraceProfile {
        match self.synthesis.profile {
            Profile::Diurnal => TraceProfile::diurnal(),
            Profile::Uniform => TraceProfile::Uniform { volume: 1000.0 },
            Profile::Bursty => TraceProfile::Bursty {
                base: 500.0,
                burst: 2000.0,
                probability: 0.1,
            },
        }
    }

    pub fn resolve(&self) -> CliResult<Resolved> {
        let source = self.source()?;
        let (instance, trace) = match &source {
            Source::Fixture(name) => (fixture(name)?, None),
            Source::Instance(_) => (
                Instance::read(self.instance.as_deref().expect("source checked"))?,
                None,
            ),
            Source::Trace(_) | Source::Generated => {
                let topology = generate_topology(
                    &hex_positions(self.geo.cells, self.geo.bs_spacing),
                    &self.geo_params(),
                )?
                .topology;
                let records = match &self.trace {
                    Some(path) => {
                        let file = File::open(path).map_err(|e| {
                            CliError::Config(format!("cannot open {}: {e}", path.display()))
                        })?;
                        read_trace_csv(file, &path.display().to_string())?
                    }
                    None => {
                        let cells: Vec<String> = (0..topology.num_bs())
                            .map(|b| topology.bs_name(b).to_string())
                            .collect();
                        synthesize_trace(&cells, self.synthesis.days, &self.profile(), self.seed)?
                    }
                };
                let demands = synthesize_demands(&records, &topology, &self.synthesis())?;
                let trace = self.trace.is_none().then_some(records);
                (Instance::new(topology, demands)?, trace)
            }
        };
        Ok(Resolved {
            instance,
            source,
            trace,
        })
    }

    pub fn solve_options(&self) -> CliResult<SolveOptions> {
        let backend = match (self.backend, &self.external_cmd) {
            (BackendChoice::Reference, _) => Backend::Reference,
            (BackendChoice::External, Some(cmd)) => {
                let mut parts = cmd.split_whitespace().map(str::to_string);
                let program = parts
                    .next()
                    .ok_or_else(|| CliError::Config("--external-cmd is empty".into()))?;
                Backend::External(ExternalSolver::new(program, parts.collect()))
            }
            (BackendChoice::External, None) => {
                return Err(CliError::Config(
                    "--backend external needs --external-cmd".into(),
                ));
            }
        };
        Ok(SolveOptions {
            primal_tolerance: self.primal_tolerance,
            optimality_tolerance: self.optimality_tolerance,
            backend,
            ..SolveOptions::default()
        })
    }

    pub fn pruning(&self) -> bool {
        self.pruning == Toggle::On
    }
}

impl HeuristicArgs {
    pub fn check(&self) -> CliResult<()> {
        if self.lambda_grid.is_empty() {
            return Err(CliError::Config("--lambda-grid is empty".into()));
        }
        match self.lambda_grid.iter().find(|l| !(0.0..=1.0).contains(*l)) {
            Some(l) => Err(CliError::Config(format!("lambda {l} is outside [0, 1]"))),
            None => Ok(()),
        }
    }
}
