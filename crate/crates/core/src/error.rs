use std::path::PathBuf;

use d2dlb_lp::{LpError, Status};

#[derive(Debug, thiserror::Error)]
pub enum CoreError {
    /// A link, demand or home assignment names a node that was never declared.
    #[error("unknown node `{0}`")]
    UnknownNode(String),

    /// Two nodes (BS or user) share an identifier.
    #[error("node identifier `{0}` is declared more than once")]
    DuplicateName(String),

    /// The same directed link appears twice.
    #[error("duplicate link {src} -> {dst}")]
    DuplicateLink { src: String, dst: String },

    /// A link rate is zero, negative, NaN or infinite.
    #[error("link {src} -> {dst} has invalid rate {rate}")]
    InvalidRate { src: String, dst: String, rate: f64 },

    /// Links must join distinct nodes and start at a user.
    #[error("invalid link {src} -> {dst}: {reason}")]
    InvalidLink {
        src: String,
        dst: String,
        reason: &'static str,
    },

    /// A user's home is not a declared BS.
    #[error("user `{user}` has home `{home}`, which is not a base station")]
    InvalidHome { user: String, home: String },

    /// A demand violates `1 ≤ s ≤ e ≤ T` or has a non-positive volume.
    #[error("demand {id}: {reason}")]
    InvalidDemand { id: usize, reason: String },

    /// An operation needs the user's direct link to its home BS.
    #[error("user `{0}` has no link to its home base station")]
    MissingHomeLink(String),

    /// No BS can be reached from the demand's user within its lifetime.
    #[error("demand {demand} of user `{user}` cannot reach a base station within its {available}-slot lifetime")]
    UnreachableDemand {
        demand: usize,
        user: String,
        /// Hops to the nearest BS; `None` if no BS is reachable at all.
        needed: Option<usize>,
        available: usize,
    },

    /// An interval outside `[1, T]` or with `z > z'`.
    #[error("invalid interval [{start}, {end}] for horizon {horizon}")]
    InvalidInterval {
        start: usize,
        end: usize,
        horizon: usize,
    },

    /// A ratio metric with a zero denominator.
    #[error("metric undefined: {0}")]
    UndefinedMetric(&'static str),

    /// Split parameter outside `[0, 1]`.
    #[error("lambda {0} is outside [0, 1]")]
    InvalidLambda(f64),

    /// Reuse factors with `K_d2d > K` or non-positive values.
    #[error("invalid reuse factors K = {k}, K_d2d = {k_d2d} (need 0 < K_d2d <= K)")]
    InvalidReuse { k: f64, k_d2d: f64 },

    /// A configuration or generator parameter is out of range.
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// An LP that must be solvable was not solved to optimality.
    #[error("{context}: solver returned {status}")]
    Solver { context: String, status: Status },

    #[error(transparent)]
    Lp(#[from] LpError),

    /// A named fixture does not exist or has bad arguments.
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),

    /// Malformed trace or schedule CSV content.
    #[error("{path}: line {line}: {message}")]
    Format {
        path: String,
        line: usize,
        message: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = CoreError> = std::result::Result<T, E>;
