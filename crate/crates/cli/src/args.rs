use std::path::PathBuf;

use cfid::experiments::CxxMode;
use cfid::linalg::{DEFAULT_CLAMP_TOL, DEFAULT_PINV_EPS};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::embedding::FileFormat;

#[derive(Debug, Parser)]
#[command(name = "cfid", version, about = "Frechet distances for conditional generative models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format. `row` prints one `label: mfid, rfid, cfid` line (metrics only).
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,

    /// Write output here (atomically) instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// RNG seed for randomized commands; recorded in every report.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Row,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// MFID, RFID, CFID and JFD between paired embedding tables.
    Metrics(MetricsArgs),
    /// Exact discrete transport distances and the ordering slacks between them.
    Oracle(OracleArgs),
    /// Synthetic bivariate Gaussian experiments.
    Experiment {
        #[command(subcommand)]
        kind: ExperimentKind,
    },
    /// Convert an embedding table between binary and CSV.
    Convert {
        input: PathBuf,
        output: PathBuf,
        /// Target format; inferred from the output extension when omitted.
        #[arg(long, value_enum)]
        to: Option<FileFormat>,
    },
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// Conditioning inputs, one row per sample.
    pub x: PathBuf,
    /// Reference outputs paired with `x`.
    pub y: PathBuf,
    /// Generated outputs paired with `x`.
    pub yhat: PathBuf,
    /// Row label used by `--format row`.
    #[arg(long, default_value = "model")]
    pub label: String,
    /// Relative eigenvalue cut-off for the pseudo-inverse of C_xx.
    #[arg(long, default_value_t = DEFAULT_PINV_EPS)]
    pub eps: f64,
    /// Relative tolerance for clamping negative eigenvalues.
    #[arg(long, default_value_t = DEFAULT_CLAMP_TOL)]
    pub clamp_tol: f64,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// JSON file `{"a": joint, "b": joint}` where a joint is
    /// `{"points": [{"x": [..], "y": [..]}, ..], "weights": [..]}`.
    #[arg(long, conflicts_with = "random")]
    pub instance: Option<PathBuf>,
    /// Check the ordering on this many random instances instead.
    #[arg(long)]
    pub random: Option<usize>,
    #[arg(long, default_value_t = 4)]
    pub max_x: usize,
    #[arg(long, default_value_t = 5)]
    pub max_y: usize,
    #[arg(long, default_value_t = 3)]
    pub max_dim: usize,
}

#[derive(Debug, Subcommand)]
pub enum ExperimentKind {
    /// Repeated small-sample trials comparing the SC, NSC1 and NSC2 estimators.
    Synthetic {
        #[arg(long, default_value_t = 0.5)]
        rho: f64,
        #[arg(long, default_value_t = 50)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[command(flatten)]
        cxx: CxxFlags,
    },
    /// Squared correlation difference, RFID and CFID over a (rho, rhohat) grid.
    Contour {
        #[arg(long, default_value_t = 21)]
        resolution: usize,
    },
    /// Metrics after scaling the input by log-spaced alpha in (0, 1].
    Alpha {
        #[arg(long, default_value_t = 0.3)]
        rho: f64,
        #[arg(long, default_value_t = 0.7)]
        rhohat: f64,
        #[arg(long, default_value_t = 1e-3)]
        alpha_min: f64,
        #[arg(long, default_value_t = 31)]
        points: usize,
    },
}

#[derive(Debug, Args)]
pub struct CxxFlags {
    /// Evaluate every estimator against the true input variance (default).
    #[arg(long, conflicts_with = "est_cxx")]
    pub true_cxx: bool,
    /// Use each estimator's own input variance.
    #[arg(long)]
    pub est_cxx: bool,
}

impl CxxFlags {
    pub fn mode(&self) -> CxxMode {
        if self.est_cxx {
            CxxMode::EstCxx
        } else {
            CxxMode::TrueCxx
        }
    }
}
