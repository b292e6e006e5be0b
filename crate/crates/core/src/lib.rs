//! Frechet and Wasserstein distances between conditional distributions.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: symmetric eigendecomposition, PSD square roots and
//!   pseudo-inverses.
//! - [`stats`]: sample and conditional second-order moments of `(x, y, ŷ)`
//!   triplets.
//! - [`metrics`]: closed-form Gaussian distances (MFID, RFID, CFID, JFD).
//! - [`ot_oracle`]: exact discrete optimal transport for the marginal,
//!   restricted and conditional Wasserstein distances.
//! - [`experiments`]: bivariate studies, scaling sweeps and the synthetic
//!   covariance-estimator comparison.

pub mod error;
pub mod experiments;
pub mod linalg;
pub mod metrics;
pub mod ot_oracle;
pub mod stats;

pub use error::{Error, Result};
pub use linalg::{RectMatrix, SymMatrix, Tolerances};
pub use metrics::{MetricKind, MetricReport};
pub use stats::{CondPairStats, JointStats, OutputBlock};
