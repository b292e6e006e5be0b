//! Closed-form Gaussian distances between conditional models.
//!
//! All values are squared Wasserstein-2 distances between Gaussians:
//!
//! ```text
//! W(a, b) = ‖m_a − m_b‖² + Tr(C_a) + Tr(C_b) − 2 Tr((C_a^{1/2} C_b C_a^{1/2})^{1/2})
//! ```
//!
//! - MFID compares the output marginals `(m_y, C_yy)` and `(m_ŷ, C_ŷŷ)`.
//! - RFID compares the joints over `(x, y)` and `(x, ŷ)` that share `p(x)`.
//! - CFID averages the distance between the conditionals `p(y|x)` and
//!   `p(ŷ|x)` over `x`, which reduces to a function of second-order moments.
//! - JFD compares two joints whose `x` marginals may differ.

use std::fmt;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{pinv_psd, trace_sqrt_product, SymMatrix, Tolerances};
use crate::stats::{conditional_cov, CondPairStats, JointStats};

/// Negative results down to `-NOISE_FLOOR * max(1, scale)` are rounding
/// noise and are reported as zero.
pub const NOISE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum MetricKind {
    Mfid,
    Rfid,
    Cfid,
    Jfd,
    Mwd,
    Rwd,
    Rwd3,
    Cwd,
}

impl MetricKind {
    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Mfid => "MFID",
            MetricKind::Rfid => "RFID",
            MetricKind::Cfid => "CFID",
            MetricKind::Jfd => "JFD",
            MetricKind::Mwd => "MWD",
            MetricKind::Rwd => "RWD",
            MetricKind::Rwd3 => "RWD3",
            MetricKind::Cwd => "CWD",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One metric value together with the data it was computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub metric: MetricKind,
    pub value: f64,
    #[serde(rename = "n")]
    pub n_samples: usize,
    pub dim_x: usize,
    pub dim_y: usize,
    pub seed: Option<u64>,
    pub tolerances: Tolerances,
}

impl MetricReport {
    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }
}

/// A Gaussian given by its mean and covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianDesc {
    pub mean: DVector<f64>,
    pub cov: SymMatrix,
}

impl GaussianDesc {
    pub fn new(mean: DVector<f64>, cov: SymMatrix) -> Result<Self> {
        if mean.len() != cov.dim() {
            return Err(Error::DimensionMismatch(format!(
                "mean has dim {}, covariance {}",
                mean.len(),
                cov.dim()
            )));
        }
        Ok(Self { mean, cov })
    }
}

pub(crate) fn clamp_noise(value: f64, scale: f64) -> Result<f64> {
    if value >= 0.0 {
        return Ok(value);
    }
    let floor = NOISE_FLOOR * scale.max(1.0);
    if value >= -floor {
        Ok(0.0)
    } else {
        Err(Error::NumericalFailure {
            dim: 0,
            what: format!("distance {value:e} is below the noise floor -{floor:e}"),
        })
    }
}

/// Trace part of the Gaussian W2: `Tr(A) + Tr(B) − 2 Tr((A^{1/2} B A^{1/2})^{1/2})`
/// (not yet clamped) and the scale used for the noise floor.
fn covariance_term(a: &SymMatrix, b: &SymMatrix, tol: &Tolerances) -> Result<(f64, f64)> {
    let cross = trace_sqrt_product(a, b, tol.clamp_tol)?;
    let (ta, tb) = (a.trace(), b.trace());
    Ok((ta + tb - 2.0 * cross, ta.abs() + tb.abs()))
}

pub fn gaussian_w2(a: &GaussianDesc, b: &GaussianDesc, tol: &Tolerances) -> Result<f64> {
    if a.mean.len() != b.mean.len() {
        return Err(Error::DimensionMismatch(format!(
            "gaussians of dim {} and {}",
            a.mean.len(),
            b.mean.len()
        )));
    }
    let mean_term = (&a.mean - &b.mean).norm_squared();
    let (cov_term, scale) = covariance_term(&a.cov, &b.cov, tol)?;
    clamp_noise(mean_term + cov_term, scale + mean_term)
}

fn report(kind: MetricKind, value: f64, ps_n: usize, dx: usize, dy: usize, tol: &Tolerances) -> MetricReport {
    MetricReport {
        metric: kind,
        value,
        n_samples: ps_n,
        dim_x: dx,
        dim_y: dy,
        seed: None,
        tolerances: *tol,
    }
}

pub fn mfid(ps: &CondPairStats) -> Result<MetricReport> {
    mfid_with(ps, &Tolerances::default())
}

pub fn mfid_with(ps: &CondPairStats, tol: &Tolerances) -> Result<MetricReport> {
    let value = gaussian_w2(
        &GaussianDesc::new(ps.truth().mean.clone(), ps.truth().cov.clone())?,
        &GaussianDesc::new(ps.generated().mean.clone(), ps.generated().cov.clone())?,
        tol,
    )?;
    Ok(report(MetricKind::Mfid, value, ps.n_samples(), ps.dim_x(), ps.dim_y(), tol))
}

pub fn rfid(ps: &CondPairStats) -> Result<MetricReport> {
    rfid_with(ps, &Tolerances::default())
}

pub fn rfid_with(ps: &CondPairStats, tol: &Tolerances) -> Result<MetricReport> {
    let (t, g) = (ps.joint_truth(), ps.joint_generated());
    let value = gaussian_w2(
        &GaussianDesc::new(t.joint_mean(), t.joint_cov())?,
        &GaussianDesc::new(g.joint_mean(), g.joint_cov())?,
        tol,
    )?;
    Ok(report(MetricKind::Rfid, value, ps.n_samples(), ps.dim_x(), ps.dim_y(), tol))
}

pub fn cfid(ps: &CondPairStats) -> Result<MetricReport> {
    cfid_with(ps, &Tolerances::default())
}

/// `‖m_y − m_ŷ‖² + Tr[(C_yx − C_ŷx) C_xx⁺ (C_xy − C_xŷ)]
///  + Tr[C_yy|x + C_ŷŷ|x − 2 (C_yy|x^{1/2} C_ŷŷ|x C_yy|x^{1/2})^{1/2}]`
pub fn cfid_with(ps: &CondPairStats, tol: &Tolerances) -> Result<MetricReport> {
    let (truth, generated) = (ps.truth(), ps.generated());
    let pinv = pinv_psd(ps.c_xx(), tol.pinv_eps)?;

    let mean_term = (&truth.mean - &generated.mean).norm_squared();

    let diff = truth.cross.as_matrix() - generated.cross.as_matrix();
    let regression_term = (&diff * pinv.as_matrix() * diff.transpose()).trace();

    let cond_truth = conditional_cov(truth, &pinv);
    let cond_generated = conditional_cov(generated, &pinv);
    let (cov_term, scale) = covariance_term(&cond_truth, &cond_generated, tol)?;

    let value = clamp_noise(
        mean_term + regression_term + cov_term,
        scale + mean_term + regression_term.abs(),
    )?;
    Ok(report(MetricKind::Cfid, value, ps.n_samples(), ps.dim_x(), ps.dim_y(), tol))
}

pub fn jfd(a: &JointStats, b: &JointStats) -> Result<MetricReport> {
    jfd_with(a, b, &Tolerances::default())
}

pub fn jfd_with(a: &JointStats, b: &JointStats, tol: &Tolerances) -> Result<MetricReport> {
    if a.dim_x() != b.dim_x() || a.dim_y() != b.dim_y() {
        return Err(Error::DimensionMismatch(format!(
            "joint dims ({}, {}) vs ({}, {})",
            a.dim_x(),
            a.dim_y(),
            b.dim_x(),
            b.dim_y()
        )));
    }
    let value = gaussian_w2(
        &GaussianDesc::new(a.joint_mean(), a.joint_cov())?,
        &GaussianDesc::new(b.joint_mean(), b.joint_cov())?,
        tol,
    )?;
    Ok(report(
        MetricKind::Jfd,
        value,
        a.n_samples().max(b.n_samples()),
        a.dim_x(),
        a.dim_y(),
        tol,
    ))
}

/// MFID, RFID, CFID and JFD for one set of statistics, in that order.
pub fn all_metrics(ps: &CondPairStats, tol: &Tolerances) -> Result<Vec<MetricReport>> {
    Ok(vec![
        mfid_with(ps, tol)?,
        rfid_with(ps, tol)?,
        cfid_with(ps, tol)?,
        jfd_with(&ps.joint_truth(), &ps.joint_generated(), tol)?,
    ])
}
