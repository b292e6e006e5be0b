//! Desk-scale studies on the bivariate Gaussian model
//! `C = [[1, ρ], [ρ, 1]]`: closed-form contour grids, the input-scaling
//! sweep, and the comparison of three covariance estimators.
//!
//! Randomness comes from ChaCha8 streams: trial `t` of a run seeded with `s`
//! draws from stream `t` of `ChaCha8Rng::seed_from_u64(s)`, so results do
//! not depend on how trials are scheduled across threads.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{RectMatrix, SymMatrix, Tolerances};
use crate::metrics::{cfid_with, mfid_with, rfid_with};
use crate::stats::{scale_x, CondPairStats, OutputBlock};

/// Recorded in experiment output so runs can be reproduced exactly.
pub const RNG_DESCRIPTION: &str =
    "ChaCha8Rng::seed_from_u64(seed) with stream = trial index; rand_distr StandardNormal (ziggurat)";

pub const GRID_LIMIT: f64 = 0.99;

/// Zero-mean, unit-variance bivariate Gaussian over `(x, y)` with correlation ρ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BvnModel {
    rho: f64,
}

impl BvnModel {
    pub fn new(rho: f64) -> Result<Self> {
        check_rho(rho)?;
        Ok(Self { rho })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn cov(&self) -> SymMatrix {
        SymMatrix::from_rows(&[vec![1.0, self.rho], vec![self.rho, 1.0]]).expect("finite")
    }

    fn block(rho: f64) -> OutputBlock {
        OutputBlock::new(
            DVector::zeros(1),
            RectMatrix::from_rows(&[vec![rho]]).expect("finite"),
            SymMatrix::identity(1),
        )
        .expect("scalar block")
    }

    /// Statistics for this model against a generator with correlation `rhohat`.
    pub fn pair_stats(&self, rhohat: f64) -> Result<CondPairStats> {
        check_rho(rhohat)?;
        CondPairStats::new(
            DVector::zeros(1),
            SymMatrix::identity(1),
            Self::block(self.rho),
            Self::block(rhohat),
            0,
            &Tolerances::default(),
        )
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho.is_nan() || rho.abs() > 1.0 {
        return Err(Error::Domain(format!("correlation must lie in [-1, 1], got {rho}")));
    }
    Ok(())
}

/// `n` paired draws `(x_i, y_i)` from the model.
#[derive(Debug, Clone, PartialEq)]
pub struct BvnSample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl BvnSample {
    /// Both columns as `n × 1` tables.
    pub fn tables(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        (
            DMatrix::from_column_slice(self.x.len(), 1, &self.x),
            DMatrix::from_column_slice(self.y.len(), 1, &self.y),
        )
    }
}

pub fn sample_bvn_with(model: &BvnModel, n: usize, rng: &mut impl Rng) -> Result<BvnSample> {
    if n == 0 {
        return Err(Error::Domain("sample size must be at least 1".into()));
    }
    let rho = model.rho;
    let tail = (1.0 - rho * rho).sqrt();
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        x.push(z1);
        y.push(rho * z1 + tail * z2);
    }
    Ok(BvnSample { x, y })
}

pub fn sample_bvn(model: &BvnModel, n: usize, seed: u64) -> Result<BvnSample> {
    sample_bvn_with(model, n, &mut ChaCha8Rng::seed_from_u64(seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum EstimatorKind {
    /// Sample covariance.
    Sc,
    /// Sample covariance rescaled so the output variance is 1.
    Nsc1,
    /// Sample covariance rescaled to unit diagonal.
    Nsc2,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 3] = [EstimatorKind::Sc, EstimatorKind::Nsc1, EstimatorKind::Nsc2];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Sc => "SC",
            EstimatorKind::Nsc1 => "NSC1",
            EstimatorKind::Nsc2 => "NSC2",
        }
    }
}

/// 2×2 covariance estimate of `z = (x, y)` from zero-mean samples.
pub fn fit_covariance(kind: EstimatorKind, x: &[f64], y: &[f64]) -> Result<SymMatrix> {
    if x.len() != y.len() {
        return Err(Error::Pairing {
            left: x.len(),
            right: y.len(),
        });
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let mut s = [[0.0; 2]; 2];
    for (&a, &b) in x.iter().zip(y) {
        s[0][0] += a * a;
        s[0][1] += a * b;
        s[1][1] += b * b;
    }
    let inv_n = 1.0 / n as f64;
    let (s11, s12, s22) = (s[0][0] * inv_n, s[0][1] * inv_n, s[1][1] * inv_n);
    if !(s11.is_finite() && s12.is_finite() && s22.is_finite()) {
        return Err(Error::InvalidInput("non-finite samples".into()));
    }

    let scales = match kind {
        EstimatorKind::Sc => return SymMatrix::from_rows(&[vec![s11, s12], vec![s12, s22]]),
        EstimatorKind::Nsc1 => [1.0, s22],
        EstimatorKind::Nsc2 => [s11, s22],
    };
    if scales.iter().any(|&d| d <= 0.0) {
        return Err(Error::DegenerateData(format!(
            "zero sample variance in {} normalization",
            kind.name()
        )));
    }
    // s_ij / sqrt(d_i d_j): the normalized diagonal entries come out exactly 1
    let norm = |v: f64, i: usize, j: usize| v / (scales[i] * scales[j]).sqrt();
    SymMatrix::from_rows(&[
        vec![norm(s11, 0, 0), norm(s12, 0, 1)],
        vec![norm(s12, 1, 0), norm(s22, 1, 1)],
    ])
}

/// Which `C_xx` the generated conditional is read against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CxxMode {
    /// Keep `Ĉ_ŷx` and `Ĉ_ŷŷ` as estimated and pair them with the true `C_xx = 1`.
    #[default]
    TrueCxx,
    /// Derive the generated conditional `p(ŷ|x)` with the estimate's own `Ĉ_xx`
    /// and re-express it on the true `C_xx = 1`.
    EstCxx,
}

/// Statistics for the true model against a generator described by a 2×2
/// covariance estimate.
pub fn estimator_to_pair_stats(est: &SymMatrix, truth: &BvnModel, mode: CxxMode) -> Result<CondPairStats> {
    if est.dim() != 2 {
        return Err(Error::DimensionMismatch(format!("estimate is {}x{}, expected 2x2", est.dim(), est.dim())));
    }
    let (cross, var) = match mode {
        CxxMode::TrueCxx => (est.get(1, 0), est.get(1, 1)),
        CxxMode::EstCxx => {
            let cxx = est.get(0, 0);
            if cxx <= 0.0 {
                return Err(Error::DegenerateData("estimated C_xx is not positive".into()));
            }
            let slope = est.get(1, 0) / cxx;
            let residual = est.get(1, 1) - slope * est.get(1, 0);
            (slope, residual + slope * slope)
        }
    };
    let generated = OutputBlock::new(
        DVector::zeros(1),
        RectMatrix::from_rows(&[vec![cross]])?,
        SymMatrix::scalar(var)?,
    )?;
    CondPairStats::new(
        DVector::zeros(1),
        SymMatrix::identity(1),
        BvnModel::block(truth.rho),
        generated,
        0,
        &Tolerances::default(),
    )
}

/// Closed-form CFID of the bivariate model:
/// `(ρ − ρ̂)² + (√(1 − ρ²) − √(1 − ρ̂²))²`.
pub fn cfid_scalar(rho: f64, rhohat: f64) -> Result<f64> {
    check_rho(rho)?;
    check_rho(rhohat)?;
    let d = (1.0 - rho * rho).sqrt() - (1.0 - rhohat * rhohat).sqrt();
    Ok((rho - rhohat).powi(2) + d * d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridMetric {
    SquaredDiff,
    Rfid,
    Cfid,
}

/// Metric values over a `(ρ, ρ̂)` grid; `values[i][j]` is at `(rho_axis[i], rhohat_axis[j])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub rho_axis: Vec<f64>,
    pub rhohat_axis: Vec<f64>,
    pub squared_diff: Vec<Vec<f64>>,
    pub rfid: Vec<Vec<f64>>,
    pub cfid: Vec<Vec<f64>>,
}

impl GridResult {
    pub fn values(&self, metric: GridMetric) -> &Vec<Vec<f64>> {
        match metric {
            GridMetric::SquaredDiff => &self.squared_diff,
            GridMetric::Rfid => &self.rfid,
            GridMetric::Cfid => &self.cfid,
        }
    }
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|k| if k == n - 1 { hi } else { lo + step * k as f64 })
        .collect()
}

pub fn contour_grid(resolution: usize) -> Result<GridResult> {
    if resolution < 2 {
        return Err(Error::Domain(format!("grid resolution must be at least 2, got {resolution}")));
    }
    let axis = linspace(-GRID_LIMIT, GRID_LIMIT, resolution);
    let tol = Tolerances::default();
    let rows: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = axis
        .par_iter()
        .map(|&rho| -> Result<_> {
            let model = BvnModel::new(rho)?;
            let mut sq = Vec::with_capacity(resolution);
            let mut rf = Vec::with_capacity(resolution);
            let mut cf = Vec::with_capacity(resolution);
            for &rhohat in &axis {
                let ps = model.pair_stats(rhohat)?;
                sq.push((rho - rhohat).powi(2));
                rf.push(rfid_with(&ps, &tol)?.value);
                cf.push(cfid_with(&ps, &tol)?.value);
            }
            Ok((sq, rf, cf))
        })
        .collect::<Result<_>>()?;
    let mut grid = GridResult {
        rho_axis: axis.clone(),
        rhohat_axis: axis,
        squared_diff: Vec::with_capacity(resolution),
        rfid: Vec::with_capacity(resolution),
        cfid: Vec::with_capacity(resolution),
    };
    for (sq, rf, cf) in rows {
        grid.squared_diff.push(sq);
        grid.rfid.push(rf);
        grid.cfid.push(cf);
    }
    Ok(grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaPoint {
    pub alpha: f64,
    pub mfid: f64,
    pub rfid: f64,
    pub cfid: f64,
}

/// MFID, RFID and CFID of the bivariate pair `(ρ, ρ̂)` after scaling `x` by each α.
pub fn alpha_sweep(rho: f64, rhohat: f64, alphas: &[f64]) -> Result<Vec<AlphaPoint>> {
    let ps = BvnModel::new(rho)?.pair_stats(rhohat)?;
    let tol = Tolerances::default();
    alphas
        .iter()
        .map(|&alpha| {
            let scaled = scale_x(&ps, alpha)?;
            Ok(AlphaPoint {
                alpha,
                mfid: mfid_with(&scaled, &tol)?.value,
                rfid: rfid_with(&scaled, &tol)?.value,
                cfid: cfid_with(&scaled, &tol)?.value,
            })
        })
        .collect()
}

/// Log-spaced α grid from `lo` to 1.
pub fn default_alphas(lo: f64, points: usize) -> Vec<f64> {
    linspace(lo.log10(), 0.0, points)
        .into_iter()
        .enumerate()
        .map(|(k, e)| if k == points - 1 { 1.0 } else { 10f64.powf(e) })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSeries {
    pub estimator: EstimatorKind,
    pub mfid: Vec<f64>,
    pub rfid: Vec<f64>,
    pub cfid: Vec<f64>,
    pub median_mfid: f64,
    pub median_rfid: f64,
    pub median_cfid: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialTable {
    pub rho: f64,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub cxx_mode: CxxMode,
    pub rng: String,
    pub series: Vec<TrialSeries>,
}

impl TrialTable {
    pub fn series(&self, kind: EstimatorKind) -> &TrialSeries {
        self.series
            .iter()
            .find(|s| s.estimator == kind)
            .expect("every estimator is evaluated")
    }
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

/// Per-trial (MFID, RFID, CFID) for each estimator, in [`EstimatorKind::ALL`] order.
fn run_trial(model: &BvnModel, n: usize, seed: u64, trial: usize, mode: CxxMode) -> Result<[[f64; 3]; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    let sample = sample_bvn_with(model, n, &mut rng)?;
    let tol = Tolerances::default();
    let mut out = [[0.0; 3]; 3];
    for (slot, kind) in out.iter_mut().zip(EstimatorKind::ALL) {
        let est = fit_covariance(kind, &sample.x, &sample.y)?;
        let ps = estimator_to_pair_stats(&est, model, mode)?;
        *slot = [
            mfid_with(&ps, &tol)?.value,
            rfid_with(&ps, &tol)?.value,
            cfid_with(&ps, &tol)?.value,
        ];
    }
    Ok(out)
}

pub fn run_synthetic(rho: f64, n: usize, trials: usize, seed: u64, mode: CxxMode) -> Result<TrialTable> {
    if trials == 0 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    let model = BvnModel::new(rho)?;
    let per_trial: Vec<[[f64; 3]; 3]> = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(&model, n, seed, t, mode))
        .collect::<Result<_>>()?;

    let series = EstimatorKind::ALL
        .iter()
        .enumerate()
        .map(|(k, &estimator)| {
            let column = |m: usize| per_trial.iter().map(|t| t[k][m]).collect::<Vec<_>>();
            let (mfid, rfid, cfid) = (column(0), column(1), column(2));
            TrialSeries {
                estimator,
                median_mfid: median(&mfid),
                median_rfid: median(&rfid),
                median_cfid: median(&cfid),
                mfid,
                rfid,
                cfid,
            }
        })
        .collect();
    Ok(TrialTable {
        rho,
        n,
        trials,
        seed,
        cxx_mode: mode,
        rng: RNG_DESCRIPTION.to_string(),
        series,
    })
}

/// Random statistics with a shared `x` marginal: the three blocks are read off
/// one random PSD covariance over `(x, y, ŷ)`, so both joints are valid.
pub fn random_pair_stats(rng: &mut impl Rng, dim_x: usize, dim_y: usize) -> CondPairStats {
    let d = dim_x + 2 * dim_y;
    let factor = DMatrix::from_fn(d, d + 2, |_, _| rng.random_range(-1.0..1.0));
    let full = &factor * factor.transpose() / (d + 2) as f64 + DMatrix::identity(d, d) * 0.05;
    let mean = |len: usize, rng: &mut dyn rand::RngCore| {
        DVector::from_fn(len, |_, _| rng.random_range(-1.0..1.0))
    };
    let block = |r0: usize, len: usize| full.view((r0, r0), (len, len)).into_owned();
    let cross = |r0: usize, len: usize| full.view((r0, 0), (len, dim_x)).into_owned();

    let c_xx = SymMatrix::new(block(0, dim_x)).expect("finite");
    let make = |r0: usize, m: DVector<f64>| {
        OutputBlock::new(
            m,
            RectMatrix::new(cross(r0, dim_y)).expect("finite"),
            SymMatrix::new(block(r0, dim_y)).expect("finite"),
        )
        .expect("consistent dims")
    };
    let mean_x = mean(dim_x, rng);
    let truth = make(dim_x, mean(dim_y, rng));
    let generated = make(dim_x + dim_y, mean(dim_y, rng));
    CondPairStats::new(mean_x, c_xx, truth, generated, 0, &Tolerances::default())
        .expect("blocks of a PSD matrix")
}
