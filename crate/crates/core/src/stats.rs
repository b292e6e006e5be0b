//! Second-order statistics of `(x, y)` pairs and `(x, y, ŷ)` triplets.
//!
//! Covariances use the `1/n` normalization. Conditional moments use the
//! pseudo-inverse of `C_xx` so singular embeddings are handled.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, block_sym, pinv_psd, sym_from_product, RectMatrix, SymMatrix, Tolerances};

/// Moments of one output variable relative to the conditioning input:
/// its mean, its cross-covariance with `x` (`d_y × d_x`) and its covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputBlock {
    pub mean: DVector<f64>,
    pub cross: RectMatrix,
    pub cov: SymMatrix,
}

impl OutputBlock {
    pub fn new(mean: DVector<f64>, cross: RectMatrix, cov: SymMatrix) -> Result<Self> {
        let dy = cov.dim();
        if mean.len() != dy || cross.rows() != dy {
            return Err(Error::DimensionMismatch(format!(
                "output block: mean {} / cross rows {} / cov {}",
                mean.len(),
                cross.rows(),
                dy
            )));
        }
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite mean".into()));
        }
        Ok(Self { mean, cross, cov })
    }

    pub fn dim(&self) -> usize {
        self.cov.dim()
    }
}

/// Means and covariance blocks of a single joint distribution over `(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointStats {
    mean_x: DVector<f64>,
    c_xx: SymMatrix,
    output: OutputBlock,
    n_samples: usize,
}

impl JointStats {
    /// Validates dimensions and joint positive semidefiniteness.
    pub fn new(
        mean_x: DVector<f64>,
        c_xx: SymMatrix,
        output: OutputBlock,
        n_samples: usize,
        tol: &Tolerances,
    ) -> Result<Self> {
        check_x(&mean_x, &c_xx, &output)?;
        linalg::check_psd(&block_sym(&c_xx, &output.cross, &output.cov)?, tol.clamp_tol)?;
        Ok(Self {
            mean_x,
            c_xx,
            output,
            n_samples,
        })
    }

    pub fn mean_x(&self) -> &DVector<f64> {
        &self.mean_x
    }
    pub fn c_xx(&self) -> &SymMatrix {
        &self.c_xx
    }
    pub fn output(&self) -> &OutputBlock {
        &self.output
    }
    pub fn mean_y(&self) -> &DVector<f64> {
        &self.output.mean
    }
    pub fn c_yx(&self) -> &RectMatrix {
        &self.output.cross
    }
    pub fn c_yy(&self) -> &SymMatrix {
        &self.output.cov
    }
    pub fn n_samples(&self) -> usize {
        self.n_samples
    }
    pub fn dim_x(&self) -> usize {
        self.c_xx.dim()
    }
    pub fn dim_y(&self) -> usize {
        self.output.dim()
    }

    /// Mean of the concatenated `(x, y)` vector.
    pub fn joint_mean(&self) -> DVector<f64> {
        concat(&self.mean_x, &self.output.mean)
    }

    /// Covariance of `(x, y)`, x block first.
    pub fn joint_cov(&self) -> SymMatrix {
        block_sym(&self.c_xx, &self.output.cross, &self.output.cov)
            .expect("dimensions validated on construction")
    }
}

/// Statistics for a true and a generated model that share one `x` marginal.
///
/// The shared `mean_x`/`c_xx` encode the restriction `p(x) = p(x̂)`. The
/// cross-covariance between the two models' outputs is not stored; none of
/// the metrics need it.
#[derive(Debug, Clone, PartialEq)]
pub struct CondPairStats {
    mean_x: DVector<f64>,
    c_xx: SymMatrix,
    truth: OutputBlock,
    generated: OutputBlock,
    n_samples: usize,
}

impl CondPairStats {
    pub fn new(
        mean_x: DVector<f64>,
        c_xx: SymMatrix,
        truth: OutputBlock,
        generated: OutputBlock,
        n_samples: usize,
        tol: &Tolerances,
    ) -> Result<Self> {
        check_x(&mean_x, &c_xx, &truth)?;
        check_x(&mean_x, &c_xx, &generated)?;
        if truth.dim() != generated.dim() {
            return Err(Error::DimensionMismatch(format!(
                "output dims differ: {} vs {}",
                truth.dim(),
                generated.dim()
            )));
        }
        for block in [&truth, &generated] {
            linalg::check_psd(&block_sym(&c_xx, &block.cross, &block.cov)?, tol.clamp_tol)?;
        }
        Ok(Self {
            mean_x,
            c_xx,
            truth,
            generated,
            n_samples,
        })
    }

    pub fn mean_x(&self) -> &DVector<f64> {
        &self.mean_x
    }
    pub fn c_xx(&self) -> &SymMatrix {
        &self.c_xx
    }
    pub fn truth(&self) -> &OutputBlock {
        &self.truth
    }
    pub fn generated(&self) -> &OutputBlock {
        &self.generated
    }
    pub fn n_samples(&self) -> usize {
        self.n_samples
    }
    pub fn dim_x(&self) -> usize {
        self.c_xx.dim()
    }
    pub fn dim_y(&self) -> usize {
        self.truth.dim()
    }

    pub fn joint_truth(&self) -> JointStats {
        self.joint_of(&self.truth)
    }

    pub fn joint_generated(&self) -> JointStats {
        self.joint_of(&self.generated)
    }

    fn joint_of(&self, block: &OutputBlock) -> JointStats {
        JointStats {
            mean_x: self.mean_x.clone(),
            c_xx: self.c_xx.clone(),
            output: block.clone(),
            n_samples: self.n_samples,
        }
    }

    /// Same statistics with the roles of the two models exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            truth: self.generated.clone(),
            generated: self.truth.clone(),
            ..self.clone()
        }
    }

    /// Replaces the generated block, re-checking the invariants.
    pub fn with_generated(&self, generated: OutputBlock, tol: &Tolerances) -> Result<Self> {
        Self::new(
            self.mean_x.clone(),
            self.c_xx.clone(),
            self.truth.clone(),
            generated,
            self.n_samples,
            tol,
        )
    }
}

/// Conditional mean at a point and the (x-independent) conditional covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct CondMoments {
    pub mean_given_x: DVector<f64>,
    pub cov_given_x: SymMatrix,
}

fn check_x(mean_x: &DVector<f64>, c_xx: &SymMatrix, block: &OutputBlock) -> Result<()> {
    if mean_x.len() != c_xx.dim() || block.cross.cols() != c_xx.dim() {
        return Err(Error::DimensionMismatch(format!(
            "x dims: mean {} / c_xx {} / cross cols {}",
            mean_x.len(),
            c_xx.dim(),
            block.cross.cols()
        )));
    }
    if mean_x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite x mean".into()));
    }
    Ok(())
}

fn concat(a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(a.len() + b.len(), a.iter().chain(b.iter()).copied())
}

fn check_table(table: &DMatrix<f64>, name: &'static str) -> Result<()> {
    if table.ncols() == 0 {
        return Err(Error::DimensionMismatch(format!("{name} has no columns")));
    }
    for i in 0..table.nrows() {
        if table.row(i).iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteData { table: name, row: i });
        }
    }
    Ok(())
}

fn centered(table: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let mean: DVector<f64> = table.row_mean().transpose();
    let mut c = table.clone();
    for mut row in c.row_iter_mut() {
        row -= mean.transpose();
    }
    (mean, c)
}

fn cross_cov(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    (a.transpose() * b) / a.nrows() as f64
}

fn output_block(x_c: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<OutputBlock> {
    let (mean, y_c) = centered(y);
    OutputBlock::new(
        mean,
        RectMatrix::new(cross_cov(&y_c, x_c))?,
        sym_from_product(cross_cov(&y_c, &y_c)),
    )
}

fn check_pair(x: &DMatrix<f64>, other: &DMatrix<f64>) -> Result<()> {
    if x.nrows() != other.nrows() {
        return Err(Error::Pairing {
            left: x.nrows(),
            right: other.nrows(),
        });
    }
    if x.nrows() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: x.nrows(),
        });
    }
    Ok(())
}

/// Sample moments of paired rows `(x_i, y_i)` (tables are `n × d`).
pub fn estimate_joint(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<JointStats> {
    check_pair(x, y)?;
    check_table(x, "x")?;
    check_table(y, "y")?;
    let (mean_x, x_c) = centered(x);
    Ok(JointStats {
        mean_x,
        c_xx: sym_from_product(cross_cov(&x_c, &x_c)),
        output: output_block(&x_c, y)?,
        n_samples: x.nrows(),
    })
}

/// Sample moments of `(x_i, y_i, ŷ_i)` triplets with one shared set of `x` moments.
pub fn estimate_cond_pair(
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    yhat: &DMatrix<f64>,
) -> Result<CondPairStats> {
    check_pair(x, y)?;
    check_pair(x, yhat)?;
    check_table(x, "x")?;
    check_table(y, "y")?;
    check_table(yhat, "yhat")?;
    if y.ncols() != yhat.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "y has {} columns, yhat has {}",
            y.ncols(),
            yhat.ncols()
        )));
    }
    let (mean_x, x_c) = centered(x);
    Ok(CondPairStats {
        mean_x,
        c_xx: sym_from_product(cross_cov(&x_c, &x_c)),
        truth: output_block(&x_c, y)?,
        generated: output_block(&x_c, yhat)?,
        n_samples: x.nrows(),
    })
}

/// `C_yx · C_xx⁺`, the regression of the output on the input.
pub(crate) fn regression(block: &OutputBlock, c_xx_pinv: &SymMatrix) -> DMatrix<f64> {
    block.cross.as_matrix() * c_xx_pinv.as_matrix()
}

/// `C_yy − C_yx C_xx⁺ C_xy`.
pub(crate) fn conditional_cov(block: &OutputBlock, c_xx_pinv: &SymMatrix) -> SymMatrix {
    let explained = regression(block, c_xx_pinv) * block.cross.as_matrix().transpose();
    sym_from_product(block.cov.as_matrix() - explained)
}

pub fn conditional_moments(js: &JointStats, x: &[f64], tol: &Tolerances) -> Result<CondMoments> {
    if x.len() != js.dim_x() {
        return Err(Error::DimensionMismatch(format!(
            "conditioning point has dim {}, expected {}",
            x.len(),
            js.dim_x()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite conditioning point".into()));
    }
    let pinv = pinv_psd(&js.c_xx, tol.pinv_eps)?;
    let dx = DVector::from_column_slice(x) - &js.mean_x;
    let mean_given_x = &js.output.mean + regression(&js.output, &pinv) * dx;
    Ok(CondMoments {
        mean_given_x,
        cov_given_x: conditional_cov(&js.output, &pinv),
    })
}

/// Statistics of `(αx, y, ŷ)` given those of `(x, y, ŷ)`.
pub fn scale_x(ps: &CondPairStats, alpha: f64) -> Result<CondPairStats> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    let scale_block = |b: &OutputBlock| OutputBlock {
        mean: b.mean.clone(),
        cross: b.cross.scaled(alpha),
        cov: b.cov.clone(),
    };
    Ok(CondPairStats {
        mean_x: &ps.mean_x * alpha,
        c_xx: ps.c_xx.scaled(alpha * alpha),
        truth: scale_block(&ps.truth),
        generated: scale_block(&ps.generated),
        n_samples: ps.n_samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::random_pair_stats;
    use crate::linalg::sym_eig;
    use approx::assert_abs_diff_eq;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn col(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_column_slice(v.len(), 1, v)
    }

    #[test]
    fn identical_rows_give_zero_covariance() {
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 1.0, 2.0]);
        let y = col(&[5.0, 5.0]);
        let js = estimate_joint(&x, &y).unwrap();
        assert_eq!(js.mean_x().as_slice(), &[1.0, 2.0]);
        assert_eq!(js.mean_y().as_slice(), &[5.0]);
        assert_eq!(js.c_xx().max_abs(), 0.0);
        assert_eq!(js.c_yx().as_matrix().amax(), 0.0);
        assert_eq!(js.c_yy().max_abs(), 0.0);
    }

    #[test]
    fn hand_computed_scalar_moments() {
        let js = estimate_joint(&col(&[0.0, 2.0]), &col(&[0.0, 4.0])).unwrap();
        assert_eq!(js.mean_x()[0], 1.0);
        assert_eq!(js.mean_y()[0], 2.0);
        assert_eq!(js.c_xx().get(0, 0), 1.0);
        assert_eq!(js.c_yx().get(0, 0), 2.0);
        assert_eq!(js.c_yy().get(0, 0), 4.0);
    }

    #[test]
    fn monte_carlo_cross_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let rho: f64 = 0.5;
        let n = 100_000;
        let mut x = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            x.push(a);
            y.push(rho * a + (1.0 - rho * rho).sqrt() * b);
        }
        let js = estimate_joint(&col(&x), &col(&y)).unwrap();
        assert!((js.c_yx().get(0, 0) - rho).abs() < 0.02);
    }

    #[test]
    fn estimation_errors() {
        assert!(matches!(
            estimate_joint(&col(&[1.0]), &col(&[1.0])),
            Err(Error::InsufficientData { got: 1, .. })
        ));
        assert!(matches!(
            estimate_joint(&col(&[1.0, 2.0, 3.0]), &col(&[1.0, 2.0])),
            Err(Error::Pairing { left: 3, right: 2 })
        ));
        assert!(matches!(
            estimate_joint(&col(&[1.0, 2.0, 3.0]), &col(&[1.0, f64::INFINITY, 2.0])),
            Err(Error::NonFiniteData { table: "y", row: 1 })
        ));
        assert!(matches!(
            estimate_cond_pair(&col(&[1.0, 2.0]), &col(&[1.0, 2.0]), &col(&[1.0])),
            Err(Error::Pairing { .. })
        ));
    }

    #[test]
    fn perfect_generator_has_identical_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = DMatrix::from_fn(50, 3, |_, _| rng.random_range(-1.0..1.0));
        let y = DMatrix::from_fn(50, 2, |_, _| rng.random_range(-1.0..1.0));
        let ps = estimate_cond_pair(&x, &y, &y).unwrap();
        assert_eq!(ps.truth(), ps.generated());
    }

    #[test]
    fn shuffled_pairing_keeps_output_covariance_but_changes_cross() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 200;
        let x = DMatrix::from_fn(n, 2, |_, _| rng.random_range(-1.0..1.0));
        let noise = DMatrix::from_fn(n, 2, |_, _| rng.random_range(-0.1..0.1));
        let y = &x + noise;
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let yhat = DMatrix::from_fn(n, 2, |i, j| y[(perm[i], j)]);
        let ps = estimate_cond_pair(&x, &y, &yhat).unwrap();
        let dcov = (ps.truth().cov.as_matrix() - ps.generated().cov.as_matrix()).amax();
        assert!(dcov < 1e-12 * n as f64);
        let dcross = (ps.truth().cross.as_matrix() - ps.generated().cross.as_matrix()).amax();
        assert!(dcross > 0.1);
    }

    #[test]
    fn constant_x_column_gives_zero_x_blocks() {
        let x = col(&[3.0, 3.0, 3.0, 3.0]);
        let y = col(&[1.0, 2.0, 3.0, 5.0]);
        let yhat = col(&[0.0, 1.0, 0.0, 1.0]);
        let ps = estimate_cond_pair(&x, &y, &yhat).unwrap();
        assert_eq!(ps.c_xx().get(0, 0), 0.0);
        assert_eq!(ps.truth().cross.get(0, 0), 0.0);
        assert_eq!(ps.generated().cross.get(0, 0), 0.0);
    }

    #[test]
    fn row_order_does_not_matter() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 300;
        let x = DMatrix::from_fn(n, 3, |_, _| rng.random_range(-2.0..2.0));
        let y = DMatrix::from_fn(n, 2, |_, _| rng.random_range(-2.0..2.0));
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let xp = DMatrix::from_fn(n, 3, |i, j| x[(perm[i], j)]);
        let yp = DMatrix::from_fn(n, 2, |i, j| y[(perm[i], j)]);
        let a = estimate_joint(&x, &y).unwrap();
        let b = estimate_joint(&xp, &yp).unwrap();
        let tol = 1e-12 * n as f64;
        assert!((a.joint_cov().as_matrix() - b.joint_cov().as_matrix()).amax() < tol);
        assert!((a.joint_mean() - b.joint_mean()).amax() < tol);
    }

    fn scalar_joint(rho: f64) -> JointStats {
        let block = OutputBlock::new(
            DVector::from_element(1, 0.0),
            RectMatrix::from_rows(&[vec![rho]]).unwrap(),
            SymMatrix::scalar(1.0).unwrap(),
        )
        .unwrap();
        JointStats::new(
            DVector::from_element(1, 0.0),
            SymMatrix::scalar(1.0).unwrap(),
            block,
            0,
            &Tolerances::default(),
        )
        .unwrap()
    }

    #[test]
    fn conditional_moments_examples() {
        let tol = Tolerances::default();
        let js = scalar_joint(0.0);
        let cm = conditional_moments(&js, &[2.5], &tol).unwrap();
        assert_eq!(cm.mean_given_x[0], 0.0);
        assert_eq!(cm.cov_given_x.get(0, 0), 1.0);

        let rho = 0.6;
        let cm = conditional_moments(&scalar_joint(rho), &[1.0], &tol).unwrap();
        assert_abs_diff_eq!(cm.mean_given_x[0], rho, epsilon = 1e-14);
        assert_abs_diff_eq!(cm.cov_given_x.get(0, 0), 1.0 - rho * rho, epsilon = 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let ps = random_pair_stats(&mut rng, 3, 2);
        let js = ps.joint_truth();
        let cm = conditional_moments(&js, js.mean_x().as_slice(), &tol).unwrap();
        assert_abs_diff_eq!(cm.mean_given_x, js.mean_y().clone(), epsilon = 1e-12);

        assert!(conditional_moments(&js, &[0.0], &tol).is_err());
    }

    #[test]
    fn conditional_covariance_is_psd_and_bounded() {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for case in 0..1000 {
            let dx = 1 + case % 5;
            let dy = 1 + (case / 5) % 4;
            let ps = random_pair_stats(&mut rng, dx, dy);
            for js in [ps.joint_truth(), ps.joint_generated()] {
                let cm = conditional_moments(&js, js.mean_x().as_slice(), &tol).unwrap();
                let e = sym_eig(&cm.cov_given_x).unwrap();
                assert!(
                    e.min_eigenvalue() >= -tol.clamp_tol * e.max_eigenvalue().max(1.0),
                    "case {case}"
                );
                assert!(cm.cov_given_x.trace() <= js.c_yy().trace() + 1e-10);
            }
        }
    }

    #[test]
    fn scale_x_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let ps = random_pair_stats(&mut rng, 2, 2);
        assert_eq!(scale_x(&ps, 1.0).unwrap(), ps);
        assert!(matches!(scale_x(&ps, 0.0), Err(Error::Domain(_))));
        assert!(scale_x(&ps, -0.5).is_err());
        assert!(scale_x(&ps, 1.5).is_err());

        let rho = 0.4;
        let tol = Tolerances::default();
        let js = scalar_joint(rho);
        let ps = CondPairStats::new(
            js.mean_x().clone(),
            js.c_xx().clone(),
            js.output().clone(),
            js.output().clone(),
            0,
            &tol,
        )
        .unwrap();
        let scaled = scale_x(&ps, 0.5).unwrap();
        assert_eq!(scaled.c_xx().get(0, 0), 0.25);
        assert_eq!(scaled.truth().cross.get(0, 0), 0.5 * rho);
        assert_eq!(scaled.truth().cov.get(0, 0), 1.0);
    }

    #[test]
    fn scaling_preserves_conditional_moments() {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let ps = random_pair_stats(&mut rng, 3, 2);
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            for alpha in [0.01, 0.1, 0.5, 1.0] {
                let scaled = scale_x(&ps, alpha).unwrap();
                let ax: Vec<f64> = x.iter().map(|v| v * alpha).collect();
                let a = conditional_moments(&ps.joint_truth(), &x, &tol).unwrap();
                let b = conditional_moments(&scaled.joint_truth(), &ax, &tol).unwrap();
                assert!((a.mean_given_x - b.mean_given_x).amax() < 1e-9);
                let explained = |s: &CondPairStats| {
                    let p = pinv_psd(s.c_xx(), tol.pinv_eps).unwrap();
                    regression(s.truth(), &p) * s.truth().cross.as_matrix().transpose()
                };
                assert!((explained(&ps) - explained(&scaled)).amax() < 1e-10);
            }
        }
    }
}
