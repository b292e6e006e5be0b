//! Dense symmetric linear algebra used by every Frechet formula.
//!
//! Square roots and pseudo-inverses go through a symmetric
//! eigendecomposition. Eigenvalues that are slightly negative because of
//! rounding are clamped to zero; anything below
//! `-clamp_tol * max(1, λ_max)` is reported as [`Error::NotPsd`].

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_CLAMP_TOL: f64 = 1e-10;
pub const DEFAULT_PINV_EPS: f64 = 1e-10;

/// Numerical thresholds shared by the metric computations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative floor below which a negative eigenvalue is an error.
    pub clamp_tol: f64,
    /// Relative cut-off for eigenvalues inverted by [`pinv_psd`].
    pub pinv_eps: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            clamp_tol: DEFAULT_CLAMP_TOL,
            pinv_eps: DEFAULT_PINV_EPS,
        }
    }
}

/// Dense symmetric matrix. Symmetrized as `(M + Mᵀ)/2` on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "symmetric matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 {
            return Err(Error::DimensionMismatch("empty matrix".into()));
        }
        check_finite(&m)?;
        Ok(Self(symmetrize(m)))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(dmatrix_from_rows(rows)?)
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn scalar(value: f64) -> Result<Self> {
        Self::new(DMatrix::from_element(1, 1, value))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(&self.0 * factor)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.amax()
    }

    fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }
}

/// Dense rectangular matrix, used for cross-covariance blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct RectMatrix(DMatrix<f64>);

impl RectMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::DimensionMismatch("empty matrix".into()));
        }
        check_finite(&m)?;
        Ok(Self(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(dmatrix_from_rows(rows)?)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(&self.0 * factor)
    }
}

/// Eigenvalues sorted descending with matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigDecomp {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl EigDecomp {
    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// `V · diag(f(λ)) · Vᵀ`, symmetrized.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let mapped = self.eigenvalues.map(f);
        let v = &self.eigenvectors;
        let scaled_cols = v * DMatrix::from_diagonal(&mapped);
        SymMatrix(symmetrize(scaled_cols * v.transpose()))
    }

    /// Eigenvalues at or below this are indistinguishable from zero.
    fn resolution(&self) -> f64 {
        self.eigenvalues.len() as f64 * f64::EPSILON * self.max_eigenvalue().max(0.0)
    }

    fn root_of(&self, l: f64) -> f64 {
        if l <= self.resolution() {
            0.0
        } else {
            l.sqrt()
        }
    }

    fn check_psd(&self, clamp_tol: f64) -> Result<()> {
        let threshold = clamp_tol * self.max_eigenvalue().max(1.0);
        let min = self.min_eigenvalue();
        if min < -threshold {
            return Err(Error::NotPsd {
                eigenvalue: min,
                threshold,
            });
        }
        Ok(())
    }
}

fn iteration_cap(dim: usize) -> usize {
    1000 + 100 * dim
}

pub fn sym_eig(m: &SymMatrix) -> Result<EigDecomp> {
    let dim = m.dim();
    let eig = SymmetricEigen::try_new(m.0.clone(), f64::EPSILON, iteration_cap(dim)).ok_or_else(
        || Error::NumericalFailure {
            dim,
            what: "symmetric eigendecomposition did not converge".into(),
        },
    )?;
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure {
            dim,
            what: "non-finite eigenvalue".into(),
        });
    }

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues = DVector::from_iterator(dim, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut eigenvectors = DMatrix::zeros(dim, dim);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(EigDecomp {
        eigenvalues,
        eigenvectors,
    })
}

/// Principal square root of a PSD matrix.
pub fn sqrt_psd(m: &SymMatrix, clamp_tol: f64) -> Result<SymMatrix> {
    if m.is_zero() {
        return Ok(SymMatrix::zeros(m.dim()));
    }
    let eig = sym_eig(m)?;
    eig.check_psd(clamp_tol)?;
    Ok(eig.map_eigenvalues(|l| eig.root_of(l)))
}

/// Eigenvalue-based PSD check without building anything.
pub fn check_psd(m: &SymMatrix, clamp_tol: f64) -> Result<()> {
    if m.is_zero() {
        return Ok(());
    }
    sym_eig(m)?.check_psd(clamp_tol)
}

/// `Tr((A^{1/2} B A^{1/2})^{1/2})` for PSD `A`, `B`.
pub fn trace_sqrt_product(a: &SymMatrix, b: &SymMatrix, clamp_tol: f64) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "trace_sqrt_product on {}x{} and {}x{}",
            a.dim(),
            a.dim(),
            b.dim(),
            b.dim()
        )));
    }
    check_psd(b, clamp_tol)?;
    if a.is_zero() || b.is_zero() {
        return Ok(0.0);
    }
    let root_a = sqrt_psd(a, clamp_tol)?;
    let inner = SymMatrix(symmetrize(&root_a.0 * &b.0 * &root_a.0));
    let eig = sym_eig(&inner)?;
    eig.check_psd(clamp_tol)?;
    Ok(eig.eigenvalues.iter().map(|&l| eig.root_of(l)).sum())
}

/// Pseudo-inverse of a PSD matrix: eigenvalues above `eps * λ_max` are
/// inverted, the rest are zeroed.
pub fn pinv_psd(m: &SymMatrix, eps: f64) -> Result<SymMatrix> {
    if m.is_zero() {
        return Ok(SymMatrix::zeros(m.dim()));
    }
    let eig = sym_eig(m)?;
    let lmax = eig.max_eigenvalue();
    if lmax <= 0.0 {
        return Ok(SymMatrix::zeros(m.dim()));
    }
    let cutoff = eps * lmax;
    Ok(eig.map_eigenvalues(|l| if l > cutoff { 1.0 / l } else { 0.0 }))
}

/// Builds `[[top_left, top_rightᵀ... ]]` style symmetric block matrices:
/// `[[a, cᵀ], [c, b]]` with `c` of shape `b.dim() × a.dim()`.
pub fn block_sym(a: &SymMatrix, c: &RectMatrix, b: &SymMatrix) -> Result<SymMatrix> {
    let (da, db) = (a.dim(), b.dim());
    if c.rows() != db || c.cols() != da {
        return Err(Error::DimensionMismatch(format!(
            "off-diagonal block is {}x{}, expected {}x{}",
            c.rows(),
            c.cols(),
            db,
            da
        )));
    }
    let mut full = DMatrix::zeros(da + db, da + db);
    full.view_mut((0, 0), (da, da)).copy_from(&a.0);
    full.view_mut((da, da), (db, db)).copy_from(&b.0);
    full.view_mut((da, 0), (db, da)).copy_from(&c.0);
    full.view_mut((0, da), (da, db)).copy_from(&c.0.transpose());
    Ok(SymMatrix(full))
}

pub(crate) fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}

/// Wraps a product known to be symmetric up to rounding.
pub(crate) fn sym_from_product(m: DMatrix<f64>) -> SymMatrix {
    SymMatrix(symmetrize(m))
}

fn check_finite(m: &DMatrix<f64>) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if !m[(i, j)].is_finite() {
                return Err(Error::NonFiniteEntry { row: i, col: j });
            }
        }
    }
    Ok(())
}

fn dmatrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::DimensionMismatch("ragged rows".into()));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}
