//! Least-squares and small dense-matrix helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Relative pivot threshold below which a design matrix is declared rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Multi-response least-squares fit `Y ≈ X·B`.
#[derive(Clone, Debug)]
pub struct LeastSquares {
    /// `k × m` coefficients, one column per response.
    pub coefficients: DMatrix<f64>,
    /// `n × m` residuals.
    pub residuals: DMatrix<f64>,
    /// `(XᵀX)⁻¹`, used for standard errors.
    pub xtx_inv: DMatrix<f64>,
}

impl LeastSquares {
    pub fn nobs(&self) -> usize {
        self.residuals.nrows()
    }

    pub fn nregressors(&self) -> usize {
        self.coefficients.nrows()
    }

    /// Residual sum of squares of response `j`.
    pub fn ssr(&self, j: usize) -> f64 {
        self.residuals.column(j).norm_squared()
    }

    /// Residual cross-product matrix `EᵀE`.
    pub fn cross_products(&self) -> DMatrix<f64> {
        self.residuals.transpose() * &self.residuals
    }
}

/// Ordinary least squares via column-pivoted QR.
///
/// Columns are scaled to unit norm first; fails with `RankDeficient` when
/// some pivot of the scaled `R` is at or below `RANK_TOLERANCE` times the
/// largest one.
pub fn least_squares(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<LeastSquares> {
    let (n, k) = x.shape();
    if y.nrows() != n {
        return Err(Error::ShapeMismatch(format!("design has {n} rows, response has {}", y.nrows())));
    }
    if n < k {
        return Err(Error::InsufficientRows { needed: k, got: n });
    }
    if k == 0 {
        return Ok(LeastSquares {
            coefficients: DMatrix::zeros(0, y.ncols()),
            residuals: y.clone(),
            xtx_inv: DMatrix::zeros(0, 0),
        });
    }
    if x.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite value in regression data".into()));
    }
    // Unit-norm columns make the pivot test independent of units.
    let scale: Vec<f64> = x.column_iter().map(|c| c.norm()).collect();
    if scale.contains(&0.0) {
        return Err(Error::RankDeficient);
    }
    let xs = DMatrix::from_fn(n, k, |i, j| x[(i, j)] / scale[j]);
    let qr = xs.clone().col_piv_qr();
    let r = qr.r();
    let largest = r.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if largest == 0.0 || r.diagonal().iter().any(|v| v.abs() <= RANK_TOLERANCE * largest) {
        return Err(Error::RankDeficient);
    }
    // X·P = Q·R, so B = P·R⁻¹·Qᵀ·Y, then undo the column scaling.
    let mut coefficients = r.solve_upper_triangular(&qr.q().tr_mul(y)).ok_or(Error::RankDeficient)?;
    qr.p().inv_permute_rows(&mut coefficients);
    for (j, s) in scale.iter().enumerate() {
        coefficients.row_mut(j).unscale_mut(*s);
    }
    let residuals = y - x * &coefficients;
    let xs_inv = (xs.transpose() * &xs)
        .cholesky()
        .ok_or(Error::RankDeficient)?
        .inverse();
    let xtx_inv = DMatrix::from_fn(k, k, |i, j| xs_inv[(i, j)] / (scale[i] * scale[j]));
    Ok(LeastSquares { coefficients, residuals, xtx_inv })
}

/// Single-response convenience wrapper.
pub fn least_squares_vec(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<LeastSquares> {
    least_squares(x, &DMatrix::from_column_slice(y.len(), 1, y.as_slice()))
}

/// Lower-triangular `P` with `P·Pᵀ = sigma`.
pub fn cholesky_lower(sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    sigma
        .clone()
        .cholesky()
        .map(|c| c.l())
        .ok_or(Error::NonPositiveDefiniteSigma)
}

/// `ln det` of a symmetric positive-definite matrix.
pub fn log_det_spd(m: &DMatrix<f64>) -> Result<f64> {
    let l = cholesky_lower(m)?;
    Ok(2.0 * l.diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

/// Column-wise mean of a matrix.
pub fn column_means(m: &DMatrix<f64>) -> DVector<f64> {
    let n = m.nrows() as f64;
    DVector::from_iterator(m.ncols(), m.column_iter().map(|c| c.sum() / n))
}
