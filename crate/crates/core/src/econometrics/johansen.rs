use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::linalg::least_squares;
use crate::{Error, Result};

/// 95% trace critical values, unrestricted constant (Osterwald-Lenum 1992,
/// Table 1), indexed by `K − r − 1` for `K − r = 1..=11`.
pub const TRACE_CRITICAL_95: [f64; 11] =
    [3.76, 15.41, 29.68, 47.21, 68.52, 94.15, 124.24, 156.00, 192.89, 233.13, 277.71];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JohansenRank {
    /// Null hypothesis: rank ≤ r.
    pub r: usize,
    pub trace_stat: f64,
    pub critical_value_95: f64,
    pub reject_5pct: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JohansenResult {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    pub ranks: Vec<JohansenRank>,
    /// First `r` whose null is not rejected (K if all are).
    pub rank_5pct: usize,
    pub nobs: usize,
    pub k_ar_diff: usize,
}

/// Johansen trace test on the columns of `y` (`T × K`, levels).
///
/// `Δy_t` and `y_{t−1}` are both residualized on a constant and
/// `Δy_{t−1..t−k_ar_diff}`; the eigenvalues solve
/// `|λ·S11 − S10·S00⁻¹·S01| = 0`, computed through the Cholesky factor of
/// `S11` so the problem stays symmetric.
pub fn johansen_trace(y: &DMatrix<f64>, k_ar_diff: usize) -> Result<JohansenResult> {
    let (t, k) = y.shape();
    if k < 2 {
        return Err(Error::InvalidArgument(format!("Johansen test needs at least 2 series, got {k}")));
    }
    if k > TRACE_CRITICAL_95.len() {
        return Err(Error::CriticalValuesUnavailable(k));
    }
    if t < 10 * k || t < k_ar_diff + 2 + k {
        return Err(Error::InsufficientObservations { needed: (10 * k).max(k_ar_diff + 2 + k), got: t });
    }
    let first = k_ar_diff + 1;
    let n = t - first;
    let dy = |row: usize, col: usize| y[(row, col)] - y[(row - 1, col)];
    let z = DMatrix::from_fn(n, 1 + k * k_ar_diff, |r, c| {
        if c == 0 {
            1.0
        } else {
            let (lag, col) = ((c - 1) / k + 1, (c - 1) % k);
            dy(first + r - lag, col)
        }
    });
    let d0 = DMatrix::from_fn(n, k, |r, c| dy(first + r, c));
    let d1 = DMatrix::from_fn(n, k, |r, c| y[(first + r - 1, c)]);
    let r0 = least_squares(&z, &d0).map_err(|_| Error::SingularMomentMatrix)?.residuals;
    let r1 = least_squares(&z, &d1).map_err(|_| Error::SingularMomentMatrix)?.residuals;
    let nf = n as f64;
    let s00 = r0.transpose() * &r0 / nf;
    let s11 = r1.transpose() * &r1 / nf;
    let s01 = r0.transpose() * &r1 / nf;

    let l11 = s11.cholesky().ok_or(Error::SingularMomentMatrix)?.l();
    let l11_inv = l11.try_inverse().ok_or(Error::SingularMomentMatrix)?;
    let s00_inv = s00.cholesky().ok_or(Error::SingularMomentMatrix)?.inverse();
    let m = &l11_inv * s01.transpose() * s00_inv * &s01 * l11_inv.transpose();
    let m = (&m + m.transpose()) * 0.5;
    let mut eigenvalues: Vec<f64> =
        SymmetricEigen::new(m).eigenvalues.iter().map(|v| v.clamp(0.0, 1.0 - 1e-15)).collect();
    eigenvalues.sort_by(|a, b| b.total_cmp(a));

    let ranks: Vec<JohansenRank> = (0..k)
        .map(|r| {
            let trace_stat = -nf * eigenvalues[r..].iter().map(|l| (1.0 - l).ln()).sum::<f64>();
            let critical_value_95 = TRACE_CRITICAL_95[k - r - 1];
            JohansenRank { r, trace_stat, critical_value_95, reject_5pct: trace_stat > critical_value_95 }
        })
        .collect();
    let rank_5pct = ranks.iter().position(|r| !r.reject_5pct).unwrap_or(k);
    Ok(JohansenResult { eigenvalues, ranks, rank_5pct, nobs: n, k_ar_diff })
}
