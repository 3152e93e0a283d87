use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::distributions::normal_cdf;
use crate::linalg::least_squares_vec;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StationarityDecision {
    Stationary,
    Nonstationary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdfResult {
    pub t_stat: f64,
    pub lags_used: usize,
    pub nobs: usize,
    pub critical_value_5pct: f64,
    pub decision_5pct: StationarityDecision,
    pub approx_pvalue: f64,
}

// MacKinnon (2010) response surface for the 5% critical value, constant-only
// regression with one variable: τ(n) = c0 + c1/n + c2/n² + c3/n³.
const TAU_C_5PCT: [f64; 4] = [-2.86154, -2.8903, -4.234, -40.040];

// MacKinnon (1994) approximate p-value polynomials, constant-only, one variable.
// Same constants as statsmodels.tsa.adfvalues.
const TAU_MAX_C: f64 = 2.74;
const TAU_MIN_C: f64 = -18.83;
const TAU_STAR_C: f64 = -1.61;
const TAU_C_SMALLP: [f64; 3] = [2.1659, 1.4412, 3.8269e-2];
const TAU_C_LARGEP: [f64; 4] = [1.7339, 9.3202e-1, -1.2745e-1, -1.0368e-2];

pub fn adf_critical_value_5pct(nobs: usize) -> f64 {
    let n = nobs as f64;
    TAU_C_5PCT[0] + TAU_C_5PCT[1] / n + TAU_C_5PCT[2] / (n * n) + TAU_C_5PCT[3] / (n * n * n)
}

pub fn adf_pvalue(t_stat: f64) -> f64 {
    if t_stat > TAU_MAX_C {
        return 1.0;
    }
    if t_stat < TAU_MIN_C {
        return 0.0;
    }
    let poly: &[f64] = if t_stat <= TAU_STAR_C { &TAU_C_SMALLP } else { &TAU_C_LARGEP };
    let z = poly.iter().rev().fold(0.0, |acc, c| acc * t_stat + c);
    normal_cdf(z)
}

/// Regression `Δy_t = α + β·y_{t−1} + Σ_{i=1..k} φ_i·Δy_{t−i}` over the rows
/// `first..` of the differenced series. Returns `(t on β, SSR, nobs)`.
fn adf_regression(y: &[f64], dy: &[f64], k: usize, first: usize) -> Result<(f64, f64, usize)> {
    let n = dy.len() - first;
    let ncols = 2 + k;
    let x = DMatrix::from_fn(n, ncols, |r, c| {
        let j = first + r;
        match c {
            0 => 1.0,
            1 => y[j],
            c => dy[j - (c - 1)],
        }
    });
    let rhs = DVector::from_fn(n, |r, _| dy[first + r]);
    let fit = least_squares_vec(&x, &rhs)?;
    let ssr = fit.ssr(0);
    let dof = n as f64 - ncols as f64;
    let s2 = ssr / dof;
    let se = (s2 * fit.xtx_inv[(1, 1)]).sqrt();
    Ok((fit.coefficients[(1, 0)] / se, ssr, n))
}

/// Augmented Dickey-Fuller test with a constant and no trend.
///
/// The augmentation order is chosen by AIC over `0..=max_lags` on a common
/// sample, then the chosen regression is refit on every usable row. The
/// default `max_lags` is `⌊12·(T/100)^{1/4}⌋`, capped so the regression keeps
/// enough degrees of freedom.
pub fn adf_test(series: &[f64], max_lags: Option<usize>) -> Result<AdfResult> {
    let t = series.len();
    if t < 15 {
        return Err(Error::SeriesTooShort { needed: 14, got: t });
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("ADF input contains non-finite values".into()));
    }
    let dy: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();
    let default = (12.0 * (t as f64 / 100.0).powf(0.25)).floor() as usize;
    let cap = (dy.len() / 2).saturating_sub(3);
    let max_lags = max_lags.unwrap_or(default).min(cap);

    let best = (0..=max_lags)
        .map(|k| {
            let (_, ssr, n) = adf_regression(series, &dy, k, max_lags)?;
            let n = n as f64;
            Ok((k, n * (ssr / n).ln() + 2.0 * (k + 2) as f64))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(k, _)| k)
        .unwrap_or(0);

    let (t_stat, _, nobs) = adf_regression(series, &dy, best, best)?;
    let critical_value_5pct = adf_critical_value_5pct(nobs);
    let decision_5pct = if t_stat < critical_value_5pct {
        StationarityDecision::Stationary
    } else {
        StationarityDecision::Nonstationary
    };
    Ok(AdfResult {
        t_stat,
        lags_used: best,
        nobs,
        critical_value_5pct,
        decision_5pct,
        approx_pvalue: adf_pvalue(t_stat),
    })
}
