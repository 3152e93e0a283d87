//! The "colimit" aggregate: a devaluation-expectation index built from a PCA
//! aggregate and correlation-based dynamic weights, rescaled onto the range of
//! `E`, smoothed, then checked against `E` with Granger tests and a VAR.

use chrono::NaiveDate;
use indexmap::IndexMap;
use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::econometrics::{fit_var, forecast, granger, Criterion, GrangerResult};
use crate::linalg::column_means;
use crate::panel::{ids, Panel, Series, VariableId};
use crate::{Error, Result};

pub const DEFAULT_VARIABLES: [&str; 8] = [
    "M2",
    "Pi Exp",
    "Long Interest",
    "Short Interest",
    "Historical Ars Usd",
    "Argentina Net Lending Borrowing",
    "Gdp_argentina",
    "Gdp_usa",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub variables: Vec<VariableId>,
    /// `K × n`, orthonormal columns.
    pub loadings: DMatrix<f64>,
    pub explained_variance: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
    pub column_means: Vec<f64>,
    /// Sample standard deviations, or 1s when standardization is off.
    pub column_scales: Vec<f64>,
}

/// Principal components of the columns of `x` (`T × K`).
///
/// Columns are centered (and scaled to unit sample variance when
/// `standardize` is set); the sample covariance is eigen-decomposed and the
/// top `n` eigenvectors kept. Each loading column is signed so that its
/// largest-magnitude entry is positive.
pub fn pca_fit(x: &DMatrix<f64>, names: &[VariableId], n: usize, standardize: bool) -> Result<PcaModel> {
    let (t, k) = x.shape();
    if names.len() != k {
        return Err(Error::ShapeMismatch(format!("{} names for {k} columns", names.len())));
    }
    if n == 0 || n > k {
        return Err(Error::InvalidArgument(format!("{n} components requested from {k} variables")));
    }
    if t <= k {
        return Err(Error::InsufficientRows { needed: k + 1, got: t });
    }
    let means = column_means(x);
    let scales: Vec<f64> = (0..k)
        .map(|j| {
            if !standardize {
                return Ok(1.0);
            }
            let ss: f64 = x.column(j).iter().map(|v| (v - means[j]).powi(2)).sum();
            let sd = (ss / (t - 1) as f64).sqrt();
            if sd > 0.0 && sd.is_finite() {
                Ok(sd)
            } else {
                Err(Error::ConstantColumn(names[j].to_string()))
            }
        })
        .collect::<Result<_>>()?;
    let z = DMatrix::from_fn(t, k, |r, c| (x[(r, c)] - means[c]) / scales[c]);
    let cov = z.transpose() * &z / (t - 1) as f64;
    let eig = SymmetricEigen::new((&cov + cov.transpose()) * 0.5);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let total: f64 = values.iter().sum();
    let mut loadings = DMatrix::zeros(k, n);
    for (c, &i) in order.iter().take(n).enumerate() {
        let v = eig.eigenvectors.column(i);
        let pivot = v.iter().copied().fold(0.0f64, |m, e| if e.abs() > m.abs() { e } else { m });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        loadings.set_column(c, &(v * sign));
    }
    Ok(PcaModel {
        variables: names.to_vec(),
        loadings,
        explained_variance: values[..n].to_vec(),
        explained_variance_ratio: values[..n].iter().map(|v| if total > 0.0 { v / total } else { 0.0 }).collect(),
        column_means: means.iter().copied().collect(),
        column_scales: scales,
    })
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.loadings.ncols()
    }

    /// `T × n` component scores.
    pub fn transform(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let k = self.variables.len();
        if x.ncols() != k {
            return Err(Error::ShapeMismatch(format!("PCA fitted on {k} columns, got {}", x.ncols())));
        }
        let z = DMatrix::from_fn(x.nrows(), k, |r, c| (x[(r, c)] - self.column_means[c]) / self.column_scales[c]);
        Ok(z * &self.loadings)
    }
}

/// Per date, `Σ_j score_j(t)·evr_j`.
pub fn pca_aggregate(model: &PcaModel, x: &DMatrix<f64>) -> Result<Vec<f64>> {
    let scores = model.transform(x)?;
    Ok(scores
        .row_iter()
        .map(|r| r.iter().zip(&model.explained_variance_ratio).map(|(s, w)| s * w).sum())
        .collect())
}

/// Time-mean of each variable's trailing-window correlation with
/// `reference`, in absolute value, normalized to sum to one. A variable whose
/// correlation is never defined counts as zero.
pub fn dynamic_weights(
    panel: &Panel,
    variables: &[VariableId],
    reference: &str,
    window: usize,
    min_periods: usize,
) -> Result<IndexMap<VariableId, f64>> {
    let r = panel.column(reference)?;
    let raw = variables
        .iter()
        .map(|v| {
            let corr = panel.column(v.as_str())?.rolling_corr(r, window, min_periods)?;
            Ok((v.clone(), corr.mean().unwrap_or(0.0).abs()))
        })
        .collect::<Result<Vec<_>>>()?;
    let total: f64 = raw.iter().map(|(_, w)| w).sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::AllZeroWeights);
    }
    Ok(raw.into_iter().map(|(v, w)| (v, w / total)).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColimitConfig {
    pub variables: Vec<VariableId>,
    pub n_components: usize,
    pub corr_window: usize,
    pub corr_min_periods: usize,
    pub smooth_window: usize,
    pub standardize: bool,
    pub reference: VariableId,
}

impl Default for ColimitConfig {
    fn default() -> Self {
        ColimitConfig {
            variables: ids(&DEFAULT_VARIABLES),
            n_components: 3,
            corr_window: 180,
            corr_min_periods: 1,
            smooth_window: 30,
            standardize: true,
            reference: "E".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColimitIndicator {
    pub dates: Vec<NaiveDate>,
    pub pca: PcaModel,
    pub pca_aggregate: Series,
    pub dynamic_weights: IndexMap<VariableId, f64>,
    pub weighted_aggregate: Series,
    pub scaled: Series,
    pub smoothed: Series,
}

impl ColimitIndicator {
    /// `Date, pca_aggregate, weighted_aggregate, scaled, smoothed` plus any of
    /// `extra` found in `panel`, aligned on the indicator's dates.
    pub fn to_panel(&self, panel: &Panel, extra: &[&str]) -> Result<Panel> {
        let mut out = Panel::new(self.dates.clone(), IndexMap::new())?;
        for (name, s) in [
            ("pca_aggregate", &self.pca_aggregate),
            ("weighted_aggregate", &self.weighted_aggregate),
            ("scaled", &self.scaled),
            ("smoothed", &self.smoothed),
        ] {
            out.set_column(name, s.clone())?;
        }
        for name in extra.iter().filter(|n| panel.has(n)) {
            out.set_column(*name, align(panel, name, &self.dates)?)?;
        }
        Ok(out)
    }
}

/// `name` from `panel` on `dates` (missing where the panel has no such date).
fn align(panel: &Panel, name: &str, dates: &[NaiveDate]) -> Result<Series> {
    let col = panel.column(name)?;
    let index: std::collections::HashMap<NaiveDate, usize> =
        panel.dates().iter().enumerate().map(|(i, d)| (*d, i)).collect();
    Ok(dates.iter().map(|d| index.get(d).and_then(|&i| col.get(i))).collect())
}

/// PCA aggregate, dynamic-weighted aggregate, the PCA aggregate rescaled onto
/// the reference's range, and its trailing mean. Uses the rows where every
/// configured variable and the reference are present.
pub fn build_indicator(panel: &Panel, cfg: &ColimitConfig) -> Result<ColimitIndicator> {
    if cfg.n_components == 0 || cfg.n_components > cfg.variables.len() {
        return Err(Error::InvalidArgument(format!(
            "{} components requested from {} variables",
            cfg.n_components,
            cfg.variables.len()
        )));
    }
    if cfg.smooth_window == 0 {
        return Err(Error::InvalidArgument("smoothing window must be positive".into()));
    }
    let mut cols = cfg.variables.clone();
    if !cols.contains(&cfg.reference) {
        cols.push(cfg.reference.clone());
    }
    let work = panel.select(&cols)?.drop_incomplete_rows();
    let x = work.dense_matrix(&cfg.variables)?;
    let pca = pca_fit(&x, &cfg.variables, cfg.n_components, cfg.standardize)?;
    let pca_aggregate = Series::from_values(pca_aggregate(&pca, &x)?);
    let weights = dynamic_weights(&work, &cfg.variables, cfg.reference.as_str(), cfg.corr_window, cfg.corr_min_periods)?;
    let weighted = Series::from_values(
        (0..work.len())
            .map(|r| cfg.variables.iter().enumerate().map(|(j, v)| weights[v] * x[(r, j)]).sum())
            .collect(),
    );
    let scaled = pca_aggregate.minmax_rescale(work.column(cfg.reference.as_str())?)?;
    let smoothed = scaled.rolling_mean(cfg.smooth_window, 1);
    Ok(ColimitIndicator {
        dates: work.dates().to_vec(),
        pca,
        pca_aggregate,
        dynamic_weights: weights,
        weighted_aggregate: weighted,
        scaled,
        smoothed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ValidationOptions {
    pub max_lag: usize,
    pub steps: usize,
    pub reference: VariableId,
    pub external: VariableId,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions { max_lag: 5, steps: 10, reference: "E".into(), external: "Embi+ARG".into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Validation {
    /// Granger test that the smoothed indicator helps predict the reference.
    pub granger: GrangerResult,
    pub var_p: usize,
    pub columns: Vec<String>,
    /// `steps × 3`, columns in `columns` order.
    pub forecast: DMatrix<f64>,
    pub last_date: NaiveDate,
}

/// Granger test of `smoothed` against the reference, and a VAR(≤ max_lag, AIC)
/// forecast of `[smoothed, reference, external]` from the last observations.
pub fn validate_smoothed(
    panel: &Panel,
    dates: &[NaiveDate],
    smoothed: &Series,
    opts: &ValidationOptions,
) -> Result<Validation> {
    if smoothed.len() != dates.len() {
        return Err(Error::LengthMismatch { column: "smoothed".into(), expected: dates.len(), got: smoothed.len() });
    }
    let mut joined = Panel::new(dates.to_vec(), IndexMap::new())?;
    joined.set_column("smoothed", smoothed.clone())?;
    joined.set_column(opts.reference.clone(), align(panel, opts.reference.as_str(), dates)?)?;
    joined.set_column(opts.external.clone(), align(panel, opts.external.as_str(), dates)?)?;
    let joined = joined.drop_incomplete_rows();
    let last_date = *joined.dates().last().ok_or(Error::EmptyResult)?;

    let cause = joined.dense_column("smoothed")?;
    let effect = joined.dense_column(opts.reference.as_str())?;
    let granger = granger(&cause, &effect, opts.max_lag)?;

    let columns = vec!["smoothed".to_owned(), opts.reference.to_string(), opts.external.to_string()];
    let y = joined.dense_matrix(&columns)?;
    let model = fit_var(&y, &ids(&columns), opts.max_lag, Criterion::Aic)?;
    let forecast = forecast(&model, &y, opts.steps)?;
    Ok(Validation { granger, var_p: model.p, columns, forecast, last_date })
}

pub fn validate_and_forecast(panel: &Panel, indicator: &ColimitIndicator, opts: &ValidationOptions) -> Result<Validation> {
    validate_smoothed(panel, &indicator.dates, &indicator.smoothed, opts)
}
