//! From-scratch multivariate time-series toolkit: unit-root and cointegration
//! tests, Granger causality, VAR estimation with lag selection, residual
//! diagnostics, impulse responses, variance decompositions and forecasts.

mod adf;
pub mod distributions;
mod granger;
mod johansen;
mod ljung_box;
mod stationarity;
mod var;

pub use adf::{adf_critical_value_5pct, adf_pvalue, adf_test, AdfResult, StationarityDecision};
pub use granger::{granger, GrangerLag, GrangerResult};
pub use johansen::{johansen_trace, JohansenRank, JohansenResult, TRACE_CRITICAL_95};
pub use ljung_box::{autocorrelations, ljung_box, LjungBox};
pub use stationarity::{stationarity_pipeline, ColumnDecision, StationarityReport};
pub use var::{
    fevd, fit_var, fit_var_order, fit_var_panel, forecast, irf, select_order, CoefficientRow, Criterion, CriterionValues,
    EquationSummary, FevdResult, IrfResult, LagSelection, VarModel, VarSummary,
};
