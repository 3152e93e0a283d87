use serde::{Deserialize, Serialize};

use super::adf::{adf_test, AdfResult, StationarityDecision};
use crate::panel::{Panel, Series};
use crate::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnDecision {
    pub column: String,
    pub adf: AdfResult,
    pub differenced: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    pub columns: Vec<ColumnDecision>,
    pub rows_in: usize,
    pub rows_out: usize,
}

/// ADF-tests every column (on its present values), first-differences the
/// nonstationary ones and drops the rows left incomplete.
pub fn stationarity_pipeline(panel: &Panel) -> Result<(Panel, StationarityReport)> {
    let mut out = panel.clone();
    let mut columns = Vec::with_capacity(panel.width());
    for (name, series) in panel.columns() {
        let values: Vec<f64> = series.present().collect();
        let adf = adf_test(&values, None)?;
        let differenced = adf.decision_5pct == StationarityDecision::Nonstationary;
        if differenced {
            let diffed = series.difference(1)?;
            let aligned: Series = std::iter::once(None).chain(diffed.values().iter().copied()).collect();
            out.set_column(name.clone(), aligned)?;
        }
        columns.push(ColumnDecision { column: name.to_string(), adf, differenced });
    }
    let out = if columns.iter().any(|c| c.differenced) { out.drop_incomplete_rows() } else { out };
    let report = StationarityReport { columns, rows_in: panel.len(), rows_out: out.len() };
    Ok((out, report))
}
