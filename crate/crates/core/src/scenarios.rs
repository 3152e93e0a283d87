//! Sensitivity analysis framed as a pair of functors between variable sets:
//! a forgetful projection onto a small "domestic" set, a learning enrichment
//! that adds variables and their lags back, data shocks, and model comparison
//! between baseline and shocked fits.

use chrono::NaiveDate;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::econometrics::{fit_var, fit_var_order, forecast, Criterion, VarModel};
use crate::panel::{ids, Panel, Series, VariableId};
use crate::{Error, Result};

/// A named, ordered set of variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategorySpec {
    pub name: String,
    pub variables: Vec<VariableId>,
}

impl CategorySpec {
    pub fn new<S: AsRef<str>>(name: &str, variables: &[S]) -> Self {
        CategorySpec { name: name.to_owned(), variables: ids(variables) }
    }

    pub fn empty(name: &str) -> Self {
        CategorySpec { name: name.to_owned(), variables: vec![] }
    }

    /// The monetary-system category.
    pub fn m() -> Self {
        Self::new(
            "M",
            &["M2", "Pi Exp", "Argentina Net Lending Borrowing", "Historical Ars Usd", "Long Interest", "Short Interest"],
        )
    }

    /// The money-demand category: peso and dollar demand proxies.
    pub fn delta() -> Self {
        Self::new("Delta", &["M2", "M2 Usd"])
    }

    /// Series whose lags form the historical-features category.
    pub fn h() -> Self {
        Self::new("H", &["Ipc Argentina", "Historical Ars Usd"])
    }

    fn check(&self, panel: &Panel) -> Result<()> {
        match self.variables.iter().find(|v| !panel.has(v.as_str())) {
            Some(v) => Err(Error::UnknownVariable(v.to_string())),
            None => Ok(()),
        }
    }
}

/// `U`: keep only the category's columns, same dates.
pub fn forgetful_project(panel: &Panel, spec: &CategorySpec) -> Result<Panel> {
    spec.check(panel)?;
    panel.select(&spec.variables)
}

/// Ordered union of two specs' variables (first occurrence wins).
fn union(base: &CategorySpec, extra: &CategorySpec) -> Vec<VariableId> {
    let mut out = base.variables.clone();
    for v in &extra.variables {
        if !out.contains(v) {
            out.push(v.clone());
        }
    }
    out
}

pub fn lag_name(v: &VariableId, lag: usize) -> String {
    format!("{v}_lag{lag}")
}

/// `L`: base and extra columns plus `v_lag1..v_lagL` for each of them, with
/// the first `lags` rows (whose lags are undefined) dropped.
pub fn learning_enrich(panel: &Panel, base: &CategorySpec, extra: &CategorySpec, lags: usize) -> Result<Panel> {
    base.check(panel)?;
    extra.check(panel)?;
    let vars = union(base, extra);
    let t = panel.len();
    if lags > 0 && t <= lags {
        return Err(Error::InsufficientRows { needed: lags + 1, got: t });
    }
    let mut out = panel.select(&vars)?;
    for v in &vars {
        let values = panel.column(v.as_str())?.values();
        for l in 1..=lags {
            let shifted: Series = (0..t).map(|i| if i >= l { values[i - l] } else { None }).collect();
            out.set_column(lag_name(v, l), shifted)?;
        }
    }
    Ok(out.slice_rows(lags..t))
}

/// `U(L(panel))` restores the base projection exactly on the shared rows.
pub fn adjunction_roundtrip_check(panel: &Panel, base: &CategorySpec, extra: &CategorySpec) -> Result<bool> {
    let round = forgetful_project(&learning_enrich(panel, base, extra, 0)?, base)?;
    Ok(round == forgetful_project(panel, base)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShockKind {
    Multiplicative,
    Additive,
}

/// Inclusive date range; either end may be open.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DateWindow {
    #[serde(default)]
    pub start: Option<NaiveDate>,
    #[serde(default)]
    pub end: Option<NaiveDate>,
}

impl DateWindow {
    pub fn contains(&self, d: NaiveDate) -> bool {
        self.start.is_none_or(|s| d >= s) && self.end.is_none_or(|e| d <= e)
    }

    pub fn apply(&self, panel: &Panel) -> Panel {
        panel.filter_dates(self.start, self.end)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Shock {
    pub variable: VariableId,
    pub kind: ShockKind,
    pub magnitude: f64,
    #[serde(default)]
    pub window: Option<DateWindow>,
}

impl Shock {
    pub fn multiplicative(variable: &str, magnitude: f64) -> Self {
        Shock { variable: variable.into(), kind: ShockKind::Multiplicative, magnitude, window: None }
    }

    pub fn additive(variable: &str, magnitude: f64) -> Self {
        Shock { variable: variable.into(), kind: ShockKind::Additive, magnitude, window: None }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.magnitude.is_finite() || (self.kind == ShockKind::Multiplicative && self.magnitude <= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "shock on '{}' has invalid magnitude {}",
                self.variable, self.magnitude
            )));
        }
        Ok(())
    }

    fn apply(&self, x: f64) -> f64 {
        match self.kind {
            ShockKind::Multiplicative => x * self.magnitude,
            ShockKind::Additive => x + self.magnitude,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub shocks: Vec<Shock>,
}

/// The three contexts of the sensitivity study: +50% money, +5 points on the
/// long rate, and both together.
pub fn builtin_scenarios() -> Vec<ScenarioSpec> {
    let money = Shock::multiplicative("M2", 1.50);
    let rate = Shock::additive("Long Interest", 5.00);
    vec![
        ScenarioSpec { name: "m2_up_50pct".into(), shocks: vec![money.clone()] },
        ScenarioSpec { name: "long_interest_up_5".into(), shocks: vec![rate.clone()] },
        ScenarioSpec { name: "combined".into(), shocks: vec![money, rate] },
    ]
}

pub fn scenarios_from_json(text: &str) -> Result<Vec<ScenarioSpec>> {
    let specs: Vec<ScenarioSpec> = serde_json::from_str(text)?;
    for s in specs.iter().flat_map(|s| &s.shocks) {
        s.validate()?;
    }
    Ok(specs)
}

/// Copy of `panel` with each shock applied pointwise inside its window, in order.
pub fn apply_scenario(panel: &Panel, shocks: &[Shock]) -> Result<Panel> {
    let mut out = panel.clone();
    let dates = panel.dates().to_vec();
    for shock in shocks {
        shock.validate()?;
        let col = out.column_mut(shock.variable.as_str())?;
        for (v, d) in col.values_mut().iter_mut().zip(&dates) {
            if shock.window.is_none_or(|w| w.contains(*d)) {
                *v = v.map(|x| shock.apply(x));
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioComparison {
    pub name: String,
    pub dates: Vec<NaiveDate>,
    pub baseline: Vec<f64>,
    pub shocked: Vec<f64>,
    pub difference: Vec<f64>,
    pub mean_abs_difference: f64,
    pub max_abs_difference: f64,
    /// Target-equation residuals of the shocked fit.
    pub residuals: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensitivityOptions {
    pub max_lags: usize,
    pub criterion: Criterion,
    pub window: Option<DateWindow>,
}

impl Default for SensitivityOptions {
    fn default() -> Self {
        SensitivityOptions { max_lags: 5, criterion: Criterion::Aic, window: None }
    }
}

fn target_index(model_vars: &CategorySpec, target: &str) -> Result<usize> {
    model_vars
        .variables
        .iter()
        .position(|v| v.as_str() == target)
        .ok_or_else(|| Error::InvalidArgument(format!("target '{target}' is not among the model variables")))
}

/// In-sample fitted values `y − ε` of equation `i`.
fn fitted(model: &VarModel, y: &DMatrix<f64>, i: usize) -> Vec<f64> {
    (0..model.residuals.nrows()).map(|r| y[(r + model.p, i)] - model.residuals[(r, i)]).collect()
}

/// Fits the baseline VAR on `model_vars`, then refits each scenario's shocked
/// panel at the baseline's lag order and compares the target's fitted values.
///
/// Reusing the baseline order keeps every comparison on the same dates.
pub fn run_sensitivity(
    panel: &Panel,
    target: &str,
    scenarios: &[ScenarioSpec],
    model_vars: &CategorySpec,
    opts: &SensitivityOptions,
) -> Result<Vec<ScenarioComparison>> {
    let i = target_index(model_vars, target)?;
    let panel = opts.window.map_or_else(|| panel.clone(), |w| w.apply(panel));
    let base_panel = forgetful_project(&panel, model_vars)?;
    let y0 = base_panel.dense_matrix(&model_vars.variables)?;
    let baseline = fit_var(&y0, &model_vars.variables, opts.max_lags, opts.criterion)?;
    let base_fit = fitted(&baseline, &y0, i);
    let dates = panel.dates()[baseline.p..].to_vec();

    scenarios
        .iter()
        .map(|s| {
            let shocked_panel = apply_scenario(&panel, &s.shocks)?;
            let y = forgetful_project(&shocked_panel, model_vars)?.dense_matrix(&model_vars.variables)?;
            let model = fit_var_order(&y, &model_vars.variables, baseline.p)?;
            let shocked = fitted(&model, &y, i);
            let difference: Vec<f64> = shocked.iter().zip(&base_fit).map(|(s, b)| s - b).collect();
            let n = difference.len().max(1) as f64;
            Ok(ScenarioComparison {
                name: s.name.clone(),
                dates: dates.clone(),
                baseline: base_fit.clone(),
                mean_abs_difference: difference.iter().map(|d| d.abs()).sum::<f64>() / n,
                max_abs_difference: difference.iter().fold(0.0, |m, d| m.max(d.abs())),
                residuals: model.residuals.column(i).iter().copied().collect(),
                shocked,
                difference,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualForecast {
    pub domestic: Vec<f64>,
    pub enriched: Vec<f64>,
    pub domestic_p: usize,
    pub enriched_p: usize,
}

/// Domestic vs enriched VAR forecasts of `target` after `shock`.
///
/// Both models are estimated on the unshocked data; the shock is applied to
/// the panel and each model forecasts `steps` ahead from its shocked last `p`
/// observations. The enriched model uses `domestic ∪ enriched_extra` without
/// extra lag columns, since the VAR supplies its own lags.
pub fn dual_model_compare(
    panel: &Panel,
    domestic: &CategorySpec,
    enriched_extra: &CategorySpec,
    target: &str,
    shock: &Shock,
    steps: usize,
    opts: &SensitivityOptions,
) -> Result<DualForecast> {
    let enriched = CategorySpec { name: "enriched".into(), variables: union(domestic, enriched_extra) };
    let i = target_index(domestic, target)?;
    let panel = opts.window.map_or_else(|| panel.clone(), |w| w.apply(panel));
    let shocked = apply_scenario(&panel, std::slice::from_ref(shock))?;

    let run = |spec: &CategorySpec| -> Result<(Vec<f64>, usize)> {
        let y = forgetful_project(&panel, spec)?.dense_matrix(&spec.variables)?;
        let model = fit_var(&y, &spec.variables, opts.max_lags, opts.criterion)?;
        let last = forgetful_project(&shocked, spec)?.dense_matrix(&spec.variables)?;
        let f = forecast(&model, &last, steps)?;
        Ok((f.column(i).iter().copied().collect(), model.p))
    };
    let (d, dp) = run(domestic)?;
    let (e, ep) = run(&enriched)?;
    Ok(DualForecast { domestic: d, enriched: e, domestic_p: dp, enriched_p: ep })
}
