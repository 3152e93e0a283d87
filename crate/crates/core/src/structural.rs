//! Closed-form structural equations of the two-currency model: linear money
//! demands, relative demand, devaluation expectations, inflation and income,
//! the expectation recursion and its `⋆` operation, the toy demand curves,
//! least-squares calibration and per-date simulation.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::linalg::least_squares_vec;
use crate::panel::{Panel, Series};
use crate::{Error, Result};

/// Coefficients of the four practical-model equations.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct StructuralCoefficients {
    /// Peso demand: income, peso rate, expected Argentine inflation.
    pub alpha: [f64; 3],
    /// Dollar demand: income, dollar rate, expected US inflation.
    pub beta: [f64; 3],
    /// Inflation: expected inflation, money.
    pub gamma: [f64; 2],
    /// Income: peso money, net lending/borrowing.
    pub delta: [f64; 2],
    #[serde(default)]
    pub intercepts: Intercepts,
}

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Intercepts {
    pub demand_ars: f64,
    pub demand_usd: f64,
    pub inflation: f64,
    pub income: f64,
}

impl StructuralCoefficients {
    pub fn is_finite(&self) -> bool {
        self.alpha
            .iter()
            .chain(&self.beta)
            .chain(&self.gamma)
            .chain(&self.delta)
            .chain([
                &self.intercepts.demand_ars,
                &self.intercepts.demand_usd,
                &self.intercepts.inflation,
                &self.intercepts.income,
            ])
            .all(|v| v.is_finite())
    }
}

/// `L_ars = Y·α1 + i_ars·α2 − π_exp·α3 (+ intercept)`
pub fn demand_ars(y: f64, i_ars: f64, pi_exp: f64, c: &StructuralCoefficients) -> f64 {
    y * c.alpha[0] + i_ars * c.alpha[1] - pi_exp * c.alpha[2] + c.intercepts.demand_ars
}

/// `L_usd = Y·β1 + i_usd·β2 − π_usa_exp·β3 (+ intercept)`
pub fn demand_usd(y: f64, i_usd: f64, pi_usa_exp: f64, c: &StructuralCoefficients) -> f64 {
    y * c.beta[0] + i_usd * c.beta[1] - pi_usa_exp * c.beta[2] + c.intercepts.demand_usd
}

/// Relative attraction of the peso: `L_ars / L_usd`, times
/// `exp(i_ars − i_usd)` when `exponential` is set.
pub fn relative_demand(l_ars: f64, l_usd: f64, i_ars: f64, i_usd: f64, exponential: bool) -> Result<f64> {
    if l_usd == 0.0 {
        return Err(Error::DivisionByZero(None));
    }
    let ratio = l_ars / l_usd;
    Ok(if exponential { ratio * (i_ars - i_usd).exp() } else { ratio })
}

/// Interest-parity devaluation expectation, in percent:
/// `π_arg − π_usa + i_arg_short − i_usa_short − EMBI/100` with EMBI in basis points.
pub fn devaluation_expectation(pi_arg: f64, pi_usa: f64, i_arg_short: f64, i_usa_short: f64, embi_bp: f64) -> f64 {
    pi_arg - pi_usa + i_arg_short - i_usa_short - embi_bp / 100.0
}

/// `π = π_exp·γ1 + M·γ2 (+ intercept)`
pub fn inflation_forecast(pi_exp: f64, m: f64, c: &StructuralCoefficients) -> f64 {
    pi_exp * c.gamma[0] + m * c.gamma[1] + c.intercepts.inflation
}

/// `Y = M_ars·δ1 + lending_borrowing·δ2 (+ intercept)`
pub fn income(m_ars: f64, lending_borrowing: f64, c: &StructuralCoefficients) -> f64 {
    m_ars * c.delta[0] + lending_borrowing * c.delta[1] + c.intercepts.income
}

pub type Corrector = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Weights of the expectation recursion plus the non-linear corrector `η`
/// used by `⋆`. `eta = None` means `η ≡ 0`.
#[derive(Clone, Default)]
pub struct ExpectationDynamicsParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub eta: Option<Corrector>,
}

impl std::fmt::Debug for ExpectationDynamicsParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExpectationDynamicsParams")
            .field("a", &self.a)
            .field("b", &self.b)
            .field("c", &self.c)
            .field("eta", &self.eta.as_ref().map(|_| "fn"))
            .finish()
    }
}

impl ExpectationDynamicsParams {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        ExpectationDynamicsParams { a, b, c, eta: None }
    }

    pub fn with_eta(mut self, eta: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.eta = Some(Arc::new(eta));
        self
    }
}

/// One step of `π_e(t+1) = a·π_e(t) + b·i_real(t) + c·ΔE(t) + noise`.
pub fn expectation_step(pi_t: f64, i_real_t: f64, delta_e_t: f64, p: &ExpectationDynamicsParams, noise: f64) -> f64 {
    p.a * pi_t + p.b * i_real_t + p.c * delta_e_t + noise
}

/// `π ⋆ E = π + E + η(π, E)`.
pub fn expectation_star(pi: f64, e: f64, p: &ExpectationDynamicsParams) -> f64 {
    pi + e + p.eta.as_ref().map_or(0.0, |eta| eta(pi, e))
}

/// Real rate by the Fisher approximation: nominal minus expected inflation.
pub fn fisher_real_rate(nominal: f64, expected_inflation: f64) -> f64 {
    nominal - expected_inflation
}

/// Parameters of the illustrative demand curves.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToyDemandParams {
    pub a: f64,
    pub b: f64,
    pub k: f64,
    pub c: f64,
}

impl Default for ToyDemandParams {
    fn default() -> Self {
        ToyDemandParams { a: 1.0, b: 5.0, k: 2.0, c: 1.0 }
    }
}

/// `Y / ((1 + i_p)·exp(C·π_e))`
pub fn toy_demand_pesos(y: f64, i_p: f64, pi_e: f64, p: &ToyDemandParams) -> f64 {
    y / ((1.0 + i_p) * (p.c * pi_e).exp())
}

/// `A·(1 + B·π_e^k) / (1 + i_d)`
pub fn toy_demand_usd(pi_e: f64, i_d: f64, p: &ToyDemandParams) -> f64 {
    p.a * (1.0 + p.b * pi_e.powf(p.k)) / (1.0 + i_d)
}

/// Which panel columns stand in for each model quantity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProxyMap {
    pub l_ars: String,
    pub l_usd: String,
    pub income: String,
    pub inflation: String,
    pub i_ars: String,
    pub i_usd: String,
    pub pi_exp: String,
    pub pi_usa_exp: String,
    pub money: String,
    pub lending_borrowing: String,
    pub embi: String,
    pub long_rate: String,
}

impl Default for ProxyMap {
    fn default() -> Self {
        ProxyMap {
            l_ars: "M2".into(),
            l_usd: "M2 Usd".into(),
            income: "Gdp_argentina".into(),
            inflation: "Ipc Argentina".into(),
            i_ars: "Short Interest".into(),
            i_usd: "Short Term Usd Rate".into(),
            pi_exp: "Pi Exp".into(),
            pi_usa_exp: "Usa Pi Exp".into(),
            money: "M2".into(),
            lending_borrowing: "Argentina Net Lending Borrowing".into(),
            embi: "Embi+ARG".into(),
            long_rate: "Long Interest".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationOptions {
    pub proxies: ProxyMap,
    pub intercepts: bool,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        CalibrationOptions { proxies: ProxyMap::default(), intercepts: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquationFit {
    pub equation: String,
    pub dependent: String,
    pub regressors: Vec<String>,
    pub r_squared: f64,
    pub nobs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub coefficients: StructuralCoefficients,
    pub equations: Vec<EquationFit>,
}

/// Fits `y = Σ sign_j·coef_j·x_j (+ intercept)` and returns the coefficients
/// with the sign folded back in, the intercept and R².
fn fit_equation(
    panel: &Panel,
    dependent: &str,
    regressors: &[(&str, f64)],
    intercept: bool,
) -> Result<(Vec<f64>, f64, f64)> {
    let y = DVector::from_vec(panel.dense_column(dependent)?);
    let n = y.len();
    let k = regressors.len() + usize::from(intercept);
    if n < k {
        return Err(Error::InsufficientRows { needed: k, got: n });
    }
    let cols = regressors
        .iter()
        .map(|(name, _)| panel.dense_column(name))
        .collect::<Result<Vec<_>>>()?;
    let x = DMatrix::from_fn(n, k, |r, c| match (intercept, c) {
        (true, 0) => 1.0,
        (true, c) => regressors[c - 1].1 * cols[c - 1][r],
        (false, c) => regressors[c].1 * cols[c][r],
    });
    let fit = least_squares_vec(&x, &y)?;
    let beta = fit.coefficients.column(0);
    let (b0, slopes) = if intercept {
        (beta[0], beta.iter().skip(1).copied().collect())
    } else {
        (0.0, beta.iter().copied().collect())
    };
    let mean = y.mean();
    let sst: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ssr = fit.ssr(0);
    let r2 = if sst > 0.0 { 1.0 - ssr / sst } else if ssr == 0.0 { 1.0 } else { 0.0 };
    Ok((slopes, b0, r2))
}

/// Equation name, dependent column, signed regressor columns.
type EquationSpec<'a> = (&'a str, &'a str, Vec<(&'a str, f64)>);

/// Least-squares fit of the four structural equations against their proxies.
pub fn calibrate(panel: &Panel, opts: &CalibrationOptions) -> Result<Calibration> {
    let p = &opts.proxies;
    let specs: [EquationSpec; 4] = [
        ("demand_ars", &p.l_ars, vec![(&p.income, 1.0), (&p.i_ars, 1.0), (&p.pi_exp, -1.0)]),
        ("demand_usd", &p.l_usd, vec![(&p.income, 1.0), (&p.i_usd, 1.0), (&p.pi_usa_exp, -1.0)]),
        ("inflation", &p.inflation, vec![(&p.pi_exp, 1.0), (&p.money, 1.0)]),
        ("income", &p.income, vec![(&p.money, 1.0), (&p.lending_borrowing, 1.0)]),
    ];
    let mut coefficients = StructuralCoefficients::default();
    let mut equations = Vec::with_capacity(4);
    for (name, dep, regs) in specs.iter() {
        let (slopes, b0, r2) = fit_equation(panel, dep, regs, opts.intercepts)?;
        match *name {
            "demand_ars" => {
                coefficients.alpha.copy_from_slice(&slopes);
                coefficients.intercepts.demand_ars = b0;
            }
            "demand_usd" => {
                coefficients.beta.copy_from_slice(&slopes);
                coefficients.intercepts.demand_usd = b0;
            }
            "inflation" => {
                coefficients.gamma.copy_from_slice(&slopes);
                coefficients.intercepts.inflation = b0;
            }
            _ => {
                coefficients.delta.copy_from_slice(&slopes);
                coefficients.intercepts.income = b0;
            }
        }
        equations.push(EquationFit {
            equation: (*name).to_owned(),
            dependent: (*dep).to_owned(),
            regressors: regs.iter().map(|r| r.0.to_owned()).collect(),
            r_squared: r2,
            nobs: panel.len(),
        });
    }
    Ok(Calibration { coefficients, equations })
}

/// Names of the columns `simulate` appends.
pub const MODEL_COLUMNS: [&str; 7] = [
    "model_L_ars",
    "model_L_usd",
    "model_relative_demand",
    "model_E",
    "model_pi",
    "model_Y",
    "model_i_real",
];

/// Appends the model-implied series (prefixed `model_`) to a copy of `panel`.
///
/// Each equation is evaluated on observed regressors, so the output can be set
/// against the observed proxies date by date. Relative demand uses the plain
/// ratio of the two model demands.
pub fn simulate(panel: &Panel, c: &StructuralCoefficients, proxies: &ProxyMap) -> Result<Panel> {
    let col = |name: &str| panel.dense_column(name);
    let (y, i_ars, i_usd) = (col(&proxies.income)?, col(&proxies.i_ars)?, col(&proxies.i_usd)?);
    let (pi_exp, pi_usa) = (col(&proxies.pi_exp)?, col(&proxies.pi_usa_exp)?);
    let (money, lb, embi) = (col(&proxies.money)?, col(&proxies.lending_borrowing)?, col(&proxies.embi)?);
    let long_rate = col(&proxies.long_rate)?;

    let n = panel.len();
    let mut out: Vec<Vec<f64>> = vec![Vec::with_capacity(n); MODEL_COLUMNS.len()];
    for t in 0..n {
        let l_ars = demand_ars(y[t], i_ars[t], pi_exp[t], c);
        let l_usd = demand_usd(y[t], i_usd[t], pi_usa[t], c);
        let rel = relative_demand(l_ars, l_usd, i_ars[t], i_usd[t], false)
            .map_err(|_| Error::DivisionByZero(Some(panel.dates()[t])))?;
        let row = [
            l_ars,
            l_usd,
            rel,
            devaluation_expectation(pi_exp[t], pi_usa[t], i_ars[t], i_usd[t], embi[t]),
            inflation_forecast(pi_exp[t], money[t], c),
            income(money[t], lb[t], c),
            fisher_real_rate(long_rate[t], pi_exp[t]),
        ];
        for (dst, v) in out.iter_mut().zip(row) {
            dst.push(v);
        }
    }
    let mut result = panel.clone();
    for (name, values) in MODEL_COLUMNS.iter().zip(out) {
        result.set_column(*name, Series::from_values(values))?;
    }
    Ok(result)
}

/// Observed-minus-model residuals for each fitted equation of a simulated panel.
pub fn residuals(simulated: &Panel, proxies: &ProxyMap) -> Result<Vec<(String, Vec<f64>)>> {
    [
        ("demand_ars", &proxies.l_ars, "model_L_ars"),
        ("demand_usd", &proxies.l_usd, "model_L_usd"),
        ("inflation", &proxies.inflation, "model_pi"),
        ("income", &proxies.income, "model_Y"),
    ]
    .into_iter()
    .map(|(name, observed, model)| {
        let obs = simulated.dense_column(observed)?;
        let fit = simulated.dense_column(model)?;
        Ok((name.to_owned(), obs.iter().zip(&fit).map(|(o, m)| o - m).collect()))
    })
    .collect()
}
