use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::distributions::normal_cdf;
use crate::linalg::{cholesky_lower, least_squares, log_det_spd};
use crate::panel::{Panel, VariableId};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Aic,
    Bic,
    Hqic,
    Fpe,
}

impl std::str::FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "aic" => Ok(Criterion::Aic),
            "bic" => Ok(Criterion::Bic),
            "hqic" => Ok(Criterion::Hqic),
            "fpe" => Ok(Criterion::Fpe),
            other => Err(Error::InvalidArgument(format!("unknown information criterion '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionValues {
    pub p: usize,
    pub aic: f64,
    pub bic: f64,
    pub hqic: f64,
    pub fpe: f64,
}

impl CriterionValues {
    pub fn get(&self, c: Criterion) -> f64 {
        match c {
            Criterion::Aic => self.aic,
            Criterion::Bic => self.bic,
            Criterion::Hqic => self.hqic,
            Criterion::Fpe => self.fpe,
        }
    }

    /// Criteria for a `K`-variable VAR(p) whose ML residual covariance has
    /// log-determinant `ln_det`, estimated on `n` rows.
    fn compute(p: usize, k: usize, n: usize, ln_det: f64) -> Self {
        let (nf, kf, pf) = (n as f64, k as f64, p as f64);
        let params = pf * kf * kf;
        let kp = kf * pf;
        CriterionValues {
            p,
            aic: ln_det + 2.0 * params / nf,
            bic: ln_det + nf.ln() * params / nf,
            hqic: ln_det + 2.0 * nf.ln().ln() * params / nf,
            fpe: ln_det.exp() * ((nf + kp + 1.0) / (nf - kp - 1.0)).powf(kf),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LagSelection {
    pub criterion: Criterion,
    pub selected: usize,
    pub max_lags: usize,
    /// One row per candidate `p = 0..=max_lags`, all on the same sample.
    pub table: Vec<CriterionValues>,
}

impl LagSelection {
    /// Order each criterion would pick (ties go to the smaller order).
    pub fn selected_order(&self, c: Criterion) -> usize {
        self.table
            .iter()
            .fold(None::<&CriterionValues>, |best, row| match best {
                Some(b) if b.get(c) <= row.get(c) => Some(b),
                _ => Some(row),
            })
            .map_or(0, |r| r.p)
    }
}

/// Fitted `Y_t = c + A_1·Y_{t−1} + … + A_p·Y_{t−p} + ε_t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarModel {
    pub p: usize,
    pub variable_order: Vec<VariableId>,
    pub c: DVector<f64>,
    pub a: Vec<DMatrix<f64>>,
    /// Residual covariance, denominator `T_eff − (Kp + 1)`.
    pub sigma: DMatrix<f64>,
    /// `(T − p) × K`.
    pub residuals: DMatrix<f64>,
    pub t_effective: usize,
    /// `(XᵀX)⁻¹` of the shared design, for standard errors; empty for
    /// hand-built models.
    #[serde(skip)]
    pub xtx_inv: DMatrix<f64>,
    pub lag_selection: Option<LagSelection>,
}

impl VarModel {
    /// A hand-specified model with no estimation data attached.
    pub fn new(
        variable_order: Vec<VariableId>,
        c: DVector<f64>,
        a: Vec<DMatrix<f64>>,
        sigma: DMatrix<f64>,
    ) -> Result<Self> {
        let k = variable_order.len();
        if c.len() != k || sigma.shape() != (k, k) || a.iter().any(|m| m.shape() != (k, k)) {
            return Err(Error::ShapeMismatch(format!("VAR pieces must all be sized for {k} variables")));
        }
        Ok(VarModel {
            p: a.len(),
            variable_order,
            c,
            a,
            sigma,
            residuals: DMatrix::zeros(0, k),
            t_effective: 0,
            xtx_inv: DMatrix::zeros(0, 0),
            lag_selection: None,
        })
    }

    pub fn k(&self) -> usize {
        self.variable_order.len()
    }

    /// `Kp × Kp` companion matrix (empty when `p = 0`).
    pub fn companion(&self) -> DMatrix<f64> {
        let (k, p) = (self.k(), self.p);
        let mut m = DMatrix::zeros(k * p, k * p);
        for (s, a) in self.a.iter().enumerate() {
            m.view_mut((0, s * k), (k, k)).copy_from(a);
        }
        if p > 1 {
            m.view_mut((k, 0), (k * (p - 1), k * (p - 1))).fill_with_identity();
        }
        m
    }

    /// Largest eigenvalue modulus of the companion matrix; `< 1` means stable.
    pub fn spectral_radius(&self) -> f64 {
        if self.p == 0 {
            return 0.0;
        }
        self.companion().complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_stable(&self) -> bool {
        self.spectral_radius() < 1.0
    }

    /// `(I − Σ A_s)⁻¹·c`.
    pub fn unconditional_mean(&self) -> Result<DVector<f64>> {
        let k = self.k();
        let m = self.a.iter().fold(DMatrix::identity(k, k), |acc, a| acc - a);
        m.lu().solve(&self.c).ok_or(Error::SingularMomentMatrix)
    }

    /// Names of the rows of each equation's coefficient vector.
    pub fn regressor_names(&self) -> Vec<String> {
        let mut names = vec!["const".to_owned()];
        for s in 1..=self.p {
            names.extend(self.variable_order.iter().map(|v| format!("L{s}.{v}")));
        }
        names
    }

    /// Coefficient vector of equation `i` in `regressor_names` order.
    fn equation_coefficients(&self, i: usize) -> Vec<f64> {
        let mut out = vec![self.c[i]];
        for a in &self.a {
            out.extend(a.row(i).iter().copied());
        }
        out
    }

    /// Information criteria for the fitted order on its own estimation sample,
    /// using the ML residual covariance.
    pub fn info_criteria(&self) -> Result<CriterionValues> {
        let n = self.residuals.nrows();
        if n == 0 {
            return Err(Error::InsufficientObservations { needed: 1, got: 0 });
        }
        let sigma_ml = self.residuals.transpose() * &self.residuals / n as f64;
        Ok(CriterionValues::compute(self.p, self.k(), n, log_det_spd(&sigma_ml)?))
    }

    pub fn summary(&self) -> Result<VarSummary> {
        let n = self.residuals.nrows();
        let k = self.k();
        if self.xtx_inv.nrows() != 1 + k * self.p {
            return Err(Error::InvalidArgument("model carries no estimation data to summarize".into()));
        }
        let ic = self.info_criteria()?;
        let sigma_ml = self.residuals.transpose() * &self.residuals / n as f64;
        let ln_det = log_det_spd(&sigma_ml)?;
        let nf = n as f64;
        let log_likelihood =
            -0.5 * nf * (k as f64 * (2.0 * std::f64::consts::PI).ln() + ln_det + k as f64);
        let names = self.regressor_names();
        let equations = (0..k)
            .map(|i| {
                let coefs = self.equation_coefficients(i);
                let rows = coefs
                    .iter()
                    .enumerate()
                    .map(|(j, &b)| {
                        let se = (self.sigma[(i, i)] * self.xtx_inv[(j, j)]).sqrt();
                        let t = b / se;
                        CoefficientRow {
                            name: names[j].clone(),
                            coefficient: b,
                            std_error: se,
                            t_stat: t,
                            p_value: 2.0 * (1.0 - normal_cdf(t.abs())),
                        }
                    })
                    .collect();
                EquationSummary { name: self.variable_order[i].to_string(), rows }
            })
            .collect();
        Ok(VarSummary {
            n_equations: k,
            nobs: n,
            p: self.p,
            log_likelihood,
            aic: ic.aic,
            bic: ic.bic,
            hqic: ic.hqic,
            fpe: ic.fpe,
            det_omega_mle: ln_det.exp(),
            equations,
            lag_selection: self.lag_selection.clone(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub name: String,
    pub coefficient: f64,
    pub std_error: f64,
    pub t_stat: f64,
    pub p_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquationSummary {
    pub name: String,
    pub rows: Vec<CoefficientRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarSummary {
    pub n_equations: usize,
    pub nobs: usize,
    pub p: usize,
    pub log_likelihood: f64,
    pub aic: f64,
    pub bic: f64,
    pub hqic: f64,
    pub fpe: f64,
    pub det_omega_mle: f64,
    pub equations: Vec<EquationSummary>,
    pub lag_selection: Option<LagSelection>,
}

impl VarSummary {
    /// Plain-text regression summary, one coefficient block per equation.
    pub fn to_text(&self) -> String {
        let rule = "=".repeat(78);
        let thin = "-".repeat(78);
        let mut s = String::new();
        let _ = writeln!(s, "  Summary of Regression Results\n{rule}\nModel:   VAR\nMethod:  OLS\n{thin}");
        let _ = writeln!(s, "No. of Equations: {:>12.4}    BIC: {:>18.6}", self.n_equations as f64, self.bic);
        let _ = writeln!(s, "Nobs:             {:>12.2}    HQIC: {:>17.6}", self.nobs as f64, self.hqic);
        let _ = writeln!(s, "Log likelihood:   {:>12.6e}    FPE: {:>18.6e}", self.log_likelihood, self.fpe);
        let _ = writeln!(s, "AIC:              {:>12.6}    Det(Omega_mle): {:>7.6e}", self.aic, self.det_omega_mle);
        let _ = writeln!(s, "{thin}");
        for eq in &self.equations {
            let _ = writeln!(s, "Results for equation {}\n{rule}", eq.name);
            let _ = writeln!(s, "{:<28}{:>14}{:>14}{:>11}{:>9}", "", "coefficient", "std. error", "t-stat", "prob");
            let _ = writeln!(s, "{thin}");
            for r in &eq.rows {
                let _ = writeln!(
                    s,
                    "{:<28}{:>14.6}{:>14.6}{:>11.3}{:>9.3}",
                    r.name, r.coefficient, r.std_error, r.t_stat, r.p_value
                );
            }
            let _ = writeln!(s, "{rule}\n");
        }
        s
    }
}

/// Design `[1, y_{t−1}, …, y_{t−p}]` over rows `first..T`.
fn lagged_design(y: &DMatrix<f64>, p: usize, first: usize) -> DMatrix<f64> {
    let (t, k) = y.shape();
    DMatrix::from_fn(t - first, 1 + k * p, |r, c| {
        if c == 0 {
            1.0
        } else {
            let (lag, col) = ((c - 1) / k + 1, (c - 1) % k);
            y[(first + r - lag, col)]
        }
    })
}

fn check_data(y: &DMatrix<f64>, names: &[VariableId]) -> Result<()> {
    if names.len() != y.ncols() {
        return Err(Error::ShapeMismatch(format!("{} names for {} columns", names.len(), y.ncols())));
    }
    if y.ncols() == 0 {
        return Err(Error::InvalidArgument("VAR needs at least one variable".into()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("VAR data contains non-finite values".into()));
    }
    // A constant column is collinear with the intercept.
    if y.column_iter().any(|c| c.iter().all(|v| *v == c[0])) {
        return Err(Error::RankDeficient);
    }
    Ok(())
}

/// Least-squares VAR of fixed order `p` on the columns of `y` (`T × K`).
pub fn fit_var_order(y: &DMatrix<f64>, names: &[VariableId], p: usize) -> Result<VarModel> {
    check_data(y, names)?;
    let (t, k) = y.shape();
    let regressors = 1 + k * p;
    if t <= p + regressors {
        return Err(Error::InsufficientObservations { needed: p + regressors + 1, got: t });
    }
    let x = lagged_design(y, p, p);
    let target = y.rows(p, t - p).into_owned();
    let fit = least_squares(&x, &target)?;
    let t_eff = t - p;
    let sigma = fit.cross_products() / (t_eff - regressors) as f64;
    let b = &fit.coefficients;
    let c = DVector::from_iterator(k, b.row(0).iter().copied());
    let a = (0..p)
        .map(|s| DMatrix::from_fn(k, k, |i, j| b[(1 + s * k + j, i)]))
        .collect();
    Ok(VarModel {
        p,
        variable_order: names.to_vec(),
        c,
        a,
        sigma,
        residuals: fit.residuals,
        t_effective: t_eff,
        xtx_inv: fit.xtx_inv,
        lag_selection: None,
    })
}

/// Chooses `p ∈ 0..=max_lags` by `criterion` on the common sample that
/// starts at row `max_lags`, then refits the chosen order on every usable row.
pub fn select_order(y: &DMatrix<f64>, names: &[VariableId], max_lags: usize, criterion: Criterion) -> Result<LagSelection> {
    check_data(y, names)?;
    let (t, k) = y.shape();
    if t <= k * max_lags + max_lags + 1 {
        return Err(Error::InsufficientObservations { needed: k * max_lags + max_lags + 2, got: t });
    }
    let target = y.rows(max_lags, t - max_lags).into_owned();
    let n = t - max_lags;
    let table = (0..=max_lags)
        .map(|p| {
            let fit = least_squares(&lagged_design(y, p, max_lags), &target)?;
            let sigma_ml = fit.cross_products() / n as f64;
            let ln_det = log_det_spd(&sigma_ml).map_err(|_| Error::RankDeficient)?;
            Ok(CriterionValues::compute(p, k, n, ln_det))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sel = LagSelection { criterion, selected: 0, max_lags, table };
    sel.selected = sel.selected_order(criterion);
    Ok(sel)
}

/// Lag selection followed by the fit at the selected order.
pub fn fit_var(y: &DMatrix<f64>, names: &[VariableId], max_lags: usize, criterion: Criterion) -> Result<VarModel> {
    let sel = select_order(y, names, max_lags, criterion)?;
    let mut model = fit_var_order(y, names, sel.selected)?;
    model.lag_selection = Some(sel);
    Ok(model)
}

/// `fit_var` on the given panel columns, in order.
pub fn fit_var_panel<S: AsRef<str>>(panel: &Panel, columns: &[S], max_lags: usize, criterion: Criterion) -> Result<VarModel> {
    let y = panel.dense_matrix(columns)?;
    let names: Vec<VariableId> = columns.iter().map(|c| VariableId::new(c.as_ref())).collect();
    fit_var(&y, &names, max_lags, criterion)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IrfResult {
    pub horizon: usize,
    /// Non-orthogonalized responses `Ψ_0..Ψ_H`.
    pub psi: Vec<DMatrix<f64>>,
    /// Orthogonalized responses `Θ_h = Ψ_h·P`; `None` when `Σ` is not
    /// positive definite.
    pub theta: Option<Vec<DMatrix<f64>>>,
    pub cholesky_factor: Option<DMatrix<f64>>,
}

impl IrfResult {
    pub fn theta(&self) -> Result<&[DMatrix<f64>]> {
        self.theta.as_deref().ok_or(Error::NonPositiveDefiniteSigma)
    }
}

fn psi_sequence(model: &VarModel, horizon: usize) -> Vec<DMatrix<f64>> {
    let k = model.k();
    let mut psi: Vec<DMatrix<f64>> = vec![DMatrix::identity(k, k)];
    for h in 1..=horizon {
        let mut next = DMatrix::zeros(k, k);
        for s in 1..=h.min(model.p) {
            next += &model.a[s - 1] * &psi[h - s];
        }
        psi.push(next);
    }
    psi
}

pub fn irf(model: &VarModel, horizon: usize) -> IrfResult {
    let psi = psi_sequence(model, horizon);
    let chol = cholesky_lower(&model.sigma).ok();
    let theta = chol.as_ref().map(|p| psi.iter().map(|m| m * p).collect());
    IrfResult { horizon, psi, theta, cholesky_factor: chol }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FevdResult {
    pub horizon: usize,
    pub variables: Vec<VariableId>,
    /// One `H × K` matrix per response variable; row `h` holds the shares of
    /// the `(h+1)`-step forecast-error variance due to each shock.
    pub shares: Vec<DMatrix<f64>>,
}

impl FevdResult {
    pub fn for_variable(&self, name: &str) -> Option<&DMatrix<f64>> {
        self.variables.iter().position(|v| v.as_str() == name).map(|i| &self.shares[i])
    }
}

pub fn fevd(model: &VarModel, horizon: usize) -> Result<FevdResult> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("FEVD horizon must be at least 1".into()));
    }
    let k = model.k();
    let p = cholesky_lower(&model.sigma)?;
    let theta: Vec<DMatrix<f64>> = psi_sequence(model, horizon - 1).iter().map(|m| m * &p).collect();
    let shares = (0..k)
        .map(|i| {
            let mut acc = vec![0.0; k];
            let mut out = DMatrix::zeros(horizon, k);
            for (h, th) in theta.iter().enumerate() {
                for (j, a) in acc.iter_mut().enumerate() {
                    *a += th[(i, j)].powi(2);
                }
                let total: f64 = acc.iter().sum();
                for j in 0..k {
                    out[(h, j)] = acc[j] / total;
                }
            }
            out
        })
        .collect();
    Ok(FevdResult { horizon, variables: model.variable_order.clone(), shares })
}

/// Iterates the fitted equations from the last `p` rows of `last_observations`
/// with zero future shocks.
pub fn forecast(model: &VarModel, last_observations: &DMatrix<f64>, steps: usize) -> Result<DMatrix<f64>> {
    let (k, p) = (model.k(), model.p);
    let rows = last_observations.nrows();
    if last_observations.ncols() != k || rows < p {
        return Err(Error::ShapeMismatch(format!(
            "forecast needs at least {p} rows of {k} columns, got {rows}×{}",
            last_observations.ncols()
        )));
    }
    let mut hist: Vec<DVector<f64>> =
        (rows - p..rows).map(|r| last_observations.row(r).transpose()).collect();
    let mut out = DMatrix::zeros(steps, k);
    for step in 0..steps {
        let mut y = model.c.clone();
        for (s, a) in model.a.iter().enumerate() {
            y += a * &hist[hist.len() - 1 - s];
        }
        out.set_row(step, &y.transpose());
        if p > 0 {
            hist.remove(0);
            hist.push(y);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::ids;
    use crate::synth;

    fn scalar(c: f64, a: f64) -> VarModel {
        VarModel::new(
            ids(&["x"]),
            DVector::from_element(1, c),
            vec![DMatrix::from_element(1, 1, a)],
            DMatrix::from_element(1, 1, 1.0),
        )
        .unwrap()
    }

    #[test]
    fn recovers_simulated_var1() {
        let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.0, 0.3]);
        let y = synth::simulate_var(
            &mut synth::rng(synth::FIXTURE_SEED),
            &DVector::zeros(2),
            std::slice::from_ref(&a),
            &DMatrix::identity(2, 2),
            10_000,
            200,
        )
        .unwrap();
        let m = fit_var(&y, &ids(&["a", "b"]), 8, Criterion::Aic).unwrap();
        assert_eq!(m.p, 1);
        assert!((&m.a[0] - &a).abs().max() < 0.05);
        assert_eq!(m.residuals.nrows(), 10_000 - 1);
        assert!((&m.sigma - &m.sigma.transpose()).abs().max() == 0.0);
        for c in [Criterion::Bic, Criterion::Hqic, Criterion::Fpe] {
            assert_eq!(m.lag_selection.as_ref().unwrap().selected_order(c), 1);
        }
    }

    #[test]
    fn white_noise_selects_intercept_only() {
        let y = synth::simulate_var(
            &mut synth::rng(synth::FIXTURE_SEED),
            &DVector::from_vec(vec![1.0, -2.0]),
            &[],
            &DMatrix::identity(2, 2),
            2_000,
            0,
        )
        .unwrap();
        let m = fit_var(&y, &ids(&["a", "b"]), 4, Criterion::Bic).unwrap();
        assert_eq!(m.p, 0);
        assert!(m.a.is_empty());
        assert!((m.c[0] - 1.0).abs() < 0.1 && (m.c[1] + 2.0).abs() < 0.1);
        let forced = fit_var_order(&y, &ids(&["a", "b"]), 1).unwrap();
        assert!(forced.a[0].abs().max() < 0.1);
    }

    #[test]
    fn noise_free_recursion_is_recovered_exactly() {
        let a1 = DMatrix::from_row_slice(2, 2, &[0.6, -0.2, 0.1, 0.4]);
        let c = DVector::from_vec(vec![0.3, -0.1]);
        let mut y = DMatrix::zeros(25, 2);
        y.set_row(0, &DVector::from_vec(vec![1.0, 2.0]).transpose());
        for t in 1..25 {
            let next = &c + &a1 * y.row(t - 1).transpose();
            y.set_row(t, &next.transpose());
        }
        let m = fit_var_order(&y, &ids(&["a", "b"]), 1).unwrap();
        assert!((&m.a[0] - &a1).abs().max() < 1e-8 * a1.abs().max());
        assert!((&m.c - &c).abs().max() < 1e-8);
    }

    #[test]
    fn constant_column_is_rank_deficient() {
        let mut y = synth::simulate_var(&mut synth::rng(1), &DVector::zeros(2), &[], &DMatrix::identity(2, 2), 200, 0)
            .unwrap();
        y.column_mut(1).fill(3.0);
        assert_eq!(fit_var(&y, &ids(&["a", "b"]), 2, Criterion::Aic).unwrap_err(), Error::RankDeficient);
    }

    #[test]
    fn too_few_observations() {
        let y = DMatrix::from_fn(10, 2, |r, c| ((r * 3 + c * 5) % 7) as f64);
        assert!(matches!(fit_var(&y, &ids(&["a", "b"]), 3, Criterion::Aic), Err(Error::InsufficientObservations { .. })));
    }

    #[test]
    fn irf_geometric_and_decay() {
        let m = scalar(0.0, 0.5);
        let r = irf(&m, 3);
        let got: Vec<f64> = r.psi.iter().map(|p| p[(0, 0)]).collect();
        assert_eq!(got, vec![1.0, 0.5, 0.25, 0.125]);
        assert_eq!(irf(&m, 0).psi, vec![DMatrix::identity(1, 1)]);
        assert!(m.is_stable());
        assert!(irf(&m, 200).psi[200].norm() < 1e-50);
    }

    #[test]
    fn theta_is_cholesky_or_absent() {
        let sigma = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let m = VarModel::new(ids(&["a", "b"]), DVector::zeros(2), vec![DMatrix::identity(2, 2) * 0.3], sigma.clone())
            .unwrap();
        let r = irf(&m, 4);
        let th = r.theta().unwrap();
        assert_eq!(th[0], *r.cholesky_factor.as_ref().unwrap());
        assert!((&th[0] * th[0].transpose() - &sigma).abs().max() < 1e-10);

        let bad = VarModel { sigma: DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]), ..m };
        let r = irf(&bad, 4);
        assert_eq!(r.psi.len(), 5);
        assert_eq!(r.theta().unwrap_err(), Error::NonPositiveDefiniteSigma);
        assert_eq!(fevd(&bad, 3).unwrap_err(), Error::NonPositiveDefiniteSigma);
    }

    #[test]
    fn fevd_first_variable_and_rows() {
        let sigma = DMatrix::from_row_slice(2, 2, &[1.0, 0.4, 0.4, 2.0]);
        let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.2, 0.1, 0.3]);
        let m = VarModel::new(ids(&["a", "b"]), DVector::zeros(2), vec![a], sigma).unwrap();
        let f = fevd(&m, 10).unwrap();
        let first = f.for_variable("a").unwrap();
        assert_eq!(first[(0, 0)], 1.0);
        assert_eq!(first[(0, 1)], 0.0);
        for s in &f.shares {
            for row in s.row_iter() {
                assert!((row.sum() - 1.0).abs() < 1e-9);
                assert!(row.iter().all(|v| (0.0..=1.0).contains(v)));
            }
        }
    }

    #[test]
    fn fevd_diagonal_sigma_zero_a_is_identity() {
        let m = VarModel::new(
            ids(&["a", "b", "c"]),
            DVector::zeros(3),
            vec![DMatrix::zeros(3, 3)],
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 4.0, 9.0])),
        )
        .unwrap();
        let f = fevd(&m, 5).unwrap();
        for (i, s) in f.shares.iter().enumerate() {
            for h in 0..5 {
                for j in 0..3 {
                    assert_eq!(s[(h, j)], if i == j { 1.0 } else { 0.0 });
                }
            }
        }
    }

    #[test]
    fn forecast_cases() {
        let m = scalar(0.0, 0.5);
        let f = forecast(&m, &DMatrix::from_element(1, 1, 8.0), 3).unwrap();
        assert_eq!(f.as_slice(), &[4.0, 2.0, 1.0]);
        assert_eq!(forecast(&m, &DMatrix::from_element(1, 1, 8.0), 0).unwrap().nrows(), 0);
        assert!(matches!(forecast(&m, &DMatrix::zeros(0, 1), 2), Err(Error::ShapeMismatch(_))));

        let flat = VarModel::new(
            ids(&["a", "b"]),
            DVector::from_vec(vec![1.5, -2.0]),
            vec![DMatrix::zeros(2, 2)],
            DMatrix::identity(2, 2),
        )
        .unwrap();
        let f = forecast(&flat, &DMatrix::from_element(3, 2, 7.0), 4).unwrap();
        for r in f.row_iter() {
            assert_eq!(r.iter().copied().collect::<Vec<_>>(), vec![1.5, -2.0]);
        }
    }

    #[test]
    fn forecast_converges_to_unconditional_mean() {
        let m = VarModel::new(
            ids(&["a", "b"]),
            DVector::from_vec(vec![1.0, 0.5]),
            vec![DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.0, 0.3]), DMatrix::from_row_slice(2, 2, &[0.1, 0.0, 0.05, 0.1])],
            DMatrix::identity(2, 2),
        )
        .unwrap();
        let mu = m.unconditional_mean().unwrap();
        let f = forecast(&m, &DMatrix::from_element(2, 2, 40.0), 500).unwrap();
        assert!((f.row(499).transpose() - mu).abs().max() < 1e-6);
    }

    #[test]
    fn summary_json_and_text() {
        let y = synth::simulate_var(
            &mut synth::rng(5),
            &DVector::zeros(2),
            &[DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.0, 0.3])],
            &DMatrix::identity(2, 2),
            400,
            50,
        )
        .unwrap();
        let m = fit_var(&y, &ids(&["US_inflation_exp", "ARS_USD"]), 4, Criterion::Aic).unwrap();
        let s = m.summary().unwrap();
        assert_eq!(s.equations.len(), 2);
        assert_eq!(s.equations[0].rows[0].name, "const");
        assert_eq!(s.equations[0].rows[1].name, "L1.US_inflation_exp");
        let text = s.to_text();
        assert!(text.contains("Results for equation ARS_USD"));
        assert!(text.contains("Det(Omega_mle)"));
        let json = serde_json::to_string(&s).unwrap();
        let back: VarSummary = serde_json::from_str(&json).unwrap();
        assert_eq!(back.equations[1].rows.len(), 1 + 2 * m.p);
    }
}
