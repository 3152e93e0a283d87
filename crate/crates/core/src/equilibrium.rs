//! The "limit" exchange rate: per date, the `e` that best reconciles three
//! morphism targets in the least-squares sense, found by a one-dimensional
//! Nelder-Mead search and checked against the closed-form mean.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::panel::Panel;
use crate::{Error, Result};

pub const GDP_USA: &str = "Gdp_usa";
pub const GDP_ARG: &str = "Gdp_argentina";
pub const EMBI: &str = "Embi+ARG";
pub const ARS_USD: &str = "Historical Ars Usd";
pub const LONG_USD_RATE: &str = "Long Term Usd Rate";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumTargets {
    /// GDP ratio, USA over Argentina.
    pub t1: f64,
    /// EMBI times the observed rate.
    pub t2: f64,
    /// Long-term dollar rate.
    pub t3: f64,
}

impl EquilibriumTargets {
    pub fn new(t1: f64, t2: f64, t3: f64) -> Self {
        EquilibriumTargets { t1, t2, t3 }
    }

    pub fn from_inputs(gdp_usa: f64, gdp_arg: f64, embi: f64, ars_usd: f64, long_usd_rate: f64) -> Result<Self> {
        if gdp_arg.is_nan() || gdp_arg <= 0.0 {
            return Err(Error::InvalidArgument(format!("Argentine GDP must be positive, got {gdp_arg}")));
        }
        let t = EquilibriumTargets::new(gdp_usa / gdp_arg, embi * ars_usd, long_usd_rate);
        if [t.t1, t.t2, t.t3].iter().all(|v| v.is_finite()) {
            Ok(t)
        } else {
            Err(Error::InvalidArgument("non-finite equilibrium target".into()))
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.t1, self.t2, self.t3]
    }

    fn scaled(&self, lambda: f64) -> Self {
        EquilibriumTargets::new(self.t1 * lambda, self.t2 * lambda, self.t3 * lambda)
    }
}

/// `(e−t1)² + (e−t2)² + (e−t3)²`
pub fn penalty(e: f64, t: &EquilibriumTargets) -> f64 {
    (e - t.t1).powi(2) + (e - t.t2).powi(2) + (e - t.t3).powi(2)
}

/// The minimizer of `penalty`: the mean of the targets.
pub fn analytic_equilibrium(t: &EquilibriumTargets) -> f64 {
    (t.t1 + t.t2 + t.t3) / 3.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NelderMeadConfig {
    pub x_tolerance: f64,
    pub f_tolerance: f64,
    pub max_iterations: usize,
    /// `None` means `max(0.05·|x0|, 0.1)`.
    pub initial_step: Option<f64>,
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        NelderMeadConfig {
            x_tolerance: 1e-8,
            f_tolerance: 1e-12,
            max_iterations: 500,
            initial_step: None,
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
        }
    }
}

impl NelderMeadConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.x_tolerance > 0.0
            && self.f_tolerance > 0.0
            && self.reflection > 0.0
            && self.expansion > 1.0
            && self.expansion > self.reflection
            && (0.0..=0.5).contains(&self.contraction)
            && self.contraction > 0.0
            && self.shrink > 0.0
            && self.shrink < 1.0
            && self.initial_step.is_none_or(|s| s.is_finite() && s != 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid Nelder-Mead configuration: {self:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadResult {
    pub x_min: f64,
    pub f_min: f64,
    pub iterations: usize,
    /// `false` when `max_iterations` was reached before the tolerances.
    pub converged: bool,
}

/// Nelder-Mead on a 2-point simplex.
///
/// Stops when the simplex width is at most `x_tolerance·max(1, |x_best|)` and
/// the spread of its function values at most `f_tolerance·max(1, |f_best|)`.
/// The scale factors keep the stopping rule reachable when the minimum sits at
/// a large `x` or a large `f`, where rounding alone exceeds absolute bounds.
pub fn nelder_mead_1d(f: impl Fn(f64) -> f64, x0: f64, cfg: &NelderMeadConfig) -> Result<NelderMeadResult> {
    cfg.validate()?;
    let step = cfg.initial_step.unwrap_or_else(|| (0.05 * x0.abs()).max(0.1));
    let eval = |x: f64| -> Result<f64> {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteObjective(x))
        }
    };
    if !x0.is_finite() {
        return Err(Error::NonFiniteObjective(x0));
    }
    let mut best = (x0, eval(x0)?);
    let mut worst = (x0 + step, eval(x0 + step)?);
    let mut iterations = 0;
    loop {
        if worst.1 < best.1 {
            std::mem::swap(&mut best, &mut worst);
        }
        let width = (worst.0 - best.0).abs();
        let spread = (worst.1 - best.1).abs();
        if width <= cfg.x_tolerance * best.0.abs().max(1.0) && spread <= cfg.f_tolerance * best.1.abs().max(1.0) {
            return Ok(NelderMeadResult { x_min: best.0, f_min: best.1, iterations, converged: true });
        }
        if iterations >= cfg.max_iterations {
            return Ok(NelderMeadResult { x_min: best.0, f_min: best.1, iterations, converged: false });
        }
        iterations += 1;

        // With two points the centroid of the non-worst vertices is the best one.
        let c = best.0;
        let xr = c + cfg.reflection * (c - worst.0);
        let fr = f(xr);
        if fr < best.1 {
            let xe = c + cfg.expansion * (xr - c);
            let fe = f(xe);
            worst = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        // Outside contraction when the reflection beat the worst point,
        // inside contraction otherwise.
        let (xc, bound) = if fr < worst.1 {
            (c + cfg.contraction * (xr - c), fr)
        } else {
            (c + cfg.contraction * (worst.0 - c), worst.1)
        };
        let fc = f(xc);
        if fc < bound || (fc == bound && fr < worst.1) {
            worst = (xc, fc);
        } else {
            let xs = best.0 + cfg.shrink * (worst.0 - best.0);
            worst = (xs, eval(xs)?);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct EquilibriumOptions {
    pub nelder_mead: NelderMeadConfig,
    /// Divide EMBI by 100 before forming the risk-scaled target, for data that
    /// stores the spread in percent rather than basis points.
    pub embi_in_percent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumRow {
    pub date: NaiveDate,
    pub targets: EquilibriumTargets,
    pub e_star: f64,
    pub observed: f64,
    pub gap: f64,
    pub penalty_at_min: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkippedRow {
    pub date: NaiveDate,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct EquilibriumSeries {
    pub rows: Vec<EquilibriumRow>,
    pub skipped: Vec<SkippedRow>,
}

impl EquilibriumSeries {
    /// `Date, equilibrio_tipo_de_cambio, observed, gap, penalty`.
    pub fn to_panel(&self) -> Result<Panel> {
        let dates = self.rows.iter().map(|r| r.date).collect();
        let col = |f: fn(&EquilibriumRow) -> f64| self.rows.iter().map(f).collect::<Vec<f64>>();
        Panel::from_columns(
            dates,
            vec![
                ("equilibrio_tipo_de_cambio", col(|r| r.e_star)),
                ("observed", col(|r| r.observed)),
                ("gap", col(|r| r.gap)),
                ("penalty", col(|r| r.penalty_at_min)),
            ],
        )
    }
}

fn row_targets(panel: &Panel, i: usize, embi_in_percent: bool) -> std::result::Result<(EquilibriumTargets, f64), String> {
    let get = |name: &str| -> std::result::Result<f64, String> {
        panel
            .column(name)
            .map_err(|e| e.to_string())?
            .get(i)
            .ok_or_else(|| format!("missing {name}"))
    };
    let (gdp_usa, gdp_arg, embi, ars_usd, long_rate) =
        (get(GDP_USA)?, get(GDP_ARG)?, get(EMBI)?, get(ARS_USD)?, get(LONG_USD_RATE)?);
    let embi = if embi_in_percent { embi / 100.0 } else { embi };
    let targets = EquilibriumTargets::from_inputs(gdp_usa, gdp_arg, embi, ars_usd, long_rate).map_err(|e| e.to_string())?;
    Ok((targets, ars_usd))
}

/// Minimizes the penalty on every row, starting at the observed rate.
pub fn solve_panel(panel: &Panel, opts: &EquilibriumOptions) -> Result<EquilibriumSeries> {
    for name in [GDP_USA, GDP_ARG, EMBI, ARS_USD, LONG_USD_RATE] {
        panel.column(name)?;
    }
    opts.nelder_mead.validate()?;
    let mut out = EquilibriumSeries::default();
    for (i, &date) in panel.dates().iter().enumerate() {
        match row_targets(panel, i, opts.embi_in_percent) {
            Ok((targets, observed)) => {
                let r = nelder_mead_1d(|e| penalty(e, &targets), observed, &opts.nelder_mead)?;
                out.rows.push(EquilibriumRow {
                    date,
                    targets,
                    e_star: r.x_min,
                    observed,
                    gap: r.x_min - observed,
                    penalty_at_min: r.f_min,
                    iterations: r.iterations,
                    converged: r.converged,
                });
            }
            Err(reason) => out.skipped.push(SkippedRow { date, reason }),
        }
    }
    Ok(out)
}

/// `e*` for targets scaled by `lambda` — exposed for equivariance checks.
pub fn solve_scaled(t: &EquilibriumTargets, x0: f64, lambda: f64, cfg: &NelderMeadConfig) -> Result<f64> {
    let s = t.scaled(lambda);
    Ok(nelder_mead_1d(|e| penalty(e, &s), x0 * lambda, cfg)?.x_min)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub rows: usize,
    pub skipped: usize,
    pub mean_gap: f64,
    pub mean_abs_gap: f64,
    pub max_abs_gap: f64,
    /// Maximal runs of same-signed nonzero gaps; zeros neither start nor break a run.
    pub sign_runs: usize,
    pub positive_rows: usize,
    pub negative_rows: usize,
}

pub fn gap_report(result: &EquilibriumSeries) -> Result<GapReport> {
    let gaps: Vec<f64> = result.rows.iter().map(|r| r.gap).collect();
    if gaps.is_empty() {
        return Err(Error::EmptyResult);
    }
    let n = gaps.len() as f64;
    let mut sign_runs = 0;
    let mut last = 0.0f64;
    for g in gaps.iter().filter(|g| **g != 0.0) {
        if last == 0.0 || g.signum() != last {
            sign_runs += 1;
            last = g.signum();
        }
    }
    Ok(GapReport {
        rows: gaps.len(),
        skipped: result.skipped.len(),
        mean_gap: gaps.iter().sum::<f64>() / n,
        mean_abs_gap: gaps.iter().map(|g| g.abs()).sum::<f64>() / n,
        max_abs_gap: gaps.iter().fold(0.0, |m, g| m.max(g.abs())),
        sign_runs,
        positive_rows: gaps.iter().filter(|g| **g > 0.0).count(),
        negative_rows: gaps.iter().filter(|g| **g < 0.0).count(),
    })
}
