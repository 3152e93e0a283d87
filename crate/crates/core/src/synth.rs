//! Seeded synthetic data: noise, random walks, AR and VAR processes, and a
//! plausible canonical panel for demos and tests.
//!
//! Every generator draws from a `ChaCha8Rng` seeded with a 64-bit integer, so
//! a seed fully determines the output on every platform.

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::panel::{Panel, CANONICAL_COLUMNS};
use crate::structural::{self, StructuralCoefficients};
use crate::{Error, Result};

/// Seed used by the committed test fixtures.
pub const FIXTURE_SEED: u64 = 0x5EED_2018_0101_0001;

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn white_noise(rng: &mut Rng, n: usize, sd: f64) -> Vec<f64> {
    (0..n).map(|_| sd * Distribution::<f64>::sample(&StandardNormal, &mut *rng)).collect()
}

pub fn cumsum(x: &[f64]) -> Vec<f64> {
    x.iter()
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect()
}

pub fn random_walk(rng: &mut Rng, n: usize, sd: f64) -> Vec<f64> {
    cumsum(&white_noise(rng, n, sd))
}

/// `x_t = φ·x_{t−1} + ε_t`, started at zero after a 100-step burn-in.
pub fn ar1(rng: &mut Rng, n: usize, phi: f64, sd: f64) -> Vec<f64> {
    let burn = 100;
    let eps = white_noise(rng, n + burn, sd);
    let mut x = 0.0;
    let mut out = Vec::with_capacity(n);
    for (t, e) in eps.into_iter().enumerate() {
        x = phi * x + e;
        if t >= burn {
            out.push(x);
        }
    }
    out
}

/// `n × K` draw from `y_t = c + Σ A_s·y_{t−s} + P·z_t` with `z_t` standard
/// normal and `P·Pᵀ = sigma`, after `burn` discarded steps from zero.
pub fn simulate_var(
    rng: &mut Rng,
    intercept: &DVector<f64>,
    coefs: &[DMatrix<f64>],
    sigma: &DMatrix<f64>,
    n: usize,
    burn: usize,
) -> Result<DMatrix<f64>> {
    let k = intercept.len();
    let chol = crate::linalg::cholesky_lower(sigma)?;
    let p = coefs.len();
    let total = n + burn;
    let mut hist: Vec<DVector<f64>> = vec![DVector::zeros(k); p];
    let mut out = DMatrix::zeros(n, k);
    for t in 0..total {
        let z = DVector::from_iterator(k, (0..k).map(|_| -> f64 { StandardNormal.sample(&mut *rng) }));
        let mut y = intercept + &chol * z;
        for (s, a) in coefs.iter().enumerate() {
            y += a * &hist[hist.len() - 1 - s];
        }
        if t >= burn {
            out.set_row(t - burn, &y.transpose());
        }
        if p > 0 {
            hist.remove(0);
            hist.push(y);
        }
    }
    Ok(out)
}

pub fn daily_dates(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    (0..n as u64).map(|i| start + chrono::Days::new(i)).collect()
}

fn default_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2018, 1, 1).expect("valid date")
}

/// A canonical 16-column daily panel whose levels resemble the 2018 data
/// (rates in percent, money stocks in billions, GDP in units, EMBI in basis
/// points). `E` is computed from the interest-parity formula so the panel is
/// internally consistent.
pub fn canonical_panel(seed: u64, rows: usize) -> Result<Panel> {
    if rows == 0 {
        return Err(Error::InvalidArgument("canonical panel needs at least one row".into()));
    }
    let mut r = rng(seed);
    let mut level = |start: f64, sd: f64, phi: f64| -> Vec<f64> {
        ar1(&mut r, rows, phi, sd).into_iter().map(|v| start + v).collect()
    };
    let usa_pi = level(1.9, 0.02, 0.98);
    let long_usd = level(2.58, 0.03, 0.995);
    let short_usd = level(1.41, 0.01, 0.995);
    let m2_usd = level(13861.8, 15.0, 0.999);
    let ipc_usa = level(0.54, 0.01, 0.9);
    let ars_usd = level(19.087, 0.4, 0.999);
    let lending = level(-5.441, 0.05, 0.99);
    let ipc_arg = level(1.76, 0.1, 0.9);
    let pi_exp = level(1.66, 0.05, 0.99);
    let long_int = level(40.31, 0.8, 0.995);
    let short_int = level(28.0, 0.5, 0.995);
    let m2 = level(32.7, 0.3, 0.999);
    let gdp_arg = level(5.25e11, 2.0e9, 0.999);
    let gdp_usa = level(2.07e13, 2.0e10, 0.999);
    let embi = level(361.0, 6.0, 0.995);
    let e: Vec<f64> = (0..rows)
        .map(|t| structural::devaluation_expectation(pi_exp[t], usa_pi[t], short_int[t], short_usd[t], embi[t]))
        .collect();
    let columns = vec![
        usa_pi, long_usd, short_usd, m2_usd, ipc_usa, ars_usd, lending, ipc_arg, pi_exp, long_int, short_int, m2,
        gdp_arg, gdp_usa, e, embi,
    ];
    Panel::from_columns(
        daily_dates(default_start(), rows),
        CANONICAL_COLUMNS.iter().copied().zip(columns).collect(),
    )
}

/// Canonical panel whose proxies satisfy the structural equations exactly.
///
/// Rates, expectations, lending and EMBI are random; money (`M2`) and income
/// (`Gdp_argentina`) solve the peso-demand and income equations jointly, and
/// `M2 Usd` and `Ipc Argentina` follow their equations with no noise.
pub fn structural_panel(seed: u64, rows: usize, c: &StructuralCoefficients) -> Result<Panel> {
    let mut base = canonical_panel(seed, rows)?;
    let col = |p: &Panel, n: &str| p.dense_column(n);
    let i_ars = col(&base, "Short Interest")?;
    let i_usd = col(&base, "Short Term Usd Rate")?;
    let pi_exp = col(&base, "Pi Exp")?;
    let pi_usa = col(&base, "Usa Pi Exp")?;
    let lending = col(&base, "Argentina Net Lending Borrowing")?;
    let det = 1.0 - c.alpha[0] * c.delta[0];
    if det.abs() < 1e-12 {
        return Err(Error::InvalidArgument("α1·δ1 = 1 leaves money undetermined".into()));
    }
    let mut m2 = Vec::with_capacity(rows);
    let mut gdp = Vec::with_capacity(rows);
    let mut m2_usd = Vec::with_capacity(rows);
    let mut ipc = Vec::with_capacity(rows);
    for t in 0..rows {
        // M = α1·(δ1·M + δ2·LB + δ0) + α2·i − α3·π + α0
        let rhs = c.alpha[0] * (c.delta[1] * lending[t] + c.intercepts.income) + c.alpha[1] * i_ars[t]
            - c.alpha[2] * pi_exp[t]
            + c.intercepts.demand_ars;
        let m = rhs / det;
        let y = structural::income(m, lending[t], c);
        m2.push(m);
        gdp.push(y);
        m2_usd.push(structural::demand_usd(y, i_usd[t], pi_usa[t], c));
        ipc.push(structural::inflation_forecast(pi_exp[t], m, c));
    }
    for (name, v) in [("M2", m2), ("Gdp_argentina", gdp), ("M2 Usd", m2_usd), ("Ipc Argentina", ipc)] {
        base.set_column(name, v.into())?;
    }
    Ok(base)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_reproducible() {
        assert_eq!(white_noise(&mut rng(1), 5, 1.0), white_noise(&mut rng(1), 5, 1.0));
        assert_ne!(white_noise(&mut rng(1), 5, 1.0), white_noise(&mut rng(2), 5, 1.0));
        assert_eq!(canonical_panel(3, 20).unwrap(), canonical_panel(3, 20).unwrap());
    }

    #[test]
    fn canonical_panel_shape() {
        let p = canonical_panel(11, 50).unwrap();
        assert_eq!(p.len(), 50);
        assert_eq!(p.width(), 16);
        assert!(p.is_complete());
        assert!(p.dense_column("Gdp_argentina").unwrap().iter().all(|v| *v > 0.0));
    }
}
