use serde::{Deserialize, Serialize};

use super::distributions::chi_square_sf;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LjungBox {
    pub q: f64,
    pub p_value: f64,
    pub lags: usize,
}

/// Sample autocorrelations `ρ̂_1..ρ̂_lags` around the sample mean.
pub fn autocorrelations(x: &[f64], lags: usize) -> Vec<f64> {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let d: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let denom: f64 = d.iter().map(|v| v * v).sum();
    (1..=lags)
        .map(|k| (k..n).map(|t| d[t] * d[t - k]).sum::<f64>() / denom)
        .collect()
}

/// `Q = T(T+2)·Σ ρ̂_k²/(T−k)` against `χ²(lags)`.
pub fn ljung_box(residual: &[f64], lags: usize) -> Result<LjungBox> {
    let t = residual.len();
    if lags == 0 {
        return Err(Error::InvalidArgument("Ljung-Box needs at least one lag".into()));
    }
    if t <= lags + 1 {
        return Err(Error::SeriesTooShort { needed: lags + 2, got: t });
    }
    let tf = t as f64;
    let q = tf * (tf + 2.0)
        * autocorrelations(residual, lags)
            .iter()
            .enumerate()
            .map(|(i, r)| r * r / (tf - (i + 1) as f64))
            .sum::<f64>();
    Ok(LjungBox { q, p_value: chi_square_sf(q, lags as f64), lags })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn iid_noise_passes() {
        let x = synth::white_noise(&mut synth::rng(synth::FIXTURE_SEED), 500, 1.0);
        assert!(ljung_box(&x, 10).unwrap().p_value > 0.05);
    }

    #[test]
    fn ar1_fails() {
        let x = synth::ar1(&mut synth::rng(synth::FIXTURE_SEED), 500, 0.9, 1.0);
        assert!(ljung_box(&x, 10).unwrap().p_value < 0.01);
    }

    #[test]
    fn alternating_series_by_hand() {
        let x: Vec<f64> = (0..20).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        // Mean 0, Σx² = 20, Σ x_t·x_{t−1} = −19 → ρ̂₁ = −0.95.
        let rho = -19.0 / 20.0;
        let q = 20.0 * 22.0 * rho * rho / 19.0;
        let r = ljung_box(&x, 1).unwrap();
        assert!((autocorrelations(&x, 1)[0] - rho).abs() < 1e-15);
        assert!((r.q - q).abs() < 1e-10);
    }

    #[test]
    fn too_short() {
        assert_eq!(ljung_box(&[1.0, 2.0], 1).unwrap_err(), Error::SeriesTooShort { needed: 3, got: 2 });
    }
}
