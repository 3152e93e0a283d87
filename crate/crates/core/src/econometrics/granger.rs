use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::distributions::f_sf;
use crate::linalg::least_squares_vec;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrangerLag {
    pub lag: usize,
    pub f_stat: f64,
    pub p_value: f64,
    pub df_num: usize,
    pub df_den: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrangerResult {
    pub lags: Vec<GrangerLag>,
}

impl GrangerResult {
    pub fn min_p_value(&self) -> f64 {
        self.lags.iter().map(|l| l.p_value).fold(f64::INFINITY, f64::min)
    }
}

/// SSR-based F test that lags of `x_cause` help predict `y_effect`.
///
/// For each `L` in `1..=max_lag` the restricted model regresses `y_t` on a
/// constant and `y_{t−1..t−L}`; the unrestricted one adds `x_{t−1..t−L}`.
/// Both use the `T − L` rows that have a full set of lags.
pub fn granger(x_cause: &[f64], y_effect: &[f64], max_lag: usize) -> Result<GrangerResult> {
    let t = y_effect.len();
    if x_cause.len() != t {
        return Err(Error::LengthMismatch { column: "x_cause".into(), expected: t, got: x_cause.len() });
    }
    if max_lag == 0 {
        return Err(Error::InvalidArgument("max_lag must be at least 1".into()));
    }
    if t <= 3 * max_lag + 3 {
        return Err(Error::InsufficientObservations { needed: 3 * max_lag + 4, got: t });
    }
    let lags = (1..=max_lag)
        .map(|l| {
            let n = t - l;
            let design = |with_x: bool| {
                let k = 1 + l + if with_x { l } else { 0 };
                DMatrix::from_fn(n, k, |r, c| {
                    let row = r + l;
                    match c {
                        0 => 1.0,
                        c if c <= l => y_effect[row - c],
                        c => x_cause[row - (c - l)],
                    }
                })
            };
            let y = DVector::from_fn(n, |r, _| y_effect[r + l]);
            let ssr_r = least_squares_vec(&design(false), &y)?.ssr(0);
            let ssr_u = least_squares_vec(&design(true), &y)?.ssr(0);
            let df_den = n - 2 * l - 1;
            let f_stat = if ssr_u > 0.0 {
                ((ssr_r - ssr_u) / l as f64) / (ssr_u / df_den as f64)
            } else {
                f64::INFINITY
            };
            Ok(GrangerLag { lag: l, f_stat, p_value: f_sf(f_stat, l as f64, df_den as f64), df_num: l, df_den })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GrangerResult { lags })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn causal_pair_is_detected() {
        let mut rng = synth::rng(synth::FIXTURE_SEED);
        let x = synth::white_noise(&mut rng, 300, 1.0);
        let noise = synth::white_noise(&mut rng, 300, 0.1);
        let y: Vec<f64> = (0..300).map(|t| if t == 0 { 0.0 } else { 0.8 * x[t - 1] } + noise[t]).collect();
        let r = granger(&x, &y, 3).unwrap();
        assert!(r.lags[0].p_value < 0.01);
        assert_eq!((r.lags[0].df_num, r.lags[0].df_den), (1, 296));
        assert_eq!((r.lags[2].df_num, r.lags[2].df_den), (3, 290));
    }

    #[test]
    fn independent_noise_is_not() {
        let mut rng = synth::rng(synth::FIXTURE_SEED);
        let x = synth::white_noise(&mut rng, 300, 1.0);
        let y = synth::white_noise(&mut rng, 300, 1.0);
        let r = granger(&x, &y, 5).unwrap();
        for l in &r.lags {
            assert!(l.p_value > 0.05, "{l:?}");
            assert!((0.0..=1.0).contains(&l.p_value));
        }
    }

    #[test]
    fn constant_cause_is_rank_deficient() {
        let y = synth::white_noise(&mut synth::rng(3), 50, 1.0);
        assert_eq!(granger(&[2.0; 50], &y, 2).unwrap_err(), Error::RankDeficient);
    }

    #[test]
    fn hand_fixture_matches_independent_regressions() {
        // 30 points; the oracle solves both regressions by normal equations
        // written out independently of the QR path.
        let x: Vec<f64> = (0..30).map(|i| ((i * 7 % 11) as f64) - 5.0).collect();
        let y: Vec<f64> = (0..30).map(|i| ((i * i % 13) as f64) * 0.5 + if i > 0 { 0.3 * x[i - 1] } else { 0.0 }).collect();
        let r = granger(&x, &y, 1).unwrap();

        let ssr = |cols: &[Vec<f64>], target: &[f64]| -> f64 {
            let k = cols.len();
            let mut a = vec![vec![0.0; k + 1]; k];
            for i in 0..k {
                for j in 0..k {
                    a[i][j] = cols[i].iter().zip(&cols[j]).map(|(p, q)| p * q).sum();
                }
                a[i][k] = cols[i].iter().zip(target).map(|(p, q)| p * q).sum();
            }
            // Gauss-Jordan with partial pivoting.
            for c in 0..k {
                let piv = (c..k).max_by(|&p, &q| a[p][c].abs().total_cmp(&a[q][c].abs())).unwrap();
                a.swap(c, piv);
                for rr in 0..k {
                    if rr != c {
                        let f = a[rr][c] / a[c][c];
                        let pivot_row = a[c].clone();
                        for (x, p) in a[rr][c..=k].iter_mut().zip(&pivot_row[c..=k]) {
                            *x -= f * p;
                        }
                    }
                }
            }
            let beta: Vec<f64> = (0..k).map(|i| a[i][k] / a[i][i]).collect();
            (0..target.len())
                .map(|t| target[t] - (0..k).map(|i| beta[i] * cols[i][t]).sum::<f64>())
                .map(|e| e * e)
                .sum()
        };
        let target: Vec<f64> = y[1..].to_vec();
        let ones = vec![1.0; 29];
        let ylag: Vec<f64> = y[..29].to_vec();
        let xlag: Vec<f64> = x[..29].to_vec();
        let ssr_r = ssr(&[ones.clone(), ylag.clone()], &target);
        let ssr_u = ssr(&[ones, ylag, xlag], &target);
        let f = (ssr_r - ssr_u) / (ssr_u / 26.0);
        assert!((r.lags[0].f_stat - f).abs() <= 1e-10 * f.abs().max(1.0), "{} vs {f}", r.lags[0].f_stat);
    }

    #[test]
    fn too_short() {
        assert!(matches!(granger(&[0.0; 9], &[0.0; 9], 2), Err(Error::InsufficientObservations { .. })));
    }
}
