use bimonetary_core::colimit::{dynamic_weights, pca_fit};
use bimonetary_core::{synth, Panel, VariableId};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn matrix() -> impl Strategy<Value = DMatrix<f64>> {
    (2usize..6, any::<u64>()).prop_flat_map(|(k, seed)| {
        (k + 5..60).prop_map(move |t| {
            let noise = synth::white_noise(&mut synth::rng(seed), t * k, 1.0);
            // Mixing makes the columns correlated and unequally scaled.
            let raw = DMatrix::from_vec(t, k, noise);
            let mix = DMatrix::from_fn(k, k, |i, j| if i == j { 1.0 + j as f64 } else { 0.4 });
            raw * mix
        })
    })
}

fn names(k: usize) -> Vec<VariableId> {
    (0..k).map(|i| VariableId::new(format!("x{i}"))).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn loadings_are_orthonormal_and_reconstruct(x in matrix(), standardize in any::<bool>()) {
        let k = x.ncols();
        let m = pca_fit(&x, &names(k), k, standardize).unwrap();
        let gram = m.loadings.transpose() * &m.loadings;
        prop_assert!((gram - DMatrix::<f64>::identity(k, k)).amax() <= 1e-9);
        let z = DMatrix::from_fn(x.nrows(), k, |r, c| (x[(r, c)] - m.column_means[c]) / m.column_scales[c]);
        let back = m.transform(&x).unwrap() * m.loadings.transpose();
        prop_assert!((back - &z).amax() <= 1e-8 * z.amax().max(1.0));
    }

    #[test]
    fn explained_ratios_are_sorted_fractions(x in matrix(), n in 1usize..6) {
        let k = x.ncols();
        let m = pca_fit(&x, &names(k), n.min(k), true).unwrap();
        let r = &m.explained_variance_ratio;
        prop_assert!(r.iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert!(r.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(r.iter().sum::<f64>() <= 1.0 + 1e-12);
    }

    #[test]
    fn ratios_ignore_column_order(x in matrix(), rot in 1usize..5) {
        let k = x.ncols();
        let perm: Vec<usize> = (0..k).map(|j| (j + rot) % k).collect();
        let y = DMatrix::from_fn(x.nrows(), k, |r, c| x[(r, perm[c])]);
        let a = pca_fit(&x, &names(k), k, true).unwrap();
        let b = pca_fit(&y, &names(k), k, true).unwrap();
        for (u, v) in a.explained_variance_ratio.iter().zip(&b.explained_variance_ratio) {
            prop_assert!((u - v).abs() <= 1e-9);
        }
    }

    #[test]
    fn dynamic_weights_are_a_distribution(x in matrix(), window in 3usize..20) {
        let (t, k) = x.shape();
        let cols: Vec<(String, Vec<f64>)> = (0..k).map(|j| (format!("x{j}"), x.column(j).iter().copied().collect())).collect();
        let dates = synth::daily_dates(chrono::NaiveDate::from_ymd_opt(2018, 1, 1).unwrap(), t);
        let panel = Panel::from_columns(dates, cols).unwrap();
        let w = dynamic_weights(&panel, &names(k)[1..], "x0", window, 3).unwrap();
        prop_assert!(w.values().all(|v| *v >= 0.0));
        prop_assert!((w.values().sum::<f64>() - 1.0).abs() <= 1e-12);
    }
}
