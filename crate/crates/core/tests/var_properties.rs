use bimonetary_core::econometrics::{fevd, fit_var_order, irf};
use bimonetary_core::{synth, VariableId};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

/// A stable VAR(1) draw: diagonal-dominant `A` with spectral radius below one.
fn sample(seed: u64, k: usize, diag: f64, off: f64) -> (DMatrix<f64>, Vec<VariableId>) {
    let a = DMatrix::from_fn(k, k, |i, j| if i == j { diag } else { off / k as f64 });
    let sigma = DMatrix::from_fn(k, k, |i, j| if i == j { 1.0 + i as f64 } else { 0.3 });
    let y = synth::simulate_var(&mut synth::rng(seed), &DVector::zeros(k), &[a], &sigma, 300, 100).unwrap();
    let names = (0..k).map(|i| VariableId::new(format!("y{i}"))).collect();
    (y, names)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn decomposition_identities(seed in any::<u64>(), k in 2usize..5, p in 1usize..3, diag in -0.6f64..0.6, off in -0.3f64..0.3) {
        let (y, names) = sample(seed, k, diag, off);
        let model = fit_var_order(&y, &names, p).unwrap();
        let r = irf(&model, 8);
        prop_assert_eq!(&r.psi[0], &DMatrix::<f64>::identity(k, k));
        let theta = r.theta().unwrap();
        let implied = &theta[0] * theta[0].transpose();
        for (a, b) in implied.iter().zip(model.sigma.iter()) {
            prop_assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0));
        }
        let f = fevd(&model, 8).unwrap();
        for shares in &f.shares {
            for row in shares.row_iter() {
                prop_assert!((row.sum() - 1.0).abs() <= 1e-10);
                prop_assert!(row.iter().all(|s| *s >= 0.0));
            }
        }
    }
}
