use bimonetary_core::{synth, Panel, Series};
use chrono::NaiveDate;
use proptest::prelude::*;

fn start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2018, 1, 1).unwrap()
}

fn finite(lo: f64, hi: f64, len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(lo..hi, len)
}

/// Textbook two-pass Pearson correlation.
fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

proptest! {
    #[test]
    fn csv_round_trip_of_cleaned_panels(
        rows in 2usize..40,
        cells in prop::collection::vec(prop::option::weighted(0.8, -1e6f64..1e6), 120),
    ) {
        let col = |k: usize| -> Series { (0..rows).map(|i| cells[(i * 3 + k) % cells.len()]).collect() };
        let mut columns = indexmap::IndexMap::new();
        for (k, name) in ["M2", "Embi+ARG", "Short Interest"].iter().enumerate() {
            columns.insert((*name).into(), col(k));
        }
        let panel = Panel::new(synth::daily_dates(start(), rows), columns).unwrap().clean();
        let mut buf = Vec::new();
        panel.write_csv_to(&mut buf).unwrap();
        let back = Panel::read_csv(buf.as_slice(), None).unwrap();
        prop_assert_eq!(back, panel);
    }

    #[test]
    fn minmax_rescale_hits_target_extremes_exactly(src in finite(-1e3, 1e3, 2..60), tgt in finite(-50.0, 50.0, 2..60)) {
        let s = Series::from_values(src.clone());
        let t = Series::from_values(tgt);
        prop_assume!(s.max().unwrap() > s.min().unwrap());
        let r = s.minmax_rescale(&t).unwrap();
        let argmin = src.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        let argmax = src.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        prop_assert_eq!(r.get(argmin), t.min());
        prop_assert_eq!(r.get(argmax), t.max());
        prop_assert!(r.present().all(|v| v >= t.min().unwrap() && v <= t.max().unwrap()));
    }

    #[test]
    fn full_window_rolling_corr_is_pearson(xy in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..80)) {
        let (x, y): (Vec<f64>, Vec<f64>) = xy.into_iter().unzip();
        let n = x.len();
        let corr = Series::from_values(x.clone()).rolling_corr(&Series::from_values(y.clone()), n, 2).unwrap();
        let expected = pearson(&x, &y);
        prop_assume!(expected.is_finite());
        approx::assert_abs_diff_eq!(corr.get(n - 1).unwrap(), expected, epsilon = 1e-12);
    }

    #[test]
    fn differencing_inverts_cumulative_sum(x in finite(-10.0, 10.0, 2..100)) {
        let level = synth::cumsum(&x);
        let scale = level.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let d = Series::from_values(level).difference(1).unwrap();
        prop_assert_eq!(d.len(), x.len() - 1);
        for (got, want) in d.present().zip(&x[1..]) {
            approx::assert_abs_diff_eq!(got, *want, epsilon = 1e-12 * scale);
        }
    }
}
