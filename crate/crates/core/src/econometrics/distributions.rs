//! Upper-tail probabilities used by the test statistics.

use statrs::distribution::{ChiSquared, ContinuousCDF, FisherSnedecor, Normal};

/// `P(X > q)` for `X ~ χ²(df)`.
pub fn chi_square_sf(q: f64, df: f64) -> f64 {
    if q <= 0.0 {
        return 1.0;
    }
    ChiSquared::new(df).map(|d| d.sf(q)).unwrap_or(f64::NAN).clamp(0.0, 1.0)
}

/// `P(X > f)` for `X ~ F(df_num, df_den)`.
pub fn f_sf(f: f64, df_num: f64, df_den: f64) -> f64 {
    if f <= 0.0 {
        return 1.0;
    }
    if f.is_infinite() {
        return 0.0;
    }
    FisherSnedecor::new(df_num, df_den).map(|d| d.sf(f)).unwrap_or(f64::NAN).clamp(0.0, 1.0)
}

pub fn normal_cdf(x: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("standard normal").cdf(x)
}
