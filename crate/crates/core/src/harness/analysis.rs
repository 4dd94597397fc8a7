//! Post-processing statistics.

use nalgebra::{DMatrix, DVector};
use statrs::distribution::{Binomial, ContinuousCDF, DiscreteCDF, StudentsT};

use super::montecarlo::mean_std;

fn residual_sum_of_squares(design: DMatrix<f64>, y: &DVector<f64>) -> f64 {
    match design.clone().svd(true, true).solve(y, 1e-12) {
        Ok(c) => (y - design * c).norm_squared(),
        Err(_) => y.norm_squared(),
    }
}

fn trend_design(n: usize, dt: f64, degree: usize, extra: usize) -> DMatrix<f64> {
    let span = ((n - 1) as f64 * dt).max(dt);
    DMatrix::from_fn(n, degree + 1 + extra, |i, j| {
        if j <= degree {
            (2.0 * i as f64 * dt / span - 1.0).powi(j as i32)
        } else {
            0.0
        }
    })
}

/// Variance of a series sampled every `dt` seconds that a sinusoid of the
/// given period explains beyond a polynomial trend of degree `trend_degree`.
pub fn sinusoid_power(series: &[f64], dt: f64, period: f64, trend_degree: usize) -> f64 {
    let n = series.len();
    if n < 2 * (trend_degree + 3) {
        return 0.0;
    }
    let y = DVector::from_column_slice(series);
    let base = residual_sum_of_squares(trend_design(n, dt, trend_degree, 0), &y);
    let mut design = trend_design(n, dt, trend_degree, 2);
    let w = std::f64::consts::TAU / period;
    for i in 0..n {
        let t = i as f64 * dt;
        design[(i, trend_degree + 1)] = (w * t).sin();
        design[(i, trend_degree + 2)] = (w * t).cos();
    }
    (base - residual_sum_of_squares(design, &y)) / n as f64
}

/// Period (s) with the largest total sinusoid power across all series,
/// scanned over `[min_period, max_period]` in `steps` increments.
pub fn dominant_period(series: &[&[f64]], dt: f64, min_period: f64, max_period: f64, steps: usize, trend_degree: usize) -> f64 {
    let steps = steps.max(2);
    let mut best = (min_period, f64::NEG_INFINITY);
    for k in 0..steps {
        let p = min_period + (max_period - min_period) * k as f64 / (steps - 1) as f64;
        let power: f64 = series.iter().map(|s| sinusoid_power(s, dt, p, trend_degree)).sum();
        if power > best.1 {
            best = (p, power);
        }
    }
    best.0
}

/// Schuler period for a given gravity and Earth radius (s).
pub fn schuler_period(gravity: f64, radius: f64) -> f64 {
    std::f64::consts::TAU * (radius / gravity).sqrt()
}

/// One-sided paired t-test that `b` exceeds `a`. Returns the t statistic
/// and its p-value.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> (f64, f64) {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let n = d.len();
    let (m, s) = mean_std(&d);
    if n < 2 {
        return (f64::NAN, f64::NAN);
    }
    let t = if s > 0.0 { m / (s / (n as f64).sqrt()) } else { f64::INFINITY * m.signum() };
    let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("positive degrees of freedom");
    (t, 1.0 - dist.cdf(t))
}

/// One-sided sign test that negatives outnumber positives; zeros are
/// dropped. Returns the p-value.
pub fn sign_test_negative(xs: &[f64]) -> f64 {
    let neg = xs.iter().filter(|x| **x < 0.0).count() as u64;
    let pos = xs.iter().filter(|x| **x > 0.0).count() as u64;
    let n = neg + pos;
    if n == 0 {
        return 1.0;
    }
    let dist = Binomial::new(0.5, n).expect("valid binomial");
    // P(X >= neg)
    if neg == 0 {
        1.0
    } else {
        1.0 - dist.cdf(neg - 1)
    }
}
