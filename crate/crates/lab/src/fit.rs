//! Log-log fits of measured excess risk against `n` and their comparison with
//! the theoretical rate.

use std::collections::BTreeMap;

use excess_risk_core::bounds::{rate_exponent, RateCurve};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{LabError, LabResult};
use crate::io::RiskRow;

/// Minimum distinct sample sizes for a fit.
pub const MIN_FIT_SIZES: usize = 4;
/// Minimum successful seeds per sample size.
pub const MIN_FIT_SEEDS: usize = 3;
pub const DEFAULT_SLACK: f64 = 0.1;

/// Ordinary least squares of `log(median excess risk)` on `log n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual_se: f64,
    /// Two-sided 95% Student-t interval for the slope.
    pub band: (f64, f64),
    /// `−(1+α)/(3(2+α))`.
    pub theory_exponent: f64,
    pub log_correction: bool,
    pub alpha: f64,
    /// `(n, median excess risk)` per sample size, increasing in `n`.
    pub medians: Vec<(u64, f64)>,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let k = values.len();
    if k % 2 == 1 {
        values[k / 2]
    } else {
        0.5 * (values[k / 2 - 1] + values[k / 2])
    }
}

/// Median excess risk per `n` over non-failed rows, with the number of rows
/// that entered each median.
pub fn medians_by_n(rows: &[RiskRow]) -> Vec<(u64, f64, usize)> {
    let mut groups: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for row in rows.iter().filter(|r| !r.is_failed()) {
        groups.entry(row.n).or_default().push(row.excess_risk);
    }
    groups
        .into_iter()
        .map(|(n, mut v)| {
            let k = v.len();
            (n, median(&mut v), k)
        })
        .collect()
}

/// Fits the decay exponent of the median excess risk.
///
/// With `log_correction` the regressand is
/// `log(median) − ((1+α)/(2+α))·log log n`, which removes the logarithmic
/// factor of the upper rate. Sample sizes with fewer than three successful
/// seeds are ignored; at least four must remain.
pub fn fit_rate(rows: &[RiskRow], log_correction: bool, alpha: f64) -> LabResult<RateFit> {
    if !(alpha >= 0.0) {
        return Err(LabError::Fit(format!("alpha must be nonnegative, got {alpha}")));
    }
    let medians: Vec<(u64, f64)> = medians_by_n(rows)
        .into_iter()
        .filter(|&(_, _, k)| k >= MIN_FIT_SEEDS)
        .map(|(n, m, _)| (n, m))
        .collect();
    if medians.len() < MIN_FIT_SIZES {
        return Err(LabError::Fit(format!(
            "need {MIN_FIT_SIZES} sample sizes with {MIN_FIT_SEEDS}+ seeds, found {}",
            medians.len()
        )));
    }
    if let Some(&(n, m)) = medians.iter().find(|&&(_, m)| !(m > 0.0)) {
        return Err(LabError::Fit(format!("median excess risk at n = {n} is {m}; its log is undefined")));
    }
    if log_correction {
        if let Some(&(n, _)) = medians.iter().find(|&&(n, _)| n < 2) {
            return Err(LabError::Fit(format!("log correction needs n ≥ 2, found n = {n}")));
        }
    }
    let power = (1.0 + alpha) / (2.0 + alpha);
    let (xs, ys): (Vec<f64>, Vec<f64>) = medians
        .iter()
        .map(|&(n, m)| {
            let x = (n as f64).ln();
            let y = if log_correction { m.ln() - power * x.ln() } else { m.ln() };
            (x, y)
        })
        .unzip();
    let k = xs.len() as f64;
    let x_bar = xs.iter().sum::<f64>() / k;
    let y_bar = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - x_bar).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - x_bar) * (y - y_bar)).sum();
    let slope = sxy / sxx;
    let intercept = y_bar - slope * x_bar;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let dof = k - 2.0;
    let residual_se = (sse / dof).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof)
        .map_err(|e| LabError::Fit(e.to_string()))?
        .inverse_cdf(0.975);
    let half = t * residual_se / sxx.sqrt();
    Ok(RateFit {
        slope,
        intercept,
        residual_se,
        band: (slope - half, slope + half),
        theory_exponent: -rate_exponent(alpha),
        log_correction,
        alpha,
        medians,
    })
}

/// Result of [`compare_to_theory`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub pass: bool,
    pub slack: f64,
    /// `[theory − slack, theory + slack]`.
    pub window: (f64, f64),
    pub band: (f64, f64),
    /// `(n, median / lower(n))`.
    pub lower_ratio: Vec<(u64, f64)>,
    /// `(n, median / upper(n))`.
    pub upper_ratio: Vec<(u64, f64)>,
}

/// Passes when the fitted band meets the window of half-width `slack` around
/// the theoretical exponent.
pub fn compare_to_theory(fit: &RateFit, lower: &RateCurve, upper: &RateCurve, slack: f64) -> Verdict {
    let window = (fit.theory_exponent - slack, fit.theory_exponent + slack);
    let pass = fit.band.0 <= window.1 && fit.band.1 >= window.0;
    let ratios = |c: &RateCurve| fit.medians.iter().map(|&(n, m)| (n, m / c.eval(n as f64))).collect();
    Verdict {
        pass,
        slack,
        window,
        band: fit.band,
        lower_ratio: ratios(lower),
        upper_ratio: ratios(upper),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use excess_risk_core::bounds::RateKind;

    fn rows(f: impl Fn(f64) -> f64, sizes: &[u64], seeds: u64) -> Vec<RiskRow> {
        sizes
            .iter()
            .flat_map(|&n| {
                let f = &f;
                (0..seeds).map(move |s| RiskRow {
                    excess_risk: f(n as f64),
                    ..RiskRow::failed(n, s, 1, 3)
                })
            })
            .collect()
    }

    #[test]
    fn median_of_even_count() {
        assert_eq!(median(&mut [4.0, 1.0, 3.0, 2.0]), 2.5);
    }

    #[test]
    fn too_few_sizes_or_seeds() {
        let r = rows(|n| 1.0 / n, &[10, 20, 40], 3);
        assert!(matches!(fit_rate(&r, false, 1.0), Err(LabError::Fit(_))));
        let r = rows(|n| 1.0 / n, &[10, 20, 40, 80], 2);
        assert!(fit_rate(&r, false, 1.0).is_err());
    }

    #[test]
    fn zero_median_is_an_error() {
        let r = rows(|n| if n > 50.0 { 0.0 } else { 1.0 / n }, &[10, 20, 40, 80], 3);
        assert!(fit_rate(&r, false, 1.0).is_err());
    }

    #[test]
    fn failed_rows_are_ignored() {
        let mut r = rows(|n| n.powf(-0.5), &[10, 20, 40, 80], 3);
        r.push(RiskRow::failed(10, 3, 1, 3));
        let fit = fit_rate(&r, false, 1.0).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12);
    }

    #[test]
    fn verdict_examples() {
        let lower = RateCurve {
            alpha: 1.0,
            constant: 1.0,
            kind: RateKind::Lower,
        };
        let upper = RateCurve {
            kind: RateKind::Upper,
            ..lower
        };
        let mut fit = fit_rate(&rows(|n| n.powf(-0.22), &[100, 200, 400, 800], 3), false, 1.0).unwrap();
        assert!(compare_to_theory(&fit, &lower, &upper, DEFAULT_SLACK).pass);
        fit.slope = -0.5;
        fit.band = (-0.5, -0.5);
        let v = compare_to_theory(&fit, &lower, &upper, DEFAULT_SLACK);
        assert!(!v.pass);
        assert_eq!(v.lower_ratio.len(), 4);
    }
}
