//! The distribution property suite behind `dist-check`.

use std::path::Path;

use excess_risk_core::distribution::HardDistribution;
use serde::Serialize;

use crate::config::DistCheckConfig;
use crate::error::{csv_err, io_err, LabResult};
use crate::io::write_samples;
use crate::sweep::mix;

pub const MARGIN_FILE: &str = "margin_cdf.csv";
pub const REPORT_FILE: &str = "dist_check.json";
pub const SAMPLES_FILE: &str = "samples.csv";

/// Standard errors allowed between the exact and Monte Carlo Bayes risk.
pub const BAYES_TOLERANCE_SE: f64 = 3.0;
/// Binomial standard errors allowed per margin-CDF grid point.
pub const MARGIN_TOLERANCE_SE: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginPoint {
    pub t: f64,
    pub exact: f64,
    pub empirical: f64,
    /// Binomial standard error `√(p(1−p)/n)` at the exact `p`.
    pub se: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistCheckReport {
    pub bayes_exact: f64,
    pub bayes_mc: f64,
    pub bayes_se: f64,
    pub bayes_pass: bool,
    pub margin: Vec<MarginPoint>,
    pub margin_pass: bool,
    pub hellinger_sq: f64,
    /// `2 w q^{-2r}`.
    pub hellinger_bound: f64,
    pub hellinger_pass: bool,
    pub admissible: bool,
    pub pass: bool,
}

/// Monte Carlo error of the Bayes classifier `1{η ≥ 1/2}` on labelled draws,
/// with its standard error.
pub fn bayes_risk_mc(dist: &HardDistribution, draws: usize, seed: u64) -> (f64, f64) {
    let errors = dist
        .sample(draws, seed)
        .iter()
        .filter(|s| s.y != u8::from(s.eta_at_x >= 0.5))
        .count();
    let p = errors as f64 / draws as f64;
    (p, (p * (1.0 - p) / draws as f64).sqrt())
}

/// Exact and empirical `P(0 < |η − 1/2| ≤ t)` at the midpoints of `grid`
/// equal cells of `[0, q^{-r}]`. Midpoints avoid the jump of the exact CDF.
pub fn margin_points(dist: &HardDistribution, draws: usize, grid: usize, seed: u64) -> LabResult<Vec<MarginPoint>> {
    let mut margins: Vec<f64> = dist
        .sample(draws, seed)
        .iter()
        .map(|s| (s.eta_at_x - 0.5).abs())
        .filter(|&m| m > 0.0)
        .collect();
    margins.sort_by(f64::total_cmp);
    let amp = dist.params().amplitude();
    (0..grid)
        .map(|k| {
            let t = (k as f64 + 0.5) * amp / grid as f64;
            let exact = dist.margin_cdf(t)?;
            let empirical = margins.partition_point(|&m| m <= t) as f64 / draws as f64;
            let se = (exact * (1.0 - exact) / draws as f64).sqrt();
            let pass = (empirical - exact).abs() <= MARGIN_TOLERANCE_SE * se;
            Ok(MarginPoint {
                t,
                exact,
                empirical,
                se,
                pass,
            })
        })
        .collect()
}

pub fn run_dist_check(cfg: &DistCheckConfig) -> LabResult<DistCheckReport> {
    let dist = cfg.distribution.distribution()?;
    let p = dist.params();
    let bayes_exact = dist.bayes_risk();
    let (bayes_mc, bayes_se) = bayes_risk_mc(&dist, cfg.bayes_draws, mix(cfg.seed ^ 1));
    let bayes_pass = (bayes_mc - bayes_exact).abs() <= BAYES_TOLERANCE_SE * bayes_se;
    let margin = margin_points(&dist, cfg.margin_draws, cfg.margin_grid, mix(cfg.seed ^ 2))?;
    let margin_pass = margin.iter().all(|m| m.pass);
    let hellinger_sq = dist.hellinger_sq(0)?;
    let hellinger_bound = 2.0 * p.w * (p.q as f64).powf(-2.0 * p.r);
    let hellinger_pass = hellinger_sq <= hellinger_bound;
    let admissible = dist.margin_admissible();
    Ok(DistCheckReport {
        bayes_exact,
        bayes_mc,
        bayes_se,
        bayes_pass,
        pass: bayes_pass && margin_pass && hellinger_pass,
        margin,
        margin_pass,
        hellinger_sq,
        hellinger_bound,
        hellinger_pass,
        admissible,
    })
}

/// Writes the margin table, the JSON report and, if requested, exported
/// samples into `dir`.
pub fn write_dist_check(dir: &Path, cfg: &DistCheckConfig, report: &DistCheckReport) -> LabResult<()> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(MARGIN_FILE);
    let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
    for m in &report.margin {
        w.serialize(m).map_err(csv_err(&path))?;
    }
    w.flush().map_err(io_err(&path))?;
    let path = dir.join(REPORT_FILE);
    let json = serde_json::to_string_pretty(report).expect("report serialises");
    std::fs::write(&path, json + "\n").map_err(io_err(&path))?;
    if cfg.export_samples > 0 {
        let dist = cfg.distribution.distribution()?;
        write_samples(&dir.join(SAMPLES_FILE), &dist.sample(cfg.export_samples, mix(cfg.seed ^ 3)))?;
    }
    Ok(())
}
