//! Planted-exponent round trips for the rate fit.

use excess_risk_core::bounds::{RateCurve, RateKind};
use excess_risk_lab::fit::{compare_to_theory, fit_rate, DEFAULT_SLACK};
use excess_risk_lab::io::RiskRow;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::Normal;

const SIZES: [u64; 8] = [128, 256, 512, 1024, 2048, 4096, 8192, 16384];

fn planted(f: impl Fn(f64) -> f64, seeds: u64, mut noise: impl FnMut() -> f64) -> Vec<RiskRow> {
    let mut rows = Vec::new();
    for &n in &SIZES {
        for s in 0..seeds {
            rows.push(RiskRow {
                excess_risk: f(n as f64) * noise(),
                se_excess: 0.0,
                ..RiskRow::failed(n, s, 10, 3)
            });
        }
    }
    rows
}

#[test]
fn exact_power_law_is_recovered() {
    let fit = fit_rate(&planted(|n| n.powf(-1.0 / 3.0), 3, || 1.0), false, 1.0).unwrap();
    assert!((fit.slope + 1.0 / 3.0).abs() < 1e-9, "{}", fit.slope);
    assert!(fit.band.0 <= fit.slope && fit.slope <= fit.band.1);
    assert!((fit.theory_exponent + 2.0 / 9.0).abs() < 1e-15);
}

#[test]
fn log_correction_removes_the_log_factor() {
    let rows = planted(|n| n.powf(-2.0 / 9.0) * n.ln().powf(2.0 / 3.0), 3, || 1.0);
    let fit = fit_rate(&rows, true, 1.0).unwrap();
    assert!((fit.slope + 2.0 / 9.0).abs() < 1e-6, "{}", fit.slope);
    assert!(fit.log_correction);
    let raw = fit_rate(&rows, false, 1.0).unwrap();
    assert!(raw.slope > fit.slope + 0.05);
}

#[test]
fn noisy_band_covers_the_planted_slope() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let normal = Normal::new(0.0, 0.1).unwrap();
    let trials = 100;
    let mut covered = 0;
    for _ in 0..trials {
        let rows = planted(|n| 0.3 * n.powf(-1.0 / 3.0), 5, || (1.0 + rng.sample(normal)).max(1e-3));
        let fit = fit_rate(&rows, false, 1.0).unwrap();
        assert!(fit.band.1 - fit.band.0 > 0.0);
        if fit.band.0 <= -1.0 / 3.0 && -1.0 / 3.0 <= fit.band.1 {
            covered += 1;
        }
    }
    assert!(covered >= 90, "coverage {covered}/{trials}");
}

#[test]
fn ratio_to_an_honest_lower_curve_is_monotone() {
    let lower = RateCurve {
        alpha: 1.0,
        constant: 0.5,
        kind: RateKind::Lower,
    };
    let upper = RateCurve {
        kind: RateKind::Upper,
        ..lower
    };
    // Truth decays like the upper curve, so median / lower grows like a log.
    let rows = planted(|n| upper.eval(n), 3, || 1.0);
    let fit = fit_rate(&rows, true, 1.0).unwrap();
    let verdict = compare_to_theory(&fit, &lower, &upper, DEFAULT_SLACK);
    assert!(verdict.pass);
    assert!(verdict.lower_ratio.windows(2).all(|w| w[1].1 > w[0].1));
    assert!(verdict.upper_ratio.iter().all(|&(_, r)| (r - 1.0).abs() < 1e-12));
}
