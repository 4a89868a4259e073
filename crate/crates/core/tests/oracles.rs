//! Independent numerical oracles for the closed forms used by the core.

use core::f64::consts::LN_2;

use excess_risk_core::distribution::LabeledSample;
use excess_risk_core::distribution::{bump_density, hellinger_sq_closed_form, AssouadParams, BumpProfile, HardDistribution};
use excess_risk_core::network::{Architecture, NetworkSpec};
use excess_risk_core::surrogate::{logistic, optimal_conditional_risk, CalibrationTable, LossProfile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Composite 8-point Gauss–Legendre rule.
fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    const X: [f64; 4] = [
        0.183_434_642_495_649_8,
        0.525_532_409_916_329,
        0.796_666_477_413_626_7,
        0.960_289_856_497_536_3,
    ];
    const W: [f64; 4] = [
        0.362_683_783_378_362,
        0.313_706_645_877_887_3,
        0.222_381_034_453_374_5,
        0.101_228_536_290_376_3,
    ];
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let mid = a + (k as f64 + 0.5) * h;
        for (x, w) in X.iter().zip(W) {
            total += w * (f(mid - 0.5 * h * x) + f(mid + 0.5 * h * x));
        }
    }
    0.5 * h * total
}

#[test]
fn bump_profile_matches_gauss_legendre() {
    let profile = BumpProfile::default();
    let norm = gauss_legendre(bump_density, 0.25, 0.5, 400);
    assert!((profile.normalization() - norm).abs() < 1e-12 * norm.max(1e-300) + 1e-18);
    // the transition density is symmetric about 3/8
    assert!((profile.h(0.375).unwrap() - 0.5).abs() < 1e-9);
    for &t in &[0.26, 0.3, 0.33, 0.41, 0.47, 0.49] {
        let tail = gauss_legendre(bump_density, t, 0.5, 400) / norm;
        assert!((profile.h(t).unwrap() - tail).abs() < 1e-8, "t = {t}");
    }
}

fn worked_example() -> HardDistribution {
    HardDistribution::new(AssouadParams::new(2, 2, 2, 0.1, 1.0, 1.0, vec![true, true]).unwrap()).unwrap()
}

#[test]
fn bayes_risk_matches_monte_carlo() {
    let dist = worked_example();
    assert!((dist.bayes_risk() - 0.45).abs() < 1e-15);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let n = 200_000;
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let x = dist.draw_x(&mut rng);
        let e = dist.eta(&x);
        let v = e.min(1.0 - e);
        s += v;
        s2 += v * v;
    }
    let mean = s / n as f64;
    let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
    assert!((mean - 0.45).abs() <= 3.0 * se + 1e-12, "{mean} ± {se}");
}

#[test]
fn hellinger_matches_quadrature_over_the_ball() {
    let dist = worked_example();
    let p = dist.params();
    let g = &dist.centers()[0];
    let radius = p.ball_radius();
    // midpoint rule over the ball: average of Σ_y (√P(y|x) − √P'(y|x))²
    let k = 400;
    let (mut total, mut count) = (0.0, 0usize);
    for i in 0..k {
        for j in 0..k {
            let u = -radius + (i as f64 + 0.5) * 2.0 * radius / k as f64;
            let v = -radius + (j as f64 + 0.5) * 2.0 * radius / k as f64;
            if u * u + v * v > radius * radius {
                continue;
            }
            let eta = dist.eta(&[g[0] + u, g[1] + v]);
            let flipped = 1.0 - eta;
            total += (eta.sqrt() - flipped.sqrt()).powi(2) + ((1.0 - eta).sqrt() - (1.0 - flipped).sqrt()).powi(2);
            count += 1;
        }
    }
    let numeric = p.w * total / count as f64;
    let closed = dist.hellinger_sq(0).unwrap();
    assert!((numeric - closed).abs() < 1e-9);
    assert!((closed - 0.026_794_9).abs() < 1e-6);
    assert!(closed <= 2.0 * 0.1 * 0.25);
    assert_eq!(closed, hellinger_sq_closed_form(0.1, 2, 1.0));
}

fn golden_section_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    for _ in 0..200 {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - ratio * (b - a);
        d = a + ratio * (b - a);
    }
    f(0.5 * (a + b))
}

#[test]
fn conditional_risk_matches_direct_minimisation() {
    for k in 1..200 {
        let eta = k as f64 / 200.0;
        let direct = golden_section_min(|a| eta * logistic(a) + (1.0 - eta) * logistic(-a), -40.0, 40.0);
        assert!((optimal_conditional_risk(eta).unwrap() - direct).abs() < 1e-8, "eta = {eta}");
    }
}

#[test]
fn psi_transform_shape() {
    let table = CalibrationTable::new(1001);
    assert!(table.psi_at(0.0).unwrap().abs() < 1e-15);
    assert!((table.psi_at(1.0).unwrap() - LN_2).abs() < 1e-6);
    for w in table.psi.windows(3) {
        assert!(w[0] + w[2] - 2.0 * w[1] >= -1e-12);
    }
    for (h, hm) in table
        .h
        .iter()
        .zip(&table.h_minus)
        .zip(&table.eta)
        .filter(|(_, e)| (**e - 0.5).abs() > 1e-12)
        .map(|(p, _)| p)
    {
        assert!(hm - h > 0.0);
    }
}

/// Smallest `|pre-activation|` of any hidden unit over the given inputs.
fn min_abs_preactivation(net: &NetworkSpec, xs: &[Vec<f64>]) -> f64 {
    let layers = net.layers();
    let mut best = f64::INFINITY;
    for x in xs {
        let mut a = x.clone();
        for l in &layers[..layers.len() - 1] {
            let z: Vec<f64> = (0..l.outputs)
                .map(|o| l.bias[o] + (0..l.inputs).map(|i| l.weight(o, i) * a[i]).sum::<f64>())
                .collect();
            best = z.iter().fold(best, |m, v| m.min(v.abs()));
            a = z.into_iter().map(|v| v.max(0.0)).collect();
        }
    }
    best
}

#[test]
fn gradient_matches_central_differences() {
    let loss = LossProfile::new(40.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for widths in [vec![3], vec![4, 3], vec![5, 5, 2]] {
        let arch = Architecture::new(2, widths).unwrap();
        let batch: Vec<LabeledSample> = (0..6)
            .map(|_| LabeledSample {
                x: vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
                y: rng.gen_range(0..2),
                eta_at_x: 0.5,
            })
            .collect();
        let xs: Vec<Vec<f64>> = batch.iter().map(|s| s.x.clone()).collect();
        let mut net = NetworkSpec::glorot(&arch, 20.0, &mut rng).unwrap();
        while min_abs_preactivation(&net, &xs) < 1e-2 {
            net = NetworkSpec::glorot(&arch, 20.0, &mut rng).unwrap();
        }
        let (grad, _) = net.gradient(&batch, &loss).unwrap();
        let flat = grad.flat();
        let params = net.parameters();
        for _ in 0..10 {
            let k = rng.gen_range(0..params.len());
            let h = 1e-6;
            let mut probe = net.clone();
            let mut p = params.clone();
            p[k] += h;
            probe.set_parameters(&p).unwrap();
            let up = probe.empirical_phi_risk(&batch, &loss).unwrap();
            p[k] -= 2.0 * h;
            probe.set_parameters(&p).unwrap();
            let down = probe.empirical_phi_risk(&batch, &loss).unwrap();
            let fd = (up - down) / (2.0 * h);
            assert!((fd - flat[k]).abs() <= 1e-5 * flat[k].abs().max(1e-3), "{fd} vs {}", flat[k]);
        }
    }
}
