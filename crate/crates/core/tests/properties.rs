//! Property tests of the core invariants.

use excess_risk_core::bounds::{rate_lower, rate_upper, sharp_transform, vc_bounds, GeometricGrid};
use excess_risk_core::construct::{build_glue_network, build_mul_network};
use excess_risk_core::distribution::{cell_index, grid_point, AssouadParams, HardDistribution};
use excess_risk_core::network::{Architecture, NetworkSpec};
use excess_risk_core::surrogate::{binary_entropy, lipschitz_comparison, logistic, lower_convex_envelope, LossProfile};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eta_is_a_probability(x in -0.5f64..3.5, y in -0.5f64..3.5, bits in 0u8..16) {
        let sigma: Vec<bool> = (0..4).map(|i| bits >> i & 1 == 1).collect();
        let dist = HardDistribution::new(AssouadParams::new(2, 2, 4, 0.05, 1.0, 1.0, sigma).unwrap()).unwrap();
        let eta = dist.eta(&[x, y]);
        prop_assert!((0.0..=1.0).contains(&eta));
    }

    #[test]
    fn cell_index_contains_point(q in 1u32..9, x in 0.0f64..1.0, y in 0.0f64..1.0) {
        let i = cell_index(q, &[x, y]);
        prop_assert!(i < (q * q) as usize);
        let g = grid_point(q, 2, i);
        let half = 0.5 / q as f64 + 1e-12;
        prop_assert!((x - g[0]).abs() <= half && (y - g[1]).abs() <= half);
    }

    #[test]
    fn samples_carry_their_eta(seed in any::<u64>()) {
        let dist = HardDistribution::new(AssouadParams::new(2, 2, 2, 0.1, 1.0, 1.0, vec![true, false]).unwrap()).unwrap();
        for s in dist.sample(50, seed) {
            prop_assert_eq!(s.eta_at_x, dist.eta(&s.x));
            prop_assert!(s.y <= 1);
        }
    }

    #[test]
    fn parameter_count_formula(d in 1usize..6, widths in prop::collection::vec(1usize..12, 1..5)) {
        let arch = Architecture::new(d, widths.clone()).unwrap();
        let mut prev = d;
        let mut expected = 0;
        for &w in &widths {
            expected += prev * w + w;
            prev = w;
        }
        expected += prev + 1;
        prop_assert_eq!(arch.parameter_count(), expected);
        prop_assert_eq!(NetworkSpec::zeros(&arch, 1.0).unwrap().parameter_count(), expected);
    }

    #[test]
    fn forward_respects_clamp(seed in any::<u64>(), m in 0.1f64..10.0, x in prop::collection::vec(-50.0f64..50.0, 3)) {
        let arch = Architecture::new(3, vec![8, 8]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = NetworkSpec::glorot(&arch, m / 2.0, &mut rng).unwrap();
        let v = net.forward(&x).unwrap();
        prop_assert!(v.abs() <= m / 2.0);
    }

    #[test]
    fn mul_zero_identity(p in 1usize..200, m in 0.1f64..5.0, t in -1.0f64..1.0) {
        let mul = build_mul_network(m, p).unwrap();
        prop_assert_eq!(mul.net.forward(&[t * m, 0.0]).unwrap(), 0.0);
        prop_assert_eq!(mul.net.forward(&[0.0, t * m]).unwrap(), 0.0);
    }

    #[test]
    fn glue_identities(lo in -2.0f64..0.0, len in 0.5f64..3.0, frac in 0.0f64..1.0, y in 0.001f64..0.999, outside in 0.001f64..1.0) {
        let eps = 0.1 * len;
        let glue = build_glue_network(&[lo, lo], &[lo + len, lo + len], eps, 1.0).unwrap();
        let inner = lo + eps + frac * (len - 2.0 * eps);
        prop_assert_eq!(glue.net.forward(&[inner, lo + 0.5 * len, y]).unwrap(), y);
        prop_assert_eq!(glue.net.forward(&[lo + len + outside, inner, y]).unwrap(), 0.0);
    }

    #[test]
    fn convex_envelope_is_below_and_convex(ys in prop::collection::vec(-5.0f64..5.0, 3..40)) {
        let xs: Vec<f64> = (0..ys.len()).map(|i| i as f64).collect();
        let env = lower_convex_envelope(&xs, &ys);
        for (e, y) in env.iter().zip(&ys) {
            prop_assert!(*e <= *y + 1e-12);
        }
        for w in env.windows(3) {
            prop_assert!(w[0] + w[2] - 2.0 * w[1] >= -1e-9);
        }
    }

    #[test]
    fn logistic_loss_is_one_lipschitz(a in -30.0f64..30.0, b in -30.0f64..30.0) {
        prop_assert!((logistic(a) - logistic(b)).abs() <= (a - b).abs() + 1e-12);
    }

    #[test]
    fn lipschitz_comparison_holds(values in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0, 0.0f64..1.0, 0.01f64..1.0), 1..20)) {
        let total: f64 = values.iter().map(|v| v.3).sum();
        let f: Vec<f64> = values.iter().map(|v| v.0).collect();
        let g: Vec<f64> = values.iter().map(|v| v.1).collect();
        let atoms: Vec<(f64, f64)> = values.iter().map(|v| (v.3 / total, v.2)).collect();
        let (loss, func) = lipschitz_comparison(&f, &g, &atoms).unwrap();
        prop_assert!(loss <= func * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn entropy_is_below_log_two(eta in 0.0f64..=1.0) {
        prop_assert!(binary_entropy(eta) <= core::f64::consts::LN_2 + 1e-15);
    }

    #[test]
    fn loss_derivative_matches_difference(g in -10.0f64..10.0, y in 0u8..2) {
        let loss = LossProfile::new(8.0).unwrap();
        let h = 1e-6;
        let fd = (loss.value(g + h, y) - loss.value(g - h, y)) / (2.0 * h);
        prop_assert!((fd - loss.derivative(g, y)).abs() < 1e-7);
    }

    #[test]
    fn rate_ratio_is_log_power(n in 3.0f64..1e9, alpha in 0.0f64..6.0) {
        let ratio = rate_upper(n, alpha, 1.0) / rate_lower(n, alpha, 1.0);
        let expected = n.ln().powf((1.0 + alpha) / (2.0 + alpha));
        prop_assert!((ratio / expected - 1.0).abs() < 1e-12);
    }

    #[test]
    fn vc_lower_below_upper(l in 1u64..30, extra in 0u64..10_000) {
        let w = (l as f64 * core::f64::consts::E).ceil() as u64 + extra;
        let (lo, hi) = vc_bounds(w, l, 1.0, 1.0).unwrap();
        prop_assert!(lo <= hi);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn sharp_transform_of_powers(beta in 0.1f64..0.9, eps in 0.05f64..2.0) {
        // ψ(δ) = δ^β gives ψ^♯(ε) = ε^{−1/(1−β)}
        let exact = eps.powf(-1.0 / (1.0 - beta));
        prop_assume!(exact < 1e5);
        let v = sharp_transform(|d: f64| d.powf(beta), eps, GeometricGrid::default()).unwrap();
        prop_assert!((v / exact - 1.0).abs() < 1e-3);
    }
}
