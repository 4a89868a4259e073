//! Logistic surrogate loss and its calibration calculus.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Default number of θ points for the ψ-transform table.
pub const DEFAULT_PSI_GRID: usize = 4097;

/// `φ(t) = log(1 + e^{-t})`, stable for large `|t|`.
#[inline]
pub fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        math::ln_1p(math::exp(-t))
    } else {
        -t + math::ln_1p(math::exp(t))
    }
}

/// `φ'(t) = −1/(1 + e^{t})`.
#[inline]
pub fn logistic_derivative(t: f64) -> f64 {
    if t >= 0.0 {
        let e = math::exp(-t);
        -e / (1.0 + e)
    } else {
        -1.0 / (1.0 + math::exp(t))
    }
}

/// `φ•g(x, y) = φ((2y − 1) g(x))`.
#[inline]
pub fn phi_bullet(g_value: f64, y: u8) -> f64 {
    logistic(signed(g_value, y))
}

#[inline]
fn signed(g: f64, y: u8) -> f64 {
    if y == 1 {
        g
    } else {
        -g
    }
}

/// The logistic loss together with the output range `[−M/2, M/2]` of the
/// function class it is applied to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossProfile {
    /// Clamp bound `M`.
    pub clamp: f64,
}

impl LossProfile {
    pub fn new(clamp: f64) -> Result<Self> {
        if !(clamp > 0.0) {
            return Err(Error::Domain {
                what: "clamp bound",
                value: clamp,
            });
        }
        Ok(Self { clamp })
    }

    #[inline]
    pub fn value(&self, g: f64, y: u8) -> f64 {
        phi_bullet(g, y)
    }

    /// `∂/∂g φ((2y − 1) g)`.
    #[inline]
    pub fn derivative(&self, g: f64, y: u8) -> f64 {
        let s = if y == 1 { 1.0 } else { -1.0 };
        s * logistic_derivative(s * g)
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&eta) {
        Ok(())
    } else {
        Err(Error::Domain { what: "eta", value: eta })
    }
}

/// Binary entropy in nats with the limits `0` at the endpoints.
pub fn binary_entropy(eta: f64) -> f64 {
    let term = |p: f64| if p <= 0.0 { 0.0 } else { -p * math::ln(p) };
    term(eta) + term(1.0 - eta)
}

/// `H(η) = inf_α ηφ(α) + (1−η)φ(−α)`; for the logistic loss this is the binary
/// entropy, attained at `α = log(η/(1−η))`.
pub fn optimal_conditional_risk(eta: f64) -> Result<f64> {
    check_eta(eta)?;
    Ok(binary_entropy(eta))
}

/// `H⁻(η)`: the same infimum restricted to `α(2η − 1) ≤ 0`. For the logistic
/// loss the constrained optimum sits at `α = 0`, giving `log 2` for every `η`.
pub fn constrained_conditional_risk(eta: f64) -> Result<f64> {
    check_eta(eta)?;
    Ok(core::f64::consts::LN_2)
}

/// `f*_φ = log(η/(1−η))`.
pub fn phi_risk_minimizer(eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Domain {
            what: "eta (logit needs 0 < eta < 1)",
            value: eta,
        });
    }
    Ok(math::ln(eta / (1.0 - eta)))
}

/// `c · E_φ^{(1+α)/(s+α)}`. With `α = 0` this is Zhang's `c · E_φ^{1/s}`.
pub fn bartlett_excess_bound(excess_phi: f64, alpha: f64, s: f64, c: f64) -> Result<f64> {
    if !(excess_phi >= 0.0) {
        return Err(Error::Domain {
            what: "excess phi-risk",
            value: excess_phi,
        });
    }
    if !(s >= 1.0) || !(alpha >= 0.0) {
        return Err(Error::Domain {
            what: "comparison exponent s (>= 1) or alpha (>= 0)",
            value: if s >= 1.0 { alpha } else { s },
        });
    }
    Ok(c * math::powf(excess_phi, (1.0 + alpha) / (s + alpha)))
}

/// The constant `c` of `|1/2 − η|^2 ≤ c²(1 − H(η)/log 2)` for the logistic
/// loss, taken as the supremum of the ratio over an η grid (excluding 1/2).
pub fn zhang_constant(grid_points: usize) -> f64 {
    let n = grid_points.max(3);
    let mut best: f64 = 0.0;
    for k in 0..n {
        let eta = k as f64 / (n - 1) as f64;
        let gap = (0.5 - eta).abs();
        if gap == 0.0 {
            continue;
        }
        let denom = 1.0 - binary_entropy(eta) / core::f64::consts::LN_2;
        if denom > 0.0 {
            best = best.max(gap / math::sqrt(denom));
        }
    }
    best
}

/// Tabulated `H`, `H⁻` and the ψ-transform.
///
/// `ψ̃(θ) = H⁻((1+θ)/2) − H((1+θ)/2)` is sampled on a uniform θ grid of
/// `[−1, 1]` and `ψ` is its lower convex envelope (the biconjugate restricted
/// to the grid), obtained from a monotone-chain lower hull.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationTable {
    pub theta: Vec<f64>,
    pub eta: Vec<f64>,
    pub h: Vec<f64>,
    pub h_minus: Vec<f64>,
    pub psi_tilde: Vec<f64>,
    pub psi: Vec<f64>,
}

impl Default for CalibrationTable {
    fn default() -> Self {
        Self::new(DEFAULT_PSI_GRID)
    }
}

impl CalibrationTable {
    pub fn new(points: usize) -> Self {
        let n = points.max(3);
        let theta: Vec<f64> = (0..n).map(|k| -1.0 + 2.0 * k as f64 / (n - 1) as f64).collect();
        let eta: Vec<f64> = theta.iter().map(|t| ((1.0 + t) / 2.0).clamp(0.0, 1.0)).collect();
        let h: Vec<f64> = eta.iter().map(|&e| binary_entropy(e)).collect();
        let h_minus: Vec<f64> = eta.iter().map(|_| core::f64::consts::LN_2).collect();
        let psi_tilde: Vec<f64> = h_minus.iter().zip(&h).map(|(a, b)| a - b).collect();
        let psi = lower_convex_envelope(&theta, &psi_tilde);
        Self {
            theta,
            eta,
            h,
            h_minus,
            psi_tilde,
            psi,
        }
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    /// ψ(θ) by linear interpolation of the tabulated envelope.
    pub fn psi_at(&self, theta: f64) -> Result<f64> {
        if !(-1.0..=1.0).contains(&theta) {
            return Err(Error::Domain {
                what: "theta",
                value: theta,
            });
        }
        let n = self.theta.len();
        let pos = (theta + 1.0) / 2.0 * (n - 1) as f64;
        let k = (math::floor(pos) as usize).min(n - 2);
        let frac = pos - k as f64;
        Ok(self.psi[k] * (1.0 - frac) + self.psi[k + 1] * frac)
    }
}

/// ψ(θ) on the default table.
pub fn psi_transform(theta: f64) -> Result<f64> {
    CalibrationTable::default().psi_at(theta)
}

/// Values of the lower convex hull of the points `(xs[i], ys[i])` (sorted by
/// `x`) evaluated back at every `xs[i]`.
pub fn lower_convex_envelope(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let mut hull: Vec<usize> = Vec::with_capacity(xs.len());
    for i in 0..xs.len() {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // Drop b unless it lies strictly below the chord from a to i.
            let cross = (xs[b] - xs[a]) * (ys[i] - ys[a]) - (ys[b] - ys[a]) * (xs[i] - xs[a]);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let mut out = Vec::with_capacity(xs.len());
    let mut seg = 0;
    for i in 0..xs.len() {
        while seg + 1 < hull.len() - 1 && xs[hull[seg + 1]] < xs[i] {
            seg += 1;
        }
        if hull.len() == 1 {
            out.push(ys[hull[0]]);
            continue;
        }
        let (a, b) = (hull[seg], hull[seg + 1]);
        let t = if xs[b] == xs[a] { 0.0 } else { (xs[i] - xs[a]) / (xs[b] - xs[a]) };
        out.push(ys[a] + t * (ys[b] - ys[a]));
    }
    out
}

/// `[L̂(f) + L̂(g)]/2 − L̂((f+g)/2) − (e^{-M}/16)·d̂(f,g)²` on an empirical sample.
///
/// The modulus-of-convexity bound predicts this is nonnegative in the
/// population limit.
pub fn convexity_modulus_deficit(f: &[f64], g: &[f64], labels: &[u8], clamp: f64) -> Result<f64> {
    if f.len() != g.len() || f.len() != labels.len() {
        return Err(Error::Shape {
            expected: f.len(),
            got: if f.len() != g.len() { g.len() } else { labels.len() },
        });
    }
    if f.is_empty() {
        return Err(Error::Shape { expected: 1, got: 0 });
    }
    let half = clamp / 2.0;
    for &v in f.iter().chain(g) {
        if !(v.abs() <= half) {
            return Err(Error::Domain {
                what: "function value outside [-M/2, M/2]",
                value: v,
            });
        }
    }
    let n = f.len() as f64;
    let mut mid_gap = 0.0;
    let mut dist_sq = 0.0;
    for ((&a, &b), &y) in f.iter().zip(g).zip(labels) {
        mid_gap += 0.5 * (phi_bullet(a, y) + phi_bullet(b, y)) - phi_bullet(0.5 * (a + b), y);
        dist_sq += (a - b) * (a - b);
    }
    Ok(mid_gap / n - math::exp(-clamp) / 16.0 * dist_sq / n)
}

/// Exact `(E(φ•f − φ•g)², E(f − g)²)` on a finite-support law given as
/// `(probability, η)` atoms with function values `f`, `g` at each atom.
pub fn lipschitz_comparison(f: &[f64], g: &[f64], atoms: &[(f64, f64)]) -> Result<(f64, f64)> {
    if f.len() != atoms.len() || g.len() != atoms.len() {
        return Err(Error::Shape {
            expected: atoms.len(),
            got: if f.len() != atoms.len() { f.len() } else { g.len() },
        });
    }
    let mut loss_sq = 0.0;
    let mut func_sq = 0.0;
    for ((&a, &b), &(p, eta)) in f.iter().zip(g).zip(atoms) {
        check_eta(eta)?;
        let pos = logistic(a) - logistic(b);
        let neg = logistic(-a) - logistic(-b);
        loss_sq += p * (eta * pos * pos + (1.0 - eta) * neg * neg);
        func_sq += p * (a - b) * (a - b);
    }
    Ok((loss_sq, func_sq))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::LN_2;

    #[test]
    fn logistic_values() {
        assert!((logistic(0.0) - LN_2).abs() < 1e-16);
        assert!((logistic(50.0) - math::exp(-50.0)).abs() < 1e-30);
        assert!((logistic(-50.0) - 50.0).abs() < 1e-12);
        assert!(logistic(-1e6).is_finite());
        assert!(logistic(1e6) >= 0.0);
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        for &t in &[-30.0, -2.0, -0.1, 0.0, 0.7, 4.0, 25.0] {
            let h = 1e-6;
            let fd = (logistic(t + h) - logistic(t - h)) / (2.0 * h);
            assert!((fd - logistic_derivative(t)).abs() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn phi_bullet_examples() {
        assert_eq!(phi_bullet(1.2, 1), logistic(1.2));
        assert_eq!(phi_bullet(1.2, 0), logistic(-1.2));
        assert_eq!(phi_bullet(0.0, 0), LN_2);
        assert_eq!(phi_bullet(0.0, 1), LN_2);
        let loss = LossProfile::new(4.0).unwrap();
        assert!((loss.derivative(0.3, 0) - (-logistic_derivative(-0.3))).abs() < 1e-16);
        assert!(LossProfile::new(0.0).is_err());
    }

    #[test]
    fn conditional_risks() {
        assert!((optimal_conditional_risk(0.5).unwrap() - LN_2).abs() < 1e-16);
        assert_eq!(optimal_conditional_risk(0.0).unwrap(), 0.0);
        assert_eq!(optimal_conditional_risk(1.0).unwrap(), 0.0);
        assert!(optimal_conditional_risk(1.5).is_err());
        assert_eq!(constrained_conditional_risk(0.9).unwrap(), LN_2);
        assert!(constrained_conditional_risk(0.9).unwrap() > optimal_conditional_risk(0.9).unwrap());
    }

    #[test]
    fn minimizer_examples() {
        assert_eq!(phi_risk_minimizer(0.5).unwrap(), 0.0);
        assert!((phi_risk_minimizer(0.75).unwrap() - libm::log(3.0)).abs() < 1e-15);
        assert!(phi_risk_minimizer(0.0).is_err());
        assert!(phi_risk_minimizer(1.0).is_err());
        for k in 1..1000 {
            let eta = k as f64 / 1000.0;
            let f = phi_risk_minimizer(eta).unwrap();
            assert_eq!(f >= 0.0, eta >= 0.5);
        }
    }

    #[test]
    fn bartlett_examples() {
        assert_eq!(bartlett_excess_bound(0.0, 1.0, 2.0, 1.0).unwrap(), 0.0);
        assert!((bartlett_excess_bound(0.04, 0.0, 2.0, 1.0).unwrap() - 0.2).abs() < 1e-15);
        assert!((bartlett_excess_bound(0.001, 1.0, 2.0, 1.0).unwrap() - 0.01).abs() < 1e-12);
        assert!(bartlett_excess_bound(-1.0, 1.0, 2.0, 1.0).is_err());
        assert!(bartlett_excess_bound(0.1, 1.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn zhang_constant_tends_to_small_gap_limit() {
        // Near η = 1/2 the ratio tends to sqrt(log 2 / 2); elsewhere it is smaller.
        let c = zhang_constant(10_001);
        let limit = libm::sqrt(LN_2 / 2.0);
        assert!(c <= limit + 1e-9 && c > limit - 1e-4, "c = {c}");
    }

    #[test]
    fn psi_table_shape() {
        let t = CalibrationTable::default();
        assert_eq!(t.len(), DEFAULT_PSI_GRID);
        assert!(t.psi_at(0.0).unwrap().abs() < 1e-15);
        assert!((t.psi_at(1.0).unwrap() - LN_2).abs() < 1e-12);
        assert!(t.psi_at(1.5).is_err());
        for (a, b) in t.psi.iter().zip(&t.psi_tilde) {
            assert!(a <= &(b + 1e-15));
        }
    }

    #[test]
    fn envelope_of_nonconvex_points() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [0.0, 2.0, 1.0, 3.0];
        let env = lower_convex_envelope(&xs, &ys);
        assert_eq!(env, [0.0, 0.5, 1.0, 3.0]);
    }

    #[test]
    fn deficit_is_zero_for_equal_functions() {
        let f = [0.3, -1.0, 1.9];
        assert_eq!(convexity_modulus_deficit(&f, &f, &[1, 0, 1], 4.0).unwrap(), 0.0);
        assert!(convexity_modulus_deficit(&f, &[0.0, 0.0, 2.5], &[1, 0, 1], 4.0).is_err());
        assert!(convexity_modulus_deficit(&f, &f[..2], &[1, 0, 1], 4.0).is_err());
    }

    #[test]
    fn two_atom_population_deficit_is_nonnegative() {
        // Hand-computed oracle: atoms with probability 1/2 each, η = 0.8 and 0.3,
        // f = (1, −1), g = (−1, 2). The population functional averages over Y.
        let atoms = [(0.5, 0.8), (0.5, 0.3)];
        let f = [1.0, -1.0];
        let g = [-1.0, 2.0];
        let risk = |v: &[f64]| -> f64 {
            atoms
                .iter()
                .zip(v)
                .map(|(&(p, eta), &a)| p * (eta * logistic(a) + (1.0 - eta) * logistic(-a)))
                .sum()
        };
        let mid: alloc::vec::Vec<f64> = f.iter().zip(&g).map(|(a, b)| 0.5 * (a + b)).collect();
        let d2 = 0.5 * 4.0 + 0.5 * 9.0;
        let m = 4.0;
        let deficit = 0.5 * (risk(&f) + risk(&g)) - risk(&mid) - math::exp(-m) / 16.0 * d2;
        assert!(deficit >= 0.0, "deficit = {deficit}");
    }

    #[test]
    fn lipschitz_comparison_on_atoms() {
        let atoms = [(0.2, 0.1), (0.5, 0.5), (0.3, 0.95)];
        let (lhs, rhs) = lipschitz_comparison(&[0.1, -2.0, 3.0], &[1.0, 0.5, -1.0], &atoms).unwrap();
        assert!(lhs <= rhs);
        assert!(lipschitz_comparison(&[0.0], &[0.0], &atoms).is_err());
    }
}
