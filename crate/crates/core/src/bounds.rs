//! Closed-form complexity bounds and rate curves.
//!
//! Universal constants default to 1 at call sites and are always passed
//! explicitly, so every value here is correct in shape, not in magnitude.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

fn domain(what: &'static str, value: f64) -> Error {
    Error::Domain { what, value }
}

/// `(c₁ W L log(W/L), c₀ W L log W)`: lower and upper bounds on the VC
/// dimension of ReLU networks with `W` parameters and depth `L`.
pub fn vc_bounds(w: u64, l: u64, c0: f64, c1: f64) -> Result<(f64, f64)> {
    if l == 0 {
        return Err(domain("depth L", 0.0));
    }
    if w < l {
        return Err(domain("parameter count W (must be at least L)", w as f64));
    }
    let (wf, lf) = (w as f64, l as f64);
    Ok((c1 * wf * lf * math::ln(wf / lf), c0 * wf * lf * math::ln(wf)))
}

/// `log(K V e^V (1/ε)^{r(V−1)})`: log of the `L_r` covering-number bound for
/// a class of VC index `V`.
pub fn covering_number_bound(vc_index: f64, epsilon: f64, r: f64, k: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(domain("covering radius epsilon", epsilon));
    }
    if !(vc_index > 0.0) {
        return Err(domain("VC index", vc_index));
    }
    if !(r >= 1.0) {
        return Err(domain("norm order r", r));
    }
    if !(k > 0.0) {
        return Err(domain("covering constant K", k));
    }
    Ok(math::ln(k) + math::ln(vc_index) + vc_index + r * (vc_index - 1.0) * math::ln(1.0 / epsilon))
}

/// Inputs of [`rademacher_bound`] for a VC-type class with entropy exponent
/// `v` and constant `a`, envelope norm `f_norm`, uniform bound `u` and `L₂`
/// radius `sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RademacherInputs {
    pub v: f64,
    pub n: f64,
    pub sigma: f64,
    pub a: f64,
    pub f_norm: f64,
    pub u: f64,
    pub c: f64,
}

impl RademacherInputs {
    fn log_term(&self) -> Result<f64> {
        if !(self.sigma > 0.0 && self.sigma <= self.f_norm) {
            return Err(domain("radius sigma (need 0 < sigma <= envelope norm)", self.sigma));
        }
        if !(self.n > 0.0) {
            return Err(domain("sample size n", self.n));
        }
        let arg = self.a * self.f_norm / self.sigma;
        if !(arg > 1.0) {
            return Err(domain("entropy log argument A·|F|/sigma", arg));
        }
        Ok(math::ln(arg))
    }

    /// Sample size at which the two branches of the bound are equal:
    /// `n = v U² log(A‖F‖/σ) / σ²`.
    pub fn crossover_n(&self) -> Result<f64> {
        let log = self.log_term()?;
        Ok(self.v * self.u * self.u * log / (self.sigma * self.sigma))
    }
}

/// `C max{√(v/n) σ √log(A‖F‖/σ), (vU/n) log(A‖F‖/σ)}`.
pub fn rademacher_bound(inp: &RademacherInputs) -> Result<f64> {
    let log = inp.log_term()?;
    let variance_branch = math::sqrt(inp.v / inp.n) * inp.sigma * math::sqrt(log);
    let range_branch = inp.v * inp.u / inp.n * log;
    Ok(inp.c * variance_branch.max(range_branch))
}

/// Geometric search grid of the ♯-transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Default for GeometricGrid {
    fn default() -> Self {
        Self {
            lo: 1e-12,
            hi: 1e6,
            points: 1 << 16,
        }
    }
}

impl GeometricGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.lo > 0.0 && self.hi > self.lo) || self.points < 2 {
            return Err(Error::InvalidParams(alloc::format!(
                "geometric grid needs 0 < lo < hi and at least 2 points, got [{}, {}] with {}",
                self.lo,
                self.hi,
                self.points
            )));
        }
        let step = math::ln(self.hi / self.lo) / (self.points - 1) as f64;
        Ok((0..self.points).map(|k| self.lo * math::exp(step * k as f64)).collect())
    }
}

/// `ψ^b(δ) = sup_{σ ≥ δ} ψ(σ)/σ` and `ψ^♯(ε) = inf{δ > 0 : ψ^b(δ) ≤ ε}` for a
/// fixed `ψ`, tabulated on a [`GeometricGrid`].
///
/// `ψ^b` is the suffix maximum of `ψ(δ_k)/δ_k` over the grid. `ψ^♯(ε)` takes
/// the first grid index whose suffix maximum is at most `ε` and bisects the
/// preceding grid cell on `ψ(δ)/δ ≤ ε`.
pub struct SharpTransform<F> {
    psi: F,
    grid: Vec<f64>,
    suffix: Vec<f64>,
}

impl<F: Fn(f64) -> f64> SharpTransform<F> {
    pub fn new(psi: F, grid: GeometricGrid) -> Result<Self> {
        let grid = grid.values()?;
        let mut suffix = alloc::vec![0.0; grid.len()];
        let mut running = f64::NEG_INFINITY;
        for k in (0..grid.len()).rev() {
            let value = psi(grid[k]);
            if !(value >= 0.0) {
                return Err(domain("psi must be nonnegative; got psi value", value));
            }
            running = running.max(value / grid[k]);
            suffix[k] = running;
        }
        Ok(Self { psi, grid, suffix })
    }

    /// Grid approximation of `ψ^b(δ)` for `δ` within the grid range.
    pub fn flat(&self, delta: f64) -> f64 {
        let k = self.grid.partition_point(|&g| g < delta);
        let here = (self.psi)(delta) / delta;
        self.suffix.get(k).map_or(here, |&s| s.max(here))
    }

    pub fn sharp(&self, epsilon: f64) -> Result<f64> {
        if !(epsilon > 0.0) {
            return Err(domain("sharp-transform level epsilon", epsilon));
        }
        let k = self.suffix.partition_point(|&s| s > epsilon);
        if k == self.grid.len() {
            return Err(Error::Unbounded { epsilon });
        }
        if k == 0 {
            return Ok(self.grid[0]);
        }
        let (mut lo, mut hi) = (self.grid[k - 1], self.grid[k]);
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if (self.psi)(mid) / mid <= epsilon {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }
}

/// One-shot `ψ^♯(ε)`; see [`SharpTransform`].
pub fn sharp_transform<F: Fn(f64) -> f64>(psi: F, epsilon: f64, grid: GeometricGrid) -> Result<f64> {
    SharpTransform::new(psi, grid)?.sharp(epsilon)
}

/// `K (max{ω♯ − τ, τα} + t/n + √(tτ/n))`: the high-probability bound on the
/// excess φ-risk of the empirical minimiser in terms of the fixed point `ω♯`
/// and the approximation error `τ`.
pub fn theorem1_bound(omega_sharp: f64, tau: f64, alpha: f64, t: f64, n: f64, k: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(domain("alpha (must lie in (0, 1])", alpha));
    }
    for (what, v) in [("omega sharp", omega_sharp), ("tau", tau), ("confidence t", t)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(domain(what, v));
        }
    }
    if !(n > 0.0) {
        return Err(domain("sample size n", n));
    }
    Ok(k * ((omega_sharp - tau).max(tau * alpha) + t / n + math::sqrt(t * tau / n)))
}

/// Exponent `(1+α)/(3(2+α))` of the excess-risk rate.
pub fn rate_exponent(alpha: f64) -> f64 {
    (1.0 + alpha) / (3.0 * (2.0 + alpha))
}

/// `C n^{−(1+α)/(3(2+α))} (log n)^{(1+α)/(2+α)}`.
pub fn rate_upper(n: f64, alpha: f64, c: f64) -> f64 {
    c * math::powf(n, -rate_exponent(alpha)) * math::powf(math::ln(n), (1.0 + alpha) / (2.0 + alpha))
}

/// `C n^{−(1+α)/(3(2+α))}`.
pub fn rate_lower(n: f64, alpha: f64, c: f64) -> f64 {
    c * math::powf(n, -rate_exponent(alpha))
}

/// `C n^{−1/3} log n`: the excess φ-risk rate.
pub fn rate_phi_upper(n: f64, c: f64) -> f64 {
    c * math::powf(n, -1.0 / 3.0) * math::ln(n)
}

/// `C N^{−1/2}`: sup-norm approximation error with `N` parameters.
pub fn approximation_rate(budget: f64, c: f64) -> Result<f64> {
    if !(budget >= 1.0) {
        return Err(domain("parameter budget", budget));
    }
    Ok(c / math::sqrt(budget))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateKind {
    Upper,
    Lower,
    PhiUpper,
}

impl RateKind {
    pub fn name(self) -> &'static str {
        match self {
            RateKind::Upper => "upper",
            RateKind::Lower => "lower",
            RateKind::PhiUpper => "phi_upper",
        }
    }
}

/// A theoretical rate `n ↦ value`.
///
/// The log factor of `Upper` and `PhiUpper` makes them increase for
/// `n < e³`; all kinds are strictly decreasing for `n > e³`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateCurve {
    pub alpha: f64,
    pub constant: f64,
    pub kind: RateKind,
}

impl RateCurve {
    pub fn eval(&self, n: f64) -> f64 {
        match self.kind {
            RateKind::Upper => rate_upper(n, self.alpha, self.constant),
            RateKind::Lower => rate_lower(n, self.alpha, self.constant),
            RateKind::PhiUpper => rate_phi_upper(n, self.constant),
        }
    }

    /// Polynomial exponent of the curve (ignoring log factors).
    pub fn exponent(&self) -> f64 {
        match self.kind {
            RateKind::Upper | RateKind::Lower => -rate_exponent(self.alpha),
            RateKind::PhiUpper => -1.0 / 3.0,
        }
    }

    /// `(n, value)` on `points` log-spaced sample sizes in `[n_min, n_max]`.
    pub fn sample(&self, n_min: f64, n_max: f64, points: usize) -> Result<Vec<(f64, f64)>> {
        if !(n_min >= 1.0 && n_max >= n_min) || points == 0 {
            return Err(domain("curve range n_min", n_min));
        }
        let ratio = if points == 1 {
            1.0
        } else {
            math::powf(n_max / n_min, 1.0 / (points - 1) as f64)
        };
        Ok((0..points)
            .map(|k| {
                let n = n_min * math::powf(ratio, k as f64);
                (n, self.eval(n))
            })
            .collect())
    }
}
