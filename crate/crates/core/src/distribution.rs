//! The grid-of-bumps family of hard classification problems.
//!
//! Every member `P_σ` shares the same marginal on `X`: mass `w` uniformly on
//! each ball `B(g_i, 1/(4q))` around the first `m` grid centres, and the
//! remaining mass `1 − m·w` uniformly on a residual box disjoint from the unit
//! cube. The regression function is `(1 + σ_i φ(q(x − g_i)))/2` on cell `i`,
//! `1/2` on the residual box and `0` elsewhere, with `φ(z) = q^{-r} h(‖z‖)` a
//! smooth radial bump.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::math;
use crate::quadrature::adaptive_simpson;

/// Default resolution of the tabulated bump profile on `[1/4, 1/2]`.
pub const DEFAULT_BUMP_RESOLUTION: usize = 1 << 14;

/// Largest grid `q^d` that [`grid_points`] will materialise.
pub const GRID_CAP: usize = 1 << 22;

/// Above this dimension, uniform ball sampling switches from rejection to the
/// Gaussian-direction method.
const REJECTION_MAX_DIM: usize = 10;

/// `−log h₁(3/8)`: the peak of the transition density is `e^{-64}`.
const BUMP_LOG_PEAK: f64 = 64.0;

/// Smooth density of the bump transition, supported on `(1/4, 1/2)`.
pub fn bump_density(t: f64) -> f64 {
    if t <= 0.25 || t >= 0.5 {
        0.0
    } else {
        math::exp(-1.0 / ((0.5 - t) * (t - 0.25)))
    }
}

/// The nonincreasing smooth profile `h`: `1` on `[0, 1/4]`, `0` on `[1/2, ∞)`.
///
/// `h` has no closed form. The normalisation `∫_{1/4}^{1/2} h₁` is computed by
/// adaptive Simpson quadrature and `h` itself is tabulated on a uniform grid of
/// `[1/4, 1/2]` and linearly interpolated; both plateaus are exact.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpProfile {
    normalization: f64,
    resolution: usize,
    table: Vec<f64>,
}

impl Default for BumpProfile {
    fn default() -> Self {
        Self::new(DEFAULT_BUMP_RESOLUTION)
    }
}

impl BumpProfile {
    pub fn new(resolution: usize) -> Self {
        let resolution = resolution.max(1);
        // h₁ peaks at e^{-64}; integrate h₁·e^{64} so tolerances are meaningful.
        let scaled = |t: f64| {
            if t <= 0.25 || t >= 0.5 {
                0.0
            } else {
                math::exp(BUMP_LOG_PEAK - 1.0 / ((0.5 - t) * (t - 0.25)))
            }
        };
        let scaled_norm = adaptive_simpson(&scaled, 0.25, 0.5, 1e-15, 50);
        let step = 0.25 / resolution as f64;
        // Tail integrals accumulated from the right end, one panel at a time.
        let mut table = vec![0.0; resolution + 1];
        let mut acc = 0.0;
        for k in (0..resolution).rev() {
            let a = 0.25 + k as f64 * step;
            let b = a + step;
            acc += adaptive_simpson(&scaled, a, b, 1e-17, 30);
            table[k] = acc / scaled_norm;
        }
        table[0] = 1.0;
        table[resolution] = 0.0;
        Self {
            normalization: scaled_norm * math::exp(-BUMP_LOG_PEAK),
            resolution,
            table,
        }
    }

    /// `∫_{1/4}^{1/2} h₁(t) dt`.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Evaluates `h(t)` for `t ≥ 0`.
    pub fn h(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain {
                what: "bump argument",
                value: t,
            });
        }
        Ok(self.eval(t))
    }

    #[inline]
    fn eval(&self, t: f64) -> f64 {
        if t <= 0.25 {
            return 1.0;
        }
        if t >= 0.5 {
            return 0.0;
        }
        let pos = (t - 0.25) * 4.0 * self.resolution as f64;
        let k = (math::floor(pos) as usize).min(self.resolution - 1);
        let frac = pos - k as f64;
        self.table[k] * (1.0 - frac) + self.table[k + 1] * frac
    }

    /// `φ(x) = q^{-r} h(‖x‖₂)`.
    pub fn phi(&self, x: &[f64], r: f64, q: u32) -> f64 {
        math::powf(q as f64, -r) * self.eval(math::norm2(x))
    }
}

/// `φ(x) = q^{-r} h(‖x‖₂)` with the given bump profile.
pub fn phi_bump(profile: &BumpProfile, x: &[f64], r: f64, q: u32) -> f64 {
    profile.phi(x, r, q)
}

/// Number of grid cells `q^d`, or a size error above [`GRID_CAP`].
pub fn grid_len(q: u32, d: usize) -> Result<usize> {
    let mut n: usize = 1;
    for _ in 0..d {
        n = n.checked_mul(q as usize).filter(|&v| v <= GRID_CAP).ok_or(Error::Size {
            what: "grid size q^d",
            cap: GRID_CAP,
        })?;
    }
    Ok(n)
}

/// Centre of grid cell `index` (dictionary order, first coordinate most
/// significant).
pub fn grid_point(q: u32, d: usize, index: usize) -> Vec<f64> {
    let mut point = vec![0.0; d];
    let mut rest = index;
    for j in (0..d).rev() {
        let k = rest % q as usize;
        rest /= q as usize;
        point[j] = (2 * k + 1) as f64 / (2.0 * q as f64);
    }
    point
}

/// All `q^d` centres `((2k₁+1)/(2q), …, (2k_d+1)/(2q))` in dictionary order.
pub fn grid_points(q: u32, d: usize) -> Result<Vec<Vec<f64>>> {
    if q == 0 || d == 0 {
        return Err(Error::InvalidParams(format!("grid needs q >= 1 and d >= 1 (q = {q}, d = {d})")));
    }
    let n = grid_len(q, d)?;
    Ok((0..n).map(|i| grid_point(q, d, i)).collect())
}

/// Index of the cell of `[0,1]^d` whose centre is nearest to `x`.
///
/// Points on a shared face go to the cell with the larger index; `x` is
/// assumed to lie in the unit cube.
pub fn cell_index(q: u32, x: &[f64]) -> usize {
    let mut index = 0usize;
    for &xi in x {
        let k = (math::floor(xi * q as f64) as i64).clamp(0, q as i64 - 1) as usize;
        index = index * q as usize + k;
    }
    index
}

/// Axis-aligned box `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxRegion {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxRegion {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::Shape {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        Ok(Self { lo, hi })
    }

    /// `[lo, hi]^d`.
    pub fn cube(d: usize, lo: f64, hi: f64) -> Self {
        Self {
            lo: vec![lo; d],
            hi: vec![hi; d],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| (b - a).max(0.0)).product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| *a <= *v && *v <= *b)
    }

    /// Whether the closed boxes share an interior point.
    pub fn interiors_overlap(&self, other: &BoxRegion) -> bool {
        self.lo
            .iter()
            .zip(&self.hi)
            .zip(other.lo.iter().zip(&other.hi))
            .all(|((a0, b0), (a1, b1))| a0.max(*a1) < b0.min(*b1))
    }

    /// The box shrunk by `eps` on every side.
    pub fn shrunk(&self, eps: f64) -> Self {
        Self {
            lo: self.lo.iter().map(|a| a + eps).collect(),
            hi: self.hi.iter().map(|b| b - eps).collect(),
        }
    }

    pub fn min_edge(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).fold(f64::INFINITY, f64::min)
    }
}

/// Parameters `(d, q, m, w, r, α, σ, A)` of one member of the family.
#[derive(Debug, Clone, PartialEq)]
pub struct AssouadParams {
    pub d: usize,
    pub q: u32,
    pub m: usize,
    pub w: f64,
    pub r: f64,
    pub alpha: f64,
    pub sigma: Vec<bool>,
    pub residual_region: BoxRegion,
}

/// Relative slack when checking `m·w` against its upper limits, so that the
/// canonical choice (which meets them with equality) is admissible in floats.
const ADMISSIBILITY_SLACK: f64 = 1e-12;

impl AssouadParams {
    /// Builds and validates a parameter set with residual region `[2,3]^d`.
    pub fn new(d: usize, q: u32, m: usize, w: f64, r: f64, alpha: f64, sigma: Vec<bool>) -> Result<Self> {
        let p = Self {
            d,
            q,
            m,
            w,
            r,
            alpha,
            sigma,
            residual_region: BoxRegion::cube(d, 2.0, 3.0),
        };
        p.validate()?;
        Ok(p)
    }

    /// The rate-optimal choice `m = q^d`, `w = q^{-αr-d}/2^α`, `r = 2d/(2+α)`.
    pub fn canonical(d: usize, q: u32, alpha: f64, sigma: Vec<bool>) -> Result<Self> {
        let m = grid_len(q, d)?;
        let r = canonical_r(d, alpha);
        let w = math::powf(q as f64, -alpha * r - d as f64) / math::powf(2.0, alpha);
        Self::new(d, q, m, w, r, alpha, sigma)
    }

    pub fn with_residual_region(mut self, region: BoxRegion) -> Result<Self> {
        self.residual_region = region;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::InvalidParams(msg));
        if self.d == 0 || self.q == 0 {
            return bad(format!("need d >= 1 and q >= 1 (d = {}, q = {})", self.d, self.q));
        }
        let cells = grid_len(self.q, self.d)?;
        if self.m == 0 || self.m > cells {
            return bad(format!("need 1 <= m <= q^d = {cells}, got m = {}", self.m));
        }
        if self.sigma.len() != self.m {
            return bad(format!("sigma has length {}, expected m = {}", self.sigma.len(), self.m));
        }
        if !(self.r > 0.0) || !(self.alpha >= 0.0) {
            return bad(format!("need r > 0 and alpha >= 0 (r = {}, alpha = {})", self.r, self.alpha));
        }
        let mass = self.m as f64 * self.w;
        if !(self.w > 0.0) || mass > 1.0 + ADMISSIBILITY_SLACK {
            return bad(format!("need 0 < w <= 1/m (w = {}, m = {})", self.w, self.m));
        }
        let margin_cap = self.margin_cap();
        if mass > margin_cap * (1.0 + ADMISSIBILITY_SLACK) {
            return bad(format!(
                "margin condition violated: m*w = {mass} > q^(-r*alpha)/2^alpha = {margin_cap}"
            ));
        }
        let region = &self.residual_region;
        if region.dim() != self.d {
            return Err(Error::Shape {
                expected: self.d,
                got: region.dim(),
            });
        }
        if !(region.volume() > 0.0) {
            return bad("residual region must have positive volume".into());
        }
        let unit = BoxRegion::cube(self.d, 0.0, 1.0);
        let disjoint = region.lo.iter().zip(&region.hi).any(|(a, b)| *a > 1.0 || *b < 0.0);
        if !disjoint || region.interiors_overlap(&unit) {
            return bad("residual region must be disjoint from [0,1]^d".into());
        }
        Ok(())
    }

    /// `q^{-r}`, the bump amplitude.
    pub fn amplitude(&self) -> f64 {
        math::powf(self.q as f64, -self.r)
    }

    /// `q^{-rα}/2^α`, the largest admissible active mass.
    pub fn margin_cap(&self) -> f64 {
        math::powf(self.amplitude() / 2.0, self.alpha)
    }

    /// Number of cells with `σ_i = 1`.
    pub fn active_count(&self) -> usize {
        self.sigma.iter().filter(|&&s| s).count()
    }

    /// Radius `1/(4q)` of the sampling balls.
    pub fn ball_radius(&self) -> f64 {
        0.25 / self.q as f64
    }
}

/// `r = 2d/(2+α)`.
pub fn canonical_r(d: usize, alpha: f64) -> f64 {
    2.0 * d as f64 / (2.0 + alpha)
}

/// `q = ⌊C̄ n^{1/(3r(2+α))}⌋`, at least 1.
pub fn canonical_q(n: u64, d: usize, alpha: f64, c_bar: f64) -> u32 {
    let r = canonical_r(d, alpha);
    let q = math::floor(c_bar * math::powf(n as f64, 1.0 / (3.0 * r * (2.0 + alpha))));
    (q.max(1.0)) as u32
}

/// One draw `(X, Y)` together with the exact `η(X)` used to draw `Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub x: Vec<f64>,
    pub y: u8,
    pub eta_at_x: f64,
}

/// A validated member `P_σ` of the family together with its bump profile.
#[derive(Debug, Clone)]
pub struct HardDistribution {
    params: AssouadParams,
    profile: BumpProfile,
    centers: Vec<Vec<f64>>,
}

impl HardDistribution {
    pub fn new(params: AssouadParams) -> Result<Self> {
        Self::with_profile(params, BumpProfile::default())
    }

    pub fn with_profile(params: AssouadParams, profile: BumpProfile) -> Result<Self> {
        params.validate()?;
        let centers = (0..params.m).map(|i| grid_point(params.q, params.d, i)).collect();
        Ok(Self { params, profile, centers })
    }

    pub fn params(&self) -> &AssouadParams {
        &self.params
    }

    pub fn profile(&self) -> &BumpProfile {
        &self.profile
    }

    /// Centres of the `m` active cells.
    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    /// The regression function `η_σ(x)`.
    pub fn eta(&self, x: &[f64]) -> f64 {
        let p = &self.params;
        if p.residual_region.contains(x) {
            return 0.5;
        }
        if x.len() != p.d || x.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return 0.0;
        }
        let i = cell_index(p.q, x);
        if i >= p.m {
            return 0.0;
        }
        if !p.sigma[i] {
            return 0.5;
        }
        let g = &self.centers[i];
        let qf = p.q as f64;
        let mut sq = 0.0;
        for (xj, gj) in x.iter().zip(g) {
            let z = qf * (xj - gj);
            sq += z * z;
        }
        let bump = p.amplitude() * self.profile.eval(math::sqrt(sq));
        0.5 * (1.0 + bump)
    }

    /// The logistic φ-risk minimiser `log(η/(1−η))`; `-∞` where `η = 0`.
    pub fn bayes_logit(&self, x: &[f64]) -> f64 {
        let eta = self.eta(x);
        if eta <= 0.0 {
            f64::NEG_INFINITY
        } else {
            math::ln(eta / (1.0 - eta))
        }
    }

    /// Draws one `X` from the marginal.
    pub fn draw_x<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let p = &self.params;
        let u: f64 = rng.gen();
        let active_mass = p.m as f64 * p.w;
        if u < active_mass {
            let i = ((u / p.w) as usize).min(p.m - 1);
            let mut x = uniform_in_ball(rng, p.d, p.ball_radius());
            for (xj, gj) in x.iter_mut().zip(&self.centers[i]) {
                *xj += gj;
            }
            x
        } else {
            let region = &p.residual_region;
            region
                .lo
                .iter()
                .zip(&region.hi)
                .map(|(a, b)| a + (b - a) * rng.gen::<f64>())
                .collect()
        }
    }

    /// `n` i.i.d. labelled draws; identical output for identical `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<LabeledSample> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let x = self.draw_x(&mut rng);
                let eta_at_x = self.eta(&x);
                let y = u8::from(rng.gen::<f64>() < eta_at_x);
                LabeledSample { x, y, eta_at_x }
            })
            .collect()
    }

    /// Exact Bayes risk `1/2 − (w q^{-r}/2)·|{i : σ_i = 1}|`.
    ///
    /// Exact because every sampling ball has radius `1/(4q)`, where the bump
    /// sits on its plateau `φ = q^{-r}`.
    pub fn bayes_risk(&self) -> f64 {
        let p = &self.params;
        0.5 - 0.5 * p.w * p.amplitude() * p.active_count() as f64
    }

    /// Exact `P_X(0 < |η − 1/2| ≤ t)`.
    ///
    /// Only cells with `σ_i = 1` carry a nonzero margin, so for `σ` all ones
    /// this is `m·w·1{t ≥ q^{-r}/2}`.
    pub fn margin_cdf(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain {
                what: "margin threshold",
                value: t,
            });
        }
        let p = &self.params;
        let half_amp = 0.5 * p.amplitude();
        Ok(if t >= half_amp { p.active_count() as f64 * p.w } else { 0.0 })
    }

    /// Whether `m·w ≤ (q^{-r}/2)^α`, i.e. the margin condition with `C₀ = 1`
    /// holds for every `σ`.
    pub fn margin_admissible(&self) -> bool {
        let p = &self.params;
        p.m as f64 * p.w <= p.margin_cap() * (1.0 + ADMISSIBILITY_SLACK)
    }

    /// Squared Hellinger distance between `P_σ` and the member that differs
    /// from it only in coordinate `i`: `2w(1 − √(1 − q^{-2r}))`.
    pub fn hellinger_sq(&self, i: usize) -> Result<f64> {
        let p = &self.params;
        if i >= p.m {
            return Err(Error::Domain {
                what: "flipped index",
                value: i as f64,
            });
        }
        Ok(hellinger_sq_closed_form(p.w, p.q, p.r))
    }

    /// `C q^{-r} m w (1 − q^{-r}√(n w))`; non-positive values are vacuous.
    pub fn lower_bound_value(&self, n: u64, constant: f64) -> f64 {
        let p = &self.params;
        let amp = p.amplitude();
        constant * amp * p.m as f64 * p.w * (1.0 - amp * math::sqrt(n as f64 * p.w))
    }
}

/// `2w(1 − √(1 − q^{-2r}))`.
pub fn hellinger_sq_closed_form(w: f64, q: u32, r: f64) -> f64 {
    let a2 = math::powf(q as f64, -2.0 * r);
    // 1 − √(1 − a²) written without cancellation.
    2.0 * w * a2 / (1.0 + math::sqrt(1.0 - a2))
}

/// Uniform draw from the centred ball of the given radius in `ℝ^d`.
pub fn uniform_in_ball<R: Rng + ?Sized>(rng: &mut R, d: usize, radius: f64) -> Vec<f64> {
    if d <= REJECTION_MAX_DIM {
        loop {
            let v: Vec<f64> = (0..d).map(|_| 2.0 * rng.gen::<f64>() - 1.0).collect();
            if v.iter().map(|a| a * a).sum::<f64>() <= 1.0 {
                return v.into_iter().map(|a| a * radius).collect();
            }
        }
    }
    let mut v: Vec<f64> = (0..d).map(|_| standard_normal(rng)).collect();
    let norm = math::norm2(&v);
    let scale = radius * math::powf(rng.gen::<f64>(), 1.0 / d as f64) / norm;
    for a in &mut v {
        *a *= scale;
    }
    v
}

/// Box–Muller standard normal.
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u1: f64 = rng.gen();
        if u1 > 0.0 {
            let u2: f64 = rng.gen();
            return math::sqrt(-2.0 * math::ln(u1)) * math::cos(core::f64::consts::TAU * u2);
        }
    }
}
