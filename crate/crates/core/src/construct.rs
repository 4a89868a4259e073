//! Explicit ReLU network constructions with certified sup-norm error bounds.
//!
//! - [`build_mul_network`]: approximate multiplication in `F(9, (2, p, …, p, 1))`
//!   with exact zero-product identity.
//! - [`build_glue_network`]: the gluing gate `h_ε(x, y) = C₁σ(Σ t_i(x_i) + σ(y)/C₁ − d)`.
//! - [`compose_local_approximants`]: sums gated local approximants over boxes.
//! - [`bump_local_approximant`] / [`bayes_logit_network`]: ReLU approximations
//!   of the logistic φ-risk minimiser of a [`HardDistribution`].
//!
//! Every network accumulates pre-activations bias-first in input order (see
//! [`crate::network::Layer`]); the exact identities below depend on it.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distribution::{BoxRegion, HardDistribution};
use crate::error::{Error, Result};
use crate::math;
use crate::network::{Layer, NetworkSpec};

/// Seed of the feature draws inside [`build_mul_network`].
pub const MUL_FEATURE_SEED: u64 = 0x6d75_6c74;

/// Number of seeded knot draws [`build_mul_network`] selects from.
pub const MUL_CANDIDATES: u64 = 8;

/// Hidden depth of the multiplication network.
pub const MUL_DEPTH: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Mul,
    Glue,
    BumpApprox,
    Composed,
}

/// A constructed network with the sup-norm error it is guaranteed to achieve
/// on its stated domain.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstructiveNet {
    pub net: NetworkSpec,
    pub provenance: Provenance,
    pub error_bound: f64,
    /// Bound on `|output|` over the stated domain.
    pub output_bound: f64,
    /// Lebesgue volume excluded by the ε-shrinking (composed nets only).
    pub band_volume: f64,
    pub warnings: Vec<String>,
}

impl ConstructiveNet {
    fn new(net: NetworkSpec, provenance: Provenance, error_bound: f64, output_bound: f64) -> Self {
        Self {
            net,
            provenance,
            error_bound,
            output_bound,
            band_volume: 0.0,
            warnings: Vec::new(),
        }
    }
}

fn identity_rows(layer: &mut Layer, out_offset: usize, in_offset: usize, count: usize, scale: f64) {
    for k in 0..count {
        layer.set_weight(out_offset + k, in_offset + k, scale);
    }
}

/// Monte Carlo approximation `s(t) = (2T/k) Σ_j σ(t − b_j)` of
/// `t² = ∫_0^T 2σ(t − b) db` on `[0, T]`.
///
/// The `k = 2N` knots come in `N` antithetic pairs `c_s ± u` spread over at
/// most [`SQUARE_STRATA`] strata, stratum `s` receiving a length proportional
/// to its pair count. Each stratum then integrates `2(t − b)` exactly for `t`
/// past it, so the error vanishes at stratum ends and inside a stratum is the
/// fluctuation of an empirical process, of order `k^{-1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareFeatures {
    pub range: f64,
    pub knots: Vec<f64>,
    pub coefficient: f64,
}

/// Maximal number of strata of [`SquareFeatures`].
pub const SQUARE_STRATA: usize = 4;

impl SquareFeatures {
    /// `pairs ≥ 1` antithetic knot pairs on `[0, range]`.
    pub fn draw(range: f64, pairs: usize, seed: u64) -> Self {
        let pairs = pairs.max(1);
        let strata = pairs.min(SQUARE_STRATA);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut knots = Vec::with_capacity(2 * pairs);
        let mut start = 0.0;
        for s in 0..strata {
            let n_s = pairs / strata + usize::from(s < pairs % strata);
            let len = range * n_s as f64 / pairs as f64;
            let centre = start + 0.5 * len;
            for _ in 0..n_s {
                let u = len * (rng.gen::<f64>() - 0.5);
                knots.push(centre + u);
                knots.push(centre - u);
            }
            start += len;
        }
        Self {
            range,
            coefficient: range / pairs as f64,
            knots,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coefficient * self.knots.iter().map(|b| (t - b).max(0.0)).sum::<f64>()
    }

    /// Exact `(min, max)` of `t² − s(t)` over `[0, T]`.
    ///
    /// `s` is piecewise linear, so the error is a convex quadratic on each
    /// piece: maxima sit at breakpoints and minima at breakpoints or at the
    /// vertex of a piece.
    pub fn error_range(&self) -> (f64, f64) {
        let mut sorted = self.knots.clone();
        sorted.sort_by(f64::total_cmp);
        let mut points = Vec::with_capacity(sorted.len() + 2);
        points.push(0.0);
        points.extend(sorted.iter().copied().filter(|&b| b > 0.0 && b < self.range));
        points.push(self.range);
        let err = |t: f64| t * t - self.eval(t);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for w in points.windows(2) {
            let (a, b) = (w[0], w[1]);
            for e in [err(a), err(b)] {
                lo = lo.min(e);
                hi = hi.max(e);
            }
            // slope of s on (a, b)
            let active = sorted.iter().filter(|&&k| k <= a).count();
            let vertex = 0.5 * self.coefficient * active as f64;
            if vertex > a && vertex < b {
                lo = lo.min(err(vertex));
            }
        }
        (lo, hi)
    }
}

/// Approximate multiplication on `[−M, M]²` via `xy = ((x+y)² − (x−y)²)/4`.
///
/// Each square is the Monte Carlo approximant of [`SquareFeatures`] with
/// `max(1, p/4)` knot pairs on `[0, 2M]`, fed with `|x ± y|`. The sup error
/// therefore decays like `p^{-1/2}` (the sampling rate of a Barron-type
/// integral representation), and the stored bound is computed exactly from
/// the drawn knots. Of [`MUL_CANDIDATES`] seeded draws the one with the
/// smallest certified error is kept, which realises the existence statement
/// behind the sampling bound. Both squares share their weights, so `Mul(x, 0) =
/// Mul(0, y) = 0` holds exactly.
pub fn build_mul_network(m_bound: f64, p: usize) -> Result<ConstructiveNet> {
    if p == 0 {
        return Err(Error::Domain {
            what: "width parameter p",
            value: 0.0,
        });
    }
    if !(m_bound > 0.0) {
        return Err(Error::Domain {
            what: "multiplication range M",
            value: m_bound,
        });
    }
    let range = 2.0 * m_bound;
    let (features, (lo, hi)) = (0..MUL_CANDIDATES)
        .map(|c| {
            let seed = (MUL_FEATURE_SEED ^ p as u64).wrapping_mul(MUL_CANDIDATES).wrapping_add(c);
            let f = SquareFeatures::draw(range, p / 4, seed);
            let range = f.error_range();
            (f, range)
        })
        .min_by(|a, b| (a.1 .1 - a.1 .0).total_cmp(&(b.1 .1 - b.1 .0)))
        .expect("at least one candidate");
    let k = features.knots.len();

    // |x+y| and |x−y| through their positive and negative parts.
    let mut l1 = Layer::zeros(2, 4);
    for (row, (a, b)) in [(1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0)].into_iter().enumerate() {
        l1.set_weight(row, 0, a);
        l1.set_weight(row, 1, b);
    }
    let mut l2 = Layer::zeros(4, 2 * k);
    for (j, &b) in features.knots.iter().enumerate() {
        l2.set_weight(j, 0, 1.0);
        l2.set_weight(j, 1, 1.0);
        l2.bias[j] = -b;
        l2.set_weight(k + j, 2, 1.0);
        l2.set_weight(k + j, 3, 1.0);
        l2.bias[k + j] = -b;
    }
    let mut l3 = Layer::zeros(2 * k, 2);
    for j in 0..k {
        l3.set_weight(0, j, features.coefficient);
        l3.set_weight(1, k + j, features.coefficient);
    }
    let mut layers = vec![l1, l2, l3];
    while layers.len() < MUL_DEPTH {
        let mut carry = Layer::zeros(2, 2);
        identity_rows(&mut carry, 0, 0, 2, 1.0);
        layers.push(carry);
    }
    let mut out = Layer::zeros(2, 1);
    out.set_weight(0, 0, 0.25);
    out.set_weight(0, 1, -0.25);
    layers.push(out);
    let net = NetworkSpec::from_layers(2, layers, f64::INFINITY)?;

    let slack = 1e-12 * range * range;
    let bound = 0.25 * (hi - lo) + slack;
    Ok(ConstructiveNet::new(net, Provenance::Mul, bound, m_bound * m_bound + bound))
}

/// Smallest power of two that is at least `x`.
fn pow2_at_least(x: f64) -> f64 {
    let p = math::next_pow2_above(x);
    if p / 2.0 >= x {
        p / 2.0
    } else {
        p
    }
}

fn check_eps(region: &BoxRegion, eps: f64) -> Result<()> {
    if !(eps > 0.0) || eps > 0.5 * region.min_edge() {
        return Err(Error::Construction(format!(
            "epsilon = {eps} must lie in (0, min edge / 2 = {}]",
            0.5 * region.min_edge()
        )));
    }
    Ok(())
}

/// Trapezoid gate rows for one box: for each coordinate `i`, the pair
/// `A_i = σ(a_i + ε − x_i)`, `B_i = σ(x_i − (b_i − ε))`, read from the input
/// columns `x_cols` as `x_i = pos − neg` (or directly when `neg` is `None`).
fn write_trapezoid_inputs(layer: &mut Layer, row0: usize, region: &BoxRegion, eps: f64, pos: usize, neg: Option<usize>) {
    for i in 0..region.dim() {
        let a_row = row0 + 2 * i;
        let b_row = a_row + 1;
        layer.bias[a_row] = region.lo[i] + eps;
        layer.set_weight(a_row, pos + i, -1.0);
        layer.bias[b_row] = -(region.hi[i] - eps);
        layer.set_weight(b_row, pos + i, 1.0);
        if let Some(neg) = neg {
            layer.set_weight(a_row, neg + i, 1.0);
            layer.set_weight(b_row, neg + i, -1.0);
        }
    }
}

/// `t_i = σ(1 − A_i/ε − B_i/ε)`: exactly 1 on `[a_i + ε, b_i − ε]`, 0 outside
/// `[a_i, b_i]`, linear in between.
fn write_trapezoid_outputs(layer: &mut Layer, row0: usize, col0: usize, d: usize, eps: f64) {
    for i in 0..d {
        layer.bias[row0 + i] = 1.0;
        layer.set_weight(row0 + i, col0 + 2 * i, -1.0 / eps);
        layer.set_weight(row0 + i, col0 + 2 * i + 1, -1.0 / eps);
    }
}

/// The gate `h_ε(x, y) = C₁σ(Σ t_i(x_i) + σ(y)/C₁ − d)` on `ℝ^d × ℝ`.
///
/// Returns `y` exactly for `x` in the shrunk box `[a+ε, b−ε]` and
/// `y ∈ (0, C₁)`; returns 0 for `x` outside `[a, b]`. `C₁` is rounded up to a
/// power of two so the pass-through is exact in floating point.
pub fn build_glue_network(lo: &[f64], hi: &[f64], eps: f64, c1: f64) -> Result<ConstructiveNet> {
    let region = BoxRegion::new(lo.to_vec(), hi.to_vec())?;
    check_eps(&region, eps)?;
    if !(c1 > 0.0) {
        return Err(Error::Construction(format!("output cap C1 must be positive, got {c1}")));
    }
    let cap = pow2_at_least(c1);
    let d = region.dim();

    let mut l1 = Layer::zeros(d + 1, 2 * d + 1);
    write_trapezoid_inputs(&mut l1, 0, &region, eps, 0, None);
    l1.set_weight(2 * d, d, 1.0);

    let mut l2 = Layer::zeros(2 * d + 1, d + 1);
    write_trapezoid_outputs(&mut l2, 0, 0, d, eps);
    l2.set_weight(d, 2 * d, 1.0);

    let mut l3 = Layer::zeros(d + 1, 1);
    l3.bias[0] = -(d as f64);
    for i in 0..d {
        l3.set_weight(0, i, 1.0);
    }
    l3.set_weight(0, d, 1.0 / cap);

    let mut out = Layer::zeros(1, 1);
    out.set_weight(0, 0, cap);
    let net = NetworkSpec::from_layers(d + 1, vec![l1, l2, l3, out], f64::INFINITY)?;
    Ok(ConstructiveNet::new(net, Provenance::Glue, 0.0, cap))
}

/// The network with constant output `c` (one dead hidden unit).
pub fn constant_network(input_dim: usize, c: f64) -> Result<ConstructiveNet> {
    let mut out = Layer::zeros(1, 1);
    out.bias[0] = c;
    let net = NetworkSpec::from_layers(input_dim, vec![Layer::zeros(input_dim, 1), out], f64::INFINITY)?;
    Ok(ConstructiveNet::new(net, Provenance::BumpApprox, 0.0, c.abs()))
}

/// `Σ_m J_m(x, I_m(x))`: each local approximant `I_m` is gated to its box by a
/// signed gluing gate `h_ε(x, y) − h_ε(x, −y)`, which passes `y` through
/// exactly on the shrunk box whenever `|y|` is below the gate's cap and
/// vanishes outside the box.
///
/// The recorded error bound is the largest local bound (the sum when shrunk
/// boxes overlap, which is reported as a warning). `band_volume` is the
/// Lebesgue volume of the excluded transition bands.
pub fn compose_local_approximants(locals: &[(ConstructiveNet, BoxRegion)], eps: f64) -> Result<ConstructiveNet> {
    let Some((first, _)) = locals.first() else {
        return Err(Error::Construction(String::from("no local approximants given")));
    };
    let d = first.net.input_dim();
    for (k, (local, region)) in locals.iter().enumerate() {
        if local.net.input_dim() != d || region.dim() != d {
            return Err(Error::Construction(format!("local {k} has inconsistent input dimension")));
        }
        check_eps(region, eps)?;
    }
    let mut warnings = Vec::new();
    let mut overlapping = false;
    for a in 0..locals.len() {
        for b in a + 1..locals.len() {
            if locals[a].1.shrunk(eps).interiors_overlap(&locals[b].1.shrunk(eps)) {
                overlapping = true;
                warnings.push(format!("shrunk boxes {a} and {b} overlap; outputs add up there"));
            }
        }
    }

    let depth = locals.iter().map(|(l, _)| l.net.depth()).max().unwrap_or(1);
    let carry = 2 * d;
    // Width of each local's block at every combined layer 1..=depth.
    let block_width = |net: &NetworkSpec, l: usize| -> usize {
        let widths = net.widths();
        widths[l.min(widths.len() - 1)]
    };

    let mut layers: Vec<Layer> = Vec::with_capacity(depth + 4);
    for l in 0..depth {
        let inputs = if l == 0 {
            d
        } else {
            carry + locals.iter().map(|(c, _)| block_width(&c.net, l - 1)).sum::<usize>()
        };
        let outputs = carry + locals.iter().map(|(c, _)| block_width(&c.net, l)).sum::<usize>();
        let mut layer = Layer::zeros(inputs, outputs);
        if l == 0 {
            identity_rows(&mut layer, 0, 0, d, 1.0);
            identity_rows(&mut layer, d, 0, d, -1.0);
        } else {
            identity_rows(&mut layer, 0, 0, carry, 1.0);
        }
        let mut row = carry;
        let mut col = if l == 0 { 0 } else { carry };
        for (c, _) in locals {
            let net = &c.net;
            let width = block_width(net, l);
            let in_width = if l == 0 { d } else { block_width(net, l - 1) };
            if l < net.depth() {
                let src = &net.layers()[l];
                for o in 0..src.outputs {
                    layer.bias[row + o] = src.bias[o];
                    for i in 0..src.inputs {
                        layer.set_weight(row + o, col + i, src.weight(o, i));
                    }
                }
            } else {
                identity_rows(&mut layer, row, col, width, 1.0);
            }
            row += width;
            if l > 0 {
                col += in_width;
            }
        }
        layers.push(layer);
    }

    let last_widths: Vec<usize> = locals.iter().map(|(c, _)| block_width(&c.net, depth - 1)).collect();
    let caps: Vec<f64> = locals.iter().map(|(c, _)| math::next_pow2_above(c.output_bound)).collect();
    let per_gate_1 = 2 * d + 2;
    let per_gate_2 = d + 2;

    // Gate layer 1: trapezoid inputs from the carried x, plus σ(±y_m) where
    // y_m is local m's output affine map.
    let inputs = carry + last_widths.iter().sum::<usize>();
    let mut g1 = Layer::zeros(inputs, locals.len() * per_gate_1);
    let mut col = carry;
    for (m, ((c, region), &width)) in locals.iter().zip(&last_widths).enumerate() {
        let row0 = m * per_gate_1;
        write_trapezoid_inputs(&mut g1, row0, region, eps, 0, Some(d));
        let out = c.net.layers().last().expect("output layer");
        let (yp, yn) = (row0 + 2 * d, row0 + 2 * d + 1);
        g1.bias[yp] = out.bias[0];
        g1.bias[yn] = -out.bias[0];
        for i in 0..width {
            g1.set_weight(yp, col + i, out.weight(0, i));
            g1.set_weight(yn, col + i, -out.weight(0, i));
        }
        col += width;
    }
    layers.push(g1);

    let mut g2 = Layer::zeros(locals.len() * per_gate_1, locals.len() * per_gate_2);
    for m in 0..locals.len() {
        let (row0, col0) = (m * per_gate_2, m * per_gate_1);
        write_trapezoid_outputs(&mut g2, row0, col0, d, eps);
        g2.set_weight(row0 + d, col0 + 2 * d, 1.0);
        g2.set_weight(row0 + d + 1, col0 + 2 * d + 1, 1.0);
    }
    layers.push(g2);

    let mut g3 = Layer::zeros(locals.len() * per_gate_2, 2 * locals.len());
    for (m, &cap) in caps.iter().enumerate() {
        let col0 = m * per_gate_2;
        for (row, y_col) in [(2 * m, col0 + d), (2 * m + 1, col0 + d + 1)] {
            g3.bias[row] = -(d as f64);
            for i in 0..d {
                g3.set_weight(row, col0 + i, 1.0);
            }
            g3.set_weight(row, y_col, 1.0 / cap);
        }
    }
    layers.push(g3);

    let mut out = Layer::zeros(2 * locals.len(), 1);
    for (m, &cap) in caps.iter().enumerate() {
        out.set_weight(0, 2 * m, cap);
        out.set_weight(0, 2 * m + 1, -cap);
    }
    layers.push(out);

    let net = NetworkSpec::from_layers(d, layers, f64::INFINITY)?;
    let bounds = locals.iter().map(|(c, _)| c.error_bound);
    let outputs = locals.iter().map(|(c, _)| c.output_bound);
    let (error_bound, output_bound) = if overlapping {
        (bounds.sum(), outputs.sum())
    } else {
        (bounds.fold(0.0, f64::max), outputs.fold(0.0, f64::max))
    };
    let band_volume = locals.iter().map(|(_, r)| r.volume() - r.shrunk(eps).volume()).sum();
    let mut composed = ConstructiveNet::new(net, Provenance::Composed, error_bound, output_bound);
    composed.band_volume = band_volume;
    composed.warnings = warnings;
    Ok(composed)
}

/// Resolution of [`bump_local_approximant`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BumpResolution {
    /// Knots per coordinate for the piecewise-linear square.
    pub square_knots: usize,
    /// Knots for the radial profile on `s = ‖z‖² ∈ [0, 1/4]`.
    pub profile_knots: usize,
}

impl Default for BumpResolution {
    fn default() -> Self {
        Self {
            square_knots: 32,
            profile_knots: 64,
        }
    }
}

/// Two-hidden-layer approximation of `f*_φ = log(η/(1−η))` on active cell
/// `cell` of `dist`, valid on the closed cell.
///
/// With `z = q(x − g)`, the first layer interpolates `Σ z_j²` coordinatewise
/// on uniform knots, and the second interpolates the radial profile
/// `F(s) = log((1 + q^{-r}h(√s))/(1 − q^{-r}h(√s)))`. `F` is nonincreasing, so
/// the certified bound is `max_l |F(s_l) − F(s_{l+1})| + Lip(F̂)·d/(4K²)`.
pub fn bump_local_approximant(dist: &HardDistribution, cell: usize, res: BumpResolution) -> Result<ConstructiveNet> {
    let p = dist.params();
    if cell >= p.m {
        return Err(Error::Domain {
            what: "active cell index",
            value: cell as f64,
        });
    }
    if !p.sigma[cell] {
        return constant_network(p.d, 0.0);
    }
    let d = p.d;
    let k = res.square_knots.max(1);
    let kp = res.profile_knots.max(1);
    let q = p.q as f64;
    let g = &dist.centers()[cell];
    let amp = p.amplitude();
    let profile = |s: f64| -> f64 {
        let phi = amp * dist.profile().h(math::sqrt(s.max(0.0))).unwrap_or(0.0);
        math::ln((1.0 + phi) / (1.0 - phi))
    };

    let knots: Vec<f64> = (0..=k).map(|i| -0.5 + i as f64 / k as f64).collect();
    let mut square_jumps = vec![0.0; k];
    square_jumps[0] = knots[0] + knots[1];
    for i in 1..k {
        square_jumps[i] = knots[i + 1] - knots[i - 1];
    }
    let mut l1 = Layer::zeros(d, d * k);
    for (j, &gj) in g.iter().enumerate() {
        for (i, &knot) in knots[..k].iter().enumerate() {
            let row = j * k + i;
            l1.set_weight(row, j, q);
            l1.bias[row] = -(q * gj + knot);
        }
    }

    let s_knots: Vec<f64> = (0..=kp).map(|l| 0.25 * l as f64 / kp as f64).collect();
    let values: Vec<f64> = s_knots.iter().map(|&s| profile(s)).collect();
    let slopes: Vec<f64> = (0..kp)
        .map(|l| (values[l + 1] - values[l]) / (s_knots[l + 1] - s_knots[l]))
        .collect();
    let mut jumps = vec![0.0; kp + 1];
    jumps[0] = slopes[0];
    for l in 1..kp {
        jumps[l] = slopes[l] - slopes[l - 1];
    }
    jumps[kp] = -slopes[kp - 1];

    let offset = d as f64 * knots[0] * knots[0];
    let mut l2 = Layer::zeros(d * k, kp + 1);
    for (l, &s) in s_knots.iter().enumerate() {
        l2.bias[l] = offset - s;
        for j in 0..d {
            for (i, &jump) in square_jumps.iter().enumerate() {
                l2.set_weight(l, j * k + i, jump);
            }
        }
    }
    let mut out = Layer::zeros(kp + 1, 1);
    out.bias[0] = values[0];
    for (l, &c) in jumps.iter().enumerate() {
        out.set_weight(0, l, c);
    }
    let net = NetworkSpec::from_layers(d, vec![l1, l2, out], f64::INFINITY)?;

    let profile_err = values.windows(2).map(|w| (w[0] - w[1]).abs()).fold(0.0, f64::max);
    let lipschitz = slopes.iter().map(|s| s.abs()).fold(0.0, f64::max);
    let square_err = d as f64 / (4.0 * (k * k) as f64);
    let bound = profile_err + lipschitz * square_err + 1e-9;
    Ok(ConstructiveNet::new(net, Provenance::BumpApprox, bound, values[0]))
}

/// The closed cell `[k/q, (k+1)/q]` of grid index `cell`.
pub fn cell_box(q: u32, d: usize, cell: usize) -> BoxRegion {
    let center = crate::distribution::grid_point(q, d, cell);
    let half = 0.5 / q as f64;
    BoxRegion {
        lo: center.iter().map(|c| c - half).collect(),
        hi: center.iter().map(|c| c + half).collect(),
    }
}

/// Glued approximation of `f*_φ` over all active cells of `dist`.
///
/// On each cell shrunk by `eps` the output equals the local approximant; with
/// `eps ≤ 1/(4q)` every sampling ball lies inside its shrunk cell.
pub fn bayes_logit_network(dist: &HardDistribution, eps: f64, res: BumpResolution) -> Result<ConstructiveNet> {
    let p = dist.params();
    let locals = (0..p.m)
        .map(|i| Ok((bump_local_approximant(dist, i, res)?, cell_box(p.q, p.d, i))))
        .collect::<Result<Vec<_>>>()?;
    compose_local_approximants(&locals, eps)
}
