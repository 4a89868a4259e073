//! Dense feed-forward ReLU networks `F(L, p)` with a clamped scalar output.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::distribution::LabeledSample;
use crate::error::{Error, Result};
use crate::math;
use crate::surrogate::LossProfile;

/// One affine map `z = W a + b`; `weights` is row-major `(outputs, inputs)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    #[inline]
    pub fn weight(&self, out: usize, inp: usize) -> f64 {
        self.weights[out * self.inputs + inp]
    }

    #[inline]
    pub fn set_weight(&mut self, out: usize, inp: usize, value: f64) {
        self.weights[out * self.inputs + inp] = value;
    }

    /// Pre-activations. Each output accumulates the bias first and then the
    /// weighted inputs in index order; the constructive builders rely on this
    /// order for their exact identities.
    #[inline]
    fn apply(&self, input: &[f64], out: &mut [f64]) {
        for (o, slot) in out.iter_mut().enumerate() {
            let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            let mut acc = self.bias[o];
            for (w, a) in row.iter().zip(input) {
                acc += w * a;
            }
            *slot = acc;
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }
}

/// Input dimension and hidden widths `p = (p₁, …, p_L)` of a network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Architecture {
    pub input_dim: usize,
    pub widths: Vec<usize>,
}

impl Architecture {
    pub fn new(input_dim: usize, widths: Vec<usize>) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::InvalidParams("input dimension must be positive".into()));
        }
        if widths.is_empty() || widths.contains(&0) {
            return Err(Error::InvalidParams(format!(
                "hidden widths must be nonempty and positive, got {widths:?}"
            )));
        }
        Ok(Self { input_dim, widths })
    }

    pub fn depth(&self) -> usize {
        self.widths.len()
    }

    /// `Σ_{l=1}^{L} (p_{l−1} p_l + p_l) + (p_L + 1)` with `p₀ = d`.
    pub fn parameter_count(&self) -> usize {
        let mut prev = self.input_dim;
        let mut total = 0;
        for &w in &self.widths {
            total += prev * w + w;
            prev = w;
        }
        total + prev + 1
    }
}

/// Parameter count of a depth-`depth` network with all hidden widths equal.
pub fn uniform_parameter_count(input_dim: usize, width: usize, depth: usize) -> usize {
    input_dim * width + width + (depth - 1) * (width * width + width) + width + 1
}

/// Constant-depth architecture whose parameter count is closest to
/// `rate_constant · n^{2/3}`, found by integer search on the common width
/// (minimum width 1).
pub fn sized_architecture(n: u64, rate_constant: f64, depth: usize, input_dim: usize) -> Result<Architecture> {
    if n == 0 {
        return Err(Error::Domain {
            what: "sample count",
            value: 0.0,
        });
    }
    if depth < 3 {
        return Err(Error::Domain {
            what: "depth (needs at least 3 hidden layers)",
            value: depth as f64,
        });
    }
    if !(rate_constant > 0.0) {
        return Err(Error::Domain {
            what: "rate constant",
            value: rate_constant,
        });
    }
    let target = rate_constant * math::powf(n as f64, 2.0 / 3.0);
    let mut best = 1usize;
    let mut best_gap = f64::INFINITY;
    let mut width = 1usize;
    loop {
        let count = uniform_parameter_count(input_dim, width, depth) as f64;
        let gap = (count - target).abs();
        if gap < best_gap {
            best_gap = gap;
            best = width;
        }
        if count > target {
            break;
        }
        width += 1;
    }
    Architecture::new(input_dim, vec![best; depth])
}

/// A ReLU network with `L` hidden layers and one affine output, whose output
/// is clamped to `[−M/2, M/2]`. `clamp_half = ∞` disables the clamp.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    input_dim: usize,
    layers: Vec<Layer>,
    clamp_half: f64,
}

/// Gradient store with the same shape as the network's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub layers: Vec<Layer>,
}

impl Gradient {
    pub fn flat(&self) -> Vec<f64> {
        flatten(&self.layers)
    }
}

fn flatten(layers: &[Layer]) -> Vec<f64> {
    let mut out = Vec::new();
    for l in layers {
        out.extend_from_slice(&l.weights);
        out.extend_from_slice(&l.bias);
    }
    out
}

impl NetworkSpec {
    /// Assembles a network from its layers: `L` hidden layers followed by a
    /// single-output affine layer.
    pub fn from_layers(input_dim: usize, layers: Vec<Layer>, clamp_half: f64) -> Result<Self> {
        if layers.len() < 2 {
            return Err(Error::InvalidParams("need at least one hidden layer and an output layer".into()));
        }
        let mut prev = input_dim;
        for (i, l) in layers.iter().enumerate() {
            if l.inputs != prev || l.outputs == 0 || l.weights.len() != l.inputs * l.outputs || l.bias.len() != l.outputs {
                return Err(Error::InvalidParams(format!("layer {i} has inconsistent shape")));
            }
            prev = l.outputs;
        }
        if prev != 1 {
            return Err(Error::Shape { expected: 1, got: prev });
        }
        if !(clamp_half > 0.0) {
            return Err(Error::Domain {
                what: "clamp half-range",
                value: clamp_half,
            });
        }
        Ok(Self {
            input_dim,
            layers,
            clamp_half,
        })
    }

    /// All-zero weights.
    pub fn zeros(arch: &Architecture, clamp_half: f64) -> Result<Self> {
        let mut layers = Vec::with_capacity(arch.depth() + 1);
        let mut prev = arch.input_dim;
        for &w in &arch.widths {
            layers.push(Layer::zeros(prev, w));
            prev = w;
        }
        layers.push(Layer::zeros(prev, 1));
        Self::from_layers(arch.input_dim, layers, clamp_half)
    }

    /// Weights uniform on `±√(6/(fan_in + fan_out))`, zero biases.
    pub fn glorot<R: Rng + ?Sized>(arch: &Architecture, clamp_half: f64, rng: &mut R) -> Result<Self> {
        let mut net = Self::zeros(arch, clamp_half)?;
        for l in &mut net.layers {
            let limit = math::sqrt(6.0 / (l.inputs + l.outputs) as f64);
            for w in &mut l.weights {
                *w = limit * (2.0 * rng.gen::<f64>() - 1.0);
            }
        }
        Ok(net)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    /// Number of hidden layers `L`.
    pub fn depth(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn widths(&self) -> Vec<usize> {
        self.layers[..self.layers.len() - 1].iter().map(|l| l.outputs).collect()
    }

    pub fn architecture(&self) -> Architecture {
        Architecture {
            input_dim: self.input_dim,
            widths: self.widths(),
        }
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn clamp_half(&self) -> f64 {
        self.clamp_half
    }

    pub fn set_clamp_half(&mut self, clamp_half: f64) -> Result<()> {
        if !(clamp_half > 0.0) {
            return Err(Error::Domain {
                what: "clamp half-range",
                value: clamp_half,
            });
        }
        self.clamp_half = clamp_half;
        Ok(())
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(Layer::parameter_count).sum()
    }

    /// Number of nonzero weights and biases; the size of a sparse realisation.
    pub fn nonzero_parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.iter().chain(&l.bias).filter(|v| **v != 0.0).count())
            .sum()
    }

    pub fn parameters(&self) -> Vec<f64> {
        flatten(&self.layers)
    }

    /// Overwrites all parameters from a flat vector in [`Self::parameters`] order.
    pub fn set_parameters(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.parameter_count() {
            return Err(Error::Shape {
                expected: self.parameter_count(),
                got: flat.len(),
            });
        }
        let mut at = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&flat[at..at + nw]);
            at += nw;
            let nb = l.bias.len();
            l.bias.copy_from_slice(&flat[at..at + nb]);
            at += nb;
        }
        Ok(())
    }

    /// The network `−f`.
    pub fn negated(&self) -> Self {
        let mut out = self.clone();
        let last = out.layers.last_mut().expect("network has an output layer");
        for w in &mut last.weights {
            *w = -*w;
        }
        for b in &mut last.bias {
            *b = -*b;
        }
        out
    }

    fn max_width(&self) -> usize {
        self.layers.iter().map(|l| l.outputs).max().unwrap_or(1).max(self.input_dim)
    }

    /// Output before clamping.
    pub fn forward_unclamped(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.input_dim {
            return Err(Error::Shape {
                expected: self.input_dim,
                got: x.len(),
            });
        }
        let width = self.max_width();
        let mut a = vec![0.0; width];
        let mut b = vec![0.0; width];
        a[..x.len()].copy_from_slice(x);
        let mut len = x.len();
        let hidden = self.layers.len() - 1;
        for l in &self.layers[..hidden] {
            l.apply(&a[..len], &mut b[..l.outputs]);
            for v in &mut b[..l.outputs] {
                *v = v.max(0.0);
            }
            len = l.outputs;
            core::mem::swap(&mut a, &mut b);
        }
        let out = &self.layers[hidden];
        let mut z = [0.0];
        out.apply(&a[..len], &mut z);
        Ok(z[0])
    }

    /// Output clamped to `[−M/2, M/2]`.
    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        Ok(self.clamp(self.forward_unclamped(x)?))
    }

    #[inline]
    fn clamp(&self, v: f64) -> f64 {
        v.clamp(-self.clamp_half, self.clamp_half)
    }

    /// `(1/n) Σ φ•f(x_i, y_i)` on the clamped output.
    pub fn empirical_phi_risk(&self, data: &[LabeledSample], loss: &LossProfile) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::Shape { expected: 1, got: 0 });
        }
        let mut total = 0.0;
        for s in data {
            total += loss.value(self.forward(&s.x)?, s.y);
        }
        Ok(total / data.len() as f64)
    }

    /// Exact reverse-mode gradient of `(1/|batch|) Σ φ•f(x_i, y_i)` with respect
    /// to every weight and bias, together with the batch loss.
    ///
    /// The ReLU derivative at 0 is taken as 0; the clamp passes gradient only
    /// strictly inside `(−M/2, M/2)`.
    pub fn gradient(&self, batch: &[LabeledSample], loss: &LossProfile) -> Result<(Gradient, f64)> {
        let mut grad = Gradient {
            layers: self.layers.iter().map(|l| Layer::zeros(l.inputs, l.outputs)).collect(),
        };
        let mut ws = Workspace::new(self);
        let mut total = 0.0;
        for s in batch {
            total += self.accumulate(s, loss, &mut ws, &mut grad)?;
        }
        if batch.is_empty() {
            return Err(Error::Shape { expected: 1, got: 0 });
        }
        let scale = 1.0 / batch.len() as f64;
        for l in &mut grad.layers {
            for w in &mut l.weights {
                *w *= scale;
            }
            for b in &mut l.bias {
                *b *= scale;
            }
        }
        Ok((grad, total * scale))
    }

    fn accumulate(&self, s: &LabeledSample, loss: &LossProfile, ws: &mut Workspace, grad: &mut Gradient) -> Result<f64> {
        if s.x.len() != self.input_dim {
            return Err(Error::Shape {
                expected: self.input_dim,
                got: s.x.len(),
            });
        }
        let hidden = self.layers.len() - 1;
        ws.acts[0].clear();
        ws.acts[0].extend_from_slice(&s.x);
        for (l, layer) in self.layers[..hidden].iter().enumerate() {
            let (before, after) = ws.acts.split_at_mut(l + 1);
            let input = &before[l];
            let out = &mut after[0];
            out.resize(layer.outputs, 0.0);
            layer.apply(input, out);
            let pre = &mut ws.pre[l];
            pre.clear();
            pre.extend_from_slice(out);
            for v in out.iter_mut() {
                *v = v.max(0.0);
            }
        }
        let mut z = [0.0];
        self.layers[hidden].apply(&ws.acts[hidden], &mut z);
        let raw = z[0];
        let g = self.clamp(raw);
        let value = loss.value(g, s.y);
        if !(raw.abs() < self.clamp_half) {
            return Ok(value);
        }
        // Backward pass.
        let mut delta = core::mem::take(&mut ws.delta_a);
        delta.clear();
        delta.push(loss.derivative(g, s.y));
        for l in (0..=hidden).rev() {
            let layer = &self.layers[l];
            let input = &ws.acts[l];
            let gl = &mut grad.layers[l];
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                gl.bias[o] += d;
                let row = &mut gl.weights[o * layer.inputs..(o + 1) * layer.inputs];
                for (gw, a) in row.iter_mut().zip(input) {
                    *gw += d * a;
                }
            }
            if l == 0 {
                break;
            }
            let mut next = core::mem::take(&mut ws.delta_b);
            next.clear();
            next.resize(layer.inputs, 0.0);
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                for (n, w) in next.iter_mut().zip(row) {
                    *n += d * w;
                }
            }
            for (n, &p) in next.iter_mut().zip(&ws.pre[l - 1]) {
                if p <= 0.0 {
                    *n = 0.0;
                }
            }
            ws.delta_b = delta;
            delta = next;
        }
        ws.delta_a = delta;
        Ok(value)
    }
}

struct Workspace {
    acts: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
    delta_a: Vec<f64>,
    delta_b: Vec<f64>,
}

impl Workspace {
    fn new(net: &NetworkSpec) -> Self {
        let hidden = net.layers.len() - 1;
        let width = net.max_width();
        Self {
            acts: (0..=hidden).map(|_| Vec::with_capacity(width)).collect(),
            pre: (0..hidden).map(|_| Vec::with_capacity(width)).collect(),
            delta_a: Vec::with_capacity(width),
            delta_b: Vec::with_capacity(width),
        }
    }
}

/// Anything that scores points with a real value; the plug-in classifier
/// predicts 1 where the score is nonnegative.
pub trait Scorer {
    fn input_dim(&self) -> usize;
    fn score(&self, x: &[f64]) -> f64;
}

impl Scorer for NetworkSpec {
    fn input_dim(&self) -> usize {
        self.input_dim
    }

    fn score(&self, x: &[f64]) -> f64 {
        self.forward(x).expect("dimension checked by caller")
    }
}

/// A closure scorer of fixed input dimension.
pub struct FnScorer<F> {
    pub dim: usize,
    pub f: F,
}

impl<F: Fn(&[f64]) -> f64> Scorer for FnScorer<F> {
    fn input_dim(&self) -> usize {
        self.dim
    }

    fn score(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}
