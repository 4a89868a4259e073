//! Approximate empirical φ-risk minimisation and risk evaluation against a
//! known distribution.
//!
//! Training runs Adam on mini-batches with several seeded restarts and keeps
//! the restart with the lowest full-data empirical φ-risk. Evaluation draws
//! `X` from the marginal and integrates over `Y` with the exact `η(X)`.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::distribution::{HardDistribution, LabeledSample};
use crate::error::{Error, Result};
use crate::math;
use crate::network::{Architecture, NetworkSpec, Scorer};
use crate::surrogate::{binary_entropy, phi_bullet, LossProfile};

/// Optimiser settings for [`train_erm`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    /// Initial Adam step size.
    pub learning_rate: f64,
    /// Step size at epoch `e` is `learning_rate / (1 + decay·e)`.
    pub decay: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Stop once the full-data loss improved by less than this fraction over
    /// `plateau_window` epochs.
    pub plateau_tol: f64,
    pub plateau_window: usize,
    pub restarts: usize,
    pub seed: u64,
    pub loss: LossProfile,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            decay: 0.0,
            batch_size: 64,
            max_epochs: 200,
            plateau_tol: 1e-5,
            plateau_window: 10,
            restarts: 3,
            seed: 0,
            loss: LossProfile { clamp: 8.0 },
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::Domain {
                what: "learning rate",
                value: self.learning_rate,
            });
        }
        if !(self.decay >= 0.0) {
            return Err(Error::Domain {
                what: "step size decay",
                value: self.decay,
            });
        }
        if self.restarts == 0 || self.batch_size == 0 || self.plateau_window == 0 {
            return Err(Error::InvalidParams(alloc::string::String::from(
                "restarts, batch size and plateau window must be at least 1",
            )));
        }
        LossProfile::new(self.loss.clamp).map(|_| ())
    }
}

/// The selected restart.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub net: NetworkSpec,
    /// Full-data empirical φ-risk of `net`.
    pub empirical_phi_risk: f64,
    pub restart: usize,
    pub epochs: usize,
    /// Full-data empirical φ-risk after each epoch of the selected restart.
    pub history: Vec<f64>,
}

fn restart_seed(seed: u64, restart: usize) -> u64 {
    seed ^ (restart as u64).wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(len: usize) -> Self {
        Self {
            m: alloc::vec![0.0; len],
            v: alloc::vec![0.0; len],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - libm::pow(Self::BETA1, self.t as f64);
        let c2 = 1.0 - libm::pow(Self::BETA2, self.t as f64);
        for ((p, g), (m, v)) in params.iter_mut().zip(grad).zip(self.m.iter_mut().zip(self.v.iter_mut())) {
            *m = Self::BETA1 * *m + (1.0 - Self::BETA1) * g;
            *v = Self::BETA2 * *v + (1.0 - Self::BETA2) * g * g;
            *p -= lr * (*m / c1) / (math::sqrt(*v / c2) + Self::EPS);
        }
    }
}

fn train_once(arch: &Architecture, data: &[LabeledSample], cfg: &TrainConfig, restart: usize) -> Result<TrainOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(restart_seed(cfg.seed, restart));
    let mut net = NetworkSpec::glorot(arch, 0.5 * cfg.loss.clamp, &mut rng)?;
    let mut params = net.parameters();
    let mut adam = Adam::new(params.len());
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut batch = Vec::with_capacity(cfg.batch_size);
    let mut history = Vec::new();
    let diverged = |epoch, loss: f64| Error::Divergence { restart, epoch, loss };

    let mut epochs = 0;
    for epoch in 0..cfg.max_epochs {
        let lr = cfg.learning_rate / (1.0 + cfg.decay * epoch as f64);
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| data[i].clone()));
            let (grad, loss) = net.gradient(&batch, &cfg.loss)?;
            if !loss.is_finite() {
                return Err(diverged(epoch, loss));
            }
            adam.step(&mut params, &grad.flat(), lr);
            if params.iter().any(|p| !p.is_finite()) {
                return Err(diverged(epoch, loss));
            }
            net.set_parameters(&params)?;
        }
        let loss = net.empirical_phi_risk(data, &cfg.loss)?;
        if !loss.is_finite() {
            return Err(diverged(epoch, loss));
        }
        history.push(loss);
        epochs = epoch + 1;
        if history.len() > cfg.plateau_window {
            let before = history[history.len() - 1 - cfg.plateau_window];
            if before - loss < cfg.plateau_tol * before.abs() {
                break;
            }
        }
    }
    let empirical_phi_risk = match history.last() {
        Some(&l) => l,
        None => net.empirical_phi_risk(data, &cfg.loss)?,
    };
    Ok(TrainOutcome {
        net,
        empirical_phi_risk,
        restart,
        epochs,
        history,
    })
}

/// Approximates `argmin_{f ∈ F} (1/n) Σ φ•f(X_i, Y_i)` over networks of shape
/// `arch` with output clamp `cfg.loss.clamp`. Deterministic given `cfg.seed`.
pub fn train_erm(arch: &Architecture, data: &[LabeledSample], cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::Shape { expected: 1, got: 0 });
    }
    if let Some(bad) = data.iter().find(|s| s.x.len() != arch.input_dim) {
        return Err(Error::Shape {
            expected: arch.input_dim,
            got: bad.x.len(),
        });
    }
    let mut best: Option<TrainOutcome> = None;
    for restart in 0..cfg.restarts {
        let outcome = train_once(arch, data, cfg, restart)?;
        if best.as_ref().is_none_or(|b| outcome.empirical_phi_risk < b.empirical_phi_risk) {
            best = Some(outcome);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// The plug-in classifier `1{f(x) ≥ 0}`.
pub fn plug_in<S: Scorer + ?Sized>(scorer: &S, x: &[f64]) -> u8 {
    u8::from(scorer.score(x) >= 0.0)
}

/// Monte Carlo risks of a scorer under a known distribution; each estimate
/// carries its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskReport {
    pub zero_one_risk: f64,
    pub phi_risk: f64,
    pub excess_risk: f64,
    pub excess_phi_risk: f64,
    pub se_zero_one: f64,
    pub se_phi: f64,
    pub se_excess: f64,
    pub se_excess_phi: f64,
    pub n_eval: usize,
}

#[derive(Default)]
struct Moments {
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.sum += v;
        self.sum_sq += v * v;
    }

    fn mean_se(&self, n: usize) -> (f64, f64) {
        let nf = n as f64;
        let mean = self.sum / nf;
        if n < 2 {
            return (mean, 0.0);
        }
        let var = ((self.sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
        (mean, math::sqrt(var / nf))
    }
}

/// Risks of `scorer` under `dist` from `n_mc` draws of `X`.
///
/// With `g = scorer(x)` and `η = η(x)`:
/// - 0-1 risk integrand: `η` if the plug-in predicts 0, else `1 − η`;
/// - excess risk integrand: `2|η − ½|·1{plug-in ≠ Bayes}`;
/// - φ-risk integrand: `η φ(g) + (1 − η) φ(−g)`;
/// - excess φ-risk integrand: the φ-risk integrand minus `H(η)`.
pub fn exact_excess_risk<S: Scorer + ?Sized>(dist: &HardDistribution, scorer: &S, n_mc: usize, seed: u64) -> Result<RiskReport> {
    if n_mc == 0 {
        return Err(Error::Shape { expected: 1, got: 0 });
    }
    let d = dist.params().d;
    if scorer.input_dim() != d {
        return Err(Error::Shape {
            expected: d,
            got: scorer.input_dim(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut zo, mut phi, mut ex, mut exphi) = (Moments::default(), Moments::default(), Moments::default(), Moments::default());
    for _ in 0..n_mc {
        let x = dist.draw_x(&mut rng);
        let eta = dist.eta(&x);
        let g = scorer.score(&x);
        let predicted = g >= 0.0;
        let bayes = eta >= 0.5;
        zo.push(if predicted { 1.0 - eta } else { eta });
        ex.push(if predicted != bayes { 2.0 * (eta - 0.5).abs() } else { 0.0 });
        let risk = eta * phi_bullet(g, 1) + (1.0 - eta) * phi_bullet(g, 0);
        phi.push(risk);
        exphi.push(risk - binary_entropy(eta));
    }
    let (zero_one_risk, se_zero_one) = zo.mean_se(n_mc);
    let (phi_risk, se_phi) = phi.mean_se(n_mc);
    let (excess_risk, se_excess) = ex.mean_se(n_mc);
    let (excess_phi_risk, se_excess_phi) = exphi.mean_se(n_mc);
    Ok(RiskReport {
        zero_one_risk,
        phi_risk,
        excess_risk,
        excess_phi_risk,
        se_zero_one,
        se_phi,
        se_excess,
        se_excess_phi,
        n_eval: n_mc,
    })
}

/// Monte Carlo estimate of `E φ•g − inf_f E φ•f`; see [`exact_excess_risk`].
pub fn excess_phi_risk<S: Scorer + ?Sized>(dist: &HardDistribution, scorer: &S, n_mc: usize, seed: u64) -> Result<f64> {
    exact_excess_risk(dist, scorer, n_mc, seed).map(|r| r.excess_phi_risk)
}
