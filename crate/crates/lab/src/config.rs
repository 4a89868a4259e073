//! TOML configuration of distributions and experiments.

use std::path::{Path, PathBuf};

use excess_risk_core::distribution::{canonical_r, AssouadParams, BoxRegion, HardDistribution};
use excess_risk_core::erm::TrainConfig;
use excess_risk_core::surrogate::LossProfile;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, LabError, LabResult};

/// One member of the bump family. Omitted `m`, `w`, `r` take the canonical
/// values `m = q^d`, `w = q^{-αr-d}/2^α`, `r = 2d/(2+α)`; an omitted residual
/// box is `[2, 3]^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionConfig {
    pub d: usize,
    pub q: u32,
    pub alpha: f64,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub w: Option<f64>,
    #[serde(default)]
    pub r: Option<f64>,
    /// Bit string such as `"1101"`; absent means all ones.
    #[serde(default)]
    pub sigma: Option<String>,
    #[serde(default)]
    pub region_lo: Option<Vec<f64>>,
    #[serde(default)]
    pub region_hi: Option<Vec<f64>>,
}

pub fn parse_sigma(bits: &str) -> LabResult<Vec<bool>> {
    bits.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(LabError::InvalidConfig(format!("sigma must be a bit string, found {other:?}"))),
        })
        .collect()
}

impl DistributionConfig {
    /// Parameters with an explicit `σ`; the configured bit string is ignored.
    pub fn params_with_sigma(&self, sigma: Vec<bool>) -> LabResult<AssouadParams> {
        let r = self.r.unwrap_or_else(|| canonical_r(self.d, self.alpha));
        let m = self.m.unwrap_or_else(|| (self.q as usize).pow(self.d as u32));
        let w = self
            .w
            .unwrap_or_else(|| (self.q as f64).powf(-self.alpha * r - self.d as f64) / 2f64.powf(self.alpha));
        let mut params = AssouadParams::new(self.d, self.q, m, w, r, self.alpha, sigma)?;
        match (&self.region_lo, &self.region_hi) {
            (Some(lo), Some(hi)) => params = params.with_residual_region(BoxRegion::new(lo.clone(), hi.clone())?)?,
            (None, None) => {}
            _ => return Err(LabError::InvalidConfig("region_lo and region_hi must be given together".into())),
        }
        Ok(params)
    }

    pub fn cell_count(&self) -> usize {
        self.m.unwrap_or_else(|| (self.q as usize).pow(self.d as u32))
    }

    pub fn params(&self) -> LabResult<AssouadParams> {
        let sigma = match &self.sigma {
            Some(bits) => parse_sigma(bits)?,
            None => vec![true; self.cell_count()],
        };
        self.params_with_sigma(sigma)
    }

    pub fn distribution(&self) -> LabResult<HardDistribution> {
        Ok(HardDistribution::new(self.params()?)?)
    }
}

/// Configuration of `dist-check`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistCheckConfig {
    pub distribution: DistributionConfig,
    #[serde(default = "default_check_seed")]
    pub seed: u64,
    /// Draws for the Bayes-risk Monte Carlo oracle.
    #[serde(default = "default_bayes_draws")]
    pub bayes_draws: usize,
    /// Draws for the empirical margin CDF.
    #[serde(default = "default_margin_draws")]
    pub margin_draws: usize,
    #[serde(default = "default_margin_grid")]
    pub margin_grid: usize,
    /// Labelled draws written to `samples.csv` (0 disables the file).
    #[serde(default)]
    pub export_samples: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_check_seed() -> u64 {
    1
}
fn default_bayes_draws() -> usize {
    1_000_000
}
fn default_margin_draws() -> usize {
    100_000
}
fn default_margin_grid() -> usize {
    50
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaPolicy {
    AllOnes,
    /// Independent fair bits drawn from the experiment seed.
    Random,
}

/// Sample sizes of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NGrid {
    List(Vec<u64>),
    Geometric { start: u64, factor: u64, count: usize },
}

impl NGrid {
    pub fn values(&self) -> Vec<u64> {
        match self {
            NGrid::List(v) => v.clone(),
            NGrid::Geometric { start, factor, count } => {
                let mut n = *start;
                (0..*count)
                    .map(|_| {
                        let v = n;
                        n = n.saturating_mul(*factor);
                        v
                    })
                    .collect()
            }
        }
    }
}

/// Optimiser settings as written in the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSettings {
    pub learning_rate: f64,
    pub decay: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub plateau_tol: f64,
    pub plateau_window: usize,
    pub restarts: usize,
    /// Output clamp `M`; networks are clamped to `[−M/2, M/2]`.
    pub clamp: f64,
}

impl Default for TrainSettings {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            learning_rate: t.learning_rate,
            decay: t.decay,
            batch_size: t.batch_size,
            max_epochs: t.max_epochs,
            plateau_tol: t.plateau_tol,
            plateau_window: t.plateau_window,
            restarts: t.restarts,
            clamp: t.loss.clamp,
        }
    }
}

impl TrainSettings {
    pub fn to_train_config(&self, seed: u64) -> LabResult<TrainConfig> {
        let cfg = TrainConfig {
            learning_rate: self.learning_rate,
            decay: self.decay,
            batch_size: self.batch_size,
            max_epochs: self.max_epochs,
            plateau_tol: self.plateau_tol,
            plateau_window: self.plateau_window,
            restarts: self.restarts,
            seed,
            loss: LossProfile::new(self.clamp)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Configuration of `sweep`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub distribution: DistributionConfig,
    #[serde(default = "default_policy")]
    pub sigma_policy: SigmaPolicy,
    pub n_grid: NGrid,
    pub seeds: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub train: TrainSettings,
    #[serde(default = "default_rate_constant")]
    pub rate_constant: f64,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default = "default_n_mc")]
    pub n_mc: usize,
    pub output_dir: PathBuf,
    /// Worker threads; 0 uses every available core.
    #[serde(default)]
    pub threads: usize,
}

fn default_policy() -> SigmaPolicy {
    SigmaPolicy::AllOnes
}
fn default_seed() -> u64 {
    0
}
fn default_rate_constant() -> f64 {
    1.0
}
fn default_depth() -> usize {
    11
}
fn default_n_mc() -> usize {
    100_000
}

impl ExperimentConfig {
    pub fn validate(&self) -> LabResult<()> {
        let grid = self.n_grid.values();
        if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) || grid[0] == 0 {
            return Err(LabError::InvalidConfig(
                "n grid must be nonempty, positive and strictly increasing".into(),
            ));
        }
        if self.seeds < 3 {
            return Err(LabError::InvalidConfig(format!(
                "at least 3 seeds per n are required, got {}",
                self.seeds
            )));
        }
        if self.n_mc == 0 {
            return Err(LabError::InvalidConfig("n_mc must be positive".into()));
        }
        if self.depth == 0 {
            return Err(LabError::InvalidConfig("depth must be positive".into()));
        }
        self.train.to_train_config(0)?;
        let params = self.params()?;
        if !HardDistribution::new(params)?.margin_admissible() {
            return Err(LabError::InvalidConfig(
                "distribution violates the margin condition m·w ≤ (q^-r/2)^α".into(),
            ));
        }
        Ok(())
    }

    /// Parameters with `σ` chosen by the configured policy.
    pub fn params(&self) -> LabResult<AssouadParams> {
        let m = self.distribution.cell_count();
        let sigma = match self.sigma_policy {
            SigmaPolicy::AllOnes => vec![true; m],
            SigmaPolicy::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x5349_474d_4121);
                (0..m).map(|_| rng.gen::<bool>()).collect()
            }
        };
        self.distribution.params_with_sigma(sigma)
    }
}

pub fn load_toml<T: for<'de> Deserialize<'de>>(path: &Path) -> LabResult<T> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    toml::from_str(&text).map_err(|source| LabError::Config {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_defaults() {
        let cfg: DistributionConfig = toml::from_str("d = 2\nq = 4\nalpha = 1.0\n").unwrap();
        let p = cfg.params().unwrap();
        assert_eq!(p.m, 16);
        assert!((p.r - 4.0 / 3.0).abs() < 1e-15);
        assert!((p.w - 4f64.powf(-10.0 / 3.0) / 2.0).abs() < 1e-15);
        assert!(HardDistribution::new(p).unwrap().margin_admissible());
    }

    #[test]
    fn explicit_member() {
        let cfg: DistributionConfig = toml::from_str("d = 2\nq = 2\nalpha = 1.0\nm = 2\nw = 0.1\nr = 1.0\nsigma = \"10\"\n").unwrap();
        let dist = cfg.distribution().unwrap();
        assert_eq!(dist.params().sigma, vec![true, false]);
        assert!(parse_sigma("12").is_err());
    }

    #[test]
    fn experiment_parsing_and_validation() {
        let text = r#"
            n_grid = { start = 128, factor = 2, count = 4 }
            seeds = 3
            output_dir = "out"
            [distribution]
            d = 2
            q = 4
            alpha = 1.0
            [train]
            max_epochs = 5
        "#;
        let cfg: ExperimentConfig = toml::from_str(text).unwrap();
        assert_eq!(cfg.n_grid.values(), vec![128, 256, 512, 1024]);
        assert_eq!(cfg.depth, 11);
        cfg.validate().unwrap();
        let bad = ExperimentConfig { seeds: 2, ..cfg.clone() };
        assert!(bad.validate().is_err());
        let unsorted = ExperimentConfig {
            n_grid: NGrid::List(vec![10, 5]),
            ..cfg
        };
        assert!(unsorted.validate().is_err());
    }
}
