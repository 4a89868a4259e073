//! Seeded, resumable training-and-evaluation sweeps.
//!
//! Every `(n, seed index)` cell is an independent job on a bounded rayon pool.
//! Completed rows go through one mutex-guarded appender so `risks.csv` is
//! always a valid table prefix; at the end the file is rewritten sorted by
//! `(n, seed)` through a temporary file and a rename.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use excess_risk_core::distribution::HardDistribution;
use excess_risk_core::erm::{exact_excess_risk, train_erm};
use excess_risk_core::network::sized_architecture;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{csv_err, io_err, LabError, LabResult};
use crate::io::{read_risk_rows, write_risk_rows, RiskRow};

pub const RISKS_FILE: &str = "risks.csv";

/// Outcome of [`run_sweep`].
#[derive(Debug, Clone)]
pub struct SweepSummary {
    /// The full table sorted by `(n, seed)`.
    pub rows: Vec<RiskRow>,
    pub computed: usize,
    pub skipped: usize,
    pub failed: usize,
    pub path: PathBuf,
}

/// SplitMix64 finaliser, used to derive independent stream seeds.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of stream `tag` of cell `(n, seed index)`.
pub fn cell_seed(base: u64, n: u64, index: u64, tag: u64) -> u64 {
    mix(mix(mix(base ^ tag) ^ n) ^ index)
}

const SAMPLE_STREAM: u64 = 1;
const TRAIN_STREAM: u64 = 2;
/// Evaluation draws are shared by all cells so that differences between
/// cells are not inflated by Monte Carlo noise.
const EVAL_STREAM: u64 = 3;

/// Trains and evaluates one cell. Any training or evaluation error yields a
/// failed row.
pub fn run_cell(cfg: &ExperimentConfig, dist: &HardDistribution, n: u64, index: u64) -> RiskRow {
    let d = dist.params().d;
    let arch = match sized_architecture(n, cfg.rate_constant, cfg.depth, d) {
        Ok(a) => a,
        Err(_) => return RiskRow::failed(n, index, 0, cfg.depth as u64),
    };
    let w = arch.parameter_count() as u64;
    let failed = || RiskRow::failed(n, index, w, cfg.depth as u64);
    let Ok(train_cfg) = cfg.train.to_train_config(cell_seed(cfg.seed, n, index, TRAIN_STREAM)) else {
        return failed();
    };
    let data = dist.sample(n as usize, cell_seed(cfg.seed, n, index, SAMPLE_STREAM));
    let Ok(outcome) = train_erm(&arch, &data, &train_cfg) else {
        return failed();
    };
    let Ok(report) = exact_excess_risk(dist, &outcome.net, cfg.n_mc, mix(cfg.seed ^ EVAL_STREAM)) else {
        return failed();
    };
    RiskRow {
        n,
        seed: index,
        w,
        depth: cfg.depth as u64,
        train_phi_risk: outcome.empirical_phi_risk,
        phi_risk: report.phi_risk,
        excess_phi_risk: report.excess_phi_risk,
        zero_one_risk: report.zero_one_risk,
        excess_risk: report.excess_risk,
        se_excess: report.se_excess,
    }
}

fn atomic_write(path: &Path, rows: &[RiskRow]) -> LabResult<()> {
    let tmp = path.with_extension("csv.tmp");
    write_risk_rows(&tmp, rows)?;
    std::fs::rename(&tmp, path).map_err(io_err(path))
}

struct Appender {
    writer: csv::Writer<std::fs::File>,
    path: PathBuf,
}

impl Appender {
    fn push(&mut self, row: &RiskRow) -> LabResult<()> {
        self.writer.serialize(row).map_err(csv_err(&self.path))?;
        self.writer.flush().map_err(io_err(&self.path))
    }
}

/// Runs every missing `(n, seed)` cell of `cfg` and returns the full table.
///
/// Admissibility and all other config checks run before any training. Cells
/// already present in `output_dir/risks.csv` are not recomputed, so a resumed
/// sweep yields the same table as an uninterrupted one.
pub fn run_sweep(cfg: &ExperimentConfig) -> LabResult<SweepSummary> {
    cfg.validate()?;
    let dist = HardDistribution::new(cfg.params()?)?;
    std::fs::create_dir_all(&cfg.output_dir).map_err(io_err(&cfg.output_dir))?;
    let path = cfg.output_dir.join(RISKS_FILE);

    let mut done: BTreeMap<(u64, u64), RiskRow> = BTreeMap::new();
    if path.exists() {
        for row in read_risk_rows(&path)? {
            done.entry((row.n, row.seed)).or_insert(row);
        }
    }
    // Normalise the existing file (drops a torn final record) before appending.
    let existing: Vec<RiskRow> = done.values().cloned().collect();
    atomic_write(&path, &existing)?;

    let grid = cfg.n_grid.values();
    let todo: Vec<(u64, u64)> = grid
        .iter()
        .flat_map(|&n| (0..cfg.seeds as u64).map(move |s| (n, s)))
        .filter(|key| !done.contains_key(key))
        .collect();
    let skipped = grid.len() * cfg.seeds - todo.len();

    let file = OpenOptions::new().append(true).open(&path).map_err(io_err(&path))?;
    let has_header = !existing.is_empty() || std::fs::metadata(&path).map_err(io_err(&path))?.len() > 0;
    let writer = csv::WriterBuilder::new().has_headers(!has_header).from_writer(file);
    let appender = Mutex::new(Appender {
        writer,
        path: path.clone(),
    });

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| LabError::InvalidConfig(format!("thread pool: {e}")))?;
    // Largest n first so the slowest jobs do not trail at the end.
    let mut order = todo;
    order.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let fresh: Vec<RiskRow> = pool.install(|| {
        order
            .par_iter()
            .map(|&(n, s)| {
                let row = run_cell(cfg, &dist, n, s);
                let mut guard = appender.lock().unwrap_or_else(|p| p.into_inner());
                guard.push(&row).map(|_| row)
            })
            .collect::<LabResult<Vec<_>>>()
    })?;
    drop(appender);

    let computed = fresh.len();
    let failed = fresh.iter().filter(|r| r.is_failed()).count();
    for row in fresh {
        done.insert((row.n, row.seed), row);
    }
    let rows: Vec<RiskRow> = done.into_values().collect();
    atomic_write(&path, &rows)?;
    Ok(SweepSummary {
        rows,
        computed,
        skipped,
        failed,
        path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_seeds_differ() {
        let a = cell_seed(0, 128, 0, SAMPLE_STREAM);
        assert_ne!(a, cell_seed(0, 128, 1, SAMPLE_STREAM));
        assert_ne!(a, cell_seed(0, 256, 0, SAMPLE_STREAM));
        assert_ne!(a, cell_seed(0, 128, 0, TRAIN_STREAM));
        assert_ne!(a, cell_seed(1, 128, 0, SAMPLE_STREAM));
    }
}
