//! CSV tables and the binary network format.
//!
//! Network files are little-endian: a version byte, `d` and `L` as `u32`, the
//! `L` hidden widths as `u32`, the clamp bound `M` as `f64`, then for each of
//! the `L + 1` layers its row-major weight matrix followed by its biases, all
//! as `f64`.

use std::io::{Read, Write};
use std::path::Path;

use excess_risk_core::bounds::RateCurve;
use excess_risk_core::distribution::LabeledSample;
use excess_risk_core::network::{Layer, NetworkSpec};
use excess_risk_core::surrogate::CalibrationTable;
use serde::{Deserialize, Serialize};

use crate::error::{csv_err, io_err, LabError, LabResult};

/// Format version written as the first byte of a network file.
pub const NETWORK_FORMAT_VERSION: u8 = 1;

/// One `(n, seed)` cell of a sweep. Failed cells carry `NaN` metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskRow {
    pub n: u64,
    pub seed: u64,
    #[serde(rename = "W")]
    pub w: u64,
    pub depth: u64,
    pub train_phi_risk: f64,
    pub phi_risk: f64,
    pub excess_phi_risk: f64,
    pub zero_one_risk: f64,
    pub excess_risk: f64,
    pub se_excess: f64,
}

impl RiskRow {
    pub fn failed(n: u64, seed: u64, w: u64, depth: u64) -> Self {
        Self {
            n,
            seed,
            w,
            depth,
            train_phi_risk: f64::NAN,
            phi_risk: f64::NAN,
            excess_phi_risk: f64::NAN,
            zero_one_risk: f64::NAN,
            excess_risk: f64::NAN,
            se_excess: f64::NAN,
        }
    }

    pub fn is_failed(&self) -> bool {
        self.excess_risk.is_nan()
    }

    /// Equality that treats the `NaN`s of failed rows as equal.
    pub fn same_as(&self, other: &Self) -> bool {
        let bits = |r: &Self| {
            [
                r.train_phi_risk,
                r.phi_risk,
                r.excess_phi_risk,
                r.zero_one_risk,
                r.excess_risk,
                r.se_excess,
            ]
            .map(f64::to_bits)
        };
        (self.n, self.seed, self.w, self.depth) == (other.n, other.seed, other.w, other.depth) && bits(self) == bits(other)
    }
}

pub fn write_risk_rows(path: &Path, rows: &[RiskRow]) -> LabResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for row in rows {
        w.serialize(row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Reads a risk table; a truncated final record (from an interrupted append)
/// is skipped.
pub fn read_risk_rows(path: &Path) -> LabResult<Vec<RiskRow>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let mut rows = Vec::new();
    let mut records = r.deserialize::<RiskRow>().peekable();
    while let Some(rec) = records.next() {
        match rec {
            Ok(row) => rows.push(row),
            Err(_) if records.peek().is_none() => break,
            Err(e) => return Err(csv_err(path)(e)),
        }
    }
    Ok(rows)
}

/// `x_1, …, x_d, y, eta` per sample.
pub fn write_samples(path: &Path, samples: &[LabeledSample]) -> LabResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    let d = samples.first().map_or(0, |s| s.x.len());
    let mut header: Vec<String> = (1..=d).map(|i| format!("x_{i}")).collect();
    header.push("y".into());
    header.push("eta".into());
    w.write_record(&header).map_err(csv_err(path))?;
    for s in samples {
        let mut rec: Vec<String> = s.x.iter().map(|v| v.to_string()).collect();
        rec.push(s.y.to_string());
        rec.push(s.eta_at_x.to_string());
        w.write_record(&rec).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_samples(path: &Path) -> LabResult<Vec<LabeledSample>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err(path))?;
        let values: Vec<f64> = rec
            .iter()
            .map(|v| v.parse::<f64>().map_err(|e| LabError::Format(format!("{}: {e}", path.display()))))
            .collect::<LabResult<_>>()?;
        if values.len() < 3 {
            return Err(LabError::Format(format!("{}: sample rows need x, y and eta", path.display())));
        }
        let d = values.len() - 2;
        out.push(LabeledSample {
            x: values[..d].to_vec(),
            y: u8::from(values[d] != 0.0),
            eta_at_x: values[d + 1],
        });
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
struct CalibrationRecord {
    eta: f64,
    #[serde(rename = "H")]
    h: f64,
    #[serde(rename = "H_minus")]
    h_minus: f64,
    psi_theta: f64,
}

/// `eta, H, H_minus, psi_theta` with `θ = 2η − 1`.
pub fn write_calibration<W: Write>(out: W, table: &CalibrationTable) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for k in 0..table.len() {
        w.serialize(CalibrationRecord {
            eta: table.eta[k],
            h: table.h[k],
            h_minus: table.h_minus[k],
            psi_theta: table.psi[k],
        })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CurveRecord {
    pub n: f64,
    pub value: f64,
    pub kind: String,
    pub alpha: f64,
}

/// `n, value, kind, alpha` rows for each curve sampled on `points` log-spaced
/// sizes in `[n_min, n_max]`.
pub fn write_curves<W: Write>(out: W, curves: &[RateCurve], n_min: f64, n_max: f64, points: usize) -> LabResult<()> {
    let mut w = csv::Writer::from_writer(out);
    for c in curves {
        for (n, value) in c.sample(n_min, n_max, points)? {
            w.serialize(CurveRecord {
                n,
                value,
                kind: c.kind.name().into(),
                alpha: c.alpha,
            })
            .map_err(csv_err("<curves>"))?;
        }
    }
    w.flush().map_err(io_err("<curves>"))
}

pub fn encode_network<W: Write>(mut out: W, net: &NetworkSpec, clamp: f64) -> std::io::Result<()> {
    out.write_all(&[NETWORK_FORMAT_VERSION])?;
    out.write_all(&(net.input_dim() as u32).to_le_bytes())?;
    out.write_all(&(net.depth() as u32).to_le_bytes())?;
    for w in net.widths() {
        out.write_all(&(w as u32).to_le_bytes())?;
    }
    out.write_all(&clamp.to_le_bytes())?;
    for layer in net.layers() {
        for v in layer.weights.iter().chain(&layer.bias) {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> LabResult<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(|e| LabError::Format(e.to_string()))?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> LabResult<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(|e| LabError::Format(e.to_string()))?;
    Ok(f64::from_le_bytes(b))
}

/// Inverse of [`encode_network`]; the clamp half-range is `M/2`.
pub fn decode_network<R: Read>(mut r: R) -> LabResult<NetworkSpec> {
    let mut version = [0u8; 1];
    r.read_exact(&mut version).map_err(|e| LabError::Format(e.to_string()))?;
    if version[0] != NETWORK_FORMAT_VERSION {
        return Err(LabError::Format(format!("unsupported format version {}", version[0])));
    }
    let d = read_u32(&mut r)? as usize;
    let depth = read_u32(&mut r)? as usize;
    // Bound the declared sizes before allocating.
    const MAX_UNITS: usize = 1 << 24;
    if d == 0 || depth == 0 || d > MAX_UNITS || depth > MAX_UNITS {
        return Err(LabError::Format(format!("implausible shape d = {d}, L = {depth}")));
    }
    let widths = (0..depth)
        .map(|_| read_u32(&mut r).map(|w| w as usize))
        .collect::<LabResult<Vec<_>>>()?;
    if widths.iter().any(|&w| w == 0 || w > MAX_UNITS) {
        return Err(LabError::Format("implausible hidden width".into()));
    }
    let clamp = read_f64(&mut r)?;
    let mut layers = Vec::with_capacity(depth + 1);
    let mut prev = d;
    for &w in widths.iter().chain(std::iter::once(&1)) {
        let mut layer = Layer::zeros(prev, w);
        for v in layer.weights.iter_mut().chain(layer.bias.iter_mut()) {
            *v = read_f64(&mut r)?;
        }
        layers.push(layer);
        prev = w;
    }
    let mut rest = Vec::new();
    r.read_to_end(&mut rest).map_err(|e| LabError::Format(e.to_string()))?;
    if !rest.is_empty() {
        return Err(LabError::Format(format!("{} trailing bytes", rest.len())));
    }
    Ok(NetworkSpec::from_layers(d, layers, clamp / 2.0)?)
}

pub fn save_network(path: &Path, net: &NetworkSpec) -> LabResult<()> {
    let mut buf = Vec::new();
    encode_network(&mut buf, net, 2.0 * net.clamp_half()).map_err(io_err(path))?;
    std::fs::write(path, buf).map_err(io_err(path))
}

pub fn load_network(path: &Path) -> LabResult<NetworkSpec> {
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    decode_network(bytes.as_slice())
}
