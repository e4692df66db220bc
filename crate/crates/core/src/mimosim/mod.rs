//! Block Rayleigh-fading MIMO channel, exhaustive ML decoding over a codebook,
//! and codeword-error-rate tables with Wilson intervals.

use std::collections::BTreeMap;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stlattice::{CMat, Codebook};

pub const MAX_CODEWORDS: usize = 4096;
pub const MAX_TRIALS: u64 = 100_000;
pub const DEFAULT_PARTITIONS: u32 = 16;
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("codebook: {0}")]
    Codebook(String),
    #[error("empty codebook")]
    Empty,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SimError>;

/// Where the codebook comes from: an exported CSV or a catalog setup.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CodebookRef {
    Path { path: String },
    Setup {
        setup: String,
        #[serde(default = "default_mode")]
        mode: String,
        #[serde(default = "default_constellation")]
        constellation: String,
    },
}

fn default_mode() -> String {
    "symmetric".into()
}

fn default_constellation() -> String {
    "qam4".into()
}

fn default_sigma_h() -> f64 {
    std::f64::consts::FRAC_1_SQRT_2
}

fn default_noise_scale() -> f64 {
    1.0
}

fn default_partitions() -> u32 {
    DEFAULT_PARTITIONS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub codebook: CodebookRef,
    /// replace every codeword by the repetition of its first row
    #[serde(default)]
    pub rank_deficient: bool,
    pub n_t: usize,
    pub n_r_antennas: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub snr_grid_db: Vec<f64>,
    pub trials_per_point: u64,
    pub seed: u64,
    /// per real dimension
    #[serde(default = "default_sigma_h")]
    pub sigma_h: f64,
    /// multiplies every noise sample; 1e-6 gives the near-noiseless proxy
    #[serde(default = "default_noise_scale")]
    pub noise_scale: f64,
    #[serde(default = "default_partitions")]
    pub partitions: u32,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SimError::Config(m));
        if self.trials_per_point < 1 {
            return bad("trials_per_point must be at least 1".into());
        }
        if self.trials_per_point > MAX_TRIALS {
            return bad(format!(
                "trials_per_point {} exceeds the desk-scale limit {MAX_TRIALS}; split the run over several seeds",
                self.trials_per_point
            ));
        }
        if self.snr_grid_db.is_empty() {
            return bad("snr_grid_db is empty".into());
        }
        if self.snr_grid_db.iter().any(|x| !x.is_finite()) || self.snr_grid_db.windows(2).any(|w| w[1] <= w[0]) {
            return bad("snr_grid_db must be finite and strictly increasing".into());
        }
        if self.t != self.n_t {
            return bad(format!("T = {} must equal n_t = {}", self.t, self.n_t));
        }
        if self.n_t == 0 || self.n_r_antennas == 0 {
            return bad("antenna counts must be positive".into());
        }
        if !(self.sigma_h > 0.0 && self.sigma_h.is_finite()) {
            return bad("sigma_h must be positive".into());
        }
        if !(self.noise_scale >= 0.0 && self.noise_scale.is_finite()) {
            return bad("noise_scale must be non-negative".into());
        }
        if self.partitions == 0 {
            return bad("partitions must be positive".into());
        }
        Ok(())
    }
}

/// Codewords as float matrices with their mean energy.
#[derive(Clone, Debug)]
pub struct LoadedCodebook {
    pub source: String,
    pub matrices: Vec<CMat>,
    pub avg_energy: f64,
    pub meta: BTreeMap<String, String>,
}

impl LoadedCodebook {
    pub fn new(source: &str, matrices: Vec<CMat>) -> Result<LoadedCodebook> {
        if matrices.is_empty() {
            return Err(SimError::Empty);
        }
        if matrices.len() > MAX_CODEWORDS {
            return Err(SimError::Codebook(format!(
                "{} codewords exceed the desk-scale limit {MAX_CODEWORDS}; use a smaller constellation",
                matrices.len()
            )));
        }
        let (r, c) = (matrices[0].rows, matrices[0].cols);
        if matrices.iter().any(|m| m.rows != r || m.cols != c) {
            return Err(SimError::Codebook("codewords differ in shape".into()));
        }
        let avg_energy = matrices.iter().map(|m| m.frob2()).sum::<f64>() / matrices.len() as f64;
        Ok(LoadedCodebook { source: source.into(), matrices, avg_energy, meta: BTreeMap::new() })
    }

    pub fn from_codebook(cb: &Codebook) -> Result<LoadedCodebook> {
        let mut out = LoadedCodebook::new(&format!("setup:{}", cb.basis.setup), cb.matrices())?;
        out.meta.insert("setup".into(), cb.basis.setup.clone());
        out.meta.insert("mode".into(), cb.basis.mode.name().into());
        out.meta.insert("constellation".into(), cb.constellation.name());
        Ok(out)
    }

    /// Parse the CSV written by `Codebook::write_csv`.
    pub fn from_csv(source: &str, text: &str) -> Result<LoadedCodebook> {
        let mut meta = BTreeMap::new();
        let mut header: Option<Vec<String>> = None;
        let mut mats = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(kv) = line.strip_prefix('#') {
                if let Some((k, v)) = kv.trim().split_once('=') {
                    meta.insert(k.trim().to_string(), v.trim().to_string());
                }
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let Some(h) = &header else {
                header = Some(fields.iter().map(|s| s.to_string()).collect());
                continue;
            };
            if fields.len() != h.len() {
                return Err(SimError::Codebook(format!("line {}: {} fields, expected {}", ln + 1, fields.len(), h.len())));
            }
            let mut entries = Vec::new();
            let mut re = None;
            for (name, v) in h.iter().zip(&fields) {
                let parse = |v: &str| {
                    v.parse::<f64>().map_err(|_| SimError::Codebook(format!("line {}: bad number {v:?}", ln + 1)))
                };
                if name.starts_with("re_") {
                    re = Some(parse(v)?);
                } else if name.starts_with("im_") {
                    let r = re.take().ok_or_else(|| SimError::Codebook("im column without re column".into()))?;
                    entries.push(Complex64::new(r, parse(v)?));
                }
            }
            let n = (entries.len() as f64).sqrt().round() as usize;
            if n * n != entries.len() || n == 0 {
                return Err(SimError::Codebook(format!("line {}: {} entries is not a square matrix", ln + 1, entries.len())));
            }
            mats.push(CMat { rows: n, cols: n, data: entries });
        }
        let mut out = LoadedCodebook::new(source, mats)?;
        if let Some(e) = meta.get("avg_energy") {
            let e: f64 = e.parse().map_err(|_| SimError::Codebook(format!("bad avg_energy {e:?}")))?;
            if ((e - out.avg_energy) / out.avg_energy).abs() > 1e-9 {
                return Err(SimError::Codebook(format!(
                    "header avg_energy {e} disagrees with the codewords ({})",
                    out.avg_energy
                )));
            }
            out.avg_energy = e;
        }
        out.meta = meta;
        Ok(out)
    }

    /// Each codeword replaced by copies of its first row (rank one).
    pub fn rank_deficient(&self) -> Result<LoadedCodebook> {
        let mats = self
            .matrices
            .iter()
            .map(|m| {
                let mut x = m.clone();
                for r in 1..m.rows {
                    for c in 0..m.cols {
                        x.set(r, c, m.get(0, c));
                    }
                }
                x
            })
            .collect();
        let mut out = LoadedCodebook::new(&format!("{} (first row repeated)", self.source), mats)?;
        out.meta = self.meta.clone();
        Ok(out)
    }
}

/// Standard normal pair by the polar method.
pub fn gaussian_pair<R: Rng>(rng: &mut R) -> (f64, f64) {
    loop {
        let u = 2.0 * rng.gen::<f64>() - 1.0;
        let v = 2.0 * rng.gen::<f64>() - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            let m = (-2.0 * s.ln() / s).sqrt();
            return (u * m, v * m);
        }
    }
}

/// i.i.d. complex Gaussian entries with real and imaginary parts N(0, sigma^2).
pub fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, sigma: f64) -> CMat {
    let mut m = CMat::zeros(rows, cols);
    for z in m.data.iter_mut() {
        let (a, b) = gaussian_pair(rng);
        *z = Complex64::new(a * sigma, b * sigma);
    }
    m
}

pub fn channel_sample<R: Rng>(rng: &mut R, n_r_antennas: usize, n_t: usize, sigma_h: f64) -> CMat {
    gaussian_matrix(rng, n_r_antennas, n_t, sigma_h)
}

/// argmin_j ||Y - H X_j||_F^2, lowest index on ties.
pub fn ml_decode(y: &CMat, h: &CMat, codebook: &[CMat]) -> Result<usize> {
    let mut best: Option<(f64, usize)> = None;
    for (j, x) in codebook.iter().enumerate() {
        let d = y.sub(&h.mul(x)).frob2();
        if best.is_none_or(|(b, _)| d < b) {
            best = Some((d, j));
        }
    }
    best.map(|(_, j)| j).ok_or(SimError::Empty)
}

/// RNG of one partition of one SNR point.
pub fn substream(seed: u64, snr_index: usize, partition: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((snr_index as u64) << 32) | partition as u64);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRateRow {
    pub snr_db: f64,
    pub trials: u64,
    pub errors: u64,
    pub cwer: f64,
    pub ci95_halfwidth: f64,
    /// Wilson interval centre
    pub ci95_center: f64,
}

impl ErrorRateRow {
    pub fn new(snr_db: f64, trials: u64, errors: u64) -> ErrorRateRow {
        let (c, h) = wilson(errors, trials);
        ErrorRateRow { snr_db, trials, errors, cwer: errors as f64 / trials as f64, ci95_halfwidth: h, ci95_center: c }
    }

    pub fn interval(&self) -> (f64, f64) {
        ((self.ci95_center - self.ci95_halfwidth).max(0.0), (self.ci95_center + self.ci95_halfwidth).min(1.0))
    }
}

/// Wilson score interval (centre, half-width) at 95%.
pub fn wilson(errors: u64, trials: u64) -> (f64, f64) {
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = Z95 * Z95;
    let den = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / den;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / den;
    (centre, half)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRateTable {
    pub rows: Vec<ErrorRateRow>,
    pub header: Vec<(String, String)>,
}

impl ErrorRateTable {
    /// Each step either does not increase or stays within overlapping intervals.
    pub fn monotone_up_to_ci(&self) -> bool {
        self.rows.windows(2).all(|w| {
            let (lo0, hi0) = w[0].interval();
            let (lo1, hi1) = w[1].interval();
            w[1].cwer <= w[0].cwer || (lo1 <= hi0 && lo0 <= hi1)
        })
    }

    /// d log10(cwer) / d(snr_db / 10) between the two highest points;
    /// None when either has no errors.
    pub fn terminal_slope(&self) -> Option<f64> {
        let n = self.rows.len();
        if n < 2 {
            return None;
        }
        let (a, b) = (&self.rows[n - 2], &self.rows[n - 1]);
        if a.errors == 0 || b.errors == 0 {
            return None;
        }
        Some((b.cwer.log10() - a.cwer.log10()) / ((b.snr_db - a.snr_db) / 10.0))
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (k, v) in &self.header {
            writeln!(w, "# {k}={v}")?;
        }
        writeln!(w, "snr_db,trials,errors,cwer,ci95_halfwidth")?;
        for r in &self.rows {
            writeln!(w, "{},{},{},{},{}", r.snr_db, r.trials, r.errors, r.cwer, r.ci95_halfwidth)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("utf8")
    }
}

/// Per-entry complex noise variance for a linear SNR, with
/// SNR = E||HX||^2 / E||N||^2.
pub fn noise_variance(avg_energy: f64, sigma_h: f64, t: usize, snr_linear: f64) -> f64 {
    2.0 * sigma_h * sigma_h * avg_energy / (t as f64 * snr_linear)
}

fn run_partition(cfg: &SimConfig, cb: &LoadedCodebook, snr_index: usize, partition: u32, trials: u64, n0: f64) -> u64 {
    let mut rng = substream(cfg.seed, snr_index, partition);
    let sigma_n = (n0 / 2.0).sqrt() * cfg.noise_scale;
    let len = cb.matrices.len();
    let mut errors = 0;
    for _ in 0..trials {
        let sent = rng.gen_range(0..len);
        let h = channel_sample(&mut rng, cfg.n_r_antennas, cfg.n_t, cfg.sigma_h);
        let noise = gaussian_matrix(&mut rng, cfg.n_r_antennas, cfg.t, sigma_n);
        let mut y = h.mul(&cb.matrices[sent]);
        for (a, b) in y.data.iter_mut().zip(&noise.data) {
            *a += b;
        }
        let got = ml_decode(&y, &h, &cb.matrices).expect("nonempty codebook");
        if got != sent {
            errors += 1;
        }
    }
    errors
}

pub fn simulate(cfg: &SimConfig, cb: &LoadedCodebook) -> Result<ErrorRateTable> {
    cfg.validate()?;
    let cb = if cfg.rank_deficient { cb.rank_deficient()? } else { cb.clone() };
    let shape = (cb.matrices[0].rows, cb.matrices[0].cols);
    if shape != (cfg.n_t, cfg.t) {
        return Err(SimError::Config(format!(
            "codewords are {}x{}, config asks for n_t x T = {}x{}",
            shape.0, shape.1, cfg.n_t, cfg.t
        )));
    }
    let p = cfg.partitions as u64;
    let mut rows = Vec::new();
    for (si, &snr_db) in cfg.snr_grid_db.iter().enumerate() {
        let n0 = noise_variance(cb.avg_energy, cfg.sigma_h, cfg.t, 10f64.powf(snr_db / 10.0));
        let errors: u64 = (0..cfg.partitions)
            .into_par_iter()
            .map(|part| {
                let share = cfg.trials_per_point / p + u64::from((part as u64) < cfg.trials_per_point % p);
                run_partition(cfg, &cb, si, part, share, n0)
            })
            .sum();
        rows.push(ErrorRateRow::new(snr_db, cfg.trials_per_point, errors));
    }
    let grid: Vec<String> = cfg.snr_grid_db.iter().map(|x| x.to_string()).collect();
    let header = vec![
        ("tool".to_string(), format!("natord {}", env!("CARGO_PKG_VERSION"))),
        ("codebook".into(), cb.source.clone()),
        ("codebook_meta".into(), cb.meta.iter().map(|(k, v)| format!("{k}:{v}")).collect::<Vec<_>>().join(";")),
        ("codewords".into(), cb.matrices.len().to_string()),
        ("rank_deficient".into(), cfg.rank_deficient.to_string()),
        ("n_t".into(), cfg.n_t.to_string()),
        ("n_r_antennas".into(), cfg.n_r_antennas.to_string()),
        ("T".into(), cfg.t.to_string()),
        ("snr_grid_db".into(), grid.join(" ")),
        ("trials_per_point".into(), cfg.trials_per_point.to_string()),
        ("seed".into(), cfg.seed.to_string()),
        ("sigma_h".into(), cfg.sigma_h.to_string()),
        ("noise_scale".into(), cfg.noise_scale.to_string()),
        ("partitions".into(), cfg.partitions.to_string()),
        ("avg_energy".into(), cb.avg_energy.to_string()),
        ("snr_definition".into(), "E||HX||^2/E||N||^2, N0 = 2 sigma_h^2 avg_energy / (T snr)".into()),
        ("prng".into(), "ChaCha8 seed_from_u64(seed), stream = snr_index<<32 | partition".into()),
        ("gaussian".into(), "polar method".into()),
        ("ci".into(), "Wilson 95%".into()),
    ];
    Ok(ErrorRateTable { rows, header })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_zero_errors() {
        let (c, h) = wilson(0, 1000);
        assert!(c > 0.0 && c - h <= 1e-15);
        assert!(c + h < 0.004);
    }

    #[test]
    fn substreams_differ() {
        let a: u64 = substream(1, 0, 0).gen();
        let b: u64 = substream(1, 0, 1).gen();
        let c: u64 = substream(1, 1, 0).gen();
        assert!(a != b && a != c && b != c);
        let a2: u64 = substream(1, 0, 0).gen();
        assert_eq!(a, a2);
    }
}
