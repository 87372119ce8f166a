//! Non-parametric statistical descriptor maps.
//!
//! For every feature of a normalized table this computes a fixed-width row of
//! marginal summaries: mean, standard deviation, median (single order
//! statistic), mean absolute deviation, p-order raw moments, a histogram over
//! uniform bins on [0, 1], and the empirical CDF at uniform thresholds. The
//! row width depends only on the configuration, never on the table, and rows
//! permute exactly with the features.
//!
//! Samples are sorted per feature before accumulation, so the map is
//! bit-identical under any row permutation. Accumulation runs in f64 and is
//! stored as f32.

use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::DataTable;
use crate::error::{Error, Result};

/// Which measures to compute. Defaults to the tuned configuration:
/// mean, std, median, MAD, moments p ∈ {2,3}, 100-bin histogram and CDF;
/// the four extra measures stay off (they were evaluated and dropped).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatConfig {
    pub mean: bool,
    pub std_dev: bool,
    pub median: bool,
    pub mad: bool,
    pub p_orders: Vec<u32>,
    pub histogram: bool,
    pub cdf: bool,
    pub n_bins: usize,
    #[serde(default)]
    pub skewness: bool,
    #[serde(default)]
    pub kurtosis: bool,
    #[serde(default)]
    pub dispersion: bool,
    #[serde(default)]
    pub trimmed_mean: bool,
    #[serde(default = "default_trim_fraction")]
    pub trim_fraction: f64,
}

fn default_trim_fraction() -> f64 {
    0.1
}

const DISPERSION_EPS: f64 = 1e-8;

impl Default for StatConfig {
    fn default() -> Self {
        StatConfig {
            mean: true,
            std_dev: true,
            median: true,
            mad: true,
            p_orders: vec![2, 3],
            histogram: true,
            cdf: true,
            n_bins: 100,
            skewness: false,
            kurtosis: false,
            dispersion: false,
            trimmed_mean: false,
            trim_fraction: 0.1,
        }
    }
}

impl StatConfig {
    /// Same measures, narrower histogram/CDF; used by reduced-width models.
    pub fn with_bins(n_bins: usize) -> Self {
        StatConfig { n_bins, ..StatConfig::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_bins < 2 {
            return Err(Error::InvalidSpec(format!("n_bins {} < 2", self.n_bins)));
        }
        if self.width() == 0 {
            return Err(Error::InvalidSpec("no statistical measures enabled".into()));
        }
        Ok(())
    }

    /// Descriptor width t produced per feature.
    pub fn width(&self) -> usize {
        let mut t = 0;
        t += self.mean as usize;
        t += self.std_dev as usize;
        t += self.median as usize;
        t += self.mad as usize;
        t += self.p_orders.len();
        if self.histogram {
            t += self.n_bins;
        }
        if self.cdf {
            t += self.n_bins;
        }
        t += self.skewness as usize;
        t += self.kurtosis as usize;
        t += self.dispersion as usize;
        t += self.trimmed_mean as usize;
        t
    }

    fn blocks(&self) -> Vec<(String, usize)> {
        let mut blocks = Vec::new();
        if self.mean {
            blocks.push(("mean".to_string(), 1));
        }
        if self.std_dev {
            blocks.push(("std".to_string(), 1));
        }
        if self.median {
            blocks.push(("median".to_string(), 1));
        }
        if self.mad {
            blocks.push(("mad".to_string(), 1));
        }
        for p in &self.p_orders {
            blocks.push((format!("moment_p{p}"), 1));
        }
        if self.histogram {
            blocks.push(("histogram".to_string(), self.n_bins));
        }
        if self.cdf {
            blocks.push(("cdf".to_string(), self.n_bins));
        }
        if self.skewness {
            blocks.push(("skewness".to_string(), 1));
        }
        if self.kurtosis {
            blocks.push(("kurtosis".to_string(), 1));
        }
        if self.dispersion {
            blocks.push(("dispersion".to_string(), 1));
        }
        if self.trimmed_mean {
            blocks.push(("trimmed_mean".to_string(), 1));
        }
        blocks
    }
}

/// A d×t matrix of descriptor values, row i summarizing feature i, plus the
/// named column ranges of each measure block.
#[derive(Debug, Clone, PartialEq)]
pub struct StatMap {
    values: Vec<f32>,
    d: usize,
    t: usize,
    layout: Vec<(String, Range<usize>)>,
}

impl StatMap {
    pub fn n_features(&self) -> usize {
        self.d
    }

    pub fn width(&self) -> usize {
        self.t
    }

    pub fn row(&self, feature: usize) -> &[f32] {
        &self.values[feature * self.t..(feature + 1) * self.t]
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn layout(&self) -> &[(String, Range<usize>)] {
        &self.layout
    }

    pub fn block(&self, name: &str) -> Option<Range<usize>> {
        self.layout.iter().find(|(n, _)| n == name).map(|(_, r)| r.clone())
    }

    /// Rows rearranged by `perm` (row i of the result = row perm[i]).
    pub fn permute_rows(&self, perm: &[usize]) -> StatMap {
        let mut values = Vec::with_capacity(self.values.len());
        for &p in perm {
            values.extend_from_slice(self.row(p));
        }
        StatMap { values, d: self.d, t: self.t, layout: self.layout.clone() }
    }

    /// Export one CSV row per feature plus a JSON sidecar with the block
    /// layout, for debugging and the thresholding baseline.
    pub fn export_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut writer = csv::Writer::from_path(path)
            .map_err(|e| Error::Csv { path: path.into(), msg: e.to_string() })?;
        let mut header = vec!["feature".to_string()];
        for (name, range) in &self.layout {
            if range.len() == 1 {
                header.push(name.clone());
            } else {
                header.extend(range.clone().enumerate().map(|(k, _)| format!("{name}_{k}")));
            }
        }
        writer.write_record(&header).map_err(|e| Error::Csv { path: path.into(), msg: e.to_string() })?;
        for i in 0..self.d {
            let mut record = vec![i.to_string()];
            record.extend(self.row(i).iter().map(|v| v.to_string()));
            writer.write_record(&record).map_err(|e| Error::Csv { path: path.into(), msg: e.to_string() })?;
        }
        writer.flush().map_err(|e| Error::io(path, e))?;

        let sidecar = path.with_extension("layout.json");
        let layout: Vec<serde_json::Value> = self
            .layout
            .iter()
            .map(|(name, r)| serde_json::json!({"block": name, "start": r.start, "end": r.end}))
            .collect();
        let doc = serde_json::json!({"schema_version": 1, "n_features": self.d, "width": self.t, "layout": layout});
        std::fs::write(&sidecar, serde_json::to_string_pretty(&doc).unwrap())
            .map_err(|e| Error::io(sidecar, e))
    }
}

/// Compute the descriptor map of a normalized table.
pub fn compute_statmap(table: &DataTable, cfg: &StatConfig) -> Result<StatMap> {
    cfg.validate()?;
    let n = table.n_rows();
    if n < 2 {
        return Err(Error::InsufficientSamples { need: 2, got: n });
    }
    let d = table.n_cols();
    let t = cfg.width();
    let mut layout = Vec::new();
    let mut start = 0;
    for (name, len) in cfg.blocks() {
        layout.push((name, start..start + len));
        start += len;
    }

    let mut values = vec![0f32; d * t];
    let mut sorted = vec![0f32; n];
    for i in 0..d {
        for r in 0..n {
            sorted[r] = table.value(r, i);
        }
        sorted.sort_by(f32::total_cmp);
        let row = &mut values[i * t..(i + 1) * t];
        fill_feature_row(&sorted, cfg, row);
    }
    Ok(StatMap { values, d, t, layout })
}

/// All measures for one feature, from its ascending-sorted values.
fn fill_feature_row(sorted: &[f32], cfg: &StatConfig, out: &mut [f32]) {
    let n = sorted.len();
    let nf = n as f64;
    let mean = sorted.iter().map(|&v| v as f64).sum::<f64>() / nf;
    let var = sorted.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / nf;
    let std = var.sqrt();

    let mut k = 0;
    if cfg.mean {
        out[k] = mean as f32;
        k += 1;
    }
    if cfg.std_dev {
        out[k] = std as f32;
        k += 1;
    }
    if cfg.median {
        // Single order statistic x_(ceil(N/2)) rather than the two-point
        // interpolation.
        out[k] = sorted[n.div_ceil(2) - 1];
        k += 1;
    }
    if cfg.mad {
        let mad = sorted.iter().map(|&v| (v as f64 - mean).abs()).sum::<f64>() / nf;
        out[k] = mad as f32;
        k += 1;
    }
    for &p in &cfg.p_orders {
        let m = sorted.iter().map(|&v| (v as f64).powi(p as i32)).sum::<f64>() / nf;
        out[k] = m as f32;
        k += 1;
    }
    if cfg.histogram {
        let bins = &mut out[k..k + cfg.n_bins];
        let scale = cfg.n_bins as f64;
        for &v in sorted {
            // Interior edges go right; 1.0 lands in the last bin.
            let b = ((v as f64 * scale) as usize).min(cfg.n_bins - 1);
            bins[b] += 1.0;
        }
        for b in bins.iter_mut() {
            *b /= n as f32;
        }
        k += cfg.n_bins;
    }
    if cfg.cdf {
        // Thresholds c_j = (j+1)/n_bins; sorted input gives the counts by a
        // single forward scan.
        let mut idx = 0usize;
        for j in 0..cfg.n_bins {
            let c = (j + 1) as f64 / cfg.n_bins as f64;
            while idx < n && (sorted[idx] as f64) <= c {
                idx += 1;
            }
            out[k + j] = (idx as f64 / nf) as f32;
        }
        k += cfg.n_bins;
    }
    if cfg.skewness {
        let s = if std > 0.0 {
            sorted.iter().map(|&v| ((v as f64 - mean) / std).powi(3)).sum::<f64>() / nf
        } else {
            0.0
        };
        out[k] = s as f32;
        k += 1;
    }
    if cfg.kurtosis {
        let s = if std > 0.0 {
            sorted.iter().map(|&v| ((v as f64 - mean) / std).powi(4)).sum::<f64>() / nf
        } else {
            0.0
        };
        out[k] = s as f32;
        k += 1;
    }
    if cfg.dispersion {
        out[k] = (var / (mean + DISPERSION_EPS)) as f32;
        k += 1;
    }
    if cfg.trimmed_mean {
        // (1/(N-r)) * sum_{j=r+1}^{N-r} x_(j) with r = floor(trim * N),
        // kept exactly in the published form.
        let r = (cfg.trim_fraction * nf) as usize;
        let hi = n.saturating_sub(r);
        let s: f64 = if r < hi { sorted[r..hi].iter().map(|&v| v as f64).sum() } else { 0.0 };
        out[k] = (s / (nf - r as f64)) as f32;
        k += 1;
    }
    debug_assert_eq!(k, cfg.width());
}

/// True iff permuting table columns permutes map rows exactly.
pub fn statmap_row_permute_check(table: &DataTable, perm: &[usize], cfg: &StatConfig) -> Result<bool> {
    let d = table.n_cols();
    if perm.len() != d {
        return Err(Error::ShapeMismatch(format!("permutation length {} != {d}", perm.len())));
    }
    let mut seen = vec![false; d];
    for &p in perm {
        if p >= d || seen[p] {
            return Err(Error::InvalidSpec("not a permutation".into()));
        }
        seen[p] = true;
    }
    let base = compute_statmap(table, cfg)?;
    let permuted_table = table.select_columns(perm)?;
    let permuted_map = compute_statmap(&permuted_table, cfg)?;
    Ok(permuted_map.values() == base.permute_rows(perm).values())
}
