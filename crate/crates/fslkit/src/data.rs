//! Dataset simulation and ingestion.
//!
//! Two simulators (probabilistic mixtures and algebraic functions of a shared
//! random input), CSV ingestion with feature-kind inference, per-feature
//! min-max normalization, and the reference/query split. All randomness is
//! driven by explicit seeds through [`crate::rng::rng_from_seed`].

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Beta as BetaDist, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Whether a feature holds continuous values or a small set of discrete codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Continuous,
    Categorical,
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureKind::Continuous => write!(f, "continuous"),
            FeatureKind::Categorical => write!(f, "categorical"),
        }
    }
}

/// An N×d table of 32-bit floats with per-feature kind tags and names.
///
/// Values are stored row-major, so each sample is a contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTable {
    values: Vec<f32>,
    n_rows: usize,
    n_cols: usize,
    kinds: Vec<FeatureKind>,
    names: Vec<String>,
}

impl DataTable {
    pub fn new(
        values: Vec<f32>,
        n_rows: usize,
        n_cols: usize,
        kinds: Vec<FeatureKind>,
        names: Vec<String>,
    ) -> Result<Self> {
        if n_rows < 2 {
            return Err(Error::InsufficientSamples { need: 2, got: n_rows });
        }
        if n_cols < 1 {
            return Err(Error::InvalidSpec("table needs at least one feature".into()));
        }
        if values.len() != n_rows * n_cols {
            return Err(Error::ShapeMismatch(format!(
                "value buffer holds {} cells, expected {}x{}",
                values.len(),
                n_rows,
                n_cols
            )));
        }
        if kinds.len() != n_cols || names.len() != n_cols {
            return Err(Error::ShapeMismatch(format!(
                "kinds ({}) and names ({}) must both have length {}",
                kinds.len(),
                names.len(),
                n_cols
            )));
        }
        Ok(DataTable { values, n_rows, n_cols, kinds, names })
    }

    /// Build a table with default names and all-continuous kinds.
    pub fn from_values(values: Vec<f32>, n_rows: usize, n_cols: usize) -> Result<Self> {
        let kinds = vec![FeatureKind::Continuous; n_cols];
        let names = default_names(n_cols);
        DataTable::new(values, n_rows, n_cols, kinds, names)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn value(&self, row: usize, col: usize) -> f32 {
        self.values[row * self.n_cols + col]
    }

    pub fn set_value(&mut self, row: usize, col: usize, v: f32) {
        self.values[row * self.n_cols + col] = v;
    }

    pub fn row(&self, row: usize) -> &[f32] {
        &self.values[row * self.n_cols..(row + 1) * self.n_cols]
    }

    pub fn column(&self, col: usize) -> Vec<f32> {
        (0..self.n_rows).map(|r| self.value(r, col)).collect()
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn kinds(&self) -> &[FeatureKind] {
        &self.kinds
    }

    pub fn set_kind(&mut self, col: usize, kind: FeatureKind) {
        self.kinds[col] = kind;
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// New table holding the given rows (by index), in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<DataTable> {
        let mut values = Vec::with_capacity(rows.len() * self.n_cols);
        for &r in rows {
            values.extend_from_slice(self.row(r));
        }
        DataTable::new(values, rows.len(), self.n_cols, self.kinds.clone(), self.names.clone())
    }

    /// New table holding the given columns (by index), in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<DataTable> {
        let mut values = Vec::with_capacity(self.n_rows * cols.len());
        for r in 0..self.n_rows {
            let row = self.row(r);
            for &c in cols {
                values.push(row[c]);
            }
        }
        let kinds = cols.iter().map(|&c| self.kinds[c]).collect();
        let names = cols.iter().map(|&c| self.names[c].clone()).collect();
        DataTable::new(values, self.n_rows, cols.len(), kinds, names)
    }
}

fn default_names(d: usize) -> Vec<String> {
    (0..d).map(|i| format!("f{i}")).collect()
}

/// Mixture family with per-component, per-feature parameter vectors.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MixtureKind {
    Gaussian { means: Vec<Vec<f64>>, variances: Vec<Vec<f64>> },
    Bernoulli { probs: Vec<Vec<f64>> },
    Beta { alphas: Vec<Vec<f64>>, betas: Vec<Vec<f64>> },
}

impl MixtureKind {
    fn n_components(&self) -> usize {
        match self {
            MixtureKind::Gaussian { means, .. } => means.len(),
            MixtureKind::Bernoulli { probs } => probs.len(),
            MixtureKind::Beta { alphas, .. } => alphas.len(),
        }
    }

    fn n_features(&self) -> usize {
        match self {
            MixtureKind::Gaussian { means, .. } => means.first().map_or(0, Vec::len),
            MixtureKind::Bernoulli { probs } => probs.first().map_or(0, Vec::len),
            MixtureKind::Beta { alphas, .. } => alphas.first().map_or(0, Vec::len),
        }
    }

    fn output_kind(&self) -> FeatureKind {
        match self {
            MixtureKind::Bernoulli { .. } => FeatureKind::Categorical,
            _ => FeatureKind::Continuous,
        }
    }
}

/// Specification of a K-component mixture dataset generator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub kind: MixtureKind,
    /// K mixing weights, summing to 1 within 1e-6.
    pub weights: Vec<f64>,
    /// Number of post-generation transform steps, 0..=5.
    pub transform_steps: usize,
}

pub const MAX_MIXTURE_COMPONENTS: usize = 100;
pub const MAX_TRANSFORM_STEPS: usize = 5;
/// Transform chains build a d×d matrix; wider tables are rejected.
pub const MAX_TRANSFORM_FEATURES: usize = 512;

impl MixtureSpec {
    pub fn validate(&self) -> Result<()> {
        let k = self.kind.n_components();
        if k < 1 || k > MAX_MIXTURE_COMPONENTS {
            return Err(Error::InvalidSpec(format!(
                "component count {k} outside 1..={MAX_MIXTURE_COMPONENTS}"
            )));
        }
        if self.weights.len() != k {
            return Err(Error::InvalidSpec(format!(
                "{} weights for {} components",
                self.weights.len(),
                k
            )));
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidSpec(format!("mixing weights sum to {total}, expected 1")));
        }
        if self.weights.iter().any(|&w| w < 0.0) {
            return Err(Error::InvalidSpec("negative mixing weight".into()));
        }
        if self.transform_steps > MAX_TRANSFORM_STEPS {
            return Err(Error::InvalidSpec(format!(
                "transform chain length {} exceeds {MAX_TRANSFORM_STEPS}",
                self.transform_steps
            )));
        }
        let d = self.kind.n_features();
        if d == 0 {
            return Err(Error::InvalidSpec("components must cover at least one feature".into()));
        }
        match &self.kind {
            MixtureKind::Gaussian { means, variances } => {
                if variances.len() != k {
                    return Err(Error::InvalidSpec("means/variances component counts differ".into()));
                }
                for (m, v) in means.iter().zip(variances) {
                    if m.len() != d || v.len() != d {
                        return Err(Error::InvalidSpec("ragged per-feature parameter vectors".into()));
                    }
                    if v.iter().any(|&x| !(0.1..=1.1).contains(&x)) {
                        return Err(Error::InvalidSpec("gaussian variance outside [0.1, 1.1]".into()));
                    }
                }
            }
            MixtureKind::Bernoulli { probs } => {
                for p in probs {
                    if p.len() != d {
                        return Err(Error::InvalidSpec("ragged per-feature parameter vectors".into()));
                    }
                    if p.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
                        return Err(Error::InvalidSpec("bernoulli probability outside [0, 1]".into()));
                    }
                }
            }
            MixtureKind::Beta { alphas, betas } => {
                if betas.len() != k {
                    return Err(Error::InvalidSpec("alphas/betas component counts differ".into()));
                }
                for (a, b) in alphas.iter().zip(betas) {
                    if a.len() != d || b.len() != d {
                        return Err(Error::InvalidSpec("ragged per-feature parameter vectors".into()));
                    }
                    if a.iter().chain(b).any(|&x| !(1.0..=2.0).contains(&x)) {
                        return Err(Error::InvalidSpec("beta parameter outside [1, 2]".into()));
                    }
                }
            }
        }
        Ok(())
    }

    /// Draw a random spec the way the simulated-dataset pool is built:
    /// Gaussian means ~ N(0,1), variances ~ U(0.1,1.1), Bernoulli p ~ U(0,1),
    /// Beta shapes ~ U(1,2), uniform-normalized weights, and a 25% chance of
    /// a 1–5 step transform chain.
    pub fn sample(family: MixtureFamily, k: usize, n_features: usize, seed: u64) -> Result<Self> {
        if k < 1 || k > MAX_MIXTURE_COMPONENTS {
            return Err(Error::InvalidSpec(format!(
                "component count {k} outside 1..={MAX_MIXTURE_COMPONENTS}"
            )));
        }
        let mut rng = rng_from_seed(seed);
        let kind = match family {
            MixtureFamily::Gaussian => {
                let means = (0..k)
                    .map(|_| (0..n_features).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
                    .collect();
                let variances = (0..k)
                    .map(|_| (0..n_features).map(|_| rng.gen_range(0.1..=1.1)).collect())
                    .collect();
                MixtureKind::Gaussian { means, variances }
            }
            MixtureFamily::Bernoulli => {
                let probs = (0..k)
                    .map(|_| (0..n_features).map(|_| rng.gen_range(0.0..=1.0)).collect())
                    .collect();
                MixtureKind::Bernoulli { probs }
            }
            MixtureFamily::Beta => {
                let alphas: Vec<Vec<f64>> = (0..k)
                    .map(|_| (0..n_features).map(|_| rng.gen_range(1.0..=2.0)).collect())
                    .collect();
                let betas = (0..k)
                    .map(|_| (0..n_features).map(|_| rng.gen_range(1.0..=2.0)).collect())
                    .collect();
                MixtureKind::Beta { alphas, betas }
            }
        };
        let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let weights = raw.iter().map(|w| w / total).collect();
        let transform_steps =
            if rng.gen::<f64>() < 0.25 { rng.gen_range(1..=MAX_TRANSFORM_STEPS) } else { 0 };
        Ok(MixtureSpec { kind, weights, transform_steps })
    }
}

/// Base distribution family for [`MixtureSpec::sample`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixtureFamily {
    Gaussian,
    Bernoulli,
    Beta,
}

/// Generate a mixture dataset: for each sample, pick a component from the
/// mixing weights, then draw every feature from that component's marginal.
pub fn generate_mixture(
    spec: &MixtureSpec,
    n_samples: usize,
    n_features: usize,
    seed: u64,
) -> Result<DataTable> {
    spec.validate()?;
    if n_samples < 2 || n_features < 1 {
        return Err(Error::InvalidSpec("need n_samples >= 2 and n_features >= 1".into()));
    }
    if spec.kind.n_features() != n_features {
        return Err(Error::ShapeMismatch(format!(
            "spec covers {} features, asked for {}",
            spec.kind.n_features(),
            n_features
        )));
    }
    if spec.transform_steps > 0 && n_features > MAX_TRANSFORM_FEATURES {
        return Err(Error::InvalidSpec(format!(
            "transform chains are limited to {MAX_TRANSFORM_FEATURES} features, got {n_features}"
        )));
    }

    let mut rng = rng_from_seed(seed);
    let mut raw = vec![0f64; n_samples * n_features];
    for j in 0..n_samples {
        // Component selection always consumes exactly one uniform draw so a
        // zero-weight component leaves the stream identical to dropping it.
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut comp = spec.weights.len() - 1;
        for (k, &w) in spec.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                comp = k;
                break;
            }
        }
        let row = &mut raw[j * n_features..(j + 1) * n_features];
        match &spec.kind {
            MixtureKind::Gaussian { means, variances } => {
                for i in 0..n_features {
                    let z: f64 = rng.sample(StandardNormal);
                    row[i] = means[comp][i] + variances[comp][i].sqrt() * z;
                }
            }
            MixtureKind::Bernoulli { probs } => {
                for i in 0..n_features {
                    row[i] = if rng.gen::<f64>() < probs[comp][i] { 1.0 } else { 0.0 };
                }
            }
            MixtureKind::Beta { alphas, betas } => {
                for i in 0..n_features {
                    let dist = BetaDist::new(alphas[comp][i], betas[comp][i])
                        .map_err(|e| Error::InvalidSpec(format!("beta parameters: {e}")))?;
                    row[i] = dist.sample(&mut rng);
                }
            }
        }
    }

    for _ in 0..spec.transform_steps {
        apply_transform_step(&mut raw, n_samples, n_features, &mut rng);
    }

    let values = raw.iter().map(|&v| v as f32).collect();
    let kinds = vec![spec.kind.output_kind(); n_features];
    DataTable::new(values, n_samples, n_features, kinds, default_names(n_features))
}

fn sigmoid_f64(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn gelu_f64(x: f64) -> f64 {
    let c = (2.0 / std::f64::consts::PI).sqrt();
    0.5 * x * (1.0 + (c * (x + 0.044715 * x * x * x)).tanh())
}

fn minmax_normalize_f64(data: &mut [f64], n: usize, d: usize) {
    for i in 0..d {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for j in 0..n {
            let v = data[j * d + i];
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let range = hi - lo;
        for j in 0..n {
            let v = &mut data[j * d + i];
            *v = if range > 0.0 { (*v - lo) / range } else { 0.0 };
        }
    }
}

fn standard_normalize_f64(data: &mut [f64], n: usize, d: usize) {
    for i in 0..d {
        let mean = (0..n).map(|j| data[j * d + i]).sum::<f64>() / n as f64;
        let var = (0..n).map(|j| (data[j * d + i] - mean).powi(2)).sum::<f64>() / n as f64;
        let std = var.sqrt();
        for j in 0..n {
            let v = &mut data[j * d + i];
            *v = if std > 0.0 { (*v - mean) / std } else { 0.0 };
        }
    }
}

/// One step of the optional post-generation chain: normalize, multiply by a
/// random d×d matrix, apply a nonlinearity, or recombine with an earlier
/// state of the data.
fn apply_transform_step(data: &mut Vec<f64>, n: usize, d: usize, rng: &mut impl Rng) {
    let initial = data.clone();
    match rng.gen_range(0..4u8) {
        0 => {
            if rng.gen::<bool>() {
                standard_normalize_f64(data, n, d);
            } else {
                minmax_normalize_f64(data, n, d);
            }
        }
        1 => {
            // x' = x W with W entries from one of four distributions.
            let dist_pick = rng.gen_range(0..4u8);
            let mut w = vec![0f64; d * d];
            for e in w.iter_mut() {
                *e = match dist_pick {
                    0 => rng.gen_range(0.0..1.0),
                    1 => rng.sample(StandardNormal),
                    2 => rng.gen_range(0.0..1.0), // Beta(1,1) is uniform on [0,1]
                    _ => {
                        if rng.gen::<f64>() < 0.5 {
                            1.0
                        } else {
                            0.0
                        }
                    }
                };
            }
            let mut out = vec![0f64; n * d];
            for j in 0..n {
                let row = &data[j * d..(j + 1) * d];
                let out_row = &mut out[j * d..(j + 1) * d];
                for (c, o) in out_row.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for (r, &x) in row.iter().enumerate() {
                        acc += x * w[r * d + c];
                    }
                    *o = acc;
                }
            }
            *data = out;
        }
        2 => {
            let f: fn(f64) -> f64 = match rng.gen_range(0..5u8) {
                0 => |x: f64| x.max(0.0),
                1 => gelu_f64,
                2 => sigmoid_f64,
                3 => f64::tanh,
                _ => |x: f64| x.signum() * (1.0 + x.abs()).ln(),
            };
            for v in data.iter_mut() {
                *v = f(*v);
            }
        }
        _ => {
            // Residual recombination with the previous (= current) or initial
            // state, directly or after min-max normalization.
            let mut other = if rng.gen::<bool>() { data.clone() } else { initial };
            if rng.gen::<bool>() {
                minmax_normalize_f64(&mut other, n, d);
            }
            for (v, o) in data.iter_mut().zip(&other) {
                *v += o;
            }
        }
    }
}

/// Per-feature algebraic functions of a shared, uniformly drawn input.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum AlgebraicSpec {
    /// f(x) = a x⁴ + b x³ + c x² + d x + e, one `[a,b,c,d,e]` row per feature.
    Polynomial { coeffs: Vec<[f64; 5]> },
    /// f(x) = a · cos(b x + c), one `[a,b,c]` row per feature.
    Sine { coeffs: Vec<[f64; 3]> },
    /// f(x) = log_base(x + 6), one base per feature.
    Logarithmic { bases: Vec<f64> },
}

pub const ALGEBRAIC_INPUT_RANGE: (f64, f64) = (-5.0, 5.0);

impl AlgebraicSpec {
    pub fn n_features(&self) -> usize {
        match self {
            AlgebraicSpec::Polynomial { coeffs } => coeffs.len(),
            AlgebraicSpec::Sine { coeffs } => coeffs.len(),
            AlgebraicSpec::Logarithmic { bases } => bases.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_features() == 0 {
            return Err(Error::InvalidSpec("spec covers no features".into()));
        }
        match self {
            AlgebraicSpec::Polynomial { coeffs } => {
                for c in coeffs {
                    if c.iter().any(|&x| !(-50.0..=50.0).contains(&x)) {
                        return Err(Error::InvalidSpec("polynomial coefficient outside [-50, 50]".into()));
                    }
                }
            }
            AlgebraicSpec::Sine { coeffs } => {
                use std::f64::consts::PI;
                for c in coeffs {
                    if !(-50.0..=50.0).contains(&c[0]) {
                        return Err(Error::InvalidSpec("sine amplitude outside [-50, 50]".into()));
                    }
                    if c[1..].iter().any(|&x| !(-PI..=PI).contains(&x)) {
                        return Err(Error::InvalidSpec("sine frequency/phase outside [-pi, pi]".into()));
                    }
                }
            }
            AlgebraicSpec::Logarithmic { bases } => {
                if bases.iter().any(|&b| !(2.0..=10.0).contains(&b)) {
                    return Err(Error::InvalidSpec("logarithm base outside [2, 10]".into()));
                }
            }
        }
        Ok(())
    }

    /// Evaluate feature `i` at input `x`.
    pub fn eval(&self, i: usize, x: f64) -> f64 {
        match self {
            AlgebraicSpec::Polynomial { coeffs } => {
                let [a, b, c, d, e] = coeffs[i];
                (((a * x + b) * x + c) * x + d) * x + e
            }
            AlgebraicSpec::Sine { coeffs } => {
                let [a, b, c] = coeffs[i];
                a * (b * x + c).cos()
            }
            AlgebraicSpec::Logarithmic { bases } => (x + 6.0).ln() / bases[i].ln(),
        }
    }

    /// Draw a random spec matching the simulated-pool parameter ranges.
    /// Polynomials get degree 3 or 4 (degree 3 zeroes the quartic term).
    pub fn sample(family: AlgebraicFamily, n_features: usize, seed: u64) -> Self {
        use std::f64::consts::PI;
        let mut rng = rng_from_seed(seed);
        match family {
            AlgebraicFamily::Polynomial => {
                let coeffs = (0..n_features)
                    .map(|_| {
                        let degree4 = rng.gen::<bool>();
                        let mut c = [0f64; 5];
                        for v in c.iter_mut() {
                            *v = rng.gen_range(-50.0..=50.0);
                        }
                        if !degree4 {
                            c[0] = 0.0;
                        }
                        c
                    })
                    .collect();
                AlgebraicSpec::Polynomial { coeffs }
            }
            AlgebraicFamily::Sine => {
                let coeffs = (0..n_features)
                    .map(|_| {
                        [rng.gen_range(-50.0..=50.0), rng.gen_range(-PI..=PI), rng.gen_range(-PI..=PI)]
                    })
                    .collect();
                AlgebraicSpec::Sine { coeffs }
            }
            AlgebraicFamily::Logarithmic => {
                let bases = (0..n_features).map(|_| rng.gen_range(2.0..=10.0)).collect();
                AlgebraicSpec::Logarithmic { bases }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgebraicFamily {
    Polynomial,
    Sine,
    Logarithmic,
}

/// Generate an algebraic dataset: one input x per sample drawn uniformly on
/// [-5, 5], every feature a fixed function of that shared input.
pub fn generate_algebraic(
    spec: &AlgebraicSpec,
    n_samples: usize,
    n_features: usize,
    seed: u64,
) -> Result<DataTable> {
    spec.validate()?;
    if n_samples < 2 || n_features < 1 {
        return Err(Error::InvalidSpec("need n_samples >= 2 and n_features >= 1".into()));
    }
    if spec.n_features() != n_features {
        return Err(Error::ShapeMismatch(format!(
            "spec covers {} features, asked for {}",
            spec.n_features(),
            n_features
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut values = Vec::with_capacity(n_samples * n_features);
    for _ in 0..n_samples {
        let x = rng.gen_range(ALGEBRAIC_INPUT_RANGE.0..=ALGEBRAIC_INPUT_RANGE.1);
        for i in 0..n_features {
            values.push(spec.eval(i, x) as f32);
        }
    }
    let kinds = vec![FeatureKind::Continuous; n_features];
    DataTable::new(values, n_samples, n_features, kinds, default_names(n_features))
}

/// Rule deciding which CSV columns are tagged categorical.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CategoricalRule {
    /// Categorical iff every value is integral and the column has at most
    /// this many distinct values.
    pub max_distinct: usize,
    /// Per-column overrides by header name; these win over inference.
    #[serde(default)]
    pub overrides: BTreeMap<String, FeatureKind>,
}

impl Default for CategoricalRule {
    fn default() -> Self {
        CategoricalRule { max_distinct: 20, overrides: BTreeMap::new() }
    }
}

/// Load a rectangular numeric CSV with a header row.
pub fn load_csv(path: impl AsRef<Path>, rule: &CategoricalRule) -> Result<DataTable> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::Csv { path: path.into(), msg: e.to_string() })?;
    let names: Vec<String> =
        reader.headers().map_err(|e| Error::Csv { path: path.into(), msg: e.to_string() })?.iter().map(|h| h.trim().to_string()).collect();
    let d = names.len();
    let mut values: Vec<f32> = Vec::new();
    let mut n_rows = 0usize;
    for (idx, record) in reader.records().enumerate() {
        let row_no = idx + 1; // 1-based data row
        let record = record.map_err(|e| Error::Csv { path: path.into(), msg: e.to_string() })?;
        if record.len() != d {
            return Err(Error::Format {
                row: row_no,
                col: record.len(),
                msg: format!("ragged row: {} cells, expected {}", record.len(), d),
            });
        }
        for (c, cell) in record.iter().enumerate() {
            let v: f32 = cell.trim().parse().map_err(|_| Error::Format {
                row: row_no,
                col: c + 1,
                msg: format!("not a number: {cell:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Format {
                    row: row_no,
                    col: c + 1,
                    msg: format!("non-finite value: {cell:?}"),
                });
            }
            values.push(v);
        }
        n_rows += 1;
    }
    if n_rows == 0 || d == 0 {
        return Err(Error::Format { row: 0, col: 0, msg: "empty table".into() });
    }

    let mut kinds = Vec::with_capacity(d);
    for c in 0..d {
        if let Some(&k) = rule.overrides.get(&names[c]) {
            kinds.push(k);
            continue;
        }
        let mut distinct = std::collections::BTreeSet::new();
        let mut integral = true;
        for r in 0..n_rows {
            let v = values[r * d + c];
            if v.fract() != 0.0 {
                integral = false;
                break;
            }
            distinct.insert((v + 0.0).to_bits()); // +0.0 folds -0.0 into 0.0
        }
        let cat = integral && distinct.len() <= rule.max_distinct;
        kinds.push(if cat { FeatureKind::Categorical } else { FeatureKind::Continuous });
    }
    DataTable::new(values, n_rows, d, kinds, names)
}

/// Write a table as a comma-separated, header-first, UTF-8 CSV.
pub fn save_csv(table: &DataTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut writer =
        csv::Writer::from_path(path).map_err(|e| Error::Csv { path: path.into(), msg: e.to_string() })?;
    writer
        .write_record(table.names())
        .map_err(|e| Error::Csv { path: path.into(), msg: e.to_string() })?;
    for r in 0..table.n_rows() {
        let row: Vec<String> = table.row(r).iter().map(|v| v.to_string()).collect();
        writer.write_record(&row).map_err(|e| Error::Csv { path: path.into(), msg: e.to_string() })?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Min-max normalize every feature to [0, 1] in place; constant features
/// map to 0 everywhere.
pub fn normalize_per_feature(table: &mut DataTable) {
    let (n, d) = (table.n_rows(), table.n_cols());
    for c in 0..d {
        let mut lo = f32::INFINITY;
        let mut hi = f32::NEG_INFINITY;
        for r in 0..n {
            let v = table.value(r, c);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let range = hi - lo;
        for r in 0..n {
            let v = table.value(r, c);
            table.set_value(r, c, if range > 0.0 { (v - lo) / range } else { 0.0 });
        }
    }
}

/// Normalize on the full table, then split rows randomly and evenly into
/// (reference, query) of sizes ⌈N/2⌉ and ⌊N/2⌋.
pub fn normalize_and_split(table: &DataTable, seed: u64) -> Result<(DataTable, DataTable)> {
    let n = table.n_rows();
    if n < 4 {
        return Err(Error::InsufficientSamples { need: 4, got: n });
    }
    let mut normalized = table.clone();
    normalize_per_feature(&mut normalized);

    let mut rng = rng_from_seed(seed);
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(&mut rng);
    let cut = n.div_ceil(2);
    let reference = normalized.select_rows(&indices[..cut])?;
    let query = normalized.select_rows(&indices[cut..])?;
    Ok((reference, query))
}

/// Provenance record for a simulated dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub schema_version: u32,
    pub generator: GeneratorSpec,
    pub n_samples: usize,
    pub n_features: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    Mixture(MixtureSpec),
    Algebraic(AlgebraicSpec),
}

impl DatasetManifest {
    pub fn generate(&self) -> Result<DataTable> {
        match &self.generator {
            GeneratorSpec::Mixture(spec) => {
                generate_mixture(spec, self.n_samples, self.n_features, self.seed)
            }
            GeneratorSpec::Algebraic(spec) => {
                generate_algebraic(spec, self.n_samples, self.n_features, self.seed)
            }
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::InvalidSpec(format!("manifest serialization: {e}")))?;
        std::fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Csv { path: path.into(), msg: e.to_string() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_spec(k: usize, d: usize, mean: f64, var: f64) -> MixtureSpec {
        MixtureSpec {
            kind: MixtureKind::Gaussian {
                means: vec![vec![mean; d]; k],
                variances: vec![vec![var; d]; k],
            },
            weights: vec![1.0 / k as f64; k],
            transform_steps: 0,
        }
    }

    #[test]
    fn bernoulli_degenerate_all_ones() {
        let spec = MixtureSpec {
            kind: MixtureKind::Bernoulli { probs: vec![vec![1.0; 3]] },
            weights: vec![1.0],
            transform_steps: 0,
        };
        let t = generate_mixture(&spec, 10, 3, 7).unwrap();
        assert!(t.values().iter().all(|&v| v == 1.0));
        assert!(t.kinds().iter().all(|&k| k == FeatureKind::Categorical));
    }

    #[test]
    fn gaussian_sample_mean_within_clt_bound() {
        let n = 10_000;
        let t = generate_mixture(&gaussian_spec(1, 4, 0.0, 1.0), n, 4, 11).unwrap();
        let bound = 4.0 / (n as f64).sqrt();
        for c in 0..4 {
            let mean: f64 = t.column(c).iter().map(|&v| v as f64).sum::<f64>() / n as f64;
            assert!(mean.abs() < bound, "feature {c} mean {mean} exceeds {bound}");
        }
    }

    #[test]
    fn gaussian_variance_within_five_standard_errors() {
        let n = 10_000;
        let t = generate_mixture(&gaussian_spec(1, 2, 0.0, 1.0), n, 2, 19).unwrap();
        // SE of the sample variance of a normal is sigma^2 * sqrt(2/N).
        let se = (2.0 / n as f64).sqrt();
        for c in 0..2 {
            let col = t.column(c);
            let mean: f64 = col.iter().map(|&v| v as f64).sum::<f64>() / n as f64;
            let var: f64 =
                col.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / n as f64;
            assert!((var - 1.0).abs() < 5.0 * se, "variance {var}");
        }
    }

    #[test]
    fn zero_weight_component_matches_single_component_stream() {
        let d = 3;
        let mut two = gaussian_spec(2, d, 0.0, 0.5);
        two.weights = vec![1.0, 0.0];
        if let MixtureKind::Gaussian { means, variances } = &mut two.kind {
            means[1] = vec![9.0; d];
            variances[1] = vec![1.1; d];
        }
        let one = gaussian_spec(1, d, 0.0, 0.5);
        let a = generate_mixture(&two, 50, d, 5).unwrap();
        let b = generate_mixture(&one, 50, d, 5).unwrap();
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn mixture_determinism_bit_identical() {
        let spec = MixtureSpec::sample(MixtureFamily::Beta, 3, 6, 21).unwrap();
        let a = generate_mixture(&spec, 64, 6, 9).unwrap();
        let b = generate_mixture(&spec, 64, 6, 9).unwrap();
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn invalid_mixture_weights_rejected() {
        let mut spec = gaussian_spec(2, 2, 0.0, 0.5);
        spec.weights = vec![0.6, 0.6];
        assert!(matches!(generate_mixture(&spec, 8, 2, 1), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn transform_chain_rejected_above_feature_cap() {
        let d = MAX_TRANSFORM_FEATURES + 1;
        let mut spec = MixtureSpec {
            kind: MixtureKind::Bernoulli { probs: vec![vec![0.5; d]] },
            weights: vec![1.0],
            transform_steps: 1,
        };
        assert!(generate_mixture(&spec, 4, d, 1).is_err());
        spec.transform_steps = 0;
        assert!(generate_mixture(&spec, 4, d, 1).is_ok());
    }

    #[test]
    fn transform_chain_deterministic() {
        let mut spec = MixtureSpec::sample(MixtureFamily::Gaussian, 2, 8, 3).unwrap();
        spec.transform_steps = 4;
        let a = generate_mixture(&spec, 32, 8, 2).unwrap();
        let b = generate_mixture(&spec, 32, 8, 2).unwrap();
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn polynomial_constant_feature() {
        let spec = AlgebraicSpec::Polynomial { coeffs: vec![[0.0, 0.0, 0.0, 0.0, 7.0]] };
        let t = generate_algebraic(&spec, 10, 1, 1).unwrap();
        assert!(t.values().iter().all(|&v| v == 7.0));
    }

    #[test]
    fn sine_zero_amplitude_is_constant_zero() {
        let spec = AlgebraicSpec::Sine { coeffs: vec![[0.0, 1.0, 0.5]] };
        let t = generate_algebraic(&spec, 10, 1, 2).unwrap();
        assert!(t.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn logarithm_closed_form() {
        let spec = AlgebraicSpec::Logarithmic { bases: vec![2.0] };
        assert!((spec.eval(0, 2.0) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn algebraic_shares_input_across_features() {
        // Two identical features must be exactly equal column-to-column.
        let spec = AlgebraicSpec::Polynomial { coeffs: vec![[0.0, 1.0, 0.0, 0.0, 0.0]; 2] };
        let t = generate_algebraic(&spec, 20, 2, 4).unwrap();
        assert_eq!(t.column(0), t.column(1));
    }

    #[test]
    fn csv_roundtrip_and_kind_inference() {
        let dir = std::env::temp_dir().join(format!("fslkit-data-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("t.csv");
        std::fs::write(&path, "a,b,c\n0,0.5,1\n1,1.5,2\n0,2.5,3\n").unwrap();
        let t = load_csv(&path, &CategoricalRule::default()).unwrap();
        assert_eq!((t.n_rows(), t.n_cols()), (3, 3));
        assert_eq!(t.kinds()[0], FeatureKind::Categorical); // {0,1}
        assert_eq!(t.kinds()[1], FeatureKind::Continuous); // non-integral
        assert_eq!(t.kinds()[2], FeatureKind::Categorical); // {1,2,3}
        save_csv(&t, dir.join("u.csv")).unwrap();
        let u = load_csv(dir.join("u.csv"), &CategoricalRule::default()).unwrap();
        assert_eq!(t.values(), u.values());
    }

    #[test]
    fn csv_override_wins_over_inference() {
        let dir = std::env::temp_dir().join(format!("fslkit-data-ov-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("t.csv");
        std::fs::write(&path, "a,b\n0,1\n1,0\n").unwrap();
        let mut rule = CategoricalRule::default();
        rule.overrides.insert("a".into(), FeatureKind::Continuous);
        let t = load_csv(&path, &rule).unwrap();
        assert_eq!(t.kinds()[0], FeatureKind::Continuous);
        assert_eq!(t.kinds()[1], FeatureKind::Categorical);
    }

    #[test]
    fn csv_errors_carry_location() {
        let dir = std::env::temp_dir().join(format!("fslkit-data-err-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let ragged = dir.join("r.csv");
        std::fs::write(&ragged, "a,b\n1,2\n3\n").unwrap();
        match load_csv(&ragged, &CategoricalRule::default()) {
            Err(Error::Format { row: 2, .. }) => {}
            other => panic!("expected ragged-row error, got {other:?}"),
        }
        let bad = dir.join("b.csv");
        std::fs::write(&bad, "a,b\n1,x\n3,4\n").unwrap();
        match load_csv(&bad, &CategoricalRule::default()) {
            Err(Error::Format { row: 1, col: 2, .. }) => {}
            other => panic!("expected non-numeric error, got {other:?}"),
        }
        let empty = dir.join("e.csv");
        std::fs::write(&empty, "a,b\n").unwrap();
        assert!(matches!(
            load_csv(&empty, &CategoricalRule::default()),
            Err(Error::Format { .. })
        ));
    }

    #[test]
    fn minmax_normalization_examples() {
        let mut t = DataTable::from_values(vec![2.0, 4.0, 6.0], 3, 1).unwrap();
        normalize_per_feature(&mut t);
        assert_eq!(t.column(0), vec![0.0, 0.5, 1.0]);

        let mut c = DataTable::from_values(vec![5.0; 4], 4, 1).unwrap();
        normalize_per_feature(&mut c);
        assert_eq!(c.column(0), vec![0.0; 4]);
    }

    #[test]
    fn split_is_an_even_partition() {
        let values: Vec<f32> = (0..100).map(|v| v as f32).collect();
        let t = DataTable::from_values(values, 100, 1).unwrap();
        let (r, q) = normalize_and_split(&t, 13).unwrap();
        assert_eq!(r.n_rows(), 50);
        assert_eq!(q.n_rows(), 50);
        let mut all: Vec<f32> = r.column(0).into_iter().chain(q.column(0)).collect();
        all.sort_by(f32::total_cmp);
        let expect: Vec<f32> = (0..100).map(|v| v as f32 / 99.0).collect();
        assert_eq!(all, expect);
    }

    #[test]
    fn split_rejects_tiny_tables() {
        let t = DataTable::from_values(vec![1.0, 2.0, 3.0], 3, 1).unwrap();
        assert!(matches!(
            normalize_and_split(&t, 1),
            Err(Error::InsufficientSamples { need: 4, got: 3 })
        ));
    }

    #[test]
    fn manifest_roundtrip_regenerates_identically() {
        let spec = MixtureSpec::sample(MixtureFamily::Gaussian, 2, 5, 77).unwrap();
        let manifest = DatasetManifest {
            schema_version: 1,
            generator: GeneratorSpec::Mixture(spec),
            n_samples: 32,
            n_features: 5,
            seed: 123,
        };
        let dir = std::env::temp_dir().join(format!("fslkit-manifest-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("m.json");
        manifest.save(&path).unwrap();
        let loaded = DatasetManifest::load(&path).unwrap();
        assert_eq!(manifest.generate().unwrap().values(), loaded.generate().unwrap().values());
    }
}
