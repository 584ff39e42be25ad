//! Dataset loading, standardization, stratified partitioning and class
//! rebalancing.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::matrix::{sq_dist, Matrix};
use crate::rng::{seeded, stream};

pub const LEGIT: u8 = 0;
pub const FRAUD: u8 = 1;

/// Feature matrix with binary labels (1 = fraud) and column names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub features: Matrix,
    pub labels: Vec<u8>,
    pub names: Vec<String>,
}

impl Dataset {
    pub fn new(features: Matrix, labels: Vec<u8>, names: Vec<String>) -> Result<Self> {
        check_dim(features.rows(), labels.len())?;
        check_dim(features.cols(), names.len())?;
        if let Some(row) = labels.iter().position(|&l| l > 1) {
            return Err(Error::BadLabel {
                row: row + 1,
                value: f64::from(labels[row]),
            });
        }
        Ok(Dataset {
            features,
            labels,
            names,
        })
    }

    /// Dataset with generated names `f0, f1, ...`.
    pub fn unnamed(features: Matrix, labels: Vec<u8>) -> Result<Self> {
        let names = (0..features.cols()).map(|i| format!("f{i}")).collect();
        Dataset::new(features, labels, names)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    pub fn count(&self, label: u8) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    pub fn class_indices(&self, label: u8) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.labels[i] == label)
            .collect()
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            names: self.names.clone(),
        }
    }

    /// Keeps the columns whose mask entry is set.
    pub fn select_features(&self, mask: &[bool]) -> Result<Dataset> {
        check_dim(self.n_features(), mask.len())?;
        let cols: Vec<usize> = (0..mask.len()).filter(|&c| mask[c]).collect();
        Ok(Dataset {
            features: self.features.select_cols(&cols),
            labels: self.labels.clone(),
            names: cols.iter().map(|&c| self.names[c].clone()).collect(),
        })
    }

    fn require_both_classes(&self) -> Result<()> {
        if self.count(LEGIT) == 0 || self.count(FRAUD) == 0 {
            return Err(Error::Degenerate(format!(
                "both classes required, found {} legit and {} fraud",
                self.count(LEGIT),
                self.count(FRAUD)
            )));
        }
        Ok(())
    }

    /// (minority label, majority label); ties resolve to fraud as minority.
    fn minority_majority(&self) -> (u8, u8) {
        if self.count(FRAUD) <= self.count(LEGIT) {
            (FRAUD, LEGIT)
        } else {
            (LEGIT, FRAUD)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub has_header: bool,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema { has_header: true }
    }
}

/// Reads a comma-separated file whose last column is the 0/1 class label.
///
/// Row and column numbers in errors are 1-based and count data rows only.
pub fn load_csv(path: impl AsRef<Path>, schema: CsvSchema) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(schema.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(std::io::BufReader::new(file));

    let mut names: Option<Vec<String>> = None;
    if schema.has_header {
        let header = reader.headers()?;
        if header.len() < 2 {
            return Err(Error::RowLength {
                row: 0,
                expected: 2,
                found: header.len(),
            });
        }
        names = Some(
            header
                .iter()
                .take(header.len() - 1)
                .map(str::to_owned)
                .collect(),
        );
    }

    let mut width = names.as_ref().map(|n| n.len() + 1);
    let mut data = Vec::new();
    let mut labels = Vec::new();
    let mut record = csv::StringRecord::new();
    let mut row = 0;
    while reader.read_record(&mut record)? {
        row += 1;
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected || expected < 2 {
            return Err(Error::RowLength {
                row,
                expected: expected.max(2),
                found: record.len(),
            });
        }
        for (c, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::NonNumeric {
                row,
                col: c + 1,
                value: cell.to_owned(),
            })?;
            if c + 1 == expected {
                if v == 0.0 {
                    labels.push(LEGIT);
                } else if v == 1.0 {
                    labels.push(FRAUD);
                } else {
                    return Err(Error::BadLabel { row, value: v });
                }
            } else {
                data.push(v);
            }
        }
    }
    let cols = width.map_or(0, |w| w - 1);
    let names = names.unwrap_or_else(|| (0..cols).map(|i| format!("f{i}")).collect());
    let features = Matrix::from_vec(labels.len(), cols, data)?;
    Dataset::new(features, labels, names)
}

/// Writes the dataset in the same layout `load_csv` reads, with a header.
pub fn write_csv(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let mut header: Vec<&str> = d.names.iter().map(String::as_str).collect();
    header.push("Class");
    w.write_record(&header)?;
    let mut buf = Vec::with_capacity(d.n_features() + 1);
    for (r, row) in d.features.iter_rows().enumerate() {
        buf.clear();
        buf.extend(row.iter().map(|v| format!("{v:?}")));
        buf.push(d.labels[r].to_string());
        w.write_record(&buf)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum StandardizeMethod {
    #[default]
    Zscore,
    Minmax,
}

/// Per-column affine standardization parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum StandardizerParams {
    Zscore { mean: Vec<f64>, std: Vec<f64> },
    Minmax { min: Vec<f64>, max: Vec<f64> },
}

impl StandardizerParams {
    pub fn n_features(&self) -> usize {
        match self {
            StandardizerParams::Zscore { mean, .. } => mean.len(),
            StandardizerParams::Minmax { min, .. } => min.len(),
        }
    }

    pub fn method(&self) -> StandardizeMethod {
        match self {
            StandardizerParams::Zscore { .. } => StandardizeMethod::Zscore,
            StandardizerParams::Minmax { .. } => StandardizeMethod::Minmax,
        }
    }

    /// (offset, scale) for column `c`: `z = (x - offset) / scale`.
    fn affine(&self, c: usize) -> (f64, f64) {
        match self {
            StandardizerParams::Zscore { mean, std } => (mean[c], std[c]),
            StandardizerParams::Minmax { min, max } => (min[c], max[c] - min[c]),
        }
    }

    pub fn transform(&self, m: &Matrix) -> Result<Matrix> {
        check_dim(self.n_features(), m.cols())?;
        let mut out = m.clone();
        let coeffs: Vec<(f64, f64)> = (0..m.cols()).map(|c| self.affine(c)).collect();
        for r in 0..out.rows() {
            for (v, &(off, scale)) in out.row_mut(r).iter_mut().zip(&coeffs) {
                *v = (*v - off) / scale;
            }
        }
        Ok(out)
    }

    pub fn inverse_transform(&self, m: &Matrix) -> Result<Matrix> {
        check_dim(self.n_features(), m.cols())?;
        let mut out = m.clone();
        let coeffs: Vec<(f64, f64)> = (0..m.cols()).map(|c| self.affine(c)).collect();
        for r in 0..out.rows() {
            for (v, &(off, scale)) in out.row_mut(r).iter_mut().zip(&coeffs) {
                *v = *v * scale + off;
            }
        }
        Ok(out)
    }

    /// Restricts the parameters to the masked columns.
    pub fn select(&self, mask: &[bool]) -> Result<StandardizerParams> {
        check_dim(self.n_features(), mask.len())?;
        let pick = |v: &[f64]| -> Vec<f64> {
            v.iter()
                .zip(mask)
                .filter(|(_, &m)| m)
                .map(|(x, _)| *x)
                .collect()
        };
        Ok(match self {
            StandardizerParams::Zscore { mean, std } => StandardizerParams::Zscore {
                mean: pick(mean),
                std: pick(std),
            },
            StandardizerParams::Minmax { min, max } => StandardizerParams::Minmax {
                min: pick(min),
                max: pick(max),
            },
        })
    }
}

/// Column statistics over every row of `d`. Population standard deviation;
/// a zero spread is replaced by 1 so constant columns map to 0.
pub fn fit_standardizer(d: &Dataset, method: StandardizeMethod) -> Result<StandardizerParams> {
    fit_standardizer_matrix(&d.features, method)
}

pub fn fit_standardizer_matrix(
    m: &Matrix,
    method: StandardizeMethod,
) -> Result<StandardizerParams> {
    if m.rows() < 2 {
        return Err(Error::Empty("standardizer needs at least two rows"));
    }
    let n = m.rows() as f64;
    let cols = 0..m.cols();
    Ok(match method {
        StandardizeMethod::Zscore => {
            let mut mean = Vec::with_capacity(m.cols());
            let mut std = Vec::with_capacity(m.cols());
            for c in cols {
                let col = m.column(c);
                let mu = col.iter().sum::<f64>() / n;
                let var = col.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / n;
                let sigma = var.sqrt();
                mean.push(mu);
                std.push(if sigma > 0.0 && sigma.is_finite() {
                    sigma
                } else {
                    1.0
                });
            }
            StandardizerParams::Zscore { mean, std }
        }
        StandardizeMethod::Minmax => {
            let mut min = Vec::with_capacity(m.cols());
            let mut max = Vec::with_capacity(m.cols());
            for c in cols {
                let col = m.column(c);
                let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                min.push(lo);
                max.push(if hi > lo { hi } else { lo + 1.0 });
            }
            StandardizerParams::Minmax { min, max }
        }
    })
}

pub fn apply_standardizer(d: &Dataset, p: &StandardizerParams) -> Result<Dataset> {
    Ok(Dataset {
        features: p.transform(&d.features)?,
        labels: d.labels.clone(),
        names: d.names.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub stratified: bool,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.75,
            stratified: true,
            seed: 0,
        }
    }
}

/// Index form of [`stratified_split`]: (train, test), each in ascending order.
pub fn split_indices(d: &Dataset, s: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    split_indices_on(d, s, stream::SPLIT)
}

pub(crate) fn split_indices_on(
    d: &Dataset,
    s: &SplitSpec,
    rng_stream: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(s.train_fraction > 0.0 && s.train_fraction < 1.0) {
        return Err(Error::InvalidParam(format!(
            "train_fraction must lie in (0, 1), got {}",
            s.train_fraction
        )));
    }
    d.require_both_classes()?;
    let mut rng = seeded(s.seed, rng_stream);
    let groups = if s.stratified {
        vec![d.class_indices(LEGIT), d.class_indices(FRAUD)]
    } else {
        vec![(0..d.len()).collect()]
    };
    let quotas = apportion(
        &groups.iter().map(Vec::len).collect::<Vec<_>>(),
        s.train_fraction,
    );
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (mut g, n_train) in groups.into_iter().zip(quotas) {
        g.shuffle(&mut rng);
        train.extend_from_slice(&g[..n_train]);
        test.extend_from_slice(&g[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Per-group train counts: `floor(fraction * size)` each, then single rows
/// handed out by largest fractional remainder (ties to the earlier group)
/// until the total reaches `floor(fraction * sum)`.
fn apportion(sizes: &[usize], fraction: f64) -> Vec<usize> {
    let total: usize = sizes.iter().sum();
    let target = (fraction * total as f64).floor() as usize;
    let mut quota: Vec<usize> = sizes
        .iter()
        .map(|&n| (fraction * n as f64).floor() as usize)
        .collect();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    let rem = |g: usize| fraction * sizes[g] as f64 - quota[g] as f64;
    order.sort_by(|&a, &b| rem(b).total_cmp(&rem(a)).then(a.cmp(&b)));
    let mut missing = target.saturating_sub(quota.iter().sum());
    for g in order {
        if missing == 0 {
            break;
        }
        if quota[g] < sizes[g] {
            quota[g] += 1;
            missing -= 1;
        }
    }
    quota
}

/// Partitions `d` into (train, test) with per-class train size
/// `floor(train_fraction * class_count)`, topped up to
/// `floor(train_fraction * len)` overall.
pub fn stratified_split(d: &Dataset, s: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(d, s)?;
    Ok((d.subset(&train), d.subset(&test)))
}

/// Validation-fold indices for stratified k-fold, each fold ascending.
pub fn kfold_indices(d: &Dataset, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::InvalidParam(format!(
            "k must be at least 2, got {k}"
        )));
    }
    for label in [LEGIT, FRAUD] {
        let n = d.count(label);
        if n < k {
            return Err(Error::Degenerate(format!(
                "class {label} has {n} rows, fewer than k = {k}"
            )));
        }
    }
    let mut rng = seeded(seed, stream::KFOLD);
    let mut folds = vec![Vec::new(); k];
    // dealing continues across classes so fold sizes stay balanced overall
    let mut next = 0;
    for label in [LEGIT, FRAUD] {
        let mut idx = d.class_indices(label);
        idx.shuffle(&mut rng);
        for i in idx {
            folds[next % k].push(i);
            next += 1;
        }
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(folds)
}

/// `k` (train, validation) pairs; every row is validated exactly once.
pub fn stratified_kfold(d: &Dataset, k: usize, seed: u64) -> Result<Vec<(Dataset, Dataset)>> {
    let folds = kfold_indices(d, k, seed)?;
    let mut in_fold = vec![0usize; d.len()];
    for (f, idx) in folds.iter().enumerate() {
        for &i in idx {
            in_fold[i] = f;
        }
    }
    Ok(folds
        .iter()
        .enumerate()
        .map(|(f, val)| {
            let train: Vec<usize> = (0..d.len()).filter(|&i| in_fold[i] != f).collect();
            (d.subset(&train), d.subset(val))
        })
        .collect())
}

/// Randomly drops majority rows until both classes have the minority count.
pub fn undersample(d: &Dataset, seed: u64) -> Result<Dataset> {
    d.require_both_classes()?;
    let (minority, majority) = d.minority_majority();
    let keep_n = d.count(minority);
    let mut major = d.class_indices(majority);
    major.shuffle(&mut seeded(seed, stream::UNDERSAMPLE));
    let mut keep = d.class_indices(minority);
    keep.extend_from_slice(&major[..keep_n]);
    keep.sort_unstable();
    Ok(d.subset(&keep))
}

/// Indices of the `k` nearest rows of `points` to `points[i]` (excluding
/// itself), Euclidean, ties to the lower index.
fn nearest_neighbors(points: &Matrix, i: usize, k: usize) -> Vec<usize> {
    let x = points.row(i);
    let mut cand: Vec<(f64, usize)> = (0..points.rows())
        .filter(|&j| j != i)
        .map(|j| (sq_dist(x, points.row(j)), j))
        .collect();
    cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    cand.truncate(k);
    cand.into_iter().map(|(_, j)| j).collect()
}

/// Synthetic minority oversampling. Appends interpolated minority rows
/// `x + u (x_nn - x)` until `minority / majority` reaches `target_ratio`.
/// Original rows come first, synthetic rows after them.
pub fn smote(d: &Dataset, k_neighbors: usize, target_ratio: f64, seed: u64) -> Result<Dataset> {
    d.require_both_classes()?;
    if k_neighbors == 0 {
        return Err(Error::InvalidParam("k_neighbors must be at least 1".into()));
    }
    if !(target_ratio > 0.0 && target_ratio.is_finite()) {
        return Err(Error::InvalidParam(format!(
            "target_ratio must be positive, got {target_ratio}"
        )));
    }
    let (minority, majority) = d.minority_majority();
    let min_idx = d.class_indices(minority);
    if min_idx.len() <= k_neighbors {
        return Err(Error::Degenerate(format!(
            "minority class has {} rows, needs more than k_neighbors = {k_neighbors}",
            min_idx.len()
        )));
    }
    let target = (target_ratio * d.count(majority) as f64).round() as usize;
    let n_new = target.saturating_sub(min_idx.len());

    let points = d.features.select_rows(&min_idx);
    let mut neighbors: Vec<Option<Vec<usize>>> = vec![None; points.rows()];
    let mut rng = seeded(seed, stream::SMOTE);
    let mut synth = Matrix::zeros(n_new, d.n_features());
    for s in 0..n_new {
        let i = rng.random_range(0..points.rows());
        let nn = neighbors[i].get_or_insert_with(|| nearest_neighbors(&points, i, k_neighbors));
        let j = nn[rng.random_range(0..nn.len())];
        let u: f64 = rng.random();
        let (x, y) = (points.row(i), points.row(j));
        for (out, (a, b)) in synth.row_mut(s).iter_mut().zip(x.iter().zip(y)) {
            *out = a + u * (b - a);
        }
    }
    let mut labels = d.labels.clone();
    labels.extend(std::iter::repeat_n(minority, n_new));
    Dataset::new(d.features.vstack(&synth)?, labels, d.names.clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    #[default]
    None,
    Under,
    Smote,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingConfig {
    pub mode: Sampling,
    pub smote_k: usize,
    pub smote_ratio: f64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            mode: Sampling::None,
            smote_k: 5,
            smote_ratio: 1.0,
        }
    }
}

pub fn resample(d: &Dataset, cfg: &SamplingConfig, seed: u64) -> Result<Dataset> {
    match cfg.mode {
        Sampling::None => Ok(d.clone()),
        Sampling::Under => undersample(d, seed),
        Sampling::Smote => smote(d, cfg.smote_k, cfg.smote_ratio, seed),
    }
}
