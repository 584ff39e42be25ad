//! Experiment driver behind the `batguard` binary: configuration, the
//! subcommands, and the files they write.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::autoenc::{
    fit_anomaly_model, score_dataset, AnomalyModel, FitOptions, HeadConfig, ThresholdStrategy,
};
use crate::baselines::{
    predict_baseline, train_logistic, train_tree, Baseline, Criterion, LogisticConfig, TreeConfig,
};
use crate::batopt::{select_features, BatConfig, SelectionOptions, SelectionReport};
use crate::dataio::{
    apply_standardizer, fit_standardizer, load_csv, resample, split_indices, stratified_kfold,
    write_csv, CsvSchema, Dataset, SamplingConfig, SplitSpec, StandardizeMethod,
};
use crate::error::{Error, Result};
use crate::metrics::{evaluate, roc_csv, EvalReport};
use crate::neural::{Activation, TrainConfig};
use crate::synth::{gaussian_anomalies, signal_noise, GaussianSpec, SignalNoiseSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AutoencoderSection {
    pub hidden_dims: Vec<usize>,
    pub activation: Activation,
    pub threshold: ThresholdStrategy,
    pub validation_fraction: f64,
    pub legit_only: bool,
    pub head: HeadConfig,
}

impl Default for AutoencoderSection {
    fn default() -> Self {
        AutoencoderSection {
            hidden_dims: vec![15, 15],
            activation: Activation::Tanh,
            threshold: ThresholdStrategy::MaxF1,
            validation_fraction: 0.1,
            legit_only: false,
            head: HeadConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionSection {
    pub bat: BatConfig,
    /// Training epochs per candidate mask.
    pub epochs: usize,
    /// Share of the training split scored by each candidate.
    pub validation_fraction: f64,
}

impl Default for SelectionSection {
    fn default() -> Self {
        // each fitness call trains a network, so the swarm is kept small
        SelectionSection {
            bat: BatConfig {
                n_bats: 10,
                max_iter: 10,
                ..BatConfig::default()
            },
            epochs: 10,
            validation_fraction: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    Logistic,
    TreeGini,
    TreeEntropy,
}

impl BaselineKind {
    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::Logistic => "logistic",
            BaselineKind::TreeGini => "tree_gini",
            BaselineKind::TreeEntropy => "tree_entropy",
        }
    }
}

/// Every tunable of a run. `seed` is copied into each sub-configuration by
/// [`PipelineConfig::resolved`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub data: PathBuf,
    pub has_header: bool,
    pub drop_columns: Vec<String>,
    pub standardize: StandardizeMethod,
    pub split: SplitSpec,
    pub autoencoder: AutoencoderSection,
    pub train: TrainConfig,
    pub selection: SelectionSection,
    pub sampling: SamplingConfig,
    pub kfold: usize,
    pub baselines: Vec<BaselineKind>,
    pub logistic: LogisticConfig,
    pub tree: TreeConfig,
    /// Fixed column mask for `train-ae`, `compare` and `kfold`.
    pub mask: Option<Vec<bool>>,
    pub out: PathBuf,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            data: PathBuf::from("creditcard.csv"),
            has_header: true,
            drop_columns: Vec::new(),
            standardize: StandardizeMethod::Zscore,
            split: SplitSpec::default(),
            autoencoder: AutoencoderSection::default(),
            train: TrainConfig::default(),
            selection: SelectionSection::default(),
            sampling: SamplingConfig::default(),
            kfold: 3,
            baselines: vec![
                BaselineKind::Logistic,
                BaselineKind::TreeGini,
                BaselineKind::TreeEntropy,
            ],
            logistic: LogisticConfig::default(),
            tree: TreeConfig::default(),
            mask: None,
            out: PathBuf::from("out"),
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Copy with the global seed pushed into every seeded sub-configuration.
    pub fn resolved(&self) -> Self {
        let mut c = self.clone();
        c.split.seed = c.seed;
        c.train.seed = c.seed;
        c.selection.bat.seed = c.seed;
        c.logistic.seed = c.seed;
        c.autoencoder.head.train.seed = c.seed;
        c
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        self.selection.bat.validate()?;
        if self.kfold < 2 {
            return Err(Error::InvalidParam(format!(
                "kfold must be at least 2, got {}",
                self.kfold
            )));
        }
        if !(self.autoencoder.validation_fraction > 0.0
            && self.autoencoder.validation_fraction < 1.0)
        {
            return Err(Error::InvalidParam(
                "autoencoder.validation_fraction must lie in (0, 1)".into(),
            ));
        }
        if !(self.selection.validation_fraction > 0.0 && self.selection.validation_fraction < 1.0) {
            return Err(Error::InvalidParam(
                "selection.validation_fraction must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }

    /// SHA-256 of the compact JSON form, ignoring the output directory so
    /// the same experiment hashes the same wherever it is written.
    pub fn hash(&self) -> String {
        let keyed = PipelineConfig {
            out: PathBuf::new(),
            ..self.clone()
        };
        let text = serde_json::to_string(&keyed).expect("config serializes");
        Sha256::digest(text.as_bytes())
            .iter()
            .fold(String::new(), |mut s, b| {
                let _ = write!(s, "{b:02x}");
                s
            })
    }

    fn fit_options(&self) -> FitOptions {
        let ae = &self.autoencoder;
        FitOptions {
            hidden_dims: ae.hidden_dims.clone(),
            activation: ae.activation,
            standardize: self.standardize,
            train: self.train,
            threshold: ae.threshold,
            validation_fraction: ae.validation_fraction,
            legit_only: ae.legit_only,
            sampling: self.sampling,
            head: ae.head,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    TrainAe,
    SelectFeatures,
    Evaluate,
    Compare,
    Kfold,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::TrainAe => "train-ae",
            Command::SelectFeatures => "select-features",
            Command::Evaluate => "evaluate",
            Command::Compare => "compare",
            Command::Kfold => "kfold",
        }
    }
}

/// Options that only some subcommands read.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Model bundle for `evaluate`; defaults to `<out>/model.json`.
    pub model: Option<PathBuf>,
    /// `evaluate` scores every row instead of the test split.
    pub all_rows: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub config: PipelineConfig,
    pub mask: Option<Vec<bool>>,
    pub rows: BTreeMap<String, usize>,
    pub outputs: Vec<String>,
    pub timings_ms: BTreeMap<String, u128>,
}

/// Writes `report.json`, `roc.csv` and `confusion.txt` into `dir`.
pub fn emit_report(report: &EvalReport, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = [
        ("report.json", serde_json::to_string_pretty(report)? + "\n"),
        ("roc.csv", roc_csv(&report.roc)),
        ("confusion.txt", confusion_table(report)),
    ];
    let mut written = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

/// Aligned 2×2 table, real classes as rows and predictions as columns.
pub fn confusion_table(report: &EvalReport) -> String {
    let c = &report.confusion;
    let cells = [
        ["".to_string(), "pred_legit".into(), "pred_fraud".into()],
        ["real_legit".into(), c.tn.to_string(), c.fp.to_string()],
        ["real_fraud".into(), c.fn_.to_string(), c.tp.to_string()],
    ];
    let width = cells.iter().flatten().map(String::len).max().unwrap_or(0);
    let mut out = String::new();
    for row in &cells {
        let line: Vec<String> = row.iter().map(|s| format!("{s:>width$}")).collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let text = serde_json::to_string_pretty(value)? + "\n";
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

struct Run {
    cfg: PipelineConfig,
    command: Command,
    started: Instant,
    timings: BTreeMap<String, u128>,
    rows: BTreeMap<String, usize>,
    outputs: Vec<String>,
    mask: Option<Vec<bool>>,
}

impl Run {
    fn lap(&mut self, stage: &str, since: Instant) {
        self.timings
            .insert(stage.to_string(), since.elapsed().as_millis());
    }

    fn out(&self, name: &str) -> PathBuf {
        self.cfg.out.join(name)
    }

    fn record(&mut self, paths: impl IntoIterator<Item = PathBuf>) {
        for p in paths {
            let rel = p
                .strip_prefix(&self.cfg.out)
                .unwrap_or(&p)
                .to_string_lossy()
                .into_owned();
            self.outputs.push(rel);
        }
    }

    fn write<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.out(name);
        write_json(&path, value)?;
        self.record([path]);
        Ok(())
    }

    fn load_data(&mut self) -> Result<Dataset> {
        let t = Instant::now();
        let d = load_csv(
            &self.cfg.data,
            CsvSchema {
                has_header: self.cfg.has_header,
            },
        )?;
        let d = drop_columns(&d, &self.cfg.drop_columns)?;
        self.rows.insert("data".into(), d.len());
        self.lap("load", t);
        Ok(d)
    }

    fn split(&mut self, d: &Dataset) -> Result<(Dataset, Dataset)> {
        let (train, test) = split_indices(d, &self.cfg.split)?;
        self.rows.insert("train".into(), train.len());
        self.rows.insert("test".into(), test.len());
        Ok((d.subset(&train), d.subset(&test)))
    }

    fn fit_model(&mut self, train: &Dataset, mask: &[bool]) -> Result<AnomalyModel> {
        let t = Instant::now();
        let (mut model, _) = fit_anomaly_model(train, mask, &self.cfg.fit_options())?;
        model.config_hash = self.cfg.hash();
        self.lap("train_autoencoder", t);
        Ok(model)
    }

    fn finish(mut self) -> Result<Manifest> {
        self.timings
            .insert("total".into(), self.started.elapsed().as_millis());
        let manifest_path = self.out("manifest.json");
        self.record([manifest_path.clone()]);
        let manifest = Manifest {
            command: self.command.name().into(),
            config_hash: self.cfg.hash(),
            seed: self.cfg.seed,
            config: self.cfg,
            mask: self.mask,
            rows: self.rows,
            outputs: self.outputs,
            timings_ms: self.timings,
        };
        write_json(&manifest_path, &manifest)?;
        Ok(manifest)
    }
}

fn drop_columns(d: &Dataset, names: &[String]) -> Result<Dataset> {
    if names.is_empty() {
        return Ok(d.clone());
    }
    for n in names {
        if !d.names.contains(n) {
            return Err(Error::InvalidParam(format!(
                "drop_columns: no column named {n:?}"
            )));
        }
    }
    let keep: Vec<bool> = d.names.iter().map(|n| !names.contains(n)).collect();
    d.select_features(&keep)
}

fn mask_for(cfg: &PipelineConfig, d: &Dataset) -> Result<Vec<bool>> {
    match &cfg.mask {
        Some(m) if m.len() != d.n_features() => Err(Error::Dimension {
            expected: d.n_features(),
            got: m.len(),
        }),
        Some(m) => Ok(m.clone()),
        None => Ok(vec![true; d.n_features()]),
    }
}

/// Fits each configured baseline on standardized, resampled training rows
/// and evaluates it on the held-out rows.
fn run_baselines(
    cfg: &PipelineConfig,
    train: &Dataset,
    test: &Dataset,
) -> Result<Vec<(String, EvalReport)>> {
    let params = fit_standardizer(train, cfg.standardize)?;
    let train = resample(
        &apply_standardizer(train, &params)?,
        &cfg.sampling,
        cfg.seed,
    )?;
    let test = apply_standardizer(test, &params)?;
    cfg.baselines
        .iter()
        .map(|&kind| {
            let model = match kind {
                BaselineKind::Logistic => {
                    Baseline::Logistic(train_logistic(&train, &cfg.logistic)?)
                }
                BaselineKind::TreeGini | BaselineKind::TreeEntropy => {
                    let criterion = if kind == BaselineKind::TreeGini {
                        Criterion::Gini
                    } else {
                        Criterion::Entropy
                    };
                    Baseline::Tree(train_tree(
                        &train,
                        &TreeConfig {
                            criterion,
                            ..cfg.tree
                        },
                    )?)
                }
            };
            let (scores, _) = predict_baseline(&model, &test.features)?;
            Ok((
                kind.name().to_string(),
                evaluate(&test.labels, &scores, 0.5)?,
            ))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub auc: f64,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl From<&EvalReport> for ModelSummary {
    fn from(r: &EvalReport) -> Self {
        ModelSummary {
            auc: r.auc,
            accuracy: r.accuracy,
            precision: r.precision,
            recall: r.recall,
            f1: r.f1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionOutput {
    #[serde(flatten)]
    pub selection: SelectionReport,
    pub selected_test_auc: f64,
    pub full_mask_test_auc: f64,
}

/// Runs one subcommand end to end and writes its artifacts under `cfg.out`.
pub fn run_experiment(
    cfg: &PipelineConfig,
    command: Command,
    opts: &RunOptions,
) -> Result<Manifest> {
    let cfg = cfg.resolved();
    cfg.validate()?;
    let mut run = Run {
        cfg,
        command,
        started: Instant::now(),
        timings: BTreeMap::new(),
        rows: BTreeMap::new(),
        outputs: Vec::new(),
        mask: None,
    };
    match command {
        Command::TrainAe => train_ae(&mut run)?,
        Command::SelectFeatures => select(&mut run)?,
        Command::Evaluate => evaluate_model(&mut run, opts)?,
        Command::Compare => compare(&mut run)?,
        Command::Kfold => kfold(&mut run)?,
    }
    run.finish()
}

fn train_ae(run: &mut Run) -> Result<()> {
    let d = run.load_data()?;
    let (train, test) = run.split(&d)?;
    let mask = mask_for(&run.cfg, &d)?;
    let model = run.fit_model(&train, &mask)?;
    let (_, report) = score_dataset(&model, &test)?;
    let files = emit_report(&report, &run.cfg.out)?;
    run.record(files);
    if let Some(head) = &model.head {
        let prepared = model.prepare(&test.features)?;
        let scores = head.scores(&model.network, &prepared)?;
        run.write("head_report.json", &evaluate(&test.labels, &scores, 0.0)?)?;
    }
    run.write("model.json", &model)?;
    run.mask = Some(mask);
    Ok(())
}

fn select(run: &mut Run) -> Result<()> {
    let d = run.load_data()?;
    let (train, test) = run.split(&d)?;
    let inner = SplitSpec {
        train_fraction: 1.0 - run.cfg.selection.validation_fraction,
        stratified: true,
        seed: run.cfg.seed,
    };
    let (fit_idx, val_idx) = split_indices(&train, &inner)?;
    let params = fit_standardizer(&train, run.cfg.standardize)?;
    let fit = apply_standardizer(&train.subset(&fit_idx), &params)?;
    let val = apply_standardizer(&train.subset(&val_idx), &params)?;
    let opts = SelectionOptions {
        bat: run.cfg.selection.bat,
        hidden_dims: run.cfg.autoencoder.hidden_dims.clone(),
        activation: run.cfg.autoencoder.activation,
        train: TrainConfig {
            epochs: run.cfg.selection.epochs,
            ..run.cfg.train
        },
    };
    let t = std::time::Instant::now();
    let selection = select_features(&fit, &val, &opts)?;
    run.lap("select_features", t);

    let full = run.fit_model(&train, &vec![true; d.n_features()])?;
    let (_, full_report) = score_dataset(&full, &test)?;
    let model = run.fit_model(&train, &selection.mask)?;
    let (_, report) = score_dataset(&model, &test)?;
    let files = emit_report(&report, &run.cfg.out)?;
    run.record(files);
    run.write("model.json", &model)?;
    run.mask = Some(selection.mask.clone());
    run.write(
        "selection.json",
        &SelectionOutput {
            selection,
            selected_test_auc: report.auc,
            full_mask_test_auc: full_report.auc,
        },
    )
}

fn evaluate_model(run: &mut Run, opts: &RunOptions) -> Result<()> {
    let path = opts.model.clone().unwrap_or_else(|| run.out("model.json"));
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let model = AnomalyModel::from_json(&text)?;
    let d = run.load_data()?;
    let target = if opts.all_rows { d } else { run.split(&d)?.1 };
    let (_, report) = score_dataset(&model, &target)?;
    let files = emit_report(&report, &run.cfg.out)?;
    run.record(files);
    run.mask = Some(model.feature_mask);
    Ok(())
}

fn compare(run: &mut Run) -> Result<()> {
    let d = run.load_data()?;
    let (train, test) = run.split(&d)?;
    let mask = mask_for(&run.cfg, &d)?;
    let model = run.fit_model(&train, &mask)?;
    let (_, ae_report) = score_dataset(&model, &test)?;
    let t = Instant::now();
    let mut reports = vec![("autoencoder".to_string(), ae_report)];
    reports.extend(run_baselines(&run.cfg, &train, &test)?);
    run.lap("baselines", t);
    let mut summary = BTreeMap::new();
    for (name, report) in &reports {
        let files = emit_report(report, run.out(name))?;
        run.record(files);
        summary.insert(name.clone(), ModelSummary::from(report));
    }
    run.write("compare.json", &summary)?;
    run.mask = Some(mask);
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KfoldOutput {
    pub k: usize,
    pub folds: Vec<BTreeMap<String, ModelSummary>>,
    pub mean_auc: BTreeMap<String, f64>,
}

fn kfold(run: &mut Run) -> Result<()> {
    let d = run.load_data()?;
    let mask = mask_for(&run.cfg, &d)?;
    let mut folds = Vec::new();
    for (i, (train, val)) in stratified_kfold(&d, run.cfg.kfold, run.cfg.seed)?
        .into_iter()
        .enumerate()
    {
        let t = Instant::now();
        let model = run.fit_model(&train, &mask)?;
        let (_, ae) = score_dataset(&model, &val)?;
        let mut fold = BTreeMap::new();
        fold.insert("autoencoder".to_string(), ModelSummary::from(&ae));
        for (name, report) in run_baselines(&run.cfg, &train, &val)? {
            fold.insert(name, ModelSummary::from(&report));
        }
        run.lap(&format!("fold_{i}"), t);
        folds.push(fold);
    }
    let mut mean_auc = BTreeMap::new();
    for name in folds[0].keys() {
        let mean = folds.iter().map(|f| f[name].auc).sum::<f64>() / folds.len() as f64;
        mean_auc.insert(name.clone(), mean);
    }
    run.write(
        "kfold.json",
        &KfoldOutput {
            k: run.cfg.kfold,
            folds,
            mean_auc,
        },
    )?;
    run.mask = Some(mask);
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SyntheticKind {
    Gaussian,
    SignalNoise,
}

/// Writes a synthetic labelled CSV in the input layout.
pub fn generate_synthetic(
    kind: SyntheticKind,
    inliers: usize,
    outliers: usize,
    dim: usize,
    seed: u64,
    path: &Path,
) -> Result<Dataset> {
    let d = match kind {
        SyntheticKind::Gaussian => gaussian_anomalies(&GaussianSpec {
            inliers,
            outliers,
            dim,
            seed,
            ..GaussianSpec::default()
        })?,
        SyntheticKind::SignalNoise => {
            let signal = (dim / 2).max(2);
            signal_noise(&SignalNoiseSpec {
                inliers,
                outliers,
                signal,
                noise: dim.saturating_sub(signal),
                seed,
                ..SignalNoiseSpec::default()
            })?
        }
    };
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    write_csv(&d, path)?;
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::evaluate;

    #[test]
    fn confusion_table_rows_sum_to_totals() {
        let r = evaluate(&[0, 0, 1, 1, 0], &[0.1, 0.9, 0.8, 0.2, 0.3], 0.5).unwrap();
        let table = confusion_table(&r);
        let nums: Vec<Vec<u64>> = table
            .lines()
            .skip(1)
            .map(|l| {
                l.split_whitespace()
                    .skip(1)
                    .map(|v| v.parse().unwrap())
                    .collect()
            })
            .collect();
        assert_eq!(nums[0].iter().sum::<u64>(), 3);
        assert_eq!(nums[1].iter().sum::<u64>(), 2);
        assert_eq!(
            nums,
            vec![
                vec![r.confusion.tn, r.confusion.fp],
                vec![r.confusion.fn_, r.confusion.tp]
            ]
        );
    }

    #[test]
    fn config_roundtrip_and_resolution() {
        let cfg = PipelineConfig {
            seed: 17,
            ..PipelineConfig::default()
        };
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<PipelineConfig>(&text).unwrap(), cfg);
        let r = cfg.resolved();
        assert_eq!(
            (r.split.seed, r.train.seed, r.selection.bat.seed),
            (17, 17, 17)
        );
        assert_eq!(r.hash(), cfg.resolved().hash());
        assert_ne!(r.hash(), PipelineConfig::default().resolved().hash());
        let moved = PipelineConfig {
            out: "elsewhere".into(),
            ..r.clone()
        };
        assert_eq!(moved.hash(), r.hash());
        let partial: PipelineConfig = serde_json::from_str(r#"{"seed": 3, "kfold": 5}"#).unwrap();
        assert_eq!(partial.kfold, 5);
        assert_eq!(partial.train.epochs, 60);
    }

    #[test]
    fn emitted_report_parses_back() {
        let r = evaluate(&[0, 1, 0, 1, 1], &[0.2, 0.9, 0.4, 0.4, 0.7], 0.5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        emit_report(&r, dir.path()).unwrap();
        let back: EvalReport =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
                .unwrap();
        assert_eq!(back, r);
        let roc = std::fs::read_to_string(dir.path().join("roc.csv")).unwrap();
        assert_eq!(roc.lines().next(), Some("fpr,tpr"));
    }

    #[test]
    fn invalid_configs_rejected() {
        let cfg = PipelineConfig {
            kfold: 1,
            ..PipelineConfig::default()
        };
        assert!(cfg.validate().is_err());
        let mut cfg = PipelineConfig::default();
        cfg.train.batch_size = 0;
        assert!(cfg.validate().is_err());
    }
}
