//! Autoencoder anomaly detector: reconstruction error as the fraud score.

use serde::{Deserialize, Serialize};

use crate::dataio::{
    apply_standardizer, fit_standardizer_matrix, resample, split_indices_on, Dataset,
    SamplingConfig, SplitSpec, StandardizeMethod, StandardizerParams, FRAUD, LEGIT,
};
use crate::error::{check_dim, Error, Result};
use crate::matrix::Matrix;
use crate::metrics::{evaluate, summary_metrics, ConfusionMatrix, EvalReport};
use crate::neural::{self, Activation, LayerSpec, Network, TrainConfig};
use crate::rng::stream;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoencoderSpec {
    pub input_dim: usize,
    /// Hidden widths from input side to output side; must read the same
    /// reversed so the decoder mirrors the encoder.
    pub hidden_dims: Vec<usize>,
    pub activation: Activation,
}

impl AutoencoderSpec {
    pub fn new(input_dim: usize) -> Self {
        AutoencoderSpec {
            input_dim,
            hidden_dims: vec![15, 15],
            activation: Activation::Tanh,
        }
    }

    pub fn layer_specs(&self) -> Result<Vec<LayerSpec>> {
        if self.input_dim == 0 {
            return Err(Error::InvalidParam(
                "autoencoder input_dim must be positive".into(),
            ));
        }
        if self.hidden_dims.is_empty() || self.hidden_dims.contains(&0) {
            return Err(Error::InvalidParam(format!(
                "hidden_dims must be non-empty and positive, got {:?}",
                self.hidden_dims
            )));
        }
        if !self.hidden_dims.iter().eq(self.hidden_dims.iter().rev()) {
            return Err(Error::InvalidParam(format!(
                "hidden_dims {:?} is not mirror-symmetric",
                self.hidden_dims
            )));
        }
        let mut dims = vec![self.input_dim];
        dims.extend_from_slice(&self.hidden_dims);
        dims.push(self.input_dim);
        let last = dims.len() - 2;
        Ok(dims
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let act = if i == last {
                    Activation::Identity
                } else {
                    self.activation
                };
                LayerSpec::new(w[0], w[1], act)
            })
            .collect())
    }

    /// Layers up to and including the first narrowest hidden layer.
    pub fn encoder_depth(&self) -> usize {
        let min = self.hidden_dims.iter().min().copied().unwrap_or(0);
        self.hidden_dims.iter().position(|&h| h == min).unwrap_or(0) + 1
    }
}

/// `input → hidden... → input`; hidden layers use the configured activation, the
/// output layer is linear.
pub fn build_autoencoder(spec: &AutoencoderSpec, seed: u64) -> Result<Network> {
    neural::init_network(&spec.layer_specs()?, seed)
}

/// Trains on the feature matrix alone; labels never enter this path.
pub fn train_autoencoder(
    net: &Network,
    rows: &Matrix,
    cfg: &TrainConfig,
) -> Result<(Network, Vec<f64>)> {
    neural::train_sgd(net, rows, rows, cfg)
}

/// Per-row mean squared reconstruction error.
pub fn reconstruction_errors(n: &Network, rows: &Matrix) -> Result<Vec<f64>> {
    neural::row_losses(n, rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdStrategy {
    #[default]
    MaxF1,
    Quantile(f64),
}

/// Decision threshold on validation errors; `error > threshold` is fraud.
pub fn fit_threshold(errors: &[f64], labels: &[u8], strategy: ThresholdStrategy) -> Result<f64> {
    check_dim(errors.len(), labels.len())?;
    if errors.iter().any(|e| !e.is_finite()) {
        return Err(Error::InvalidParam("non-finite validation error".into()));
    }
    match strategy {
        ThresholdStrategy::MaxF1 => max_f1_threshold(errors, labels),
        ThresholdStrategy::Quantile(q) => {
            if !(0.0..=1.0).contains(&q) {
                return Err(Error::InvalidParam(format!("quantile {q} outside [0, 1]")));
            }
            let mut legit: Vec<f64> = errors
                .iter()
                .zip(labels)
                .filter(|(_, &l)| l == LEGIT)
                .map(|(e, _)| *e)
                .collect();
            if legit.is_empty() {
                return Err(Error::Degenerate(
                    "no legit rows for quantile threshold".into(),
                ));
            }
            legit.sort_by(f64::total_cmp);
            let pos = q * (legit.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            Ok(legit[lo] + (pos - lo as f64) * (legit[hi] - legit[lo]))
        }
    }
}

fn max_f1_threshold(errors: &[f64], labels: &[u8]) -> Result<f64> {
    let pos = labels.iter().filter(|&&l| l == FRAUD).count() as u64;
    let neg = labels.len() as u64 - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::Degenerate(
            "max_f1 threshold needs both classes in validation".into(),
        ));
    }
    let mut order: Vec<usize> = (0..errors.len()).collect();
    order.sort_by(|&a, &b| errors[b].total_cmp(&errors[a]));
    // sweep candidates from the largest error down; at candidate t every row
    // with a strictly larger error has already been counted positive
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut best: Option<(f64, f64)> = None;
    let mut i = 0;
    while i < order.len() {
        let t = errors[order[i]];
        let m = ConfusionMatrix {
            tp,
            fp,
            tn: neg - fp,
            fn_: pos - tp,
        };
        let f1 = summary_metrics(&m).f1;
        // descending sweep: ">=" keeps the lowest threshold among ties
        if best.is_none_or(|(b, _)| f1 >= b) {
            best = Some((f1, t));
        }
        while i < order.len() && errors[order[i]] == t {
            if labels[order[i]] == FRAUD {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
    }
    best.map(|(_, t)| t)
        .ok_or(Error::Empty("validation errors"))
}

/// Trained detector: column mask, standardizer over the kept columns,
/// autoencoder, and decision threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalyModel {
    pub version: u32,
    pub network: Network,
    pub standardizer: StandardizerParams,
    pub threshold: f64,
    pub feature_mask: Vec<bool>,
    pub feature_names: Vec<String>,
    pub config_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub head: Option<ClassifierHead>,
}

impl AnomalyModel {
    pub fn validate(&self) -> Result<()> {
        let selected = self.feature_mask.iter().filter(|&&m| m).count();
        check_dim(selected, self.network.input_dim())?;
        check_dim(selected, self.standardizer.n_features())?;
        check_dim(selected, self.network.output_dim())?;
        if !self.threshold.is_finite() {
            return Err(Error::InvalidParam("model threshold is not finite".into()));
        }
        Ok(())
    }

    /// Masked and standardized network inputs for raw rows.
    pub fn prepare(&self, rows: &Matrix) -> Result<Matrix> {
        check_dim(self.feature_mask.len(), rows.cols())?;
        let cols: Vec<usize> = (0..self.feature_mask.len())
            .filter(|&c| self.feature_mask[c])
            .collect();
        self.standardizer.transform(&rows.select_cols(&cols))
    }

    pub fn scores(&self, rows: &Matrix) -> Result<Vec<f64>> {
        if rows.rows() == 0 {
            return Ok(Vec::new());
        }
        reconstruction_errors(&self.network, &self.prepare(rows)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: AnomalyModel = serde_json::from_str(text)?;
        if m.version != MODEL_FORMAT_VERSION {
            return Err(Error::InvalidParam(format!(
                "unsupported model format version {}",
                m.version
            )));
        }
        m.validate()?;
        Ok(m)
    }
}

/// 1 where the reconstruction error exceeds the model threshold.
pub fn classify(model: &AnomalyModel, rows: &Matrix) -> Result<Vec<u8>> {
    Ok(model
        .scores(rows)?
        .into_iter()
        .map(|e| u8::from(e > model.threshold))
        .collect())
}

/// Per-row errors and a report ranking rows by error.
pub fn score_dataset(model: &AnomalyModel, d: &Dataset) -> Result<(Vec<f64>, EvalReport)> {
    let errors = model.scores(&d.features)?;
    let report = evaluate(&d.labels, &errors, model.threshold)?;
    Ok((errors, report))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HeadConfig {
    pub enabled: bool,
    pub hidden_size: usize,
    pub train: TrainConfig,
}

impl Default for HeadConfig {
    fn default() -> Self {
        HeadConfig {
            enabled: false,
            hidden_size: 4,
            train: TrainConfig::default(),
        }
    }
}

/// Supervised two-output head on top of the frozen encoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierHead {
    pub encoder_depth: usize,
    pub network: Network,
}

impl ClassifierHead {
    /// `output[1] − output[0]` per row; larger means more likely fraud.
    pub fn scores(&self, autoencoder: &Network, prepared: &Matrix) -> Result<Vec<f64>> {
        let encoded = neural::predict(&autoencoder.prefix(self.encoder_depth)?, prepared)?;
        let out = neural::predict(&self.network, &encoded)?;
        Ok(out.iter_rows().map(|r| r[1] - r[0]).collect())
    }
}

pub fn train_head(
    autoencoder: &Network,
    encoder_depth: usize,
    prepared: &Matrix,
    labels: &[u8],
    cfg: &HeadConfig,
    activation: Activation,
) -> Result<ClassifierHead> {
    check_dim(prepared.rows(), labels.len())?;
    let encoder = autoencoder.prefix(encoder_depth)?;
    let encoded = neural::predict(&encoder, prepared)?;
    let specs = [
        LayerSpec::new(encoder.output_dim(), cfg.hidden_size, activation),
        LayerSpec::new(cfg.hidden_size, 2, Activation::Identity),
    ];
    let head = neural::init_network(&specs, cfg.train.seed)?;
    let mut targets = Matrix::zeros(labels.len(), 2);
    for (r, &l) in labels.iter().enumerate() {
        targets.set(r, usize::from(l == FRAUD), 1.0);
    }
    let (network, _) = neural::train_sgd(&head, &encoded, &targets, &cfg.train)?;
    Ok(ClassifierHead {
        encoder_depth,
        network,
    })
}

/// Everything needed to fit an [`AnomalyModel`] from raw training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    pub hidden_dims: Vec<usize>,
    pub activation: Activation,
    pub standardize: StandardizeMethod,
    pub train: TrainConfig,
    pub threshold: ThresholdStrategy,
    /// Share of the training rows held out (stratified) for the threshold.
    pub validation_fraction: f64,
    /// Train the autoencoder on legit rows only.
    pub legit_only: bool,
    pub sampling: SamplingConfig,
    pub head: HeadConfig,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            hidden_dims: vec![15, 15],
            activation: Activation::Tanh,
            standardize: StandardizeMethod::Zscore,
            train: TrainConfig::default(),
            threshold: ThresholdStrategy::MaxF1,
            validation_fraction: 0.1,
            legit_only: false,
            sampling: SamplingConfig::default(),
            head: HeadConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitInfo {
    pub loss_history: Vec<f64>,
    pub fit_rows: usize,
    pub validation_rows: usize,
}

/// Masks columns, fits the standardizer on all training rows, holds out a
/// stratified validation share, trains the autoencoder on the rest and
/// places the threshold on the validation errors.
pub fn fit_anomaly_model(
    train: &Dataset,
    mask: &[bool],
    opts: &FitOptions,
) -> Result<(AnomalyModel, FitInfo)> {
    let masked = train.select_features(mask)?;
    if masked.n_features() == 0 {
        return Err(Error::InvalidParam(
            "feature mask selects no columns".into(),
        ));
    }
    let standardizer = fit_standardizer_matrix(&masked.features, opts.standardize)?;
    let scaled = apply_standardizer(&masked, &standardizer)?;

    let split = SplitSpec {
        train_fraction: 1.0 - opts.validation_fraction,
        stratified: true,
        seed: opts.seed,
    };
    let (fit_idx, val_idx) = split_indices_on(&scaled, &split, stream::VALIDATION)?;
    let fit = resample(&scaled.subset(&fit_idx), &opts.sampling, opts.seed)?;
    let val = scaled.subset(&val_idx);
    let fit_rows = if opts.legit_only {
        fit.features.select_rows(&fit.class_indices(LEGIT))
    } else {
        fit.features.clone()
    };

    let spec = AutoencoderSpec {
        input_dim: masked.n_features(),
        hidden_dims: opts.hidden_dims.clone(),
        activation: opts.activation,
    };
    let init = build_autoencoder(&spec, opts.seed)?;
    let train_cfg = TrainConfig {
        seed: opts.seed,
        ..opts.train
    };
    let (network, loss_history) = train_autoencoder(&init, &fit_rows, &train_cfg)?;
    let val_errors = reconstruction_errors(&network, &val.features)?;
    let threshold = fit_threshold(&val_errors, &val.labels, opts.threshold)?;

    let head = if opts.head.enabled {
        Some(train_head(
            &network,
            spec.encoder_depth(),
            &fit.features,
            &fit.labels,
            &opts.head,
            opts.activation,
        )?)
    } else {
        None
    };

    let model = AnomalyModel {
        version: MODEL_FORMAT_VERSION,
        network,
        standardizer,
        threshold,
        feature_mask: mask.to_vec(),
        feature_names: train.names.clone(),
        config_hash: String::new(),
        head,
    };
    let info = FitInfo {
        loss_history,
        fit_rows: fit_rows.rows(),
        validation_rows: val.len(),
    };
    Ok((model, info))
}
