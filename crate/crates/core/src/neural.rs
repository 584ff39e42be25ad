//! Small fully connected network with exact backpropagation and mini-batch
//! SGD. Shared by the autoencoder and its optional classifier head.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::matrix::Matrix;
use crate::rng::{seeded, stream};

pub const NETWORK_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Tanh,
    Sigmoid,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => tanh(x),
            Activation::Sigmoid => sigmoid(x),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed through the activation's output `y`.
    #[inline]
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Identity => 1.0,
        }
    }
}

/// `(e^{2x} - 1) / (e^{2x} + 1)`, saturated to ±1 beyond |x| > 20.
#[inline]
pub fn tanh(x: f64) -> f64 {
    if x > 20.0 {
        1.0
    } else if x < -20.0 {
        -1.0
    } else {
        let e = (2.0 * x).exp();
        (e - 1.0) / (e + 1.0)
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn new(in_dim: usize, out_dim: usize, activation: Activation) -> Self {
        LayerSpec {
            in_dim,
            out_dim,
            activation,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub spec: LayerSpec,
    /// `out_dim × in_dim`
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetworkDoc", into = "NetworkDoc")]
pub struct Network {
    layers: Vec<Layer>,
}

fn validate_chain(specs: &[LayerSpec]) -> Result<()> {
    if specs.is_empty() {
        return Err(Error::InvalidParam(
            "network needs at least one layer".into(),
        ));
    }
    for (i, s) in specs.iter().enumerate() {
        if s.in_dim == 0 || s.out_dim == 0 {
            return Err(Error::InvalidParam(format!(
                "layer {i} has a zero dimension"
            )));
        }
    }
    for w in specs.windows(2) {
        check_dim(w[0].out_dim, w[1].in_dim)?;
    }
    Ok(())
}

impl Network {
    /// Assembles a network from explicit layers after checking shapes.
    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        let specs: Vec<LayerSpec> = layers.iter().map(|l| l.spec).collect();
        validate_chain(&specs)?;
        for l in &layers {
            check_dim(l.spec.out_dim, l.weights.rows())?;
            check_dim(l.spec.in_dim, l.weights.cols())?;
            check_dim(l.spec.out_dim, l.bias.len())?;
        }
        Ok(Network { layers })
    }

    /// All-zero weights and biases.
    pub fn zeros(specs: &[LayerSpec]) -> Result<Self> {
        validate_chain(specs)?;
        Ok(Network {
            layers: specs
                .iter()
                .map(|&spec| Layer {
                    spec,
                    weights: Matrix::zeros(spec.out_dim, spec.in_dim),
                    bias: vec![0.0; spec.out_dim],
                })
                .collect(),
        })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn specs(&self) -> Vec<LayerSpec> {
        self.layers.iter().map(|l| l.spec).collect()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].spec.in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].spec.out_dim
    }

    /// The first `n` layers as a standalone network.
    pub fn prefix(&self, n: usize) -> Result<Network> {
        if n == 0 || n > self.layers.len() {
            return Err(Error::InvalidParam(format!(
                "prefix length {n} outside 1..={}",
                self.layers.len()
            )));
        }
        Ok(Network {
            layers: self.layers[..n].to_vec(),
        })
    }

    pub fn n_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.spec.out_dim * (l.spec.in_dim + 1))
            .sum()
    }
}

/// Xavier-uniform weights in `±sqrt(6 / (in + out))`, zero biases.
pub fn init_network(specs: &[LayerSpec], seed: u64) -> Result<Network> {
    let mut net = Network::zeros(specs)?;
    let mut rng = seeded(seed, stream::INIT);
    for l in &mut net.layers {
        let bound = (6.0 / (l.spec.in_dim + l.spec.out_dim) as f64).sqrt();
        for w in l.weights.as_mut_slice() {
            *w = rng.random_range(-bound..=bound);
        }
    }
    Ok(net)
}

/// Per-layer values recorded during a forward pass.
#[derive(Debug, Clone, Default)]
pub struct ForwardCache {
    /// `pre[l]`: affine output of layer `l` before its activation.
    pub pre: Vec<Vec<f64>>,
    /// `post[0]` is the input, `post[l + 1]` the activated output of layer `l`.
    pub post: Vec<Vec<f64>>,
}

impl ForwardCache {
    fn for_network(n: &Network) -> Self {
        let mut post = vec![vec![0.0; n.input_dim()]];
        post.extend(n.layers.iter().map(|l| vec![0.0; l.spec.out_dim]));
        ForwardCache {
            pre: n.layers.iter().map(|l| vec![0.0; l.spec.out_dim]).collect(),
            post,
        }
    }

    pub fn output(&self) -> &[f64] {
        &self.post[self.post.len() - 1]
    }
}

fn forward_into(n: &Network, x: &[f64], cache: &mut ForwardCache) {
    cache.post[0].copy_from_slice(x);
    for (l, layer) in n.layers.iter().enumerate() {
        let (before, after) = cache.post.split_at_mut(l + 1);
        let input = &before[l];
        let z = &mut cache.pre[l];
        layer.weights.mul_vec(input, z);
        let out = &mut after[0];
        for ((o, zi), b) in out.iter_mut().zip(z.iter_mut()).zip(&layer.bias) {
            *zi += b;
            *o = layer.spec.activation.apply(*zi);
        }
    }
}

pub fn forward(n: &Network, x: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
    check_dim(n.input_dim(), x.len())?;
    let mut cache = ForwardCache::for_network(n);
    forward_into(n, x, &mut cache);
    Ok((cache.output().to_vec(), cache))
}

/// `‖y − ŷ‖² / len(y)`
pub fn mse_loss(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    check_dim(y.len(), y_hat.len())?;
    if y.is_empty() {
        return Err(Error::Empty("loss of empty vectors"));
    }
    Ok(sq_err(y, y_hat) / y.len() as f64)
}

#[inline]
fn sq_err(y: &[f64], y_hat: &[f64]) -> f64 {
    y.iter().zip(y_hat).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Loss gradients, laid out like the network's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(n: &Network) -> Self {
        Gradients {
            weights: n
                .layers
                .iter()
                .map(|l| Matrix::zeros(l.spec.out_dim, l.spec.in_dim))
                .collect(),
            biases: n.layers.iter().map(|l| vec![0.0; l.spec.out_dim]).collect(),
        }
    }

    fn clear(&mut self) {
        self.weights
            .iter_mut()
            .for_each(|w| w.as_mut_slice().fill(0.0));
        self.biases.iter_mut().for_each(|b| b.fill(0.0));
    }
}

struct Scratch {
    cache: ForwardCache,
    delta: Vec<Vec<f64>>,
}

impl Scratch {
    fn new(n: &Network) -> Self {
        Scratch {
            cache: ForwardCache::for_network(n),
            delta: n.layers.iter().map(|l| vec![0.0; l.spec.out_dim]).collect(),
        }
    }
}

/// Adds `d loss / d params` for one sample into `grads`, returns the loss.
fn accumulate(
    n: &Network,
    x: &[f64],
    target: &[f64],
    grads: &mut Gradients,
    s: &mut Scratch,
) -> f64 {
    forward_into(n, x, &mut s.cache);
    let last = n.layers.len() - 1;
    let out = s.cache.output();
    let scale = 2.0 / target.len() as f64;
    let act = n.layers[last].spec.activation;
    for ((d, &o), &t) in s.delta[last].iter_mut().zip(out).zip(target) {
        *d = scale * (o - t) * act.derivative_from_output(o);
    }
    let loss = sq_err(target, out) / target.len() as f64;

    for l in (0..=last).rev() {
        grads.weights[l].add_outer(1.0, &s.delta[l], &s.cache.post[l]);
        for (g, d) in grads.biases[l].iter_mut().zip(&s.delta[l]) {
            *g += d;
        }
        if l > 0 {
            let (lower, upper) = s.delta.split_at_mut(l);
            let prev = &mut lower[l - 1];
            n.layers[l].weights.mul_vec_transposed(&upper[0], prev);
            let act = n.layers[l - 1].spec.activation;
            for (d, &a) in prev.iter_mut().zip(&s.cache.post[l]) {
                *d *= act.derivative_from_output(a);
            }
        }
    }
    loss
}

/// Exact gradient of `mse_loss(forward(n, x), target)` for every parameter.
pub fn backprop(n: &Network, x: &[f64], target: &[f64]) -> Result<Gradients> {
    check_dim(n.input_dim(), x.len())?;
    check_dim(n.output_dim(), target.len())?;
    let mut grads = Gradients::zeros_like(n);
    accumulate(n, x, target, &mut grads, &mut Scratch::new(n));
    Ok(grads)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.01,
            epochs: 60,
            batch_size: 256,
            seed: 0,
            shuffle: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "learning_rate must be finite and non-negative, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidParam("batch_size must be positive".into()));
        }
        Ok(())
    }
}

/// Mean of per-row losses over the whole data set.
pub fn dataset_loss(n: &Network, inputs: &Matrix, targets: &Matrix) -> Result<f64> {
    check_dim(inputs.rows(), targets.rows())?;
    check_dim(n.input_dim(), inputs.cols())?;
    check_dim(n.output_dim(), targets.cols())?;
    if inputs.rows() == 0 {
        return Err(Error::Empty("training data"));
    }
    let mut cache = ForwardCache::for_network(n);
    let mut total = 0.0;
    for r in 0..inputs.rows() {
        forward_into(n, inputs.row(r), &mut cache);
        total += sq_err(targets.row(r), cache.output()) / targets.cols() as f64;
    }
    Ok(total / inputs.rows() as f64)
}

/// Mini-batch SGD. Every epoch visits all rows in `ceil(N / batch_size)`
/// steps (the last batch may be short); each step subtracts
/// `learning_rate` times the batch-mean gradient. Returns the trained network
/// and the full-data loss after each epoch.
pub fn train_sgd(
    n: &Network,
    inputs: &Matrix,
    targets: &Matrix,
    cfg: &TrainConfig,
) -> Result<(Network, Vec<f64>)> {
    cfg.validate()?;
    if inputs.rows() == 0 {
        return Err(Error::Empty("training data"));
    }
    check_dim(inputs.rows(), targets.rows())?;
    check_dim(n.input_dim(), inputs.cols())?;
    check_dim(n.output_dim(), targets.cols())?;

    let mut net = n.clone();
    let mut grads = Gradients::zeros_like(&net);
    let mut scratch = Scratch::new(&net);
    let mut order: Vec<usize> = (0..inputs.rows()).collect();
    let mut rng = seeded(cfg.seed, stream::SHUFFLE);
    let mut history = Vec::with_capacity(cfg.epochs);

    for _ in 0..cfg.epochs {
        if cfg.shuffle {
            order.shuffle(&mut rng);
        }
        for batch in order.chunks(cfg.batch_size) {
            grads.clear();
            for &r in batch {
                accumulate(
                    &net,
                    inputs.row(r),
                    targets.row(r),
                    &mut grads,
                    &mut scratch,
                );
            }
            let step = cfg.learning_rate / batch.len() as f64;
            if step == 0.0 {
                continue;
            }
            for (layer, (gw, gb)) in net
                .layers
                .iter_mut()
                .zip(grads.weights.iter().zip(&grads.biases))
            {
                for (w, g) in layer.weights.as_mut_slice().iter_mut().zip(gw.as_slice()) {
                    *w -= step * g;
                }
                for (b, g) in layer.bias.iter_mut().zip(gb) {
                    *b -= step * g;
                }
            }
        }
        history.push(dataset_loss(&net, inputs, targets)?);
    }
    Ok((net, history))
}

/// Row-wise forward pass.
pub fn predict(n: &Network, rows: &Matrix) -> Result<Matrix> {
    if rows.rows() == 0 {
        return Ok(Matrix::zeros(0, n.output_dim()));
    }
    check_dim(n.input_dim(), rows.cols())?;
    let mut out = Matrix::zeros(rows.rows(), n.output_dim());
    let mut cache = ForwardCache::for_network(n);
    for r in 0..rows.rows() {
        forward_into(n, rows.row(r), &mut cache);
        out.row_mut(r).copy_from_slice(cache.output());
    }
    Ok(out)
}

/// Per-row `mse_loss(row, forward(row))`; used for reconstruction scoring.
pub fn row_losses(n: &Network, rows: &Matrix) -> Result<Vec<f64>> {
    if rows.rows() == 0 {
        return Ok(Vec::new());
    }
    check_dim(n.input_dim(), rows.cols())?;
    check_dim(n.output_dim(), rows.cols())?;
    let mut cache = ForwardCache::for_network(n);
    Ok(rows
        .iter_rows()
        .map(|x| {
            forward_into(n, x, &mut cache);
            sq_err(x, cache.output()) / x.len() as f64
        })
        .collect())
}

#[derive(Serialize, Deserialize)]
struct LayerDoc {
    in_dim: usize,
    out_dim: usize,
    activation: Activation,
    /// row-major, `out_dim × in_dim`
    weights: Vec<f64>,
    bias: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct NetworkDoc {
    version: u32,
    layers: Vec<LayerDoc>,
}

impl From<Network> for NetworkDoc {
    fn from(n: Network) -> Self {
        NetworkDoc {
            version: NETWORK_FORMAT_VERSION,
            layers: n
                .layers
                .into_iter()
                .map(|l| LayerDoc {
                    in_dim: l.spec.in_dim,
                    out_dim: l.spec.out_dim,
                    activation: l.spec.activation,
                    weights: l.weights.as_slice().to_vec(),
                    bias: l.bias,
                })
                .collect(),
        }
    }
}

impl TryFrom<NetworkDoc> for Network {
    type Error = Error;

    fn try_from(doc: NetworkDoc) -> Result<Self> {
        if doc.version != NETWORK_FORMAT_VERSION {
            return Err(Error::InvalidParam(format!(
                "unsupported network format version {}",
                doc.version
            )));
        }
        let layers = doc
            .layers
            .into_iter()
            .map(|l| {
                Ok(Layer {
                    spec: LayerSpec::new(l.in_dim, l.out_dim, l.activation),
                    weights: Matrix::from_vec(l.out_dim, l.in_dim, l.weights)?,
                    bias: l.bias,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Network::from_layers(layers)
    }
}
