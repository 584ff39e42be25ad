//! Binary bat algorithm over bit vectors, and wrapper feature selection
//! built on it.
//!
//! Positions are bits; velocities are real and pass through a sigmoid
//! transfer function that sets each bit with probability `S(v)`. Fitness is
//! maximized.

use std::collections::HashMap;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::autoenc::{
    build_autoencoder, reconstruction_errors, train_autoencoder, AutoencoderSpec,
};
use crate::dataio::Dataset;
use crate::error::{check_dim, Error, Result};
use crate::metrics::roc_auc;
use crate::neural::{sigmoid, Activation, TrainConfig};
use crate::rng::{seeded, stream, Rng};

pub const VELOCITY_LIMIT: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BatConfig {
    pub n_bats: usize,
    pub f_min: f64,
    pub f_max: f64,
    /// Loudness decay per accepted move.
    pub alpha: f64,
    /// Pulse-rate growth constant.
    pub gamma: f64,
    pub r0: f64,
    pub a0: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for BatConfig {
    fn default() -> Self {
        BatConfig {
            n_bats: 30,
            f_min: 0.0,
            f_max: 2.0,
            alpha: 0.9,
            gamma: 0.9,
            r0: 0.5,
            a0: 1.0,
            max_iter: 50,
            seed: 0,
        }
    }
}

impl BatConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParam(msg));
        if self.n_bats == 0 {
            return bad("n_bats must be positive".into());
        }
        if !(self.f_min < self.f_max) {
            return bad(format!(
                "f_min {} must be below f_max {}",
                self.f_min, self.f_max
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha {} outside (0, 1)", self.alpha));
        }
        if !(self.gamma > 0.0) {
            return bad(format!("gamma {} must be positive", self.gamma));
        }
        if !(0.0..=1.0).contains(&self.r0) {
            return bad(format!("r0 {} outside [0, 1]", self.r0));
        }
        if !(self.a0 > 0.0) {
            return bad(format!("a0 {} must be positive", self.a0));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bat {
    pub position: Vec<bool>,
    pub velocity: Vec<f64>,
    pub frequency: f64,
    pub loudness: f64,
    pub pulse_rate: f64,
    pub fitness: f64,
}

/// `f_min + (f_max − f_min)·beta`
pub fn update_frequency(cfg: &BatConfig, beta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidParam(format!("beta {beta} outside [0, 1]")));
    }
    Ok(cfg.f_min + (cfg.f_max - cfg.f_min) * beta)
}

/// `v + (x − x_best)·f`, clamped to ±[`VELOCITY_LIMIT`].
pub fn update_velocity(v: &[f64], x: &[bool], x_best: &[bool], f: f64) -> Result<Vec<f64>> {
    check_dim(v.len(), x.len())?;
    check_dim(v.len(), x_best.len())?;
    Ok(v.iter()
        .zip(x.iter().zip(x_best))
        .map(|(&vi, (&xi, &bi))| {
            let diff = f64::from(u8::from(xi)) - f64::from(u8::from(bi));
            (vi + diff * f).clamp(-VELOCITY_LIMIT, VELOCITY_LIMIT)
        })
        .collect())
}

/// Each bit is 1 with probability `1 / (1 + e^{-v_i})`.
pub fn binarize_position(v: &[f64], rng: &mut Rng) -> Vec<bool> {
    v.iter()
        .map(|&vi| rng.random::<f64>() < sigmoid(vi))
        .collect()
}

/// `A ← alpha·A`, `r ← r0·(1 − e^{−gamma·t})`.
pub fn update_loudness_pulse(b: &Bat, cfg: &BatConfig, t: usize) -> Bat {
    Bat {
        loudness: cfg.alpha * b.loudness,
        pulse_rate: cfg.r0 * (1.0 - (-cfg.gamma * t as f64).exp()),
        ..b.clone()
    }
}

/// Objective over bit vectors, higher is better. Must be deterministic and
/// free of side effects; the all-zero vector should get the worst score.
pub trait Fitness: Sync {
    fn evaluate(&self, position: &[bool]) -> Result<f64>;
}

impl<F> Fitness for F
where
    F: Fn(&[bool]) -> f64 + Sync,
{
    fn evaluate(&self, position: &[bool]) -> Result<f64> {
        Ok(self(position))
    }
}

/// Adapter for objectives that can fail.
pub struct Fallible<F>(pub F);

impl<F> Fitness for Fallible<F>
where
    F: Fn(&[bool]) -> Result<f64> + Sync,
{
    fn evaluate(&self, position: &[bool]) -> Result<f64> {
        (self.0)(position)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BbaResult {
    pub best_position: Vec<bool>,
    pub best_fitness: f64,
    /// Global best fitness after each iteration.
    pub history: Vec<f64>,
    /// Distinct positions evaluated.
    pub evaluations: usize,
}

struct Evaluator<'a, F: ?Sized> {
    fitness: &'a F,
    cache: HashMap<Vec<bool>, f64>,
}

impl<F: Fitness + ?Sized> Evaluator<'_, F> {
    /// Scores `positions[i]` for bat `i`. Unseen positions are evaluated in
    /// parallel; results do not depend on scheduling.
    fn score(&mut self, positions: &[Vec<bool>], iteration: usize) -> Result<Vec<f64>> {
        let mut pending: Vec<(usize, &Vec<bool>)> = Vec::new();
        for (i, p) in positions.iter().enumerate() {
            if !self.cache.contains_key(p) && !pending.iter().any(|(_, q)| *q == p) {
                pending.push((i, p));
            }
        }
        let fitness = self.fitness;
        let results: Vec<(usize, Result<f64>)> = pending
            .par_iter()
            .map(|&(i, p)| (i, fitness.evaluate(p)))
            .collect();
        for (i, r) in results {
            let value = r.map_err(|e| Error::Fitness {
                bat: i,
                iteration,
                message: e.to_string(),
            })?;
            self.cache.insert(positions[i].clone(), value);
        }
        Ok(positions.iter().map(|p| self.cache[p]).collect())
    }
}

/// Copy of `best` with each bit flipped independently with probability `p`.
fn local_walk(best: &[bool], p: f64, rng: &mut Rng) -> Vec<bool> {
    best.iter()
        .map(|&b| b ^ (rng.random::<f64>() < p))
        .collect()
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub fn run_bba<F: Fitness + ?Sized>(fitness: &F, dim: usize, cfg: &BatConfig) -> Result<BbaResult> {
    run_bba_seeded(fitness, dim, cfg, &[])
}

/// Binary bat algorithm. `initial` positions replace the random starting
/// positions of the first bats.
///
/// Each iteration, every bat draws a frequency, updates its velocity
/// against the global best and samples a new position through the transfer
/// function. With probability `1 − r_i` the sample is replaced by a local
/// walk around the global best (per-bit flips at rate `1/dim`). A candidate
/// is accepted only when `rand < A_i` and it beats the global best; an
/// accepted bat becomes the new best, gets quieter and pulses faster.
pub fn run_bba_seeded<F: Fitness + ?Sized>(
    fitness: &F,
    dim: usize,
    cfg: &BatConfig,
    initial: &[Vec<bool>],
) -> Result<BbaResult> {
    cfg.validate()?;
    if dim == 0 {
        return Err(Error::InvalidParam("dimension must be positive".into()));
    }
    for p in initial {
        check_dim(dim, p.len())?;
    }
    let mut rng = seeded(cfg.seed, stream::BAT);
    let mut eval = Evaluator {
        fitness,
        cache: HashMap::new(),
    };

    let starts: Vec<Vec<bool>> = (0..cfg.n_bats)
        .map(|i| match initial.get(i) {
            Some(p) => p.clone(),
            None => (0..dim).map(|_| rng.random::<bool>()).collect(),
        })
        .collect();
    let scores = eval.score(&starts, 0)?;
    let mut bats: Vec<Bat> = starts
        .into_iter()
        .zip(&scores)
        .map(|(position, &fitness)| Bat {
            position,
            velocity: vec![0.0; dim],
            frequency: 0.0,
            loudness: cfg.a0,
            pulse_rate: cfg.r0,
            fitness,
        })
        .collect();
    let lead = argmax(&scores);
    let mut best = bats[lead].position.clone();
    let mut best_fitness = bats[lead].fitness;
    let mut history = Vec::with_capacity(cfg.max_iter);
    let flip_p = 1.0 / dim as f64;

    for t in 1..=cfg.max_iter {
        let mut candidates = Vec::with_capacity(bats.len());
        for bat in &mut bats {
            bat.frequency = update_frequency(cfg, rng.random::<f64>())?;
            bat.velocity = update_velocity(&bat.velocity, &bat.position, &best, bat.frequency)?;
            let mut cand = binarize_position(&bat.velocity, &mut rng);
            if rng.random::<f64>() > bat.pulse_rate {
                cand = local_walk(&best, flip_p, &mut rng);
            }
            candidates.push(cand);
        }
        let scores = eval.score(&candidates, t)?;
        for (i, (cand, score)) in candidates.into_iter().zip(scores).enumerate() {
            let loud = rng.random::<f64>() < bats[i].loudness;
            if loud && score > best_fitness {
                let moved = Bat {
                    position: cand,
                    fitness: score,
                    ..update_loudness_pulse(&bats[i], cfg, t)
                };
                best.clone_from(&moved.position);
                best_fitness = score;
                bats[i] = moved;
            }
        }
        history.push(best_fitness);
    }

    Ok(BbaResult {
        best_position: best,
        best_fitness,
        history,
        evaluations: eval.cache.len(),
    })
}

/// Wrapper selection settings. `train` is the reduced budget used for each
/// candidate mask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionOptions {
    pub bat: BatConfig,
    pub hidden_dims: Vec<usize>,
    pub activation: Activation,
    pub train: TrainConfig,
}

impl Default for SelectionOptions {
    fn default() -> Self {
        SelectionOptions {
            bat: BatConfig::default(),
            hidden_dims: vec![15, 15],
            activation: Activation::Tanh,
            train: TrainConfig {
                epochs: 10,
                ..TrainConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub mask: Vec<bool>,
    pub val_auc: f64,
    pub history: Vec<f64>,
    pub dropped: Vec<String>,
    pub evaluations: usize,
}

/// Validation AUC of an autoencoder trained on the masked columns. Hidden
/// widths are capped at the number of selected columns. The empty mask
/// scores `-inf`.
pub fn mask_fitness(
    d_train: &Dataset,
    d_val: &Dataset,
    mask: &[bool],
    opts: &SelectionOptions,
) -> Result<f64> {
    let selected = mask.iter().filter(|&&m| m).count();
    if selected == 0 {
        return Ok(f64::NEG_INFINITY);
    }
    let train = d_train.select_features(mask)?;
    let val = d_val.select_features(mask)?;
    let spec = AutoencoderSpec {
        input_dim: selected,
        hidden_dims: opts.hidden_dims.iter().map(|&h| h.min(selected)).collect(),
        activation: opts.activation,
    };
    let net = build_autoencoder(&spec, opts.train.seed)?;
    let (net, _) = train_autoencoder(&net, &train.features, &opts.train)?;
    let errors = reconstruction_errors(&net, &val.features)?;
    roc_auc(&val.labels, &errors)
}

/// Runs the bat search over column masks. Both datasets must already be
/// standardized the same way. One bat starts from the full mask.
pub fn select_features(
    d_train: &Dataset,
    d_val: &Dataset,
    opts: &SelectionOptions,
) -> Result<SelectionReport> {
    let dim = d_train.n_features();
    check_dim(dim, d_val.n_features())?;
    let fitness = Fallible(|mask: &[bool]| mask_fitness(d_train, d_val, mask, opts));
    let res = run_bba_seeded(&fitness, dim, &opts.bat, &[vec![true; dim]])?;
    let dropped = res
        .best_position
        .iter()
        .zip(&d_train.names)
        .filter(|(&m, _)| !m)
        .map(|(_, n)| n.clone())
        .collect();
    Ok(SelectionReport {
        mask: res.best_position,
        val_auc: res.best_fitness,
        history: res.history,
        dropped,
        evaluations: res.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn onemax(p: &[bool]) -> f64 {
        p.iter().filter(|&&b| b).count() as f64
    }

    #[test]
    fn frequency_endpoints() {
        let cfg = BatConfig::default();
        assert_eq!(update_frequency(&cfg, 0.0).unwrap(), 0.0);
        assert_eq!(update_frequency(&cfg, 1.0).unwrap(), 2.0);
        assert_eq!(update_frequency(&cfg, 0.5).unwrap(), 1.0);
        assert!(update_frequency(&cfg, 1.5).is_err());
        let c = BatConfig {
            f_min: -1.0,
            f_max: 3.0,
            ..cfg
        };
        for k in 0..=10 {
            let beta = f64::from(k) / 10.0;
            let f = update_frequency(&c, beta).unwrap();
            assert!((f - (-1.0 + 4.0 * beta)).abs() < 1e-15);
        }
    }

    #[test]
    fn velocity_examples() {
        let v = [0.3, -1.0, 2.0];
        let x = [true, false, true];
        assert_eq!(update_velocity(&v, &x, &x, 1.7).unwrap(), v.to_vec());
        assert_eq!(
            update_velocity(&[0.0, 0.0], &[true, false], &[false, false], 1.0).unwrap(),
            vec![1.0, 0.0]
        );
        let out = update_velocity(&[5.5, -5.5], &[true, false], &[false, true], 2.0).unwrap();
        assert_eq!(out, vec![6.0, -6.0]);
        assert!(update_velocity(&[0.0], &[true, false], &[true, false], 1.0).is_err());
    }

    #[test]
    fn binarization_probabilities() {
        let mut rng = seeded(1, 0);
        let ones = (0..10_000)
            .filter(|_| binarize_position(&[0.0], &mut rng)[0])
            .count();
        assert!((ones as f64 / 10_000.0 - 0.5).abs() < 0.02);
        assert!(binarize_position(&[30.0; 64], &mut rng).iter().all(|&b| b));
        let a = binarize_position(&[0.1, -0.4, 2.0, 0.0], &mut seeded(9, 0));
        let b = binarize_position(&[0.1, -0.4, 2.0, 0.0], &mut seeded(9, 0));
        assert_eq!(a, b);
    }

    #[test]
    fn loudness_and_pulse_schedules() {
        let cfg = BatConfig::default();
        let bat = Bat {
            position: vec![true],
            velocity: vec![0.0],
            frequency: 0.0,
            loudness: 1.0,
            pulse_rate: 0.5,
            fitness: 0.0,
        };
        let b1 = update_loudness_pulse(&bat, &cfg, 0);
        assert!((b1.loudness - 0.9).abs() < 1e-15);
        assert_eq!(b1.pulse_rate, 0.0);
        let mut prev = bat.clone();
        let mut prev_r = -1.0;
        for t in 1..60 {
            let next = update_loudness_pulse(&prev, &cfg, t);
            assert!(next.loudness < prev.loudness);
            assert!(next.pulse_rate >= prev_r && next.pulse_rate <= cfg.r0);
            prev_r = next.pulse_rate;
            prev = next;
        }
        assert!((prev_r - cfg.r0).abs() < 1e-12);
    }

    #[test]
    fn onemax_small_run_is_monotone_and_deterministic() {
        let cfg = BatConfig {
            seed: 4,
            ..BatConfig::default()
        };
        let a = run_bba(&onemax, 16, &cfg).unwrap();
        assert!(a.history.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(a.history.len(), 50);
        assert_eq!(a.best_fitness, onemax(&a.best_position));
        assert_eq!(a, run_bba(&onemax, 16, &cfg).unwrap());
    }

    #[test]
    fn zero_budget_returns_best_initial_bat() {
        let cfg = BatConfig {
            max_iter: 0,
            n_bats: 7,
            seed: 2,
            ..BatConfig::default()
        };
        let res = run_bba(&onemax, 12, &cfg).unwrap();
        // replay the initial draws with the same generator
        let mut rng = seeded(2, stream::BAT);
        let starts: Vec<Vec<bool>> = (0..7)
            .map(|_| (0..12).map(|_| rng.random::<bool>()).collect())
            .collect();
        let best = starts.iter().map(|p| onemax(p)).fold(f64::MIN, f64::max);
        assert_eq!(res.best_fitness, best);
        assert!(res.history.is_empty());
    }

    #[test]
    fn constant_fitness_terminates() {
        let res = run_bba(
            &|_: &[bool]| 1.0,
            5,
            &BatConfig {
                max_iter: 5,
                ..BatConfig::default()
            },
        )
        .unwrap();
        assert_eq!(res.best_position.len(), 5);
        assert_eq!(res.history, vec![1.0; 5]);
    }

    #[test]
    fn seeded_start_is_evaluated() {
        let target = |p: &[bool]| if p.iter().all(|&b| b) { 10.0 } else { 0.0 };
        let cfg = BatConfig {
            max_iter: 0,
            ..BatConfig::default()
        };
        let res = run_bba_seeded(&target, 20, &cfg, &[vec![true; 20]]).unwrap();
        assert_eq!(res.best_fitness, 10.0);
    }

    #[test]
    fn fitness_errors_carry_position() {
        let failing = Fallible(|p: &[bool]| {
            if p[0] {
                Err(Error::Degenerate("boom".into()))
            } else {
                Ok(0.0)
            }
        });
        let cfg = BatConfig {
            n_bats: 3,
            ..BatConfig::default()
        };
        let start = [vec![false, false], vec![true, false]];
        match run_bba_seeded(&failing, 2, &cfg, &start) {
            Err(Error::Fitness { bat, iteration, .. }) => assert_eq!((bat, iteration), (1, 0)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn config_validation() {
        assert!(BatConfig {
            alpha: 1.0,
            ..BatConfig::default()
        }
        .validate()
        .is_err());
        assert!(BatConfig {
            f_min: 2.0,
            ..BatConfig::default()
        }
        .validate()
        .is_err());
        assert!(BatConfig {
            n_bats: 0,
            ..BatConfig::default()
        }
        .validate()
        .is_err());
        assert!(run_bba(&onemax, 0, &BatConfig::default()).is_err());
    }
}
