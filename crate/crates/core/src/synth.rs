//! Synthetic transaction-like data for offline testing.

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataio::{Dataset, FRAUD, LEGIT};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{seeded, stream, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub inliers: usize,
    pub outliers: usize,
    pub dim: usize,
    /// Outliers sit at latent radius in `[min_sigma, max_sigma]`.
    pub min_sigma: f64,
    pub max_sigma: f64,
    pub seed: u64,
}

impl Default for GaussianSpec {
    fn default() -> Self {
        GaussianSpec {
            inliers: 5000,
            outliers: 50,
            dim: 10,
            min_sigma: 6.0,
            max_sigma: 8.0,
            seed: 0,
        }
    }
}

fn normal(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn unit_vector(rng: &mut Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| normal(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn shuffled(rows: Vec<Vec<f64>>, labels: Vec<u8>, rng: &mut Rng) -> Result<Dataset> {
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.shuffle(rng);
    let rows: Vec<&Vec<f64>> = order.iter().map(|&i| &rows[i]).collect();
    let labels = order.iter().map(|&i| labels[i]).collect();
    Dataset::unnamed(Matrix::from_rows(&rows)?, labels)
}

/// Inliers are `A z` with `z ~ N(0, I)` and a random square map `A`;
/// outliers are `A (ρ u)` for a random unit direction `u` and latent radius
/// `ρ` drawn uniformly from `[min_sigma, max_sigma]`.
pub fn gaussian_anomalies(spec: &GaussianSpec) -> Result<Dataset> {
    if spec.dim == 0 || spec.inliers == 0 || spec.outliers == 0 {
        return Err(Error::InvalidParam(
            "dim, inliers and outliers must be positive".into(),
        ));
    }
    if !(spec.min_sigma > 0.0 && spec.max_sigma >= spec.min_sigma) {
        return Err(Error::InvalidParam(
            "need 0 < min_sigma <= max_sigma".into(),
        ));
    }
    let mut rng = seeded(spec.seed, stream::SYNTH);
    let d = spec.dim;
    let map: Vec<f64> = (0..d * d).map(|_| normal(&mut rng)).collect();
    let map = Matrix::from_vec(d, d, map)?;
    let mut rows = Vec::with_capacity(spec.inliers + spec.outliers);
    let mut labels = Vec::with_capacity(rows.capacity());
    let project = |z: &[f64]| {
        let mut x = vec![0.0; d];
        map.mul_vec(z, &mut x);
        x
    };
    for _ in 0..spec.inliers {
        let z: Vec<f64> = (0..d).map(|_| normal(&mut rng)).collect();
        rows.push(project(&z));
        labels.push(LEGIT);
    }
    for _ in 0..spec.outliers {
        let radius = rng.random_range(spec.min_sigma..=spec.max_sigma);
        let z: Vec<f64> = unit_vector(&mut rng, d)
            .into_iter()
            .map(|u| u * radius)
            .collect();
        rows.push(project(&z));
        labels.push(FRAUD);
    }
    shuffled(rows, labels, &mut rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalNoiseSpec {
    pub inliers: usize,
    pub outliers: usize,
    pub signal: usize,
    pub noise: usize,
    /// Latent dimension of the inlier manifold inside the signal columns.
    pub latent: usize,
    pub outlier_radius: f64,
    pub seed: u64,
}

impl Default for SignalNoiseSpec {
    fn default() -> Self {
        SignalNoiseSpec {
            inliers: 600,
            outliers: 60,
            signal: 4,
            noise: 6,
            latent: 1,
            outlier_radius: 1.5,
            seed: 0,
        }
    }
}

/// The first `signal` columns carry structure: inliers lie near a
/// `latent`-dimensional subspace, outliers are pushed off it at
/// `outlier_radius`. The remaining `noise` columns are independent standard
/// normal for every row.
pub fn signal_noise(spec: &SignalNoiseSpec) -> Result<Dataset> {
    if spec.signal == 0 || spec.latent == 0 || spec.latent >= spec.signal {
        return Err(Error::InvalidParam("need 0 < latent < signal".into()));
    }
    let mut rng = seeded(spec.seed, stream::SYNTH);
    let (s, k) = (spec.signal, spec.latent);
    let basis: Vec<Vec<f64>> = (0..k).map(|_| unit_vector(&mut rng, s)).collect();
    let mut rows = Vec::with_capacity(spec.inliers + spec.outliers);
    let mut labels = Vec::with_capacity(rows.capacity());
    for i in 0..spec.inliers + spec.outliers {
        let mut x = vec![0.0; s];
        if i < spec.inliers {
            for b in &basis {
                let z = normal(&mut rng);
                for (xi, bi) in x.iter_mut().zip(b) {
                    *xi += z * bi;
                }
            }
            for xi in &mut x {
                *xi += 0.1 * normal(&mut rng);
            }
            labels.push(LEGIT);
        } else {
            // keep only the component orthogonal to the inlier subspace
            let mut u = unit_vector(&mut rng, s);
            for b in &basis {
                let proj: f64 = u.iter().zip(b).map(|(a, c)| a * c).sum();
                for (ui, bi) in u.iter_mut().zip(b) {
                    *ui -= proj * bi;
                }
            }
            let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-9);
            for (xi, ui) in x.iter_mut().zip(&u) {
                *xi = spec.outlier_radius * ui / norm;
            }
            labels.push(FRAUD);
        }
        x.extend((0..spec.noise).map(|_| normal(&mut rng)));
        rows.push(x);
    }
    shuffled(rows, labels, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_counts_and_determinism() {
        let spec = GaussianSpec {
            inliers: 200,
            outliers: 5,
            ..GaussianSpec::default()
        };
        let d = gaussian_anomalies(&spec).unwrap();
        assert_eq!((d.count(LEGIT), d.count(FRAUD)), (200, 5));
        assert_eq!(d.n_features(), 10);
        assert_eq!(d, gaussian_anomalies(&spec).unwrap());
    }

    #[test]
    fn signal_noise_shape() {
        let d = signal_noise(&SignalNoiseSpec::default()).unwrap();
        assert_eq!(d.n_features(), 10);
        assert_eq!(d.count(FRAUD), 60);
        assert!(signal_noise(&SignalNoiseSpec {
            latent: 4,
            ..SignalNoiseSpec::default()
        })
        .is_err());
    }
}
