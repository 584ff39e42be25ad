//! Reference implementations the library is checked against. Each one is the
//! slow, obvious version of the computation.
#![allow(dead_code)]

use batguard::neural::{forward, mse_loss, Network};
use batguard::Matrix;

/// Central-difference gradient of the loss for one sample, laid out as
/// `(weights, biases)` per layer.
pub fn numeric_gradient(
    net: &Network,
    x: &[f64],
    target: &[f64],
    h: f64,
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let loss = |n: &Network| mse_loss(target, &forward(n, x).unwrap().0).unwrap();
    let mut work = net.clone();
    let mut gw = Vec::new();
    let mut gb = Vec::new();
    for l in 0..net.layers().len() {
        let mut w = Vec::new();
        for i in 0..net.layers()[l].weights.as_slice().len() {
            let orig = net.layers()[l].weights.as_slice()[i];
            work.layers_mut()[l].weights.as_mut_slice()[i] = orig + h;
            let up = loss(&work);
            work.layers_mut()[l].weights.as_mut_slice()[i] = orig - h;
            let down = loss(&work);
            work.layers_mut()[l].weights.as_mut_slice()[i] = orig;
            w.push((up - down) / (2.0 * h));
        }
        let mut b = Vec::new();
        for i in 0..net.layers()[l].bias.len() {
            let orig = net.layers()[l].bias[i];
            work.layers_mut()[l].bias[i] = orig + h;
            let up = loss(&work);
            work.layers_mut()[l].bias[i] = orig - h;
            let down = loss(&work);
            work.layers_mut()[l].bias[i] = orig;
            b.push((up - down) / (2.0 * h));
        }
        gw.push(w);
        gb.push(b);
    }
    (gw, gb)
}

/// True when `a` and `b` agree to `rel` relative error, or differ by at most
/// `floor` in absolute terms.
pub fn grad_close(a: f64, b: f64, rel: f64, floor: f64) -> bool {
    let diff = (a - b).abs();
    diff <= floor || diff <= rel * a.abs().max(b.abs())
}

/// Fraction of (fraud, legit) pairs where the fraud row scores higher,
/// counting ties as one half.
pub fn pair_count_auc(labels: &[u8], scores: &[f64]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &li) in labels.iter().enumerate() {
        if li != 1 {
            continue;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if lj != 0 {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                wins += 1.0;
            } else if scores[i] == scores[j] {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// Indices of the `k` rows nearest to row `i` by Euclidean distance, found by
/// sorting every distance.
pub fn brute_knn(points: &Matrix, i: usize, k: usize) -> Vec<usize> {
    let mut d: Vec<(f64, usize)> = (0..points.rows())
        .filter(|&j| j != i)
        .map(|j| {
            let s: f64 = points
                .row(i)
                .iter()
                .zip(points.row(j))
                .map(|(a, b)| (a - b).powi(2))
                .sum();
            (s.sqrt(), j)
        })
        .collect();
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    d.into_iter().take(k).map(|(_, j)| j).collect()
}

/// If `s` lies on the segment from `x` to `y`, the interpolation weight.
pub fn segment_weight(s: &[f64], x: &[f64], y: &[f64], tol: f64) -> Option<f64> {
    let dir: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - a).collect();
    let len2: f64 = dir.iter().map(|v| v * v).sum();
    if len2 == 0.0 {
        let off: f64 = s
            .iter()
            .zip(x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        return (off <= tol).then_some(0.0);
    }
    let u = s
        .iter()
        .zip(x)
        .zip(&dir)
        .map(|((s, x), d)| (s - x) * d)
        .sum::<f64>()
        / len2;
    let off = s
        .iter()
        .zip(x)
        .zip(&dir)
        .map(|((s, x), d)| (s - (x + u * d)).abs())
        .fold(0.0, f64::max);
    (off <= tol && (-tol..=1.0 + tol).contains(&u)).then_some(u)
}

/// Rows of `m` as owned vectors, for order-insensitive comparisons.
pub fn rows_of(m: &Matrix) -> Vec<Vec<f64>> {
    m.iter_rows().map(<[f64]>::to_vec).collect()
}
