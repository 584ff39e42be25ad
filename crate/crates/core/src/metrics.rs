//! Binary classification metrics with fraud (label 1) as the positive class.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

pub fn confusion_matrix(labels: &[u8], predictions: &[u8]) -> Result<ConfusionMatrix> {
    check_dim(labels.len(), predictions.len())?;
    if labels.is_empty() {
        return Err(Error::Empty("confusion matrix input"));
    }
    let mut m = ConfusionMatrix::default();
    for (&l, &p) in labels.iter().zip(predictions) {
        match (l != 0, p != 0) {
            (true, true) => m.tp += 1,
            (false, true) => m.fp += 1,
            (false, false) => m.tn += 1,
            (true, false) => m.fn_ += 1,
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Accuracy, precision, recall and F1. Any ratio with a zero denominator is 0.
pub fn summary_metrics(m: &ConfusionMatrix) -> Summary {
    let ratio = |num: u64, den: u64| {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let precision = ratio(m.tp, m.tp + m.fp);
    let recall = ratio(m.tp, m.tp + m.fn_);
    // harmonic mean of precision and recall, as one division over counts
    let f1 = ratio(2 * m.tp, 2 * m.tp + m.fp + m.fn_);
    Summary {
        accuracy: ratio(m.tp + m.tn, m.total()),
        precision,
        recall,
        f1,
    }
}

/// ROC points from the strictest threshold to the loosest. `thresholds[i]`
/// is the smallest score flagged positive at `points[i]`; the first entry is
/// `+inf` (nothing flagged) and serializes as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<(f64, f64)>,
    #[serde(with = "inf_as_null")]
    pub thresholds: Vec<f64>,
}

mod inf_as_null {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|x| x.is_finite().then_some(*x))
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let v: Vec<Option<f64>> = Vec::deserialize(d)?;
        Ok(v.into_iter().map(|x| x.unwrap_or(f64::INFINITY)).collect())
    }
}

/// Sweeps every distinct score from high to low; samples sharing a score
/// enter together, so the curve has `distinct scores + 1` points.
pub fn roc_curve(labels: &[u8], scores: &[f64]) -> Result<RocCurve> {
    check_dim(labels.len(), scores.len())?;
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidParam("scores contain NaN".into()));
    }
    let pos = labels.iter().filter(|&&l| l != 0).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::Degenerate(format!(
            "ROC needs both classes, found {pos} positive and {neg} negative"
        )));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![(0.0, 0.0)];
    let mut thresholds = vec![f64::INFINITY];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] != 0 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
        thresholds.push(s);
    }
    Ok(RocCurve { points, thresholds })
}

/// Trapezoidal area under the curve.
pub fn auc(curve: &RocCurve) -> f64 {
    curve
        .points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
        .sum::<f64>()
        .clamp(0.0, 1.0)
}

pub fn roc_auc(labels: &[u8], scores: &[f64]) -> Result<f64> {
    Ok(auc(&roc_curve(labels, scores)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: f64,
    /// Scores strictly above this are predicted fraud.
    pub threshold: f64,
    pub roc: RocCurve,
}

/// Full report: ROC/AUC from the raw scores, confusion matrix from
/// `score > threshold`.
pub fn evaluate(labels: &[u8], scores: &[f64], threshold: f64) -> Result<EvalReport> {
    let roc = roc_curve(labels, scores)?;
    let predictions: Vec<u8> = scores.iter().map(|&s| u8::from(s > threshold)).collect();
    let confusion = confusion_matrix(labels, &predictions)?;
    let s = summary_metrics(&confusion);
    Ok(EvalReport {
        confusion,
        accuracy: s.accuracy,
        precision: s.precision,
        recall: s.recall,
        f1: s.f1,
        auc: auc(&roc),
        threshold,
        roc,
    })
}

/// `fpr,tpr` CSV for plotting.
pub fn roc_csv(curve: &RocCurve) -> String {
    let mut out = String::from("fpr,tpr\n");
    for (fpr, tpr) in &curve.points {
        out.push_str(&format!("{fpr},{tpr}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn confusion_examples() {
        let m = confusion_matrix(&[1, 0], &[1, 0]).unwrap();
        assert_eq!(
            m,
            ConfusionMatrix {
                tp: 1,
                fp: 0,
                tn: 1,
                fn_: 0
            }
        );
        let m = confusion_matrix(&[1, 0, 1, 0, 0], &[0; 5]).unwrap();
        assert_eq!((m.tp, m.fp, m.total()), (0, 0, 5));
        assert!(confusion_matrix(&[], &[]).is_err());
        assert!(confusion_matrix(&[1], &[1, 0]).is_err());
    }

    #[test]
    fn summary_examples() {
        let s = summary_metrics(&ConfusionMatrix {
            tp: 1,
            fp: 1,
            tn: 0,
            fn_: 0,
        });
        assert_eq!(s.precision, 0.5);
        assert_eq!(s.recall, 1.0);
        assert!((s.f1 - 2.0 / 3.0).abs() < 1e-15);
        let s = summary_metrics(&ConfusionMatrix {
            tp: 0,
            fp: 0,
            tn: 4,
            fn_: 2,
        });
        assert_eq!((s.precision, s.recall, s.f1), (0.0, 0.0, 0.0));
        let s = summary_metrics(&ConfusionMatrix {
            tp: 3,
            fp: 0,
            tn: 5,
            fn_: 0,
        });
        assert_eq!(
            (s.accuracy, s.precision, s.recall, s.f1),
            (1.0, 1.0, 1.0, 1.0)
        );
    }

    #[test]
    fn perfect_separation_passes_through_corner() {
        let c = roc_curve(&[0, 0, 1, 1], &[0.1, 0.2, 0.8, 0.9]).unwrap();
        assert!(c.points.contains(&(0.0, 1.0)));
        assert_eq!(auc(&c), 1.0);
    }

    #[test]
    fn all_equal_scores_give_diagonal() {
        let c = roc_curve(&[0, 1, 0, 1], &[0.3; 4]).unwrap();
        assert_eq!(c.points, vec![(0.0, 0.0), (1.0, 1.0)]);
        assert_eq!(auc(&c), 0.5);
    }

    #[test]
    fn negated_scores_mirror_curve() {
        let labels = [0, 1, 1, 0, 1, 0, 0, 1, 0];
        let scores = [0.3, 0.9, 0.3, 0.1, 0.7, 0.5, 0.2, 0.2, 0.8];
        let a = roc_curve(&labels, &scores).unwrap();
        let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
        let b = roc_curve(&labels, &neg).unwrap();
        // the negated sweep visits the complementary operating points in reverse
        let mirrored: Vec<(f64, f64)> = a
            .points
            .iter()
            .rev()
            .map(|&(f, t)| (1.0 - f, 1.0 - t))
            .collect();
        assert_eq!(mirrored.len(), b.points.len());
        for (p, q) in mirrored.iter().zip(&b.points) {
            assert!((p.0 - q.0).abs() < 1e-12 && (p.1 - q.1).abs() < 1e-12);
        }
        assert!((auc(&a) + auc(&b) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn roc_errors() {
        assert!(matches!(
            roc_curve(&[1, 1], &[0.1, 0.2]),
            Err(Error::Degenerate(_))
        ));
        assert!(roc_curve(&[1, 0], &[f64::NAN, 0.2]).is_err());
        assert!(roc_curve(&[1, 0], &[0.2]).is_err());
    }

    #[test]
    fn report_json_roundtrip() {
        let r = evaluate(&[0, 1, 0, 1, 1], &[0.1, 0.4, 0.35, 0.8, 0.4], 0.3).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        assert!(text.contains("\"fn\":"));
        assert_eq!(serde_json::from_str::<EvalReport>(&text).unwrap(), r);
        assert!(roc_csv(&r.roc).starts_with("fpr,tpr\n"));
    }
}
