//! Multiclass classification metrics.
//!
//! Rows of the confusion matrix are true labels and columns are predictions.
//! Accuracy is `trace / total`; precision and recall are one-vs-rest per
//! class; weighted F1 averages per-class F1 with the true-label support of
//! each class as weight. Any `0 / 0` evaluates to 0.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelPair {
    pub y_true: usize,
    pub y_pred: usize,
}

impl LabelPair {
    pub fn new(y_true: usize, y_pred: usize) -> Self {
        Self { y_true, y_pred }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    counts: Vec<Vec<u64>>,
    total: u64,
}

pub fn confusion_counts(pairs: &[LabelPair], num_classes: usize) -> Result<ConfusionMatrix> {
    if num_classes < 2 {
        return Err(Error::InvalidConfig("need at least two classes".into()));
    }
    let mut counts = vec![vec![0u64; num_classes]; num_classes];
    for p in pairs {
        for label in [p.y_true, p.y_pred] {
            if label >= num_classes {
                return Err(Error::LabelOutOfRange { label, num_classes });
            }
        }
        counts[p.y_true][p.y_pred] += 1;
    }
    Ok(ConfusionMatrix {
        counts,
        total: pairs.len() as u64,
    })
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl ConfusionMatrix {
    pub fn num_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    /// True-label support of class `q`.
    pub fn row_sum(&self, q: usize) -> u64 {
        self.counts[q].iter().sum()
    }

    /// Number of predictions of class `q`.
    pub fn col_sum(&self, q: usize) -> u64 {
        self.counts.iter().map(|row| row[q]).sum()
    }

    fn check_class(&self, q: usize) -> Result<()> {
        if q >= self.num_classes() {
            return Err(Error::LabelOutOfRange {
                label: q,
                num_classes: self.num_classes(),
            });
        }
        Ok(())
    }

    fn check_nonempty(&self) -> Result<()> {
        if self.total == 0 {
            return Err(Error::EmptyInput);
        }
        Ok(())
    }

    /// Each row divided by its sum; rows without support stay zero.
    pub fn row_normalize(&self) -> Vec<Vec<f64>> {
        self.counts
            .iter()
            .map(|row| {
                let sum: u64 = row.iter().sum();
                row.iter().map(|&c| ratio(c, sum)).collect()
            })
            .collect()
    }

    pub fn accuracy(&self) -> Result<f64> {
        self.check_nonempty()?;
        let trace: u64 = (0..self.num_classes()).map(|i| self.counts[i][i]).sum();
        Ok(ratio(trace, self.total))
    }

    pub fn precision(&self, q: usize) -> Result<f64> {
        self.check_class(q)?;
        Ok(ratio(self.counts[q][q], self.col_sum(q)))
    }

    pub fn recall(&self, q: usize) -> Result<f64> {
        self.check_class(q)?;
        Ok(ratio(self.counts[q][q], self.row_sum(q)))
    }

    pub fn f1(&self, q: usize) -> Result<f64> {
        Ok(f1_score(self.precision(q)?, self.recall(q)?))
    }

    pub fn weighted_f1(&self) -> Result<f64> {
        self.check_nonempty()?;
        let mut acc = 0.0;
        for q in 0..self.num_classes() {
            acc += self.row_sum(q) as f64 * self.f1(q)?;
        }
        Ok(acc / self.total as f64)
    }

    /// Counts as CSV; the header row and first column carry the labels.
    pub fn to_csv(&self, labels: &[String]) -> String {
        self.render_csv(labels, |i, j| self.counts[i][j].to_string())
    }

    /// Row-normalized proportions as CSV.
    pub fn to_normalized_csv(&self, labels: &[String]) -> String {
        let norm = self.row_normalize();
        self.render_csv(labels, |i, j| norm[i][j].to_string())
    }

    fn render_csv(&self, labels: &[String], cell: impl Fn(usize, usize) -> String) -> String {
        let mut out = String::from("true\\pred");
        for l in labels {
            let _ = write!(out, ",{l}");
        }
        out.push('\n');
        for (i, l) in labels.iter().enumerate() {
            out.push_str(l);
            for j in 0..self.num_classes() {
                let _ = write!(out, ",{}", cell(i, j));
            }
            out.push('\n');
        }
        out
    }
}

/// `2PR / (P + R)`, zero when `P + R = 0`.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: String,
    pub support: u64,
    pub predicted: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Set when a ratio hit `0 / 0` and was reported as 0.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub total: u64,
    pub accuracy: f64,
    pub weighted_f1: f64,
    pub classes: Vec<ClassMetrics>,
    pub confusion: Vec<Vec<u64>>,
    pub confusion_normalized: Vec<Vec<f64>>,
}

impl MetricsReport {
    /// Builds the full report. `labels` names the classes in index order.
    pub fn from_confusion(cm: &ConfusionMatrix, labels: &[String]) -> Result<Self> {
        if labels.len() != cm.num_classes() {
            return Err(Error::LengthMismatch {
                expected: cm.num_classes(),
                actual: labels.len(),
            });
        }
        let classes = labels
            .iter()
            .enumerate()
            .map(|(q, label)| {
                let support = cm.row_sum(q);
                let predicted = cm.col_sum(q);
                let precision = cm.precision(q)?;
                let recall = cm.recall(q)?;
                Ok(ClassMetrics {
                    label: label.clone(),
                    support,
                    predicted,
                    precision,
                    recall,
                    f1: f1_score(precision, recall),
                    degenerate: support == 0 || predicted == 0,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            total: cm.total(),
            accuracy: cm.accuracy()?,
            weighted_f1: cm.weighted_f1()?,
            classes,
            confusion: cm.counts().to_vec(),
            confusion_normalized: cm.row_normalize(),
        })
    }
}
