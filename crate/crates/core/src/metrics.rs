//! Evaluation descriptors: recognition rate, danger-function RMSE, decision
//! accuracy and F1, plus the summaries used for reporting.

use serde::{Deserialize, Serialize};

use crate::danger::Decision;
use crate::error::{Error, Result};
use crate::perception::ChannelSeries;

/// Confusion counts with "dangerous" as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionMetrics {
    pub counts: ConfusionCounts,
    /// Percent of frames decided correctly.
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// 0/0 is taken as 0.
fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Percent of frames carrying a real (non-imputed) measurement.
pub fn recognition_rate(cs: &ChannelSeries) -> Result<f64> {
    rate_of(cs.measurements.iter().map(|m| m.is_real()))
}

/// Percent of `true` flags.
pub fn rate_of(flags: impl ExactSizeIterator<Item = bool>) -> Result<f64> {
    let n = flags.len();
    if n == 0 {
        return Err(Error::Contract("recognition rate of an empty series".into()));
    }
    Ok(100.0 * flags.filter(|&f| f).count() as f64 / n as f64)
}

pub fn rmse(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::Contract(format!(
            "rmse needs equal non-zero lengths, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok((sq / a.len() as f64).sqrt())
}

pub fn decision_metrics(pred: &[Decision], truth: &[Decision]) -> Result<DecisionMetrics> {
    if pred.len() != truth.len() || pred.is_empty() {
        return Err(Error::Contract(format!(
            "decision metrics need equal non-zero lengths, got {} and {}",
            pred.len(),
            truth.len()
        )));
    }
    let mut c = ConfusionCounts::default();
    for (p, t) in pred.iter().zip(truth) {
        match (p.is_dangerous(), t.is_dangerous()) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    let precision = ratio(c.tp as f64, (c.tp + c.fp) as f64);
    let recall = ratio(c.tp as f64, (c.tp + c.fn_) as f64);
    Ok(DecisionMetrics {
        counts: c,
        accuracy: 100.0 * (c.tp + c.tn) as f64 / c.total() as f64,
        precision,
        recall,
        f1: ratio(2.0 * precision * recall, precision + recall),
    })
}

/// Mean and sample standard deviation; the deviation of one value is 0.
pub fn aggregate(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::Contract("aggregate of an empty list".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Ok((mean, 0.0));
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    Ok((mean, (ss / (n - 1.0)).sqrt()))
}

/// Quantile by linear interpolation at position `q·(n−1)` of sorted values.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn boxplot_stats(values: &[f64]) -> Result<FiveNumber> {
    if values.is_empty() {
        return Err(Error::Contract("boxplot of an empty list".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(FiveNumber {
        min: sorted[0],
        q1: quantile(&sorted, 0.25),
        median: quantile(&sorted, 0.5),
        q3: quantile(&sorted, 0.75),
        max: sorted[sorted.len() - 1],
    })
}
