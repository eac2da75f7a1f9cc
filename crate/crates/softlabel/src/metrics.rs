//! Evaluation of predicted label distributions against gold labels:
//! macro-averaged F1 over the declared label set, and expected calibration
//! error over max-probability confidences.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::model::{LabelDistribution, LabelSet, ModelError};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("prediction and gold item sets differ: {0} item(s) missing from predictions, {1} missing from gold")]
    ItemSetMismatch(usize, usize),
    #[error("cannot evaluate an empty item set")]
    EmptyInput,
    #[error("number of bins must be at least 1, got {0}")]
    BadBins(usize),
}

/// One equal-width confidence bin over (0, 1].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinStat {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    /// Mean max-probability of items in the bin; 0 when the bin is empty.
    pub mean_confidence: f64,
    /// Fraction of items in the bin whose argmax equals gold; 0 when empty.
    pub accuracy: f64,
}

/// Full evaluation of a prediction set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub item_count: usize,
    pub macro_f1: f64,
    pub per_class_f1: BTreeMap<String, f64>,
    pub ece: f64,
    pub bins: Vec<BinStat>,
}

/// Checks that both maps cover exactly the same non-empty item set. Returns
/// the ids missing from each side for error reporting.
fn check_item_sets<A, B>(
    predictions: &BTreeMap<String, A>,
    gold: &BTreeMap<String, B>,
) -> Result<(), MetricsError> {
    let missing_from_predictions: Vec<&String> = gold
        .keys()
        .filter(|id| !predictions.contains_key(*id))
        .collect();
    let missing_from_gold: Vec<&String> = predictions
        .keys()
        .filter(|id| !gold.contains_key(*id))
        .collect();
    if !missing_from_predictions.is_empty() || !missing_from_gold.is_empty() {
        return Err(MetricsError::ItemSetMismatch(
            missing_from_predictions.len(),
            missing_from_gold.len(),
        ));
    }
    if predictions.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    Ok(())
}

/// Lists the item ids present in one map but not the other, for callers that
/// want to show exactly which items are misaligned.
pub fn item_set_difference<A, B>(
    predictions: &BTreeMap<String, A>,
    gold: &BTreeMap<String, B>,
) -> (Vec<String>, Vec<String>) {
    let missing_from_predictions = gold
        .keys()
        .filter(|id| !predictions.contains_key(*id))
        .cloned()
        .collect();
    let missing_from_gold = predictions
        .keys()
        .filter(|id| !gold.contains_key(*id))
        .cloned()
        .collect();
    (missing_from_predictions, missing_from_gold)
}

/// Macro-averaged F1 of hard predictions. Every class in the label set
/// contributes to the mean; a class with no true and no predicted instances
/// contributes 0, which is the stricter convention.
pub fn macro_f1(
    predictions: &BTreeMap<String, String>,
    gold: &BTreeMap<String, String>,
    label_set: &LabelSet,
) -> Result<(f64, BTreeMap<String, f64>), MetricsError> {
    check_item_sets(predictions, gold)?;
    let class_count = label_set.len();
    let mut true_positives = vec![0u64; class_count];
    let mut false_positives = vec![0u64; class_count];
    let mut false_negatives = vec![0u64; class_count];
    for (item, predicted) in predictions {
        let predicted = label_set.require(predicted)?;
        let actual = label_set.require(&gold[item])?;
        if predicted == actual {
            true_positives[predicted] += 1;
        } else {
            false_positives[predicted] += 1;
            false_negatives[actual] += 1;
        }
    }
    let mut per_class = BTreeMap::new();
    let mut sum = 0.0;
    for k in 0..class_count {
        let tp = true_positives[k] as f64;
        let precision_denominator = tp + false_positives[k] as f64;
        let recall_denominator = tp + false_negatives[k] as f64;
        let precision = if precision_denominator > 0.0 {
            tp / precision_denominator
        } else {
            0.0
        };
        let recall = if recall_denominator > 0.0 {
            tp / recall_denominator
        } else {
            0.0
        };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        per_class.insert(label_set.label(k).to_owned(), f1);
        sum += f1;
    }
    Ok((sum / class_count as f64, per_class))
}

/// Expected calibration error with `num_bins` equal-width bins on (0, 1],
/// right-inclusive. Confidence is the max probability; an item is correct
/// when its argmax (label-set order breaking ties) equals gold.
pub fn ece(
    distributions: &BTreeMap<String, LabelDistribution>,
    gold: &BTreeMap<String, String>,
    label_set: &LabelSet,
    num_bins: usize,
) -> Result<(f64, Vec<BinStat>), MetricsError> {
    if num_bins < 1 {
        return Err(MetricsError::BadBins(num_bins));
    }
    check_item_sets(distributions, gold)?;
    let edges: Vec<f64> = (0..=num_bins)
        .map(|b| b as f64 / num_bins as f64)
        .collect();
    let mut counts = vec![0usize; num_bins];
    let mut confidence_sums = vec![0.0; num_bins];
    let mut correct_counts = vec![0usize; num_bins];
    for (item, dist) in distributions {
        let confidence = dist.max_prob();
        let actual = label_set.require(&gold[item])?;
        // First bin whose right edge contains the confidence; values above
        // 1.0 by float error land in the last bin.
        let bin = (0..num_bins)
            .find(|&b| confidence <= edges[b + 1])
            .unwrap_or(num_bins - 1);
        counts[bin] += 1;
        confidence_sums[bin] += confidence;
        if dist.argmax() == actual {
            correct_counts[bin] += 1;
        }
    }
    let total = distributions.len() as f64;
    let mut bins = Vec::with_capacity(num_bins);
    let mut expected_error = 0.0;
    for b in 0..num_bins {
        let count = counts[b];
        let (mean_confidence, accuracy) = if count > 0 {
            (
                confidence_sums[b] / count as f64,
                correct_counts[b] as f64 / count as f64,
            )
        } else {
            (0.0, 0.0)
        };
        if count > 0 {
            expected_error += (count as f64 / total) * (accuracy - mean_confidence).abs();
        }
        bins.push(BinStat {
            lower: edges[b],
            upper: edges[b + 1],
            count,
            mean_confidence,
            accuracy,
        });
    }
    Ok((expected_error, bins))
}

/// Full report: macro-F1 over argmax predictions plus ECE over the raw
/// distributions, so both metrics see identical hard decisions.
pub fn evaluate(
    distributions: &BTreeMap<String, LabelDistribution>,
    gold: &BTreeMap<String, String>,
    label_set: &LabelSet,
    num_bins: usize,
) -> Result<EvalReport, MetricsError> {
    let hard: BTreeMap<String, String> = distributions
        .iter()
        .map(|(item, dist)| (item.clone(), label_set.label(dist.argmax()).to_owned()))
        .collect();
    let (macro_score, per_class_f1) = macro_f1(&hard, gold, label_set)?;
    let (expected_error, bins) = ece(distributions, gold, label_set, num_bins)?;
    Ok(EvalReport {
        item_count: distributions.len(),
        macro_f1: macro_score,
        per_class_f1,
        ece: expected_error,
        bins,
    })
}

impl EvalReport {
    /// Aligned plain-text rendering of the report.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "items     {}", self.item_count);
        let _ = writeln!(out, "macro_f1  {:.6}", self.macro_f1);
        let _ = writeln!(out, "ece       {:.6}", self.ece);
        let _ = writeln!(out, "per-class F1:");
        let width = self
            .per_class_f1
            .keys()
            .map(|label| label.len())
            .max()
            .unwrap_or(0);
        for (label, f1) in &self.per_class_f1 {
            let _ = writeln!(out, "  {label:<width$}  {f1:.6}");
        }
        let _ = writeln!(out, "calibration bins:");
        let _ = writeln!(out, "  range             count  mean_conf  accuracy");
        for bin in &self.bins {
            let _ = writeln!(
                out,
                "  ({:.2}, {:.2}]  {:>10}  {:>9.6}  {:>8.6}",
                bin.lower, bin.upper, bin.count, bin.mean_confidence, bin.accuracy
            );
        }
        out
    }
}
