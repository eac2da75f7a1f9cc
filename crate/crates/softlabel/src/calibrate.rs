//! Agreement-based Bayesian confidence calibration.
//!
//! Stated confidences are first mapped to a prior on the primary label being
//! correct, then updated with likelihoods estimated from how often each
//! annotator historically agreed with peers at that confidence level. When a
//! key has too little co-annotation evidence, the prior is used as-is.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{AnnotationRecord, ConfidenceScale, Dataset, ModelError};

#[derive(Debug, Error, PartialEq)]
pub enum CalibrationError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("unit confidence {0} is outside (0, 1]")]
    ConfidenceOutOfDomain(f64),
    #[error("class count must be at least 2, got {0}")]
    ClassCountTooSmall(usize),
    #[error("{name} must be a probability in [0, 1], got {value}")]
    InvalidProbability { name: &'static str, value: f64 },
    #[error("agreement evidence is degenerate: both posterior terms are zero")]
    DegenerateEvidence,
    #[error("bin width must be at least 1 raw scale point, got {0}")]
    BadBinWidth(i64),
}

/// Co-annotation counters for one (annotator, label, confidence-bin) key.
///
/// All four counters range over items with at least two annotators that this
/// annotator judged at a raw confidence inside the bin:
///
/// * `n_peer_label`: items where at least one OTHER annotator gave the label.
/// * `n_peer_not_label`: items where no other annotator gave the label.
/// * `n_co_agree`: subset of `n_peer_label` where this annotator's primary
///   was the label too.
/// * `n_solo_label`: subset of `n_peer_not_label` where this annotator's
///   primary was the label.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub n_co_agree: u64,
    pub n_peer_label: u64,
    pub n_solo_label: u64,
    pub n_peer_not_label: u64,
}

/// Per-annotator, per-label, per-confidence-bin agreement history.
#[derive(Debug, Clone, PartialEq)]
pub struct AgreementStats {
    bin_width: i64,
    min_raw: i64,
    counters: BTreeMap<(String, String, i64), Counters>,
}

impl AgreementStats {
    /// Accumulates counters over every item with at least two annotators,
    /// with one bin per raw scale point.
    pub fn accumulate(dataset: &Dataset) -> Self {
        Self::accumulate_binned(dataset, 1).expect("bin width 1 is always valid")
    }

    /// Accumulates counters, merging every `bin_width` adjacent raw scale
    /// points into one bin. Bins are anchored at the scale minimum and
    /// identified by their lowest raw score.
    pub fn accumulate_binned(dataset: &Dataset, bin_width: i64) -> Result<Self, CalibrationError> {
        if bin_width < 1 {
            return Err(CalibrationError::BadBinWidth(bin_width));
        }
        let min_raw = dataset.scale.min_raw();
        let mut stats = Self {
            bin_width,
            min_raw,
            counters: BTreeMap::new(),
        };
        for (_, records) in dataset.items() {
            if records.len() < 2 {
                continue;
            }
            for record in &records {
                let peer_labels: HashSet<&str> = records
                    .iter()
                    .filter(|other| other.annotator_id != record.annotator_id)
                    .map(|other| other.label.as_str())
                    .collect();
                let bin = stats.bin_of(record.confidence);
                for label in dataset.label_set.labels() {
                    let entry = stats
                        .counters
                        .entry((record.annotator_id.clone(), label.clone(), bin))
                        .or_default();
                    let peer_gave_label = peer_labels.contains(label.as_str());
                    if peer_gave_label {
                        entry.n_peer_label += 1;
                    } else {
                        entry.n_peer_not_label += 1;
                    }
                    if *label == record.label {
                        if peer_gave_label {
                            entry.n_co_agree += 1;
                        } else {
                            entry.n_solo_label += 1;
                        }
                    }
                }
            }
        }
        Ok(stats)
    }

    /// Builds stats directly from counter entries, e.g. ones computed offline.
    pub fn from_entries<I>(bin_width: i64, min_raw: i64, entries: I) -> Result<Self, CalibrationError>
    where
        I: IntoIterator<Item = ((String, String, i64), Counters)>,
    {
        if bin_width < 1 {
            return Err(CalibrationError::BadBinWidth(bin_width));
        }
        Ok(Self {
            bin_width,
            min_raw,
            counters: entries.into_iter().collect(),
        })
    }

    /// Maps a raw confidence score to the lowest raw score of its bin.
    pub fn bin_of(&self, raw: i64) -> i64 {
        self.min_raw + (raw - self.min_raw).div_euclid(self.bin_width) * self.bin_width
    }

    pub fn bin_width(&self) -> i64 {
        self.bin_width
    }

    pub fn counters(&self, annotator: &str, label: &str, bin: i64) -> Counters {
        self.counters
            .get(&(annotator.to_owned(), label.to_owned(), bin))
            .copied()
            .unwrap_or_default()
    }

    pub fn is_empty(&self) -> bool {
        self.counters.is_empty()
    }

    pub fn len(&self) -> usize {
        self.counters.len()
    }

    /// Estimated likelihoods (P(agree | correct), P(give label | incorrect))
    /// for one key. Absent when either denominator is zero, when the key's
    /// total evidence is below `min_count_threshold`, or when both estimates
    /// are zero (the posterior would be undefined).
    pub fn likelihood_pair(
        &self,
        annotator: &str,
        label: &str,
        bin: i64,
        min_count_threshold: u64,
    ) -> Option<(f64, f64)> {
        let c = self.counters(annotator, label, bin);
        if c.n_peer_label == 0 || c.n_peer_not_label == 0 {
            return None;
        }
        if c.n_peer_label + c.n_peer_not_label < min_count_threshold {
            return None;
        }
        if c.n_co_agree == 0 && c.n_solo_label == 0 {
            return None;
        }
        Some((
            c.n_co_agree as f64 / c.n_peer_label as f64,
            c.n_solo_label as f64 / c.n_peer_not_label as f64,
        ))
    }

    /// Exports the counters as a JSON object keyed `annotator|label|bin`.
    /// Keys come out in sorted order so the export is byte-stable.
    pub fn to_json(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        for ((annotator, label, bin), counters) in &self.counters {
            map.insert(
                format!("{annotator}|{label}|{bin}"),
                serde_json::to_value(counters).expect("counters serialize"),
            );
        }
        serde_json::Value::Object(map)
    }
}

/// Whether a calibrated probability came from the posterior update or from
/// the prior because agreement evidence was missing or too sparse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationSource {
    Posterior,
    PriorFallback,
}

/// A calibrated probability for one annotation's primary label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibratedConfidence {
    pub probability: f64,
    pub source: CalibrationSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CalibrationConfig {
    /// Minimum total co-annotation evidence a key needs before its
    /// likelihoods are trusted.
    pub min_count_threshold: u64,
    /// Number of classes in the label set.
    pub class_count: usize,
}

impl CalibrationConfig {
    pub fn new(class_count: usize) -> Self {
        Self {
            min_count_threshold: 3,
            class_count,
        }
    }
}

/// Prior probability that the primary label is correct, given a stated unit
/// confidence `c` and `class_count` classes. Assumes a uniform prior over
/// classes and that the stated confidence is the chance of being right, which
/// reduces Bayes' rule to c / (c + (1 - c)(C - 1)).
pub fn prior_probability(c: f64, class_count: usize) -> Result<f64, CalibrationError> {
    if class_count < 2 {
        return Err(CalibrationError::ClassCountTooSmall(class_count));
    }
    if !c.is_finite() || c <= 0.0 || c > 1.0 {
        return Err(CalibrationError::ConfidenceOutOfDomain(c));
    }
    Ok(c / (c + (1.0 - c) * (class_count - 1) as f64))
}

fn check_probability(name: &'static str, value: f64) -> Result<(), CalibrationError> {
    if !value.is_finite() || !(0.0..=1.0).contains(&value) {
        return Err(CalibrationError::InvalidProbability { name, value });
    }
    Ok(())
}

/// Posterior probability of the primary label after observing the agreement
/// evidence, via Bayes' rule over {correct, incorrect}.
///
/// Equal likelihoods return the prior bit-for-bit (uninformative evidence),
/// and prior 0 or 1 is a fixed point regardless of the likelihoods.
pub fn posterior_probability(
    prior: f64,
    p_agree: f64,
    p_disagree: f64,
) -> Result<f64, CalibrationError> {
    check_probability("prior", prior)?;
    check_probability("p_agree", p_agree)?;
    check_probability("p_disagree", p_disagree)?;
    if p_agree == p_disagree {
        return Ok(prior);
    }
    if prior == 0.0 || prior == 1.0 {
        return Ok(prior);
    }
    let numerator = p_agree * prior;
    let denominator = numerator + p_disagree * (1.0 - prior);
    if denominator == 0.0 {
        return Err(CalibrationError::DegenerateEvidence);
    }
    Ok(numerator / denominator)
}

/// Calibrates one annotation: converts the raw confidence to a prior and
/// applies the posterior update when the annotator's agreement history for
/// this label and confidence bin carries enough evidence.
pub fn calibrate_record(
    record: &AnnotationRecord,
    stats: &AgreementStats,
    config: &CalibrationConfig,
    scale: &ConfidenceScale,
) -> Result<CalibratedConfidence, CalibrationError> {
    let unit = scale.convert(record.confidence)?;
    let prior = prior_probability(unit, config.class_count)?;
    let bin = stats.bin_of(record.confidence);
    let pair = stats.likelihood_pair(
        &record.annotator_id,
        &record.label,
        bin,
        config.min_count_threshold,
    );
    match pair {
        Some((p_agree, p_disagree)) => match posterior_probability(prior, p_agree, p_disagree) {
            Ok(probability) => Ok(CalibratedConfidence {
                probability,
                source: CalibrationSource::Posterior,
            }),
            Err(CalibrationError::DegenerateEvidence) => Ok(CalibratedConfidence {
                probability: prior,
                source: CalibrationSource::PriorFallback,
            }),
            Err(other) => Err(other),
        },
        None => Ok(CalibratedConfidence {
            probability: prior,
            source: CalibrationSource::PriorFallback,
        }),
    }
}
