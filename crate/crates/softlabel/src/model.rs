//! Core data model: label sets, confidence scales, annotation records,
//! datasets, and probability distributions over labels.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance used when checking that a distribution sums to one.
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("label set needs at least 2 labels, got {0}")]
    TooFewLabels(usize),
    #[error("duplicate label {0:?} in label set")]
    DuplicateLabel(String),
    #[error("label {0:?} is not in the label set")]
    UnknownLabel(String),
    #[error("scale bounds reversed or empty: min {min} must be below max {max}")]
    BadScaleBounds { min: i64, max: i64 },
    #[error("scale table is missing an entry for raw score {0}")]
    ScaleGap(i64),
    #[error("scale value {value} for raw score {raw} is outside (0, 1]")]
    ScaleValueOutOfRange { raw: i64, value: f64 },
    #[error("scale must be non-decreasing, but raw {raw} maps below raw {prev_raw}")]
    ScaleNotMonotone { prev_raw: i64, raw: i64 },
    #[error("unknown scale preset {0:?} (expected likert5, likert10, or linear9)")]
    UnknownPreset(String),
    #[error("scale table key {0:?} is not an integer raw score")]
    BadScaleKey(String),
    #[error("scale spec needs exactly one of preset or table")]
    AmbiguousScaleSpec,
    #[error("raw confidence {raw} is outside the scale range {min}..={max}")]
    ConfidenceOutOfRange { raw: i64, min: i64, max: i64 },
    #[error("distribution must be non-empty")]
    EmptyDistribution,
    #[error("distribution entry {index} is {value}, which is negative or non-finite")]
    BadProbability { index: usize, value: f64 },
    #[error("distribution sums to {0}, not 1")]
    NotNormalized(f64),
    #[error("distribution has {actual} entries, expected {expected}")]
    LengthMismatch { expected: usize, actual: usize },
}

/// Ordered set of class labels. The order fixes the meaning of every
/// probability vector in the crate and breaks argmax ties.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct LabelSet {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl LabelSet {
    pub fn new<I, S>(labels: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() < 2 {
            return Err(ModelError::TooFewLabels(labels.len()));
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if index.insert(label.clone(), i).is_some() {
                return Err(ModelError::DuplicateLabel(label.clone()));
            }
        }
        Ok(Self { labels, index })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn require(&self, label: &str) -> Result<usize, ModelError> {
        self.index_of(label)
            .ok_or_else(|| ModelError::UnknownLabel(label.to_owned()))
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn contains(&self, label: &str) -> bool {
        self.index.contains_key(label)
    }
}

impl TryFrom<Vec<String>> for LabelSet {
    type Error = ModelError;

    fn try_from(labels: Vec<String>) -> Result<Self, Self::Error> {
        Self::new(labels)
    }
}

impl From<LabelSet> for Vec<String> {
    fn from(set: LabelSet) -> Self {
        set.labels
    }
}

/// Maps raw integer confidence scores onto the unit interval.
///
/// The mapping is a complete table over a contiguous raw range; it must be
/// non-decreasing and every value must lie in (0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceScale {
    min_raw: i64,
    max_raw: i64,
    values: Vec<f64>,
}

impl ConfidenceScale {
    /// Builds a scale from an explicit raw-score table. Every raw score in
    /// `min_raw..=max_raw` must appear exactly once.
    pub fn from_table(
        min_raw: i64,
        max_raw: i64,
        table: &BTreeMap<i64, f64>,
    ) -> Result<Self, ModelError> {
        if min_raw >= max_raw {
            return Err(ModelError::BadScaleBounds {
                min: min_raw,
                max: max_raw,
            });
        }
        let mut values = Vec::with_capacity((max_raw - min_raw + 1) as usize);
        let mut prev: Option<(i64, f64)> = None;
        for raw in min_raw..=max_raw {
            let value = *table.get(&raw).ok_or(ModelError::ScaleGap(raw))?;
            if !value.is_finite() || value <= 0.0 || value > 1.0 {
                return Err(ModelError::ScaleValueOutOfRange { raw, value });
            }
            if let Some((prev_raw, prev_value)) = prev {
                if value < prev_value {
                    return Err(ModelError::ScaleNotMonotone { prev_raw, raw });
                }
            }
            prev = Some((raw, value));
            values.push(value);
        }
        Ok(Self {
            min_raw,
            max_raw,
            values,
        })
    }

    /// Five-point scale: 1..=5 onto 0.6, 0.7, 0.8, 0.9, 1.0.
    pub fn likert5() -> Self {
        Self {
            min_raw: 1,
            max_raw: 5,
            values: vec![0.6, 0.7, 0.8, 0.9, 1.0],
        }
    }

    /// Ten-point scale: 2..=10 onto 0.6 + (raw - 2) * 0.05, with raw 1 also
    /// mapped to 0.6 so the bottom two scores share a unit value.
    pub fn likert10() -> Self {
        Self {
            min_raw: 1,
            max_raw: 10,
            values: vec![0.6, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 1.0],
        }
    }

    /// Nine-point scale: 1..=9 mapped linearly onto 0.1..=1.0.
    pub fn linear9() -> Self {
        Self {
            min_raw: 1,
            max_raw: 9,
            values: vec![0.1, 0.2125, 0.325, 0.4375, 0.55, 0.6625, 0.775, 0.8875, 1.0],
        }
    }

    pub fn preset(name: &str) -> Result<Self, ModelError> {
        match name {
            "likert5" => Ok(Self::likert5()),
            "likert10" => Ok(Self::likert10()),
            "linear9" => Ok(Self::linear9()),
            other => Err(ModelError::UnknownPreset(other.to_owned())),
        }
    }

    pub fn min_raw(&self) -> i64 {
        self.min_raw
    }

    pub fn max_raw(&self) -> i64 {
        self.max_raw
    }

    pub fn contains(&self, raw: i64) -> bool {
        raw >= self.min_raw && raw <= self.max_raw
    }

    /// Converts a raw score to its unit-interval value.
    pub fn convert(&self, raw: i64) -> Result<f64, ModelError> {
        if !self.contains(raw) {
            return Err(ModelError::ConfidenceOutOfRange {
                raw,
                min: self.min_raw,
                max: self.max_raw,
            });
        }
        Ok(self.values[(raw - self.min_raw) as usize])
    }

    /// Snaps a unit-interval value to the raw score whose unit value is
    /// nearest; ties go to the lower raw score.
    pub fn nearest_raw(&self, unit: f64) -> i64 {
        let mut best_raw = self.min_raw;
        let mut best_dist = f64::INFINITY;
        for (i, &value) in self.values.iter().enumerate() {
            let dist = (value - unit).abs();
            if dist < best_dist {
                best_dist = dist;
                best_raw = self.min_raw + i as i64;
            }
        }
        best_raw
    }
}

/// Wire representation of a confidence scale: bounds plus either a preset
/// name or an explicit raw-to-unit table keyed by stringified raw scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleSpec {
    pub min: i64,
    pub max: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<BTreeMap<String, f64>>,
}

impl ScaleSpec {
    pub fn preset(name: &str) -> Result<Self, ModelError> {
        let scale = ConfidenceScale::preset(name)?;
        Ok(Self {
            min: scale.min_raw(),
            max: scale.max_raw(),
            preset: Some(name.to_owned()),
            table: None,
        })
    }

    pub fn to_scale(&self) -> Result<ConfidenceScale, ModelError> {
        match (&self.preset, &self.table) {
            (Some(name), None) => {
                let scale = ConfidenceScale::preset(name)?;
                if scale.min_raw() != self.min || scale.max_raw() != self.max {
                    return Err(ModelError::BadScaleBounds {
                        min: self.min,
                        max: self.max,
                    });
                }
                Ok(scale)
            }
            (None, Some(table)) => {
                let mut parsed = BTreeMap::new();
                for (raw, &value) in table {
                    let raw: i64 = raw
                        .parse()
                        .map_err(|_| ModelError::BadScaleKey(raw.clone()))?;
                    parsed.insert(raw, value);
                }
                ConfidenceScale::from_table(self.min, self.max, &parsed)
            }
            _ => Err(ModelError::AmbiguousScaleSpec),
        }
    }
}

/// One annotator's judgment on one item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub item_id: String,
    pub annotator_id: String,
    pub label: String,
    pub confidence: i64,
    #[serde(default)]
    pub secondary_label: Option<String>,
}

/// Probability distribution over the label set, stored in label-set order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct LabelDistribution {
    probs: Vec<f64>,
}

impl LabelDistribution {
    /// Validates that `probs` is a point on the probability simplex: every
    /// entry finite and non-negative, total within [`SIMPLEX_TOLERANCE`] of 1.
    pub fn new(probs: Vec<f64>) -> Result<Self, ModelError> {
        if probs.is_empty() {
            return Err(ModelError::EmptyDistribution);
        }
        for (index, &value) in probs.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(ModelError::BadProbability { index, value });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(ModelError::NotNormalized(sum));
        }
        Ok(Self { probs })
    }

    pub fn one_hot(index: usize, len: usize) -> Self {
        let mut probs = vec![0.0; len];
        probs[index] = 1.0;
        Self { probs }
    }

    pub fn uniform(len: usize) -> Self {
        Self {
            probs: vec![1.0 / len as f64; len],
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.probs[index]
    }

    /// Index of the largest entry; the earliest index wins ties, so label-set
    /// order is the tie-break.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = i;
            }
        }
        best
    }

    pub fn max_prob(&self) -> f64 {
        self.probs[self.argmax()]
    }

    /// Rounds every entry to `decimals` decimal places. The result is what
    /// gets written to output files; it is intentionally NOT renormalized, so
    /// a rounded distribution may be off the simplex by rounding error.
    pub fn rounded(&self, decimals: u32) -> Vec<f64> {
        let factor = 10f64.powi(decimals as i32);
        self.probs
            .iter()
            .map(|p| (p * factor).round() / factor)
            .collect()
    }
}

impl TryFrom<Vec<f64>> for LabelDistribution {
    type Error = ModelError;

    fn try_from(probs: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(probs)
    }
}

impl From<LabelDistribution> for Vec<f64> {
    fn from(dist: LabelDistribution) -> Self {
        dist.probs
    }
}

/// A complete annotation dataset: the label vocabulary, the confidence scale
/// the annotators used, and every individual judgment.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub label_set: LabelSet,
    pub scale: ConfidenceScale,
    pub records: Vec<AnnotationRecord>,
}

impl Dataset {
    pub fn new(label_set: LabelSet, scale: ConfidenceScale, records: Vec<AnnotationRecord>) -> Self {
        Self {
            label_set,
            scale,
            records,
        }
    }

    /// Groups records by item, preserving input order inside each item.
    /// Items come back in sorted id order so iteration is deterministic.
    pub fn items(&self) -> BTreeMap<&str, Vec<&AnnotationRecord>> {
        let mut map: BTreeMap<&str, Vec<&AnnotationRecord>> = BTreeMap::new();
        for record in &self.records {
            map.entry(record.item_id.as_str()).or_default().push(record);
        }
        map
    }

    pub fn item_ids(&self) -> Vec<String> {
        self.items().keys().map(|id| (*id).to_owned()).collect()
    }

    /// Checks every record against the label set and scale. Returns all
    /// violations rather than stopping at the first, so callers can report
    /// a complete picture of a bad file.
    pub fn validate(&self) -> Vec<Violation> {
        let mut violations = Vec::new();
        let mut seen: HashSet<(&str, &str)> = HashSet::new();
        for record in &self.records {
            if !self.label_set.contains(&record.label) {
                violations.push(Violation::UnknownLabel {
                    item_id: record.item_id.clone(),
                    annotator_id: record.annotator_id.clone(),
                    label: record.label.clone(),
                    field: LabelField::Primary,
                });
            }
            if let Some(secondary) = &record.secondary_label {
                if !self.label_set.contains(secondary) {
                    violations.push(Violation::UnknownLabel {
                        item_id: record.item_id.clone(),
                        annotator_id: record.annotator_id.clone(),
                        label: secondary.clone(),
                        field: LabelField::Secondary,
                    });
                }
                if secondary == &record.label {
                    violations.push(Violation::SecondaryEqualsPrimary {
                        item_id: record.item_id.clone(),
                        annotator_id: record.annotator_id.clone(),
                        label: record.label.clone(),
                    });
                }
            }
            if !self.scale.contains(record.confidence) {
                violations.push(Violation::ConfidenceOutOfRange {
                    item_id: record.item_id.clone(),
                    annotator_id: record.annotator_id.clone(),
                    confidence: record.confidence,
                    min: self.scale.min_raw(),
                    max: self.scale.max_raw(),
                });
            }
            if !seen.insert((record.item_id.as_str(), record.annotator_id.as_str())) {
                violations.push(Violation::DuplicateAnnotation {
                    item_id: record.item_id.clone(),
                    annotator_id: record.annotator_id.clone(),
                });
            }
        }
        violations
    }
}

/// Which field of a record an unknown label appeared in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelField {
    Primary,
    Secondary,
    Gold,
}

impl fmt::Display for LabelField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelField::Primary => write!(f, "label"),
            LabelField::Secondary => write!(f, "secondary_label"),
            LabelField::Gold => write!(f, "gold label"),
        }
    }
}

/// A single well-formedness problem found in a dataset.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    UnknownLabel {
        item_id: String,
        annotator_id: String,
        label: String,
        field: LabelField,
    },
    ConfidenceOutOfRange {
        item_id: String,
        annotator_id: String,
        confidence: i64,
        min: i64,
        max: i64,
    },
    SecondaryEqualsPrimary {
        item_id: String,
        annotator_id: String,
        label: String,
    },
    DuplicateAnnotation {
        item_id: String,
        annotator_id: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownLabel {
                item_id,
                annotator_id,
                label,
                field,
            } => write!(
                f,
                "item {item_id}, annotator {annotator_id}: {field} {label:?} is not in the label set"
            ),
            Violation::ConfidenceOutOfRange {
                item_id,
                annotator_id,
                confidence,
                min,
                max,
            } => write!(
                f,
                "item {item_id}, annotator {annotator_id}: confidence {confidence} outside {min}..={max}"
            ),
            Violation::SecondaryEqualsPrimary {
                item_id,
                annotator_id,
                label,
            } => write!(
                f,
                "item {item_id}, annotator {annotator_id}: secondary label duplicates primary {label:?}"
            ),
            Violation::DuplicateAnnotation {
                item_id,
                annotator_id,
            } => write!(
                f,
                "item {item_id}, annotator {annotator_id}: duplicate annotation for the same item"
            ),
        }
    }
}
