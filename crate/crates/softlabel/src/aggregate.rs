//! Per-item label aggregation: hard votes, smoothed votes, and the soft-label
//! constructions that spread an annotator's confidence over the classes.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calibrate::{
    calibrate_record, AgreementStats, CalibrationConfig, CalibrationError, CalibrationSource,
};
use crate::model::{AnnotationRecord, ConfidenceScale, LabelDistribution, LabelSet, ModelError};

#[derive(Debug, Error, PartialEq)]
pub enum AggregateError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Calibration(#[from] CalibrationError),
    #[error("cannot aggregate an item with no annotations")]
    EmptyItem,
    #[error("smoothing epsilon must be in [0, 1), got {0}")]
    BadEpsilon(f64),
    #[error("soft-label probability must be in [0, 1], got {0}")]
    ProbabilityOutOfRange(f64),
    #[error("secondary label equals the primary label")]
    SecondaryEqualsPrimary,
    #[error("class index {index} is out of range for {class_count} classes")]
    ClassIndexOutOfRange { index: usize, class_count: usize },
    #[error("bayes_soft aggregation requires agreement statistics")]
    MissingStats,
}

/// Aggregation strategy for one dataset run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregationMethod {
    /// Most frequent primary label, random tie-break; one-hot output.
    MajorityHard,
    /// Primary labels weighted by unit confidence, random tie-break on exact
    /// score ties; one-hot output.
    ConfidenceWeightedHard,
    /// Confidence-weighted hard label mixed with the uniform distribution.
    LabelSmoothed { epsilon: f64 },
    /// Per-annotator soft labels with the primary probability fixed at 0.7.
    FixedSoft,
    /// Per-annotator soft labels using the converted confidence verbatim.
    ConfidenceSoft,
    /// Per-annotator soft labels using the calibrated posterior probability.
    BayesSoft,
}

impl AggregationMethod {
    pub fn name(&self) -> &'static str {
        match self {
            AggregationMethod::MajorityHard => "majority_hard",
            AggregationMethod::ConfidenceWeightedHard => "confidence_weighted_hard",
            AggregationMethod::LabelSmoothed { .. } => "label_smoothed",
            AggregationMethod::FixedSoft => "fixed_soft",
            AggregationMethod::ConfidenceSoft => "confidence_soft",
            AggregationMethod::BayesSoft => "bayes_soft",
        }
    }

    /// Builds a method from its CLI name. `epsilon` only applies to
    /// `label_smoothed`.
    pub fn from_name(name: &str, epsilon: f64) -> Option<Self> {
        match name {
            "majority_hard" => Some(AggregationMethod::MajorityHard),
            "confidence_weighted_hard" => Some(AggregationMethod::ConfidenceWeightedHard),
            "label_smoothed" => Some(AggregationMethod::LabelSmoothed { epsilon }),
            "fixed_soft" => Some(AggregationMethod::FixedSoft),
            "confidence_soft" => Some(AggregationMethod::ConfidenceSoft),
            "bayes_soft" => Some(AggregationMethod::BayesSoft),
            _ => None,
        }
    }
}

/// Everything aggregate_item needs beyond the annotations themselves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregationConfig {
    pub method: AggregationMethod,
    /// When false, secondary labels are dropped before soft-label conversion.
    pub use_secondary: bool,
    /// Run-level seed; each item derives its own tie-break stream from this
    /// and its item id, so results don't depend on processing order.
    pub rng_seed: u64,
    pub calibration: CalibrationConfig,
}

/// One annotator's soft label: `p` on the primary class, the remaining mass
/// on the secondary if present, otherwise spread evenly over the rest.
pub fn annotator_soft_label(
    primary: usize,
    secondary: Option<usize>,
    p: f64,
    class_count: usize,
) -> Result<LabelDistribution, AggregateError> {
    if !p.is_finite() || !(0.0..=1.0).contains(&p) {
        return Err(AggregateError::ProbabilityOutOfRange(p));
    }
    if primary >= class_count {
        return Err(AggregateError::ClassIndexOutOfRange {
            index: primary,
            class_count,
        });
    }
    let mut probs = vec![0.0; class_count];
    match secondary {
        Some(secondary) => {
            if secondary >= class_count {
                return Err(AggregateError::ClassIndexOutOfRange {
                    index: secondary,
                    class_count,
                });
            }
            if secondary == primary {
                return Err(AggregateError::SecondaryEqualsPrimary);
            }
            probs[primary] = p;
            probs[secondary] = 1.0 - p;
        }
        None => {
            let share = (1.0 - p) / (class_count - 1) as f64;
            for entry in probs.iter_mut() {
                *entry = share;
            }
            probs[primary] = p;
        }
    }
    LabelDistribution::new(probs).map_err(AggregateError::Model)
}

/// Entry-wise mean of the given distributions. The result is checked against
/// the simplex invariant, never renormalized.
pub fn merge_soft_labels(
    distributions: &[LabelDistribution],
) -> Result<LabelDistribution, AggregateError> {
    let first = distributions.first().ok_or(AggregateError::EmptyItem)?;
    let len = first.len();
    let mut sums = vec![0.0; len];
    for dist in distributions {
        if dist.len() != len {
            return Err(AggregateError::Model(ModelError::LengthMismatch {
                expected: len,
                actual: dist.len(),
            }));
        }
        for (sum, p) in sums.iter_mut().zip(dist.probs()) {
            *sum += p;
        }
    }
    let n = distributions.len() as f64;
    for sum in sums.iter_mut() {
        *sum /= n;
    }
    LabelDistribution::new(sums).map_err(AggregateError::Model)
}

/// Most frequent primary label; ties are broken uniformly at random among the
/// tied labels (in label-set order, so a fixed rng state is reproducible).
pub fn majority_vote(
    records: &[&AnnotationRecord],
    label_set: &LabelSet,
    rng: &mut impl Rng,
) -> Result<usize, AggregateError> {
    if records.is_empty() {
        return Err(AggregateError::EmptyItem);
    }
    let mut counts = vec![0u64; label_set.len()];
    for record in records {
        counts[label_set.require(&record.label)?] += 1;
    }
    let top = *counts.iter().max().expect("label set is non-empty");
    let tied: Vec<usize> = (0..counts.len()).filter(|&i| counts[i] == top).collect();
    Ok(tied[rng.gen_range(0..tied.len())])
}

/// Per-class score = sum of unit confidences of the annotators choosing that
/// class; argmax with random tie-break on exact score equality.
pub fn confidence_weighted_vote(
    records: &[&AnnotationRecord],
    label_set: &LabelSet,
    scale: &ConfidenceScale,
    rng: &mut impl Rng,
) -> Result<usize, AggregateError> {
    if records.is_empty() {
        return Err(AggregateError::EmptyItem);
    }
    let mut scores = vec![0.0f64; label_set.len()];
    for record in records {
        scores[label_set.require(&record.label)?] += scale.convert(record.confidence)?;
    }
    let top = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<usize> = (0..scores.len()).filter(|&i| scores[i] == top).collect();
    Ok(tied[rng.gen_range(0..tied.len())])
}

/// Mixture of the one-hot vector for `hard` with the uniform distribution:
/// (1 - epsilon) * onehot + epsilon / C everywhere.
pub fn smooth_label(
    hard: usize,
    epsilon: f64,
    class_count: usize,
) -> Result<LabelDistribution, AggregateError> {
    if !epsilon.is_finite() || !(0.0..1.0).contains(&epsilon) {
        return Err(AggregateError::BadEpsilon(epsilon));
    }
    if hard >= class_count {
        return Err(AggregateError::ClassIndexOutOfRange {
            index: hard,
            class_count,
        });
    }
    let background = epsilon / class_count as f64;
    let mut probs = vec![background; class_count];
    probs[hard] = 1.0 - epsilon + background;
    LabelDistribution::new(probs).map_err(AggregateError::Model)
}

/// Per-annotator soft label with the primary probability fixed at 0.7.
pub fn fixed_soft_label(
    primary: usize,
    secondary: Option<usize>,
    class_count: usize,
) -> Result<LabelDistribution, AggregateError> {
    annotator_soft_label(primary, secondary, 0.7, class_count)
}

/// Aggregates one item's annotations into a soft label, plus the calibration
/// source of each annotation when the method is bayes_soft.
pub fn aggregate_item_with_sources(
    records: &[&AnnotationRecord],
    label_set: &LabelSet,
    scale: &ConfidenceScale,
    stats: Option<&AgreementStats>,
    config: &AggregationConfig,
) -> Result<(LabelDistribution, Vec<CalibrationSource>), AggregateError> {
    let first = records.first().ok_or(AggregateError::EmptyItem)?;
    let mut rng = ChaCha8Rng::seed_from_u64(
        config.rng_seed ^ crate::fnv1a64(first.item_id.as_bytes()),
    );
    let class_count = label_set.len();
    let secondary_of = |record: &AnnotationRecord| -> Result<Option<usize>, AggregateError> {
        if !config.use_secondary {
            return Ok(None);
        }
        record
            .secondary_label
            .as_deref()
            .map(|label| label_set.require(label).map_err(AggregateError::Model))
            .transpose()
    };
    let merge_with_probability =
        |p_of: &mut dyn FnMut(&AnnotationRecord) -> Result<f64, AggregateError>|
         -> Result<LabelDistribution, AggregateError> {
            let mut parts = Vec::with_capacity(records.len());
            for record in records {
                let primary = label_set.require(&record.label)?;
                let p = p_of(record)?;
                parts.push(annotator_soft_label(
                    primary,
                    secondary_of(record)?,
                    p,
                    class_count,
                )?);
            }
            merge_soft_labels(&parts)
        };
    let mut sources = Vec::new();
    let distribution = match &config.method {
        AggregationMethod::MajorityHard => {
            let winner = majority_vote(records, label_set, &mut rng)?;
            LabelDistribution::one_hot(winner, class_count)
        }
        AggregationMethod::ConfidenceWeightedHard => {
            let winner = confidence_weighted_vote(records, label_set, scale, &mut rng)?;
            LabelDistribution::one_hot(winner, class_count)
        }
        AggregationMethod::LabelSmoothed { epsilon } => {
            let winner = confidence_weighted_vote(records, label_set, scale, &mut rng)?;
            smooth_label(winner, *epsilon, class_count)?
        }
        AggregationMethod::FixedSoft => merge_with_probability(&mut |_| Ok(0.7))?,
        AggregationMethod::ConfidenceSoft => merge_with_probability(&mut |record| {
            scale.convert(record.confidence).map_err(AggregateError::Model)
        })?,
        AggregationMethod::BayesSoft => {
            let stats = stats.ok_or(AggregateError::MissingStats)?;
            let calibration = config.calibration;
            let mut collected = Vec::with_capacity(records.len());
            let dist = merge_with_probability(&mut |record| {
                let calibrated = calibrate_record(record, stats, &calibration, scale)?;
                collected.push(calibrated.source);
                Ok(calibrated.probability)
            })?;
            sources = collected;
            dist
        }
    };
    Ok((distribution, sources))
}

/// Aggregates one item's annotations into a soft label.
pub fn aggregate_item(
    records: &[&AnnotationRecord],
    label_set: &LabelSet,
    scale: &ConfidenceScale,
    stats: Option<&AgreementStats>,
    config: &AggregationConfig,
) -> Result<LabelDistribution, AggregateError> {
    aggregate_item_with_sources(records, label_set, scale, stats, config)
        .map(|(distribution, _)| distribution)
}
