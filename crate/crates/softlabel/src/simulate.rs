//! Synthetic annotation generator with planted ground truth: known gold
//! labels, annotator reliabilities, and confidence miscalibration, so that
//! calibration and aggregation quality can be measured against an oracle.

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::derive_seed;
use crate::model::{
    AnnotationRecord, Dataset, LabelDistribution, LabelSet, ModelError, ScaleSpec,
};

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("simulation needs at least one annotator profile")]
    NoAnnotators,
    #[error("duplicate annotator id {0:?}")]
    DuplicateAnnotator(String),
    #[error("annotator {annotator}: accuracy {accuracy} must be in (1/{class_count}, 1]")]
    BadAccuracy {
        annotator: String,
        accuracy: f64,
        class_count: usize,
    },
    #[error("annotator {annotator}: secondary_rate {rate} must be in [0, 1]")]
    BadSecondaryRate { annotator: String, rate: f64 },
    #[error("annotator {annotator}: confidence_bias {bias} must be finite")]
    BadBias { annotator: String, bias: f64 },
    #[error("annotator {annotator}: planted matrix must be {class_count}x{class_count} row-stochastic with non-negative entries")]
    BadPlantedMatrix {
        annotator: String,
        class_count: usize,
    },
    #[error("cannot draw {requested} annotations per item from {available} annotators")]
    InfeasibleAssignment { requested: u32, available: usize },
    #[error("annotations_per_item is invalid: {0}")]
    BadAnnotationsPerItem(String),
    #[error("class_prior must have one probability per label")]
    PriorLengthMismatch,
}

/// How an annotator errs when not reproducing the gold label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfusionStyle {
    /// Correct with probability `accuracy`; errors uniform over the other
    /// classes.
    UniformError,
    /// Emissions drawn from this row-stochastic matrix (row = gold class);
    /// `accuracy` is ignored for emission, the diagonal plays its role.
    PlantedMatrix(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatorProfile {
    pub annotator_id: String,
    /// Probability the primary label equals gold (uniform_error style).
    pub accuracy: f64,
    /// Offset added to the true correctness probability before snapping to
    /// the raw scale; positive means overconfident.
    #[serde(default)]
    pub confidence_bias: f64,
    /// Probability of supplying a secondary label on an eligible annotation.
    #[serde(default)]
    pub secondary_rate: f64,
    #[serde(default = "default_confusion_style")]
    pub confusion_style: ConfusionStyle,
}

fn default_confusion_style() -> ConfusionStyle {
    ConfusionStyle::UniformError
}

/// How many annotators judge each item.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnnotationsPerItem {
    /// Every item gets exactly this many annotations.
    Count(u32),
    /// Fractional mean: 1.3 gives one annotation with probability 0.7 and
    /// two with probability 0.3.
    Fraction(f64),
    /// Uniform integer draw from [lo, hi], inclusive.
    Range([u32; 2]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub num_items: usize,
    pub labels: Vec<String>,
    pub class_prior: Vec<f64>,
    pub scale: ScaleSpec,
    pub annotators: Vec<AnnotatorProfile>,
    pub annotations_per_item: AnnotationsPerItem,
    pub seed: u64,
    /// When set, only annotations with raw confidence strictly below this
    /// value are eligible for a secondary label.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secondary_below_raw: Option<i64>,
}

/// Everything planted into a generated dataset, sufficient to compute oracle
/// quantities (true confusion matrices, per-annotator correctness rates).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlantedRecord {
    pub seed: u64,
    pub labels: Vec<String>,
    pub class_prior: Vec<f64>,
    pub annotators: Vec<PlantedAnnotator>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlantedAnnotator {
    pub annotator_id: String,
    pub confidence_bias: f64,
    pub secondary_rate: f64,
    /// Row-stochastic emission matrix actually used (row = gold class).
    pub effective_confusion: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub dataset: Dataset,
    pub gold: BTreeMap<String, String>,
    pub planted: PlantedRecord,
}

fn effective_confusion(profile: &AnnotatorProfile, class_count: usize) -> Vec<Vec<f64>> {
    match &profile.confusion_style {
        ConfusionStyle::PlantedMatrix(matrix) => matrix.clone(),
        ConfusionStyle::UniformError => {
            let off = (1.0 - profile.accuracy) / (class_count - 1) as f64;
            (0..class_count)
                .map(|g| {
                    (0..class_count)
                        .map(|l| if l == g { profile.accuracy } else { off })
                        .collect()
                })
                .collect()
        }
    }
}

fn validate(config: &SimConfig, class_count: usize) -> Result<(), SimError> {
    if config.annotators.is_empty() {
        return Err(SimError::NoAnnotators);
    }
    if config.class_prior.len() != class_count {
        return Err(SimError::PriorLengthMismatch);
    }
    LabelDistribution::new(config.class_prior.clone())?;
    let mut seen = HashSet::new();
    for profile in &config.annotators {
        if !seen.insert(profile.annotator_id.as_str()) {
            return Err(SimError::DuplicateAnnotator(profile.annotator_id.clone()));
        }
        let floor = 1.0 / class_count as f64;
        if !profile.accuracy.is_finite() || profile.accuracy <= floor || profile.accuracy > 1.0 {
            return Err(SimError::BadAccuracy {
                annotator: profile.annotator_id.clone(),
                accuracy: profile.accuracy,
                class_count,
            });
        }
        if !profile.confidence_bias.is_finite() {
            return Err(SimError::BadBias {
                annotator: profile.annotator_id.clone(),
                bias: profile.confidence_bias,
            });
        }
        if !(0.0..=1.0).contains(&profile.secondary_rate) {
            return Err(SimError::BadSecondaryRate {
                annotator: profile.annotator_id.clone(),
                rate: profile.secondary_rate,
            });
        }
        if let ConfusionStyle::PlantedMatrix(matrix) = &profile.confusion_style {
            let bad = matrix.len() != class_count
                || matrix.iter().any(|row| {
                    row.len() != class_count
                        || row.iter().any(|&v| !v.is_finite() || v < 0.0)
                        || (row.iter().sum::<f64>() - 1.0).abs() > 1e-9
                });
            if bad {
                return Err(SimError::BadPlantedMatrix {
                    annotator: profile.annotator_id.clone(),
                    class_count,
                });
            }
        }
    }
    let available = config.annotators.len();
    let max_requested = match config.annotations_per_item {
        AnnotationsPerItem::Count(n) => {
            if n < 1 {
                return Err(SimError::BadAnnotationsPerItem("count must be >= 1".into()));
            }
            n
        }
        AnnotationsPerItem::Fraction(x) => {
            if !x.is_finite() || x < 1.0 {
                return Err(SimError::BadAnnotationsPerItem(format!(
                    "fractional mean {x} must be >= 1"
                )));
            }
            x.ceil() as u32
        }
        AnnotationsPerItem::Range([lo, hi]) => {
            if lo < 1 || lo > hi {
                return Err(SimError::BadAnnotationsPerItem(format!(
                    "range [{lo}, {hi}] must satisfy 1 <= lo <= hi"
                )));
            }
            hi
        }
    };
    if max_requested as usize > available {
        return Err(SimError::InfeasibleAssignment {
            requested: max_requested,
            available,
        });
    }
    Ok(())
}

/// Draws an index from a probability vector using one uniform variate.
fn sample_categorical(probs: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.gen();
    let mut cumulative = 0.0;
    for (k, &p) in probs.iter().enumerate() {
        cumulative += p;
        if u < cumulative {
            return k;
        }
    }
    probs.len() - 1
}

/// Uniform draw over 0..class_count excluding `skip`.
fn sample_other_class(class_count: usize, skip: usize, rng: &mut impl Rng) -> usize {
    let draw = rng.gen_range(0..class_count - 1);
    if draw >= skip {
        draw + 1
    } else {
        draw
    }
}

/// Generates a dataset from the config. Identical configs produce
/// byte-identical datasets: generation is single-threaded and every random
/// draw comes from one seeded stream.
pub fn simulate(config: &SimConfig) -> Result<SimOutput, SimError> {
    let label_set = LabelSet::new(config.labels.clone())?;
    let class_count = label_set.len();
    validate(config, class_count)?;
    let scale = config.scale.to_scale()?;

    let confusions: Vec<Vec<Vec<f64>>> = config
        .annotators
        .iter()
        .map(|profile| effective_confusion(profile, class_count))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, "simulate"));
    let id_width = config.num_items.saturating_sub(1).to_string().len().max(4);
    let mut records = Vec::new();
    let mut gold_map = BTreeMap::new();
    let mut pool: Vec<usize> = (0..config.annotators.len()).collect();
    for item in 0..config.num_items {
        let item_id = format!("item{item:0id_width$}");
        let gold = sample_categorical(&config.class_prior, &mut rng);
        gold_map.insert(item_id.clone(), label_set.label(gold).to_owned());

        let count = match config.annotations_per_item {
            AnnotationsPerItem::Count(n) => n,
            AnnotationsPerItem::Fraction(x) => {
                let base = x.floor();
                let extra = rng.gen_bool(x - base);
                base as u32 + u32::from(extra)
            }
            AnnotationsPerItem::Range([lo, hi]) => rng.gen_range(lo..=hi),
        } as usize;
        let (chosen, _) = pool.partial_shuffle(&mut rng, count);
        let mut chosen: Vec<usize> = chosen.to_vec();
        chosen.sort_unstable();

        for annotator in chosen {
            let profile = &config.annotators[annotator];
            let confusion = &confusions[annotator];
            let primary = sample_categorical(&confusion[gold], &mut rng);
            let correctness = confusion[gold][gold];
            let raw = scale.nearest_raw(correctness + profile.confidence_bias);

            let wants_secondary = rng.gen_bool(profile.secondary_rate);
            let eligible = config
                .secondary_below_raw
                .is_none_or(|threshold| raw < threshold);
            let secondary_label = if wants_secondary && eligible {
                let secondary = if primary != gold {
                    gold
                } else {
                    sample_other_class(class_count, primary, &mut rng)
                };
                Some(label_set.label(secondary).to_owned())
            } else {
                None
            };

            records.push(AnnotationRecord {
                item_id: item_id.clone(),
                annotator_id: profile.annotator_id.clone(),
                label: label_set.label(primary).to_owned(),
                confidence: raw,
                secondary_label,
            });
        }
    }

    let planted = PlantedRecord {
        seed: config.seed,
        labels: config.labels.clone(),
        class_prior: config.class_prior.clone(),
        annotators: config
            .annotators
            .iter()
            .zip(confusions)
            .map(|(profile, effective_confusion)| PlantedAnnotator {
                annotator_id: profile.annotator_id.clone(),
                confidence_bias: profile.confidence_bias,
                secondary_rate: profile.secondary_rate,
                effective_confusion,
            })
            .collect(),
    };
    Ok(SimOutput {
        dataset: Dataset::new(label_set, scale, records),
        gold: gold_map,
        planted,
    })
}
