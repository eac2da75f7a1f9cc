//! Classic Dawid-Skene EM: per-annotator confusion matrices and class priors
//! estimated jointly with per-item label posteriors, from primary labels only.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::json;
use thiserror::Error;

use crate::model::{Dataset, LabelDistribution, LabelSet, ModelError};

#[derive(Debug, Error, PartialEq)]
pub enum DsError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("cannot fit a model on an empty dataset")]
    EmptyDataset,
    #[error("max_iterations must be at least 1, got {0}")]
    BadMaxIterations(usize),
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("smoothing alpha must be finite and non-negative, got {0}")]
    BadAlpha(f64),
    #[error("likelihood became non-finite at EM iteration {iteration}")]
    NonFiniteLikelihood { iteration: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmConfig {
    pub max_iterations: usize,
    /// Convergence threshold on the absolute change of the objective.
    pub tolerance: f64,
    /// Additive smoothing on prior and confusion counts. Zero reproduces the
    /// unsmoothed model, including its collapse on sparse data.
    pub smoothing_alpha: f64,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            tolerance: 1e-6,
            smoothing_alpha: 0.01,
        }
    }
}

impl EmConfig {
    fn validate(&self) -> Result<(), DsError> {
        if self.max_iterations < 1 {
            return Err(DsError::BadMaxIterations(self.max_iterations));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(DsError::BadTolerance(self.tolerance));
        }
        if !self.smoothing_alpha.is_finite() || self.smoothing_alpha < 0.0 {
            return Err(DsError::BadAlpha(self.smoothing_alpha));
        }
        Ok(())
    }
}

/// A fitted Dawid-Skene model.
#[derive(Debug, Clone)]
pub struct DawidSkeneModel {
    pub label_set: LabelSet,
    pub class_priors: LabelDistribution,
    /// Per annotator, a row-stochastic matrix: row = true class, column =
    /// emitted label.
    pub confusion: BTreeMap<String, Vec<Vec<f64>>>,
    pub posteriors: BTreeMap<String, LabelDistribution>,
    /// Objective value after each iteration. This is the quantity EM provably
    /// never decreases: the data log-likelihood when smoothing_alpha = 0, and
    /// the likelihood plus the Dirichlet smoothing penalty otherwise.
    pub log_likelihood_trace: Vec<f64>,
}

impl DawidSkeneModel {
    pub fn iterations(&self) -> usize {
        self.log_likelihood_trace.len()
    }

    /// Per-item posterior distributions; these are the soft labels.
    pub fn soft_labels(&self) -> &BTreeMap<String, LabelDistribution> {
        &self.posteriors
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "class_priors": self.class_priors.probs(),
            "confusion": self.confusion,
            "iterations": self.iterations(),
            "final_log_likelihood": self.log_likelihood_trace.last(),
        })
    }
}

/// Initial per-item posteriors: the empirical proportion of each item's
/// primary labels.
pub fn init_posteriors(
    dataset: &Dataset,
) -> Result<BTreeMap<String, LabelDistribution>, DsError> {
    let prepared = prepare(dataset)?;
    let class_count = dataset.label_set.len();
    let mut out = BTreeMap::new();
    for (item_id, posterior) in prepared
        .item_ids
        .iter()
        .zip(initial_posteriors(&prepared.item_annotations, class_count))
    {
        out.insert(
            item_id.clone(),
            LabelDistribution::new(posterior).map_err(DsError::Model)?,
        );
    }
    Ok(out)
}

/// Fits the model by EM on primary labels; confidences and secondary labels
/// are ignored.
pub fn fit(dataset: &Dataset, config: &EmConfig) -> Result<DawidSkeneModel, DsError> {
    config.validate()?;
    let prepared = prepare(dataset)?;
    if prepared.item_ids.is_empty() {
        return Err(DsError::EmptyDataset);
    }
    let class_count = dataset.label_set.len();
    let annotator_count = prepared.annotator_ids.len();
    let alpha = config.smoothing_alpha;

    let mut posteriors = initial_posteriors(&prepared.item_annotations, class_count);
    let mut trace: Vec<f64> = Vec::new();
    let (priors, confusion) = loop {
        let (priors, confusion) = m_step(
            &prepared.item_annotations,
            &posteriors,
            alpha,
            class_count,
            annotator_count,
        );
        let iteration = trace.len();
        let (new_posteriors, log_likelihood) =
            e_step(&prepared.item_annotations, &priors, &confusion)
                .ok_or(DsError::NonFiniteLikelihood { iteration })?;
        posteriors = new_posteriors;
        let objective = log_likelihood + penalty(alpha, &priors, &confusion);
        if !objective.is_finite() {
            return Err(DsError::NonFiniteLikelihood { iteration });
        }
        let converged = trace
            .last()
            .is_some_and(|prev| (objective - prev).abs() < config.tolerance);
        trace.push(objective);
        if converged || trace.len() >= config.max_iterations {
            break (priors, confusion);
        }
    };

    let class_priors = LabelDistribution::new(priors).map_err(DsError::Model)?;
    let confusion_map: BTreeMap<String, Vec<Vec<f64>>> = prepared
        .annotator_ids
        .iter()
        .cloned()
        .zip(confusion)
        .collect();
    let mut posterior_map = BTreeMap::new();
    for (item_id, posterior) in prepared.item_ids.iter().zip(posteriors) {
        posterior_map.insert(
            item_id.clone(),
            LabelDistribution::new(posterior).map_err(DsError::Model)?,
        );
    }
    Ok(DawidSkeneModel {
        label_set: dataset.label_set.clone(),
        class_priors,
        confusion: confusion_map,
        posteriors: posterior_map,
        log_likelihood_trace: trace,
    })
}

struct Prepared {
    item_ids: Vec<String>,
    annotator_ids: Vec<String>,
    /// Per item (parallel to item_ids): (annotator index, label index) pairs.
    item_annotations: Vec<Vec<(usize, usize)>>,
}

fn prepare(dataset: &Dataset) -> Result<Prepared, DsError> {
    let annotator_ids: Vec<String> = dataset
        .records
        .iter()
        .map(|r| r.annotator_id.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let annotator_index: BTreeMap<&str, usize> = annotator_ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let mut item_ids = Vec::new();
    let mut item_annotations = Vec::new();
    for (item_id, records) in dataset.items() {
        let mut annotations = Vec::with_capacity(records.len());
        for record in records {
            let label = dataset.label_set.require(&record.label)?;
            annotations.push((annotator_index[record.annotator_id.as_str()], label));
        }
        item_ids.push(item_id.to_owned());
        item_annotations.push(annotations);
    }
    Ok(Prepared {
        item_ids,
        annotator_ids,
        item_annotations,
    })
}

fn initial_posteriors(items: &[Vec<(usize, usize)>], class_count: usize) -> Vec<Vec<f64>> {
    items
        .iter()
        .map(|annotations| {
            let mut posterior = vec![0.0; class_count];
            for &(_, label) in annotations {
                posterior[label] += 1.0;
            }
            let n = annotations.len() as f64;
            for p in posterior.iter_mut() {
                *p /= n;
            }
            posterior
        })
        .collect()
}

/// Re-estimates class priors and confusion matrices from the current
/// posteriors with additive smoothing. A confusion row with no mass at all
/// (possible only at alpha = 0) falls back to uniform, which leaves the EM
/// objective untouched because such a row carries zero posterior weight.
fn m_step(
    items: &[Vec<(usize, usize)>],
    posteriors: &[Vec<f64>],
    alpha: f64,
    class_count: usize,
    annotator_count: usize,
) -> (Vec<f64>, Vec<Vec<Vec<f64>>>) {
    let mut prior_counts = vec![alpha; class_count];
    for posterior in posteriors {
        for (count, p) in prior_counts.iter_mut().zip(posterior) {
            *count += p;
        }
    }
    let total = items.len() as f64 + class_count as f64 * alpha;
    let priors: Vec<f64> = prior_counts.into_iter().map(|c| c / total).collect();

    let mut counts = vec![vec![vec![alpha; class_count]; class_count]; annotator_count];
    for (annotations, posterior) in items.iter().zip(posteriors) {
        for &(annotator, label) in annotations {
            for (k, &p) in posterior.iter().enumerate() {
                counts[annotator][k][label] += p;
            }
        }
    }
    let confusion = counts
        .into_iter()
        .map(|matrix| {
            matrix
                .into_iter()
                .map(|row| {
                    let row_sum: f64 = row.iter().sum();
                    if row_sum == 0.0 {
                        vec![1.0 / class_count as f64; class_count]
                    } else {
                        row.into_iter().map(|v| v / row_sum).collect()
                    }
                })
                .collect()
        })
        .collect();
    (priors, confusion)
}

/// Recomputes posteriors under the given parameters and returns them with the
/// data log-likelihood. None when any item's total probability mass is not a
/// positive finite number.
fn e_step(
    items: &[Vec<(usize, usize)>],
    priors: &[f64],
    confusion: &[Vec<Vec<f64>>],
) -> Option<(Vec<Vec<f64>>, f64)> {
    let class_count = priors.len();
    let mut posteriors = Vec::with_capacity(items.len());
    let mut log_likelihood = 0.0;
    for annotations in items {
        let mut joint = vec![0.0; class_count];
        for (k, entry) in joint.iter_mut().enumerate() {
            let mut value = priors[k];
            for &(annotator, label) in annotations {
                value *= confusion[annotator][k][label];
            }
            *entry = value;
        }
        let total: f64 = joint.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return None;
        }
        for entry in joint.iter_mut() {
            *entry /= total;
        }
        log_likelihood += total.ln();
        posteriors.push(joint);
    }
    Some((posteriors, log_likelihood))
}

/// Dirichlet smoothing penalty: alpha times the log of every estimated
/// parameter. Zero when alpha is zero (where parameters may legitimately hit
/// zero, the penalty must not produce NaN).
fn penalty(alpha: f64, priors: &[f64], confusion: &[Vec<Vec<f64>>]) -> f64 {
    if alpha == 0.0 {
        return 0.0;
    }
    let mut sum: f64 = priors.iter().map(|p| p.ln()).sum();
    for matrix in confusion {
        for row in matrix {
            sum += row.iter().map(|p| p.ln()).sum::<f64>();
        }
    }
    alpha * sum
}
