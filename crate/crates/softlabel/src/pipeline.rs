//! End-to-end runs: parse, optional split, optional agreement statistics,
//! per-item aggregation, emission, and the run manifest.

use std::collections::BTreeSet;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregate::{
    aggregate_item_with_sources, AggregateError, AggregationConfig, AggregationMethod,
};
use crate::calibrate::{AgreementStats, CalibrationConfig, CalibrationError, CalibrationSource};
use crate::io::{self, IoError, ItemSoftLabel};
use crate::metrics::{self, EvalReport, MetricsError};
use crate::model::{Dataset, LabelSet};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Aggregate(#[from] AggregateError),
    #[error(transparent)]
    Calibration(#[from] CalibrationError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("bad run config: {0}")]
    BadConfig(String),
    #[error(
        "prediction and gold item sets differ; missing from predictions: [{}]; missing from gold: [{}]",
        missing_from_predictions.join(", "),
        missing_from_gold.join(", ")
    )]
    ItemMismatch {
        missing_from_predictions: Vec<String>,
        missing_from_gold: Vec<String>,
    },
}

/// Which side of the high-agreement split an operation consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Portion {
    Train,
    Test,
    #[default]
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub min_confidence_raw: i64,
    pub min_annotators: usize,
    pub require_unanimity: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub admit_single_above: Option<i64>,
}

/// Complete description of one aggregation run. Echoed verbatim into the
/// manifest so a run can be reproduced from its artifacts alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub annotations: String,
    pub header: String,
    pub output: String,
    pub method: AggregationMethod,
    pub use_secondary: bool,
    pub seed: u64,
    /// Minimum co-annotation evidence before agreement likelihoods are used.
    pub min_count_threshold: u64,
    /// Width of the raw-confidence bins for agreement statistics.
    pub bin_width: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<SplitConfig>,
    /// Which portion feeds agreement statistics (bayes_soft only).
    #[serde(default)]
    pub stats_portion: Portion,
    /// Which portion is aggregated and emitted.
    #[serde(default)]
    pub aggregate_portion: Portion,
    /// Manifest path; defaults to `<output>.manifest.json`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest_out: Option<String>,
}

impl RunConfig {
    pub fn new(
        annotations: impl Into<String>,
        header: impl Into<String>,
        output: impl Into<String>,
        method: AggregationMethod,
    ) -> Self {
        Self {
            annotations: annotations.into(),
            header: header.into(),
            output: output.into(),
            method,
            use_secondary: true,
            seed: 0,
            min_count_threshold: 3,
            bin_width: 1,
            split: None,
            stats_portion: Portion::All,
            aggregate_portion: Portion::All,
            manifest_out: None,
        }
    }

    pub fn manifest_path(&self) -> String {
        self.manifest_out
            .clone()
            .unwrap_or_else(|| format!("{}.manifest.json", self.output))
    }
}

/// Run record written next to the output. The timestamp is the only field
/// that varies between identical runs; it is always the last line, so
/// comparisons can drop it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    pub labels: Vec<String>,
    pub record_count: usize,
    pub item_count: usize,
    pub annotator_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_item_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_item_count: Option<usize>,
    pub emitted_item_count: usize,
    /// bayes_soft only: annotations that fell back to the prior.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotations_prior_fallback: Option<usize>,
    /// bayes_soft only: items with at least one prior-fallback annotation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub items_with_prior_fallback: Option<Vec<String>>,
    pub timestamp_unix_seconds: u64,
}

fn portion_dataset<'a>(
    full: &'a Dataset,
    split: Option<&'a (Dataset, Dataset)>,
    portion: Portion,
) -> &'a Dataset {
    match (split, portion) {
        (None, _) | (Some(_), Portion::All) => full,
        (Some((train, _)), Portion::Train) => train,
        (Some((_, test)), Portion::Test) => test,
    }
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Runs one aggregation end to end: parse and validate, optionally split,
/// accumulate agreement statistics when the method needs them, aggregate
/// each item, and write the soft labels plus a manifest. Everything except
/// the manifest timestamp is deterministic in the config.
pub fn run_pipeline(config: &RunConfig) -> Result<RunManifest, PipelineError> {
    if config.split.is_none()
        && (config.stats_portion != Portion::All || config.aggregate_portion != Portion::All)
    {
        return Err(PipelineError::BadConfig(
            "stats_portion and aggregate_portion need split criteria".to_owned(),
        ));
    }
    let dataset = io::parse_annotations(&config.annotations, &config.header)?;
    let record_count = dataset.records.len();
    let item_count = dataset.items().len();
    let annotator_count = dataset
        .records
        .iter()
        .map(|r| r.annotator_id.as_str())
        .collect::<BTreeSet<_>>()
        .len();

    let split = config.split.as_ref().map(|criteria| {
        io::split_high_agreement(
            &dataset,
            criteria.min_confidence_raw,
            criteria.min_annotators,
            criteria.require_unanimity,
            criteria.admit_single_above,
        )
    });
    let (train_item_count, test_item_count) = match &split {
        Some((train, test)) => (Some(train.items().len()), Some(test.items().len())),
        None => (None, None),
    };

    let is_bayes = matches!(config.method, AggregationMethod::BayesSoft);
    let stats = if is_bayes {
        Some(AgreementStats::accumulate_binned(
            portion_dataset(&dataset, split.as_ref(), config.stats_portion),
            config.bin_width,
        )?)
    } else {
        None
    };

    let aggregation = AggregationConfig {
        method: config.method,
        use_secondary: config.use_secondary,
        rng_seed: config.seed,
        calibration: CalibrationConfig {
            min_count_threshold: config.min_count_threshold,
            class_count: dataset.label_set.len(),
        },
    };

    let target = portion_dataset(&dataset, split.as_ref(), config.aggregate_portion);
    let mut emitted = Vec::new();
    let mut fallback_items = Vec::new();
    let mut fallback_annotations = 0usize;
    for (item_id, records) in target.items() {
        let (distribution, sources) = aggregate_item_with_sources(
            &records,
            &dataset.label_set,
            &dataset.scale,
            stats.as_ref(),
            &aggregation,
        )?;
        let fell_back = sources
            .iter()
            .filter(|s| matches!(s, CalibrationSource::PriorFallback))
            .count();
        if fell_back > 0 {
            fallback_items.push(item_id.to_owned());
        }
        fallback_annotations += fell_back;
        emitted.push(ItemSoftLabel::from_distribution(
            item_id,
            &distribution,
            &dataset.label_set,
            config.method.name(),
        ));
    }
    io::write_soft_labels(&config.output, &emitted)?;

    let manifest = RunManifest {
        tool: "softlabel".to_owned(),
        version: env!("CARGO_PKG_VERSION").to_owned(),
        config: config.clone(),
        labels: dataset.label_set.labels().to_vec(),
        record_count,
        item_count,
        annotator_count,
        train_item_count,
        test_item_count,
        emitted_item_count: emitted.len(),
        annotations_prior_fallback: is_bayes.then_some(fallback_annotations),
        items_with_prior_fallback: is_bayes.then_some(fallback_items),
        timestamp_unix_seconds: unix_now(),
    };
    io::write_json_pretty(config.manifest_path(), &manifest)?;
    Ok(manifest)
}

/// File bytes with the manifest timestamp line removed, for comparing two
/// runs of the same config.
pub fn manifest_comparable_bytes(path: impl AsRef<Path>) -> Result<String, PipelineError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })?;
    Ok(text
        .lines()
        .filter(|line| !line.contains("\"timestamp_unix_seconds\""))
        .collect::<Vec<_>>()
        .join("\n"))
}

/// Scores a soft-label file against a gold map. The label set defaults to
/// the sorted union of prediction and gold labels; pass one to fix the
/// order. Item sets must match exactly; mismatches report the ids.
pub fn evaluate_from_files(
    predictions_path: impl AsRef<Path>,
    gold_path: impl AsRef<Path>,
    num_bins: usize,
    label_order: Option<&LabelSet>,
) -> Result<EvalReport, PipelineError> {
    let items = io::read_soft_labels(predictions_path)?;
    let gold = io::read_gold(gold_path)?;
    let label_set = match label_order {
        Some(set) => set.clone(),
        None => {
            let mut labels = BTreeSet::new();
            for item in &items {
                labels.extend(item.distribution.keys().cloned());
            }
            labels.extend(gold.values().cloned());
            LabelSet::new(labels).map_err(IoError::Model)?
        }
    };
    let distributions = io::soft_labels_to_distributions(&items, &label_set)?;
    let (missing_from_predictions, missing_from_gold) =
        metrics::item_set_difference(&distributions, &gold);
    if !missing_from_predictions.is_empty() || !missing_from_gold.is_empty() {
        return Err(PipelineError::ItemMismatch {
            missing_from_predictions,
            missing_from_gold,
        });
    }
    Ok(metrics::evaluate(&distributions, &gold, &label_set, num_bins)?)
}
