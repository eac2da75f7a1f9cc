//! File formats and the high-agreement dataset split.
//!
//! Annotations travel as JSONL (one record per line) or CSV with the same
//! columns; the label vocabulary and confidence scale travel in a small JSON
//! header. Aggregated soft labels are emitted as JSONL with six-decimal
//! probabilities.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    AnnotationRecord, ConfidenceScale, Dataset, LabelDistribution, LabelSet, ModelError,
    ScaleSpec, Violation,
};

/// Slack allowed when reading emitted distributions back: six-decimal
/// rounding can push a row's sum off 1 by up to C * 5e-7.
const READBACK_SUM_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{path}: dataset failed validation with {} violation(s)", violations.len())]
    Validation {
        path: String,
        violations: Vec<Violation>,
    },
    #[error("{path}: {message}")]
    BadContent { path: String, message: String },
}

fn file_err(path: &Path, source: std::io::Error) -> IoError {
    IoError::File {
        path: path.display().to_string(),
        source,
    }
}

/// The JSON header describing a dataset: label vocabulary plus scale spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub labels: Vec<String>,
    pub scale: ScaleSpec,
}

impl DatasetHeader {
    pub fn to_parts(&self) -> Result<(LabelSet, ConfidenceScale), ModelError> {
        Ok((LabelSet::new(self.labels.clone())?, self.scale.to_scale()?))
    }
}

pub fn read_header(path: impl AsRef<Path>) -> Result<DatasetHeader, IoError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| file_err(path, e))?;
    let header: DatasetHeader =
        serde_json::from_reader(BufReader::new(file)).map_err(|e| IoError::Parse {
            path: path.display().to_string(),
            line: e.line(),
            message: e.to_string(),
        })?;
    // Surface bad labels or scales at read time, not first use.
    header.to_parts()?;
    Ok(header)
}

/// Writes any serializable value as pretty-printed JSON with a trailing
/// newline. Key order is deterministic (maps are sorted).
pub fn write_json_pretty(path: impl AsRef<Path>, value: &impl Serialize) -> Result<(), IoError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| file_err(path, e))?;
    let mut writer = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut writer, value).map_err(|e| IoError::BadContent {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    writer.write_all(b"\n").map_err(|e| file_err(path, e))?;
    writer.flush().map_err(|e| file_err(path, e))
}

pub fn write_header(path: impl AsRef<Path>, header: &DatasetHeader) -> Result<(), IoError> {
    write_json_pretty(path, header)
}

/// Parses JSONL annotations. Malformed lines are reported with their
/// 1-based line number; blank lines are skipped.
pub fn parse_annotations_jsonl<R: BufRead>(
    reader: R,
    path_label: &str,
) -> Result<Vec<AnnotationRecord>, IoError> {
    let mut records = Vec::new();
    for (index, line) in reader.lines().enumerate() {
        let line_number = index + 1;
        let line = line.map_err(|e| IoError::File {
            path: path_label.to_owned(),
            source: e,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: AnnotationRecord =
            serde_json::from_str(&line).map_err(|e| IoError::Parse {
                path: path_label.to_owned(),
                line: line_number,
                message: e.to_string(),
            })?;
        records.push(record);
    }
    Ok(records)
}

#[derive(Deserialize)]
struct CsvRow {
    item_id: String,
    annotator_id: String,
    label: String,
    confidence: i64,
    #[serde(default)]
    secondary_label: String,
}

/// Parses CSV annotations with columns item_id, annotator_id, label,
/// confidence, secondary_label. An empty secondary column means absent.
pub fn parse_annotations_csv<R: Read>(
    reader: R,
    path_label: &str,
) -> Result<Vec<AnnotationRecord>, IoError> {
    let mut csv_reader = csv::Reader::from_reader(reader);
    let mut records = Vec::new();
    for row in csv_reader.deserialize::<CsvRow>() {
        let row = row.map_err(|e| IoError::Parse {
            path: path_label.to_owned(),
            line: e
                .position()
                .map_or(0, |position| position.line() as usize),
            message: e.to_string(),
        })?;
        records.push(AnnotationRecord {
            item_id: row.item_id,
            annotator_id: row.annotator_id,
            label: row.label,
            confidence: row.confidence,
            secondary_label: if row.secondary_label.is_empty() {
                None
            } else {
                Some(row.secondary_label)
            },
        });
    }
    Ok(records)
}

/// Reads an annotation file, dispatching on extension: `.csv` is parsed as
/// CSV, everything else as JSONL.
pub fn read_annotation_records(path: impl AsRef<Path>) -> Result<Vec<AnnotationRecord>, IoError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| file_err(path, e))?;
    let label = path.display().to_string();
    if path.extension().is_some_and(|ext| ext == "csv") {
        parse_annotations_csv(BufReader::new(file), &label)
    } else {
        parse_annotations_jsonl(BufReader::new(file), &label)
    }
}

/// Reads annotations and header, builds the dataset, and runs full
/// validation. All violations are aggregated into a single error.
pub fn parse_annotations(
    annotations_path: impl AsRef<Path>,
    header_path: impl AsRef<Path>,
) -> Result<Dataset, IoError> {
    let header = read_header(header_path)?;
    let (label_set, scale) = header.to_parts()?;
    let records = read_annotation_records(annotations_path.as_ref())?;
    let dataset = Dataset::new(label_set, scale, records);
    let violations = dataset.validate();
    if violations.is_empty() {
        Ok(dataset)
    } else {
        Err(IoError::Validation {
            path: annotations_path.as_ref().display().to_string(),
            violations,
        })
    }
}

pub fn write_annotations_jsonl(
    path: impl AsRef<Path>,
    records: &[AnnotationRecord],
) -> Result<(), IoError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| file_err(path, e))?;
    let mut writer = BufWriter::new(file);
    for record in records {
        let line = serde_json::to_string(record).map_err(|e| IoError::BadContent {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        writeln!(writer, "{line}").map_err(|e| file_err(path, e))?;
    }
    writer.flush().map_err(|e| file_err(path, e))
}

/// One aggregated item as emitted to the output JSONL.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemSoftLabel {
    pub item_id: String,
    pub distribution: BTreeMap<String, f64>,
    pub method: String,
    pub hard_argmax: String,
}

impl ItemSoftLabel {
    /// Prepares a distribution for emission: probabilities are rounded to
    /// six decimals and the hard label is the argmax of the ROUNDED values,
    /// so the emitted hard label always agrees with the emitted numbers.
    /// Exact ties after rounding break by label-set order.
    pub fn from_distribution(
        item_id: &str,
        distribution: &LabelDistribution,
        label_set: &LabelSet,
        method: &str,
    ) -> Self {
        let rounded = distribution.rounded(6);
        let mut argmax = 0;
        for (i, &p) in rounded.iter().enumerate() {
            if p > rounded[argmax] {
                argmax = i;
            }
        }
        let map = label_set
            .labels()
            .iter()
            .cloned()
            .zip(rounded.iter().copied())
            .collect();
        Self {
            item_id: item_id.to_owned(),
            distribution: map,
            method: method.to_owned(),
            hard_argmax: label_set.label(argmax).to_owned(),
        }
    }

    /// Rebuilds a validated distribution in label-set order. Labels absent
    /// from the map carry zero mass; six-decimal rounding slack is tolerated
    /// and normalized away.
    pub fn to_distribution(&self, label_set: &LabelSet) -> Result<LabelDistribution, IoError> {
        for key in self.distribution.keys() {
            if !label_set.contains(key) {
                return Err(IoError::BadContent {
                    path: self.item_id.clone(),
                    message: format!("distribution has unknown label {key:?}"),
                });
            }
        }
        let mut probs: Vec<f64> = label_set
            .labels()
            .iter()
            .map(|label| self.distribution.get(label).copied().unwrap_or(0.0))
            .collect();
        let sum: f64 = probs.iter().sum();
        if !sum.is_finite() || (sum - 1.0).abs() > READBACK_SUM_TOLERANCE {
            return Err(IoError::BadContent {
                path: self.item_id.clone(),
                message: format!("distribution sums to {sum}, not 1"),
            });
        }
        for p in &mut probs {
            *p /= sum;
        }
        LabelDistribution::new(probs).map_err(IoError::Model)
    }
}

pub fn write_soft_labels(
    path: impl AsRef<Path>,
    items: &[ItemSoftLabel],
) -> Result<(), IoError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| file_err(path, e))?;
    let mut writer = BufWriter::new(file);
    for item in items {
        let line = serde_json::to_string(item).map_err(|e| IoError::BadContent {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        writeln!(writer, "{line}").map_err(|e| file_err(path, e))?;
    }
    writer.flush().map_err(|e| file_err(path, e))
}

pub fn read_soft_labels(path: impl AsRef<Path>) -> Result<Vec<ItemSoftLabel>, IoError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| file_err(path, e))?;
    let mut items = Vec::new();
    for (index, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| file_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let item: ItemSoftLabel = serde_json::from_str(&line).map_err(|e| IoError::Parse {
            path: path.display().to_string(),
            line: index + 1,
            message: e.to_string(),
        })?;
        items.push(item);
    }
    Ok(items)
}

/// Converts read-back soft labels into per-item distributions, rejecting
/// duplicate item ids.
pub fn soft_labels_to_distributions(
    items: &[ItemSoftLabel],
    label_set: &LabelSet,
) -> Result<BTreeMap<String, LabelDistribution>, IoError> {
    let mut map = BTreeMap::new();
    for item in items {
        let distribution = item.to_distribution(label_set)?;
        if map.insert(item.item_id.clone(), distribution).is_some() {
            return Err(IoError::BadContent {
                path: item.item_id.clone(),
                message: "duplicate item id in soft label file".to_owned(),
            });
        }
    }
    Ok(map)
}

/// Reads a gold label map: either a bare JSON object `{item_id: label}` or
/// an object with a `gold` field holding one (the simulator sidecar shape).
pub fn read_gold(path: impl AsRef<Path>) -> Result<BTreeMap<String, String>, IoError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| file_err(path, e))?;
    let value: serde_json::Value =
        serde_json::from_reader(BufReader::new(file)).map_err(|e| IoError::Parse {
            path: path.display().to_string(),
            line: e.line(),
            message: e.to_string(),
        })?;
    let object = value
        .get("gold")
        .filter(|v| v.is_object())
        .or(Some(&value))
        .filter(|v| v.is_object())
        .ok_or_else(|| IoError::BadContent {
            path: path.display().to_string(),
            message: "expected a JSON object of item_id to label".to_owned(),
        })?;
    let mut gold = BTreeMap::new();
    for (item_id, label) in object.as_object().expect("checked object") {
        let label = label.as_str().ok_or_else(|| IoError::BadContent {
            path: path.display().to_string(),
            message: format!("gold label for {item_id:?} is not a string"),
        })?;
        gold.insert(item_id.clone(), label.to_owned());
    }
    Ok(gold)
}

/// Splits a dataset into (train, test) by annotation confidence and
/// agreement. An item goes to the test set when every annotation has raw
/// confidence strictly above `min_confidence_raw`, it has at least
/// `min_annotators` annotations, and (when `require_unanimity`) all primary
/// labels agree. Independently, a single-annotation item is admitted to the
/// test set when `admit_single_above` is set and its confidence is strictly
/// above that threshold. Everything else is train; the two sides partition
/// the input exactly.
pub fn split_high_agreement(
    dataset: &Dataset,
    min_confidence_raw: i64,
    min_annotators: usize,
    require_unanimity: bool,
    admit_single_above: Option<i64>,
) -> (Dataset, Dataset) {
    let mut test_items = BTreeSet::new();
    for (item_id, records) in dataset.items() {
        let all_confident = records
            .iter()
            .all(|r| r.confidence > min_confidence_raw);
        let enough = records.len() >= min_annotators;
        let unanimous =
            !require_unanimity || records.iter().all(|r| r.label == records[0].label);
        let qualifies = all_confident && enough && unanimous;
        let single_admitted = admit_single_above.is_some_and(|threshold| {
            records.len() == 1 && records[0].confidence > threshold
        });
        if qualifies || single_admitted {
            test_items.insert(item_id.to_owned());
        }
    }
    let (test_records, train_records): (Vec<_>, Vec<_>) = dataset
        .records
        .iter()
        .cloned()
        .partition(|r| test_items.contains(&r.item_id));
    (
        Dataset::new(dataset.label_set.clone(), dataset.scale.clone(), train_records),
        Dataset::new(dataset.label_set.clone(), dataset.scale.clone(), test_records),
    )
}
