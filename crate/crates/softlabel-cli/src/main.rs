//! Command-line front end for the softlabel library.
//!
//! Exit codes: 0 success, 1 validation failure (bad input data), 2 usage
//! error (bad flags or config values), 3 numerical error.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use softlabel::aggregate::{AggregateError, AggregationMethod};
use softlabel::calibrate::{
    calibrate_record, AgreementStats, CalibrationConfig, CalibrationError, CalibrationSource,
};
use softlabel::dawid_skene::{self, DsError, EmConfig};
use softlabel::io::{self, DatasetHeader, IoError, ItemSoftLabel};
use softlabel::model::{ConfidenceScale, Dataset, Violation};
use softlabel::pipeline::{
    evaluate_from_files, run_pipeline, PipelineError, Portion, RunConfig, SplitConfig,
};
use softlabel::simulate::{simulate, SimConfig, SimError};

#[derive(Parser)]
#[command(
    name = "softlabel",
    version,
    about = "Converts multi-annotator classification annotations into calibrated soft labels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InputArgs {
    /// Annotation file: JSONL by default, CSV when the extension is .csv
    annotations: PathBuf,
    /// Dataset header JSON with the label list and confidence scale
    #[arg(long)]
    header: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Check an annotation file against its header and report every violation
    Validate {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Print the raw-to-unit conversion table of a confidence scale
    ConvertScale {
        /// Scale preset name: likert5, likert10, or linear9
        #[arg(long, conflicts_with = "header")]
        preset: Option<String>,
        /// Read the scale from a dataset header instead
        #[arg(long)]
        header: Option<PathBuf>,
        /// Convert a single raw score instead of printing the whole table
        #[arg(long)]
        raw: Option<i64>,
    },
    /// Partition a dataset into train/test by confidence and agreement
    Split {
        #[command(flatten)]
        input: InputArgs,
        /// Test items need every annotation strictly above this raw score
        #[arg(long)]
        min_confidence_raw: i64,
        /// Test items need at least this many annotations
        #[arg(long, default_value_t = 2)]
        min_annotators: usize,
        /// Test items need unanimous primary labels
        #[arg(long)]
        require_unanimity: bool,
        /// Also admit single-annotation items strictly above this raw score
        /// (the value defaults to 6 when the flag is given bare)
        #[arg(long, num_args = 0..=1, default_missing_value = "6")]
        admit_single_above: Option<i64>,
        /// Where to write the train-side annotations (JSONL)
        #[arg(long)]
        train_out: PathBuf,
        /// Where to write the test-side annotations (JSONL)
        #[arg(long)]
        test_out: PathBuf,
        /// Manifest path; defaults to <test-out>.manifest.json
        #[arg(long)]
        manifest_out: Option<PathBuf>,
    },
    /// Calibrate each annotation's confidence against agreement statistics
    Calibrate {
        #[command(flatten)]
        input: InputArgs,
        /// Where to write calibrated annotations (JSONL)
        #[arg(long)]
        output: PathBuf,
        /// Also write the raw agreement counters as JSON
        #[arg(long)]
        dump_stats: Option<PathBuf>,
        /// Width of the raw-confidence bins for agreement statistics
        #[arg(long, default_value_t = 1)]
        bin_width: i64,
        /// Minimum co-annotation evidence before likelihoods are trusted
        #[arg(long, default_value_t = 3)]
        min_count: u64,
        /// Manifest path; defaults to <output>.manifest.json
        #[arg(long)]
        manifest_out: Option<PathBuf>,
    },
    /// Aggregate annotations into one soft label per item
    Aggregate {
        #[command(flatten)]
        input: InputArgs,
        /// Where to write the soft labels (JSONL)
        #[arg(long)]
        output: PathBuf,
        /// majority_hard, confidence_weighted_hard, label_smoothed,
        /// fixed_soft, confidence_soft, or bayes_soft
        #[arg(long)]
        method: String,
        /// Drop secondary labels before conversion
        #[arg(long)]
        no_secondary: bool,
        /// Smoothing weight for label_smoothed
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        /// Seed for tie-breaking; every item derives its own stream
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Width of the raw-confidence bins for agreement statistics
        #[arg(long, default_value_t = 1)]
        bin_width: i64,
        /// Minimum co-annotation evidence before likelihoods are trusted
        #[arg(long, default_value_t = 3)]
        min_count: u64,
        /// Split the dataset first: test items need every annotation
        /// strictly above this raw score
        #[arg(long)]
        split_min_confidence_raw: Option<i64>,
        /// Split criterion: test items need at least this many annotations
        #[arg(long, default_value_t = 2)]
        split_min_annotators: usize,
        /// Split criterion: test items need unanimous primary labels
        #[arg(long)]
        split_unanimity: bool,
        /// Split criterion: admit single-annotation items above this score
        #[arg(long)]
        split_admit_single_above: Option<i64>,
        /// Portion feeding agreement statistics: train, test, or all
        #[arg(long, default_value = "all", value_parser = parse_portion)]
        stats_portion: Portion,
        /// Portion aggregated and emitted: train, test, or all
        #[arg(long, default_value = "all", value_parser = parse_portion)]
        aggregate_portion: Portion,
        /// Manifest path; defaults to <output>.manifest.json
        #[arg(long)]
        manifest_out: Option<PathBuf>,
    },
    /// Fit the classic annotator-confusion EM model and emit its posteriors
    DawidSkene {
        #[command(flatten)]
        input: InputArgs,
        /// Where to write the posterior soft labels (JSONL)
        #[arg(long)]
        output: PathBuf,
        /// Additive smoothing on prior and confusion counts
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
        /// Iteration cap
        #[arg(long, default_value_t = 100)]
        max_iter: usize,
        /// Convergence threshold on the objective change
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
        /// Also write class priors and confusion matrices as JSON
        #[arg(long)]
        dump_model: Option<PathBuf>,
        /// Manifest path; defaults to <output>.manifest.json
        #[arg(long)]
        manifest_out: Option<PathBuf>,
    },
    /// Score a soft-label file against gold labels
    Evaluate {
        /// Soft-label JSONL, as written by aggregate or dawid-skene
        predictions: PathBuf,
        /// Gold labels: a JSON object of item_id to label, or a simulator
        /// sidecar with a "gold" field
        gold: PathBuf,
        /// Number of equal-width calibration bins
        #[arg(long, default_value_t = 10)]
        bins: usize,
        /// Dataset header fixing the label order (defaults to the sorted
        /// union of labels seen in the inputs)
        #[arg(long)]
        header: Option<PathBuf>,
        /// Also write the report as JSON
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Generate a synthetic dataset with known gold labels
    Simulate {
        /// Simulation config JSON
        #[arg(long)]
        config: PathBuf,
        /// Directory for annotations.jsonl, header.json, sidecar.json, and
        /// manifest.json
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn parse_portion(value: &str) -> Result<Portion, String> {
    match value {
        "train" => Ok(Portion::Train),
        "test" => Ok(Portion::Test),
        "all" => Ok(Portion::All),
        other => Err(format!("unknown portion {other:?} (expected train, test, or all)")),
    }
}

struct CliError {
    code: i32,
    message: String,
    violations: Vec<Violation>,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
            violations: Vec::new(),
        }
    }

    fn validation(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
            violations: Vec::new(),
        }
    }

    fn numerical(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
            violations: Vec::new(),
        }
    }
}

fn from_io(err: IoError) -> CliError {
    match err {
        IoError::Validation { path, violations } => CliError {
            code: 1,
            message: format!("{path}: dataset failed validation with {} violation(s)", violations.len()),
            violations,
        },
        other => CliError::validation(other.to_string()),
    }
}

fn from_calibration(err: CalibrationError) -> CliError {
    match err {
        CalibrationError::BadBinWidth(_) => CliError::usage(err.to_string()),
        _ => CliError::numerical(err.to_string()),
    }
}

fn from_pipeline(err: PipelineError) -> CliError {
    match err {
        PipelineError::Io(io_err) => from_io(io_err),
        PipelineError::BadConfig(_) => CliError::usage(err.to_string()),
        PipelineError::Calibration(c) => from_calibration(c),
        PipelineError::Aggregate(AggregateError::Calibration(c)) => from_calibration(c),
        PipelineError::Aggregate(AggregateError::BadEpsilon(_)) => {
            CliError::usage(err.to_string())
        }
        PipelineError::Metrics(softlabel::metrics::MetricsError::BadBins(_)) => {
            CliError::usage(err.to_string())
        }
        other => CliError::validation(other.to_string()),
    }
}

fn from_ds(err: DsError) -> CliError {
    match err {
        DsError::NonFiniteLikelihood { .. } => CliError::numerical(err.to_string()),
        DsError::BadMaxIterations(_) | DsError::BadTolerance(_) | DsError::BadAlpha(_) => {
            CliError::usage(err.to_string())
        }
        _ => CliError::validation(err.to_string()),
    }
}

fn from_sim(err: SimError) -> CliError {
    CliError::validation(err.to_string())
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn dataset_counts(dataset: &Dataset) -> (usize, usize, usize) {
    let annotators = dataset
        .records
        .iter()
        .map(|r| r.annotator_id.as_str())
        .collect::<BTreeSet<_>>()
        .len();
    (dataset.records.len(), dataset.items().len(), annotators)
}

/// Writes a run manifest next to the primary output (or to an explicit
/// path). `body` must be a JSON object; tool, version, subcommand, and the
/// timestamp are added here.
fn write_manifest(
    explicit: Option<&Path>,
    primary_output: &Path,
    subcommand: &str,
    body: serde_json::Value,
) -> Result<(), CliError> {
    let default_path = PathBuf::from(format!("{}.manifest.json", primary_output.display()));
    let path = explicit.unwrap_or(&default_path);
    let mut object = match body {
        serde_json::Value::Object(map) => map,
        _ => unreachable!("manifest body is always an object"),
    };
    object.insert("tool".into(), json!("softlabel"));
    object.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    object.insert("subcommand".into(), json!(subcommand));
    object.insert("timestamp_unix_seconds".into(), json!(unix_now()));
    io::write_json_pretty(path, &serde_json::Value::Object(object)).map_err(from_io)
}

fn cmd_validate(input: &InputArgs) -> Result<(), CliError> {
    match io::parse_annotations(&input.annotations, &input.header) {
        Ok(dataset) => {
            let (records, items, annotators) = dataset_counts(&dataset);
            println!("ok: {records} records, {items} items, {annotators} annotators");
            Ok(())
        }
        Err(IoError::Validation { path, violations }) => {
            for violation in &violations {
                println!("{violation}");
            }
            Err(CliError::validation(format!(
                "{path}: {} violation(s)",
                violations.len()
            )))
        }
        Err(other) => Err(from_io(other)),
    }
}

fn cmd_convert_scale(
    preset: Option<&str>,
    header: Option<&Path>,
    raw: Option<i64>,
) -> Result<(), CliError> {
    let scale = match (preset, header) {
        (Some(name), None) => {
            ConfidenceScale::preset(name).map_err(|e| CliError::usage(e.to_string()))?
        }
        (None, Some(path)) => {
            let header = io::read_header(path).map_err(from_io)?;
            header
                .to_parts()
                .map_err(|e| CliError::validation(e.to_string()))?
                .1
        }
        _ => return Err(CliError::usage("pass exactly one of --preset or --header")),
    };
    match raw {
        Some(raw) => {
            let unit = scale
                .convert(raw)
                .map_err(|e| CliError::validation(e.to_string()))?;
            println!("{unit}");
        }
        None => {
            let values: Vec<serde_json::Value> = (scale.min_raw()..=scale.max_raw())
                .map(|raw| json!({"raw": raw, "unit": scale.convert(raw).expect("in range")}))
                .collect();
            let table = json!({
                "min": scale.min_raw(),
                "max": scale.max_raw(),
                "values": values,
            });
            println!("{}", serde_json::to_string_pretty(&table).expect("serializes"));
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_split(
    input: &InputArgs,
    min_confidence_raw: i64,
    min_annotators: usize,
    require_unanimity: bool,
    admit_single_above: Option<i64>,
    train_out: &Path,
    test_out: &Path,
    manifest_out: Option<&Path>,
) -> Result<(), CliError> {
    let dataset = io::parse_annotations(&input.annotations, &input.header).map_err(from_io)?;
    let (records, items, annotators) = dataset_counts(&dataset);
    let (train, test) = io::split_high_agreement(
        &dataset,
        min_confidence_raw,
        min_annotators,
        require_unanimity,
        admit_single_above,
    );
    io::write_annotations_jsonl(train_out, &train.records).map_err(from_io)?;
    io::write_annotations_jsonl(test_out, &test.records).map_err(from_io)?;
    write_manifest(
        manifest_out,
        test_out,
        "split",
        json!({
            "config": {
                "annotations": input.annotations.display().to_string(),
                "header": input.header.display().to_string(),
                "min_confidence_raw": min_confidence_raw,
                "min_annotators": min_annotators,
                "require_unanimity": require_unanimity,
                "admit_single_above": admit_single_above,
                "train_out": train_out.display().to_string(),
                "test_out": test_out.display().to_string(),
            },
            "record_count": records,
            "item_count": items,
            "annotator_count": annotators,
            "train_item_count": train.items().len(),
            "train_record_count": train.records.len(),
            "test_item_count": test.items().len(),
            "test_record_count": test.records.len(),
        }),
    )?;
    eprintln!(
        "split {} items into {} train / {} test",
        items,
        train.items().len(),
        test.items().len()
    );
    Ok(())
}

#[derive(Serialize)]
struct CalibratedOut<'a> {
    item_id: &'a str,
    annotator_id: &'a str,
    label: &'a str,
    confidence: i64,
    probability: f64,
    source: CalibrationSource,
}

#[allow(clippy::too_many_arguments)]
fn cmd_calibrate(
    input: &InputArgs,
    output: &Path,
    dump_stats: Option<&Path>,
    bin_width: i64,
    min_count: u64,
    manifest_out: Option<&Path>,
) -> Result<(), CliError> {
    let dataset = io::parse_annotations(&input.annotations, &input.header).map_err(from_io)?;
    let (records, items, annotators) = dataset_counts(&dataset);
    let stats =
        AgreementStats::accumulate_binned(&dataset, bin_width).map_err(from_calibration)?;
    if let Some(path) = dump_stats {
        io::write_json_pretty(path, &stats.to_json()).map_err(from_io)?;
    }
    let config = CalibrationConfig {
        min_count_threshold: min_count,
        class_count: dataset.label_set.len(),
    };
    let file = File::create(output).map_err(|e| {
        CliError::validation(format!("{}: {e}", output.display()))
    })?;
    let mut writer = BufWriter::new(file);
    let mut fallbacks = 0usize;
    for record in &dataset.records {
        let calibrated = calibrate_record(record, &stats, &config, &dataset.scale)
            .map_err(from_calibration)?;
        if calibrated.source == CalibrationSource::PriorFallback {
            fallbacks += 1;
        }
        let row = CalibratedOut {
            item_id: &record.item_id,
            annotator_id: &record.annotator_id,
            label: &record.label,
            confidence: record.confidence,
            probability: calibrated.probability,
            source: calibrated.source,
        };
        let line = serde_json::to_string(&row).expect("serializes");
        writeln!(writer, "{line}")
            .map_err(|e| CliError::validation(format!("{}: {e}", output.display())))?;
    }
    writer
        .flush()
        .map_err(|e| CliError::validation(format!("{}: {e}", output.display())))?;
    write_manifest(
        manifest_out,
        output,
        "calibrate",
        json!({
            "config": {
                "annotations": input.annotations.display().to_string(),
                "header": input.header.display().to_string(),
                "output": output.display().to_string(),
                "dump_stats": dump_stats.map(|p| p.display().to_string()),
                "bin_width": bin_width,
                "min_count": min_count,
            },
            "record_count": records,
            "item_count": items,
            "annotator_count": annotators,
            "annotations_prior_fallback": fallbacks,
        }),
    )?;
    eprintln!(
        "calibrated {records} annotations ({fallbacks} prior fallbacks) into {}",
        output.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_dawid_skene(
    input: &InputArgs,
    output: &Path,
    alpha: f64,
    max_iter: usize,
    tolerance: f64,
    dump_model: Option<&Path>,
    manifest_out: Option<&Path>,
) -> Result<(), CliError> {
    let dataset = io::parse_annotations(&input.annotations, &input.header).map_err(from_io)?;
    let (records, items, annotators) = dataset_counts(&dataset);
    let config = EmConfig {
        max_iterations: max_iter,
        tolerance,
        smoothing_alpha: alpha,
    };
    let model = dawid_skene::fit(&dataset, &config).map_err(from_ds)?;
    let emitted: Vec<ItemSoftLabel> = model
        .soft_labels()
        .iter()
        .map(|(item_id, dist)| {
            ItemSoftLabel::from_distribution(item_id, dist, &model.label_set, "dawid_skene")
        })
        .collect();
    io::write_soft_labels(output, &emitted).map_err(from_io)?;
    if let Some(path) = dump_model {
        io::write_json_pretty(path, &model.to_json()).map_err(from_io)?;
    }
    write_manifest(
        manifest_out,
        output,
        "dawid-skene",
        json!({
            "config": {
                "annotations": input.annotations.display().to_string(),
                "header": input.header.display().to_string(),
                "output": output.display().to_string(),
                "alpha": alpha,
                "max_iter": max_iter,
                "tolerance": tolerance,
                "dump_model": dump_model.map(|p| p.display().to_string()),
            },
            "record_count": records,
            "item_count": items,
            "annotator_count": annotators,
            "iterations": model.iterations(),
            "final_log_likelihood": model.log_likelihood_trace.last(),
        }),
    )?;
    eprintln!(
        "fit {} items in {} iterations, wrote {}",
        items,
        model.iterations(),
        output.display()
    );
    Ok(())
}

fn cmd_evaluate(
    predictions: &Path,
    gold: &Path,
    bins: usize,
    header: Option<&Path>,
    json_out: Option<&Path>,
) -> Result<(), CliError> {
    let label_order = match header {
        Some(path) => {
            let header = io::read_header(path).map_err(from_io)?;
            Some(
                header
                    .to_parts()
                    .map_err(|e| CliError::validation(e.to_string()))?
                    .0,
            )
        }
        None => None,
    };
    let report = evaluate_from_files(predictions, gold, bins, label_order.as_ref())
        .map_err(from_pipeline)?;
    if let Some(path) = json_out {
        io::write_json_pretty(path, &report).map_err(from_io)?;
    }
    print!("{}", report.to_text());
    Ok(())
}

fn cmd_simulate(config_path: &Path, out_dir: &Path) -> Result<(), CliError> {
    let file = File::open(config_path)
        .map_err(|e| CliError::validation(format!("{}: {e}", config_path.display())))?;
    let config: SimConfig = serde_json::from_reader(std::io::BufReader::new(file))
        .map_err(|e| CliError::validation(format!("{}: {e}", config_path.display())))?;
    let output = simulate(&config).map_err(from_sim)?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::validation(format!("{}: {e}", out_dir.display())))?;
    let annotations_path = out_dir.join("annotations.jsonl");
    let header_path = out_dir.join("header.json");
    let sidecar_path = out_dir.join("sidecar.json");
    io::write_annotations_jsonl(&annotations_path, &output.dataset.records).map_err(from_io)?;
    io::write_header(
        &header_path,
        &DatasetHeader {
            labels: config.labels.clone(),
            scale: config.scale.clone(),
        },
    )
    .map_err(from_io)?;
    io::write_json_pretty(
        &sidecar_path,
        &json!({
            "gold": output.gold,
            "planted": output.planted,
        }),
    )
    .map_err(from_io)?;
    let manifest_path = out_dir.join("manifest.json");
    write_manifest(
        Some(&manifest_path),
        &manifest_path,
        "simulate",
        json!({
            "config": config,
            "config_path": config_path.display().to_string(),
            "record_count": output.dataset.records.len(),
            "item_count": output.gold.len(),
            "annotator_count": config.annotators.len(),
        }),
    )?;
    eprintln!(
        "simulated {} items / {} annotations into {}",
        output.gold.len(),
        output.dataset.records.len(),
        out_dir.display()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate { input } => cmd_validate(&input),
        Command::ConvertScale {
            preset,
            header,
            raw,
        } => cmd_convert_scale(preset.as_deref(), header.as_deref(), raw),
        Command::Split {
            input,
            min_confidence_raw,
            min_annotators,
            require_unanimity,
            admit_single_above,
            train_out,
            test_out,
            manifest_out,
        } => cmd_split(
            &input,
            min_confidence_raw,
            min_annotators,
            require_unanimity,
            admit_single_above,
            &train_out,
            &test_out,
            manifest_out.as_deref(),
        ),
        Command::Calibrate {
            input,
            output,
            dump_stats,
            bin_width,
            min_count,
            manifest_out,
        } => cmd_calibrate(
            &input,
            &output,
            dump_stats.as_deref(),
            bin_width,
            min_count,
            manifest_out.as_deref(),
        ),
        Command::Aggregate {
            input,
            output,
            method,
            no_secondary,
            epsilon,
            seed,
            bin_width,
            min_count,
            split_min_confidence_raw,
            split_min_annotators,
            split_unanimity,
            split_admit_single_above,
            stats_portion,
            aggregate_portion,
            manifest_out,
        } => {
            let method = AggregationMethod::from_name(&method, epsilon)
                .ok_or_else(|| CliError::usage(format!("unknown method {method:?}")))?;
            let config = RunConfig {
                annotations: input.annotations.display().to_string(),
                header: input.header.display().to_string(),
                output: output.display().to_string(),
                method,
                use_secondary: !no_secondary,
                seed,
                min_count_threshold: min_count,
                bin_width,
                split: split_min_confidence_raw.map(|min_confidence_raw| SplitConfig {
                    min_confidence_raw,
                    min_annotators: split_min_annotators,
                    require_unanimity: split_unanimity,
                    admit_single_above: split_admit_single_above,
                }),
                stats_portion,
                aggregate_portion,
                manifest_out: manifest_out.map(|p| p.display().to_string()),
            };
            let manifest = run_pipeline(&config).map_err(from_pipeline)?;
            eprintln!(
                "aggregated {} items with {} into {}",
                manifest.emitted_item_count,
                config.method.name(),
                config.output
            );
            Ok(())
        }
        Command::DawidSkene {
            input,
            output,
            alpha,
            max_iter,
            tolerance,
            dump_model,
            manifest_out,
        } => cmd_dawid_skene(
            &input,
            &output,
            alpha,
            max_iter,
            tolerance,
            dump_model.as_deref(),
            manifest_out.as_deref(),
        ),
        Command::Evaluate {
            predictions,
            gold,
            bins,
            header,
            json_out,
        } => cmd_evaluate(
            &predictions,
            &gold,
            bins,
            header.as_deref(),
            json_out.as_deref(),
        ),
        Command::Simulate { config, out_dir } => cmd_simulate(&config, &out_dir),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {}", err.message);
        for violation in &err.violations {
            eprintln!("  {violation}");
        }
        std::process::exit(err.code);
    }
}
