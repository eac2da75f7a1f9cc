//! Acceptance checks for the whole toolchain, one numbered criterion per
//! test. Each test prints a single `criterion N PASS/FAIL` line (visible with
//! `--nocapture`) and asserts the documented runtime budget where one exists.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::tempdir;

use softlabel::aggregate::{aggregate_item, AggregationConfig, AggregationMethod};
use softlabel::calibrate::{
    calibrate_record, prior_probability, AgreementStats, CalibrationConfig, CalibrationSource,
};
use softlabel::dawid_skene::{fit, EmConfig};
use softlabel::io::{write_annotations_jsonl, write_json_pretty, DatasetHeader};
use softlabel::metrics::{ece, evaluate, macro_f1};
use softlabel::model::{
    AnnotationRecord, ConfidenceScale, Dataset, LabelDistribution, LabelSet, ScaleSpec,
};
use softlabel::pipeline::{manifest_comparable_bytes, run_pipeline, RunConfig};
use softlabel::simulate::{
    simulate, AnnotationsPerItem, AnnotatorProfile, ConfusionStyle, SimConfig,
};

fn criterion<F: FnOnce()>(number: u32, what: &str, budget: Option<Duration>, body: F) {
    let started = Instant::now();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(()) => {
            let elapsed = started.elapsed();
            if let Some(budget) = budget {
                assert!(
                    elapsed <= budget,
                    "criterion {number} exceeded its {budget:?} budget: took {elapsed:?}"
                );
            }
            println!("criterion {number} PASS: {what} ({elapsed:.2?})");
        }
        Err(cause) => {
            println!("criterion {number} FAIL: {what}");
            resume_unwind(cause);
        }
    }
}

fn record(
    item: &str,
    annotator: &str,
    label: &str,
    confidence: i64,
    secondary: Option<&str>,
) -> AnnotationRecord {
    AnnotationRecord {
        item_id: item.to_owned(),
        annotator_id: annotator.to_owned(),
        label: label.to_owned(),
        confidence,
        secondary_label: secondary.map(str::to_owned),
    }
}

fn likert5_spec() -> ScaleSpec {
    ScaleSpec {
        min: 1,
        max: 5,
        preset: Some("likert5".to_owned()),
        table: None,
    }
}

/// The two-annotator worked example: a confidence of 0.7 with a secondary
/// label, a confidence of 0.85 without one, and their merge. All three
/// distributions must come out of the command line exactly (to the emitted
/// six decimals).
#[test]
fn criterion_1_two_annotator_merge_golden() {
    criterion(
        1,
        "CLI confidence_soft reproduces the worked two-annotator example",
        Some(Duration::from_secs(1)),
        || {
            let dir = tempdir().unwrap();
            let header = dir.path().join("header.json");
            fs::write(
                &header,
                "{\"labels\":[\"A\",\"B\",\"C\",\"D\"],\"scale\":{\"min\":1,\"max\":10,\"preset\":\"likert10\"}}",
            )
            .unwrap();
            let ann = dir.path().join("ann.jsonl");
            fs::write(
                &ann,
                concat!(
                    "{\"item_id\":\"both\",\"annotator_id\":\"m1\",\"label\":\"A\",\"confidence\":4,\"secondary_label\":\"B\"}\n",
                    "{\"item_id\":\"both\",\"annotator_id\":\"m2\",\"label\":\"A\",\"confidence\":7}\n",
                    "{\"item_id\":\"only_first\",\"annotator_id\":\"m1\",\"label\":\"A\",\"confidence\":4,\"secondary_label\":\"B\"}\n",
                    "{\"item_id\":\"only_second\",\"annotator_id\":\"m2\",\"label\":\"A\",\"confidence\":7}\n",
                ),
            )
            .unwrap();
            let out = dir.path().join("soft.jsonl");
            let output = Command::new(env!("CARGO_BIN_EXE_softlabel"))
                .args([
                    "aggregate",
                    ann.to_str().unwrap(),
                    "--header",
                    header.to_str().unwrap(),
                    "--output",
                    out.to_str().unwrap(),
                    "--method",
                    "confidence_soft",
                ])
                .output()
                .unwrap();
            assert!(
                output.status.success(),
                "{}",
                String::from_utf8_lossy(&output.stderr)
            );
            let mut emitted: BTreeMap<String, Vec<f64>> = BTreeMap::new();
            for line in fs::read_to_string(&out).unwrap().lines() {
                let parsed: serde_json::Value = serde_json::from_str(line).unwrap();
                let dist = ["A", "B", "C", "D"]
                    .iter()
                    .map(|l| parsed["distribution"][l].as_f64().unwrap())
                    .collect();
                emitted.insert(parsed["item_id"].as_str().unwrap().to_owned(), dist);
            }
            let expected: [(&str, [f64; 4]); 3] = [
                ("only_first", [0.7, 0.3, 0.0, 0.0]),
                ("only_second", [0.85, 0.05, 0.05, 0.05]),
                ("both", [0.775, 0.175, 0.025, 0.025]),
            ];
            for (item, want) in expected {
                let got = &emitted[item];
                for (g, w) in got.iter().zip(want) {
                    assert!((g - w).abs() < 1e-9, "{item}: got {got:?}, want {want:?}");
                }
            }
        },
    );
}

/// The prior formula must agree with the unsimplified Bayes form it reduces
/// from: uniform class prior 1/C, likelihood c for the stated label being
/// right and 1 - c for it being wrong.
#[test]
fn criterion_2_prior_matches_unsimplified_bayes() {
    criterion(
        2,
        "closed-form prior equals explicit Bayes on a 1000-point grid",
        Some(Duration::from_secs(1)),
        || {
            let mut checked = 0;
            for class_count in 2..=11usize {
                for step in 1..=100 {
                    let c = step as f64 / 100.0;
                    let p_correct = 1.0 / class_count as f64;
                    let p_wrong = (class_count as f64 - 1.0) / class_count as f64;
                    let numerator = c * p_correct;
                    let denominator = numerator + (1.0 - c) * p_wrong;
                    let expected = numerator / denominator;
                    let got = prior_probability(c, class_count).unwrap();
                    assert!(
                        (got - expected).abs() <= 1e-12,
                        "c={c} C={class_count}: got {got}, oracle {expected}"
                    );
                    checked += 1;
                }
            }
            assert_eq!(checked, 1000);
        },
    );
}

/// Brute-force oracle for the agreement counters (key-major enumeration, set
/// semantics over peer labels) and for the calibrated probability (explicit
/// joint-probability arithmetic), on small random datasets.
#[test]
fn criterion_3_counters_and_calibration_match_brute_force() {
    criterion(
        3,
        "agreement counters and calibration match exhaustive enumeration",
        Some(Duration::from_secs(5)),
        || {
            const LIKERT5: [f64; 5] = [0.6, 0.7, 0.8, 0.9, 1.0];
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_acce);
            for round in 0..200 {
                let class_count = rng.gen_range(2..=4usize);
                let labels: Vec<&str> = ["A", "B", "C", "D"][..class_count].to_vec();
                let item_count = rng.gen_range(1..=4usize);
                let annotator_count = rng.gen_range(2..=3usize);
                let mut records = Vec::new();
                for item in 0..item_count {
                    for annotator in 0..annotator_count {
                        if !rng.gen_bool(0.8) {
                            continue;
                        }
                        let primary = rng.gen_range(0..class_count);
                        let secondary = if class_count > 1 && rng.gen_bool(0.25) {
                            let mut other = rng.gen_range(0..class_count - 1);
                            if other >= primary {
                                other += 1;
                            }
                            Some(labels[other])
                        } else {
                            None
                        };
                        records.push(record(
                            &format!("i{item}"),
                            &format!("m{annotator}"),
                            labels[primary],
                            rng.gen_range(1..=5),
                            secondary,
                        ));
                    }
                }
                if records.is_empty() {
                    continue;
                }
                let dataset = Dataset::new(
                    LabelSet::new(labels.clone()).unwrap(),
                    ConfidenceScale::likert5(),
                    records,
                );
                let bin_width = rng.gen_range(1..=2i64);
                let stats = AgreementStats::accumulate_binned(&dataset, bin_width).unwrap();
                let bin_of = |raw: i64| 1 + (raw - 1).div_euclid(bin_width) * bin_width;

                // Counter oracle: walk key-by-key instead of record-by-record.
                let items = dataset.items();
                let mut oracle = serde_json::Map::new();
                for annotator in 0..annotator_count {
                    let annotator = format!("m{annotator}");
                    for label in &labels {
                        for bin in [1, 2, 3, 4, 5].map(bin_of) {
                            let mut co_agree = 0u64;
                            let mut peer_label = 0u64;
                            let mut peer_not_label = 0u64;
                            let mut solo_label = 0u64;
                            for records in items.values() {
                                if records.len() < 2 {
                                    continue;
                                }
                                let Some(own) =
                                    records.iter().find(|r| r.annotator_id == annotator)
                                else {
                                    continue;
                                };
                                if bin_of(own.confidence) != bin {
                                    continue;
                                }
                                let peer_gave = records.iter().any(|r| {
                                    r.annotator_id != annotator && r.label == *label
                                });
                                if peer_gave {
                                    peer_label += 1;
                                } else {
                                    peer_not_label += 1;
                                }
                                if own.label == *label {
                                    if peer_gave {
                                        co_agree += 1;
                                    } else {
                                        solo_label += 1;
                                    }
                                }
                            }
                            if peer_label + peer_not_label > 0 {
                                oracle.insert(
                                    format!("{annotator}|{label}|{bin}"),
                                    serde_json::json!({
                                        "n_co_agree": co_agree,
                                        "n_peer_label": peer_label,
                                        "n_peer_not_label": peer_not_label,
                                        "n_solo_label": solo_label,
                                    }),
                                );
                            }
                        }
                    }
                }
                assert_eq!(
                    stats.to_json(),
                    serde_json::Value::Object(oracle.clone()),
                    "round {round}: counters diverge"
                );

                // Calibration oracle: explicit joint probabilities.
                let min_count = if rng.gen_bool(0.5) { 1 } else { 3 };
                let config = CalibrationConfig {
                    min_count_threshold: min_count,
                    class_count,
                };
                for r in &dataset.records {
                    let unit = LIKERT5[(r.confidence - 1) as usize];
                    let p_correct = 1.0 / class_count as f64;
                    let joint_right = unit * p_correct;
                    let prior = joint_right / (joint_right + (1.0 - unit) * (1.0 - p_correct));
                    let key = format!("{}|{}|{}", r.annotator_id, r.label, bin_of(r.confidence));
                    let counts = oracle.get(&key);
                    let get = |field: &str| {
                        counts.map_or(0, |c| c[field].as_u64().unwrap())
                    };
                    let (co, peer, not_peer, solo) = (
                        get("n_co_agree"),
                        get("n_peer_label"),
                        get("n_peer_not_label"),
                        get("n_solo_label"),
                    );
                    let usable = peer > 0
                        && not_peer > 0
                        && peer + not_peer >= min_count
                        && (co > 0 || solo > 0);
                    let expected = if usable {
                        let p_agree = co as f64 / peer as f64;
                        let p_disagree = solo as f64 / not_peer as f64;
                        if p_agree == p_disagree || prior == 1.0 {
                            prior
                        } else {
                            let joint_correct = p_agree * prior;
                            let joint_incorrect = p_disagree * (1.0 - prior);
                            joint_correct / (joint_correct + joint_incorrect)
                        }
                    } else {
                        prior
                    };
                    let got = calibrate_record(r, &stats, &config, &dataset.scale).unwrap();
                    assert!(
                        (got.probability - expected).abs() <= 1e-12,
                        "round {round} {key}: got {}, oracle {expected}",
                        got.probability
                    );
                    let expected_source = if usable {
                        CalibrationSource::Posterior
                    } else {
                        CalibrationSource::PriorFallback
                    };
                    assert_eq!(got.source, expected_source, "round {round} {key}");
                }
            }
        },
    );
}

/// Five annotators whose stated confidences are systematically off; shared
/// by criteria 4 and 5.
fn biased_panel(secondary_rate: f64, seed: u64) -> SimConfig {
    let accuracies = [0.95, 0.85, 0.75, 0.65, 0.6];
    let biases = [0.0, -0.2, -0.2, 0.0, 0.2];
    SimConfig {
        num_items: 10_000,
        labels: vec!["a".into(), "b".into(), "c".into(), "d".into()],
        class_prior: vec![0.25; 4],
        scale: likert5_spec(),
        annotators: accuracies
            .iter()
            .zip(biases)
            .enumerate()
            .map(|(i, (&accuracy, bias))| AnnotatorProfile {
                annotator_id: format!("m{i}"),
                accuracy,
                confidence_bias: bias,
                secondary_rate,
                confusion_style: ConfusionStyle::UniformError,
            })
            .collect(),
        annotations_per_item: AnnotationsPerItem::Count(5),
        seed,
        secondary_below_raw: None,
    }
}

/// Count-weighted mean over (annotator, bin) groups of the absolute gap
/// between the group's mean stated probability and its observed correctness.
fn grouped_gap(groups: &BTreeMap<(String, i64), (f64, u64, u64)>) -> f64 {
    let mut weighted = 0.0;
    let mut total = 0u64;
    for (sum_prob, n, n_correct) in groups.values() {
        let mean_prob = sum_prob / *n as f64;
        let correctness = *n_correct as f64 / *n as f64;
        weighted += *n as f64 * (mean_prob - correctness).abs();
        total += n;
    }
    weighted / total as f64
}

#[test]
fn criterion_4_calibration_narrows_confidence_gaps() {
    criterion(
        4,
        "agreement calibration cuts the stated-vs-observed gap by >= 30%",
        Some(Duration::from_secs(30)),
        || {
            let mut reductions = Vec::new();
            for seed in [101, 202, 303, 404, 505] {
                let sim = simulate(&biased_panel(0.0, seed)).unwrap();
                let stats = AgreementStats::accumulate(&sim.dataset);
                let config = CalibrationConfig::new(4);
                let mut raw_groups: BTreeMap<(String, i64), (f64, u64, u64)> = BTreeMap::new();
                let mut calibrated_groups: BTreeMap<(String, i64), (f64, u64, u64)> =
                    BTreeMap::new();
                for r in &sim.dataset.records {
                    let stated = sim.dataset.scale.convert(r.confidence).unwrap();
                    let calibrated =
                        calibrate_record(r, &stats, &config, &sim.dataset.scale).unwrap();
                    let correct = u64::from(sim.gold[&r.item_id] == r.label);
                    let key = (r.annotator_id.clone(), stats.bin_of(r.confidence));
                    for (groups, prob) in [
                        (&mut raw_groups, stated),
                        (&mut calibrated_groups, calibrated.probability),
                    ] {
                        let entry = groups.entry(key.clone()).or_insert((0.0, 0, 0));
                        entry.0 += prob;
                        entry.1 += 1;
                        entry.2 += correct;
                    }
                }
                let raw_gap = grouped_gap(&raw_groups);
                let calibrated_gap = grouped_gap(&calibrated_groups);
                assert!(
                    calibrated_gap < raw_gap,
                    "seed {seed}: calibration widened the gap ({calibrated_gap} vs {raw_gap})"
                );
                reductions.push(1.0 - calibrated_gap / raw_gap);
            }
            let mean = reductions.iter().sum::<f64>() / reductions.len() as f64;
            assert!(
                mean >= 0.30,
                "mean gap reduction {mean:.3} below 0.30 ({reductions:?})"
            );
        },
    );
}

#[test]
fn criterion_5_secondary_labels_lower_cross_entropy() {
    criterion(
        5,
        "using secondary labels strictly lowers cross-entropy, 5/5 seeds",
        Some(Duration::from_secs(30)),
        || {
            for seed in [11, 22, 33, 44, 55] {
                let sim = simulate(&biased_panel(0.8, seed)).unwrap();
                let mut cross_entropy = [0.0f64; 2];
                for (use_secondary, slot) in [(true, 0), (false, 1)] {
                    let config = AggregationConfig {
                        method: AggregationMethod::ConfidenceSoft,
                        use_secondary,
                        rng_seed: 0,
                        calibration: CalibrationConfig::new(4),
                    };
                    let mut total = 0.0;
                    let items = sim.dataset.items();
                    for (item_id, records) in &items {
                        let dist = aggregate_item(
                            records,
                            &sim.dataset.label_set,
                            &sim.dataset.scale,
                            None,
                            &config,
                        )
                        .unwrap();
                        let gold = sim.dataset.label_set.require(&sim.gold[*item_id]).unwrap();
                        total -= dist.probs()[gold].ln();
                    }
                    cross_entropy[slot] = total / items.len() as f64;
                }
                assert!(
                    cross_entropy[0] < cross_entropy[1],
                    "seed {seed}: with secondaries {} not below without {}",
                    cross_entropy[0],
                    cross_entropy[1]
                );
            }
        },
    );
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(k: usize, xs: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(xs.clone());
            return;
        }
        for i in 0..k {
            go(k - 1, xs, out);
            if k.is_multiple_of(2) {
                xs.swap(i, k - 1);
            } else {
                xs.swap(0, k - 1);
            }
        }
    }
    let mut xs: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    go(n, &mut xs, &mut out);
    out
}

/// Planted confusion matrix with a strong diagonal and unevenly split
/// off-diagonal mass; rows sum to 1 exactly.
fn planted_matrix(annotator: usize, class_count: usize) -> Vec<Vec<f64>> {
    (0..class_count)
        .map(|k| {
            let diagonal = 0.7 + 0.05 * ((annotator + k) % 5) as f64;
            let others: Vec<usize> = (0..class_count).filter(|&l| l != k).collect();
            let weights: Vec<f64> = others
                .iter()
                .enumerate()
                .map(|(j, _)| (1 + (j + annotator) % 3) as f64)
                .collect();
            let weight_sum: f64 = weights.iter().sum();
            let mut row = vec![0.0; class_count];
            row[k] = diagonal;
            let mut used = diagonal;
            for (j, (&l, &w)) in others.iter().zip(&weights).enumerate() {
                row[l] = if j + 1 == others.len() {
                    1.0 - used
                } else {
                    (1.0 - diagonal) * w / weight_sum
                };
                used += row[l];
            }
            row
        })
        .collect()
}

#[test]
fn criterion_6_dawid_skene_recovery_and_sparse_collapse() {
    criterion(
        6,
        "EM recovers planted confusion under dense overlap and collapses when sparse",
        Some(Duration::from_secs(60)),
        || {
            // Dense, well-conditioned: planted matrices must be recovered.
            let class_count = 4;
            let sim = simulate(&SimConfig {
                num_items: 5000,
                labels: vec!["a".into(), "b".into(), "c".into(), "d".into()],
                class_prior: vec![0.25; 4],
                scale: likert5_spec(),
                annotators: (0..5)
                    .map(|i| AnnotatorProfile {
                        annotator_id: format!("m{i}"),
                        accuracy: 0.8,
                        confidence_bias: 0.0,
                        secondary_rate: 0.0,
                        confusion_style: ConfusionStyle::PlantedMatrix(planted_matrix(
                            i,
                            class_count,
                        )),
                    })
                    .collect(),
                annotations_per_item: AnnotationsPerItem::Count(5),
                seed: 4242,
                secondary_below_raw: None,
            })
            .unwrap();
            let model = fit(
                &sim.dataset,
                &EmConfig {
                    max_iterations: 100,
                    tolerance: 1e-6,
                    smoothing_alpha: 0.01,
                },
            )
            .unwrap();
            for window in model.log_likelihood_trace.windows(2) {
                assert!(
                    window[1] >= window[0] - 1e-9,
                    "objective decreased: {} -> {}",
                    window[0],
                    window[1]
                );
            }
            let planted: BTreeMap<&str, &Vec<Vec<f64>>> = sim
                .planted
                .annotators
                .iter()
                .map(|a| (a.annotator_id.as_str(), &a.effective_confusion))
                .collect();
            let best_mae = permutations(class_count)
                .iter()
                .map(|sigma| {
                    let mut error = 0.0;
                    let mut cells = 0;
                    for (annotator, recovered) in &model.confusion {
                        let truth = planted[annotator.as_str()];
                        for k in 0..class_count {
                            for l in 0..class_count {
                                error += (recovered[sigma[k]][l] - truth[k][l]).abs();
                                cells += 1;
                            }
                        }
                    }
                    error / cells as f64
                })
                .fold(f64::INFINITY, f64::min);
            assert!(
                best_mae <= 0.05,
                "confusion recovery error {best_mae:.4} above 0.05"
            );

            // Sparse, many-class, unsmoothed: posteriors collapse.
            let labels: Vec<String> = (0..10).map(|i| format!("l{i}")).collect();
            let sparse = simulate(&SimConfig {
                num_items: 4000,
                labels: labels.clone(),
                class_prior: vec![0.40, 0.20, 0.12, 0.08, 0.06, 0.04, 0.03, 0.03, 0.02, 0.02],
                scale: likert5_spec(),
                annotators: [0.35, 0.37, 0.39, 0.41, 0.43, 0.45]
                    .iter()
                    .enumerate()
                    .map(|(i, &accuracy)| AnnotatorProfile {
                        annotator_id: format!("m{i}"),
                        accuracy,
                        confidence_bias: 0.0,
                        secondary_rate: 0.0,
                        confusion_style: ConfusionStyle::UniformError,
                    })
                    .collect(),
                annotations_per_item: AnnotationsPerItem::Fraction(1.3),
                seed: 777,
                secondary_below_raw: None,
            })
            .unwrap();
            let collapsed = fit(
                &sparse.dataset,
                &EmConfig {
                    max_iterations: 100,
                    tolerance: 1e-6,
                    smoothing_alpha: 0.0,
                },
            )
            .unwrap();
            for window in collapsed.log_likelihood_trace.windows(2) {
                assert!(window[1] >= window[0] - 1e-9);
            }
            let predictions: BTreeMap<String, String> = collapsed
                .posteriors
                .iter()
                .map(|(item, dist)| {
                    (
                        item.clone(),
                        sparse.dataset.label_set.label(dist.argmax()).to_owned(),
                    )
                })
                .collect();
            let (score, _) =
                macro_f1(&predictions, &sparse.gold, &sparse.dataset.label_set).unwrap();
            assert!(
                score < 0.3,
                "sparse unsmoothed fit scored macro-F1 {score:.3}, expected collapse below 0.3"
            );
        },
    );
}

#[test]
fn criterion_7_metric_fixtures() {
    criterion(
        7,
        "macro-F1 and calibration error reproduce hand-computed fixtures",
        Some(Duration::from_secs(1)),
        || {
            let hard = |pairs: &[(&str, &str)]| -> BTreeMap<String, String> {
                pairs
                    .iter()
                    .map(|&(k, v)| (k.to_owned(), v.to_owned()))
                    .collect()
            };
            let dist = |probs: Vec<f64>| LabelDistribution::new(probs).unwrap();

            // Perfect predictions: macro-F1 1, calibration error 0.
            let set = LabelSet::new(vec!["A", "B"]).unwrap();
            let mut dists = BTreeMap::new();
            let mut gold = BTreeMap::new();
            for i in 0..6 {
                let id = format!("i{i}");
                dists.insert(id.clone(), LabelDistribution::one_hot(i % 2, 2));
                gold.insert(id, set.label(i % 2).to_owned());
            }
            let report = evaluate(&dists, &gold, &set, 10).unwrap();
            assert!((report.macro_f1 - 1.0).abs() < 1e-9);
            assert!(report.ece.abs() < 1e-9);

            // Fully confident and always wrong: macro-F1 0, calibration error 1.
            let mut dists = BTreeMap::new();
            let mut gold = BTreeMap::new();
            for i in 0..5 {
                let id = format!("i{i}");
                dists.insert(id.clone(), LabelDistribution::one_hot(0, 2));
                gold.insert(id, "B".to_owned());
            }
            let report = evaluate(&dists, &gold, &set, 10).unwrap();
            assert!(report.macro_f1.abs() < 1e-9);
            assert!((report.ece - 1.0).abs() < 1e-9);

            // Binary fixture: per-class F1 2/3 and 4/5, macro 11/15.
            let gold = hard(&[("i1", "A"), ("i2", "A"), ("i3", "B"), ("i4", "B")]);
            let pred = hard(&[("i1", "A"), ("i2", "B"), ("i3", "B"), ("i4", "B")]);
            let (score, per_class) = macro_f1(&pred, &gold, &set).unwrap();
            assert!((per_class["A"] - 2.0 / 3.0).abs() < 1e-9);
            assert!((per_class["B"] - 0.8).abs() < 1e-9);
            assert!((score - 11.0 / 15.0).abs() < 1e-9);

            // A class the label set declares but nobody uses still counts.
            let set3 = LabelSet::new(vec!["A", "B", "C"]).unwrap();
            let gold = hard(&[("i1", "A"), ("i2", "B")]);
            let (score, per_class) = macro_f1(&gold.clone(), &gold, &set3).unwrap();
            assert_eq!(per_class["C"], 0.0);
            assert!((score - 2.0 / 3.0).abs() < 1e-9);

            // Ten items at confidence 0.75 with 60% accuracy in one bin: 0.15.
            let set4 = LabelSet::new(vec!["A", "B", "C", "D"]).unwrap();
            let mut dists = BTreeMap::new();
            let mut gold = BTreeMap::new();
            for i in 0..10 {
                let id = format!("i{i}");
                dists.insert(
                    id.clone(),
                    dist(vec![0.75, 0.25 / 3.0, 0.25 / 3.0, 0.25 / 3.0]),
                );
                gold.insert(id, if i < 6 { "A".to_owned() } else { "B".to_owned() });
            }
            let (score, bins) = ece(&dists, &gold, &set4, 10).unwrap();
            assert!((score - 0.15).abs() < 1e-9);
            assert_eq!(bins.iter().filter(|b| b.count > 0).count(), 1);

            // Bins are right-inclusive: 0.8 lands in (0.7, 0.8].
            let dists: BTreeMap<String, LabelDistribution> =
                [("i1".to_owned(), dist(vec![0.8, 0.2]))].into();
            let gold = hard(&[("i1", "A")]);
            let (_, bins) = ece(&dists, &gold, &set, 10).unwrap();
            assert_eq!(bins[7].count, 1);
            assert_eq!(bins[8].count, 0);
        },
    );
}

#[test]
fn criterion_8_pipeline_reruns_are_byte_identical() {
    criterion(
        8,
        "two identical pipeline runs produce byte-identical files",
        Some(Duration::from_secs(5)),
        || {
            let dir = tempdir().unwrap();
            let sim = simulate(&SimConfig {
                num_items: 300,
                labels: vec!["a".into(), "b".into(), "c".into()],
                class_prior: vec![0.5, 0.3, 0.2],
                scale: likert5_spec(),
                annotators: [0.9, 0.75, 0.65]
                    .iter()
                    .enumerate()
                    .map(|(i, &accuracy)| AnnotatorProfile {
                        annotator_id: format!("m{i}"),
                        accuracy,
                        confidence_bias: -0.1,
                        secondary_rate: 0.3,
                        confusion_style: ConfusionStyle::UniformError,
                    })
                    .collect(),
                annotations_per_item: AnnotationsPerItem::Count(3),
                seed: 7,
                secondary_below_raw: None,
            })
            .unwrap();
            let annotations = dir.path().join("ann.jsonl");
            let header_path = dir.path().join("header.json");
            write_annotations_jsonl(&annotations, &sim.dataset.records).unwrap();
            write_json_pretty(
                &header_path,
                &DatasetHeader {
                    labels: sim.dataset.label_set.labels().to_vec(),
                    scale: likert5_spec(),
                },
            )
            .unwrap();
            let output = dir.path().join("soft.jsonl");
            let mut config = RunConfig::new(
                annotations.to_str().unwrap(),
                header_path.to_str().unwrap(),
                output.to_str().unwrap(),
                AggregationMethod::BayesSoft,
            );
            config.seed = 99;

            run_pipeline(&config).unwrap();
            let first_output = fs::read(&output).unwrap();
            let first_manifest = manifest_comparable_bytes(config.manifest_path()).unwrap();
            run_pipeline(&config).unwrap();
            let second_output = fs::read(&output).unwrap();
            let second_manifest = manifest_comparable_bytes(config.manifest_path()).unwrap();

            assert_eq!(first_output, second_output, "soft label bytes differ");
            assert_eq!(first_manifest, second_manifest, "manifest content differs");
            assert!(!first_output.is_empty());
        },
    );
}

#[test]
fn criterion_9_scale_preset_tables_are_exact() {
    criterion(
        9,
        "every preset confidence mapping matches its published table",
        None,
        || {
            let cases: [(&str, &[(i64, f64)]); 3] = [
                (
                    "likert5",
                    &[(1, 0.6), (2, 0.7), (3, 0.8), (4, 0.9), (5, 1.0)],
                ),
                (
                    "likert10",
                    &[
                        (1, 0.6),
                        (2, 0.6),
                        (3, 0.65),
                        (4, 0.7),
                        (5, 0.75),
                        (6, 0.8),
                        (7, 0.85),
                        (8, 0.9),
                        (9, 0.95),
                        (10, 1.0),
                    ],
                ),
                (
                    "linear9",
                    &[
                        (1, 0.1),
                        (2, 0.2125),
                        (3, 0.325),
                        (4, 0.4375),
                        (5, 0.55),
                        (6, 0.6625),
                        (7, 0.775),
                        (8, 0.8875),
                        (9, 1.0),
                    ],
                ),
            ];
            for (preset, table) in cases {
                let scale = ConfidenceScale::preset(preset).unwrap();
                assert_eq!(scale.min_raw(), table[0].0, "{preset} min");
                assert_eq!(scale.max_raw(), table[table.len() - 1].0, "{preset} max");
                for &(raw, unit) in table {
                    assert_eq!(
                        scale.convert(raw).unwrap(),
                        unit,
                        "{preset} raw {raw} must map to exactly {unit}"
                    );
                }
            }
        },
    );
}
