//! End-to-end pipeline: simulate → degrade → perceive → fuse → evaluate.
//!
//! Each (scenario, sequence, condition) cell is evaluated independently.
//! Random streams are keyed by the cell and channel labels, so results do
//! not depend on evaluation order or thread count.

mod config;
mod report;

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::augment::{apply_condition, Condition, Frame};
use crate::danger::{danger_series, decide_series, DangerParams, Decision};
use crate::error::{Error, Result};
use crate::fusion::fuse_series;
use crate::kinematics::{
    derive_kinematics, kinematics_from_distances, load_ground_truth, save_ground_truth,
    simulate_scenario, GroundTruthSequence, ScenarioConfig,
};
use crate::metrics::{decision_metrics, rate_of, recognition_rate, rmse};
use crate::perception::{load_detections, series_from_detections, synth_channel, ChannelSeries};
use crate::seed::derive_seed;

pub use config::{ExperimentConfig, DEFAULT_MASTER_SEED, DEFAULT_SEQUENCES};
pub use report::{
    load_results, read_results, AggregateRecord, BoxplotRecord, EvaluationReport,
    SequenceRecord, AGGREGATE_FILE, BOXPLOT_FILE, METRICS, RESULTS_FILE,
};

/// Where channel measurements come from.
#[derive(Debug, Clone, Default)]
pub enum Source {
    /// Calibrated stochastic detector.
    #[default]
    Synthetic,
    /// Detection files `<scenario>_<seq>_<condition>.jsonl` in a directory,
    /// with optional ground truth `<scenario>_<seq>_truth.csv` alongside.
    Ingest(PathBuf),
}

pub fn sequence_stem(scenario: &ScenarioConfig, sequence: usize) -> String {
    format!("{}_{:02}", scenario.scenario, sequence)
}

/// Ground truth for one sequence; jitter (if enabled) is seeded per sequence.
pub fn simulate_sequence(
    cfg: &ExperimentConfig,
    scenario: &ScenarioConfig,
    sequence: usize,
) -> Result<GroundTruthSequence> {
    let mut sc = scenario.clone();
    sc.rng_seed = derive_seed(
        cfg.master_seed,
        &[scenario.scenario.as_str(), &sequence.to_string(), "truth"],
    );
    simulate_scenario(&sc)
}

/// Writes `<scenario>_<seq>_truth.csv` for every configured sequence.
pub fn write_ground_truth_files(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for sc in &cfg.scenarios {
        for seq in 0..cfg.sequences_per_scenario {
            let path = dir.join(format!("{}_truth.csv", sequence_stem(sc, seq)));
            save_ground_truth(&simulate_sequence(cfg, sc, seq)?, &path)?;
            written.push(path);
        }
    }
    Ok(written)
}

struct Scored {
    recognition_rate: f64,
    rmse: f64,
    accuracy: f64,
    f1: f64,
}

fn score(
    distances: &[f64],
    recognition_rate: f64,
    frame_rate: f64,
    cfg: &ExperimentConfig,
    truth_g: &[f64],
    truth_decisions: &[Decision],
) -> Result<Scored> {
    let p: &DangerParams = &cfg.danger_params;
    let states = kinematics_from_distances(distances, frame_rate, cfg.smoothing_window)?;
    let g = danger_series(&states, p);
    let m = decision_metrics(&decide_series(&g, p), truth_decisions)?;
    Ok(Scored {
        recognition_rate,
        rmse: rmse(&g, truth_g)?,
        accuracy: m.accuracy,
        f1: m.f1,
    })
}

/// Evaluates one cell and returns one record per channel, then per fusion.
fn evaluate_cell(
    cfg: &ExperimentConfig,
    source: &Source,
    scenario: &ScenarioConfig,
    sequence: usize,
    condition: Condition,
) -> Result<Vec<SequenceRecord>> {
    let stem = sequence_stem(scenario, sequence);
    let truth = match source {
        Source::Ingest(dir) if dir.join(format!("{stem}_truth.csv")).exists() => {
            load_ground_truth(&dir.join(format!("{stem}_truth.csv")))?
        }
        _ => simulate_sequence(cfg, scenario, sequence)?,
    };
    let truth_states = derive_kinematics(&truth, cfg.smoothing_window)?;
    let truth_g = danger_series(&truth_states, &cfg.danger_params);
    let truth_decisions = decide_series(&truth_g, &cfg.danger_params);
    let true_d = truth.distances();
    let n = truth.len();

    let seq_label = sequence.to_string();
    let cond_label = condition.to_string();
    let channels: Vec<ChannelSeries> = match source {
        Source::Synthetic => cfg
            .channels
            .iter()
            .map(|&ch| {
                let prof = cfg
                    .degradation
                    .lookup(ch.camera, ch.model, scenario.scenario, condition)?;
                let seed = derive_seed(
                    cfg.master_seed,
                    &[scenario.scenario.as_str(), &seq_label, &cond_label, &ch.to_string()],
                );
                Ok(synth_channel(ch, &true_d, &prof, &cfg.camera, cfg.imputation_policy, seed))
            })
            .collect::<Result<_>>()?,
        Source::Ingest(dir) => {
            let path = dir.join(format!("{stem}_{cond_label}.jsonl"));
            let records = load_detections(&path, n)?;
            cfg.channels
                .iter()
                .map(|&ch| series_from_detections(&records, ch, &cfg.camera, n, cfg.imputation_policy))
                .collect::<Result<_>>()?
        }
    };

    let record = |channel: String, s: Scored| SequenceRecord {
        scenario: scenario.scenario.to_string(),
        condition: cond_label.clone(),
        channel,
        sequence,
        recognition_rate: s.recognition_rate,
        rmse: s.rmse,
        accuracy: s.accuracy,
        f1: s.f1,
    };

    let mut out = Vec::with_capacity(channels.len() + cfg.fusion_methods.len());
    for cs in &channels {
        let s = score(
            &cs.values(),
            recognition_rate(cs)?,
            truth.frame_rate,
            cfg,
            &truth_g,
            &truth_decisions,
        )?;
        out.push(record(cs.channel.to_string(), s));
    }

    let supported = rate_of((0..n).map(|i| channels.iter().any(|c| c.measurements[i].is_real())))?;
    for &method in &cfg.fusion_methods {
        let fused = fuse_series(&channels, method, cfg.camera.max_distance_m)?;
        let s = score(
            &fused.distances,
            supported,
            truth.frame_rate,
            cfg,
            &truth_g,
            &truth_decisions,
        )?;
        out.push(record(method.to_string(), s));
    }
    Ok(out)
}

/// Runs every cell and assembles the report, without touching the disk.
pub fn evaluate(cfg: &ExperimentConfig, source: &Source) -> Result<EvaluationReport> {
    cfg.validate()?;
    if matches!(source, Source::Synthetic) {
        cfg.check_profiles()?;
    }

    let cells: Vec<(usize, usize, usize)> = (0..cfg.scenarios.len())
        .flat_map(|s| {
            (0..cfg.conditions.len())
                .flat_map(move |c| (0..cfg.sequences_per_scenario).map(move |q| (s, c, q)))
        })
        .collect();

    let per_cell = cells
        .par_iter()
        .map(|&(s, c, q)| evaluate_cell(cfg, source, &cfg.scenarios[s], q, cfg.conditions[c]))
        .collect::<Result<Vec<_>>>()?;

    // rows grouped as scenario → condition → series → sequence
    let series_count = cfg.channels.len() + cfg.fusion_methods.len();
    let mut records = Vec::with_capacity(per_cell.len() * series_count);
    for group in per_cell.chunks(cfg.sequences_per_scenario) {
        for k in 0..series_count {
            records.extend(group.iter().map(|cell| cell[k].clone()));
        }
    }
    EvaluationReport::from_records(records)
}

/// [`evaluate`] followed by writing the CSV reports to `cfg.output_dir`.
pub fn run_experiment(cfg: &ExperimentConfig, source: &Source) -> Result<EvaluationReport> {
    let report = evaluate(cfg, source)?;
    report.write(&cfg.output_dir)?;
    Ok(report)
}

#[derive(Debug, Default)]
pub struct AugmentSummary {
    pub written: usize,
    pub failures: Vec<(PathBuf, Error)>,
}

fn png_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .is_some_and(|ext| ext.eq_ignore_ascii_case("png"))
        })
        .collect();
    files.sort();
    Ok(files)
}

/// Filters every PNG in `input_dir` into `output_dir` under the same name.
///
/// Frames are numbered in file-name order and frame `i` uses the seed derived
/// from `(seed, i)`. Unfiltered frames are copied byte for byte. A frame that
/// fails is recorded and the rest are still processed.
pub fn augment_frames(
    input_dir: &Path,
    condition: Condition,
    seed: u64,
    output_dir: &Path,
) -> Result<AugmentSummary> {
    let files = png_files(input_dir)?;
    std::fs::create_dir_all(output_dir).map_err(|e| Error::io(output_dir, e))?;

    let results: Vec<(PathBuf, Result<()>)> = files
        .par_iter()
        .enumerate()
        .map(|(i, src)| {
            let dst = output_dir.join(src.file_name().expect("read_dir entries have names"));
            let res = Frame::load_png(src).and_then(|frame| {
                if condition == Condition::Original {
                    std::fs::copy(src, &dst).map(|_| ()).map_err(|e| Error::io(&dst, e))
                } else {
                    let frame_seed = derive_seed(seed, &["frame", &i.to_string()]);
                    apply_condition(&frame, condition, frame_seed).save_png(&dst)
                }
            });
            (src.clone(), res)
        })
        .collect();

    let mut summary = AugmentSummary::default();
    for (path, res) in results {
        match res {
            Ok(()) => summary.written += 1,
            Err(e) => summary.failures.push((path, e)),
        }
    }
    Ok(summary)
}
