use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{aggregate, boxplot_stats, FiveNumber};

pub const RESULTS_FILE: &str = "results.csv";
pub const AGGREGATE_FILE: &str = "results_agg.csv";
pub const BOXPLOT_FILE: &str = "results_f1_boxplot.csv";

const RESULTS_HEADER: &str = "scenario,condition,channel,sequence,recognition_rate,rmse,accuracy,f1";
const AGGREGATE_HEADER: &str = "scenario,condition,channel,metric,mean,std";
const BOXPLOT_HEADER: &str = "condition,channel,min,q1,median,q3,max";

/// Metrics of one channel or fusion on one sequence under one condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceRecord {
    pub scenario: String,
    pub condition: String,
    /// Channel label (`drone_Y8`) or fusion method (`w_fusion`).
    pub channel: String,
    pub sequence: usize,
    pub recognition_rate: f64,
    pub rmse: f64,
    pub accuracy: f64,
    pub f1: f64,
}

impl SequenceRecord {
    pub fn metric(&self, name: &str) -> Option<f64> {
        match name {
            "recognition_rate" => Some(self.recognition_rate),
            "rmse" => Some(self.rmse),
            "accuracy" => Some(self.accuracy),
            "f1" => Some(self.f1),
            _ => None,
        }
    }
}

pub const METRICS: [&str; 4] = ["recognition_rate", "rmse", "accuracy", "f1"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRecord {
    pub scenario: String,
    pub condition: String,
    pub channel: String,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxplotRecord {
    pub condition: String,
    pub channel: String,
    pub f1: FiveNumber,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvaluationReport {
    pub records: Vec<SequenceRecord>,
    pub aggregates: Vec<AggregateRecord>,
    pub boxplots: Vec<BoxplotRecord>,
}

/// Keeps first-appearance order of keys while grouping.
fn group_by<K: Clone + Ord, T>(items: &[T], key: impl Fn(&T) -> K) -> Vec<(K, Vec<&T>)> {
    let mut order: Vec<K> = Vec::new();
    let mut groups: BTreeMap<K, Vec<&T>> = BTreeMap::new();
    for item in items {
        let k = key(item);
        groups
            .entry(k.clone())
            .or_insert_with(|| {
                order.push(k);
                Vec::new()
            })
            .push(item);
    }
    order
        .into_iter()
        .map(|k| {
            let g = groups.remove(&k).unwrap_or_default();
            (k, g)
        })
        .collect()
}

impl EvaluationReport {
    /// Derives per-group aggregates and F1 boxplots from per-sequence records.
    ///
    /// Aggregates group by (scenario, condition, channel); boxplots pool both
    /// scenarios per (condition, channel).
    pub fn from_records(records: Vec<SequenceRecord>) -> Result<Self> {
        let mut aggregates = Vec::new();
        for ((scenario, condition, channel), group) in group_by(&records, |r| {
            (r.scenario.clone(), r.condition.clone(), r.channel.clone())
        }) {
            for metric in METRICS {
                let values: Vec<f64> = group.iter().filter_map(|r| r.metric(metric)).collect();
                let (mean, std) = aggregate(&values)?;
                aggregates.push(AggregateRecord {
                    scenario: scenario.clone(),
                    condition: condition.clone(),
                    channel: channel.clone(),
                    metric: metric.to_string(),
                    mean,
                    std,
                });
            }
        }

        let mut boxplots = Vec::new();
        for ((condition, channel), group) in
            group_by(&records, |r| (r.condition.clone(), r.channel.clone()))
        {
            let f1: Vec<f64> = group.iter().map(|r| r.f1).collect();
            boxplots.push(BoxplotRecord {
                condition,
                channel,
                f1: boxplot_stats(&f1)?,
            });
        }

        Ok(EvaluationReport {
            records,
            aggregates,
            boxplots,
        })
    }

    pub fn aggregate_for(
        &self,
        scenario: &str,
        condition: &str,
        channel: &str,
        metric: &str,
    ) -> Option<&AggregateRecord> {
        self.aggregates.iter().find(|a| {
            a.scenario == scenario && a.condition == condition && a.channel == channel && a.metric == metric
        })
    }

    /// Per-sequence values keep full round-trip precision so the summaries
    /// can be rebuilt from this file alone.
    pub fn results_csv(&self) -> String {
        let mut out = format!("{RESULTS_HEADER}\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.scenario, r.condition, r.channel, r.sequence, r.recognition_rate, r.rmse, r.accuracy, r.f1
            );
        }
        out
    }

    pub fn aggregate_csv(&self) -> String {
        let mut out = format!("{AGGREGATE_HEADER}\n");
        for a in &self.aggregates {
            let _ = writeln!(
                out,
                "{},{},{},{},{:.6},{:.6}",
                a.scenario, a.condition, a.channel, a.metric, a.mean, a.std
            );
        }
        out
    }

    pub fn boxplot_csv(&self) -> String {
        let mut out = format!("{BOXPLOT_HEADER}\n");
        for b in &self.boxplots {
            let f = &b.f1;
            let _ = writeln!(
                out,
                "{},{},{:.6},{:.6},{:.6},{:.6},{:.6}",
                b.condition, b.channel, f.min, f.q1, f.median, f.q3, f.max
            );
        }
        out
    }

    /// Writes the three CSV files into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let files = [
            (RESULTS_FILE, self.results_csv()),
            (AGGREGATE_FILE, self.aggregate_csv()),
            (BOXPLOT_FILE, self.boxplot_csv()),
        ];
        let mut written = Vec::new();
        for (name, body) in files {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }

    /// Plain-text table of mean accuracy and F1 per (scenario, condition, channel).
    pub fn summary_table(&self) -> String {
        let mut out = format!(
            "{:<3} {:<16} {:<10} {:>8} {:>8} {:>8} {:>8}\n",
            "sc", "condition", "channel", "recog%", "rmse", "acc%", "f1"
        );
        for ((scenario, condition, channel), _) in group_by(&self.aggregates, |a| {
            (a.scenario.clone(), a.condition.clone(), a.channel.clone())
        }) {
            let get = |m: &str| {
                self.aggregate_for(&scenario, &condition, &channel, m)
                    .map_or(f64::NAN, |a| a.mean)
            };
            let _ = writeln!(
                out,
                "{:<3} {:<16} {:<10} {:>8.2} {:>8.3} {:>8.2} {:>8.3}",
                scenario,
                condition,
                channel,
                get("recognition_rate"),
                get("rmse"),
                get("accuracy"),
                get("f1")
            );
        }
        out
    }
}

pub fn read_results<R: Read>(reader: R, origin: &Path) -> Result<Vec<SequenceRecord>> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers()?.iter().collect::<Vec<_>>().join(",");
    if header != RESULTS_HEADER {
        return Err(Error::Parse {
            path: origin.to_path_buf(),
            line: 1,
            message: format!("expected header `{RESULTS_HEADER}`, got `{header}`"),
        });
    }
    r.deserialize()
        .enumerate()
        .map(|(i, rec)| {
            rec.map_err(|e| Error::Parse {
                path: origin.to_path_buf(),
                line: i + 2,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn load_results(path: &Path) -> Result<Vec<SequenceRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_results(std::io::BufReader::new(file), path)
}
