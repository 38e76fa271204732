//! CSV and metadata writers.
//!
//! Numbers use Rust's `Display`, which prints the shortest decimal that
//! round-trips and does not depend on locale. Lines end in `\n`.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::envworld::TrialTrace;
use crate::harness::{ExperimentResult, RunMetadata};
use crate::metrics::{FrontierPoint, MetricRecord};

pub const SUMMARY_HEADER: [&str; 9] = [
    "agent",
    "lambda",
    "stationarity",
    "trial",
    "seed",
    "cum_reward",
    "cum_cost",
    "cases",
    "budget_bin",
];

pub const FRONTIER_HEADER: [&str; 7] = [
    "agent",
    "lambda",
    "mean_cases",
    "se_cases",
    "mean_budget",
    "se_budget",
    "n_trials",
];

fn writer(path: &Path) -> io::Result<csv::Writer<fs::File>> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?)
}

fn finish(mut w: csv::Writer<fs::File>) -> io::Result<()> {
    w.flush()
}

pub fn write_summary(path: &Path, records: &[MetricRecord]) -> io::Result<()> {
    let mut w = writer(path)?;
    w.write_record(SUMMARY_HEADER)?;
    for r in records {
        w.write_record([
            r.agent.clone(),
            r.lambda.to_string(),
            r.stationarity.clone(),
            r.trial.to_string(),
            r.seed.to_string(),
            r.cum_reward.to_string(),
            r.cum_cost.to_string(),
            r.cases.to_string(),
            r.budget_bin.to_string(),
        ])?;
    }
    finish(w)
}

pub fn write_frontier(path: &Path, points: &[FrontierPoint]) -> io::Result<()> {
    let mut w = writer(path)?;
    w.write_record(FRONTIER_HEADER)?;
    for p in points {
        w.write_record([
            p.agent.clone(),
            p.lambda.to_string(),
            p.mean_cases.to_string(),
            p.se_cases.to_string(),
            p.mean_budget.to_string(),
            p.se_budget.to_string(),
            p.n_trials.to_string(),
        ])?;
    }
    finish(w)
}

/// Columns `t, c0.., a0.., reward, cost, r_star`.
pub fn write_trace(path: &Path, trace: &TrialTrace<f64>) -> io::Result<()> {
    let mut w = writer(path)?;
    let (c, k) = trace
        .rows
        .first()
        .map_or((0, 0), |r| (r.context.len(), r.action.len()));
    let mut header = vec!["t".to_string()];
    header.extend((0..c).map(|i| format!("c{i}")));
    header.extend((0..k).map(|i| format!("a{i}")));
    header.extend(["reward", "cost", "r_star"].map(String::from));
    w.write_record(&header)?;
    for row in &trace.rows {
        let mut rec = vec![row.t.to_string()];
        rec.extend(row.context.iter().map(f64::to_string));
        rec.extend(row.action.arms().iter().map(usize::to_string));
        rec.push(row.reward.to_string());
        rec.push(row.cost.to_string());
        rec.push(row.r_star.to_string());
        w.write_record(&rec)?;
    }
    finish(w)
}

/// `traces/<agent>_<lambda>_<trial>.csv` under `dir`.
pub fn trace_path(dir: &Path, agent: &str, lambda: f64, trial: usize) -> PathBuf {
    dir.join("traces").join(format!("{agent}_{lambda}_{trial}.csv"))
}

pub fn write_traces(dir: &Path, result: &ExperimentResult) -> io::Result<usize> {
    let mut n = 0;
    for cell in &result.cells {
        if let Some(trace) = &cell.trace {
            let r = &cell.record;
            let path = trace_path(dir, &r.agent, r.lambda, r.trial);
            if n == 0 {
                fs::create_dir_all(path.parent().expect("traces dir"))?;
            }
            write_trace(&path, trace)?;
            n += 1;
        }
    }
    Ok(n)
}

#[derive(Debug, Serialize)]
pub struct MetadataFile {
    pub version: &'static str,
    pub config_hash: String,
    // TOML integers are signed 64-bit, so seeds are written as strings.
    pub base_seed: String,
    pub env_seeds: Vec<String>,
    pub wall_time_secs: f64,
    pub threads: usize,
    pub cells: usize,
    /// Cumulative rewards are min-max normalized over the whole run, not per agent.
    pub reward_normalization: &'static str,
    /// Every agent and λ of a trial index faces the same environment seed.
    pub common_random_numbers: bool,
}

impl MetadataFile {
    pub fn new(config_hash: u64, meta: &RunMetadata, cells: usize) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION"),
            config_hash: format!("{config_hash:016x}"),
            base_seed: meta.base_seed.to_string(),
            env_seeds: meta.env_seeds.iter().map(u64::to_string).collect(),
            wall_time_secs: meta.wall_time.as_secs_f64(),
            threads: meta.threads,
            cells,
            reward_normalization: "global",
            common_random_numbers: true,
        }
    }
}

pub fn write_metadata(path: &Path, meta: &MetadataFile) -> io::Result<()> {
    let text = toml::to_string(meta).map_err(io::Error::other)?;
    fs::write(path, text)
}
