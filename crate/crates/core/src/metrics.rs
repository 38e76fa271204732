//! Post-processing of trial outcomes into the cases and budget metrics and
//! the cases-vs-budget pareto frontier.
//!
//! Cumulative rewards are min-max normalized over the whole batch and
//! quantile binned; the cases estimate is `e^{-m}` where `m` is the
//! normalized midpoint of the record's bin. Cumulative costs are quantile
//! binned into the budget metric.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Number of quantile bins for both metrics.
pub const QUANTILE_BINS: usize = 10;

/// Assigns each value a bin in `0..q` by rank: `floor(rank·q/n)`.
///
/// Tied values share the rank of the first of them, so an all-equal input
/// lands entirely in bin 0.
pub fn quantile_bin<T: Scalar>(values: &[T], q: usize) -> Result<Vec<usize>> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if q == 0 {
        return Err(Error::InvalidInput("need at least one bin".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite value".into()));
    }
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite"));
    let mut bins = vec![0; n];
    let mut rank = 0;
    for (pos, &idx) in order.iter().enumerate() {
        if pos > 0 && values[idx] != values[order[pos - 1]] {
            rank = pos;
        }
        bins[idx] = rank * q / n;
    }
    Ok(bins)
}

/// `e^{-x}` for a normalized reward `x ∈ [0, 1]`.
pub fn cases_metric<T: Scalar>(normalized: T) -> Result<T> {
    if !(normalized >= T::zero() && normalized <= T::one()) {
        return Err(Error::OutOfRange {
            value: normalized.as_f64(),
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok((-normalized).exp())
}

/// Mean and standard error (sample standard deviation over `√n`).
pub fn mean_se<T: Scalar>(samples: &[T]) -> Result<(T, T)> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = T::of(samples.len() as f64);
    let mean = samples.iter().copied().sum::<T>() / n;
    if samples.len() == 1 {
        return Ok((mean, T::zero()));
    }
    let ss: T = samples.iter().map(|&x| (x - mean) * (x - mean)).sum();
    let sd = (ss / (n - T::one())).sqrt();
    Ok((mean, sd / n.sqrt()))
}

/// Points not strictly dominated when both coordinates are minimized,
/// in input order.
pub fn pareto_filter<T: Scalar>(points: &[(T, T)]) -> Vec<(T, T)> {
    pareto_indices(points).into_iter().map(|i| points[i]).collect()
}

/// Indices of the non-dominated points, ascending.
pub fn pareto_indices<T: Scalar>(points: &[(T, T)]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (points[a], points[b]);
        pa.0.partial_cmp(&pb.0)
            .expect("finite")
            .then(pa.1.partial_cmp(&pb.1).expect("finite"))
    });
    let mut keep = vec![false; points.len()];
    // smallest y among points with strictly smaller x
    let mut left_min = T::infinity();
    let mut g = 0;
    while g < order.len() {
        let x = points[order[g]].0;
        let mut end = g;
        while end < order.len() && points[order[end]].0 == x {
            end += 1;
        }
        // sorted by y within the group, so the first holds the group minimum
        let group_min = points[order[g]].1;
        for &i in &order[g..end] {
            let y = points[i].1;
            keep[i] = y == group_min && y < left_min;
        }
        left_min = left_min.min(group_min);
        g = end;
    }
    (0..points.len()).filter(|&i| keep[i]).collect()
}

/// Outcome of one (agent, λ, trial) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRecord {
    pub agent: String,
    pub lambda: f64,
    pub stationarity: String,
    pub trial: usize,
    pub seed: u64,
    pub cum_reward: f64,
    pub cum_cost: f64,
    /// Filled by [`assign_metrics`].
    pub cases: f64,
    /// Filled by [`assign_metrics`].
    pub budget_bin: usize,
}

/// Computes `cases` and `budget_bin` for every record, normalizing over
/// the whole batch.
pub fn assign_metrics(records: &mut [MetricRecord], q: usize) -> Result<()> {
    if records.is_empty() {
        return Ok(());
    }
    let rewards: Vec<f64> = records.iter().map(|r| r.cum_reward).collect();
    let lo = rewards.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = rewards.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let normalized: Vec<f64> = rewards
        .iter()
        .map(|&r| if hi > lo { (r - lo) / (hi - lo) } else { 0.0 })
        .collect();
    let reward_bins = quantile_bin(&normalized, q)?;
    let costs: Vec<f64> = records.iter().map(|r| r.cum_cost).collect();
    let cost_bins = quantile_bin(&costs, q)?;
    for ((rec, rb), cb) in records.iter_mut().zip(reward_bins).zip(cost_bins) {
        let midpoint = (rb as f64 + 0.5) / q as f64;
        rec.cases = cases_metric(midpoint)?;
        rec.budget_bin = cb;
    }
    Ok(())
}

/// One (agent, λ) point of the cases-vs-budget frontier.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierPoint {
    pub agent: String,
    pub lambda: f64,
    pub mean_cases: f64,
    pub se_cases: f64,
    pub mean_budget: f64,
    pub se_budget: f64,
    pub n_trials: usize,
}

impl FrontierPoint {
    pub fn objectives(&self) -> (f64, f64) {
        (self.mean_cases, self.mean_budget)
    }
}

/// Bins the batch and aggregates mean ± se per (agent, λ).
///
/// Agents appear in first-seen order, λ in grid order; groups without
/// records are omitted.
pub fn build_frontier(records: &[MetricRecord], lambda_grid: &[f64]) -> Result<Vec<FrontierPoint>> {
    if let Some(r) = records.iter().find(|r| !lambda_grid.contains(&r.lambda)) {
        return Err(Error::InvalidInput(format!(
            "record lambda {} not in grid",
            r.lambda
        )));
    }
    let mut binned = records.to_vec();
    assign_metrics(&mut binned, QUANTILE_BINS)?;

    let mut agents: Vec<&str> = Vec::new();
    for r in records {
        if !agents.contains(&r.agent.as_str()) {
            agents.push(&r.agent);
        }
    }
    let mut points = Vec::new();
    for agent in agents {
        for &lambda in lambda_grid {
            let group: Vec<&MetricRecord> = binned
                .iter()
                .filter(|r| r.agent == agent && r.lambda == lambda)
                .collect();
            if group.is_empty() {
                continue;
            }
            let cases: Vec<f64> = group.iter().map(|r| r.cases).collect();
            let budget: Vec<f64> = group.iter().map(|r| r.budget_bin as f64).collect();
            let (mean_cases, se_cases) = mean_se(&cases)?;
            let (mean_budget, se_budget) = mean_se(&budget)?;
            points.push(FrontierPoint {
                agent: agent.to_string(),
                lambda,
                mean_cases,
                se_cases,
                mean_budget,
                se_budget,
                n_trials: group.len(),
            });
        }
    }
    Ok(points)
}
