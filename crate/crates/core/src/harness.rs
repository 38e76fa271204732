//! Seeded trial execution and the agent × λ × trial experiment grid.
//!
//! Every cell derives its own seeds from the plan's base seed with
//! [`derive_seed`], so results do not depend on which other cells exist or
//! on how cells are scheduled across threads. The policy generator is
//! ChaCha8 seeded from the cell seed. All agents and λ values of the same
//! trial index face the same environment draw (common random numbers).

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::domain::{MixMode, RewardMixer};
use crate::envworld::{EnvConfig, EpidemicEnv, TraceRow, TrialTrace};
use crate::error::{Error, Result};
use crate::metrics::{assign_metrics, MetricRecord, QUANTILE_BINS};
use crate::policies::{Policy, PolicyConfig};

pub const DEFAULT_HORIZON: usize = 1000;
pub const DEFAULT_TRIALS: usize = 50;
pub const REFERENCE_LAMBDA_GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Agent id under which environment seeds are derived.
const ENV_SEED_ID: &str = "__env__";

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub(crate) fn fnv1a(bytes: impl IntoIterator<Item = u8>) -> u64 {
    bytes
        .into_iter()
        .fold(FNV_OFFSET, |h, b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

/// 64-bit FNV-1a over
/// `base_seed (u64 LE) ‖ len(agent_id) (u64 LE) ‖ agent_id (UTF-8) ‖ λ bits (u64 LE) ‖ trial (u64 LE)`.
pub fn derive_seed(base_seed: u64, agent_id: &str, lambda: f64, trial_index: u64) -> u64 {
    let bytes = base_seed
        .to_le_bytes()
        .into_iter()
        .chain((agent_id.len() as u64).to_le_bytes())
        .chain(agent_id.bytes())
        .chain(lambda.to_bits().to_le_bytes())
        .chain(trial_index.to_le_bytes());
    fnv1a(bytes)
}

/// Seed of the environment instance used by every agent in trial `trial`.
pub fn env_seed(base_seed: u64, trial: u64) -> u64 {
    derive_seed(base_seed, ENV_SEED_ID, 0.0, trial)
}

/// Runs one agent against one environment instance for `horizon` steps.
///
/// The policy is reset with `trial_seed` and draws from a ChaCha8
/// generator seeded with it. Errors carry the 1-based failing step.
pub fn run_trial(
    env_cfg: &EnvConfig<f64>,
    policy_cfg: &PolicyConfig,
    mixer: RewardMixer<f64>,
    horizon: usize,
    trial_seed: u64,
) -> Result<TrialTrace<f64>> {
    let mut env = EpidemicEnv::new(env_cfg.clone())?;
    let mut policy = policy_cfg.build(&env_cfg.space, env_cfg.context_dim, mixer)?;
    policy.reset(trial_seed);
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
    let mut rows = Vec::with_capacity(horizon);
    for t in 1..=horizon {
        let row = play_step(&mut env, policy.as_mut(), &mixer, &mut rng, t).map_err(|e| e.at_step(t))?;
        rows.push(row);
    }
    Ok(TrialTrace { rows })
}

fn play_step(
    env: &mut EpidemicEnv<f64>,
    policy: &mut dyn Policy<f64>,
    mixer: &RewardMixer<f64>,
    rng: &mut ChaCha8Rng,
    t: usize,
) -> Result<TraceRow<f64>> {
    let ctx = env.context(t);
    let action = policy.select(&ctx, rng)?;
    let fb = env.step(t, &action)?;
    policy.observe(&ctx, &action, &fb)?;
    Ok(TraceRow {
        t,
        r_star: mixer.mix(fb.reward, fb.cost)?,
        context: ctx.weights().to_vec(),
        action,
        reward: fb.reward,
        cost: fb.cost,
    })
}

#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub horizon: usize,
    pub n_trials: usize,
    pub base_seed: u64,
    pub agents: Vec<PolicyConfig>,
    /// The `seed` field is ignored; each trial gets [`env_seed`].
    pub env: EnvConfig<f64>,
    pub lambda_grid: Vec<f64>,
    pub mix_mode: MixMode,
    pub cost_floor: f64,
    pub keep_traces: bool,
}

impl ExperimentPlan {
    pub fn new(env: EnvConfig<f64>, agents: Vec<PolicyConfig>) -> Self {
        Self {
            horizon: DEFAULT_HORIZON,
            n_trials: DEFAULT_TRIALS,
            base_seed: 0,
            agents,
            env,
            lambda_grid: REFERENCE_LAMBDA_GRID.to_vec(),
            mix_mode: MixMode::Convex,
            cost_floor: crate::domain::DEFAULT_COST_FLOOR,
            keep_traces: false,
        }
    }

    /// The six agents of the reference evaluation.
    pub fn reference_agents() -> Vec<PolicyConfig> {
        vec![
            PolicyConfig::Cctsb { alpha: 0.1, discount: 1.0 },
            PolicyConfig::Cctsb { alpha: 0.01, discount: 1.0 },
            PolicyConfig::IndCombUcb1,
            PolicyConfig::IndCombTs,
            PolicyConfig::Random,
            PolicyConfig::RandomFixed,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 || self.n_trials == 0 {
            return Err(Error::InvalidInput("horizon and n_trials must be ≥ 1".into()));
        }
        if self.agents.is_empty() {
            return Err(Error::InvalidInput("no agents".into()));
        }
        if self.lambda_grid.is_empty() {
            return Err(Error::InvalidInput("empty lambda grid".into()));
        }
        for (i, &l) in self.lambda_grid.iter().enumerate() {
            if !(0.0..=1.0).contains(&l) {
                return Err(Error::OutOfRange { value: l, lo: 0.0, hi: 1.0 });
            }
            if self.lambda_grid[..i].contains(&l) {
                return Err(Error::InvalidInput(format!("duplicate lambda {l}")));
            }
        }
        let names: Vec<String> = self.agents.iter().map(PolicyConfig::name).collect();
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(Error::InvalidInput(format!("duplicate agent {n}")));
            }
        }
        self.env.validate()?;
        RewardMixer::new(self.mix_mode, 0.5, self.cost_floor)?;
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.agents.len() * self.lambda_grid.len() * self.n_trials
    }

    fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::with_capacity(self.cell_count());
        for agent in 0..self.agents.len() {
            for lambda in 0..self.lambda_grid.len() {
                for trial in 0..self.n_trials {
                    cells.push(Cell { agent, lambda, trial });
                }
            }
        }
        cells
    }
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    agent: usize,
    lambda: usize,
    trial: usize,
}

/// One finished cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub record: MetricRecord,
    pub cum_r_star: f64,
    pub trace: Option<TrialTrace<f64>>,
}

#[derive(Debug, Clone)]
pub struct RunMetadata {
    pub base_seed: u64,
    pub env_seeds: Vec<u64>,
    pub wall_time: Duration,
    pub threads: usize,
}

/// Cells ordered by (agent, λ, trial).
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub cells: Vec<CellResult>,
    pub meta: RunMetadata,
}

impl ExperimentResult {
    pub fn records(&self) -> Vec<MetricRecord> {
        self.cells.iter().map(|c| c.record.clone()).collect()
    }

    /// Cells of one agent at one λ, in trial order.
    pub fn group<'a>(&'a self, agent: &'a str, lambda: f64) -> impl Iterator<Item = &'a CellResult> + 'a {
        self.cells
            .iter()
            .filter(move |c| c.record.agent == agent && c.record.lambda == lambda)
    }
}

#[derive(Debug, Clone, Error)]
pub enum HarnessError {
    #[error("invalid plan: {0}")]
    Plan(#[source] Error),
    #[error("{} of {total} cells failed; first: {}", failures.len(), failures[0])]
    Cells { failures: Vec<CellFailure>, total: usize },
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Error)]
#[error("{agent} λ={lambda} trial {trial}: {source}")]
pub struct CellFailure {
    pub agent: String,
    pub lambda: f64,
    pub trial: usize,
    #[source]
    pub source: Error,
}

fn run_cell(plan: &ExperimentPlan, cell: Cell) -> std::result::Result<CellResult, CellFailure> {
    let policy = &plan.agents[cell.agent];
    let agent = policy.name();
    let lambda = plan.lambda_grid[cell.lambda];
    let fail = |source| CellFailure {
        agent: agent.clone(),
        lambda,
        trial: cell.trial,
        source,
    };
    let seed = derive_seed(plan.base_seed, &agent, lambda, cell.trial as u64);
    let mut env = plan.env.clone();
    env.seed = env_seed(plan.base_seed, cell.trial as u64);
    let mixer = RewardMixer::new(plan.mix_mode, lambda, plan.cost_floor).map_err(fail)?;
    let trace = run_trial(&env, policy, mixer, plan.horizon, seed).map_err(fail)?;
    let record = MetricRecord {
        agent: agent.clone(),
        lambda,
        stationarity: plan.env.stationarity.to_string(),
        trial: cell.trial,
        seed,
        cum_reward: trace.cumulative_reward(),
        cum_cost: trace.cumulative_cost(),
        cases: 0.0,
        budget_bin: 0,
    };
    Ok(CellResult {
        record,
        cum_r_star: trace.cumulative_r_star(),
        trace: plan.keep_traces.then_some(trace),
    })
}

/// Runs every (agent, λ, trial) cell on `parallelism` worker threads.
pub fn run_experiment(plan: &ExperimentPlan, parallelism: usize) -> std::result::Result<ExperimentResult, HarnessError> {
    plan.validate().map_err(HarnessError::Plan)?;
    if parallelism == 0 {
        return Err(HarnessError::Plan(Error::InvalidInput("parallelism must be ≥ 1".into())));
    }
    let started = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    let cells = plan.cells();
    let outcomes: Vec<_> = pool.install(|| cells.par_iter().map(|&c| run_cell(plan, c)).collect());

    let total = outcomes.len();
    let mut results = Vec::with_capacity(total);
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => results.push(r),
            Err(f) => failures.push(f),
        }
    }
    if !failures.is_empty() {
        return Err(HarnessError::Cells { failures, total });
    }

    let mut records: Vec<MetricRecord> = results.iter().map(|r| r.record.clone()).collect();
    assign_metrics(&mut records, QUANTILE_BINS).map_err(HarnessError::Plan)?;
    for (cell, rec) in results.iter_mut().zip(records) {
        cell.record = rec;
    }
    Ok(ExperimentResult {
        cells: results,
        meta: RunMetadata {
            base_seed: plan.base_seed,
            env_seeds: (0..plan.n_trials as u64).map(|t| env_seed(plan.base_seed, t)).collect(),
            wall_time: started.elapsed(),
            threads: parallelism,
        },
    })
}
