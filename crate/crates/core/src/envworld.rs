//! Simulated epidemic-intervention world.
//!
//! Each trial draws hidden effect vectors `θ*_{k,i}` for every
//! (intervention, level) pair. The context is the stringency-weight vector;
//! it doubles as the cost weights. Playing plan `a` under context `c`
//! yields
//!
//! ```text
//! reward = clip(Σ_k θ*_{k,a_k}ᵀ c + η, 0, 1),   η ~ N(0, σ²)
//! cost   = max(ε, Σ_k c_k · a_k / (N_k − 1))
//! ```
//!
//! All randomness comes from ChaCha8 streams keyed by the environment seed:
//! stream 0 draws `θ*`, stream `1 + epoch` draws the context of that
//! epoch, and a dedicated stream feeds the reward noise in step order.

use std::collections::VecDeque;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::domain::{validate_action, ActionSpace, ActionVector, Context, Feedback, DEFAULT_COST_FLOOR};
use crate::error::{Error, Result};
use crate::scalar::{dot, Scalar};

const THETA_STREAM: u64 = 0;
const NOISE_STREAM: u64 = u64::MAX;
pub const DEFAULT_NOISE_SIGMA: f64 = 0.05;
pub const DEFAULT_PERIOD: usize = 10;

/// When the stringency weights are redrawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stationarity {
    Constant,
    Periodic(usize),
    EveryStep,
}

impl Stationarity {
    /// Index of the context draw in force at step `t` (1-based).
    pub fn epoch(self, t: usize) -> u64 {
        match self {
            Stationarity::Constant => 0,
            Stationarity::Periodic(p) => ((t - 1) / p) as u64,
            Stationarity::EveryStep => (t - 1) as u64,
        }
    }
}

impl fmt::Display for Stationarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stationarity::Constant => f.write_str("constant"),
            Stationarity::Periodic(p) => write!(f, "periodic_{p}"),
            Stationarity::EveryStep => f.write_str("every_step"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvConfig<T> {
    pub space: ActionSpace,
    /// Context length; at least the number of dimensions, whose leading
    /// entries weight the cost.
    pub context_dim: usize,
    pub stationarity: Stationarity,
    pub noise_sigma: T,
    pub cost_floor: T,
    /// Steps by which the reported reward lags the plan that caused it.
    pub reward_delay: usize,
    pub seed: u64,
}

impl<T: Scalar> EnvConfig<T> {
    /// Epidemic defaults: context dimension equals the number of dimensions.
    pub fn new(space: ActionSpace, stationarity: Stationarity, seed: u64) -> Self {
        Self {
            context_dim: space.dims(),
            space,
            stationarity,
            noise_sigma: T::of(DEFAULT_NOISE_SIGMA),
            cost_floor: T::of(DEFAULT_COST_FLOOR),
            reward_delay: 0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.context_dim < self.space.dims() {
            return Err(Error::InvalidInput(format!(
                "context dimension {} smaller than the {} action dimensions",
                self.context_dim,
                self.space.dims()
            )));
        }
        if let Stationarity::Periodic(0) = self.stationarity {
            return Err(Error::InvalidInput("period must be ≥ 1".into()));
        }
        if !(self.noise_sigma >= T::zero() && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "noise sigma must be ≥ 0, got {}",
                self.noise_sigma
            )));
        }
        if !(self.cost_floor > T::zero() && self.cost_floor.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "cost floor must be > 0, got {}",
                self.cost_floor
            )));
        }
        Ok(())
    }
}

/// Effect vectors `θ*` indexed by `[dimension][arm]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenParams<T> {
    pub theta_star: Vec<Vec<Vec<T>>>,
}

impl<T: Scalar> HiddenParams<T> {
    /// Uniform `[0, 1]` entries, then each dimension rescaled so its best
    /// arm contributes exactly `1/K` under an all-ones context. Context
    /// entries lie in `[0, 1]`, so the noiseless reward stays in `[0, 1]`.
    pub fn draw(space: &ActionSpace, context_dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(THETA_STREAM);
        let k = T::of(space.dims() as f64);
        let theta_star = space
            .arm_counts()
            .iter()
            .map(|&n| {
                let mut arms: Vec<Vec<T>> = (0..n)
                    .map(|_| (0..context_dim).map(|_| T::of(rng.random::<f64>())).collect())
                    .collect();
                let best = arms
                    .iter()
                    .map(|th| th.iter().copied().sum::<T>())
                    .fold(T::zero(), T::max);
                if best > T::zero() {
                    let scale = T::one() / (k * best);
                    arms.iter_mut().flatten().for_each(|x| *x *= scale);
                }
                arms
            })
            .collect();
        Self { theta_star }
    }

    /// Noiseless, unclipped reward of a plan.
    pub fn expected_reward(&self, ctx: &[T], action: &ActionVector) -> T {
        self.theta_star
            .iter()
            .zip(action.arms())
            .map(|(arms, &a)| dot(&arms[a], ctx))
            .sum()
    }
}

/// Cost of a plan: ordinal level normalized to `[0, 1]`, weighted by the
/// matching context entry, floored at `floor`.
pub fn plan_cost<T: Scalar>(space: &ActionSpace, ctx: &[T], action: &ActionVector, floor: T) -> T {
    let raw: T = space
        .arm_counts()
        .iter()
        .zip(action.arms())
        .zip(ctx)
        .filter(|((&n, _), _)| n > 1)
        .map(|((&n, &a), &c)| c * T::of(a as f64 / (n - 1) as f64))
        .sum();
    raw.max(floor)
}

/// One row of a trial trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow<T> {
    pub t: usize,
    pub context: Vec<T>,
    pub action: ActionVector,
    pub reward: T,
    pub cost: T,
    pub r_star: T,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrialTrace<T> {
    pub rows: Vec<TraceRow<T>>,
}

impl<T: Scalar> TrialTrace<T> {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn cumulative_reward(&self) -> T {
        self.rows.iter().map(|r| r.reward).sum()
    }

    pub fn cumulative_cost(&self) -> T {
        self.rows.iter().map(|r| r.cost).sum()
    }

    pub fn cumulative_r_star(&self) -> T {
        self.rows.iter().map(|r| r.r_star).sum()
    }
}

#[derive(Debug, Clone)]
pub struct EpidemicEnv<T> {
    config: EnvConfig<T>,
    hidden: HiddenParams<T>,
    cached: Option<(u64, Context<T>)>,
    noise: ChaCha8Rng,
    pending: VecDeque<T>,
    step: usize,
}

impl<T: Scalar> EpidemicEnv<T> {
    pub fn new(config: EnvConfig<T>) -> Result<Self> {
        config.validate()?;
        let hidden = HiddenParams::draw(&config.space, config.context_dim, config.seed);
        Self::with_hidden(config, hidden)
    }

    /// Environment with caller-supplied effect vectors.
    pub fn with_hidden(config: EnvConfig<T>, hidden: HiddenParams<T>) -> Result<Self> {
        config.validate()?;
        let shape_ok = hidden.theta_star.len() == config.space.dims()
            && hidden
                .theta_star
                .iter()
                .zip(config.space.arm_counts())
                .all(|(arms, &n)| arms.len() == n && arms.iter().all(|th| th.len() == config.context_dim));
        if !shape_ok {
            return Err(Error::InvalidInput("hidden parameters do not match the action space".into()));
        }
        let seed = config.seed;
        Ok(Self {
            config,
            hidden,
            cached: None,
            noise: noise_rng(seed),
            pending: VecDeque::new(),
            step: 0,
        })
    }

    pub fn config(&self) -> &EnvConfig<T> {
        &self.config
    }

    /// Ground truth, for oracles and diagnostics. Never handed to a policy.
    pub fn hidden(&self) -> &HiddenParams<T> {
        &self.hidden
    }

    pub fn space(&self) -> &ActionSpace {
        &self.config.space
    }

    /// Redraws the hidden parameters and context stream from `seed`.
    pub fn reset(&mut self, seed: u64) {
        self.config.seed = seed;
        self.hidden = HiddenParams::draw(&self.config.space, self.config.context_dim, seed);
        self.cached = None;
        self.noise = noise_rng(seed);
        self.pending.clear();
        self.step = 0;
    }

    /// Context in force at step `t ≥ 1`; a pure function of seed and epoch.
    pub fn context(&mut self, t: usize) -> Context<T> {
        assert!(t >= 1, "steps are 1-based");
        let epoch = self.config.stationarity.epoch(t);
        if let Some((e, ctx)) = &self.cached {
            if *e == epoch {
                return ctx.clone();
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(1 + epoch);
        let ctx = Context::new(
            (0..self.config.context_dim)
                .map(|_| T::of(rng.random::<f64>()))
                .collect(),
        )
        .expect("uniform draws are finite");
        self.cached = Some((epoch, ctx.clone()));
        ctx
    }

    /// Plays `action` at step `t`. Steps must be taken in order.
    pub fn step(&mut self, t: usize, action: &ActionVector) -> Result<Feedback<T>> {
        validate_action(&self.config.space, action)?;
        if t != self.step + 1 {
            return Err(Error::InvalidInput(format!(
                "expected step {}, got {t}",
                self.step + 1
            )));
        }
        let ctx = self.context(t);
        let w = ctx.weights();
        let mut reward = self.hidden.expected_reward(w, action);
        if self.config.noise_sigma > T::zero() {
            let eta: f64 = StandardNormal.sample(&mut self.noise);
            reward += self.config.noise_sigma * T::of(eta);
        }
        let reward = reward.max(T::zero()).min(T::one());
        let cost = plan_cost(&self.config.space, w, action, self.config.cost_floor);
        self.step = t;

        let reported = if self.config.reward_delay == 0 {
            reward
        } else {
            self.pending.push_back(reward);
            if self.pending.len() > self.config.reward_delay {
                self.pending.pop_front().expect("queue longer than delay")
            } else {
                T::zero()
            }
        };
        Ok(Feedback {
            reward: reported,
            cost,
        })
    }
}

fn noise_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(NOISE_STREAM);
    rng
}
