//! The uniform policy interface and the agents evaluated against CCTSB.
//!
//! IndComb agents run one independent multi-armed bandit per action
//! dimension and never read the context. Their bandits expect rewards in
//! `[0, 1]`, so the mixed reward first passes through a running min-max
//! [`Normalizer`].

use rand::RngCore;

use crate::cctsb::{CctsbConfig, CctsbState};
use crate::domain::{ActionSpace, ActionVector, Context, Feedback, RewardMixer};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

mod random;
mod thompson;
mod ucb1;

pub use random::{RandomFixedPolicy, RandomPolicy};
pub use thompson::{IndCombTs, TsDimState};
pub use ucb1::{IndCombUcb1, Ucb1DimState};

/// Behavioral contract shared by every agent.
///
/// `select` and `observe` alternate; `observe` without a pending `select`
/// is an error.
pub trait Policy<T: Scalar>: Send {
    fn name(&self) -> String;
    fn select(&mut self, ctx: &Context<T>, rng: &mut dyn RngCore) -> Result<ActionVector>;
    fn observe(&mut self, ctx: &Context<T>, action: &ActionVector, fb: &Feedback<T>) -> Result<()>;
    /// Returns the policy to its initial state.
    fn reset(&mut self, seed: u64);
}

/// Which agent to build.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicyConfig {
    Cctsb { alpha: f64, discount: f64 },
    IndCombUcb1,
    IndCombTs,
    Random,
    RandomFixed,
}

impl PolicyConfig {
    /// Name used in output files.
    pub fn name(&self) -> String {
        match self {
            PolicyConfig::Cctsb { alpha, .. } => format!("CCTSB-{alpha}"),
            PolicyConfig::IndCombUcb1 => "IndComb-UCB1".into(),
            PolicyConfig::IndCombTs => "IndComb-TS".into(),
            PolicyConfig::Random => "Random".into(),
            PolicyConfig::RandomFixed => "RandomFixed".into(),
        }
    }

    pub fn build<T: Scalar>(
        &self,
        space: &ActionSpace,
        context_dim: usize,
        mixer: RewardMixer<T>,
    ) -> Result<Box<dyn Policy<T>>> {
        Ok(match *self {
            PolicyConfig::Cctsb { alpha, discount } => {
                let mut cfg = CctsbConfig::new(T::of(alpha), context_dim, mixer);
                cfg.discount = T::of(discount);
                Box::new(CctsbPolicy::new(space, cfg)?)
            }
            PolicyConfig::IndCombUcb1 => Box::new(IndCombUcb1::new(space, mixer)),
            PolicyConfig::IndCombTs => Box::new(IndCombTs::new(space, mixer)),
            PolicyConfig::Random => Box::new(RandomPolicy::new(space)),
            PolicyConfig::RandomFixed => Box::new(RandomFixedPolicy::new(space)),
        })
    }
}

/// Tracks whether a `select` is waiting for its `observe`.
#[derive(Debug, Clone, Default)]
pub(crate) struct Turn {
    pending: bool,
}

impl Turn {
    pub(crate) fn selected(&mut self) {
        self.pending = true;
    }

    pub(crate) fn observe(&mut self) -> Result<()> {
        if !self.pending {
            return Err(Error::ObserveBeforeSelect);
        }
        self.pending = false;
        Ok(())
    }
}

/// Running min-max normalization into `[0, 1]`.
///
/// Each value is scaled against the range of the values seen *before* it
/// and clipped. Without a usable range (first sample, or all samples equal
/// so far) the result is 0.5.
#[derive(Debug, Clone, Default)]
pub struct Normalizer<T> {
    range: Option<(T, T)>,
}

impl<T: Scalar> Normalizer<T> {
    pub fn new() -> Self {
        Self { range: None }
    }

    pub fn normalize(&mut self, x: T) -> T {
        let half = T::of(0.5);
        let out = match self.range {
            Some((lo, hi)) if hi > lo => ((x - lo) / (hi - lo)).max(T::zero()).min(T::one()),
            _ => half,
        };
        self.range = Some(match self.range {
            None => (x, x),
            Some((lo, hi)) => (lo.min(x), hi.max(x)),
        });
        out
    }
}

/// [`CctsbState`] behind the [`Policy`] interface.
#[derive(Debug, Clone)]
pub struct CctsbPolicy<T> {
    state: CctsbState<T>,
    turn: Turn,
}

impl<T: Scalar> CctsbPolicy<T> {
    pub fn new(space: &ActionSpace, config: CctsbConfig<T>) -> Result<Self> {
        Ok(Self {
            state: CctsbState::new(space, config)?,
            turn: Turn::default(),
        })
    }

    pub fn state(&self) -> &CctsbState<T> {
        &self.state
    }
}

impl<T: Scalar> Policy<T> for CctsbPolicy<T> {
    fn name(&self) -> String {
        format!("CCTSB-{}", self.state.config().alpha)
    }

    fn select(&mut self, ctx: &Context<T>, rng: &mut dyn RngCore) -> Result<ActionVector> {
        let a = self.state.select(ctx, rng)?;
        self.turn.selected();
        Ok(a)
    }

    fn observe(&mut self, ctx: &Context<T>, action: &ActionVector, fb: &Feedback<T>) -> Result<()> {
        self.turn.observe()?;
        self.state.update(ctx, action, fb)
    }

    fn reset(&mut self, _seed: u64) {
        let space = self.state.space().clone();
        let config = *self.state.config();
        self.state = CctsbState::new(&space, config).expect("config validated at construction");
        self.turn = Turn::default();
    }
}
