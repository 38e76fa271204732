use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Policy, Turn};
use crate::domain::{ActionSpace, ActionVector, Context, Feedback};
use crate::error::Result;
use crate::scalar::Scalar;

fn uniform_plan<R: Rng + ?Sized>(space: &ActionSpace, rng: &mut R) -> ActionVector {
    ActionVector(
        space
            .arm_counts()
            .iter()
            .map(|&n| rng.random_range(0..n))
            .collect(),
    )
}

/// Draws every dimension uniformly at every step.
#[derive(Debug, Clone)]
pub struct RandomPolicy {
    space: ActionSpace,
    turn: Turn,
}

impl RandomPolicy {
    pub fn new(space: &ActionSpace) -> Self {
        Self {
            space: space.clone(),
            turn: Turn::default(),
        }
    }
}

impl<T: Scalar> Policy<T> for RandomPolicy {
    fn name(&self) -> String {
        "Random".into()
    }

    fn select(&mut self, _ctx: &Context<T>, rng: &mut dyn RngCore) -> Result<ActionVector> {
        self.turn.selected();
        Ok(uniform_plan(&self.space, rng))
    }

    fn observe(&mut self, _: &Context<T>, _: &ActionVector, _: &Feedback<T>) -> Result<()> {
        self.turn.observe()
    }

    fn reset(&mut self, _seed: u64) {
        self.turn = Turn::default();
    }
}

/// Draws one plan at reset and plays it forever. Without a reset the
/// plan is drawn from the first `select`'s generator.
#[derive(Debug, Clone)]
pub struct RandomFixedPolicy {
    space: ActionSpace,
    plan: Option<ActionVector>,
    turn: Turn,
}

impl RandomFixedPolicy {
    pub fn new(space: &ActionSpace) -> Self {
        Self {
            space: space.clone(),
            plan: None,
            turn: Turn::default(),
        }
    }

    pub fn plan(&self) -> Option<&ActionVector> {
        self.plan.as_ref()
    }
}

impl<T: Scalar> Policy<T> for RandomFixedPolicy {
    fn name(&self) -> String {
        "RandomFixed".into()
    }

    fn select(&mut self, _ctx: &Context<T>, rng: &mut dyn RngCore) -> Result<ActionVector> {
        self.turn.selected();
        let space = &self.space;
        Ok(self.plan.get_or_insert_with(|| uniform_plan(space, rng)).clone())
    }

    fn observe(&mut self, _: &Context<T>, _: &ActionVector, _: &Feedback<T>) -> Result<()> {
        self.turn.observe()
    }

    fn reset(&mut self, seed: u64) {
        self.plan = Some(uniform_plan(&self.space, &mut ChaCha8Rng::seed_from_u64(seed)));
        self.turn = Turn::default();
    }
}
