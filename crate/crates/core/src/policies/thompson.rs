use rand::{Rng, RngCore};
use rand_distr::{Distribution, Gamma};

use super::{Normalizer, Policy, Turn};
use crate::cctsb::argmax_lowest;
use crate::domain::{ActionSpace, ActionVector, Context, Feedback, RewardMixer};
use crate::error::Result;
use crate::scalar::Scalar;

/// Beta-Bernoulli pseudo-counts for one action dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct TsDimState<T> {
    pub successes: Vec<T>,
    pub failures: Vec<T>,
}

/// `Beta(a, b)` as `X / (X + Y)` with `X ~ Γ(a, 1)`, `Y ~ Γ(b, 1)`.
fn sample_beta<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    let x = Gamma::new(a, 1.0).expect("shape ≥ 1").sample(rng);
    let y = Gamma::new(b, 1.0).expect("shape ≥ 1").sample(rng);
    x / (x + y)
}

impl<T: Scalar> TsDimState<T> {
    pub fn new(arms: usize) -> Self {
        Self {
            successes: vec![T::zero(); arms],
            failures: vec![T::zero(); arms],
        }
    }

    /// Draws `Beta(S + 1, F + 1)` per arm and returns the largest draw.
    pub fn select<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let draws: Vec<f64> = self
            .successes
            .iter()
            .zip(&self.failures)
            .map(|(&s, &f)| sample_beta(s.as_f64() + 1.0, f.as_f64() + 1.0, rng))
            .collect();
        argmax_lowest(&draws)
    }

    /// Fractional Bernoulli update with a reward in `[0, 1]`.
    pub fn observe(&mut self, arm: usize, reward: T) {
        self.successes[arm] += reward;
        self.failures[arm] += T::one() - reward;
    }
}

#[derive(Debug, Clone)]
pub struct IndCombTs<T> {
    dims: Vec<TsDimState<T>>,
    mixer: RewardMixer<T>,
    normalizer: Normalizer<T>,
    turn: Turn,
}

impl<T: Scalar> IndCombTs<T> {
    pub fn new(space: &ActionSpace, mixer: RewardMixer<T>) -> Self {
        Self {
            dims: space.arm_counts().iter().map(|&n| TsDimState::new(n)).collect(),
            mixer,
            normalizer: Normalizer::new(),
            turn: Turn::default(),
        }
    }

    pub fn dim_state(&self, k: usize) -> &TsDimState<T> {
        &self.dims[k]
    }
}

impl<T: Scalar> Policy<T> for IndCombTs<T> {
    fn name(&self) -> String {
        "IndComb-TS".into()
    }

    fn select(&mut self, _ctx: &Context<T>, rng: &mut dyn RngCore) -> Result<ActionVector> {
        self.turn.selected();
        Ok(ActionVector(self.dims.iter().map(|d| d.select(rng)).collect()))
    }

    fn observe(&mut self, _ctx: &Context<T>, action: &ActionVector, fb: &Feedback<T>) -> Result<()> {
        self.turn.observe()?;
        let r = self.normalizer.normalize(self.mixer.mix(fb.reward, fb.cost)?);
        for (dim, &arm) in self.dims.iter_mut().zip(action.arms()) {
            dim.observe(arm, r);
        }
        Ok(())
    }

    fn reset(&mut self, _seed: u64) {
        for d in &mut self.dims {
            *d = TsDimState::new(d.successes.len());
        }
        self.normalizer = Normalizer::new();
        self.turn = Turn::default();
    }
}
