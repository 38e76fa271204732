use rand::RngCore;

use super::{Normalizer, Policy, Turn};
use crate::domain::{ActionSpace, ActionVector, Context, Feedback, RewardMixer};
use crate::error::Result;
use crate::scalar::Scalar;

/// UCB1 statistics for one action dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Ucb1DimState<T> {
    pub counts: Vec<u64>,
    pub means: Vec<T>,
    pub total: u64,
}

impl<T: Scalar> Ucb1DimState<T> {
    pub fn new(arms: usize) -> Self {
        Self {
            counts: vec![0; arms],
            means: vec![T::zero(); arms],
            total: 0,
        }
    }

    /// Lowest unpulled arm, else the argmax of `mean + sqrt(2 ln t / n)`.
    pub fn select(&self) -> usize {
        if let Some(i) = self.counts.iter().position(|&n| n == 0) {
            return i;
        }
        let log_t = T::of((self.total as f64).ln());
        let two = T::of(2.0);
        let mut best = 0;
        let mut best_score = T::neg_infinity();
        for (i, (&n, &m)) in self.counts.iter().zip(&self.means).enumerate() {
            let score = m + (two * log_t / T::of(n as f64)).sqrt();
            if score > best_score {
                best = i;
                best_score = score;
            }
        }
        best
    }

    pub fn observe(&mut self, arm: usize, reward: T) {
        self.counts[arm] += 1;
        self.total += 1;
        let n = T::of(self.counts[arm] as f64);
        let m = self.means[arm];
        self.means[arm] = m + (reward - m) / n;
    }
}

#[derive(Debug, Clone)]
pub struct IndCombUcb1<T> {
    dims: Vec<Ucb1DimState<T>>,
    mixer: RewardMixer<T>,
    normalizer: Normalizer<T>,
    turn: Turn,
}

impl<T: Scalar> IndCombUcb1<T> {
    pub fn new(space: &ActionSpace, mixer: RewardMixer<T>) -> Self {
        Self {
            dims: space.arm_counts().iter().map(|&n| Ucb1DimState::new(n)).collect(),
            mixer,
            normalizer: Normalizer::new(),
            turn: Turn::default(),
        }
    }

    pub fn dim_state(&self, k: usize) -> &Ucb1DimState<T> {
        &self.dims[k]
    }
}

impl<T: Scalar> Policy<T> for IndCombUcb1<T> {
    fn name(&self) -> String {
        "IndComb-UCB1".into()
    }

    fn select(&mut self, _ctx: &Context<T>, _rng: &mut dyn RngCore) -> Result<ActionVector> {
        self.turn.selected();
        Ok(ActionVector(self.dims.iter().map(Ucb1DimState::select).collect()))
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
            *d = Ucb1DimState::new(d.counts.len());
        }
        self.normalizer = Normalizer::new();
        self.turn = Turn::default();
    }
}
