//! Contextual combinatorial Thompson sampling with budget.
//!
//! Every (dimension, arm) pair keeps a Bayesian ridge posterior over a
//! weight vector `θ` with `E[r*] = θᵀc`. Each step draws one sample
//! `θ̃ ~ N(θ̂, α²B⁻¹)` per pair and plays, in every dimension, the arm whose
//! sample scores highest against the shared context. After feedback, only
//! the played arm of each dimension is updated with the mixed reward:
//!
//! ```text
//! B ← γ·B + c·cᵀ      z ← z + c·r*      θ̂ ← B⁻¹·z
//! ```
//!
//! With `γ = 1` the inverse is carried forward by Sherman–Morrison; with
//! forgetting (`γ < 1`) the posterior keeps `B` and re-solves.

use rand::Rng;

use crate::domain::{validate_action, ActionSpace, ActionVector, Context, Feedback, RewardMixer};
use crate::error::{Error, Result};
use crate::linalg::{
    cholesky, sample_mvn, sherman_morrison, spd_inverse, spd_solve, LowerTriangular, SymMatrix,
    DEFAULT_JITTER,
};
use crate::scalar::{dot, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CctsbConfig<T> {
    /// Exploration scale of the posterior samples.
    pub alpha: T,
    /// Forgetting factor applied to `B` before each rank-one update.
    pub discount: T,
    pub mixer: RewardMixer<T>,
    pub context_dim: usize,
}

impl<T: Scalar> CctsbConfig<T> {
    pub fn new(alpha: T, context_dim: usize, mixer: RewardMixer<T>) -> Self {
        Self {
            alpha,
            discount: T::one(),
            mixer,
            context_dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        // α = 0 degenerates to greedy ridge regression; kept for testing.
        if !(self.alpha >= T::zero() && self.alpha.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "alpha must be non-negative, got {}",
                self.alpha
            )));
        }
        if !(self.discount > T::zero() && self.discount <= T::one()) {
            return Err(Error::OutOfRange {
                value: self.discount.as_f64(),
                lo: 0.0,
                hi: 1.0,
            });
        }
        if self.context_dim == 0 {
            return Err(Error::InvalidInput("context dimension must be ≥ 1".into()));
        }
        Ok(())
    }

    fn forgets(&self) -> bool {
        self.discount < T::one()
    }
}

/// Ridge sufficient statistics of one (dimension, arm) pair.
#[derive(Debug, Clone)]
pub struct ArmPosterior<T> {
    b: SymMatrix<T>,
    /// Carried only without forgetting.
    b_inv: Option<SymMatrix<T>>,
    z: Vec<T>,
    theta_hat: Vec<T>,
    /// Cholesky factor of `B⁻¹`, rebuilt lazily after an update.
    factor: Option<LowerTriangular<T>>,
    pulls: u64,
}

impl<T: Scalar> ArmPosterior<T> {
    fn new(c: usize, keep_inverse: bool) -> Self {
        Self {
            b: SymMatrix::identity(c),
            b_inv: keep_inverse.then(|| SymMatrix::identity(c)),
            z: vec![T::zero(); c],
            theta_hat: vec![T::zero(); c],
            factor: Some(LowerTriangular::identity(c)),
            pulls: 0,
        }
    }

    pub fn b(&self) -> &SymMatrix<T> {
        &self.b
    }

    pub fn b_inv(&self) -> Option<&SymMatrix<T>> {
        self.b_inv.as_ref()
    }

    pub fn z(&self) -> &[T] {
        &self.z
    }

    pub fn theta_hat(&self) -> &[T] {
        &self.theta_hat
    }

    pub fn pulls(&self) -> u64 {
        self.pulls
    }

    fn covariance_factor(&mut self) -> Result<&LowerTriangular<T>> {
        if self.factor.is_none() {
            let inv = match &self.b_inv {
                Some(inv) => inv.clone(),
                None => spd_inverse(&self.b)?,
            };
            self.factor = Some(cholesky(&inv, T::of(DEFAULT_JITTER))?);
        }
        Ok(self.factor.as_ref().expect("factor just built"))
    }

    fn update(&mut self, ctx: &[T], reward: T, discount: T) -> Result<()> {
        self.b.scale_add_outer(discount, ctx);
        for (z, &c) in self.z.iter_mut().zip(ctx) {
            *z += c * reward;
        }
        self.theta_hat = match &mut self.b_inv {
            Some(inv) => {
                *inv = sherman_morrison(inv, ctx)?;
                inv.mul_vec(&self.z)
            }
            None => spd_solve(&self.b, &self.z)?,
        };
        self.factor = None;
        self.pulls += 1;
        Ok(())
    }
}

/// Index of the largest score, lowest index on ties.
pub fn argmax_lowest<T: Scalar>(scores: &[T]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone)]
pub struct CctsbState<T> {
    config: CctsbConfig<T>,
    space: ActionSpace,
    posteriors: Vec<Vec<ArmPosterior<T>>>,
    last_sampled: Vec<Vec<Vec<T>>>,
}

impl<T: Scalar> CctsbState<T> {
    pub fn new(space: &ActionSpace, config: CctsbConfig<T>) -> Result<Self> {
        config.validate()?;
        let c = config.context_dim;
        let keep_inverse = !config.forgets();
        let posteriors = space
            .arm_counts()
            .iter()
            .map(|&n| (0..n).map(|_| ArmPosterior::new(c, keep_inverse)).collect())
            .collect();
        let last_sampled = space
            .arm_counts()
            .iter()
            .map(|&n| vec![vec![T::zero(); c]; n])
            .collect();
        Ok(Self {
            config,
            space: space.clone(),
            posteriors,
            last_sampled,
        })
    }

    pub fn config(&self) -> &CctsbConfig<T> {
        &self.config
    }

    pub fn space(&self) -> &ActionSpace {
        &self.space
    }

    pub fn posterior(&self, dim: usize, arm: usize) -> &ArmPosterior<T> {
        &self.posteriors[dim][arm]
    }

    pub fn posteriors(&self) -> impl Iterator<Item = &ArmPosterior<T>> {
        self.posteriors.iter().flatten()
    }

    /// The `θ̃` drawn for `(dim, arm)` by the most recent select.
    pub fn sampled_theta(&self, dim: usize, arm: usize) -> &[T] {
        &self.last_sampled[dim][arm]
    }

    fn check_context(&self, ctx: &Context<T>) -> Result<()> {
        if ctx.dim() != self.config.context_dim {
            return Err(Error::DimensionMismatch {
                expected: self.config.context_dim,
                got: ctx.dim(),
            });
        }
        Ok(())
    }

    pub fn select<R: Rng + ?Sized>(&mut self, ctx: &Context<T>, rng: &mut R) -> Result<ActionVector> {
        self.check_context(ctx)?;
        let alpha = self.config.alpha;
        for (posts, sampled) in self.posteriors.iter_mut().zip(&mut self.last_sampled) {
            for (post, slot) in posts.iter_mut().zip(sampled.iter_mut()) {
                let mean = post.theta_hat.clone();
                *slot = sample_mvn(&mean, alpha, post.covariance_factor()?, rng)?;
            }
        }
        let arms = self
            .last_sampled
            .iter()
            .map(|sampled| {
                let scores: Vec<T> = sampled.iter().map(|th| dot(ctx.weights(), th)).collect();
                argmax_lowest(&scores)
            })
            .collect();
        Ok(ActionVector(arms))
    }

    pub fn update(&mut self, ctx: &Context<T>, action: &ActionVector, fb: &Feedback<T>) -> Result<()> {
        self.check_context(ctx)?;
        validate_action(&self.space, action)?;
        let r_star = self.config.mixer.mix(fb.reward, fb.cost)?;
        let discount = self.config.discount;
        for (posts, &arm) in self.posteriors.iter_mut().zip(action.arms()) {
            posts[arm].update(ctx.weights(), r_star, discount)?;
        }
        Ok(())
    }
}
