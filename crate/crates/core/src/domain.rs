//! Domain types shared by policies and environments.
//!
//! An [`ActionSpace`] is a list of independent action dimensions, each with an
//! ordinal set of arms `0..N_k`. A plan is one arm per dimension
//! ([`ActionVector`]). The agent observes a [`Context`] each step, plays a plan,
//! and receives a [`Feedback`] pair of reward and cost which the
//! [`RewardMixer`] collapses into the scalar it learns from.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Per-dimension arm counts of a combinatorial action space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSpace {
    arms: Vec<usize>,
    labels: Option<Vec<String>>,
}

impl ActionSpace {
    pub fn new(arms: Vec<usize>) -> Result<Self> {
        if arms.is_empty() {
            return Err(Error::InvalidInput(
                "action space needs at least one dimension".into(),
            ));
        }
        if let Some(k) = arms.iter().position(|&n| n == 0) {
            return Err(Error::InvalidInput(format!(
                "dimension {k} has zero arms"
            )));
        }
        Ok(Self { arms, labels: None })
    }

    pub fn with_labels(arms: Vec<usize>, labels: Vec<String>) -> Result<Self> {
        let mut space = Self::new(arms)?;
        if labels.len() != space.arms.len() {
            return Err(Error::DimensionMismatch {
                expected: space.arms.len(),
                got: labels.len(),
            });
        }
        space.labels = Some(labels);
        Ok(space)
    }

    /// Number of action dimensions `K`.
    pub fn dims(&self) -> usize {
        self.arms.len()
    }

    /// Arm count `N_k` of every dimension.
    pub fn arm_counts(&self) -> &[usize] {
        &self.arms
    }

    pub fn arms(&self, dim: usize) -> usize {
        self.arms[dim]
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, dim: usize) -> String {
        match &self.labels {
            Some(l) => l[dim].clone(),
            None => format!("d{dim}"),
        }
    }

    /// Total number of arms across all dimensions.
    pub fn total_arms(&self) -> usize {
        self.arms.iter().sum()
    }
}

/// Number of distinct plans, the product of all arm counts.
pub fn plan_count(space: &ActionSpace) -> Result<u64> {
    space.arms.iter().try_fold(1u64, |acc, &n| {
        acc.checked_mul(n as u64).ok_or_else(|| {
            Error::Overflow(format!("plan count exceeds u64 at factor {n}"))
        })
    })
}

/// The twelve non-pharmaceutical interventions of the Oxford stringency
/// index. Each indicator takes values `0..=N_j`, giving `N_j + 1` arms.
pub fn covid_npi_preset() -> ActionSpace {
    const ROWS: [(&str, usize); 12] = [
        ("C1", 3), // school closures
        ("C2", 3), // workplace closures
        ("C3", 2), // cancel public events
        ("C4", 4), // restrictions on gatherings
        ("C5", 2), // closing of public transport
        ("C6", 3), // stay at home requirement
        ("C7", 2), // restrictions on internal movement
        ("C8", 4), // international travel controls
        ("H1", 2), // public information campaigns
        ("H2", 2), // testing policy
        ("H3", 3), // contact tracing
        ("H6", 4), // facial coverings
    ];
    ActionSpace::with_labels(
        ROWS.iter().map(|&(_, max_level)| max_level + 1).collect(),
        ROWS.iter().map(|&(name, _)| name.to_string()).collect(),
    )
    .expect("preset is well formed")
}

/// Two-dimension toy world: traffic control with two levels, school
/// closure with three.
pub fn small_world_preset() -> ActionSpace {
    ActionSpace::with_labels(vec![2, 3], vec!["traffic".into(), "school".into()])
        .expect("preset is well formed")
}

/// Named presets, in display order.
pub const PRESET_NAMES: [&str; 2] = ["covid-npi", "small-world-2x3"];

pub fn preset(name: &str) -> Option<ActionSpace> {
    match name {
        "covid-npi" => Some(covid_npi_preset()),
        "small-world-2x3" => Some(small_world_preset()),
        _ => None,
    }
}

/// One chosen arm per dimension.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActionVector(pub Vec<usize>);

impl ActionVector {
    pub fn arms(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for ActionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

pub fn validate_action(space: &ActionSpace, action: &ActionVector) -> Result<()> {
    if action.len() != space.dims() {
        return Err(Error::DimensionMismatch {
            expected: space.dims(),
            got: action.len(),
        });
    }
    for (dim, (&arm, &arms)) in action.0.iter().zip(&space.arms).enumerate() {
        if arm >= arms {
            return Err(Error::ArmOutOfRange { dim, arm, arms });
        }
    }
    Ok(())
}

/// Stringency-weight vector observed before each decision.
#[derive(Debug, Clone, PartialEq)]
pub struct Context<T>(Vec<T>);

impl<T: Scalar> Context<T> {
    pub fn new(weights: Vec<T>) -> Result<Self> {
        if let Some(i) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "context entry {i} is not finite"
            )));
        }
        Ok(Self(weights))
    }

    pub fn weights(&self) -> &[T] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// Reward and cost revealed after playing a plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feedback<T> {
    pub reward: T,
    pub cost: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixMode {
    /// `r / s`
    Ratio,
    /// `λ·r + (1 − λ)/s`
    Convex,
}

impl MixMode {
    pub fn as_str(self) -> &'static str {
        match self {
            MixMode::Ratio => "ratio",
            MixMode::Convex => "convex",
        }
    }
}

pub const DEFAULT_COST_FLOOR: f64 = 1e-3;

/// Scalarizes a (reward, cost) pair into the learning signal `r*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardMixer<T> {
    mode: MixMode,
    lambda: T,
    cost_floor: T,
}

impl<T: Scalar> RewardMixer<T> {
    pub fn convex(lambda: T) -> Result<Self> {
        Self::new(MixMode::Convex, lambda, T::of(DEFAULT_COST_FLOOR))
    }

    pub fn ratio() -> Self {
        Self::new(MixMode::Ratio, T::one(), T::of(DEFAULT_COST_FLOOR))
            .expect("default ratio mixer is valid")
    }

    pub fn new(mode: MixMode, lambda: T, cost_floor: T) -> Result<Self> {
        if !(cost_floor > T::zero() && cost_floor.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "cost floor must be positive, got {cost_floor}"
            )));
        }
        if mode == MixMode::Convex && !(lambda >= T::zero() && lambda <= T::one()) {
            return Err(Error::OutOfRange {
                value: lambda.as_f64(),
                lo: 0.0,
                hi: 1.0,
            });
        }
        Ok(Self {
            mode,
            lambda,
            cost_floor,
        })
    }

    pub fn mode(&self) -> MixMode {
        self.mode
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn cost_floor(&self) -> T {
        self.cost_floor
    }

    pub fn mix(&self, reward: T, cost: T) -> Result<T> {
        mix_reward(self, reward, cost)
    }
}

pub fn mix_reward<T: Scalar>(mixer: &RewardMixer<T>, reward: T, cost: T) -> Result<T> {
    if !reward.is_finite() || !cost.is_finite() {
        return Err(Error::InvalidInput(format!(
            "non-finite reward/cost ({reward}, {cost})"
        )));
    }
    let s = cost.max(mixer.cost_floor);
    let out = match mixer.mode {
        MixMode::Ratio => reward / s,
        MixMode::Convex => mixer.lambda * reward + (T::one() - mixer.lambda) / s,
    };
    if !out.is_finite() {
        return Err(Error::InvalidInput(format!(
            "mixed reward overflowed for ({reward}, {cost})"
        )));
    }
    Ok(out)
}
