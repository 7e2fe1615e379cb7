//! Ranked nodes method for building conditional probability tables of
//! ranked Bayesian-network fragments.
//!
//! A child distribution is the average, over every combination of sample
//! points drawn from the parents' state intervals, of a normal distribution
//! truncated to `[0, 1]` whose mean is a weighted expression of the sample
//! points. The [`analysis`] module checks the structural properties of these
//! tables and locates the weights at which the most probable child states
//! change; [`experiments`] runs the robustness studies built on top.

pub mod analysis;
pub mod cpt;
pub mod error;
pub mod experiments;
pub mod expression;
pub mod model;
pub mod suite;
pub mod truncnorm;

pub use cpt::{
    generate_cpt, generate_distribution, limit_distribution, LimitEstimate, LimitOracleParams,
};
pub use error::{Result, RnmError, Violation};
pub use expression::{enumerate_mu, evaluate_mu, mu_bounds, sample_points, MuSet, SampleGrid};
pub use model::{
    scenario_d, state_interval, validate_spec, ConditionalDistribution, Cpt, ExpressionKind,
    GenerationParams, ParentConfiguration, RankedFragment, StateInterval, WeightExpression,
};
pub use truncnorm::{normal_mass, partition_masses, tnorm_mass, TruncNormParams};
