//! Structural checks on generated distributions and the weight values at
//! which the two most probable child states change.
//!
//! Everything here works on fragments whose parents and child share one state
//! count `m`, and most of it on the scenario where one parent sits at its
//! lowest state and every other parent at its highest.

mod mix;
mod wmean;
mod wmin;

pub use mix::{bisect_wmax, d_mix, mixminmax_weight_interval, signed_d_mix};
pub use wmean::{
    d_flank, d_rnm, d_ub, h_function, wmean_equal_pair_weight, wmean_flank_pair_weight,
    wmean_weight_interval,
};
pub use wmin::{
    beta_weights, wmin_argmin_check, wmin_failure_witness, wmin_reduces, ArgminCheck,
    FailureWitness,
};

use serde::{Deserialize, Serialize};

use crate::cpt::distribution_on_grid;
use crate::error::{argument, Result};
use crate::expression::SampleGrid;
use crate::model::{
    scenario_d, ConditionalDistribution, GenerationParams, RankedFragment, WeightExpression,
};

/// Tolerance under which a probability counts as tied with the runner-up.
pub const RUNNER_UP_TOLERANCE: f64 = 1e-12;

/// The most probable child state and the second most probable one, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModePair {
    pub mode: usize,
    pub runner_up: usize,
}

impl ModePair {
    pub fn new(mode: usize, runner_up: usize) -> Result<Self> {
        if mode == 0 || runner_up == 0 || mode == runner_up {
            return Err(argument(format!(
                "({mode}, {runner_up}) is not a pair of distinct 1-based states"
            )));
        }
        Ok(Self { mode, runner_up })
    }

    pub fn is_adjacent(&self) -> bool {
        self.mode.abs_diff(self.runner_up) == 1
    }
}

impl std::fmt::Display for ModePair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.mode, self.runner_up)
    }
}

/// Range of one weight that yields `target_pair`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightInterval {
    pub lower: f64,
    pub upper: f64,
    pub target_pair: ModePair,
}

impl WeightInterval {
    pub fn contains(&self, w: f64) -> bool {
        self.lower <= w && w <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Index of the largest entry, the first one on ties.
fn argmax_excluding(p: &[f64], skip: Option<usize>) -> usize {
    let mut best = usize::MAX;
    for (k, &v) in p.iter().enumerate() {
        if Some(k) == skip {
            continue;
        }
        if best == usize::MAX || v > p[best] {
            best = k;
        }
    }
    best
}

/// Largest and second-largest probabilities; ties go to the lower state.
pub fn mode_pair(dist: &ConditionalDistribution) -> Result<ModePair> {
    mode_pair_of(dist.probabilities())
}

pub(crate) fn mode_pair_of(p: &[f64]) -> Result<ModePair> {
    if p.len() < 2 {
        return Err(argument("a mode pair needs at least two child states"));
    }
    let mode = argmax_excluding(p, None);
    let runner_up = argmax_excluding(p, Some(mode));
    Ok(ModePair {
        mode: mode + 1,
        runner_up: runner_up + 1,
    })
}

/// Whether the two most probable states are neighbours. Every state within
/// [`RUNNER_UP_TOLERANCE`] of the runner-up is accepted as the runner-up.
pub fn check_consecutive_top2(dist: &ConditionalDistribution) -> bool {
    consecutive_top2_of(dist.probabilities())
}

pub(crate) fn consecutive_top2_of(p: &[f64]) -> bool {
    let Ok(pair) = mode_pair_of(p) else {
        return false;
    };
    let mode = pair.mode - 1;
    let cut = p[pair.runner_up - 1] - RUNNER_UP_TOLERANCE;
    p.iter()
        .enumerate()
        .any(|(k, &v)| k != mode && v >= cut && k.abs_diff(mode) == 1)
}

/// Child distribution in the scenario where parent `i` is at state 1 and the
/// rest at state `m`, for an `n`-parent fragment with `m` states everywhere.
pub fn scenario_distribution(
    spec: &WeightExpression,
    n: usize,
    m: usize,
    i: usize,
    variance: f64,
    s: usize,
) -> Result<ConditionalDistribution> {
    let fragment = RankedFragment::uniform(n, m)?;
    let config = scenario_d(i, &fragment)?;
    let params = GenerationParams::new(variance, s)?;
    crate::cpt::generate_distribution(spec, &fragment, &config, &params)
}

/// Unchecked variant for sweeps whose inputs were validated once.
pub(crate) struct Scenario {
    grid: SampleGrid,
    m: usize,
}

impl Scenario {
    pub(crate) fn new(n: usize, m: usize, i: usize, s: usize, cap: u64) -> Result<Self> {
        let fragment = RankedFragment::uniform(n, m)?;
        let config = scenario_d(i, &fragment)?;
        GenerationParams::new(1.0, s)?
            .with_max_combinations(cap)
            .check_cap((s as u128).saturating_pow(n as u32))?;
        Ok(Self {
            grid: SampleGrid::new(&fragment, &config, s)?,
            m,
        })
    }

    pub(crate) fn distribution(&self, spec: &WeightExpression, variance: f64) -> Vec<f64> {
        distribution_on_grid(spec, &self.grid, self.m, variance)
    }
}

pub(crate) fn check_equal_m_index(m: usize, k: usize, what: &str) -> Result<()> {
    if m < 2 {
        return Err(argument(format!("state count {m} is below 2")));
    }
    if k == 0 || k > m {
        return Err(argument(format!("{what} {k} outside 1..={m}")));
    }
    Ok(())
}
