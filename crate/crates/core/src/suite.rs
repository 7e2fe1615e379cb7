//! Randomized property suites over generated distributions.
//!
//! Each trial draws an equal-state fragment, an expression with feasible
//! weights, a configuration, a variance and a sample size, then checks
//! normalization, the width of the mean range, its agreement with the corner
//! bounds, and adjacency of the two most probable child states. A second
//! family of trials checks when WMIN in the low-parent scenario reduces to a
//! WMEAN.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    beta_weights, consecutive_top2_of, mode_pair_of, wmin_argmin_check, wmin_failure_witness,
    wmin_reduces,
};
use crate::error::Result;
use crate::experiments::Budget;
use crate::expression::{enumerate_mu, mu_bounds};
use crate::model::{
    ExpressionKind, GenerationParams, ParentConfiguration, RankedFragment, WeightExpression,
};

pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;
pub const RANGE_TOLERANCE: f64 = 1e-12;
pub const REDUCTION_TOLERANCE: f64 = 1e-12;

/// One randomized generator input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyCase {
    pub m: usize,
    pub spec: WeightExpression,
    pub config: Vec<usize>,
    pub variance: f64,
    pub s: usize,
}

impl PropertyCase {
    pub fn n(&self) -> usize {
        self.config.len()
    }

    /// Draws a case with `m` in 3..=7, `n` in 2..=4, `s` in {3, 5} and
    /// variance uniform on `[5e-4, 0.25]`.
    pub fn draw(rng: &mut impl Rng) -> Self {
        let m = rng.random_range(3..=7);
        let n = rng.random_range(2..=4);
        let s = if rng.random::<bool>() { 3 } else { 5 };
        let variance = rng.random_range(5e-4..=0.25);
        let kind = ExpressionKind::ALL[rng.random_range(0..4)];
        let spec = draw_weights(rng, kind, n);
        let config = (0..n).map(|_| rng.random_range(1..=m)).collect();
        Self {
            m,
            spec,
            config,
            variance,
            s,
        }
    }
}

/// Feasible weights of `kind` for `n` parents.
pub fn draw_weights(rng: &mut impl Rng, kind: ExpressionKind, n: usize) -> WeightExpression {
    match kind {
        ExpressionKind::Wmean => {
            let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
            let total: f64 = raw.iter().sum();
            WeightExpression::Wmean(raw.iter().map(|v| v / total).collect())
        }
        ExpressionKind::Wmin | ExpressionKind::Wmax => {
            let w: Vec<f64> = (0..n)
                .map(|_| 10f64.powf(2.0 * rng.random::<f64>()))
                .collect();
            if kind == ExpressionKind::Wmin {
                WeightExpression::Wmin(w)
            } else {
                WeightExpression::Wmax(w)
            }
        }
        ExpressionKind::MixMinMax => WeightExpression::mix_from_max(rng.random()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Property {
    Normalization,
    MeanRange,
    MeanBounds,
    ConsecutiveTop2,
    WminReduction,
    WminThreshold,
}

impl Property {
    pub fn name(self) -> &'static str {
        match self {
            Property::Normalization => "normalization",
            Property::MeanRange => "mean-range",
            Property::MeanBounds => "mean-bounds",
            Property::ConsecutiveTop2 => "consecutive-top2",
            Property::WminReduction => "wmin-reduction",
            Property::WminThreshold => "wmin-threshold",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub trial: usize,
    pub property: Property,
    pub case: PropertyCase,
    pub detail: String,
}

/// Outcome of one generator trial.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseOutcome {
    pub distribution: Vec<f64>,
    pub mu_range: f64,
    pub failures: Vec<(Property, String)>,
}

/// Checks one case. With `mutate`, the mode's probability is swapped with
/// the state farthest from the runner-up before the adjacency check, which
/// lets callers confirm the harness reports failures.
pub fn check_case(case: &PropertyCase, mutate: bool) -> Result<CaseOutcome> {
    let fragment = RankedFragment::uniform(case.n(), case.m)?;
    let config = ParentConfiguration::new(case.config.clone(), &fragment)?;
    let params = GenerationParams::new(case.variance, case.s)?;
    let mut p =
        crate::cpt::generate_distribution(&case.spec, &fragment, &config, &params)?.into_vec();
    let mut failures = Vec::new();

    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE || p.iter().any(|v| !(0.0..=1.0).contains(v)) {
        failures.push((Property::Normalization, format!("sum {sum:.17e}")));
    }

    let mu = enumerate_mu(&case.spec, &fragment, &config, case.s)?;
    let range = mu.range();
    let width = 1.0 / case.m as f64;
    if (range - width).abs() > RANGE_TOLERANCE {
        failures.push((
            Property::MeanRange,
            format!("range {range:.17e}, expected {width:.17e}"),
        ));
    }
    let (lo, hi) = mu_bounds(&case.spec, &fragment, &config)?;
    if (mu.min() - lo).abs() > RANGE_TOLERANCE || (mu.max() - hi).abs() > RANGE_TOLERANCE {
        failures.push((
            Property::MeanBounds,
            format!(
                "enumerated [{}, {}], corners [{lo}, {hi}]",
                mu.min(),
                mu.max()
            ),
        ));
    }

    if mutate {
        let pair = mode_pair_of(&p)?;
        let far = (0..p.len())
            .max_by_key(|&k| (k.abs_diff(pair.runner_up - 1), std::cmp::Reverse(k)))
            .expect("non-empty");
        p.swap(pair.mode - 1, far);
    }
    if !consecutive_top2_of(&p) {
        let pair = mode_pair_of(&p)?;
        failures.push((Property::ConsecutiveTop2, format!("mode pair {pair}")));
    }
    Ok(CaseOutcome {
        distribution: p,
        mu_range: range,
        failures,
    })
}

/// A WMIN weight vector for the low-parent scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionCase {
    pub m: usize,
    pub weights: Vec<f64>,
    pub low_parent: usize,
    pub variance: f64,
}

impl ReductionCase {
    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn threshold(&self) -> Option<f64> {
        (self.n() > self.m && self.m >= 3).then(|| (self.n() - 2) as f64 / (self.m - 2) as f64)
    }

    /// `n <= m` with `m` in 3..=7 and `n` at most 5.
    pub fn draw_small(rng: &mut impl Rng) -> Self {
        let m = rng.random_range(3..=7);
        let n = rng.random_range(2..=m.min(5));
        Self::draw_weights(rng, m, n, None)
    }

    /// `n > m >= 3` with `n` at most 7; `w_i` lands on either side of the
    /// threshold with equal probability.
    pub fn draw_large(rng: &mut impl Rng) -> Self {
        let m = rng.random_range(3..=5);
        let n = rng.random_range(m + 1..=7);
        let t = (n - 2) as f64 / (m - 2) as f64;
        let wi = if rng.random::<bool>() {
            t * (1.0 + rng.random::<f64>())
        } else {
            1.0 + (t - 1.0) * rng.random::<f64>()
        };
        Self::draw_weights(rng, m, n, Some(wi))
    }

    fn draw_weights(rng: &mut impl Rng, m: usize, n: usize, wi: Option<f64>) -> Self {
        let low_parent = rng.random_range(1..=n);
        let mut weights: Vec<f64> = (0..n)
            .map(|_| 10f64.powf(2.0 * rng.random::<f64>()))
            .collect();
        if let Some(wi) = wi {
            weights[low_parent - 1] = wi;
        }
        Self {
            m,
            weights,
            low_parent,
            variance: rng.random_range(5e-4..=0.25),
        }
    }
}

/// Sample size of the reduction trials in [`run_property_suite`].
pub const REDUCTION_SAMPLE_SIZE: usize = 3;

/// Checks the WMIN reduction for one case. Returns the failures found.
pub fn check_reduction(case: &ReductionCase, s: usize) -> Result<Vec<(Property, String)>> {
    let (n, m, i) = (case.n(), case.m, case.low_parent);
    let wi = case.weights[i - 1];
    let mut failures = Vec::new();
    let reduces = wmin_reduces(n, m, wi)?;
    if let Some(t) = case.threshold() {
        if reduces != (wi >= t) {
            failures.push((
                Property::WminThreshold,
                format!("w_i {wi} vs threshold {t}"),
            ));
        }
        if !reduces {
            match wmin_failure_witness(n, m, wi, i)? {
                None => failures.push((Property::WminThreshold, "no failure witness".into())),
                Some(wit) => {
                    if wmin_argmin_check(&wit.weights, i, m, 2)?.holds() {
                        failures.push((
                            Property::WminThreshold,
                            format!("witness {:?} does not break the argmin", wit.weights),
                        ));
                    }
                }
            }
            return Ok(failures);
        }
        if wmin_failure_witness(n, m, wi, i)?.is_some() {
            failures.push((
                Property::WminThreshold,
                "witness above the threshold".into(),
            ));
        }
    }
    let check = wmin_argmin_check(&case.weights, i, m, s)?;
    if !check.holds() {
        failures.push((
            Property::WminReduction,
            format!(
                "{} of {} combinations",
                check.violations, check.combinations
            ),
        ));
    }
    let beta = beta_weights(&case.weights, i, m)?;
    let a = crate::analysis::scenario_distribution(
        &WeightExpression::Wmin(case.weights.clone()),
        n,
        m,
        i,
        case.variance,
        s,
    )?;
    let b = crate::analysis::scenario_distribution(
        &WeightExpression::Wmean(beta),
        n,
        m,
        i,
        case.variance,
        s,
    )?;
    let diff = a.max_abs_diff(&b);
    if diff > REDUCTION_TOLERANCE {
        failures.push((
            Property::WminReduction,
            format!("distribution gap {diff:e}"),
        ));
    }
    Ok(failures)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub trials: usize,
    pub seed: u64,
    pub mutate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionCounterexample {
    pub trial: usize,
    pub property: Property,
    pub case: ReductionCase,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub trials_run: usize,
    pub reduction_trials_run: usize,
    pub counterexamples: Vec<Counterexample>,
    pub reduction_counterexamples: Vec<ReductionCounterexample>,
    pub complete: bool,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty() && self.reduction_counterexamples.is_empty()
    }
}

/// Stream offsets keep the two trial families on disjoint RNG streams.
const REDUCTION_STREAM: u64 = 1 << 32;

/// Runs `trials` generator trials and `max(1, trials / 5)` reduction trials,
/// alternating the `n <= m` and `n > m` families.
pub fn run_property_suite(config: &SuiteConfig, budget: &Budget) -> Result<SuiteReport> {
    let outcomes: Vec<Option<Vec<Counterexample>>> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            if budget.exceeded() {
                return Ok(None);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(t as u64);
            let case = PropertyCase::draw(&mut rng);
            let out = check_case(&case, config.mutate)?;
            Ok(Some(
                out.failures
                    .into_iter()
                    .map(|(property, detail)| Counterexample {
                        trial: t,
                        property,
                        case: case.clone(),
                        detail,
                    })
                    .collect(),
            ))
        })
        .collect::<Result<_>>()?;
    let reduction_trials = (config.trials / 5).max(1);
    let reductions: Vec<Option<Vec<ReductionCounterexample>>> = (0..reduction_trials)
        .into_par_iter()
        .map(|t| {
            if budget.exceeded() {
                return Ok(None);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(REDUCTION_STREAM + t as u64);
            let case = if t % 2 == 0 {
                ReductionCase::draw_small(&mut rng)
            } else {
                ReductionCase::draw_large(&mut rng)
            };
            let failures = check_reduction(&case, REDUCTION_SAMPLE_SIZE)?;
            Ok(Some(
                failures
                    .into_iter()
                    .map(|(property, detail)| ReductionCounterexample {
                        trial: t,
                        property,
                        case: case.clone(),
                        detail,
                    })
                    .collect(),
            ))
        })
        .collect::<Result<_>>()?;
    let complete = outcomes.iter().all(Option::is_some) && reductions.iter().all(Option::is_some);
    Ok(SuiteReport {
        config: *config,
        trials_run: outcomes.iter().flatten().count(),
        reduction_trials_run: reductions.iter().flatten().count(),
        counterexamples: outcomes.into_iter().flatten().flatten().collect(),
        reduction_counterexamples: reductions.into_iter().flatten().flatten().collect(),
        complete,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes_and_mutation_fails() {
        let config = SuiteConfig {
            trials: 60,
            seed: 3,
            mutate: false,
        };
        let rep = run_property_suite(&config, &Budget::unlimited()).unwrap();
        assert!(rep.passed(), "{:?}", rep.counterexamples.first());
        assert_eq!(rep.trials_run, 60);
        let rep = run_property_suite(
            &SuiteConfig {
                mutate: true,
                ..config
            },
            &Budget::unlimited(),
        )
        .unwrap();
        assert!(rep
            .counterexamples
            .iter()
            .any(|c| c.property == Property::ConsecutiveTop2));
    }
}
