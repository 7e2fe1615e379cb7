//! Domain types for ranked-node fragments.
//!
//! State and parent indices are 1-based throughout the public API: state `k`
//! of an `m`-state node owns the interval `[(k-1)/m, k/m]`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{argument, Result, RnmError, Violation};

/// Absolute tolerance on the WMEAN sum and MIXMINMAX complement constraints.
pub const WEIGHT_TOLERANCE: f64 = 1e-9;

/// Default cap on the number of enumerated sample combinations.
pub const DEFAULT_MAX_COMBINATIONS: u64 = 10_000_000;

/// A child node together with its ranked parents.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RankedFragment {
    parent_states: Vec<usize>,
    child_states: usize,
}

impl RankedFragment {
    pub fn new(parent_states: Vec<usize>, child_states: usize) -> Result<Self> {
        if parent_states.is_empty() {
            return Err(argument("a fragment needs at least one parent"));
        }
        if let Some((i, m)) = parent_states.iter().enumerate().find(|(_, &m)| m < 2) {
            return Err(argument(format!(
                "parent {} has {m} states, at least 2 are required",
                i + 1
            )));
        }
        if child_states < 2 {
            return Err(argument(format!(
                "child has {child_states} states, at least 2 are required"
            )));
        }
        Ok(Self {
            parent_states,
            child_states,
        })
    }

    /// `n` parents and a child, all with `m` states.
    pub fn uniform(n: usize, m: usize) -> Result<Self> {
        Self::new(vec![m; n], m)
    }

    pub fn parent_count(&self) -> usize {
        self.parent_states.len()
    }

    pub fn parent_states(&self) -> &[usize] {
        &self.parent_states
    }

    pub fn child_states(&self) -> usize {
        self.child_states
    }

    /// The common state count when every node has the same number of states.
    pub fn common_states(&self) -> Option<usize> {
        let m = self.child_states;
        self.parent_states.iter().all(|&mi| mi == m).then_some(m)
    }

    pub fn require_common_states(&self) -> Result<usize> {
        self.common_states().ok_or_else(|| {
            RnmError::Unsupported(format!(
                "all nodes must share one state count (parents {:?}, child {})",
                self.parent_states, self.child_states
            ))
        })
    }

    /// Number of parent configurations, i.e. CPT columns.
    pub fn configuration_count(&self) -> u128 {
        self.parent_states.iter().map(|&m| m as u128).product()
    }

    /// All parent configurations in lexicographic order, parent 1 slowest.
    pub fn configurations(&self) -> Configurations<'_> {
        Configurations {
            fragment: self,
            next: Some(vec![1; self.parent_count()]),
        }
    }

    /// Position of `config` in [`configurations`](Self::configurations) order.
    pub fn configuration_index(&self, config: &ParentConfiguration) -> usize {
        config
            .states()
            .iter()
            .zip(&self.parent_states)
            .fold(0, |acc, (&k, &m)| acc * m + (k - 1))
    }
}

pub struct Configurations<'a> {
    fragment: &'a RankedFragment,
    next: Option<Vec<usize>>,
}

impl Iterator for Configurations<'_> {
    type Item = ParentConfiguration;

    fn next(&mut self) -> Option<Self::Item> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut done = true;
        for (k, &m) in succ.iter_mut().zip(&self.fragment.parent_states).rev() {
            if *k < m {
                *k += 1;
                done = false;
                break;
            }
            *k = 1;
        }
        if !done {
            self.next = Some(succ);
        }
        Some(ParentConfiguration(current))
    }
}

/// The sub-interval of `[0, 1]` associated with one node state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateInterval {
    pub lower: f64,
    pub upper: f64,
}

impl StateInterval {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// State interval `[(k-1)/m, k/m]` of the `k`-th state of an `m`-state node.
pub fn state_interval(k: usize, m: usize) -> Result<StateInterval> {
    if m < 2 {
        return Err(argument(format!("state count {m} is below 2")));
    }
    if k == 0 || k > m {
        return Err(argument(format!("state index {k} outside 1..={m}")));
    }
    Ok(StateInterval {
        lower: (k - 1) as f64 / m as f64,
        upper: k as f64 / m as f64,
    })
}

/// One state index per parent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ParentConfiguration(Vec<usize>);

impl ParentConfiguration {
    pub fn new(states: Vec<usize>, fragment: &RankedFragment) -> Result<Self> {
        if states.len() != fragment.parent_count() {
            return Err(argument(format!(
                "configuration has {} entries for {} parents",
                states.len(),
                fragment.parent_count()
            )));
        }
        for (i, (&k, &m)) in states.iter().zip(fragment.parent_states()).enumerate() {
            if k == 0 || k > m {
                return Err(argument(format!(
                    "parent {} state {k} outside 1..={m}",
                    i + 1
                )));
            }
        }
        Ok(Self(states))
    }

    pub fn states(&self) -> &[usize] {
        &self.0
    }

    pub fn into_states(self) -> Vec<usize> {
        self.0
    }
}

impl fmt::Display for ParentConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, ")")
    }
}

/// Scenario `x^{D,i}`: parent `i` in its lowest state, every other parent in
/// its highest state.
pub fn scenario_d(i: usize, fragment: &RankedFragment) -> Result<ParentConfiguration> {
    let m = fragment.require_common_states()?;
    let n = fragment.parent_count();
    if i == 0 || i > n {
        return Err(argument(format!("parent index {i} outside 1..={n}")));
    }
    let states = (1..=n).map(|j| if j == i { 1 } else { m }).collect();
    Ok(ParentConfiguration(states))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpressionKind {
    Wmean,
    Wmin,
    Wmax,
    MixMinMax,
}

impl ExpressionKind {
    pub const ALL: [ExpressionKind; 4] = [
        ExpressionKind::Wmean,
        ExpressionKind::Wmin,
        ExpressionKind::Wmax,
        ExpressionKind::MixMinMax,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExpressionKind::Wmean => "WMEAN",
            ExpressionKind::Wmin => "WMIN",
            ExpressionKind::Wmax => "WMAX",
            ExpressionKind::MixMinMax => "MIXMINMAX",
        }
    }
}

impl fmt::Display for ExpressionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ExpressionKind {
    type Err = RnmError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "wmean" => Ok(ExpressionKind::Wmean),
            "wmin" => Ok(ExpressionKind::Wmin),
            "wmax" => Ok(ExpressionKind::Wmax),
            "mixminmax" => Ok(ExpressionKind::MixMinMax),
            other => Err(argument(format!("unknown weight expression `{other}`"))),
        }
    }
}

/// A weight expression together with its weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum WeightExpression {
    Wmean(Vec<f64>),
    Wmin(Vec<f64>),
    Wmax(Vec<f64>),
    MixMinMax { w_min: f64, w_max: f64 },
}

impl WeightExpression {
    /// Builds an expression from a tag and a flat weight list. MIXMINMAX takes
    /// `[w_min, w_max]`.
    pub fn from_parts(kind: ExpressionKind, weights: Vec<f64>) -> Result<Self, Violation> {
        Ok(match kind {
            ExpressionKind::Wmean => WeightExpression::Wmean(weights),
            ExpressionKind::Wmin => WeightExpression::Wmin(weights),
            ExpressionKind::Wmax => WeightExpression::Wmax(weights),
            ExpressionKind::MixMinMax => {
                if weights.len() != 2 {
                    return Err(Violation::Arity {
                        expression: "MIXMINMAX",
                        expected: 2,
                        found: weights.len(),
                    });
                }
                WeightExpression::MixMinMax {
                    w_min: weights[0],
                    w_max: weights[1],
                }
            }
        })
    }

    /// MIXMINMAX parameterized by `w_max` alone.
    pub fn mix_from_max(w_max: f64) -> Self {
        WeightExpression::MixMinMax {
            w_min: 1.0 - w_max,
            w_max,
        }
    }

    pub fn kind(&self) -> ExpressionKind {
        match self {
            WeightExpression::Wmean(_) => ExpressionKind::Wmean,
            WeightExpression::Wmin(_) => ExpressionKind::Wmin,
            WeightExpression::Wmax(_) => ExpressionKind::Wmax,
            WeightExpression::MixMinMax { .. } => ExpressionKind::MixMinMax,
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        match self {
            WeightExpression::Wmean(w) | WeightExpression::Wmin(w) | WeightExpression::Wmax(w) => {
                w.clone()
            }
            WeightExpression::MixMinMax { w_min, w_max } => vec![*w_min, *w_max],
        }
    }

    /// Checks the weights against the feasible set of the expression and the
    /// parent count of `fragment`.
    pub fn validate(&self, fragment: &RankedFragment) -> Result<(), Violation> {
        let n = fragment.parent_count();
        let check_finite = |w: &[f64]| {
            w.iter()
                .enumerate()
                .find(|(_, v)| !v.is_finite())
                .map(|(i, &value)| Violation::NotFinite {
                    index: i + 1,
                    value,
                })
        };
        match self {
            WeightExpression::Wmean(w) => {
                arity("WMEAN", n, w.len())?;
                if let Some(v) = check_finite(w) {
                    return Err(v);
                }
                if let Some((i, &value)) = w
                    .iter()
                    .enumerate()
                    .find(|(_, &v)| !(0.0..=1.0).contains(&v))
                {
                    return Err(Violation::WmeanRange {
                        index: i + 1,
                        value,
                    });
                }
                let sum: f64 = w.iter().sum();
                if (sum - 1.0).abs() > WEIGHT_TOLERANCE {
                    return Err(Violation::WmeanSum { sum });
                }
            }
            WeightExpression::Wmin(w) | WeightExpression::Wmax(w) => {
                let expression = self.kind().name();
                arity(expression, n, w.len())?;
                if let Some(v) = check_finite(w) {
                    return Err(v);
                }
                if let Some((i, &value)) = w.iter().enumerate().find(|(_, &v)| v < 1.0) {
                    return Err(Violation::BelowOne {
                        expression,
                        index: i + 1,
                        value,
                    });
                }
            }
            WeightExpression::MixMinMax { w_min, w_max } => {
                if let Some(v) = check_finite(&[*w_min, *w_max]) {
                    return Err(v);
                }
                if !(0.0..=1.0).contains(w_min) {
                    return Err(Violation::MixRange { value: *w_min });
                }
                if (w_max - (1.0 - w_min)).abs() > WEIGHT_TOLERANCE {
                    return Err(Violation::MixComplement {
                        w_min: *w_min,
                        w_max: *w_max,
                    });
                }
            }
        }
        Ok(())
    }
}

fn arity(expression: &'static str, expected: usize, found: usize) -> Result<(), Violation> {
    if expected == found {
        Ok(())
    } else {
        Err(Violation::Arity {
            expression,
            expected,
            found,
        })
    }
}

/// Pure feasibility predicate for `spec` on `fragment`.
pub fn validate_spec(spec: &WeightExpression, fragment: &RankedFragment) -> Result<(), Violation> {
    spec.validate(fragment)
}

/// Variance and sample size of the generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationParams {
    variance: f64,
    sample_size: usize,
    max_combinations: u64,
}

impl GenerationParams {
    /// `s >= 2` is accepted; the structural guarantees (mode-pair adjacency)
    /// are stated for `s >= 3`.
    pub fn new(variance: f64, sample_size: usize) -> Result<Self> {
        if !(variance.is_finite() && variance > 0.0) {
            return Err(argument(format!(
                "variance must be positive, got {variance}"
            )));
        }
        if sample_size < 2 {
            return Err(argument(format!(
                "sample size must be at least 2, got {sample_size}"
            )));
        }
        Ok(Self {
            variance,
            sample_size,
            max_combinations: DEFAULT_MAX_COMBINATIONS,
        })
    }

    pub fn with_max_combinations(mut self, cap: u64) -> Self {
        self.max_combinations = cap;
        self
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn sample_size(&self) -> usize {
        self.sample_size
    }

    pub fn max_combinations(&self) -> u64 {
        self.max_combinations
    }

    pub(crate) fn check_cap(&self, required: u128) -> Result<()> {
        if required > self.max_combinations as u128 {
            Err(RnmError::Resource {
                required,
                cap: self.max_combinations,
            })
        } else {
            Ok(())
        }
    }
}

/// Probability vector over the child states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalDistribution(Vec<f64>);

impl ConditionalDistribution {
    /// Validates entries in `[0, 1]` summing to one within 1e-9.
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.len() < 2 {
            return Err(argument("a distribution needs at least two states"));
        }
        if let Some(p) = probabilities
            .iter()
            .find(|p| !(p.is_finite() && (0.0..=1.0).contains(*p)))
        {
            return Err(argument(format!("probability {p} outside [0, 1]")));
        }
        let sum: f64 = probabilities.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(argument(format!("probabilities sum to {sum}")));
        }
        Ok(Self(probabilities))
    }

    pub(crate) fn from_raw(probabilities: Vec<f64>) -> Self {
        Self(probabilities)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Probability of 1-based state `k`.
    pub fn get(&self, k: usize) -> Option<f64> {
        k.checked_sub(1).and_then(|i| self.0.get(i)).copied()
    }

    pub fn max_abs_diff(&self, other: &ConditionalDistribution) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// A full conditional probability table, one column per configuration in
/// lexicographic order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cpt {
    fragment: RankedFragment,
    columns: Vec<(ParentConfiguration, ConditionalDistribution)>,
}

impl Cpt {
    pub(crate) fn from_columns(
        fragment: RankedFragment,
        columns: Vec<(ParentConfiguration, ConditionalDistribution)>,
    ) -> Self {
        debug_assert_eq!(columns.len() as u128, fragment.configuration_count());
        Self { fragment, columns }
    }

    pub fn fragment(&self) -> &RankedFragment {
        &self.fragment
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn get(&self, config: &ParentConfiguration) -> Option<&ConditionalDistribution> {
        let idx = self.fragment.configuration_index(config);
        self.columns
            .get(idx)
            .filter(|(c, _)| c == config)
            .map(|(_, d)| d)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ParentConfiguration, &ConditionalDistribution)> {
        self.columns.iter().map(|(c, d)| (c, d))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_interval_examples() {
        let iv = state_interval(1, 3).unwrap();
        assert_eq!((iv.lower, iv.upper), (0.0, 1.0 / 3.0));
        let iv = state_interval(5, 5).unwrap();
        assert_eq!((iv.lower, iv.upper), (0.8, 1.0));
        let iv = state_interval(2, 4).unwrap();
        assert_eq!((iv.lower, iv.upper), (0.25, 0.5));
    }

    #[test]
    fn state_interval_rejects_bad_indices() {
        assert!(state_interval(0, 3).is_err());
        assert!(state_interval(4, 3).is_err());
        assert!(state_interval(1, 1).is_err());
    }

    #[test]
    fn consecutive_intervals_share_endpoints() {
        for m in 2..=12 {
            let ivs: Vec<_> = (1..=m).map(|k| state_interval(k, m).unwrap()).collect();
            assert_eq!(ivs[0].lower, 0.0);
            assert_eq!(ivs[m - 1].upper, 1.0);
            for w in ivs.windows(2) {
                assert_eq!(w[0].upper, w[1].lower);
            }
            for iv in &ivs {
                assert!((iv.width() - 1.0 / m as f64).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn scenario_examples() {
        let f = RankedFragment::uniform(3, 4).unwrap();
        assert_eq!(scenario_d(2, &f).unwrap().states(), &[4, 1, 4]);
        let f = RankedFragment::uniform(1, 3).unwrap();
        assert_eq!(scenario_d(1, &f).unwrap().states(), &[1]);
        let f = RankedFragment::uniform(3, 5).unwrap();
        assert_eq!(scenario_d(3, &f).unwrap().states(), &[5, 5, 1]);
    }

    #[test]
    fn scenarios_differ_in_two_positions() {
        let f = RankedFragment::uniform(5, 4).unwrap();
        for i in 1..=5 {
            for j in (1..=5).filter(|&j| j != i) {
                let a = scenario_d(i, &f).unwrap();
                let b = scenario_d(j, &f).unwrap();
                let diff = a
                    .states()
                    .iter()
                    .zip(b.states())
                    .filter(|(x, y)| x != y)
                    .count();
                assert_eq!(diff, 2);
            }
        }
    }

    #[test]
    fn scenario_requires_equal_states() {
        let f = RankedFragment::new(vec![3, 4], 3).unwrap();
        assert!(matches!(scenario_d(1, &f), Err(RnmError::Unsupported(_))));
        let f = RankedFragment::uniform(2, 3).unwrap();
        assert!(scenario_d(3, &f).is_err());
    }

    #[test]
    fn validate_examples() {
        let f2 = RankedFragment::uniform(2, 3).unwrap();
        assert!(validate_spec(&WeightExpression::Wmean(vec![0.3, 0.7]), &f2).is_ok());
        let err = validate_spec(&WeightExpression::Wmin(vec![0.5, 2.0]), &f2).unwrap_err();
        assert_eq!(
            err,
            Violation::BelowOne {
                expression: "WMIN",
                index: 1,
                value: 0.5
            }
        );
        let mix = WeightExpression::MixMinMax {
            w_min: 0.25,
            w_max: 0.75,
        };
        assert!(validate_spec(&mix, &f2).is_ok());
        // MIXMINMAX carries two weights whatever the parent count.
        let f5 = RankedFragment::uniform(5, 3).unwrap();
        assert!(validate_spec(&mix, &f5).is_ok());
    }

    #[test]
    fn validate_reports_each_constraint() {
        let f = RankedFragment::uniform(2, 3).unwrap();
        assert!(matches!(
            validate_spec(&WeightExpression::Wmean(vec![0.29, 0.7]), &f),
            Err(Violation::WmeanSum { .. })
        ));
        assert!(matches!(
            validate_spec(&WeightExpression::Wmean(vec![-0.5, 1.5]), &f),
            Err(Violation::WmeanRange { index: 1, .. })
        ));
        assert!(matches!(
            validate_spec(&WeightExpression::Wmean(vec![1.0]), &f),
            Err(Violation::Arity {
                expected: 2,
                found: 1,
                ..
            })
        ));
        assert!(matches!(
            validate_spec(&WeightExpression::Wmax(vec![1.0, 0.99]), &f),
            Err(Violation::BelowOne { index: 2, .. })
        ));
        assert!(matches!(
            validate_spec(
                &WeightExpression::MixMinMax {
                    w_min: 0.3,
                    w_max: 0.6
                },
                &f
            ),
            Err(Violation::MixComplement { .. })
        ));
        assert!(matches!(
            validate_spec(
                &WeightExpression::MixMinMax {
                    w_min: 1.2,
                    w_max: -0.2
                },
                &f
            ),
            Err(Violation::MixRange { .. })
        ));
        assert!(matches!(
            WeightExpression::from_parts(ExpressionKind::MixMinMax, vec![0.2, 0.3, 0.5]),
            Err(Violation::Arity {
                expected: 2,
                found: 3,
                ..
            })
        ));
        // Sum tolerance is 1e-9 absolute.
        assert!(validate_spec(&WeightExpression::Wmean(vec![0.3, 0.7 + 5e-10]), &f).is_ok());
        assert!(validate_spec(&WeightExpression::Wmean(vec![0.3, 0.7 + 5e-9]), &f).is_err());
    }

    #[test]
    fn configurations_are_lexicographic() {
        let f = RankedFragment::new(vec![2, 3], 2).unwrap();
        let all: Vec<Vec<usize>> = f.configurations().map(|c| c.into_states()).collect();
        assert_eq!(
            all,
            vec![
                vec![1, 1],
                vec![1, 2],
                vec![1, 3],
                vec![2, 1],
                vec![2, 2],
                vec![2, 3]
            ]
        );
        for (idx, c) in f.configurations().enumerate() {
            assert_eq!(f.configuration_index(&c), idx);
        }
    }

    #[test]
    fn fragment_invariants() {
        assert!(RankedFragment::new(vec![], 3).is_err());
        assert!(RankedFragment::new(vec![3, 1], 3).is_err());
        assert!(RankedFragment::new(vec![3], 1).is_err());
        assert_eq!(
            RankedFragment::uniform(3, 4).unwrap().common_states(),
            Some(4)
        );
        assert_eq!(
            RankedFragment::new(vec![4, 4], 3).unwrap().common_states(),
            None
        );
    }

    #[test]
    fn generation_params_invariants() {
        assert!(GenerationParams::new(0.0, 5).is_err());
        assert!(GenerationParams::new(-1.0, 5).is_err());
        assert!(GenerationParams::new(f64::NAN, 5).is_err());
        assert!(GenerationParams::new(0.1, 1).is_err());
        assert!(GenerationParams::new(0.1, 2).is_ok());
    }

    #[test]
    fn distribution_invariants() {
        assert!(ConditionalDistribution::new(vec![0.5, 0.5]).is_ok());
        assert!(ConditionalDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(ConditionalDistribution::new(vec![1.5, -0.5]).is_err());
        let d = ConditionalDistribution::new(vec![0.2, 0.8]).unwrap();
        assert_eq!(d.get(2), Some(0.8));
        assert_eq!(d.get(0), None);
    }
}
