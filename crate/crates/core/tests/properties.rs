use proptest::prelude::*;

use rnm::analysis::{
    check_consecutive_top2, mode_pair, scenario_distribution, wmean_weight_interval,
};
use rnm::{
    enumerate_mu, generate_distribution, tnorm_mass, ConditionalDistribution, GenerationParams,
    ParentConfiguration, RankedFragment, WeightExpression,
};

fn spec_strategy(n: usize) -> impl Strategy<Value = WeightExpression> {
    let wmean = prop::collection::vec(0.01f64..1.0, n).prop_map(|w| {
        let t: f64 = w.iter().sum();
        WeightExpression::Wmean(w.iter().map(|v| v / t).collect())
    });
    let soft = prop::collection::vec(1.0f64..50.0, n);
    prop_oneof![
        wmean,
        soft.clone().prop_map(WeightExpression::Wmin),
        soft.prop_map(WeightExpression::Wmax),
        (0.0f64..=1.0).prop_map(WeightExpression::mix_from_max),
    ]
}

/// `(m, spec, configuration)` with `n` in 2..=4 and `m` in 3..=6.
fn case_strategy() -> impl Strategy<Value = (usize, WeightExpression, Vec<usize>)> {
    (3usize..=6, 2usize..=4)
        .prop_flat_map(|(m, n)| (Just(m), spec_strategy(n), prop::collection::vec(1..=m, n)))
}

fn expected_state(p: &ConditionalDistribution) -> f64 {
    p.probabilities()
        .iter()
        .enumerate()
        .map(|(k, v)| (k + 1) as f64 * v)
        .sum()
}

fn permuted(spec: &WeightExpression, perm: &[usize]) -> WeightExpression {
    let pick = |w: &[f64]| perm.iter().map(|&j| w[j]).collect::<Vec<_>>();
    match spec {
        WeightExpression::Wmean(w) => WeightExpression::Wmean(pick(w)),
        WeightExpression::Wmin(w) => WeightExpression::Wmin(pick(w)),
        WeightExpression::Wmax(w) => WeightExpression::Wmax(pick(w)),
        mix => mix.clone(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mean_range_is_one_state_width((m, spec, config) in case_strategy(), s in 2usize..=6) {
        let f = RankedFragment::uniform(config.len(), m).unwrap();
        let c = ParentConfiguration::new(config, &f).unwrap();
        let mu = enumerate_mu(&spec, &f, &c, s).unwrap();
        prop_assert!((mu.range() - 1.0 / m as f64).abs() < 1e-12, "range {}", mu.range());
        prop_assert!(mu.min() >= 0.0 && mu.max() <= 1.0);
    }

    #[test]
    fn distributions_are_normalized_with_adjacent_top_two(
        (m, spec, config) in case_strategy(),
        var in 5e-4f64..0.25,
        s in prop::sample::select(vec![3usize, 5]),
    ) {
        let f = RankedFragment::uniform(config.len(), m).unwrap();
        let c = ParentConfiguration::new(config, &f).unwrap();
        let p = generate_distribution(&spec, &f, &c, &GenerationParams::new(var, s).unwrap()).unwrap();
        let sum: f64 = p.probabilities().iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-9);
        prop_assert!(check_consecutive_top2(&p), "{:?}", p.probabilities());
    }

    #[test]
    fn raising_a_parent_never_lowers_the_child(
        (m, spec, config) in case_strategy(),
        var in 5e-4f64..0.25,
        which in 0usize..4,
    ) {
        let i = which % config.len();
        prop_assume!(config[i] < m);
        let f = RankedFragment::uniform(config.len(), m).unwrap();
        let params = GenerationParams::new(var, 3).unwrap();
        let mut up = config.clone();
        up[i] += 1;
        let lo = generate_distribution(&spec, &f, &ParentConfiguration::new(config, &f).unwrap(), &params).unwrap();
        let hi = generate_distribution(&spec, &f, &ParentConfiguration::new(up, &f).unwrap(), &params).unwrap();
        prop_assert!(expected_state(&hi) >= expected_state(&lo) - 1e-12);
    }

    #[test]
    fn parents_are_exchangeable(
        (m, spec, config) in case_strategy(),
        var in 5e-4f64..0.25,
        shift in 1usize..4,
    ) {
        let n = config.len();
        let perm: Vec<usize> = (0..n).map(|j| (j + shift) % n).collect();
        let f = RankedFragment::uniform(n, m).unwrap();
        let params = GenerationParams::new(var, 3).unwrap();
        let a = generate_distribution(&spec, &f, &ParentConfiguration::new(config.clone(), &f).unwrap(), &params).unwrap();
        let moved: Vec<usize> = perm.iter().map(|&j| config[j]).collect();
        let b = generate_distribution(&permuted(&spec, &perm), &f, &ParentConfiguration::new(moved, &f).unwrap(), &params).unwrap();
        prop_assert!(a.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn truncated_masses_add_up(
        cuts in prop::collection::vec(0.0f64..=1.0, 2),
        mean in -0.5f64..1.5,
        var in 1e-4f64..1.0,
    ) {
        let (a, b) = (cuts[0].min(cuts[1]), cuts[0].max(cuts[1]));
        let left = tnorm_mass(0.0, a, mean, var).unwrap();
        let mid = tnorm_mass(a, b, mean, var).unwrap();
        let right = tnorm_mass(b, 1.0, mean, var).unwrap();
        prop_assert!((left + mid + right - 1.0).abs() < 1e-12);
        prop_assert!(tnorm_mass(0.0, b, mean, var).unwrap() >= left - 1e-15);
    }
}

/// Sweeping the low parent's weight: the observed ordered mode pair always
/// has an interval containing the weight.
#[test]
fn wmean_intervals_cover_the_sweep() {
    for m in 3..=6 {
        let var = 0.25 / (m * m) as f64;
        for t in 1..100 {
            let w = t as f64 / 100.0;
            let spec = WeightExpression::Wmean(vec![w, 1.0 - w]);
            let p = scenario_distribution(&spec, 2, m, 1, var, 5).unwrap();
            let pair = mode_pair(&p).unwrap();
            let iv = wmean_weight_interval(m, pair).unwrap();
            assert!(
                iv.lower - 0.02 <= w && w <= iv.upper + 0.02,
                "m={m} w={w}: pair {pair} interval [{}, {}]",
                iv.lower,
                iv.upper
            );
        }
    }
}
