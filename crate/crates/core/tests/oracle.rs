//! Comparisons against independently computed reference values.
//!
//! Frozen constants were computed with 40-digit arbitrary precision
//! arithmetic. The adaptive Simpson rule below integrates the normal density
//! directly and shares no code with the library.

use rnm::analysis::{d_ub, h_function};
use rnm::{
    generate_distribution, normal_mass, scenario_d, tnorm_mass, GenerationParams,
    ParentConfiguration, RankedFragment, WeightExpression,
};

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

fn density(mean: f64, variance: f64) -> impl Fn(f64) -> f64 {
    move |x| {
        (-(x - mean).powi(2) / (2.0 * variance)).exp()
            / (2.0 * std::f64::consts::PI * variance).sqrt()
    }
}

fn simpson_tnorm(a: f64, b: f64, mean: f64, variance: f64) -> f64 {
    let f = density(mean, variance);
    simpson(&f, a, b, 1e-15) / simpson(&f, 0.0, 1.0, 1e-15)
}

#[test]
fn frozen_normal_masses() {
    let v = normal_mass(0.3, 0.5, 0.4, 0.01).unwrap();
    assert!((v - 0.682_689_492_137_085_9).abs() < 1e-15, "{v}");
    let v = tnorm_mass(0.2, 0.4, 0.3, 0.005).unwrap();
    assert!((v - 0.842_710_100_892_192_1).abs() < 1e-15, "{v}");
}

#[test]
fn normal_mass_matches_simpson() {
    for &(a, b, mean, var) in &[
        (0.0, 1.0, 0.5, 0.01),
        (0.1, 0.2, 0.7, 0.02),
        (0.6, 0.9, 0.2, 0.25),
        (0.0, 0.05, 0.0, 5e-4),
        (0.45, 0.55, 0.5, 1e-3),
    ] {
        let f = density(mean, var);
        let want = simpson(&f, a, b, 1e-15);
        let got = normal_mass(a, b, mean, var).unwrap();
        assert!(
            (got - want).abs() < 1e-12,
            "[{a}, {b}] N({mean}, {var}): {got} vs {want}"
        );
    }
}

#[test]
fn tnorm_mass_matches_simpson() {
    for &(a, b, mean, var) in &[
        (0.0, 0.25, 0.9, 0.05),
        (0.2, 0.6, 0.1, 0.01),
        (2.0 / 3.0, 1.0, 1.0, 0.002),
        (0.0, 1.0 / 7.0, 0.3, 0.25),
    ] {
        let want = simpson_tnorm(a, b, mean, var);
        let got = tnorm_mass(a, b, mean, var).unwrap();
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
}

#[test]
fn frozen_h_value() {
    let v = h_function(0.125, 4, 2, 0.01).unwrap();
    assert!((v - 0.080_638_953_241_884_85).abs() < 1e-14, "{v}");
}

#[test]
fn frozen_d_ub_values() {
    for &(m, k, var, want) in &[
        (4, 2, 0.01, 0.011_115_262_259_067_904),
        (3, 2, 0.005, 0.000_622_648_878_926_924_9),
        (5, 3, 0.02, 0.000_751_053_923_087_544_5),
    ] {
        let got = d_ub(m, k, var).unwrap();
        assert!((got - want).abs() < 1e-9, "m={m} k={k}: {got} vs {want}");
    }
}

#[test]
fn d_ub_matches_simpson_of_h() {
    for &(m, k, var) in &[(4, 2, 0.01), (6, 4, 0.003), (3, 3, 0.05)] {
        let half = 0.5 / m as f64;
        let want =
            (m as f64 * simpson(&|y| h_function(y, m, k, var).unwrap(), 0.0, half, 1e-14)).abs();
        let got = d_ub(m, k, var).unwrap();
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }
}

#[test]
fn symmetric_two_state_distribution() {
    let f = RankedFragment::uniform(2, 2).unwrap();
    let c = ParentConfiguration::new(vec![1, 2], &f).unwrap();
    let p = GenerationParams::new(0.01, 2).unwrap();
    let d = generate_distribution(&WeightExpression::Wmean(vec![0.5, 0.5]), &f, &c, &p).unwrap();
    for v in d.probabilities() {
        assert!((v - 0.5).abs() < 1e-14, "{v}");
    }
}

/// Brute-force generator: nested loops over explicit sample points and
/// Simpson masses.
fn brute_force(
    spec: &WeightExpression,
    m_parent: usize,
    config: &[usize],
    m: usize,
    var: f64,
    s: usize,
) -> Vec<f64> {
    let points: Vec<Vec<f64>> = config
        .iter()
        .map(|&k| {
            let lo = (k - 1) as f64 / m_parent as f64;
            let h = 1.0 / m_parent as f64;
            (0..s).map(|j| lo + h * j as f64 / (s - 1) as f64).collect()
        })
        .collect();
    let mut out = vec![0.0; m];
    let total = s.pow(config.len() as u32);
    for r in 0..total {
        let mut rest = r;
        let mut z = vec![0.0; config.len()];
        for i in (0..config.len()).rev() {
            z[i] = points[i][rest % s];
            rest /= s;
        }
        let mu = spec.evaluate(&z);
        for (k, o) in out.iter_mut().enumerate() {
            *o += simpson_tnorm(k as f64 / m as f64, (k + 1) as f64 / m as f64, mu, var);
        }
    }
    out.iter().map(|v| v / total as f64).collect()
}

#[test]
fn generator_matches_brute_force() {
    let cases = [
        (WeightExpression::Wmean(vec![0.3, 0.7]), vec![1, 3]),
        (WeightExpression::Wmin(vec![2.0, 5.0, 1.0]), vec![2, 3, 1]),
        (WeightExpression::Wmax(vec![1.5, 3.0]), vec![1, 2]),
        (WeightExpression::mix_from_max(0.35), vec![3, 1, 2]),
    ];
    for (spec, config) in cases {
        let n = config.len();
        let f = RankedFragment::uniform(n, 3).unwrap();
        let c = ParentConfiguration::new(config.clone(), &f).unwrap();
        let p = GenerationParams::new(0.02, 3).unwrap();
        let got = generate_distribution(&spec, &f, &c, &p).unwrap();
        let want = brute_force(&spec, 3, &config, 3, 0.02, 3);
        for (g, w) in got.probabilities().iter().zip(&want) {
            assert!((g - w).abs() < 1e-11, "{spec:?} {config:?}: {g} vs {w}");
        }
    }
}

#[test]
fn scenario_puts_one_parent_low() {
    let f = RankedFragment::uniform(4, 5).unwrap();
    let c = scenario_d(2, &f).unwrap();
    assert_eq!(c.states(), &[5, 1, 5, 5]);
}
