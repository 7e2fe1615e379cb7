//! Sampling of parent state intervals and evaluation of the weight
//! expressions that turn a combination of sample points into a mean `μ_r`.

use crate::error::{argument, Result};
use crate::model::{
    state_interval, GenerationParams, ParentConfiguration, RankedFragment, StateInterval,
    WeightExpression,
};

/// `s` equidistant points spanning `interval`, both endpoints included.
pub fn sample_points(interval: StateInterval, s: usize) -> Result<Vec<f64>> {
    if s < 2 {
        return Err(argument(format!("sample size must be at least 2, got {s}")));
    }
    let step = (interval.upper - interval.lower) / (s - 1) as f64;
    Ok((0..s)
        .map(|j| {
            if j == s - 1 {
                interval.upper
            } else {
                interval.lower + j as f64 * step
            }
        })
        .collect())
}

/// Per-parent sample points for one parent configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGrid {
    points: Vec<Vec<f64>>,
}

impl SampleGrid {
    pub fn new(fragment: &RankedFragment, config: &ParentConfiguration, s: usize) -> Result<Self> {
        let points = config
            .states()
            .iter()
            .zip(fragment.parent_states())
            .map(|(&k, &m)| sample_points(state_interval(k, m)?, s))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { points })
    }

    pub fn parent_points(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn parents(&self) -> usize {
        self.points.len()
    }

    pub fn sample_size(&self) -> usize {
        self.points[0].len()
    }

    /// `s^n`, the number of sample combinations.
    pub fn combinations(&self) -> u128 {
        (self.sample_size() as u128).saturating_pow(self.parents() as u32)
    }

    /// Visits every combination in mixed-radix order, parent 1 slowest.
    pub(crate) fn for_each_combination(&self, mut f: impl FnMut(&[f64])) {
        let n = self.parents();
        let s = self.sample_size();
        let mut idx = vec![0usize; n];
        let mut z: Vec<f64> = self.points.iter().map(|p| p[0]).collect();
        loop {
            f(&z);
            let mut pos = n;
            loop {
                if pos == 0 {
                    return;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < s {
                    z[pos] = self.points[pos][idx[pos]];
                    break;
                }
                idx[pos] = 0;
                z[pos] = self.points[pos][0];
            }
        }
    }
}

impl WeightExpression {
    /// Evaluates the expression at one sample combination. Weights and arity
    /// are assumed valid.
    #[inline]
    pub fn evaluate(&self, z: &[f64]) -> f64 {
        match self {
            WeightExpression::Wmean(w) => w.iter().zip(z).map(|(w, z)| w * z).sum(),
            WeightExpression::Wmin(w) => soft_extreme(w, z, f64::min, f64::INFINITY),
            WeightExpression::Wmax(w) => soft_extreme(w, z, f64::max, f64::NEG_INFINITY),
            WeightExpression::MixMinMax { w_min, w_max } => {
                let (lo, hi) = z
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                        (lo.min(v), hi.max(v))
                    });
                w_min * lo + w_max * hi
            }
        }
    }
}

/// Term `i` of WMIN/WMAX: `(w_i z_i + Σ_{j≠i} z_j) / (w_i + n - 1)`.
#[inline]
pub fn soft_term(w: &[f64], z: &[f64], total: f64, i: usize) -> f64 {
    let n = z.len() as f64;
    (w[i] * z[i] + (total - z[i])) / (w[i] + n - 1.0)
}

#[inline]
fn soft_extreme(w: &[f64], z: &[f64], pick: fn(f64, f64) -> f64, init: f64) -> f64 {
    let total: f64 = z.iter().sum();
    (0..z.len()).fold(init, |acc, i| pick(acc, soft_term(w, z, total, i)))
}

/// Index (0-based) of the minimizing WMIN term; the first one on ties.
pub fn wmin_argmin(w: &[f64], z: &[f64]) -> usize {
    let total: f64 = z.iter().sum();
    let mut best = 0;
    let mut best_val = f64::INFINITY;
    for i in 0..z.len() {
        let v = soft_term(w, z, total, i);
        if v < best_val {
            best_val = v;
            best = i;
        }
    }
    best
}

/// Checked evaluation of `spec` at sample points `z`.
pub fn evaluate_mu(spec: &WeightExpression, z: &[f64]) -> Result<f64> {
    if z.is_empty() {
        return Err(argument("at least one sample point is required"));
    }
    let fragment = RankedFragment::uniform(z.len(), 2)?;
    spec.validate(&fragment)?;
    if let Some(v) = z.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(argument(format!("sample point {v} outside [0, 1]")));
    }
    Ok(spec.evaluate(z))
}

/// All `s^n` means `μ_r` of one configuration in canonical enumeration order.
#[derive(Debug, Clone, PartialEq)]
pub struct MuSet(Vec<f64>);

impl MuSet {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn range(&self) -> f64 {
        self.max() - self.min()
    }
}

pub(crate) fn checked_grid(
    spec: &WeightExpression,
    fragment: &RankedFragment,
    config: &ParentConfiguration,
    s: usize,
    cap: u64,
) -> Result<SampleGrid> {
    spec.validate(fragment)?;
    let config = ParentConfiguration::new(config.states().to_vec(), fragment)?;
    // Validate s and the cap before allocating the grid.
    let params = GenerationParams::new(1.0, s)?.with_max_combinations(cap);
    params.check_cap((s as u128).saturating_pow(fragment.parent_count() as u32))?;
    SampleGrid::new(fragment, &config, s)
}

/// Enumerates the means of every sample combination for `config`, using the
/// default combination cap.
pub fn enumerate_mu(
    spec: &WeightExpression,
    fragment: &RankedFragment,
    config: &ParentConfiguration,
    s: usize,
) -> Result<MuSet> {
    enumerate_mu_capped(
        spec,
        fragment,
        config,
        s,
        crate::model::DEFAULT_MAX_COMBINATIONS,
    )
}

pub fn enumerate_mu_capped(
    spec: &WeightExpression,
    fragment: &RankedFragment,
    config: &ParentConfiguration,
    s: usize,
    cap: u64,
) -> Result<MuSet> {
    let grid = checked_grid(spec, fragment, config, s, cap)?;
    let mut out = Vec::with_capacity(grid.combinations() as usize);
    grid.for_each_combination(|z| out.push(spec.evaluate(z)));
    Ok(MuSet(out))
}

/// Lower and upper bound of the expression over the box of state intervals
/// selected by `config`. Every expression is non-decreasing in each argument,
/// so the bounds sit at the all-lower and all-upper corners.
pub fn mu_bounds(
    spec: &WeightExpression,
    fragment: &RankedFragment,
    config: &ParentConfiguration,
) -> Result<(f64, f64)> {
    spec.validate(fragment)?;
    let config = ParentConfiguration::new(config.states().to_vec(), fragment)?;
    let intervals = config
        .states()
        .iter()
        .zip(fragment.parent_states())
        .map(|(&k, &m)| state_interval(k, m))
        .collect::<Result<Vec<_>>>()?;
    let lower: Vec<f64> = intervals.iter().map(|iv| iv.lower).collect();
    let upper: Vec<f64> = intervals.iter().map(|iv| iv.upper).collect();
    Ok((spec.evaluate(&lower), spec.evaluate(&upper)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::scenario_d;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn sample_point_examples() {
        let p = sample_points(state_interval(1, 3).unwrap(), 3).unwrap();
        assert!(close(&p, &[0.0, 1.0 / 6.0, 1.0 / 3.0], 1e-15));
        let p = sample_points(state_interval(2, 4).unwrap(), 2).unwrap();
        assert_eq!(p, vec![0.25, 0.5]);
        let p = sample_points(state_interval(2, 3).unwrap(), 5).unwrap();
        assert!(close(
            &p,
            &[1.0 / 3.0, 5.0 / 12.0, 0.5, 7.0 / 12.0, 2.0 / 3.0],
            1e-15
        ));
        assert!(sample_points(state_interval(2, 3).unwrap(), 1).is_err());
    }

    #[test]
    fn endpoints_are_exact() {
        for m in 2..10 {
            for k in 1..=m {
                let iv = state_interval(k, m).unwrap();
                for s in 2..8 {
                    let p = sample_points(iv, s).unwrap();
                    assert_eq!(p[0], iv.lower);
                    assert_eq!(p[s - 1], iv.upper);
                }
            }
        }
    }

    #[test]
    fn evaluate_examples() {
        let wmean = WeightExpression::Wmean(vec![0.5, 0.5]);
        assert!((evaluate_mu(&wmean, &[0.2, 0.4]).unwrap() - 0.3).abs() < 1e-15);
        let wmin = WeightExpression::Wmin(vec![1.0, 1.0]);
        assert!((evaluate_mu(&wmin, &[0.2, 0.8]).unwrap() - 0.5).abs() < 1e-15);
        let wmin = WeightExpression::Wmin(vec![3.0, 1.0]);
        assert!((evaluate_mu(&wmin, &[0.2, 0.8]).unwrap() - 0.35).abs() < 1e-15);
        let mix = WeightExpression::MixMinMax {
            w_min: 0.25,
            w_max: 0.75,
        };
        assert!((evaluate_mu(&mix, &[0.1, 0.9, 0.5]).unwrap() - 0.7).abs() < 1e-15);
        let wmax = WeightExpression::Wmax(vec![3.0, 1.0]);
        // max{(0.6 + 0.8)/4, (0.2 + 0.8)/2} = 0.5
        assert!((evaluate_mu(&wmax, &[0.2, 0.8]).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn evaluate_rejects_bad_input() {
        let wmean = WeightExpression::Wmean(vec![0.5, 0.5]);
        assert!(evaluate_mu(&wmean, &[0.2]).is_err());
        assert!(evaluate_mu(&wmean, &[0.2, 1.5]).is_err());
        assert!(evaluate_mu(&WeightExpression::Wmin(vec![0.5, 1.0]), &[0.2, 0.3]).is_err());
    }

    #[test]
    fn enumerate_examples() {
        let f = RankedFragment::uniform(1, 3).unwrap();
        let c = ParentConfiguration::new(vec![2], &f).unwrap();
        let mu = enumerate_mu(&WeightExpression::Wmean(vec![1.0]), &f, &c, 3).unwrap();
        assert!(close(mu.values(), &[1.0 / 3.0, 0.5, 2.0 / 3.0], 1e-15));

        let f = RankedFragment::uniform(2, 2).unwrap();
        let c = ParentConfiguration::new(vec![1, 2], &f).unwrap();
        let spec = WeightExpression::Wmean(vec![0.5, 0.5]);
        let mu = enumerate_mu(&spec, &f, &c, 2).unwrap();
        // z_1 ∈ {0, 1/2} slowest, z_2 ∈ {1/2, 1}.
        assert!(close(mu.values(), &[0.25, 0.5, 0.5, 0.75], 1e-15));
    }

    #[test]
    fn enumeration_cap() {
        let f = RankedFragment::uniform(4, 3).unwrap();
        let c = scenario_d(1, &f).unwrap();
        let spec = WeightExpression::Wmean(vec![0.25; 4]);
        let err = enumerate_mu_capped(&spec, &f, &c, 10, 9_999).unwrap_err();
        assert_eq!(
            err,
            crate::RnmError::Resource {
                required: 10_000,
                cap: 9_999
            }
        );
        assert_eq!(
            enumerate_mu_capped(&spec, &f, &c, 10, 10_000)
                .unwrap()
                .len(),
            10_000
        );
    }

    #[test]
    fn bounds_examples() {
        let f = RankedFragment::uniform(2, 5).unwrap();
        let c = scenario_d(1, &f).unwrap();
        let (lo, hi) = mu_bounds(&WeightExpression::Wmean(vec![0.5, 0.5]), &f, &c).unwrap();
        assert!((lo - 0.4).abs() < 1e-15 && (hi - 0.6).abs() < 1e-15);

        let f = RankedFragment::uniform(3, 4).unwrap();
        let c = scenario_d(2, &f).unwrap();
        let (lo, hi) = mu_bounds(&WeightExpression::Wmin(vec![1.0, 2.0, 1.0]), &f, &c).unwrap();
        assert!((lo - 0.375).abs() < 1e-15);
        assert!((hi - lo - 0.25).abs() < 1e-15);
    }

    #[test]
    fn argmin_picks_first_minimum() {
        assert_eq!(wmin_argmin(&[1.0, 1.0], &[0.5, 0.5]), 0);
        assert_eq!(wmin_argmin(&[1.0, 5.0], &[0.9, 0.1]), 1);
    }
}
