//! Critical WMEAN weights, the upper-bound function `D_ub` and the measured
//! probability gaps at those weights.

use super::{check_equal_m_index, scenario_distribution, ModePair, WeightInterval};
use crate::error::{argument, domain, Result};
use crate::model::{WeightExpression, WEIGHT_TOLERANCE};
use crate::truncnorm::raw_normal_mass;

/// Weight of the low parent at which child states `k-1` and `k` are close
/// to equiprobable: `(m - k + 1/2) / (m - 1)`.
pub fn wmean_equal_pair_weight(m: usize, k: usize) -> Result<f64> {
    check_equal_m_index(m, k, "state")?;
    if k < 2 {
        return Err(argument("the pair (k-1, k) needs k >= 2"));
    }
    let w = (m as f64 - k as f64 + 0.5) / (m as f64 - 1.0);
    if !(0.0..=1.0).contains(&w) {
        return Err(domain(format!(
            "critical weight {w} for m={m}, k={k} is outside [0, 1]"
        )));
    }
    Ok(w)
}

/// Weight at which the flanking states `k-1` and `k+1` are close to
/// equiprobable around the mode `k`: `(m - k) / (m - 1)`.
pub fn wmean_flank_pair_weight(m: usize, k: usize) -> Result<f64> {
    check_equal_m_index(m, k, "state")?;
    if k < 2 || k + 1 > m {
        return Err(domain(format!(
            "state {k} has no flank on both sides for m={m}"
        )));
    }
    Ok((m - k) as f64 / (m as f64 - 1.0))
}

/// Range of the low parent's WMEAN weight over which the ordered pair
/// `target` is the mode pair.
///
/// The mode `a` holds on `[(m-a-1/2)/(m-1), (m-a+1/2)/(m-1)]` and the flank
/// weight `(m-a)/(m-1)` splits that range by which neighbour comes second:
/// above it the runner-up is `a-1`, below it `a+1`. Endpoints are clamped
/// to `[0, 1]`.
pub fn wmean_weight_interval(m: usize, target: ModePair) -> Result<WeightInterval> {
    check_equal_m_index(m, target.mode, "mode")?;
    check_equal_m_index(m, target.runner_up, "runner-up")?;
    if !target.is_adjacent() {
        return Err(domain(format!("mode pair {target} is not adjacent")));
    }
    let a = target.mode as f64;
    let d = m as f64 - 1.0;
    let (lower, upper) = if target.runner_up < target.mode {
        ((m as f64 - a) / d, (m as f64 - a + 0.5) / d)
    } else {
        ((m as f64 - a - 0.5) / d, (m as f64 - a) / d)
    };
    Ok(WeightInterval {
        lower: lower.clamp(0.0, 1.0),
        upper: upper.clamp(0.0, 1.0),
        target_pair: target,
    })
}

/// Integrand of the upper bound on `|P(k-1) - P(k)|`, for
/// `y ∈ [0, 1/(2m)]`.
pub fn h_function(y: f64, m: usize, k: usize, variance: f64) -> Result<f64> {
    check_equal_m_index(m, k, "state")?;
    if k < 2 {
        return Err(argument("h needs k >= 2"));
    }
    if !(variance.is_finite() && variance > 0.0) {
        return Err(argument(format!(
            "variance must be positive, got {variance}"
        )));
    }
    let half = 0.5 / m as f64;
    if !(0.0..=half).contains(&y) {
        return Err(argument(format!("y = {y} outside [0, {half}]")));
    }
    Ok(h_raw(y, m, k, variance.sqrt()))
}

fn h_raw(y: f64, m: usize, k: usize, sd: f64) -> f64 {
    let mf = m as f64;
    let c = (k - 1) as f64 / mf;
    let upper = raw_normal_mass(c, k as f64 / mf, c + y, sd);
    let lower = raw_normal_mass((k - 2) as f64 / mf, c, c + y, sd);
    let left = raw_normal_mass(0.0, 1.0, c - y, sd);
    let right = raw_normal_mass(0.0, 1.0, c + y, sd);
    (upper - lower) * (1.0 / left - 1.0 / right)
}

/// Absolute tolerance of the `D_ub` quadrature.
pub const D_UB_TOLERANCE: f64 = 1e-10;

/// `|m ∫_0^{1/(2m)} h(y) dy|`, an upper bound on the gap between states
/// `k-1` and `k` at the critical weight.
pub fn d_ub(m: usize, k: usize, variance: f64) -> Result<f64> {
    h_function(0.0, m, k, variance)?;
    let sd = variance.sqrt();
    let mf = m as f64;
    let out = quadrature::double_exponential::integrate(
        |y| mf * h_raw(y, m, k, sd),
        0.0,
        0.5 / mf,
        D_UB_TOLERANCE,
    );
    Ok(out.integral.abs())
}

fn check_critical(w: &[f64], n: usize, i: usize, target: f64) -> Result<WeightExpression> {
    if n < 2 || w.len() != n {
        return Err(argument(format!(
            "expected {n} >= 2 weights, found {}",
            w.len()
        )));
    }
    if i == 0 || i > n {
        return Err(argument(format!("parent index {i} outside 1..={n}")));
    }
    let spec = WeightExpression::Wmean(w.to_vec());
    spec.validate(&crate::model::RankedFragment::uniform(n, 2)?)?;
    if (w[i - 1] - target).abs() > WEIGHT_TOLERANCE {
        return Err(argument(format!(
            "w_{i} = {} differs from the critical weight {target}",
            w[i - 1]
        )));
    }
    Ok(spec)
}

/// `|P(k-1) - P(k)|` in the scenario with parent `i` low, where `w_i` is the
/// equal-pair critical weight and the other weights are any feasible rest.
pub fn d_rnm(
    n: usize,
    m: usize,
    k: usize,
    i: usize,
    w: &[f64],
    variance: f64,
    s: usize,
) -> Result<f64> {
    let spec = check_critical(w, n, i, wmean_equal_pair_weight(m, k)?)?;
    let p = scenario_distribution(&spec, n, m, i, variance, s)?;
    Ok((p.probabilities()[k - 2] - p.probabilities()[k - 1]).abs())
}

/// `|P(k-1) - P(k+1)|` in the same scenario at the flank critical weight.
pub fn d_flank(
    n: usize,
    m: usize,
    k: usize,
    i: usize,
    w: &[f64],
    variance: f64,
    s: usize,
) -> Result<f64> {
    let spec = check_critical(w, n, i, wmean_flank_pair_weight(m, k)?)?;
    let p = scenario_distribution(&spec, n, m, i, variance, s)?;
    Ok((p.probabilities()[k - 2] - p.probabilities()[k]).abs())
}
