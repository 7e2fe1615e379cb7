//! MIXMINMAX in the low-parent scenario: probability gaps, the weight at
//! which a gap closes, and the weight range that keeps a mode pair.
//!
//! Under MIXMINMAX the child mean depends only on the smallest and largest
//! sample values, so which parent is low does not matter; parent 1 is used.

use super::{check_equal_m_index, mode_pair_of, ModePair, Scenario, WeightInterval};
use crate::error::{argument, domain, Result, RnmError};
use crate::model::{WeightExpression, DEFAULT_MAX_COMBINATIONS};

/// Grid step of the sign scan that brackets roots.
pub const SCAN_STEP: f64 = 0.01;
/// Final bracket width on the weight.
pub const WEIGHT_TOLERANCE: f64 = 1e-6;

fn check_mix(j: u8, n: usize, m: usize, k: usize, w_max: f64) -> Result<()> {
    check_equal_m_index(m, k, "state")?;
    if n < 1 {
        return Err(argument("at least one parent is required"));
    }
    if k + 1 > m {
        return Err(argument(format!(
            "state {} does not exist for m={m}",
            k + 1
        )));
    }
    match j {
        1 => {}
        2 if k >= 2 => {}
        2 => return Err(argument("D_2 needs k >= 2")),
        _ => return Err(argument(format!("difference index {j} must be 1 or 2"))),
    }
    if !(0.0..=1.0).contains(&w_max) {
        return Err(argument(format!("w_max = {w_max} outside [0, 1]")));
    }
    Ok(())
}

#[inline]
fn signed_gap(j: u8, k: usize, p: &[f64]) -> f64 {
    match j {
        1 => p[k - 1] - p[k],
        _ => p[k - 2] - p[k],
    }
}

/// `P(k) - P(k+1)` for `j = 1`, `P(k-1) - P(k+1)` for `j = 2`.
pub fn signed_d_mix(
    j: u8,
    n: usize,
    m: usize,
    w_max: f64,
    variance: f64,
    s: usize,
    k: usize,
) -> Result<f64> {
    check_mix(j, n, m, k, w_max)?;
    let sc = Scenario::new(n, m, 1, s, DEFAULT_MAX_COMBINATIONS)?;
    crate::model::GenerationParams::new(variance, s)?;
    let p = sc.distribution(&WeightExpression::mix_from_max(w_max), variance);
    Ok(signed_gap(j, k, &p))
}

/// Absolute value of [`signed_d_mix`].
pub fn d_mix(
    j: u8,
    n: usize,
    m: usize,
    w_max: f64,
    variance: f64,
    s: usize,
    k: usize,
) -> Result<f64> {
    signed_d_mix(j, n, m, w_max, variance, s, k).map(f64::abs)
}

fn scan_grid() -> impl Iterator<Item = f64> {
    let steps = (1.0 / SCAN_STEP).round() as usize;
    (0..=steps).map(move |t| t as f64 / steps as f64)
}

/// Root in `w_max` of the signed gap, by a sign scan followed by bisection.
///
/// Exact zeros in the scan are skipped: they come from both probabilities
/// underflowing, not from a crossing.
pub fn bisect_wmax(j: u8, n: usize, m: usize, k: usize, variance: f64, s: usize) -> Result<f64> {
    check_mix(j, n, m, k, 0.5)?;
    crate::model::GenerationParams::new(variance, s)?;
    let sc = Scenario::new(n, m, 1, s, DEFAULT_MAX_COMBINATIONS)?;
    let f = |w: f64| {
        signed_gap(
            j,
            k,
            &sc.distribution(&WeightExpression::mix_from_max(w), variance),
        )
    };

    let profile: Vec<(f64, f64)> = scan_grid().map(|w| (w, f(w))).collect();
    let mut last: Option<(f64, f64)> = None;
    let mut bracket = None;
    for &(w, v) in &profile {
        if v == 0.0 {
            continue;
        }
        if let Some((w0, v0)) = last {
            if (v0 < 0.0) != (v < 0.0) {
                bracket = Some((w0, v0, w));
                break;
            }
        }
        last = Some((w, v));
    }
    let Some((mut lo, v_lo, mut hi)) = bracket else {
        return Err(RnmError::RootNotFound { profile });
    };
    let lo_negative = v_lo < 0.0;
    while hi - lo > WEIGHT_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        let v = f(mid);
        if v == 0.0 {
            return Ok(mid);
        }
        if (v < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Range of `w_max` over which the low-parent scenario has mode pair
/// `target`. The longest run of grid points with that pair is taken and each
/// end is refined by bisection on the pair predicate.
pub fn mixminmax_weight_interval(
    n: usize,
    m: usize,
    target: ModePair,
    variance: f64,
    s: usize,
) -> Result<WeightInterval> {
    check_equal_m_index(m, target.mode, "mode")?;
    check_equal_m_index(m, target.runner_up, "runner-up")?;
    if !target.is_adjacent() {
        return Err(domain(format!("mode pair {target} is not adjacent")));
    }
    crate::model::GenerationParams::new(variance, s)?;
    let sc = Scenario::new(n, m, 1, s, DEFAULT_MAX_COMBINATIONS)?;
    let hits = |w: f64| -> bool {
        let p = sc.distribution(&WeightExpression::mix_from_max(w), variance);
        mode_pair_of(&p).map(|q| q == target).unwrap_or(false)
    };
    let grid: Vec<f64> = scan_grid().collect();
    let flags: Vec<bool> = grid.iter().map(|&w| hits(w)).collect();

    let mut best: Option<(usize, usize)> = None;
    let mut t = 0;
    while t < flags.len() {
        if !flags[t] {
            t += 1;
            continue;
        }
        let start = t;
        while t < flags.len() && flags[t] {
            t += 1;
        }
        if best.is_none_or(|(a, b)| t - start > b - a) {
            best = Some((start, t));
        }
    }
    let Some((start, end)) = best else {
        let seen: Vec<String> = grid
            .iter()
            .step_by(10)
            .map(|&w| {
                let p = sc.distribution(&WeightExpression::mix_from_max(w), variance);
                format!(
                    "{w:.2}:{}",
                    mode_pair_of(&p).map(|q| q.to_string()).unwrap_or_default()
                )
            })
            .collect();
        return Err(domain(format!(
            "mode pair {target} never occurs; scan {}",
            seen.join(" ")
        )));
    };
    let refine = |mut inside: f64, mut outside: f64| {
        while (inside - outside).abs() > WEIGHT_TOLERANCE {
            let mid = 0.5 * (inside + outside);
            if hits(mid) {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        inside
    };
    let lower = if start == 0 {
        0.0
    } else {
        refine(grid[start], grid[start - 1])
    };
    let upper = if end == grid.len() {
        1.0
    } else {
        refine(grid[end - 1], grid[end])
    };
    Ok(WeightInterval {
        lower,
        upper,
        target_pair: target,
    })
}
