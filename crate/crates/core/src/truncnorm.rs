//! Masses of the normal distribution truncated to `[0, 1]`.
//!
//! Every mass is formed from tail probabilities obtained through `erfc`, so
//! intervals far out in either tail keep their relative accuracy instead of
//! cancelling against 1.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{argument, Result};

/// Below this normalizing mass the truncated density is treated as a point
/// mass at the clamp of the mean into `[0, 1]`.
pub const DEGENERATE_NORMALIZER: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncNormParams {
    mean: f64,
    variance: f64,
}

impl TruncNormParams {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        check_variance(variance)?;
        if !mean.is_finite() {
            return Err(argument(format!("mean must be finite, got {mean}")));
        }
        Ok(Self { mean, variance })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn mass(&self, a: f64, b: f64) -> Result<f64> {
        tnorm_mass(a, b, self.mean, self.variance)
    }
}

fn check_variance(variance: f64) -> Result<()> {
    if variance.is_finite() && variance > 0.0 {
        Ok(())
    } else {
        Err(argument(format!(
            "variance must be positive, got {variance}"
        )))
    }
}

/// Lower and upper standard-normal tail at a standardized point.
#[derive(Debug, Clone, Copy)]
struct Tails {
    z: f64,
    cdf: f64,
    sf: f64,
}

#[inline]
fn tails(z: f64) -> Tails {
    if z < 0.0 {
        let cdf = 0.5 * libm::erfc(-z * FRAC_1_SQRT_2);
        Tails {
            z,
            cdf,
            sf: 1.0 - cdf,
        }
    } else {
        let sf = 0.5 * libm::erfc(z * FRAC_1_SQRT_2);
        Tails {
            z,
            cdf: 1.0 - sf,
            sf,
        }
    }
}

#[inline]
fn mass_between(lo: &Tails, hi: &Tails) -> f64 {
    let m = if lo.z >= 0.0 {
        lo.sf - hi.sf
    } else if hi.z <= 0.0 {
        hi.cdf - lo.cdf
    } else {
        1.0 - lo.cdf - hi.sf
    };
    m.max(0.0)
}

/// `Φ((b-μ)/σ) - Φ((a-μ)/σ)`: mass of `N(μ, σ²)` on `[a, b]`.
pub fn normal_mass(a: f64, b: f64, mean: f64, variance: f64) -> Result<f64> {
    check_variance(variance)?;
    if a.is_nan() || b.is_nan() || a > b {
        return Err(argument(format!("interval [{a}, {b}] is empty or invalid")));
    }
    Ok(raw_normal_mass(a, b, mean, variance.sqrt()))
}

#[inline]
pub(crate) fn raw_normal_mass(a: f64, b: f64, mean: f64, sd: f64) -> f64 {
    mass_between(&tails((a - mean) / sd), &tails((b - mean) / sd))
}

/// Mass of `N(μ, σ²)` truncated to `[0, 1]` on `[a, b] ⊆ [0, 1]`.
pub fn tnorm_mass(a: f64, b: f64, mean: f64, variance: f64) -> Result<f64> {
    check_variance(variance)?;
    if !(0.0 <= a && a <= b && b <= 1.0) {
        return Err(argument(format!(
            "[{a}, {b}] is not a sub-interval of [0, 1]"
        )));
    }
    let sd = variance.sqrt();
    let z = raw_normal_mass(0.0, 1.0, mean, sd);
    if z < DEGENERATE_NORMALIZER {
        // Point mass at the clamped mean; a boundary point belongs to the
        // interval on its right unless it is 1.
        let c = mean.clamp(0.0, 1.0);
        let inside = (a <= c && c < b) || (c == 1.0 && b == 1.0 && a < b);
        return Ok(if inside { 1.0 } else { 0.0 });
    }
    Ok((raw_normal_mass(a, b, mean, sd) / z).min(1.0))
}

/// Masses of the `m` equal-width partition intervals of `[0, 1]` under the
/// truncated normal, written into `out[..m]`.
///
/// Boundaries are evaluated once each, so this costs `m + 1` calls to
/// `erfc`.
pub(crate) struct PartitionMasses {
    boundaries: Vec<f64>,
    scratch: Vec<Tails>,
}

impl PartitionMasses {
    pub(crate) fn new(m: usize) -> Self {
        let boundaries = (0..=m).map(|k| k as f64 / m as f64).collect();
        Self {
            boundaries,
            scratch: vec![tails(0.0); m + 1],
        }
    }

    pub(crate) fn states(&self) -> usize {
        self.boundaries.len() - 1
    }

    #[inline]
    pub(crate) fn fill(&mut self, mean: f64, sd: f64, out: &mut [f64]) {
        let m = self.states();
        for (t, &b) in self.scratch.iter_mut().zip(&self.boundaries) {
            *t = tails((b - mean) / sd);
        }
        let total = mass_between(&self.scratch[0], &self.scratch[m]);
        if total < DEGENERATE_NORMALIZER {
            out[..m].fill(0.0);
            out[nearest_state(mean, m) - 1] = 1.0;
            return;
        }
        let inv = 1.0 / total;
        for (k, o) in out[..m].iter_mut().enumerate() {
            *o = mass_between(&self.scratch[k], &self.scratch[k + 1]) * inv;
        }
    }
}

/// 1-based state whose interval holds the clamp of `mean` into `[0, 1]`.
pub(crate) fn nearest_state(mean: f64, m: usize) -> usize {
    let c = mean.clamp(0.0, 1.0);
    ((c * m as f64).floor() as usize + 1).min(m)
}

/// Truncated-normal masses of the `m` partition intervals for one mean.
pub fn partition_masses(mean: f64, variance: f64, m: usize) -> Result<Vec<f64>> {
    check_variance(variance)?;
    if m < 2 {
        return Err(argument(format!("state count {m} is below 2")));
    }
    let mut pm = PartitionMasses::new(m);
    let mut out = vec![0.0; m];
    pm.fill(mean, variance.sqrt(), &mut out);
    Ok(out)
}
