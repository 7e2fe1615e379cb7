//! When WMIN in the low-parent scenario collapses to a WMEAN.
//!
//! In that scenario the soft-min term of the low parent `i` is the minimum
//! for every sample combination exactly when `n <= m`, or `m >= 3` and
//! `w_i >= (n-2)/(m-2)`. The comparisons below run in exact rational
//! arithmetic so ties are decided without rounding.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::error::{argument, domain, Result};
use crate::model::{RankedFragment, WeightExpression};

fn check_weight(w: f64) -> Result<()> {
    if w.is_finite() && w >= 1.0 {
        Ok(())
    } else {
        Err(argument(format!(
            "WMIN weight {w} must be finite and at least 1"
        )))
    }
}

/// Whether WMIN with weight `w_i` on the low parent reduces to WMEAN for
/// every feasible choice of the other weights.
pub fn wmin_reduces(n: usize, m: usize, w_i: f64) -> Result<bool> {
    if n < 2 || m < 2 {
        return Err(argument(format!(
            "need n >= 2 and m >= 2, got n={n}, m={m}"
        )));
    }
    check_weight(w_i)?;
    if n <= m {
        return Ok(true);
    }
    if m == 2 {
        return Err(domain(format!(
            "with m = 2 and n = {n} > m no finite weight guarantees the reduction"
        )));
    }
    Ok(w_i * (m - 2) as f64 >= (n - 2) as f64)
}

/// WMEAN weights equivalent to WMIN `w` in the scenario where parent `i`
/// (1-based) is low: `w_i/(w_i+n-1)` for `i`, `1/(w_i+n-1)` elsewhere.
pub fn beta_weights(w: &[f64], i: usize, m: usize) -> Result<Vec<f64>> {
    let n = w.len();
    if i == 0 || i > n {
        return Err(argument(format!("parent index {i} outside 1..={n}")));
    }
    WeightExpression::Wmin(w.to_vec()).validate(&RankedFragment::uniform(n, m)?)?;
    if !wmin_reduces(n, m, w[i - 1])? {
        return Err(domain(format!(
            "w_{i} = {} is below the reduction threshold {}",
            w[i - 1],
            (n - 2) as f64 / (m - 2) as f64
        )));
    }
    let d = w[i - 1] + n as f64 - 1.0;
    Ok((0..n)
        .map(|t| if t == i - 1 { w[t] / d } else { 1.0 / d })
        .collect())
}

fn exact(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite weight")
}

/// Numerators of the `s` sample points of state `k` over the common
/// denominator `(s-1) m`.
fn sample_numerators(k: usize, s: usize) -> Vec<BigInt> {
    (0..s)
        .map(|j| BigInt::from((k - 1) * (s - 1) + j))
        .collect()
}

/// Soft-min terms scaled by the common denominator of the sample points;
/// the scale is positive so orderings are unchanged.
fn terms(w: &[BigRational], z: &[BigInt]) -> Vec<BigRational> {
    let n = z.len();
    let total: BigInt = z.iter().sum();
    let n1 = BigRational::from_integer(BigInt::from(n - 1));
    (0..n)
        .map(|t| {
            let zt = BigRational::from_integer(z[t].clone());
            let num = BigRational::from_integer(total.clone()) + (&w[t] - BigRational::one()) * zt;
            num / (&w[t] + &n1)
        })
        .collect()
}

/// Outcome of the exact per-combination argmin check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArgminCheck {
    pub combinations: u128,
    /// Combinations where some other term is strictly below term `i`.
    pub violations: u128,
    /// First violating combination as sample-point indices, 0-based.
    pub first_violation: Option<Vec<usize>>,
}

impl ArgminCheck {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// Checks exactly, for every sample combination of the low-parent scenario,
/// that the soft-min term of parent `i` is a minimum.
pub fn wmin_argmin_check(w: &[f64], i: usize, m: usize, s: usize) -> Result<ArgminCheck> {
    let n = w.len();
    let fragment = RankedFragment::uniform(n, m)?;
    WeightExpression::Wmin(w.to_vec()).validate(&fragment)?;
    if i == 0 || i > n {
        return Err(argument(format!("parent index {i} outside 1..={n}")));
    }
    if s < 2 {
        return Err(argument(format!("sample size must be at least 2, got {s}")));
    }
    let wr: Vec<BigRational> = w.iter().copied().map(exact).collect();
    let low = sample_numerators(1, s);
    let high = sample_numerators(m, s);
    let mut idx = vec![0usize; n];
    let mut check = ArgminCheck {
        combinations: 0,
        violations: 0,
        first_violation: None,
    };
    loop {
        let z: Vec<BigInt> = idx
            .iter()
            .enumerate()
            .map(|(t, &j)| {
                if t == i - 1 {
                    low[j].clone()
                } else {
                    high[j].clone()
                }
            })
            .collect();
        let tv = terms(&wr, &z);
        check.combinations += 1;
        if tv.iter().any(|t| t < &tv[i - 1]) {
            check.violations += 1;
            check.first_violation.get_or_insert_with(|| idx.clone());
        }
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(check);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < s {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Feasible weights and a sample combination at which parent `i`'s term is
/// not the minimum.
#[derive(Debug, Clone, PartialEq)]
pub struct FailureWitness {
    pub weights: Vec<f64>,
    /// Sample values, one per parent; each is an endpoint of its interval.
    pub z: Vec<f64>,
    /// 1-based parent whose term undercuts parent `i`.
    pub competitor: usize,
}

/// Weights tried for the competing parent.
const LADDER: [f64; 13] = [
    1.0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8, 1e9, 1e10, 1e11, 1e12,
];

/// Searches for a counterexample to the reduction when `n > m >= 3`.
///
/// Parent `i` is placed at the top of state 1, a competitor `r` at the
/// bottom of state `m` and the rest at 1. As `w_r` grows, term `r` falls to
/// `(m-1)/m`, which undercuts term `i` precisely when
/// `w_i < (n-2)/(m-2)`. Each candidate is confirmed exactly.
pub fn wmin_failure_witness(
    n: usize,
    m: usize,
    w_i: f64,
    i: usize,
) -> Result<Option<FailureWitness>> {
    if m < 3 {
        return Err(domain(format!(
            "the witness construction needs m >= 3, got {m}"
        )));
    }
    if n < 2 || i == 0 || i > n {
        return Err(argument(format!("parent index {i} outside 1..={n}")));
    }
    check_weight(w_i)?;
    let r = if i == n { 1 } else { i + 1 };
    // Numerators over m; with s = 2 these are the interval endpoints.
    let mut num = vec![m; n];
    num[i - 1] = 1;
    num[r - 1] = m - 1;
    let z: Vec<BigInt> = num.iter().map(|&v| BigInt::from(v)).collect();
    for &wr in &LADDER {
        let mut w = vec![1.0; n];
        w[i - 1] = w_i;
        w[r - 1] = wr;
        let exact_w: Vec<BigRational> = w.iter().copied().map(exact).collect();
        let tv = terms(&exact_w, &z);
        if tv[r - 1] < tv[i - 1] {
            let zf = num.iter().map(|&v| v as f64 / m as f64).collect();
            return Ok(Some(FailureWitness {
                weights: w,
                z: zf,
                competitor: r,
            }));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_examples() {
        assert!(wmin_reduces(3, 4, 1.0).unwrap());
        assert!(wmin_reduces(6, 4, 2.0).unwrap());
        assert!(!wmin_reduces(6, 4, 1.9).unwrap());
        assert!(wmin_reduces(3, 2, 5.0).is_err());
        assert!(wmin_reduces(3, 4, 0.5).is_err());
    }

    #[test]
    fn beta_examples() {
        let b = beta_weights(&[3.0, 1.0, 1.0], 1, 4).unwrap();
        assert_eq!(b, vec![0.6, 0.2, 0.2]);
        let b = beta_weights(&[1.0, 3.0, 1.0], 2, 4).unwrap();
        assert_eq!(b, vec![0.2, 0.6, 0.2]);
        assert_eq!(beta_weights(&[1.0, 1.0], 1, 3).unwrap(), vec![0.5, 0.5]);
        assert!(beta_weights(&[1.0; 6], 1, 4).is_err());
    }

    #[test]
    fn argmin_and_witness_agree_with_threshold() {
        // n = 5, m = 3: threshold 3.
        let at = wmin_argmin_check(&[3.0, 1.0, 1e6, 1.0, 1.0], 1, 3, 3).unwrap();
        assert!(at.holds());
        assert!(wmin_failure_witness(5, 3, 3.0, 1).unwrap().is_none());
        let wit = wmin_failure_witness(5, 3, 2.9, 1).unwrap().unwrap();
        assert_eq!(wit.competitor, 2);
        let check = wmin_argmin_check(&wit.weights, 1, 3, 3).unwrap();
        assert!(!check.holds());
        assert_eq!(wit.z, vec![1.0 / 3.0, 2.0 / 3.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn argmin_holds_when_n_at_most_m() {
        let c = wmin_argmin_check(&[1.0, 7.5, 1.0], 2, 3, 5).unwrap();
        assert_eq!(c.combinations, 125);
        assert!(c.holds());
    }
}
