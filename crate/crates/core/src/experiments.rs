//! Robustness studies: gap curves of the critical WMEAN weights over the
//! variance, the randomized weight-update study, and the MIXMINMAX gap
//! curves at a bisected weight.
//!
//! Every run is a deterministic function of its configuration. Random draws
//! come from ChaCha8 seeded with the 64-bit run seed, one stream per
//! replication, so the schedule of parallel work does not change results.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    bisect_wmax, d_ub, mode_pair_of, wmean_equal_pair_weight, wmean_weight_interval, Scenario,
};
use crate::error::{argument, Result};
use crate::model::{WeightExpression, DEFAULT_MAX_COMBINATIONS};

/// Name of the generator behind every seeded run.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha), stream = replication index";

/// Optional wall-clock deadline shared by long runs.
#[derive(Debug, Clone, Copy, Default)]
pub struct Budget {
    deadline: Option<Instant>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Self::default()
    }

    pub fn until(deadline: Instant) -> Self {
        Self {
            deadline: Some(deadline),
        }
    }

    pub fn exceeded(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

/// `points` log-spaced values in `(lower, upper]`.
pub fn log_grid(lower: f64, upper: f64, points: usize) -> Result<Vec<f64>> {
    if !(lower > 0.0 && upper > lower && points >= 1) {
        return Err(argument(format!(
            "log grid needs 0 < lower < upper and at least one point, got ({lower}, {upper}], {points}"
        )));
    }
    let ratio = (upper / lower).ln();
    Ok((1..=points)
        .map(|j| {
            if j == points {
                upper
            } else {
                lower * (ratio * j as f64 / points as f64).exp()
            }
        })
        .collect())
}

/// Default variance grid of the gap curves: 50 log-spaced points in
/// `(5e-4, 0.1]`, or `(5e-4, 0.02]` once `m >= 20`.
pub fn default_variance_grid(m: usize) -> Vec<f64> {
    let upper = if m >= 20 { 0.02 } else { 0.1 };
    log_grid(5e-4, upper, 50).expect("valid default grid")
}

pub const FIG2_STATES: [usize; 9] = [3, 4, 5, 6, 7, 8, 9, 10, 20];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig2Config {
    /// One variance grid per state count.
    pub grids: Vec<(usize, Vec<f64>)>,
}

impl Default for Fig2Config {
    fn default() -> Self {
        Self::for_states(&FIG2_STATES)
    }
}

impl Fig2Config {
    pub fn for_states(m_list: &[usize]) -> Self {
        Self {
            grids: m_list
                .iter()
                .map(|&m| (m, default_variance_grid(m)))
                .collect(),
        }
    }

    pub fn with_grid(m_list: &[usize], grid: &[f64]) -> Self {
        Self {
            grids: m_list.iter().map(|&m| (m, grid.to_vec())).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fig2Row {
    pub m: usize,
    pub variance: f64,
    pub d_ub: f64,
    pub d_rnm5: f64,
    pub d_rnm10: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig2Report {
    pub rows: Vec<Fig2Row>,
    pub complete: bool,
}

impl Fig2Report {
    pub fn max_d_ub(&self, m: usize) -> f64 {
        self.max_of(m, |r| r.d_ub)
    }

    pub fn max_d_rnm(&self, m: usize) -> f64 {
        self.max_of(m, |r| r.d_rnm5.max(r.d_rnm10))
    }

    fn max_of(&self, m: usize, f: impl Fn(&Fig2Row) -> f64) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.m == m)
            .map(f)
            .fold(0.0, f64::max)
    }
}

/// Gap curves for two parents and `k = 2`: the bound `D_ub` and the measured
/// gaps with `s = 5` and `s = 10`, the second parent taking the rest of the
/// weight.
pub fn run_fig2(config: &Fig2Config, budget: &Budget) -> Result<Fig2Report> {
    let (n, k) = (2, 2);
    let mut tasks = Vec::new();
    for (m, grid) in &config.grids {
        if *m < 3 {
            return Err(argument(format!("state count {m} is below 3")));
        }
        let w = wmean_equal_pair_weight(*m, k)?;
        let spec = WeightExpression::Wmean(vec![w, 1.0 - w]);
        for &v in grid {
            if !(v > 0.0 && v <= 0.5) {
                return Err(argument(format!("variance {v} outside (0, 0.5]")));
            }
            tasks.push((*m, v, spec.clone()));
        }
    }
    let rows: Vec<Option<Fig2Row>> = tasks
        .par_iter()
        .map(|(m, v, spec)| {
            if budget.exceeded() {
                return Ok(None);
            }
            let gap = |s: usize| -> Result<f64> {
                let p =
                    Scenario::new(n, *m, 1, s, DEFAULT_MAX_COMBINATIONS)?.distribution(spec, *v);
                Ok((p[k - 2] - p[k - 1]).abs())
            };
            Ok(Some(Fig2Row {
                m: *m,
                variance: *v,
                d_ub: d_ub(*m, k, *v)?,
                d_rnm5: gap(5)?,
                d_rnm10: gap(10)?,
            }))
        })
        .collect::<Result<_>>()?;
    let complete = rows.iter().all(Option::is_some);
    Ok(Fig2Report {
        rows: rows.into_iter().flatten().collect(),
        complete,
    })
}

/// Upper end of the variance draw in the weight-update study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarianceBound {
    /// `1 / (4 m²)`.
    QuarterInverseSquare,
    /// `1 / m²`.
    InverseSquare,
}

impl VarianceBound {
    pub fn upper(self, m: usize) -> f64 {
        let m2 = (m * m) as f64;
        match self {
            VarianceBound::QuarterInverseSquare => 0.25 / m2,
            VarianceBound::InverseSquare => 1.0 / m2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            VarianceBound::QuarterInverseSquare => "quarter-inverse-square",
            VarianceBound::InverseSquare => "inverse-square",
        }
    }
}

impl std::str::FromStr for VarianceBound {
    type Err = crate::RnmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quarter-inverse-square" | "quarter" => Ok(VarianceBound::QuarterInverseSquare),
            "inverse-square" | "full" => Ok(VarianceBound::InverseSquare),
            _ => Err(argument(format!("unknown variance bound {s:?}"))),
        }
    }
}

pub const VARIANCE_LOWER: f64 = 5e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightUpdateConfig {
    pub replications: usize,
    pub seed: u64,
    pub variance_bound: VarianceBound,
    pub sample_size: usize,
}

impl WeightUpdateConfig {
    pub fn new(replications: usize, seed: u64) -> Self {
        Self {
            replications,
            seed,
            variance_bound: VarianceBound::QuarterInverseSquare,
            sample_size: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replication {
    pub index: usize,
    pub m: usize,
    pub n: usize,
    pub variance: f64,
    pub initial_weights: Vec<f64>,
    pub final_weights: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub e1: f64,
    pub e2: f64,
    /// Parents whose initial weight fell outside the interval of its own
    /// mode pair, so the interval was widened to contain it.
    pub widened: usize,
    /// Draws discarded because a redistribution had no slack.
    pub resampled: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightUpdateReport {
    pub config: WeightUpdateConfig,
    pub replications: Vec<Replication>,
    pub mean_e1: f64,
    pub mean_e2: f64,
    pub max_e1: f64,
    pub max_e2: f64,
    pub widened: usize,
    pub resampled: usize,
    pub complete: bool,
}

/// Randomized study of how far the low-parent distributions drift when the
/// weights are moved, one parent at a time from the last down to the second,
/// within the intervals that keep each parent's initial mode pair.
pub fn run_weight_update(
    config: &WeightUpdateConfig,
    budget: &Budget,
) -> Result<WeightUpdateReport> {
    if config.replications == 0 {
        return Err(argument("at least one replication is required"));
    }
    crate::model::GenerationParams::new(VARIANCE_LOWER, config.sample_size)?;
    let reps: Vec<Option<Replication>> = (0..config.replications)
        .into_par_iter()
        .map(|r| {
            if budget.exceeded() {
                return Ok(None);
            }
            replicate(config, r).map(Some)
        })
        .collect::<Result<_>>()?;
    let complete = reps.iter().all(Option::is_some);
    let reps: Vec<Replication> = reps.into_iter().flatten().collect();
    let count = reps.len().max(1) as f64;
    Ok(WeightUpdateReport {
        config: *config,
        mean_e1: reps.iter().map(|r| r.e1).sum::<f64>() / count,
        mean_e2: reps.iter().map(|r| r.e2).sum::<f64>() / count,
        max_e1: reps.iter().map(|r| r.e1).fold(0.0, f64::max),
        max_e2: reps.iter().map(|r| r.e2).fold(0.0, f64::max),
        widened: reps.iter().map(|r| r.widened).sum(),
        resampled: reps.iter().map(|r| r.resampled).sum(),
        replications: reps,
        complete,
    })
}

fn replicate(config: &WeightUpdateConfig, index: usize) -> Result<Replication> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index as u64);
    let s = config.sample_size;
    let mut resampled = 0;
    loop {
        let m: usize = rng.random_range(3..=7);
        let n: usize = rng.random_range(3..=8);
        let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let total: f64 = raw.iter().sum();
        let mut w0: Vec<f64> = raw.iter().map(|v| v / total).collect();
        w0.sort_by(f64::total_cmp);
        let variance = rng.random_range(VARIANCE_LOWER..=config.variance_bound.upper(m));

        let scenarios = (1..=n)
            .map(|i| Scenario::new(n, m, i, s, DEFAULT_MAX_COMBINATIONS))
            .collect::<Result<Vec<_>>>()?;
        let dist = |i: usize, w: &[f64]| {
            scenarios[i - 1].distribution(&WeightExpression::Wmean(w.to_vec()), variance)
        };

        let mut lower = vec![0.0; n];
        let mut upper = vec![0.0; n];
        let mut widened = 0;
        for i in 1..=n {
            let pair = mode_pair_of(&dist(i, &w0))?;
            let iv = wmean_weight_interval(m, pair)?;
            let wi = w0[i - 1];
            if !(iv.lower - 1e-12 <= wi && wi <= iv.upper + 1e-12) {
                widened += 1;
            }
            lower[i - 1] = iv.lower.min(wi);
            upper[i - 1] = iv.upper.max(wi);
        }

        let mut w = w0.clone();
        let mut intermediate: Vec<Vec<f64>> = vec![Vec::new(); n + 1];
        let mut degenerate = false;
        for i in (2..=n).rev() {
            let u: f64 = rng.random();
            let y: f64 = rng.random();
            let head = i - 1;
            let delta = if u < 0.5 {
                let room: f64 = (0..head).map(|j| w[j] - upper[j]).sum();
                (y * room).max(lower[i - 1] - w[i - 1])
            } else {
                let room: f64 = (0..head).map(|j| w[j] - lower[j]).sum();
                (y * room).min(upper[i - 1] - w[i - 1])
            };
            if delta != 0.0 {
                let slack: Vec<f64> = (0..head)
                    .map(|j| {
                        if delta < 0.0 {
                            upper[j] - w[j]
                        } else {
                            w[j] - lower[j]
                        }
                    })
                    .collect();
                let denom: f64 = slack.iter().sum();
                if denom <= 0.0 {
                    degenerate = true;
                    break;
                }
                w[i - 1] += delta;
                for j in 0..head {
                    w[j] -= delta * slack[j] / denom;
                }
            }
            // The error statistics only look at parents 3..=n.
            if i >= 3 {
                intermediate[i] = dist(i, &w);
            }
        }
        if degenerate {
            resampled += 1;
            continue;
        }

        let (mut e1, mut e2) = (0.0f64, 0.0f64);
        for (i, mid) in intermediate.iter().enumerate().skip(3) {
            let last = dist(i, &w);
            let diffs: Vec<f64> = mid.iter().zip(&last).map(|(a, b)| (a - b).abs()).collect();
            e1 = e1.max(diffs.iter().sum::<f64>() / m as f64);
            e2 = e2.max(diffs.iter().copied().fold(0.0, f64::max));
        }
        return Ok(Replication {
            index,
            m,
            n,
            variance,
            initial_weights: w0,
            final_weights: w,
            lower,
            upper,
            e1,
            e2,
            widened,
            resampled,
        });
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig3Config {
    pub parents: usize,
    pub grids: Vec<(usize, Vec<f64>)>,
    pub sample_sizes: Vec<usize>,
}

impl Default for Fig3Config {
    fn default() -> Self {
        Self::for_states(&FIG2_STATES)
    }
}

impl Fig3Config {
    pub fn for_states(m_list: &[usize]) -> Self {
        Self {
            parents: 4,
            grids: m_list
                .iter()
                .map(|&m| (m, default_variance_grid(m)))
                .collect(),
            sample_sizes: vec![3, 5, 10],
        }
    }
}

/// Root of `P(k) - P(k+1)` at the reference variance `1/(4m²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fig3Root {
    pub m: usize,
    pub s: usize,
    pub reference_variance: f64,
    pub w_max: f64,
    /// `1 - w_max`, the weight on the minimum.
    pub w_min: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fig3Row {
    pub m: usize,
    pub s: usize,
    pub variance: f64,
    pub w_max: f64,
    pub d1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig3Report {
    pub roots: Vec<Fig3Root>,
    pub rows: Vec<Fig3Row>,
    pub complete: bool,
}

/// For each `m` and `s`, bisects the weight at which states `m-1` and `m`
/// tie at variance `1/(4m²)`, then traces the gap at that weight over the
/// variance grid.
pub fn run_fig3(config: &Fig3Config, budget: &Budget) -> Result<Fig3Report> {
    let n = config.parents;
    let mut pairs = Vec::new();
    for (m, _) in &config.grids {
        if *m < 3 {
            return Err(argument(format!("state count {m} is below 3")));
        }
        for &s in &config.sample_sizes {
            pairs.push((*m, s));
        }
    }
    let roots: Vec<Option<Fig3Root>> = pairs
        .par_iter()
        .map(|&(m, s)| {
            if budget.exceeded() {
                return Ok(None);
            }
            let v0 = 0.25 / (m * m) as f64;
            let w = bisect_wmax(1, n, m, m - 1, v0, s)?;
            Ok(Some(Fig3Root {
                m,
                s,
                reference_variance: v0,
                w_max: w,
                w_min: 1.0 - w,
            }))
        })
        .collect::<Result<_>>()?;
    let mut complete = roots.iter().all(Option::is_some);
    let roots: Vec<Fig3Root> = roots.into_iter().flatten().collect();

    let mut tasks = Vec::new();
    for root in &roots {
        let grid = &config
            .grids
            .iter()
            .find(|(m, _)| *m == root.m)
            .expect("grid")
            .1;
        for &v in grid {
            tasks.push((*root, v));
        }
    }
    let rows: Vec<Option<Fig3Row>> = tasks
        .par_iter()
        .map(|(root, v)| {
            if budget.exceeded() {
                return Ok(None);
            }
            let k = root.m - 1;
            let p = Scenario::new(n, root.m, 1, root.s, DEFAULT_MAX_COMBINATIONS)?
                .distribution(&WeightExpression::mix_from_max(root.w_max), *v);
            Ok(Some(Fig3Row {
                m: root.m,
                s: root.s,
                variance: *v,
                w_max: root.w_max,
                d1: (p[k - 1] - p[k]).abs(),
            }))
        })
        .collect::<Result<_>>()?;
    complete &= rows.iter().all(Option::is_some);
    Ok(Fig3Report {
        roots,
        rows: rows.into_iter().flatten().collect(),
        complete,
    })
}
