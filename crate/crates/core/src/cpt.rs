//! Conditional distributions and full CPTs, plus a Monte Carlo estimate of
//! the large-sample limit of the generator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{argument, Result};
use crate::expression::{checked_grid, SampleGrid};
use crate::model::{
    state_interval, ConditionalDistribution, Cpt, GenerationParams, ParentConfiguration,
    RankedFragment, WeightExpression,
};
use crate::truncnorm::PartitionMasses;

/// Leaves are summed sequentially in blocks of this size before entering the
/// pairwise tree.
const LEAF: usize = 16;

/// Streaming pairwise summation of fixed-length vectors.
///
/// Vectors are added in the order they are pushed. Leaf blocks are combined
/// like a binary counter, so the rounding error grows with `log` of the count.
pub(crate) struct Cascade {
    width: usize,
    leaf: Vec<f64>,
    leaf_count: usize,
    levels: Vec<Vec<f64>>,
    occupied: Vec<bool>,
}

impl Cascade {
    pub(crate) fn new(width: usize) -> Self {
        Self {
            width,
            leaf: vec![0.0; width],
            leaf_count: 0,
            levels: Vec::new(),
            occupied: Vec::new(),
        }
    }

    #[inline]
    pub(crate) fn push(&mut self, v: &[f64]) {
        for (a, b) in self.leaf.iter_mut().zip(v) {
            *a += b;
        }
        self.leaf_count += 1;
        if self.leaf_count == LEAF {
            self.carry();
        }
    }

    fn carry(&mut self) {
        let mut carry = std::mem::replace(&mut self.leaf, vec![0.0; self.width]);
        self.leaf_count = 0;
        let mut level = 0;
        loop {
            if level == self.levels.len() {
                self.levels.push(carry);
                self.occupied.push(true);
                return;
            }
            if !self.occupied[level] {
                self.levels[level] = carry;
                self.occupied[level] = true;
                return;
            }
            for (a, b) in carry.iter_mut().zip(&self.levels[level]) {
                *a += b;
            }
            self.occupied[level] = false;
            level += 1;
        }
    }

    pub(crate) fn finish(self) -> Vec<f64> {
        let mut total = self.leaf;
        for (v, _) in self.levels.iter().zip(&self.occupied).filter(|(_, &o)| o) {
            for (a, b) in total.iter_mut().zip(v) {
                *a += b;
            }
        }
        total
    }
}

/// Averages the partition masses over every sample combination of `grid`.
/// Inputs are assumed validated.
pub(crate) fn distribution_on_grid(
    spec: &WeightExpression,
    grid: &SampleGrid,
    child_states: usize,
    variance: f64,
) -> Vec<f64> {
    let sd = variance.sqrt();
    let mut masses = PartitionMasses::new(child_states);
    let mut buf = vec![0.0; child_states];
    let mut acc = Cascade::new(child_states);
    grid.for_each_combination(|z| {
        masses.fill(spec.evaluate(z), sd, &mut buf);
        acc.push(&buf);
    });
    let scale = 1.0 / grid.combinations() as f64;
    let mut p = acc.finish();
    for v in &mut p {
        *v *= scale;
    }
    p
}

/// Child distribution for one parent configuration.
pub fn generate_distribution(
    spec: &WeightExpression,
    fragment: &RankedFragment,
    config: &ParentConfiguration,
    params: &GenerationParams,
) -> Result<ConditionalDistribution> {
    let grid = checked_grid(
        spec,
        fragment,
        config,
        params.sample_size(),
        params.max_combinations(),
    )?;
    Ok(ConditionalDistribution::from_raw(distribution_on_grid(
        spec,
        &grid,
        fragment.child_states(),
        params.variance(),
    )))
}

/// The whole table, one column per configuration in lexicographic order.
/// Columns are computed in parallel.
pub fn generate_cpt(
    spec: &WeightExpression,
    fragment: &RankedFragment,
    params: &GenerationParams,
) -> Result<Cpt> {
    spec.validate(fragment)?;
    let per_column = (params.sample_size() as u128).saturating_pow(fragment.parent_count() as u32);
    params.check_cap(per_column.saturating_mul(fragment.configuration_count()))?;
    let configs: Vec<ParentConfiguration> = fragment.configurations().collect();
    let columns = configs
        .into_par_iter()
        .map(|c| {
            let grid = SampleGrid::new(fragment, &c, params.sample_size())?;
            let p = distribution_on_grid(spec, &grid, fragment.child_states(), params.variance());
            Ok((c, ConditionalDistribution::from_raw(p)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Cpt::from_columns(fragment.clone(), columns))
}

/// Sample count and seed of the Monte Carlo limit oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LimitOracleParams {
    pub mc_samples: u64,
    pub rng_seed: u64,
}

/// Monte Carlo estimate with one standard error per child state.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitEstimate {
    pub distribution: ConditionalDistribution,
    pub std_error: Vec<f64>,
}

/// Samples per RNG stream. Block `b` draws from stream `b` of the seed, so the
/// estimate does not depend on how blocks are scheduled.
const MC_BLOCK: u64 = 8192;

pub(crate) fn draw_point(rng: &mut ChaCha8Rng, lower: &[f64], width: &[f64], z: &mut [f64]) {
    for ((z, lo), w) in z.iter_mut().zip(lower).zip(width) {
        *z = lo + w * rng.random::<f64>();
    }
}

/// Estimates the limit of the generator as `s → ∞` by drawing each parent
/// value uniformly on its state interval.
pub fn limit_distribution(
    spec: &WeightExpression,
    fragment: &RankedFragment,
    config: &ParentConfiguration,
    variance: f64,
    oracle: LimitOracleParams,
) -> Result<LimitEstimate> {
    spec.validate(fragment)?;
    GenerationParams::new(variance, 2)?;
    if oracle.mc_samples == 0 {
        return Err(argument("mc_samples must be at least 1"));
    }
    let config = ParentConfiguration::new(config.states().to_vec(), fragment)?;
    let intervals = config
        .states()
        .iter()
        .zip(fragment.parent_states())
        .map(|(&k, &m)| state_interval(k, m))
        .collect::<Result<Vec<_>>>()?;
    let lower: Vec<f64> = intervals.iter().map(|iv| iv.lower).collect();
    let width: Vec<f64> = intervals.iter().map(|iv| iv.width()).collect();
    let mc = fragment.child_states();
    let sd = variance.sqrt();
    let blocks = oracle.mc_samples.div_ceil(MC_BLOCK);

    let partials: Vec<(Vec<f64>, Vec<f64>)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(oracle.rng_seed);
            rng.set_stream(b);
            let count = MC_BLOCK.min(oracle.mc_samples - b * MC_BLOCK);
            let mut masses = PartitionMasses::new(mc);
            let mut z = vec![0.0; lower.len()];
            let mut buf = vec![0.0; mc];
            let mut sum = Cascade::new(mc);
            let mut sq = Cascade::new(mc);
            let mut sqbuf = vec![0.0; mc];
            for _ in 0..count {
                draw_point(&mut rng, &lower, &width, &mut z);
                masses.fill(spec.evaluate(&z), sd, &mut buf);
                for (q, p) in sqbuf.iter_mut().zip(&buf) {
                    *q = p * p;
                }
                sum.push(&buf);
                sq.push(&sqbuf);
            }
            (sum.finish(), sq.finish())
        })
        .collect();

    let mut sum = Cascade::new(mc);
    let mut sq = Cascade::new(mc);
    for (s, q) in &partials {
        sum.push(s);
        sq.push(q);
    }
    let n = oracle.mc_samples as f64;
    let mean: Vec<f64> = sum.finish().into_iter().map(|v| v / n).collect();
    let std_error = sq
        .finish()
        .into_iter()
        .zip(&mean)
        .map(|(q, m)| {
            if oracle.mc_samples < 2 {
                return 0.0;
            }
            let var = ((q / n - m * m) * n / (n - 1.0)).max(0.0);
            (var / n).sqrt()
        })
        .collect();
    Ok(LimitEstimate {
        distribution: ConditionalDistribution::from_raw(mean),
        std_error,
    })
}
