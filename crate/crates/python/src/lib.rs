//! Python bindings. Indices are 1-based, as in the Rust API.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use rnm::analysis::{self, ModePair};
use rnm::experiments::{run_weight_update, Budget, VarianceBound, WeightUpdateConfig};
use rnm::{
    ExpressionKind, GenerationParams, LimitOracleParams, ParentConfiguration, RankedFragment,
    RnmError, WeightExpression,
};

fn err(e: RnmError) -> PyErr {
    match e {
        RnmError::Resource { .. } => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// Parent and child state counts of one child node.
#[pyclass(name = "Fragment", frozen)]
struct Fragment(RankedFragment);

#[pymethods]
impl Fragment {
    #[new]
    fn new(parent_states: Vec<usize>, child_states: usize) -> PyResult<Self> {
        RankedFragment::new(parent_states, child_states)
            .map(Self)
            .map_err(err)
    }

    #[getter]
    fn parent_states(&self) -> Vec<usize> {
        self.0.parent_states().to_vec()
    }

    #[getter]
    fn child_states(&self) -> usize {
        self.0.child_states()
    }

    fn __repr__(&self) -> String {
        format!(
            "Fragment({:?}, {})",
            self.0.parent_states(),
            self.0.child_states()
        )
    }
}

/// A weighted expression: WMEAN, WMIN, WMAX or MIXMINMAX.
///
/// MIXMINMAX takes `[w_min, w_max]`.
#[pyclass(name = "Expression", frozen)]
struct Expression(WeightExpression);

#[pymethods]
impl Expression {
    #[new]
    fn new(kind: &str, weights: Vec<f64>) -> PyResult<Self> {
        let kind: ExpressionKind = kind.parse().map_err(err)?;
        let n = weights.len();
        let spec = WeightExpression::from_parts(kind, weights).map_err(|v| err(v.into()))?;
        // MIXMINMAX has two weights for any number of parents.
        let parents = if kind == ExpressionKind::MixMinMax {
            2
        } else {
            n.max(1)
        };
        let probe = RankedFragment::uniform(parents, 2).map_err(err)?;
        spec.validate(&probe).map_err(|v| err(v.into()))?;
        Ok(Self(spec))
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.0.kind().name()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.0.weights()
    }

    /// Mean of the child at one sample combination.
    fn evaluate(&self, z: Vec<f64>) -> PyResult<f64> {
        rnm::evaluate_mu(&self.0, &z).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Expression({:?}, {:?})",
            self.0.kind().name(),
            self.0.weights()
        )
    }
}

fn params(variance: f64, s: usize) -> PyResult<GenerationParams> {
    GenerationParams::new(variance, s).map_err(err)
}

/// Child distribution for one parent configuration.
#[pyfunction]
#[pyo3(signature = (expression, fragment, configuration, variance, s = 5))]
fn generate_distribution(
    expression: PyRef<'_, Expression>,
    fragment: PyRef<'_, Fragment>,
    configuration: Vec<usize>,
    variance: f64,
    s: usize,
) -> PyResult<Vec<f64>> {
    let config = ParentConfiguration::new(configuration, &fragment.0).map_err(err)?;
    rnm::generate_distribution(&expression.0, &fragment.0, &config, &params(variance, s)?)
        .map(|d| d.into_vec())
        .map_err(err)
}

/// Every column of the table as `(configuration, probabilities)` pairs in
/// lexicographic order.
#[pyfunction]
#[pyo3(signature = (expression, fragment, variance, s = 5))]
fn generate_cpt(
    py: Python<'_>,
    expression: PyRef<'_, Expression>,
    fragment: PyRef<'_, Fragment>,
    variance: f64,
    s: usize,
) -> PyResult<Vec<(Vec<usize>, Vec<f64>)>> {
    let p = params(variance, s)?;
    let (spec, frag) = (expression.0.clone(), fragment.0.clone());
    let cpt = py
        .detach(|| rnm::generate_cpt(&spec, &frag, &p))
        .map_err(err)?;
    Ok(cpt
        .iter()
        .map(|(c, d)| (c.states().to_vec(), d.probabilities().to_vec()))
        .collect())
}

/// Monte Carlo estimate of the `s → ∞` limit; returns the distribution and
/// one standard error per state.
#[pyfunction]
#[pyo3(signature = (expression, fragment, configuration, variance, samples = 100_000, seed = 0))]
fn limit_distribution(
    expression: PyRef<'_, Expression>,
    fragment: PyRef<'_, Fragment>,
    configuration: Vec<usize>,
    variance: f64,
    samples: u64,
    seed: u64,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let config = ParentConfiguration::new(configuration, &fragment.0).map_err(err)?;
    let oracle = LimitOracleParams {
        mc_samples: samples,
        rng_seed: seed,
    };
    let est = rnm::limit_distribution(&expression.0, &fragment.0, &config, variance, oracle)
        .map_err(err)?;
    Ok((est.distribution.into_vec(), est.std_error))
}

#[pyfunction]
fn tnorm_mass(a: f64, b: f64, mean: f64, variance: f64) -> PyResult<f64> {
    rnm::tnorm_mass(a, b, mean, variance).map_err(err)
}

#[pyfunction]
fn partition_masses(mean: f64, variance: f64, m: usize) -> PyResult<Vec<f64>> {
    rnm::partition_masses(mean, variance, m).map_err(err)
}

/// `(mode, runner_up)` of a distribution, 1-based.
#[pyfunction]
fn mode_pair(probabilities: Vec<f64>) -> PyResult<(usize, usize)> {
    let d = rnm::ConditionalDistribution::new(probabilities).map_err(err)?;
    let p = analysis::mode_pair(&d).map_err(err)?;
    Ok((p.mode, p.runner_up))
}

#[pyfunction]
fn check_consecutive_top2(probabilities: Vec<f64>) -> PyResult<bool> {
    let d = rnm::ConditionalDistribution::new(probabilities).map_err(err)?;
    Ok(analysis::check_consecutive_top2(&d))
}

/// Interval of the low parent's WMEAN weight giving the ordered mode pair.
#[pyfunction]
fn wmean_weight_interval(m: usize, mode: usize, runner_up: usize) -> PyResult<(f64, f64)> {
    let pair = ModePair::new(mode, runner_up).map_err(err)?;
    let iv = analysis::wmean_weight_interval(m, pair).map_err(err)?;
    Ok((iv.lower, iv.upper))
}

#[pyfunction]
fn d_ub(m: usize, k: usize, variance: f64) -> PyResult<f64> {
    analysis::d_ub(m, k, variance).map_err(err)
}

#[pyfunction]
fn bisect_wmax(j: u8, n: usize, m: usize, k: usize, variance: f64, s: usize) -> PyResult<f64> {
    analysis::bisect_wmax(j, n, m, k, variance, s).map_err(err)
}

#[pyfunction]
fn d_mix(
    j: u8,
    n: usize,
    m: usize,
    w_max: f64,
    variance: f64,
    s: usize,
    k: usize,
) -> PyResult<f64> {
    analysis::d_mix(j, n, m, w_max, variance, s, k).map_err(err)
}

/// Weight-update study; returns `(mean_e1, mean_e2, max_e1, max_e2)`.
#[pyfunction]
#[pyo3(signature = (replications, seed, variance_bound = "quarter"))]
fn weight_update_study(
    py: Python<'_>,
    replications: usize,
    seed: u64,
    variance_bound: &str,
) -> PyResult<(f64, f64, f64, f64)> {
    let mut config = WeightUpdateConfig::new(replications, seed);
    config.variance_bound = variance_bound.parse::<VarianceBound>().map_err(err)?;
    let r = py
        .detach(|| run_weight_update(&config, &Budget::unlimited()))
        .map_err(err)?;
    Ok((r.mean_e1, r.mean_e2, r.max_e1, r.max_e2))
}

#[pymodule]
fn rnm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Fragment>()?;
    m.add_class::<Expression>()?;
    m.add_function(wrap_pyfunction!(generate_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(generate_cpt, m)?)?;
    m.add_function(wrap_pyfunction!(limit_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(tnorm_mass, m)?)?;
    m.add_function(wrap_pyfunction!(partition_masses, m)?)?;
    m.add_function(wrap_pyfunction!(mode_pair, m)?)?;
    m.add_function(wrap_pyfunction!(check_consecutive_top2, m)?)?;
    m.add_function(wrap_pyfunction!(wmean_weight_interval, m)?)?;
    m.add_function(wrap_pyfunction!(d_ub, m)?)?;
    m.add_function(wrap_pyfunction!(bisect_wmax, m)?)?;
    m.add_function(wrap_pyfunction!(d_mix, m)?)?;
    m.add_function(wrap_pyfunction!(weight_update_study, m)?)?;
    Ok(())
}
