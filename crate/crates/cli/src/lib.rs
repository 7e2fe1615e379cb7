//! Command implementations behind the `rnm` binary.
//!
//! Exit codes: 0 success, 1 property failure, 2 invalid input, 3 resource
//! cap or time budget exceeded.

pub mod model_file;
pub mod output;

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use rnm::experiments::{
    log_grid, run_fig2, run_fig3, run_weight_update, Budget, Fig2Config, Fig3Config, VarianceBound,
    WeightUpdateConfig, RNG_ALGORITHM, VARIANCE_LOWER,
};
use rnm::suite::{run_property_suite, SuiteConfig, REDUCTION_SAMPLE_SIZE};
use rnm::RnmError;

use model_file::ModelFile;
use output::{fmt_num, write_csv, Manifest};

pub const ENV_MAX_COMBINATIONS: &str = "RNM_MAX_COMBINATIONS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Resource(String),
    #[error("{0}")]
    PropertyFailure(String),
    #[error("time budget exhausted; partial results written to {0}")]
    Budget(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::PropertyFailure(_) => 1,
            CliError::Validation(_) | CliError::Io(_) => 2,
            CliError::Resource(_) | CliError::Budget(_) => 3,
        }
    }
}

impl From<RnmError> for CliError {
    fn from(e: RnmError) -> Self {
        match e {
            RnmError::Resource { .. } => CliError::Resource(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Settings shared by every command.
#[derive(Debug, Clone)]
pub struct Global {
    pub seed: u64,
    pub threads: Option<usize>,
    pub output_dir: PathBuf,
    pub time_budget: Option<Duration>,
    pub max_combinations: Option<u64>,
}

impl Global {
    pub fn budget(&self, start: Instant) -> Budget {
        self.time_budget
            .map(|d| Budget::until(start + d))
            .unwrap_or_default()
    }

    fn path(&self, name: &str) -> PathBuf {
        self.output_dir.join(name)
    }

    fn manifest<P: Serialize>(&self, command: &str, parameters: P, complete: bool) -> Manifest<P> {
        Manifest {
            tool: "rnm",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            seed: self.seed,
            rng: RNG_ALGORITHM,
            threads: self.threads,
            complete,
            parameters,
        }
    }

    fn finish<P: Serialize>(
        &self,
        command: &str,
        parameters: P,
        complete: bool,
        outputs: &[&Path],
    ) -> Result<(), CliError> {
        let manifest = self.manifest(command, parameters, complete);
        manifest.write(&self.path(&format!("{command}.manifest.json")))?;
        if complete {
            Ok(())
        } else {
            let names: Vec<String> = outputs.iter().map(|p| p.display().to_string()).collect();
            Err(CliError::Budget(names.join(", ")))
        }
    }
}

/// Reads the enumeration cap override from the environment.
pub fn max_combinations_from_env() -> Result<Option<u64>, CliError> {
    match std::env::var(ENV_MAX_COMBINATIONS) {
        Ok(v) => v.trim().parse::<u64>().map(Some).map_err(|_| {
            CliError::Validation(format!(
                "{ENV_MAX_COMBINATIONS}={v:?} is not a non-negative integer"
            ))
        }),
        Err(_) => Ok(None),
    }
}

pub fn gen_cpt(g: &Global, model: &Path, output: Option<&Path>) -> Result<PathBuf, CliError> {
    let file = ModelFile::load(model)?;
    let model = file.clone().into_model(g.max_combinations)?;
    let cpt = rnm::generate_cpt(&model.spec, &model.fragment, &model.params)?;
    let n = model.fragment.parent_count();
    let mut header: Vec<String> = (1..=n).map(|i| format!("k_{i}")).collect();
    header.extend((1..=model.fragment.child_states()).map(|k| format!("p_{k}")));
    let rows = cpt.iter().map(|(c, d)| {
        c.states()
            .iter()
            .map(|k| k.to_string())
            .chain(d.probabilities().iter().map(|&p| fmt_num(p)))
            .collect::<Vec<_>>()
    });
    let path = output
        .map(Path::to_path_buf)
        .unwrap_or_else(|| g.path("cpt.csv"));
    write_csv(&path, &header, rows)?;
    g.finish("gen-cpt", &file, true, &[&path])?;
    Ok(path)
}

#[derive(Debug, Serialize)]
struct CheckParams {
    trials: usize,
    mutate_for_test: bool,
}

pub fn check_props(g: &Global, trials: usize, mutate: bool) -> Result<PathBuf, CliError> {
    if trials == 0 {
        return Err(CliError::Validation("trials must be at least 1".into()));
    }
    let start = Instant::now();
    let config = SuiteConfig {
        trials,
        seed: g.seed,
        mutate,
    };
    let report = run_property_suite(&config, &g.budget(start))?;
    let header = [
        "family",
        "trial",
        "property",
        "expression",
        "weights",
        "m",
        "n",
        "s",
        "variance",
        "configuration",
        "detail",
    ];
    let join = |v: &[f64]| v.iter().map(|&x| fmt_num(x)).collect::<Vec<_>>().join(";");
    let mut rows: Vec<Vec<String>> = report
        .counterexamples
        .iter()
        .map(|c| {
            vec![
                "generator".into(),
                c.trial.to_string(),
                c.property.name().into(),
                c.case.spec.kind().name().into(),
                join(&c.case.spec.weights()),
                c.case.m.to_string(),
                c.case.n().to_string(),
                c.case.s.to_string(),
                fmt_num(c.case.variance),
                c.case
                    .config
                    .iter()
                    .map(|k| k.to_string())
                    .collect::<Vec<_>>()
                    .join(";"),
                c.detail.clone(),
            ]
        })
        .collect();
    rows.extend(report.reduction_counterexamples.iter().map(|c| {
        vec![
            "wmin-reduction".into(),
            c.trial.to_string(),
            c.property.name().into(),
            "WMIN".into(),
            join(&c.case.weights),
            c.case.m.to_string(),
            c.case.n().to_string(),
            REDUCTION_SAMPLE_SIZE.to_string(),
            fmt_num(c.case.variance),
            format!("low parent {}", c.case.low_parent),
            c.detail.clone(),
        ]
    }));
    let path = g.path("counterexamples.csv");
    write_csv(&path, &header, rows.into_iter())?;
    let failures = report.counterexamples.len() + report.reduction_counterexamples.len();
    g.finish(
        "check-props",
        CheckParams {
            trials,
            mutate_for_test: mutate,
        },
        report.complete,
        &[&path],
    )?;
    if failures > 0 {
        return Err(CliError::PropertyFailure(format!(
            "{failures} counterexample(s) over {} generator and {} reduction trials, see {}",
            report.trials_run,
            report.reduction_trials_run,
            path.display()
        )));
    }
    Ok(path)
}

#[derive(Debug, Serialize)]
struct GridParams {
    states: Vec<usize>,
    points: usize,
    variance_lower: f64,
    variance_upper: Option<f64>,
}

fn grids(
    states: &[usize],
    points: usize,
    upper: Option<f64>,
) -> Result<Vec<(usize, Vec<f64>)>, CliError> {
    states
        .iter()
        .map(|&m| {
            let hi = upper.unwrap_or(if m >= 20 { 0.02 } else { 0.1 });
            Ok((m, log_grid(VARIANCE_LOWER, hi, points)?))
        })
        .collect()
}

pub fn fig2(
    g: &Global,
    states: &[usize],
    points: usize,
    upper: Option<f64>,
) -> Result<PathBuf, CliError> {
    let start = Instant::now();
    let config = Fig2Config {
        grids: grids(states, points, upper)?,
    };
    let report = run_fig2(&config, &g.budget(start))?;
    let path = g.path("fig2.csv");
    write_csv(
        &path,
        &["m", "variance", "d_ub", "d_rnm5", "d_rnm10"],
        report.rows.iter().map(|r| {
            vec![
                r.m.to_string(),
                fmt_num(r.variance),
                fmt_num(r.d_ub),
                fmt_num(r.d_rnm5),
                fmt_num(r.d_rnm10),
            ]
        }),
    )?;
    g.finish(
        "fig2",
        GridParams {
            states: states.to_vec(),
            points,
            variance_lower: VARIANCE_LOWER,
            variance_upper: upper,
        },
        report.complete,
        &[&path],
    )?;
    Ok(path)
}

#[derive(Debug, Serialize)]
struct Table1Params {
    replications: usize,
    variance_bound: &'static str,
    sample_size: usize,
    widened_intervals: usize,
    resampled_draws: usize,
}

pub fn table1(g: &Global, replications: usize, bound: VarianceBound) -> Result<PathBuf, CliError> {
    let start = Instant::now();
    let mut config = WeightUpdateConfig::new(replications, g.seed);
    config.variance_bound = bound;
    let report = run_weight_update(&config, &g.budget(start))?;
    let path = g.path("table1.csv");
    let empty = String::new;
    let mut rows = vec![
        vec![
            "mean".into(),
            empty(),
            empty(),
            empty(),
            empty(),
            fmt_num(report.mean_e1),
            fmt_num(report.mean_e2),
            report.widened.to_string(),
            report.resampled.to_string(),
        ],
        vec![
            "max".into(),
            empty(),
            empty(),
            empty(),
            empty(),
            fmt_num(report.max_e1),
            fmt_num(report.max_e2),
            empty(),
            empty(),
        ],
    ];
    rows.extend(report.replications.iter().map(|r| {
        vec![
            "replication".into(),
            r.index.to_string(),
            r.m.to_string(),
            r.n.to_string(),
            fmt_num(r.variance),
            fmt_num(r.e1),
            fmt_num(r.e2),
            r.widened.to_string(),
            r.resampled.to_string(),
        ]
    }));
    write_csv(
        &path,
        &[
            "kind",
            "replication",
            "m",
            "n",
            "variance",
            "e1",
            "e2",
            "widened",
            "resampled",
        ],
        rows.into_iter(),
    )?;
    g.finish(
        "table1",
        Table1Params {
            replications,
            variance_bound: bound.name(),
            sample_size: config.sample_size,
            widened_intervals: report.widened,
            resampled_draws: report.resampled,
        },
        report.complete,
        &[&path],
    )?;
    Ok(path)
}

#[derive(Debug, Serialize)]
struct Fig3Params {
    grid: GridParams,
    parents: usize,
    sample_sizes: Vec<usize>,
}

pub fn fig3(
    g: &Global,
    states: &[usize],
    sample_sizes: &[usize],
    points: usize,
    upper: Option<f64>,
) -> Result<(PathBuf, PathBuf), CliError> {
    let start = Instant::now();
    let config = Fig3Config {
        parents: 4,
        grids: grids(states, points, upper)?,
        sample_sizes: sample_sizes.to_vec(),
    };
    let report = run_fig3(&config, &g.budget(start))?;
    let curves = g.path("fig3.csv");
    write_csv(
        &curves,
        &["m", "s", "variance", "w_max", "d1"],
        report.rows.iter().map(|r| {
            vec![
                r.m.to_string(),
                r.s.to_string(),
                fmt_num(r.variance),
                fmt_num(r.w_max),
                fmt_num(r.d1),
            ]
        }),
    )?;
    let roots = g.path("fig3_roots.csv");
    write_csv(
        &roots,
        &["m", "s", "reference_variance", "w_max", "w_min"],
        report.roots.iter().map(|r| {
            vec![
                r.m.to_string(),
                r.s.to_string(),
                fmt_num(r.reference_variance),
                fmt_num(r.w_max),
                fmt_num(r.w_min),
            ]
        }),
    )?;
    g.finish(
        "fig3",
        Fig3Params {
            grid: GridParams {
                states: states.to_vec(),
                points,
                variance_lower: VARIANCE_LOWER,
                variance_upper: upper,
            },
            parents: 4,
            sample_sizes: sample_sizes.to_vec(),
        },
        report.complete,
        &[&curves, &roots],
    )?;
    Ok((curves, roots))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BisectArgs {
    pub j: u8,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub variance: f64,
    pub s: usize,
}

pub fn bisect(g: &Global, a: BisectArgs) -> Result<(f64, PathBuf), CliError> {
    let w = rnm::analysis::bisect_wmax(a.j, a.n, a.m, a.k, a.variance, a.s)?;
    let path = g.path("bisect_wmax.csv");
    write_csv(
        &path,
        &["j", "n", "m", "k", "variance", "s", "w_max", "w_min"],
        std::iter::once(vec![
            a.j.to_string(),
            a.n.to_string(),
            a.m.to_string(),
            a.k.to_string(),
            fmt_num(a.variance),
            a.s.to_string(),
            fmt_num(w),
            fmt_num(1.0 - w),
        ]),
    )?;
    g.finish("bisect-wmax", a, true, &[&path])?;
    Ok((w, path))
}
