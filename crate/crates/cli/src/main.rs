use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};

use rnm::experiments::VarianceBound;
use rnm_cli::{
    bisect, check_props, fig2, fig3, gen_cpt, max_combinations_from_env, table1, BisectArgs,
    CliError, Global,
};

/// Ranked nodes method: CPT generation, property checks and robustness
/// studies.
///
/// Exit codes: 0 success, 1 property failure, 2 invalid input, 3 resource
/// cap or time budget exceeded. RNM_MAX_COMBINATIONS overrides the cap on
/// enumerated sample combinations.
#[derive(Debug, Parser)]
#[command(name = "rnm", version)]
struct Cli {
    /// Seed of every random draw.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for CSV reports and manifests.
    #[arg(long, global = true, default_value = ".")]
    output_dir: PathBuf,
    /// Wall-clock budget in seconds; partial results are written and the
    /// exit code is 3 when it runs out.
    #[arg(long, global = true)]
    time_budget: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate the full CPT described by a model file.
    GenCpt {
        model: PathBuf,
        /// Output CSV; defaults to cpt.csv in the output directory.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the randomized property suites and write counterexamples.csv.
    CheckProps {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Corrupt each distribution before the adjacency check.
        #[arg(long)]
        mutate_for_test: bool,
    },
    /// Gap curves at the critical WMEAN weight (fig2.csv).
    Fig2 {
        #[arg(long, value_delimiter = ',', default_value = "3,4,5,6,7,8,9,10,20")]
        m: Vec<usize>,
        #[arg(long, default_value_t = 50)]
        points: usize,
        /// Upper end of the variance grid; default 0.1, or 0.02 for m >= 20.
        #[arg(long)]
        variance_max: Option<f64>,
    },
    /// Randomized weight-update study (table1.csv).
    Table1 {
        #[arg(long, default_value_t = 1000)]
        n_reps: usize,
        /// Upper end of the variance draw: quarter (1/(4m²)) or full (1/m²).
        #[arg(long, default_value = "quarter")]
        variance_bound: String,
    },
    /// MIXMINMAX gap curves at the bisected weight (fig3.csv, fig3_roots.csv).
    Fig3 {
        #[arg(long, value_delimiter = ',', default_value = "3,4,5,6,7,8,9,10,20")]
        m: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "3,5,10")]
        s: Vec<usize>,
        #[arg(long, default_value_t = 50)]
        points: usize,
        #[arg(long)]
        variance_max: Option<f64>,
    },
    /// Weight w_max at which a MIXMINMAX probability gap closes.
    BisectWmax {
        /// 1 for P(k) - P(k+1), 2 for P(k-1) - P(k+1).
        #[arg(long, default_value_t = 1)]
        j: u8,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 5)]
        m: usize,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value_t = 0.01)]
        variance: f64,
        #[arg(long, default_value_t = 3)]
        s: usize,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Validation(format!("--threads: {e}")))?;
    }
    let time_budget = match cli.time_budget {
        Some(s) if s.is_finite() && s >= 0.0 => Some(Duration::from_secs_f64(s)),
        Some(s) => {
            return Err(CliError::Validation(format!(
                "--time-budget {s} is invalid"
            )))
        }
        None => None,
    };
    let g = Global {
        seed: cli.seed,
        threads: cli.threads,
        output_dir: cli.output_dir,
        time_budget,
        max_combinations: max_combinations_from_env()?,
    };
    match cli.command {
        Command::GenCpt { model, output } => {
            let path = gen_cpt(&g, &model, output.as_deref())?;
            println!("wrote {}", path.display());
        }
        Command::CheckProps {
            trials,
            mutate_for_test,
        } => {
            let path = check_props(&g, trials, mutate_for_test)?;
            println!("no counterexamples in {trials} trials ({})", path.display());
        }
        Command::Fig2 {
            m,
            points,
            variance_max,
        } => {
            let path = fig2(&g, &m, points, variance_max)?;
            println!("wrote {}", path.display());
        }
        Command::Table1 {
            n_reps,
            variance_bound,
        } => {
            let bound: VarianceBound = variance_bound.parse()?;
            let path = table1(&g, n_reps, bound)?;
            println!("wrote {}", path.display());
        }
        Command::Fig3 {
            m,
            s,
            points,
            variance_max,
        } => {
            let (curves, roots) = fig3(&g, &m, &s, points, variance_max)?;
            println!("wrote {} and {}", curves.display(), roots.display());
        }
        Command::BisectWmax {
            j,
            n,
            m,
            k,
            variance,
            s,
        } => {
            let (w, path) = bisect(
                &g,
                BisectArgs {
                    j,
                    n,
                    m,
                    k,
                    variance,
                    s,
                },
            )?;
            println!(
                "w_max = {w:.6} (w_min = {:.6}), wrote {}",
                1.0 - w,
                path.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rnm: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
