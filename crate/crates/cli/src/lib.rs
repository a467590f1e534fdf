//! Command-line front end for the fitting engine.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ifit_core::bounds::Bounds;
use ifit_core::harness;
use ifit_core::models::{by_name, load_toad_csv, toad_summary, ToadModel};
use ifit_core::sampling::RngStream;
use ifit_core::simulator::Simulator;
use ifit_core::{Config, Error, FitResult};

pub mod subprocess;

pub use subprocess::SubprocessSimulator;

/// Stream namespace for CLI-generated synthetic datasets.
const CLI_DATASET_TAG: u64 = 0xC11;

#[derive(Parser)]
#[command(
    name = "ifit",
    about = "Simulation-based fitting of generative models with intractable likelihoods",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Subcommand)]
enum Commands {
    /// Fit a model to observed (or synthetic) summary statistics.
    Fit(FitArgs),
    /// Monte Carlo benchmark over replicated synthetic datasets.
    Bench(BenchArgs),
    /// Repeat-fit study of the engine's own Monte Carlo error.
    Mcerr(McerrArgs),
    /// Print the adequacy diagnostics stored in a fit result.
    Diagnose(DiagnoseArgs),
}

#[derive(Args)]
struct FitArgs {
    /// Built-in model name (logit|enzyme|trait|toad) or exec:PATH for an
    /// external simulator speaking the wire protocol.
    #[arg(long)]
    model: String,
    /// Engine configuration file (JSON; missing keys take defaults).
    #[arg(long)]
    config: PathBuf,
    /// Master seed; overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Observed summary as JSON {"t":[...]}.
    #[arg(long)]
    obs: Option<PathBuf>,
    /// Observed toad positions as CSV (toad model only); missing cells
    /// reproduce their pattern in every simulation.
    #[arg(long)]
    toad_csv: Option<PathBuf>,
    /// Comma-separated lower bounds (exec models).
    #[arg(long)]
    lower: Option<String>,
    /// Comma-separated upper bounds (exec models).
    #[arg(long)]
    upper: Option<String>,
    /// Output path for the fit result (JSON).
    #[arg(long)]
    out: PathBuf,
    /// Optional per-iteration trace (CSV).
    #[arg(long)]
    trace_csv: Option<PathBuf>,
    /// Optional standardized scores (CSV).
    #[arg(long)]
    scores_csv: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Built-in model name.
    #[arg(long)]
    model: String,
    /// Replication count (default 100; 1000 with --full-scale).
    #[arg(long)]
    reps: Option<usize>,
    /// Full-scale replication count instead of the desk-scale default.
    #[arg(long)]
    full_scale: bool,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output path for the report (JSON).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct McerrArgs {
    /// Built-in model name.
    #[arg(long)]
    model: String,
    /// Number of datasets.
    #[arg(long, default_value_t = 20)]
    datasets: usize,
    /// Fits per dataset.
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DiagnoseArgs {
    /// A fit result written by `ifit fit`.
    #[arg(long)]
    result: PathBuf,
}

/// Parse arguments and run; returns the process exit code.
pub fn run<I, T>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    harness::configure_threads_from_env();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Version/help requests are successes, anything else is usage.
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(error: &Error) -> u8 {
    match error {
        Error::NonConvergence { .. } => 2,
        Error::Model { .. }
        | Error::Protocol(_)
        | Error::DegenerateData(_)
        | Error::DegenerateStatistic { .. }
        | Error::SingularMatrix { .. }
        | Error::Numerical(_) => 3,
        _ => 1,
    }
}

fn dispatch(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Commands::Fit(args) => cmd_fit(args),
        Commands::Bench(args) => cmd_bench(args),
        Commands::Mcerr(args) => cmd_mcerr(args),
        Commands::Diagnose(args) => cmd_diagnose(args),
    }
}

fn load_config(path: Option<&PathBuf>, seed: Option<u64>) -> Result<Config, Error> {
    let mut cfg = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            serde_json::from_str(&text)?
        }
        None => Config::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(serde::Deserialize)]
struct ObsFile {
    t: Vec<f64>,
}

fn load_obs(path: &PathBuf) -> Result<Vec<f64>, Error> {
    let text = std::fs::read_to_string(path)?;
    let obs: ObsFile = serde_json::from_str(&text)?;
    Ok(obs.t)
}

fn parse_bounds_list(text: &str, which: &str) -> Result<Vec<f64>, Error> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("bad {which} entry '{s}'")))
        })
        .collect()
}

fn cmd_fit(args: FitArgs) -> Result<(), Error> {
    let cfg = load_config(Some(&args.config), args.seed)?;

    let (sim, t_obs): (Box<dyn Simulator>, Vec<f64>) = if let Some(path) =
        args.model.strip_prefix("exec:")
    {
        let obs_path = args.obs.as_ref().ok_or_else(|| {
            Error::InvalidInput("exec models need --obs with the observed summary".into())
        })?;
        let t_obs = load_obs(obs_path)?;
        let lower = parse_bounds_list(
            args.lower.as_deref().ok_or_else(|| {
                Error::InvalidInput("exec models need --lower bounds".into())
            })?,
            "--lower",
        )?;
        let upper = parse_bounds_list(
            args.upper.as_deref().ok_or_else(|| {
                Error::InvalidInput("exec models need --upper bounds".into())
            })?,
            "--upper",
        )?;
        let bounds = Bounds::new(lower, upper)?;
        let sim = SubprocessSimulator::new(path, bounds, t_obs.len());
        (Box::new(sim), t_obs)
    } else {
        let model = by_name(&args.model).ok_or_else(|| {
            Error::InvalidInput(format!(
                "unknown model '{}'; expected logit|enzyme|trait|toad or exec:PATH",
                args.model
            ))
        })?;
        if let Some(csv) = &args.toad_csv {
            if args.model != "toad" {
                return Err(Error::InvalidInput("--toad-csv only applies to the toad model".into()));
            }
            let data = load_toad_csv(csv)?;
            let t_obs = toad_summary(&data)?;
            (Box::new(ToadModel::with_mask(data)), t_obs)
        } else {
            let mut dataset_rng = RngStream::new(cfg.seed, CLI_DATASET_TAG);
            let (sim, generated) = model.generate(&mut dataset_rng)?;
            let t_obs = match &args.obs {
                Some(path) => load_obs(path)?,
                None => generated,
            };
            (Box::new(SharedSim(sim)), t_obs)
        }
    };

    let result = harness::fit(sim.as_ref(), &t_obs, &cfg)?;
    harness::write_json(&result, &args.out)?;
    if let Some(path) = &args.trace_csv {
        harness::write_trace_csv(&result.trace, path)?;
    }
    if let Some(path) = &args.scores_csv {
        harness::write_scores_csv(&result.std_scores, path)?;
    }
    print_fit_summary(&result);
    println!("result written to {}", args.out.display());
    Ok(())
}

/// Adapter so a shared simulator from the model registry can be boxed.
struct SharedSim(std::sync::Arc<dyn Simulator>);

impl Simulator for SharedSim {
    fn dim_theta(&self) -> usize {
        self.0.dim_theta()
    }
    fn dim_stat(&self) -> usize {
        self.0.dim_stat()
    }
    fn bounds(&self) -> &Bounds {
        self.0.bounds()
    }
    fn simulate(&self, theta: &[f64], rng: &mut RngStream) -> Result<Vec<f64>, Error> {
        self.0.simulate(theta, rng)
    }
}

fn print_fit_summary(result: &FitResult) {
    println!("estimate:");
    for (i, (est, se)) in result.estimate.iter().zip(&result.std_errors).enumerate() {
        println!("  theta[{i}] = {est:.6}  (se {se:.6})");
    }
    println!("model simulations: {}", result.n_simulations);
    match result.sh_pvalue {
        Some(p) => println!(
            "Sargan-Hansen: stat {:.4}, df {}, p-value {:.4}",
            result.sh_stat, result.sh_df, p
        ),
        None => println!(
            "Sargan-Hansen: stat {:.4}, df 0 (exactly identified), p-value n/a",
            result.sh_stat
        ),
    }
}

fn cmd_bench(args: BenchArgs) -> Result<(), Error> {
    let cfg = load_config(args.config.as_ref(), None)?;
    let model = by_name(&args.model)
        .ok_or_else(|| Error::InvalidInput(format!("unknown model '{}'", args.model)))?;
    let reps = args.reps.unwrap_or(if args.full_scale { 1000 } else { 100 });
    let seed = args.seed.unwrap_or(cfg.seed);
    let report = harness::benchmark(model.as_ref(), reps, &cfg, seed)?;

    println!("model: {}", report.model);
    println!("replications: {} ({} converged)", report.replications, report.successes);
    println!("AMS:  {:.1}", report.ams);
    println!("AARE: {:.4}", report.aare);
    println!("parameter   se        ave(se^)  sd(se^)");
    for (i, s) in report.per_parameter.iter().enumerate() {
        println!("  theta[{i}]  {:<9.4} {:<9.4} {:<9.4}", s.se, s.ave_se, s.sd_se);
    }
    if report.excessive_failures {
        println!(
            "warning: {} of {} replications failed",
            report.failures, report.replications
        );
    }
    if let Some(path) = &args.out {
        harness::write_json(&report, path)?;
        println!("report written to {}", path.display());
    }
    Ok(())
}

fn cmd_mcerr(args: McerrArgs) -> Result<(), Error> {
    let cfg = load_config(args.config.as_ref(), None)?;
    let model = by_name(&args.model)
        .ok_or_else(|| Error::InvalidInput(format!("unknown model '{}'", args.model)))?;
    let seed = args.seed.unwrap_or(cfg.seed);
    let report = harness::mc_error_study(model.as_ref(), args.datasets, args.repeats, &cfg, seed)?;

    println!("model: {}", report.model);
    println!("datasets: {}, repeats: {}", report.datasets, report.repeats);
    println!("within/total sum-of-squares ratio per parameter:");
    for (i, r) in report.ratios.iter().enumerate() {
        println!("  theta[{i}]  {r:.5}");
    }
    if report.failures > 0 {
        println!("warning: {} fits failed", report.failures);
    }
    if let Some(path) = &args.out {
        harness::write_json(&report, path)?;
        println!("report written to {}", path.display());
    }
    Ok(())
}

fn cmd_diagnose(args: DiagnoseArgs) -> Result<(), Error> {
    let result = harness::load_fit_result(&args.result)?;
    match result.sh_pvalue {
        Some(p) => println!(
            "Sargan-Hansen test: stat {:.4}, df {}, p-value {:.4}",
            result.sh_stat, result.sh_df, p
        ),
        None => println!(
            "Sargan-Hansen test: stat {:.4}, df 0 (exactly identified), p-value n/a",
            result.sh_stat
        ),
    }
    println!("standardized summary scores:");
    println!("  index  score");
    for (i, s) in result.std_scores.iter().enumerate() {
        let flag = if s.abs() >= 2.0 { "  <-- |score| >= 2" } else { "" };
        println!("  {i:<5}  {s:+.4}{flag}");
    }
    Ok(())
}
