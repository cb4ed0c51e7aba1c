use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use expertkm::cli::{self, Command, EstimateConfig, Estimator, FitConfig, FitModel, SimulateConfig};
use expertkm::sim::{GammaNoise, ScenarioConfig};
use expertkm::{Error, ExpertMode, FitMethod, Result};

/// Kaplan–Meier estimation with expert information on closed claims.
#[derive(Parser)]
#[command(name = "expertkm", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Simulate contaminated claims, optionally with a crude or sophisticated expert.
    Simulate(SimulateArgs),
    /// Evaluate an estimator on the export grid and write a curve CSV.
    Estimate(EstimateArgs),
    /// Fit a parametric model to an expert estimator and print a JSON report.
    Fit(FitArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON scenario file; explicit flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Crude expert effectiveness p0 in [0, 1].
    #[arg(long)]
    crude_p0: Option<f64>,
    /// Sophisticated expert noise as mean_shape,mean_rate,sd_shape,sd_rate.
    #[arg(long, value_delimiter = ',')]
    soph_noise: Option<Vec<f64>>,
    /// Multiplier on the sophisticated expert's noise.
    #[arg(long)]
    soph_spread: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    w1: Option<f64>,
    #[arg(long)]
    w2: Option<f64>,
    #[arg(long)]
    horizon: Option<f64>,
    /// Observation CSV to write.
    #[arg(long, short)]
    out: PathBuf,
    /// Kernel CSV to write; defaults to <out stem>.kernels.csv.
    #[arg(long)]
    kernels_out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Km,
    Crude,
    Sophisticated,
    Oracle,
}

#[derive(Args)]
struct EstimateArgs {
    /// Observation CSV.
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long)]
    kernels: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "km")]
    estimator: EstimatorArg,
    /// Equispaced grid points on [0, max W], added to the observed values.
    #[arg(long, default_value_t = cli::DEFAULT_GRID_POINTS)]
    grid_points: usize,
    /// Curve CSV to write.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Exp,
    Pareto,
    Hill,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Crude,
    Sophisticated,
}

#[derive(Args)]
struct FitArgs {
    /// Observation CSV.
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long)]
    kernels: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: ModelArg,
    /// Known Pareto scale.
    #[arg(long)]
    sigma: Option<f64>,
    /// Number of upper order statistics for Hill.
    #[arg(long)]
    k: Option<usize>,
    /// Hill estimates for every k = 1, ..., n - 1.
    #[arg(long)]
    sweep: bool,
    #[arg(long, value_enum, default_value = "crude")]
    mode: ModeArg,
    /// Maximise the weighted likelihood numerically instead of the closed form.
    #[arg(long)]
    numeric: bool,
    /// Report file; the report goes to stdout when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    manifest: PathBuf,
    /// Write outputs into this directory instead of their recorded paths.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

fn scenario(args: &SimulateArgs) -> Result<ScenarioConfig> {
    let mut cfg = match &args.config {
        Some(path) => serde_json::from_reader(expertkm::io::open(path)?)?,
        None => ScenarioConfig::new(5000, 1),
    };
    let h = &mut cfg.hazards;
    for (slot, v) in [
        (&mut h.a, args.a),
        (&mut h.b, args.b),
        (&mut h.c, args.c),
        (&mut h.w1, args.w1),
        (&mut h.w2, args.w2),
        (&mut h.horizon, args.horizon),
    ] {
        if let Some(v) = v {
            *slot = v;
        }
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if args.crude_p0.is_some() {
        cfg.crude_effectiveness = args.crude_p0;
    }
    if let Some(v) = &args.soph_noise {
        if v.len() != 4 {
            return Err(Error::Validation(format!("--soph-noise needs four comma-separated values, got {}", v.len())));
        }
        cfg.soph_noise = Some(GammaNoise { mean_shape: v[0], mean_rate: v[1], sd_shape: v[2], sd_rate: v[3] });
    }
    if let Some(f) = args.soph_spread {
        cfg.soph_spread = f;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn fit_model(args: &FitArgs) -> Result<FitModel> {
    match args.model {
        ModelArg::Exp => Ok(FitModel::Exponential),
        ModelArg::Pareto => args
            .sigma
            .map(|sigma| FitModel::Pareto { sigma })
            .ok_or_else(|| Error::Validation("--model pareto needs --sigma".into())),
        ModelArg::Hill if args.sweep => Ok(FitModel::HillSweep),
        ModelArg::Hill => args
            .k
            .map(|k| FitModel::Hill { k })
            .ok_or_else(|| Error::Validation("--model hill needs --k or --sweep".into())),
    }
}

fn resolve(sub: Sub) -> Result<Command> {
    Ok(match sub {
        Sub::Simulate(args) => {
            let scenario = scenario(&args)?;
            let kernels_output = scenario
                .soph_noise
                .map(|_| args.kernels_out.clone().unwrap_or_else(|| cli::default_kernels_path(&args.out)));
            Command::Simulate(SimulateConfig { scenario, output: args.out, kernels_output })
        }
        Sub::Estimate(args) => Command::Estimate(EstimateConfig {
            observations: args.input,
            kernels: args.kernels,
            estimator: match args.estimator {
                EstimatorArg::Km => Estimator::Km,
                EstimatorArg::Crude => Estimator::Crude,
                EstimatorArg::Sophisticated => Estimator::Sophisticated,
                EstimatorArg::Oracle => Estimator::Oracle,
            },
            grid_points: args.grid_points,
            output: args.out,
        }),
        Sub::Fit(args) => Command::Fit(FitConfig {
            model: fit_model(&args)?,
            observations: args.input,
            kernels: args.kernels,
            mode: match args.mode {
                ModeArg::Crude => ExpertMode::Crude,
                ModeArg::Sophisticated => ExpertMode::Sophisticated,
            },
            method: if args.numeric { FitMethod::Numeric } else { FitMethod::ClosedForm },
            output: args.out,
        }),
        Sub::Replay(_) => unreachable!("replay carries its own configuration"),
    })
}

fn run(sub: Sub) -> Result<()> {
    let outcome = match sub {
        Sub::Replay(args) => cli::replay(&args.manifest, args.output_dir.as_deref())?,
        other => cli::execute(&resolve(other)?)?,
    };
    if let (Command::Fit(FitConfig { output: None, .. }), Some(report)) = (&outcome.manifest.run, &outcome.report) {
        print!("{report}");
    }
    for out in &outcome.manifest.outputs {
        eprintln!("wrote {}", out.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Cli::parse();
    match run(args.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
