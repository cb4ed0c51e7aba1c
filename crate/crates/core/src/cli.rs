//! Command implementations behind the `expertkm` binary. Each command is a
//! fully resolved, serialisable configuration; running it writes its
//! outputs plus a manifest from which the run can be replayed.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::expert::{self, ExpertSample};
use crate::io::{self, ObservationTable};
use crate::kernel::BeliefKernel;
use crate::semiparametric::{self, ExpertMode, FitMethod, FitResult, ParametricModel};
use crate::sim::{self, ScenarioConfig};

pub const DEFAULT_GRID_POINTS: usize = 512;
/// Probability level of the reported upper time `θ`.
pub const THETA_LEVEL: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    Km,
    Crude,
    Sophisticated,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum FitModel {
    Exponential,
    Pareto { sigma: f64 },
    Hill { k: usize },
    HillSweep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub scenario: ScenarioConfig,
    pub output: PathBuf,
    pub kernels_output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateConfig {
    pub observations: PathBuf,
    pub kernels: Option<PathBuf>,
    pub estimator: Estimator,
    pub grid_points: usize,
    pub output: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub observations: PathBuf,
    pub kernels: Option<PathBuf>,
    pub model: FitModel,
    pub mode: ExpertMode,
    pub method: FitMethod,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    Simulate(SimulateConfig),
    Estimate(EstimateConfig),
    Fit(FitConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub run: Command,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub details: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: usize,
    pub estimate: Option<f64>,
    pub weight_mass: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FitReport {
    Single {
        #[serde(flatten)]
        model: FitModel,
        mode: ExpertMode,
        #[serde(flatten)]
        result: FitResult,
    },
    Sweep {
        #[serde(flatten)]
        model: FitModel,
        mode: ExpertMode,
        method: FitMethod,
        rows: Vec<SweepRow>,
    },
}

pub struct Outcome {
    pub manifest: RunManifest,
    /// Fit report text, for printing when no output file was requested.
    pub report: Option<String>,
}

/// `data.csv` → `data.manifest.json`.
pub fn manifest_path(output: &Path) -> PathBuf {
    output.with_extension("manifest.json")
}

/// `data.csv` → `data.kernels.csv`.
pub fn default_kernels_path(output: &Path) -> PathBuf {
    output.with_extension("kernels.csv")
}

pub fn load_table(path: &Path) -> Result<ObservationTable> {
    io::read_observations(io::open(path)?)
}

pub fn load_kernels(path: &Path, table: &ObservationTable) -> Result<Vec<Option<BeliefKernel>>> {
    io::read_kernels(io::open(path)?, table)
}

fn require_eta(table: &ObservationTable) -> Result<()> {
    if let Some(r) = table.observations.iter().position(|o| o.delta && o.eta.is_none()) {
        return Err(Error::Validation(format!(
            "row {}, column eta: the crude estimator needs a judgment for every closed claim",
            r + 1
        )));
    }
    Ok(())
}

fn require_x_true(table: &ObservationTable) -> Result<()> {
    if let Some(r) = table.observations.iter().position(|o| o.delta && o.x_true.is_none()) {
        return Err(Error::Validation(format!(
            "row {}, column x_true: the oracle estimator needs the hidden event time of every closed claim",
            r + 1
        )));
    }
    Ok(())
}

fn expert_sample(table: &ObservationTable, kernels: Option<Vec<Option<BeliefKernel>>>) -> Result<ExpertSample> {
    match kernels {
        Some(k) => ExpertSample::with_beliefs(&table.observations, k),
        None => ExpertSample::new(&table.observations),
    }
}

fn require_kernels(kernels: Option<Vec<Option<BeliefKernel>>>) -> Result<Vec<Option<BeliefKernel>>> {
    kernels.ok_or_else(|| Error::Validation("the sophisticated estimator needs a kernel file (--kernels)".into()))
}

/// Evaluates an estimator on the export grid. Returns the grid, the values
/// and `θ`, the empirical 0.95 quantile of `W`.
pub fn estimate_curve(
    table: &ObservationTable,
    kernels: Option<Vec<Option<BeliefKernel>>>,
    estimator: Estimator,
    grid_points: usize,
) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let sample = match estimator {
        Estimator::Km => expert_sample(table, None)?,
        Estimator::Crude => {
            require_eta(table)?;
            expert_sample(table, None)?
        }
        Estimator::Oracle => {
            require_x_true(table)?;
            expert_sample(table, None)?
        }
        Estimator::Sophisticated => expert_sample(table, Some(require_kernels(kernels)?))?,
    };
    let w = sample.base().w_values();
    let grid = expert::export_grid(&w, grid_points);
    let values = match estimator {
        Estimator::Km => expert::usual_km(&sample)?.curve.evaluate_many(&grid),
        Estimator::Crude => expert::crude_km(&sample)?.curve.evaluate_many(&grid),
        Estimator::Sophisticated => expert::sophisticated_km(&sample)?.on_grid(&grid),
        Estimator::Oracle => expert::oracle_km(&sample)?.evaluate_many(&grid),
    };
    let theta = sample.base().quantile(THETA_LEVEL).unwrap_or(f64::NAN);
    Ok((grid, values, theta))
}

fn single_fit(sample: &ExpertSample, model: FitModel, mode: ExpertMode, method: FitMethod) -> Result<FitResult> {
    use ExpertMode::*;
    match (model, method) {
        (FitModel::Exponential, FitMethod::ClosedForm) => match mode {
            Crude => semiparametric::fit_exponential_crude(sample),
            Sophisticated => semiparametric::fit_exponential_sophisticated(sample),
        },
        (FitModel::Exponential, FitMethod::Numeric) => {
            semiparametric::fit_numeric(sample, ParametricModel::Exponential, mode)
        }
        (FitModel::Pareto { sigma }, FitMethod::ClosedForm) => semiparametric::fit_pareto(sample, sigma, mode),
        (FitModel::Pareto { sigma }, FitMethod::Numeric) => {
            semiparametric::fit_numeric(sample, ParametricModel::pareto(sigma)?, mode)
        }
        (FitModel::Hill { k }, FitMethod::ClosedForm) => semiparametric::fit_hill(sample, k, mode),
        (FitModel::Hill { k }, FitMethod::Numeric) => semiparametric::fit_numeric_hill(sample, k, mode),
        (FitModel::HillSweep, _) => unreachable!("sweeps are handled by the caller"),
    }
}

pub fn fit_report(
    table: &ObservationTable,
    kernels: Option<Vec<Option<BeliefKernel>>>,
    model: FitModel,
    mode: ExpertMode,
    method: FitMethod,
) -> Result<FitReport> {
    if let FitModel::Pareto { sigma } = model {
        ParametricModel::pareto(sigma)?;
    }
    let sample = match mode {
        ExpertMode::Crude => {
            require_eta(table)?;
            expert_sample(table, None)?
        }
        ExpertMode::Sophisticated => expert_sample(table, Some(require_kernels(kernels)?))?,
    };
    if model == FitModel::HillSweep {
        let rows = (1..sample.len())
            .map(|k| match single_fit(&sample, FitModel::Hill { k }, mode, method) {
                Ok(r) => SweepRow { k, estimate: Some(r.estimate), weight_mass: Some(r.weight_mass), error: None },
                Err(e) => SweepRow { k, estimate: None, weight_mass: None, error: Some(e.to_string()) },
            })
            .collect();
        return Ok(FitReport::Sweep { model, mode, method, rows });
    }
    let result = single_fit(&sample, model, mode, method)?;
    Ok(FitReport::Single { model, mode, result })
}

fn write_manifest(manifest: &RunManifest, output: &Path) -> Result<()> {
    let mut f = io::create(&manifest_path(output))?;
    serde_json::to_writer_pretty(&mut f, manifest)?;
    std::io::Write::write_all(&mut f, b"\n")?;
    std::io::Write::flush(&mut f)?;
    Ok(())
}

fn manifest(run: &Command, inputs: Vec<PathBuf>, outputs: Vec<PathBuf>, details: serde_json::Value) -> RunManifest {
    RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        run: run.clone(),
        inputs,
        outputs,
        details,
    }
}

fn run_simulate(cfg: &SimulateConfig, run: &Command) -> Result<Outcome> {
    let data = sim::simulate(&cfg.scenario)?;
    let table = ObservationTable::numbered(data.observations);
    let mut outputs = vec![cfg.output.clone()];
    let mut f = io::create(&cfg.output)?;
    io::write_observations(&mut f, &table)?;
    if let Some(beliefs) = &data.beliefs {
        let path = cfg.kernels_output.clone().unwrap_or_else(|| default_kernels_path(&cfg.output));
        io::write_kernels(io::create(&path)?, &table.ids, beliefs)?;
        outputs.push(path);
    }
    let closed = table.observations.iter().filter(|o| o.delta).count();
    let details = json!({
        "n": table.observations.len(),
        "closed": closed,
        "contaminated_fraction": sim::contamination_fraction(&table.observations),
        "contaminated_among_closed": sim::contamination_among_closed(&table.observations),
    });
    let m = manifest(run, vec![], outputs, details);
    write_manifest(&m, &cfg.output)?;
    Ok(Outcome { manifest: m, report: None })
}

fn run_estimate(cfg: &EstimateConfig, run: &Command) -> Result<Outcome> {
    let table = load_table(&cfg.observations)?;
    let mut inputs = vec![cfg.observations.clone()];
    let kernels = match &cfg.kernels {
        Some(p) if cfg.estimator == Estimator::Sophisticated => {
            inputs.push(p.clone());
            Some(load_kernels(p, &table)?)
        }
        _ => None,
    };
    let (grid, values, theta) = estimate_curve(&table, kernels, cfg.estimator, cfg.grid_points)?;
    io::write_curve(io::create(&cfg.output)?, &grid, &values)?;
    let details = json!({
        "n": table.observations.len(),
        "theta": theta,
        "theta_level": THETA_LEVEL,
        "grid_points": cfg.grid_points,
        "grid_size": grid.len(),
    });
    let m = manifest(run, inputs, vec![cfg.output.clone()], details);
    write_manifest(&m, &cfg.output)?;
    Ok(Outcome { manifest: m, report: None })
}

fn run_fit(cfg: &FitConfig, run: &Command) -> Result<Outcome> {
    let table = load_table(&cfg.observations)?;
    let mut inputs = vec![cfg.observations.clone()];
    let kernels = match &cfg.kernels {
        Some(p) if cfg.mode == ExpertMode::Sophisticated => {
            inputs.push(p.clone());
            Some(load_kernels(p, &table)?)
        }
        _ => None,
    };
    let report = fit_report(&table, kernels, cfg.model, cfg.mode, cfg.method)?;
    let text = serde_json::to_string_pretty(&report)? + "\n";
    let outputs: Vec<PathBuf> = cfg.output.iter().cloned().collect();
    let m = manifest(run, inputs, outputs, json!({ "n": table.observations.len() }));
    if let Some(out) = &cfg.output {
        let mut f = io::create(out)?;
        std::io::Write::write_all(&mut f, text.as_bytes())?;
        std::io::Write::flush(&mut f)?;
        write_manifest(&m, out)?;
    }
    Ok(Outcome { manifest: m, report: Some(text) })
}

pub fn execute(run: &Command) -> Result<Outcome> {
    match run {
        Command::Simulate(cfg) => run_simulate(cfg, run),
        Command::Estimate(cfg) => run_estimate(cfg, run),
        Command::Fit(cfg) => run_fit(cfg, run),
    }
}

fn relocate(path: &Path, dir: &Path) -> PathBuf {
    dir.join(path.file_name().unwrap_or(path.as_os_str()))
}

/// Re-runs the command recorded in a manifest. With `output_dir`, outputs
/// keep their file names but are written into that directory; inputs are
/// read from the recorded paths.
pub fn replay(manifest_file: &Path, output_dir: Option<&Path>) -> Result<Outcome> {
    let m: RunManifest = serde_json::from_reader(io::open(manifest_file)?)?;
    let mut run = m.run;
    if let Some(dir) = output_dir {
        match &mut run {
            Command::Simulate(c) => {
                c.kernels_output = c
                    .kernels_output
                    .take()
                    .or_else(|| c.scenario.soph_noise.map(|_| default_kernels_path(&c.output)))
                    .map(|p| relocate(&p, dir));
                c.output = relocate(&c.output, dir);
            }
            Command::Estimate(c) => c.output = relocate(&c.output, dir),
            Command::Fit(c) => c.output = c.output.as_deref().map(|p| relocate(p, dir)),
        }
    }
    execute(&run)
}
