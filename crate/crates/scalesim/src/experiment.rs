//! End-to-end experiments behind the command-line subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use scalesim_core::arima::{Prediction, SlidingForecast};
use scalesim_core::metrics::{self, mae, mape, r2};
use scalesim_core::sim::{self, Feedback, PrecomputedForecaster, SimulationOutput};
use scalesim_core::trace::{normalize_grid, to_demand_series};
use scalesim_core::{
    AdiBounds, DemandSeries, FillPolicy, InstanceCatalog, MetricsReport, PolicyConfig, SearchConfig, SimulationConfig,
    SimulationRecord, SlidingWindowConfig, TracePoint,
};

use crate::config::{PolicyFile, PolicyKind, Preset};
use crate::error::{Error, Result};
use crate::generate::{generate, GeneratorParams};
use crate::output::{self, Comparison};
use crate::{forecast, io};

/// Where the utilization trace comes from and how it becomes core demand.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSpec {
    pub trace: PathBuf,
    pub catalog: Option<PathBuf>,
    /// vCPUs for instance types missing from the catalog.
    pub assume_vcpus: Option<u32>,
    pub fill: FillPolicy,
    pub step: i64,
    /// Instances behind each fleet-average utilization sample.
    pub fleet_size: f64,
}

impl InputSpec {
    pub fn new(trace: impl Into<PathBuf>) -> Self {
        Self {
            trace: trace.into(),
            catalog: None,
            assume_vcpus: None,
            fill: FillPolicy::default(),
            step: scalesim_core::trace::DEFAULT_STEP,
            fleet_size: 1.0,
        }
    }
}

/// A loaded trace on the simulation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Workload {
    pub points: Vec<TracePoint>,
    pub demand: DemandSeries,
}

impl Workload {
    pub fn utilization(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.utilization).collect()
    }
}

pub fn load_workload(input: &InputSpec) -> Result<Workload> {
    let raw = io::read_trace(&input.trace)?;
    let mut catalog = match &input.catalog {
        Some(path) => io::read_catalog(path)?,
        None => InstanceCatalog::new(),
    };
    catalog.set_fallback(input.assume_vcpus);
    let points = normalize_grid(&raw, input.step, input.fill)?;
    if points.len() != raw.len() {
        log::info!("grid normalization: {} rows became {} steps", raw.len(), points.len());
    }
    if !(input.fleet_size > 0.0 && input.fleet_size.is_finite()) {
        return Err(Error::Config("fleet size must be positive".into()));
    }
    let demand = to_demand_series(&points, &catalog, input.step)?.scaled(input.fleet_size)?;
    Ok(Workload { points, demand })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FeedbackMode {
    #[default]
    Simulated,
    Trace,
}

/// Everything an experiment needs besides the input.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub input: InputSpec,
    pub preset: Preset,
    /// Policy file merged with command-line overrides.
    pub policy: PolicyFile,
    pub window: SlidingWindowConfig,
    pub search: SearchConfig,
    pub sim: SimulationConfig,
    pub feedback: FeedbackMode,
    pub bounds: AdiBounds,
    pub out: PathBuf,
    pub jobs: usize,
}

impl ExperimentSpec {
    pub fn new(input: InputSpec, out: impl Into<PathBuf>) -> Self {
        Self {
            input,
            preset: Preset::Paper,
            policy: PolicyFile::default(),
            window: SlidingWindowConfig::default(),
            search: SearchConfig::default(),
            sim: SimulationConfig::default(),
            feedback: FeedbackMode::Simulated,
            bounds: AdiBounds::default(),
            out: out.into(),
            jobs: 1,
        }
    }

    pub fn policy_config(&self, kind: PolicyKind) -> Result<PolicyConfig> {
        let cfg = self.policy.resolve(kind, self.preset)?;
        if let PolicyConfig::TargetTracking(c) = cfg {
            if c.horizon != self.window.horizon {
                return Err(Error::Config(format!(
                    "policy horizon ({}) differs from forecast horizon ({})",
                    c.horizon, self.window.horizon
                )));
            }
        }
        Ok(cfg)
    }

    /// Steps excluded from metrics: everything before the first forecast target.
    pub fn warmup(&self) -> usize {
        self.window.window_size + self.window.horizon - 1
    }

    fn out_dir(&self, sub: Option<&str>) -> Result<PathBuf> {
        let dir = match sub {
            Some(s) => self.out.join(s),
            None => self.out.clone(),
        };
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(dir)
    }
}

/// Forecast accuracy against the actual demand at each target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Accuracy {
    pub r2: Option<f64>,
    pub mae: f64,
    pub mape: Option<f64>,
    pub mape_excluded: usize,
    pub n: usize,
}

pub fn accuracy(demand: &DemandSeries, predictions: &[Prediction]) -> Result<Accuracy> {
    let actual: Vec<f64> = predictions.iter().map(|p| demand.values()[p.target]).collect();
    let predicted: Vec<f64> = predictions.iter().map(|p| p.value).collect();
    let r2v = match r2(&actual, &predicted) {
        Ok(v) => Some(v),
        Err(metrics::MetricsError::ZeroVariance) => {
            log::warn!("actual demand is constant; R² is undefined");
            None
        }
        Err(e) => return Err(e.into()),
    };
    let (mapev, excluded) = match mape(&actual, &predicted) {
        Ok(m) => (Some(m.value), m.excluded),
        Err(metrics::MetricsError::AllPointsExcluded) => (None, actual.len()),
        Err(e) => return Err(e.into()),
    };
    if excluded > 0 {
        log::warn!("MAPE excludes {excluded} targets with zero demand");
    }
    Ok(Accuracy { r2: r2v, mae: mae(&actual, &predicted)?, mape: mapev, mape_excluded: excluded, n: actual.len() })
}

fn fmt_opt(v: Option<f64>, suffix: &str) -> String {
    v.map(|x| format!("{x:.4}{suffix}")).unwrap_or_else(|| "undefined".into())
}

pub fn run_forecast(spec: &ExperimentSpec, demand: &DemandSeries) -> Result<SlidingForecast> {
    let f = forecast::sliding_window_predict(demand, &spec.window, &spec.search, spec.jobs)?;
    log::info!("last window model: {}", f.last_model.order);
    Ok(f)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastOutcome {
    pub forecast: SlidingForecast,
    pub accuracy: Accuracy,
}

/// Writes `forecast.csv` and `model.json`.
pub fn cmd_forecast(spec: &ExperimentSpec) -> Result<ForecastOutcome> {
    let workload = load_workload(&spec.input)?;
    let forecast = run_forecast(spec, &workload.demand)?;
    let dir = spec.out_dir(None)?;
    output::write_forecast_file(&workload.demand, &forecast.predictions, &dir.join(output::FORECAST_FILE))?;
    output::write_model_file(&forecast.last_model, &dir.join(output::MODEL_FILE))?;
    let accuracy = accuracy(&workload.demand, &forecast.predictions)?;
    println!(
        "{} forecasts, last model {}: R2 {}  MAE {:.4}  MAPE {}",
        accuracy.n,
        forecast.last_model.order,
        fmt_opt(accuracy.r2, ""),
        accuracy.mae,
        fmt_opt(accuracy.mape, "%")
    );
    Ok(ForecastOutcome { forecast, accuracy })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutcome {
    pub policy: PolicyConfig,
    pub records: Vec<SimulationRecord>,
    pub report: MetricsReport,
}

/// Simulates one policy. `predictions` drive target tracking.
pub fn simulate(
    spec: &ExperimentSpec,
    workload: &Workload,
    policy: PolicyConfig,
    predictions: Option<&[Prediction]>,
) -> Result<SimulationOutcome> {
    let trace_util;
    let feedback = match spec.feedback {
        FeedbackMode::Simulated => Feedback::Simulated,
        FeedbackMode::Trace => {
            trace_util = workload.utilization();
            Feedback::Trace(&trace_util)
        }
    };
    let sim_cfg = SimulationConfig { warmup_steps: spec.warmup(), ..spec.sim };
    let mut precomputed = predictions.map(PrecomputedForecaster::new);
    let forecaster = precomputed.as_mut().map(|f| f as &mut dyn sim::Forecaster);
    let SimulationOutput { records, warnings } = sim::run(&workload.demand, &policy, &sim_cfg, forecaster, feedback)?;
    for w in &warnings {
        log::warn!("{w}");
    }
    let report = metrics::report(&records, predictions.unwrap_or(&[]), &spec.bounds, sim_cfg.warmup_steps)?;
    if report.mape_excluded > 0 {
        log::warn!("MAPE excludes {} steps with zero demand", report.mape_excluded);
    }
    Ok(SimulationOutcome { policy, records, report })
}

fn write_outcome(outcome: &SimulationOutcome, dir: &Path) -> Result<()> {
    output::write_records_file(&outcome.records, &dir.join(output::RECORDS_FILE))?;
    output::write_metrics_file(&outcome.report, &dir.join(output::METRICS_FILE))
}

/// Writes `records.csv` and `metrics.json` (plus the forecast files for
/// target tracking).
pub fn cmd_simulate(spec: &ExperimentSpec, kind: PolicyKind) -> Result<SimulationOutcome> {
    let workload = load_workload(&spec.input)?;
    let policy = spec.policy_config(kind)?;
    let dir = spec.out_dir(None)?;
    let forecast = match kind {
        PolicyKind::TargetTracking => {
            let f = run_forecast(spec, &workload.demand)?;
            output::write_forecast_file(&workload.demand, &f.predictions, &dir.join(output::FORECAST_FILE))?;
            output::write_model_file(&f.last_model, &dir.join(output::MODEL_FILE))?;
            Some(f)
        }
        PolicyKind::Simple => None,
    };
    let outcome = simulate(spec, &workload, policy, forecast.as_ref().map(|f| f.predictions.as_slice()))?;
    write_outcome(&outcome, &dir)?;
    let r = &outcome.report;
    println!(
        "{} policy over {} steps: ADI {:.2}  CoV {:.2}%  R2 {}  MAE {}  MAPE {}",
        kind.label(),
        r.n_points,
        r.adi,
        r.cov_allocated,
        fmt_opt(r.r2, ""),
        fmt_opt(r.mae, ""),
        fmt_opt(r.mape, "%")
    );
    Ok(outcome)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareOutcome {
    pub proactive: SimulationOutcome,
    pub reactive: SimulationOutcome,
    pub forecast: SlidingForecast,
    pub comparison: Comparison,
}

/// Runs both policies on the same workload. Layout under `out`:
/// `proactive/` and `reactive/` each hold `records.csv` and `metrics.json`;
/// the top level holds `compare.csv`, `series.csv`, `forecast.csv` and
/// `model.json`.
pub fn cmd_compare(spec: &ExperimentSpec) -> Result<CompareOutcome> {
    let workload = load_workload(&spec.input)?;
    let proactive_cfg = spec.policy_config(PolicyKind::TargetTracking)?;
    let reactive_cfg = spec.policy_config(PolicyKind::Simple)?;
    let forecast = run_forecast(spec, &workload.demand)?;

    let (proactive, reactive) = std::thread::scope(|s| {
        let p = s.spawn(|| simulate(spec, &workload, proactive_cfg, Some(&forecast.predictions)));
        let r = simulate(spec, &workload, reactive_cfg, None);
        (p.join().expect("proactive simulation panicked"), r)
    });
    let (proactive, reactive) = (proactive?, reactive?);

    let dir = spec.out_dir(None)?;
    write_outcome(&proactive, &spec.out_dir(Some(PolicyKind::TargetTracking.label()))?)?;
    write_outcome(&reactive, &spec.out_dir(Some(PolicyKind::Simple.label()))?)?;
    output::write_forecast_file(&workload.demand, &forecast.predictions, &dir.join(output::FORECAST_FILE))?;
    output::write_model_file(&forecast.last_model, &dir.join(output::MODEL_FILE))?;
    let comparison = Comparison { proactive: proactive.report.clone(), reactive: reactive.report.clone() };
    comparison.write_file(&dir.join(output::COMPARE_FILE))?;
    let warmup = spec.warmup();
    output::write_series_file(
        &proactive.records[warmup..],
        &reactive.records[warmup..],
        (spec.bounds.lower, spec.bounds.upper),
        &dir.join(output::SERIES_FILE),
    )?;
    print!("{}", comparison.table());
    Ok(CompareOutcome { proactive, reactive, forecast, comparison })
}

pub const TRACE_FILE: &str = "trace.csv";
pub const CATALOG_FILE: &str = "catalog.toml";

/// Writes `trace.csv` and a matching `catalog.toml` (4 vCPUs) into `out`.
pub fn cmd_generate(params: &GeneratorParams, out: &Path) -> Result<PathBuf> {
    let g = generate(params)?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let trace = out.join(TRACE_FILE);
    io::write_trace_file(&g.points, &trace)?;
    let catalog = out.join(CATALOG_FILE);
    fs::write(&catalog, format!("\"{}\" = 4\n", params.instance_type)).map_err(|e| Error::io(&catalog, e))?;
    println!("wrote {} steps with {} spikes to {}", g.points.len(), g.spike_starts.len(), trace.display());
    Ok(trace)
}

/// The comparison benchmark: two weeks generated with `seed`, a ten-instance
/// fleet, one-week windows and an order search every `refit_interval` windows.
pub fn benchmark_spec(trace_dir: &Path, out: impl Into<PathBuf>, seed: u64, refit_interval: usize) -> Result<ExperimentSpec> {
    let params = GeneratorParams { seed, ..GeneratorParams::default() };
    let trace = cmd_generate(&params, trace_dir)?;
    let input = InputSpec {
        catalog: Some(trace_dir.join(CATALOG_FILE)),
        fleet_size: 10.0,
        ..InputSpec::new(trace)
    };
    let mut spec = ExperimentSpec::new(input, out);
    spec.window.refit_interval = refit_interval;
    Ok(spec)
}
