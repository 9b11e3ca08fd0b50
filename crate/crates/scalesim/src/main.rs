use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use scalesim::config::{PolicyFile, PolicyKind, Preset};
use scalesim::experiment::{self, ExperimentSpec, FeedbackMode, InputSpec};
use scalesim::generate::GeneratorParams;
use scalesim_core::FillPolicy;

/// Trace-driven comparison of reactive and forecast-driven auto-scaling.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sliding-window ARIMA forecasts of the demand series.
    Forecast(RunArgs),
    /// Replay the trace against one policy.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        /// Policy to run; overrides the `policy` key of the policy file.
        #[arg(long, value_enum)]
        strategy: Option<Strategy>,
    },
    /// Replay the trace against both policies.
    Compare(RunArgs),
    /// Write a synthetic utilization trace and its instance catalog.
    Generate(GenerateArgs),
    /// Generate the two-week benchmark trace and compare both policies on it.
    Benchmark {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 60)]
        refit_interval: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Strategy {
    Reactive,
    Proactive,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fill {
    Error,
    PreviousValue,
    Linear,
}

#[derive(Clone, Copy, ValueEnum)]
enum FeedbackArg {
    Simulated,
    Trace,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Paper,
}

#[derive(Args)]
struct RunArgs {
    /// Utilization trace (CSV: timestamp,instance_type,utilization).
    #[arg(long)]
    trace: PathBuf,
    /// Instance catalog (TOML mapping instance type to vCPUs).
    #[arg(long)]
    catalog: Option<PathBuf>,
    /// vCPUs for instance types missing from the catalog.
    #[arg(long)]
    assume_vcpus: Option<u32>,
    #[arg(long, value_enum, default_value = "previous-value")]
    fill: Fill,
    /// Instances behind each utilization sample.
    #[arg(long, default_value_t = 1.0)]
    fleet_size: f64,
    /// Policy file (JSON or TOML).
    #[arg(long)]
    policy: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "paper")]
    preset: PresetArg,
    /// Sliding-window length in steps.
    #[arg(long, default_value_t = 10_080)]
    window: usize,
    /// Forecast horizon in steps (also the target-tracking horizon).
    #[arg(long)]
    horizon: Option<usize>,
    /// Windows between order searches.
    #[arg(long, default_value_t = 1)]
    refit_interval: usize,
    #[arg(long, default_value_t = 1)]
    stride: usize,
    /// Seconds from ordering an instance until it serves load.
    #[arg(long, default_value_t = 720)]
    startup_delay: i64,
    /// Seconds from a scale-in decision until the instance stops serving.
    #[arg(long, default_value_t = 0)]
    scale_in_latency: i64,
    /// Start the reactive cooldown when the decision is made instead of when
    /// the scaling activity completes.
    #[arg(long)]
    cooldown_from_decision: bool,
    /// Utilization signal for the reactive alarm.
    #[arg(long, value_enum, default_value = "simulated")]
    feedback: FeedbackArg,
    #[arg(long)]
    min_instances: Option<u32>,
    #[arg(long)]
    max_instances: Option<u32>,
    #[arg(long)]
    scale_in_step: Option<u32>,
    #[arg(long)]
    scale_out_step: Option<u32>,
    #[arg(long)]
    cooldown: Option<i64>,
    #[arg(long)]
    target_utilization: Option<f64>,
    /// Accepted for reproducibility records; forecasting and simulation are
    /// deterministic.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Threads for the sliding-window forecasts.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl RunArgs {
    fn spec(&self) -> anyhow::Result<ExperimentSpec> {
        let input = InputSpec {
            catalog: self.catalog.clone(),
            assume_vcpus: self.assume_vcpus,
            fill: match self.fill {
                Fill::Error => FillPolicy::Error,
                Fill::PreviousValue => FillPolicy::PreviousValue,
                Fill::Linear => FillPolicy::Linear,
            },
            fleet_size: self.fleet_size,
            ..InputSpec::new(&self.trace)
        };
        let file = match &self.policy {
            Some(path) => PolicyFile::load(path).with_context(|| format!("loading policy {}", path.display()))?,
            None => PolicyFile::default(),
        };
        let overrides = PolicyFile {
            min_instances: self.min_instances,
            max_instances: self.max_instances,
            scale_in_step: self.scale_in_step,
            scale_out_step: self.scale_out_step,
            cooldown_s: self.cooldown,
            target_utilization: self.target_utilization,
            horizon_steps: self.horizon,
            ..PolicyFile::default()
        };
        let policy = file.merged(&overrides);
        let preset = match self.preset {
            PresetArg::Paper => Preset::Paper,
        };
        let horizon = self.horizon.or(policy.horizon_steps).unwrap_or(preset.target().horizon);

        let mut spec = ExperimentSpec::new(input, &self.out);
        spec.preset = preset;
        spec.policy = policy;
        spec.window.window_size = self.window;
        spec.window.horizon = horizon;
        spec.window.refit_interval = self.refit_interval;
        spec.window.stride = self.stride;
        spec.sim.startup_delay = self.startup_delay;
        spec.sim.scale_in_latency = self.scale_in_latency;
        spec.sim.cooldown_after_activity = !self.cooldown_from_decision;
        spec.feedback = match self.feedback {
            FeedbackArg::Simulated => FeedbackMode::Simulated,
            FeedbackArg::Trace => FeedbackMode::Trace,
        };
        spec.jobs = self.jobs.max(1);
        log::debug!("seed {}", self.seed);
        Ok(spec)
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 14.0)]
    days: f64,
    #[arg(long, default_value_t = 60)]
    step: i64,
    /// Mean utilization, percent.
    #[arg(long, default_value_t = 50.0)]
    base: f64,
    /// Daily swing around the mean, percent.
    #[arg(long, default_value_t = 35.0)]
    amplitude: f64,
    /// Period of the cycle in hours.
    #[arg(long, default_value_t = 24.0)]
    period_hours: f64,
    /// Percent per day.
    #[arg(long, default_value_t = 0.0)]
    trend: f64,
    /// Noise standard deviation, percent.
    #[arg(long, default_value_t = 3.0)]
    noise: f64,
    #[arg(long, default_value_t = 10)]
    spikes: usize,
    /// Percent added at the top of each spike.
    #[arg(long, default_value_t = 20.0)]
    spike_height: f64,
    #[arg(long, default_value = "c5.xlarge")]
    instance_type: String,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl GenerateArgs {
    fn params(&self) -> anyhow::Result<GeneratorParams> {
        if !(self.days > 0.0 && self.period_hours > 0.0) {
            bail!("--days and --period-hours must be positive");
        }
        Ok(GeneratorParams {
            seed: self.seed,
            duration: (self.days * 86_400.0).round() as i64,
            step: self.step,
            base: self.base,
            amplitude: self.amplitude,
            period: (self.period_hours * 3600.0).round() as i64,
            trend: self.trend,
            noise_sigma: self.noise,
            spikes: self.spikes,
            spike_height: self.spike_height,
            instance_type: self.instance_type.clone(),
            ..GeneratorParams::default()
        })
    }
}

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SCALESIM_LOG", "warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Forecast(args) => {
            experiment::cmd_forecast(&args.spec()?)?;
        }
        Command::Simulate { run, strategy } => {
            let spec = run.spec()?;
            let kind = match strategy {
                Some(Strategy::Reactive) => PolicyKind::Simple,
                Some(Strategy::Proactive) => PolicyKind::TargetTracking,
                None => match spec.policy.policy {
                    Some(kind) => kind,
                    None => bail!("choose a policy with --strategy or the `policy` key of the policy file"),
                },
            };
            experiment::cmd_simulate(&spec, kind)?;
        }
        Command::Compare(args) => {
            experiment::cmd_compare(&args.spec()?)?;
        }
        Command::Generate(args) => {
            experiment::cmd_generate(&args.params()?, &args.out)?;
        }
        Command::Benchmark { seed, refit_interval, out, jobs } => {
            let mut spec = experiment::benchmark_spec(&out.join("trace"), &out, seed, refit_interval)?;
            spec.jobs = jobs.max(1);
            experiment::cmd_compare(&spec)?;
        }
    }
    Ok(())
}
