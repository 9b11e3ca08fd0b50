//! Discrete-step replay of a demand series against a scaling policy.
//!
//! Each step `t` of the series:
//!
//! 1. instances whose start-up completes by `t` join the running fleet and
//!    terminations due by `t` leave it;
//! 2. utilization `u_t = 100·w_t / m_t` is computed from demand `w_t` and the
//!    running cores `m_t` (capped at 100 % and flagged as saturated);
//! 3. the policy decides: simple scaling from the trailing utilization window,
//!    target tracking from the forecast for `t + horizon`;
//! 4. additions become pending until `t + startup_delay`, removals cancel
//!    pending start-ups first and otherwise take effect after
//!    `scale_in_latency` (both become visible from step `t + 1` at the earliest);
//! 5. a [`SimulationRecord`] is appended.

use alloc::vec::Vec;
use core::fmt;

use crate::arima::{ArimaError, Prediction};
use crate::metrics::MetricsError;
use crate::policy::{simple_scaling_decide, target_tracking_decide, DecisionReason, PolicyConfig, PolicyError, ScalingDecision};
use crate::trace::DemandSeries;

#[derive(Debug, Clone, PartialEq)]
pub enum SimError {
    Policy(PolicyError),
    Forecast(ArimaError),
    /// Target tracking needs a forecaster; simple scaling must not get one.
    ForecasterMismatch { policy: &'static str },
    InvalidConfig(&'static str),
    /// Trace utilization feedback does not cover every step.
    FeedbackLength { expected: usize, got: usize },
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::Policy(e) => write!(f, "policy error: {e}"),
            SimError::Forecast(e) => write!(f, "forecast error: {e}"),
            SimError::ForecasterMismatch { policy } => write!(f, "forecaster presence does not match the {policy} policy"),
            SimError::InvalidConfig(msg) => write!(f, "invalid simulation configuration: {msg}"),
            SimError::FeedbackLength { expected, got } => {
                write!(f, "trace utilization has {got} samples, demand has {expected}")
            }
        }
    }
}

impl core::error::Error for SimError {}

impl From<PolicyError> for SimError {
    fn from(e: PolicyError) -> Self {
        SimError::Policy(e)
    }
}

impl From<ArimaError> for SimError {
    fn from(e: ArimaError) -> Self {
        SimError::Forecast(e)
    }
}

/// Instances booting or shutting down.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transition {
    /// When the change takes effect, seconds.
    pub at: i64,
    pub count: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClusterState {
    pub running_instances: u32,
    /// Start-ups in flight, ordered by `at`.
    pub pending: Vec<Transition>,
    /// Running instances scheduled for removal, ordered by `at`.
    pub terminating: Vec<Transition>,
    /// Simple scaling ignores alarms before this time (seconds).
    pub cooldown_until: i64,
}

impl ClusterState {
    pub fn new(running_instances: u32) -> Self {
        Self { running_instances, ..Self::default() }
    }

    pub fn pending_instances(&self) -> u32 {
        self.pending.iter().map(|p| p.count).sum()
    }

    pub fn terminating_instances(&self) -> u32 {
        self.terminating.iter().map(|p| p.count).sum()
    }

    /// Capacity once all in-flight changes settle.
    pub fn committed_instances(&self) -> u32 {
        self.running_instances + self.pending_instances() - self.terminating_instances()
    }

    pub fn add_pending(&mut self, ready_at: i64, count: u32) {
        let pos = self.pending.partition_point(|p| p.at <= ready_at);
        self.pending.insert(pos, Transition { at: ready_at, count });
    }

    /// Applies every transition due at or before `now`.
    pub fn advance_to(&mut self, now: i64) {
        let ready = self.pending.partition_point(|p| p.at <= now);
        self.running_instances += self.pending.drain(..ready).map(|p| p.count).sum::<u32>();
        let gone = self.terminating.partition_point(|p| p.at <= now);
        self.running_instances -= self.terminating.drain(..gone).map(|p| p.count).sum::<u32>();
    }

    /// Removes `count` instances: latest pending start-ups first, then running
    /// instances effective at `effective_at`.
    pub fn remove(&mut self, mut count: u32, effective_at: i64) {
        while count > 0 {
            let Some(last) = self.pending.last_mut() else { break };
            let take = last.count.min(count);
            last.count -= take;
            count -= take;
            if last.count == 0 {
                self.pending.pop();
            }
        }
        if count > 0 {
            let available = self.running_instances - self.terminating_instances();
            let count = count.min(available);
            let pos = self.terminating.partition_point(|p| p.at <= effective_at);
            self.terminating.insert(pos, Transition { at: effective_at, count });
        }
    }
}

/// Supplies demand forecasts to the target-tracking policy.
pub trait Forecaster {
    /// Forecast of the demand at series index `target` given the observations
    /// `history` (indices `0..history.len()`). `None` when no forecast exists.
    fn predict(&mut self, history: &[f64], target: usize) -> Result<Option<f64>, ArimaError>;
}

/// Forecasts computed ahead of time, looked up by target index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PrecomputedForecaster {
    by_target: Vec<Option<f64>>,
}

impl PrecomputedForecaster {
    pub fn new(predictions: &[Prediction]) -> Self {
        let len = predictions.iter().map(|p| p.target + 1).max().unwrap_or(0);
        let mut by_target = alloc::vec![None; len];
        for p in predictions {
            by_target[p.target] = Some(p.value);
        }
        Self { by_target }
    }
}

impl Forecaster for PrecomputedForecaster {
    fn predict(&mut self, _history: &[f64], target: usize) -> Result<Option<f64>, ArimaError> {
        Ok(self.by_target.get(target).copied().flatten())
    }
}

/// Reads the future straight from the actual series.
#[derive(Debug, Clone, Copy)]
pub struct PerfectForesight<'a>(pub &'a [f64]);

impl Forecaster for PerfectForesight<'_> {
    fn predict(&mut self, _history: &[f64], target: usize) -> Result<Option<f64>, ArimaError> {
        Ok(self.0.get(target).copied())
    }
}

/// Utilization signal seen by the simple-scaling alarm.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Feedback<'a> {
    /// The utilization produced by the simulated allocation.
    #[default]
    Simulated,
    /// Utilization as recorded in the original trace, one sample per step.
    Trace(&'a [f64]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimulationConfig {
    /// Seconds per step.
    pub step: i64,
    /// Seconds from ordering an instance until it serves load.
    pub startup_delay: i64,
    /// Seconds from deciding a removal until the instance stops serving.
    pub scale_in_latency: i64,
    /// Running instances at the first step; defaults to the policy minimum.
    pub initial_instances: Option<u32>,
    /// Leading steps excluded from metrics.
    pub warmup_steps: usize,
    /// Start the cooldown when the scaling activity completes rather than when
    /// it is ordered.
    pub cooldown_after_activity: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            step: 60,
            startup_delay: 720,
            scale_in_latency: 0,
            initial_instances: None,
            warmup_steps: 0,
            cooldown_after_activity: true,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.step <= 0 {
            return Err(SimError::InvalidConfig("step must be positive"));
        }
        if self.startup_delay < 0 || self.startup_delay % self.step != 0 {
            return Err(SimError::InvalidConfig("startup delay must be a non-negative multiple of the step"));
        }
        if self.scale_in_latency < 0 {
            return Err(SimError::InvalidConfig("scale-in latency must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRecord {
    pub timestamp: i64,
    /// `w_t`, cores.
    pub demand_cores: f64,
    /// `m_t`, running cores.
    pub allocated_cores: u64,
    /// `u_t`, percent.
    pub utilization: f64,
    /// Demand exceeded the running cores (or none were running).
    pub saturated: bool,
    pub decision_cores: i64,
    pub reason: DecisionReason,
    pub predicted_demand: Option<f64>,
    /// Instances still booting after this step's decision.
    pub pending_instances: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimWarning {
    /// The forecast horizon does not match the start-up delay, so capacity
    /// ordered for the forecast target will not arrive exactly on time.
    HorizonMismatch { horizon_seconds: i64, startup_delay: i64 },
}

impl fmt::Display for SimWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimWarning::HorizonMismatch { horizon_seconds, startup_delay } => {
                write!(f, "forecast horizon is {horizon_seconds} s but start-up delay is {startup_delay} s")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput {
    pub records: Vec<SimulationRecord>,
    pub warnings: Vec<SimWarning>,
}

/// `u = 100·w/m`, saturating at 100 %.
pub fn utilization(demand_cores: f64, allocated_cores: u64) -> (f64, bool) {
    if allocated_cores == 0 {
        return (100.0, demand_cores > 0.0 || allocated_cores == 0);
    }
    let u = 100.0 * demand_cores / allocated_cores as f64;
    if u > 100.0 {
        (100.0, true)
    } else {
        (u, false)
    }
}

/// Replays `demand` against `policy`.
pub fn run(
    demand: &DemandSeries,
    policy: &PolicyConfig,
    sim: &SimulationConfig,
    mut forecaster: Option<&mut dyn Forecaster>,
    feedback: Feedback<'_>,
) -> Result<SimulationOutput, SimError> {
    policy.validate()?;
    sim.validate()?;
    if demand.step() != sim.step {
        return Err(SimError::InvalidConfig("demand series step differs from simulation step"));
    }
    match (policy, forecaster.is_some()) {
        (PolicyConfig::Simple(_), false) | (PolicyConfig::TargetTracking(_), true) => {}
        _ => return Err(SimError::ForecasterMismatch { policy: policy.name() }),
    }
    if let Feedback::Trace(u) = feedback {
        if u.len() != demand.len() {
            return Err(SimError::FeedbackLength { expected: demand.len(), got: u.len() });
        }
    }
    let initial = sim.initial_instances.unwrap_or(policy.min_capacity());
    if initial < policy.min_capacity() || initial > policy.max_capacity() {
        return Err(SimError::InvalidConfig("initial instances outside the policy capacity bounds"));
    }

    let mut warnings = Vec::new();
    if let PolicyConfig::TargetTracking(c) = policy {
        let horizon_seconds = c.horizon as i64 * sim.step;
        if horizon_seconds != sim.startup_delay {
            warnings.push(SimWarning::HorizonMismatch { horizon_seconds, startup_delay: sim.startup_delay });
        }
    }

    let cores = u64::from(policy.cores_per_instance());
    let values = demand.values();
    let mut state = ClusterState::new(initial);
    let mut simulated_util: Vec<f64> = Vec::with_capacity(values.len());
    let mut records = Vec::with_capacity(values.len());

    for (i, &w) in values.iter().enumerate() {
        let now = demand.timestamp(i);
        state.advance_to(now);
        let allocated = u64::from(state.running_instances) * cores;
        let (u, saturated) = utilization(w, allocated);
        simulated_util.push(u);

        let mut predicted = None;
        let decision = match policy {
            PolicyConfig::Simple(cfg) => {
                let samples = ((cfg.evaluation_period / sim.step).max(1) as usize).min(i + 1);
                let window = match feedback {
                    Feedback::Simulated => &simulated_util[i + 1 - samples..=i],
                    Feedback::Trace(trace) => &trace[i + 1 - samples..=i],
                };
                simple_scaling_decide(window, now, &state, cfg)?
            }
            PolicyConfig::TargetTracking(cfg) => {
                let f = forecaster.as_mut().expect("checked above");
                predicted = f.predict(&values[..=i], i + cfg.horizon)?;
                match predicted {
                    Some(p) => target_tracking_decide(p, &state, cfg)?,
                    None => ScalingDecision::none(DecisionReason::NoOp),
                }
            }
        };

        let delta = decision.delta_instances;
        if delta > 0 {
            state.add_pending(now + sim.startup_delay, delta as u32);
        } else if delta < 0 {
            state.remove(delta.unsigned_abs() as u32, now + sim.scale_in_latency);
        }
        if delta != 0 {
            if let PolicyConfig::Simple(cfg) = policy {
                let activity = match (sim.cooldown_after_activity, delta > 0) {
                    (false, _) => 0,
                    (true, true) => sim.startup_delay,
                    (true, false) => sim.scale_in_latency,
                };
                state.cooldown_until = now + activity + cfg.cooldown;
            }
        }

        records.push(SimulationRecord {
            timestamp: now,
            demand_cores: w,
            allocated_cores: allocated,
            utilization: u,
            saturated,
            decision_cores: decision.delta_cores(policy.cores_per_instance()),
            reason: decision.reason,
            predicted_demand: predicted,
            pending_instances: state.pending_instances(),
        });
    }
    Ok(SimulationOutput { records, warnings })
}

/// Record column used by [`coefficient_of_variation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RecordField {
    #[default]
    AllocatedCores,
    DemandCores,
    Utilization,
}

impl RecordField {
    fn get(&self, r: &SimulationRecord) -> f64 {
        match self {
            RecordField::AllocatedCores => r.allocated_cores as f64,
            RecordField::DemandCores => r.demand_cores,
            RecordField::Utilization => r.utilization,
        }
    }
}

/// `100 · σ / μ` of a record field, population standard deviation.
pub fn coefficient_of_variation(records: &[SimulationRecord], field: RecordField) -> Result<f64, MetricsError> {
    if records.len() < 2 {
        return Err(MetricsError::TooFewRecords);
    }
    let n = records.len() as f64;
    let mean = records.iter().map(|r| field.get(r)).sum::<f64>() / n;
    if mean == 0.0 {
        return Err(MetricsError::ZeroMean);
    }
    let var = records.iter().map(|r| (field.get(r) - mean) * (field.get(r) - mean)).sum::<f64>() / n;
    Ok(100.0 * libm::sqrt(var) / mean)
}

/// `(timestamp, decision_cores)` per record.
pub fn decision_series(records: &[SimulationRecord]) -> Vec<(i64, i64)> {
    records.iter().map(|r| (r.timestamp, r.decision_cores)).collect()
}
