//! Scaling decision rules.
//!
//! * Simple scaling (reactive): compare the mean utilization over the trailing
//!   evaluation period against a lower and an upper threshold, add or remove a
//!   fixed number of instances, then wait out a cooldown.
//! * Target tracking (proactive): size the fleet so the forecast demand at the
//!   horizon runs at the target utilization. No cooldown.
//!
//! Both rules act on the committed capacity (running plus pending start-ups,
//! minus pending terminations) and never leave `[min_capacity, max_capacity]`.

use core::fmt;

use crate::sim::ClusterState;

#[derive(Debug, Clone, PartialEq)]
pub enum PolicyError {
    EmptyWindow,
    InvalidForecast(f64),
    InvalidConfig(&'static str),
}

impl fmt::Display for PolicyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyError::EmptyWindow => f.write_str("utilization window is empty"),
            PolicyError::InvalidForecast(v) => write!(f, "forecast {v} is not a finite number"),
            PolicyError::InvalidConfig(msg) => write!(f, "invalid policy configuration: {msg}"),
        }
    }
}

impl core::error::Error for PolicyError {}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimpleScalingConfig {
    /// Percent.
    pub lower_threshold: f64,
    /// Percent.
    pub upper_threshold: f64,
    /// Seconds of trailing samples averaged per evaluation.
    pub evaluation_period: i64,
    /// Seconds.
    pub cooldown: i64,
    pub scale_in_step: u32,
    pub scale_out_step: u32,
    pub min_capacity: u32,
    pub max_capacity: u32,
    pub cores_per_instance: u32,
}

impl SimpleScalingConfig {
    /// The studied deployment: thresholds 25/50 %, 5 min evaluation, 6 min
    /// cooldown, remove `y` / add `4y` instances, capacity `x ..= 7.5x`.
    ///
    /// `x` and `y` were not disclosed; `x = 4` and `y = 1` keep the ratios.
    pub fn paper() -> Self {
        Self::paper_with(4, 1)
    }

    /// Preset with explicit `x` (minimum capacity, even) and `y` (scale-in step).
    pub fn paper_with(x: u32, y: u32) -> Self {
        Self {
            lower_threshold: 25.0,
            upper_threshold: 50.0,
            evaluation_period: 300,
            cooldown: 360,
            scale_in_step: y,
            scale_out_step: 4 * y,
            min_capacity: x,
            max_capacity: x * 15 / 2,
            cores_per_instance: 4,
        }
    }

    pub fn validate(&self) -> Result<(), PolicyError> {
        if !(0.0 < self.lower_threshold && self.lower_threshold < self.upper_threshold && self.upper_threshold <= 100.0) {
            return Err(PolicyError::InvalidConfig("thresholds must satisfy 0 < lower < upper <= 100"));
        }
        if self.evaluation_period <= 0 || self.cooldown < 0 {
            return Err(PolicyError::InvalidConfig("evaluation period must be positive and cooldown non-negative"));
        }
        if self.scale_in_step == 0 || self.scale_out_step == 0 {
            return Err(PolicyError::InvalidConfig("scaling steps must be positive"));
        }
        check_capacity(self.min_capacity, self.max_capacity, self.cores_per_instance)
    }
}

impl Default for SimpleScalingConfig {
    fn default() -> Self {
        Self::paper()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetTrackingConfig {
    /// Fraction in `(0, 1)`.
    pub target_utilization: f64,
    /// Steps ahead the forecast refers to.
    pub horizon: usize,
    pub min_capacity: u32,
    pub max_capacity: u32,
    pub cores_per_instance: u32,
}

impl TargetTrackingConfig {
    /// 35 % target, 12-step horizon, same capacity bounds as [`SimpleScalingConfig::paper`].
    pub fn paper() -> Self {
        Self { target_utilization: 0.35, horizon: 12, min_capacity: 4, max_capacity: 30, cores_per_instance: 4 }
    }

    pub fn validate(&self) -> Result<(), PolicyError> {
        if !(self.target_utilization > 0.0 && self.target_utilization < 1.0) {
            return Err(PolicyError::InvalidConfig("target utilization must be in (0, 1)"));
        }
        if self.horizon == 0 {
            return Err(PolicyError::InvalidConfig("horizon must be at least one step"));
        }
        check_capacity(self.min_capacity, self.max_capacity, self.cores_per_instance)
    }
}

impl Default for TargetTrackingConfig {
    fn default() -> Self {
        Self::paper()
    }
}

fn check_capacity(min: u32, max: u32, cores: u32) -> Result<(), PolicyError> {
    if min > max {
        return Err(PolicyError::InvalidConfig("min capacity exceeds max capacity"));
    }
    if cores == 0 {
        return Err(PolicyError::InvalidConfig("cores per instance must be positive"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicyConfig {
    Simple(SimpleScalingConfig),
    TargetTracking(TargetTrackingConfig),
}

impl PolicyConfig {
    pub fn min_capacity(&self) -> u32 {
        match self {
            PolicyConfig::Simple(c) => c.min_capacity,
            PolicyConfig::TargetTracking(c) => c.min_capacity,
        }
    }

    pub fn max_capacity(&self) -> u32 {
        match self {
            PolicyConfig::Simple(c) => c.max_capacity,
            PolicyConfig::TargetTracking(c) => c.max_capacity,
        }
    }

    pub fn cores_per_instance(&self) -> u32 {
        match self {
            PolicyConfig::Simple(c) => c.cores_per_instance,
            PolicyConfig::TargetTracking(c) => c.cores_per_instance,
        }
    }

    pub fn validate(&self) -> Result<(), PolicyError> {
        match self {
            PolicyConfig::Simple(c) => c.validate(),
            PolicyConfig::TargetTracking(c) => c.validate(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PolicyConfig::Simple(_) => "simple",
            PolicyConfig::TargetTracking(_) => "target-tracking",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecisionReason {
    UpperBreach,
    LowerBreach,
    TargetAdjust,
    CooldownBlocked,
    /// The rule wanted to act but the capacity bounds left nothing to do.
    AtBound,
    NoOp,
}

impl DecisionReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            DecisionReason::UpperBreach => "upper-breach",
            DecisionReason::LowerBreach => "lower-breach",
            DecisionReason::TargetAdjust => "target-adjust",
            DecisionReason::CooldownBlocked => "cooldown-blocked",
            DecisionReason::AtBound => "at-bound",
            DecisionReason::NoOp => "no-op",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScalingDecision {
    /// Instances to add (positive) or remove (negative).
    pub delta_instances: i64,
    pub reason: DecisionReason,
}

impl ScalingDecision {
    pub const fn none(reason: DecisionReason) -> Self {
        Self { delta_instances: 0, reason }
    }

    pub fn delta_cores(&self, cores_per_instance: u32) -> i64 {
        self.delta_instances * i64::from(cores_per_instance)
    }
}

/// Reactive rule over the trailing utilization samples (percent).
pub fn simple_scaling_decide(
    utilization_window: &[f64],
    now: i64,
    state: &ClusterState,
    cfg: &SimpleScalingConfig,
) -> Result<ScalingDecision, PolicyError> {
    if utilization_window.is_empty() {
        return Err(PolicyError::EmptyWindow);
    }
    if now < state.cooldown_until {
        return Ok(ScalingDecision::none(DecisionReason::CooldownBlocked));
    }
    let avg = utilization_window.iter().sum::<f64>() / utilization_window.len() as f64;
    let committed = i64::from(state.committed_instances());
    let (delta, reason) = if avg > cfg.upper_threshold {
        let room = (i64::from(cfg.max_capacity) - committed).max(0);
        (i64::from(cfg.scale_out_step).min(room), DecisionReason::UpperBreach)
    } else if avg < cfg.lower_threshold {
        let room = (committed - i64::from(cfg.min_capacity)).max(0);
        (-i64::from(cfg.scale_in_step).min(room), DecisionReason::LowerBreach)
    } else {
        return Ok(ScalingDecision::none(DecisionReason::NoOp));
    };
    if delta == 0 {
        return Ok(ScalingDecision::none(DecisionReason::AtBound));
    }
    Ok(ScalingDecision { delta_instances: delta, reason })
}

fn unclamped_instances(predicted_demand: f64, cfg: &TargetTrackingConfig) -> u32 {
    let cores = predicted_demand.max(0.0) / cfg.target_utilization;
    let instances = cores / f64::from(cfg.cores_per_instance);
    // absorb representation error so exact multiples do not round up
    let instances = libm::ceil(instances - 1e-9 * instances.max(1.0)).max(0.0);
    if instances >= f64::from(u32::MAX) {
        u32::MAX
    } else {
        instances as u32
    }
}

/// Instances needed for `predicted_demand` cores to run at the target.
pub fn required_instances(predicted_demand: f64, cfg: &TargetTrackingConfig) -> u32 {
    unclamped_instances(predicted_demand, cfg).clamp(cfg.min_capacity, cfg.max_capacity)
}

/// Proactive rule for a forecast `horizon` steps ahead, in cores.
pub fn target_tracking_decide(
    predicted_demand: f64,
    state: &ClusterState,
    cfg: &TargetTrackingConfig,
) -> Result<ScalingDecision, PolicyError> {
    if !predicted_demand.is_finite() {
        return Err(PolicyError::InvalidForecast(predicted_demand));
    }
    let target = i64::from(required_instances(predicted_demand, cfg));
    let delta = target - i64::from(state.committed_instances());
    if delta != 0 {
        return Ok(ScalingDecision { delta_instances: delta, reason: DecisionReason::TargetAdjust });
    }
    let clamped = unclamped_instances(predicted_demand, cfg) != target as u32;
    Ok(ScalingDecision::none(if clamped { DecisionReason::AtBound } else { DecisionReason::NoOp }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn state(running: u32) -> ClusterState {
        ClusterState::new(running)
    }

    #[test]
    fn paper_preset_ratios() {
        let c = SimpleScalingConfig::paper();
        assert_eq!((c.min_capacity, c.max_capacity), (4, 30));
        assert_eq!(c.scale_out_step, 4 * c.scale_in_step);
        assert_eq!((c.lower_threshold, c.upper_threshold), (25.0, 50.0));
        assert_eq!((c.evaluation_period, c.cooldown), (300, 360));
        assert!(c.validate().is_ok());
        assert!(TargetTrackingConfig::paper().validate().is_ok());
    }

    #[test]
    fn upper_breach_adds_four_y() {
        let d = simple_scaling_decide(&[60.0; 5], 1000, &state(10), &SimpleScalingConfig::paper()).unwrap();
        assert_eq!(d, ScalingDecision { delta_instances: 4, reason: DecisionReason::UpperBreach });
        assert_eq!(d.delta_cores(4), 16);
    }

    #[test]
    fn cooldown_blocks() {
        let mut s = state(10);
        s.cooldown_until = 2000;
        let d = simple_scaling_decide(&[20.0; 5], 1000, &s, &SimpleScalingConfig::paper()).unwrap();
        assert_eq!(d, ScalingDecision::none(DecisionReason::CooldownBlocked));
        let d = simple_scaling_decide(&[20.0; 5], 2000, &s, &SimpleScalingConfig::paper()).unwrap();
        assert_eq!(d.delta_instances, -1);
    }

    #[test]
    fn dead_band_is_no_op() {
        let d = simple_scaling_decide(&[37.0; 5], 0, &state(10), &SimpleScalingConfig::paper()).unwrap();
        assert_eq!(d, ScalingDecision::none(DecisionReason::NoOp));
        // exactly on a threshold is not a breach
        let d = simple_scaling_decide(&[50.0; 5], 0, &state(10), &SimpleScalingConfig::paper()).unwrap();
        assert_eq!(d.delta_instances, 0);
    }

    #[test]
    fn simple_scaling_clamps() {
        let cfg = SimpleScalingConfig::paper();
        let d = simple_scaling_decide(&[90.0], 0, &state(28), &cfg).unwrap();
        assert_eq!(d.delta_instances, 2);
        let d = simple_scaling_decide(&[90.0], 0, &state(30), &cfg).unwrap();
        assert_eq!(d, ScalingDecision::none(DecisionReason::AtBound));
        let d = simple_scaling_decide(&[5.0], 0, &state(4), &cfg).unwrap();
        assert_eq!(d, ScalingDecision::none(DecisionReason::AtBound));
        assert_eq!(simple_scaling_decide(&[], 0, &state(4), &cfg), Err(PolicyError::EmptyWindow));
    }

    #[test]
    fn target_tracking_arithmetic() {
        // 14 cores / 0.35 = 40 cores = 10 instances, 6 committed
        let d = target_tracking_decide(14.0, &state(6), &TargetTrackingConfig::paper()).unwrap();
        assert_eq!(d, ScalingDecision { delta_instances: 4, reason: DecisionReason::TargetAdjust });
    }

    #[test]
    fn target_tracking_fixed_point() {
        let cfg = TargetTrackingConfig::paper();
        for instances in cfg.min_capacity..=cfg.max_capacity {
            let demand = cfg.target_utilization * f64::from(instances * cfg.cores_per_instance);
            let d = target_tracking_decide(demand, &state(instances), &cfg).unwrap();
            assert_eq!(d.delta_instances, 0, "{instances} instances");
        }
    }

    #[test]
    fn negative_forecast_goes_to_minimum() {
        let cfg = TargetTrackingConfig { min_capacity: 2, ..TargetTrackingConfig::paper() };
        let d = target_tracking_decide(-0.5, &state(5), &cfg).unwrap();
        assert_eq!(d.delta_instances, -3);
        assert!(matches!(target_tracking_decide(f64::NAN, &state(5), &cfg), Err(PolicyError::InvalidForecast(_))));
        assert!(target_tracking_decide(f64::INFINITY, &state(5), &cfg).is_err());
    }

    #[test]
    fn pending_counts_toward_target() {
        let mut s = state(6);
        s.add_pending(10_000, 4);
        let d = target_tracking_decide(14.0, &s, &TargetTrackingConfig::paper()).unwrap();
        assert_eq!(d.delta_instances, 0);
    }

    proptest! {
        #[test]
        fn target_tracking_idempotent(pred in -10.0f64..200.0, running in 0u32..40) {
            let cfg = TargetTrackingConfig::paper();
            let mut s = state(running.clamp(cfg.min_capacity, cfg.max_capacity));
            let d = target_tracking_decide(pred, &s, &cfg).unwrap();
            prop_assert_ne!(d.reason, DecisionReason::CooldownBlocked);
            let after = i64::from(s.running_instances) + d.delta_instances;
            prop_assert!(after >= i64::from(cfg.min_capacity) && after <= i64::from(cfg.max_capacity));
            prop_assert_eq!(after as u32, required_instances(pred, &cfg));
            s.running_instances = after as u32;
            let again = target_tracking_decide(pred, &s, &cfg).unwrap();
            prop_assert_eq!(again.delta_instances, 0);
        }

        #[test]
        fn simple_scaling_stays_in_bounds(avg in 0.0f64..100.0, running in 4u32..=30) {
            let cfg = SimpleScalingConfig::paper();
            let d = simple_scaling_decide(&[avg], 0, &state(running), &cfg).unwrap();
            let after = i64::from(running) + d.delta_instances;
            prop_assert!((4..=30).contains(&after));
        }

        #[test]
        fn simple_scaling_monotone_in_mean(samples in prop::collection::vec(0.0f64..90.0, 1..6), bump in 0.0f64..10.0) {
            let cfg = SimpleScalingConfig::paper();
            let s = state(15);
            let before = simple_scaling_decide(&samples, 0, &s, &cfg).unwrap();
            let raised: Vec<f64> = samples.iter().map(|v| v + bump).collect();
            let after = simple_scaling_decide(&raised, 0, &s, &cfg).unwrap();
            if before.delta_instances > 0 {
                prop_assert!(after.delta_instances > 0);
            }
            prop_assert!(after.delta_instances >= before.delta_instances);
        }
    }
}
