//! Policy configuration files and presets.
//!
//! A file is JSON (by `.json` extension) or TOML and may set any subset of
//! the keys below. Values are layered: preset, then file, then command-line
//! overrides.

use std::path::Path;

use scalesim_core::{PolicyConfig, SimpleScalingConfig, TargetTrackingConfig};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    #[serde(alias = "reactive", alias = "simple_scaling")]
    Simple,
    #[serde(alias = "proactive", alias = "target_tracking")]
    TargetTracking,
}

impl PolicyKind {
    pub fn label(&self) -> &'static str {
        match self {
            PolicyKind::Simple => "reactive",
            PolicyKind::TargetTracking => "proactive",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy: Option<PolicyKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower_threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper_threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evaluation_period_s: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cooldown_s: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale_in_step: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale_out_step: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_instances: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_instances: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cores_per_instance: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_utilization: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon_steps: Option<usize>,
}

impl PolicyFile {
    pub fn parse(text: &str, json: bool) -> Result<Self> {
        if json {
            Ok(serde_json::from_str(text)?)
        } else {
            Ok(toml::from_str(text)?)
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        Self::parse(&text, json)
    }

    /// Keys set in `other` replace those in `self`.
    pub fn merged(&self, other: &PolicyFile) -> PolicyFile {
        macro_rules! pick {
            ($($f:ident),*) => { PolicyFile { $($f: other.$f.or(self.$f)),* } };
        }
        pick!(
            policy,
            lower_threshold,
            upper_threshold,
            evaluation_period_s,
            cooldown_s,
            scale_in_step,
            scale_out_step,
            min_instances,
            max_instances,
            cores_per_instance,
            target_utilization,
            horizon_steps
        )
    }

    pub fn apply_simple(&self, mut c: SimpleScalingConfig) -> SimpleScalingConfig {
        c.lower_threshold = self.lower_threshold.unwrap_or(c.lower_threshold);
        c.upper_threshold = self.upper_threshold.unwrap_or(c.upper_threshold);
        c.evaluation_period = self.evaluation_period_s.unwrap_or(c.evaluation_period);
        c.cooldown = self.cooldown_s.unwrap_or(c.cooldown);
        c.scale_in_step = self.scale_in_step.unwrap_or(c.scale_in_step);
        c.scale_out_step = self.scale_out_step.unwrap_or(c.scale_out_step);
        c.min_capacity = self.min_instances.unwrap_or(c.min_capacity);
        c.max_capacity = self.max_instances.unwrap_or(c.max_capacity);
        c.cores_per_instance = self.cores_per_instance.unwrap_or(c.cores_per_instance);
        c
    }

    pub fn apply_target(&self, mut c: TargetTrackingConfig) -> TargetTrackingConfig {
        c.target_utilization = self.target_utilization.unwrap_or(c.target_utilization);
        c.horizon = self.horizon_steps.unwrap_or(c.horizon);
        c.min_capacity = self.min_instances.unwrap_or(c.min_capacity);
        c.max_capacity = self.max_instances.unwrap_or(c.max_capacity);
        c.cores_per_instance = self.cores_per_instance.unwrap_or(c.cores_per_instance);
        c
    }

    /// Builds and validates the policy of the given kind.
    pub fn resolve(&self, kind: PolicyKind, preset: Preset) -> Result<PolicyConfig> {
        let cfg = match kind {
            PolicyKind::Simple => PolicyConfig::Simple(self.apply_simple(preset.simple())),
            PolicyKind::TargetTracking => PolicyConfig::TargetTracking(self.apply_target(preset.target())),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Every key, as a file that reproduces `cfg` exactly.
    pub fn from_config(cfg: &PolicyConfig) -> Self {
        match cfg {
            PolicyConfig::Simple(c) => PolicyFile {
                policy: Some(PolicyKind::Simple),
                lower_threshold: Some(c.lower_threshold),
                upper_threshold: Some(c.upper_threshold),
                evaluation_period_s: Some(c.evaluation_period),
                cooldown_s: Some(c.cooldown),
                scale_in_step: Some(c.scale_in_step),
                scale_out_step: Some(c.scale_out_step),
                min_instances: Some(c.min_capacity),
                max_instances: Some(c.max_capacity),
                cores_per_instance: Some(c.cores_per_instance),
                ..Default::default()
            },
            PolicyConfig::TargetTracking(c) => PolicyFile {
                policy: Some(PolicyKind::TargetTracking),
                target_utilization: Some(c.target_utilization),
                horizon_steps: Some(c.horizon),
                min_instances: Some(c.min_capacity),
                max_instances: Some(c.max_capacity),
                cores_per_instance: Some(c.cores_per_instance),
                ..Default::default()
            },
        }
    }
}

/// Named starting points for policy parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Preset {
    /// Thresholds 25/50 %, 300 s evaluation, 360 s cooldown, target 35 %,
    /// horizon 12, 4 cores per instance, 4 to 30 instances, steps -1/+4.
    #[default]
    Paper,
}

impl Preset {
    pub fn simple(&self) -> SimpleScalingConfig {
        SimpleScalingConfig::paper()
    }

    pub fn target(&self) -> TargetTrackingConfig {
        TargetTrackingConfig::paper()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_overrides_preset() {
        let f = PolicyFile::parse("policy = \"simple\"\ncooldown_s = 600\nmin_instances = 2\n", false).unwrap();
        let PolicyConfig::Simple(c) = f.resolve(PolicyKind::Simple, Preset::Paper).unwrap() else { panic!() };
        assert_eq!(c.cooldown, 600);
        assert_eq!(c.min_capacity, 2);
        assert_eq!(c.upper_threshold, 50.0);
    }

    #[test]
    fn json_keys() {
        let f = PolicyFile::parse(r#"{"policy":"target-tracking","target_utilization":0.5,"horizon_steps":6}"#, true).unwrap();
        assert_eq!(f.policy, Some(PolicyKind::TargetTracking));
        let PolicyConfig::TargetTracking(c) = f.resolve(PolicyKind::TargetTracking, Preset::Paper).unwrap() else {
            panic!()
        };
        assert_eq!((c.target_utilization, c.horizon), (0.5, 6));
        assert!(PolicyFile::parse(r#"{"policy":"proactive"}"#, true).is_ok());
        assert!(PolicyFile::parse(r#"{"cooldown":5}"#, true).is_err());
    }

    #[test]
    fn invalid_values_fail_validation() {
        let f = PolicyFile { lower_threshold: Some(60.0), ..Default::default() };
        assert!(f.resolve(PolicyKind::Simple, Preset::Paper).is_err());
    }

    #[test]
    fn round_trip_through_file() {
        for kind in [PolicyKind::Simple, PolicyKind::TargetTracking] {
            let cfg = PolicyFile::default().resolve(kind, Preset::Paper).unwrap();
            let text = toml::to_string(&PolicyFile::from_config(&cfg)).unwrap();
            let back = PolicyFile::parse(&text, false).unwrap().resolve(kind, Preset::Paper).unwrap();
            assert_eq!(back, cfg);
        }
    }

    #[test]
    fn merge_prefers_later_layer() {
        let base = PolicyFile { cooldown_s: Some(1), scale_in_step: Some(2), ..Default::default() };
        let top = PolicyFile { cooldown_s: Some(9), ..Default::default() };
        let m = base.merged(&top);
        assert_eq!((m.cooldown_s, m.scale_in_step), (Some(9), Some(2)));
    }
}
