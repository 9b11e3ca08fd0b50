//! Allocation-only core of `scalesim`.
//!
//! Everything in this crate is pure computation over in-memory data: deriving
//! a core-demand series from utilization samples, fitting and forecasting
//! non-seasonal ARIMA models, the reactive (simple scaling) and proactive
//! (forecast-driven target tracking) decision rules, the discrete-step cluster
//! simulation, and the accuracy / auto-scaling metrics used to score a run.
//!
//! File formats, the synthetic trace generator and the command-line front end
//! live in the `scalesim` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod arima;
pub mod metrics;
pub mod policy;
pub mod sim;
pub mod trace;

pub use arima::{ArimaError, ArimaModel, ArimaOrder, ForecastResult, SearchConfig, SlidingWindowConfig};
pub use metrics::{AdiBounds, MetricsError, MetricsReport};
pub use policy::{PolicyConfig, PolicyError, ScalingDecision, SimpleScalingConfig, TargetTrackingConfig};
pub use sim::{ClusterState, Feedback, Forecaster, SimError, SimulationConfig, SimulationOutput, SimulationRecord};
pub use trace::{DemandSeries, FillPolicy, InstanceCatalog, TraceError, TracePoint};
