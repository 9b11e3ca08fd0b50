//! Non-seasonal ARIMA(p, d, q) modelling.
//!
//! The model on the `d`-times differenced series `w` is
//!
//! ```text
//! w_t = c + φ1·w_{t-1} + … + φp·w_{t-p} + θ1·ε_{t-1} + … + θq·ε_{t-q} + ε_t
//! ```
//!
//! Coefficients are estimated by conditional sum of squares (see [`css`]),
//! orders are picked by a stepwise AICc search (see [`select`]) after choosing
//! `d` with repeated KPSS tests (see [`kpss`]), and point forecasts are
//! produced by running the recursion forward with zero future innovations.

use alloc::vec::Vec;
use core::fmt;

pub mod css;
pub mod diff;
pub mod forecast;
pub mod kpss;
pub mod optim;
pub mod select;
pub mod transform;
pub mod window;

pub use css::{fit, Css, Estimator, FitOptions};
pub use diff::{difference, integrate, undifference_forecast};
pub use forecast::forecast;
pub use kpss::{kpss_critical_value, kpss_level_statistic, select_d};
pub use select::{auto_select, auto_select_traced, auto_select_with, roots_clear_of_unit_circle, Candidate, SearchConfig};
pub use window::{predict_block, sliding_window_predict, BlockForecast, Prediction, SlidingForecast, SlidingWindowConfig, WindowPlan};

/// Largest differencing degree considered.
pub const MAX_D: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub enum ArimaError {
    SeriesTooShort { needed: usize, got: usize },
    /// `integrate` was given the wrong number of seed values.
    SeedMismatch { expected: usize, got: usize },
    NonConvergence { iterations: usize },
    /// Zero variance after differencing with AR/MA terms requested.
    DegenerateSeries,
    TooFewObservations { n_eff: usize, params: usize },
    AllFitsFailed,
    EmptyHistory,
    InvalidOrder(ArimaOrder),
    InvalidConfig(&'static str),
}

impl fmt::Display for ArimaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArimaError::SeriesTooShort { needed, got } => write!(f, "series too short: need {needed} points, got {got}"),
            ArimaError::SeedMismatch { expected, got } => write!(f, "expected {expected} seed values, got {got}"),
            ArimaError::NonConvergence { iterations } => write!(f, "optimizer did not converge in {iterations} iterations"),
            ArimaError::DegenerateSeries => f.write_str("differenced series has zero variance"),
            ArimaError::TooFewObservations { n_eff, params } => {
                write!(f, "{n_eff} effective observations are too few for {params} parameters")
            }
            ArimaError::AllFitsFailed => f.write_str("no candidate model could be fitted"),
            ArimaError::EmptyHistory => f.write_str("forecast history is empty"),
            ArimaError::InvalidOrder(o) => write!(f, "invalid order {o}"),
            ArimaError::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
        }
    }
}

impl core::error::Error for ArimaError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ArimaOrder {
    pub p: usize,
    pub d: usize,
    pub q: usize,
}

impl ArimaOrder {
    pub const fn new(p: usize, d: usize, q: usize) -> Self {
        Self { p, d, q }
    }
}

impl fmt::Display for ArimaOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ARIMA({},{},{})", self.p, self.d, self.q)
    }
}

/// A fitted model.
#[derive(Debug, Clone, PartialEq)]
pub struct ArimaModel {
    pub order: ArimaOrder,
    /// Whether `intercept` was estimated (it is `0.0` otherwise).
    pub has_intercept: bool,
    /// The constant `c` of the recursion on the differenced series.
    pub intercept: f64,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    /// Innovation variance, `SS_res / n_train`.
    pub sigma2: f64,
    pub loglik: f64,
    pub aicc: f64,
    /// Effective observations entering the likelihood.
    pub n_train: usize,
    /// Leading differenced observations the likelihood conditions on.
    pub conditioning: usize,
}

impl ArimaModel {
    /// Estimated parameters including the innovation variance.
    pub fn param_count(&self) -> usize {
        param_count(self.order.p, self.order.q, self.has_intercept)
    }

    pub fn aic(&self) -> f64 {
        -2.0 * self.loglik + 2.0 * self.param_count() as f64
    }

    /// Recomputes the AICc from the stored log-likelihood.
    pub fn aicc(&self) -> Result<f64, ArimaError> {
        aicc(self.loglik, self.param_count(), self.n_train)
    }

    /// Process mean implied by the intercept, `c / (1 - Σφ)`.
    pub fn mean(&self) -> f64 {
        if !self.has_intercept {
            return 0.0;
        }
        self.intercept / (1.0 - self.ar.iter().sum::<f64>())
    }

    pub fn is_stationary(&self) -> bool {
        transform::ar_is_stationary(&self.ar)
    }

    pub fn is_invertible(&self) -> bool {
        transform::ma_is_invertible(&self.ma)
    }
}

/// Point forecasts `ŷ_{T+1} … ŷ_{T+h}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastResult {
    pub point_forecasts: Vec<f64>,
    pub horizon: usize,
}

impl ForecastResult {
    /// The forecast furthest ahead.
    pub fn last(&self) -> f64 {
        self.point_forecasts[self.horizon - 1]
    }
}

pub(crate) fn param_count(p: usize, q: usize, intercept: bool) -> usize {
    p + q + usize::from(intercept) + 1
}

/// Small-sample corrected AIC: `-2·loglik + 2k + 2k(k+1)/(n - k - 1)`.
pub fn aicc(loglik: f64, k: usize, n_eff: usize) -> Result<f64, ArimaError> {
    if n_eff <= k + 1 {
        return Err(ArimaError::TooFewObservations { n_eff, params: k });
    }
    let kf = k as f64;
    Ok(-2.0 * loglik + 2.0 * kf + 2.0 * kf * (kf + 1.0) / (n_eff as f64 - kf - 1.0))
}
