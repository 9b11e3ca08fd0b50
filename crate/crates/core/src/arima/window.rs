//! Sliding-window batch forecasting.
//!
//! Window `i` covers `[i·stride, i·stride + window_size)`. Its forecast
//! `horizon` steps past the window end is kept only when that target lies
//! inside the series, so with 0-based indices the targets run from
//! `window_size + horizon - 1` to `N - 1`.
//!
//! Windows are grouped into blocks of `refit_interval`. The first window of a
//! block runs the full order search; later windows keep that order and
//! re-estimate the coefficients, warm-started from the previous window. Blocks
//! are independent of each other, so they can be evaluated in any order (or
//! concurrently) and concatenated.

use alloc::vec::Vec;

use super::css::{Css, Estimator, FitOptions};
use super::select::{auto_select_with, SearchConfig};
use super::{forecast, ArimaError, ArimaModel};
use crate::trace::DemandSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlidingWindowConfig {
    pub window_size: usize,
    pub horizon: usize,
    pub stride: usize,
    /// Windows between order searches; 1 searches in every window.
    pub refit_interval: usize,
}

impl SlidingWindowConfig {
    /// One week of one-minute samples, twelve steps ahead.
    pub const fn week_of_minutes() -> Self {
        Self { window_size: 7 * 1440, horizon: 12, stride: 1, refit_interval: 1 }
    }

    pub fn validate(&self, search: &SearchConfig) -> Result<(), ArimaError> {
        if self.window_size == 0 || self.horizon == 0 || self.stride == 0 || self.refit_interval == 0 {
            return Err(ArimaError::InvalidConfig("window_size, horizon, stride and refit_interval must be positive"));
        }
        if self.window_size < 4 * search.max_order() || self.window_size < 30 {
            return Err(ArimaError::InvalidConfig("window_size must be at least 30 and 4 × the largest AR/MA order"));
        }
        Ok(())
    }
}

impl Default for SlidingWindowConfig {
    fn default() -> Self {
        Self::week_of_minutes()
    }
}

/// One saved forecast: the value predicted for 0-based series index `target`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub target: usize,
    pub value: f64,
}

/// How the windows over a series of a given length split into blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowPlan {
    pub windows: usize,
    pub blocks: usize,
    cfg: SlidingWindowConfig,
}

impl WindowPlan {
    pub fn new(len: usize, cfg: &SlidingWindowConfig) -> Result<Self, ArimaError> {
        let needed = cfg.window_size + cfg.horizon;
        if len < needed {
            return Err(ArimaError::SeriesTooShort { needed, got: len });
        }
        let windows = (len - needed) / cfg.stride + 1;
        let blocks = windows.div_ceil(cfg.refit_interval);
        Ok(Self { windows, blocks, cfg: *cfg })
    }

    /// Window indices belonging to `block`.
    pub fn block_windows(&self, block: usize) -> core::ops::Range<usize> {
        let start = block * self.cfg.refit_interval;
        start..(start + self.cfg.refit_interval).min(self.windows)
    }

    /// Inclusive end index of window `i`.
    pub fn window_end(&self, window: usize) -> usize {
        window * self.cfg.stride + self.cfg.window_size - 1
    }
}

/// Forecasts of one block plus the model used for its last window.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockForecast {
    pub predictions: Vec<Prediction>,
    pub last_model: ArimaModel,
}

/// The saved forecasts, ascending by target, and the final window's model.
#[derive(Debug, Clone, PartialEq)]
pub struct SlidingForecast {
    pub predictions: Vec<Prediction>,
    pub last_model: ArimaModel,
}

impl SlidingForecast {
    /// Concatenates per-block results given in block order.
    pub fn from_blocks(blocks: impl IntoIterator<Item = BlockForecast>) -> Option<Self> {
        let mut predictions = Vec::new();
        let mut last = None;
        for b in blocks {
            predictions.extend(b.predictions);
            last = Some(b.last_model);
        }
        last.map(|last_model| Self { predictions, last_model })
    }
}

/// Evaluates the windows of one block.
///
/// If re-estimating a window fails, the previous window's coefficients are
/// reused for its forecast.
pub fn predict_block(
    series: &[f64],
    plan: &WindowPlan,
    search: &SearchConfig,
    block: usize,
) -> Result<BlockForecast, ArimaError> {
    let estimator = Css::default();
    let cfg = plan.cfg;
    let mut predictions = Vec::with_capacity(cfg.refit_interval);
    let mut model: Option<ArimaModel> = None;
    for w in plan.block_windows(block) {
        let end = plan.window_end(w);
        let window = &series[end + 1 - cfg.window_size..=end];
        let current = match model.take() {
            None => auto_select_with(window, search, &estimator)?,
            Some(prev) => {
                let opts = FitOptions {
                    with_intercept: prev.has_intercept,
                    conditioning: Some(prev.conditioning),
                    warm_start: Some(&prev),
                };
                estimator.estimate(window, prev.order, &opts).unwrap_or(prev)
            }
        };
        let f = forecast(&current, window, cfg.horizon)?;
        predictions.push(Prediction { target: end + cfg.horizon, value: f.last() });
        model = Some(current);
    }
    let last_model = model.ok_or(ArimaError::InvalidConfig("block has no windows"))?;
    Ok(BlockForecast { predictions, last_model })
}

/// Runs every block in order.
pub fn sliding_window_predict(
    series: &DemandSeries,
    cfg: &SlidingWindowConfig,
    search: &SearchConfig,
) -> Result<SlidingForecast, ArimaError> {
    cfg.validate(search)?;
    search.validate()?;
    let plan = WindowPlan::new(series.len(), cfg)?;
    let blocks = (0..plan.blocks)
        .map(|b| predict_block(series.values(), &plan, search, b))
        .collect::<Result<Vec<_>, _>>()?;
    SlidingForecast::from_blocks(blocks).ok_or(ArimaError::InvalidConfig("no windows"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arima::ArimaOrder;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn cfg(window_size: usize, horizon: usize, stride: usize, refit_interval: usize) -> SlidingWindowConfig {
        SlidingWindowConfig { window_size, horizon, stride, refit_interval }
    }

    fn series(values: Vec<f64>) -> DemandSeries {
        DemandSeries::new(0, 60, values).unwrap()
    }

    #[test]
    fn index_arithmetic() {
        let plan = WindowPlan::new(100, &cfg(60, 12, 1, 1)).unwrap();
        assert_eq!(plan.windows, 29);
        let plan = WindowPlan::new(100, &cfg(60, 12, 5, 4)).unwrap();
        assert_eq!(plan.windows, 6);
        assert_eq!(plan.blocks, 2);
        assert_eq!(plan.block_windows(1), 4..6);
        assert!(WindowPlan::new(71, &cfg(60, 12, 1, 1)).is_err());
    }

    #[test]
    fn constant_series_predicts_constant() {
        let out = sliding_window_predict(&series(vec![3.0; 100]), &cfg(60, 12, 1, 1), &SearchConfig::default()).unwrap();
        assert_eq!(out.predictions.len(), 29);
        let targets: Vec<usize> = out.predictions.iter().map(|p| p.target).collect();
        assert_eq!(targets, (71..100).collect::<Vec<_>>());
        for p in &out.predictions {
            assert!((p.value - 3.0).abs() < 1e-6);
        }
    }

    #[test]
    fn random_walk_forced_order_repeats_window_end() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut level: f64 = 50.0;
        let values: Vec<f64> = (0..120)
            .map(|_| {
                let e: f64 = StandardNormal.sample(&mut rng);
                level = (level + e).max(0.0);
                level
            })
            .collect();
        let search = SearchConfig::fixed(ArimaOrder::new(0, 1, 0), false);
        let out = sliding_window_predict(&series(values.clone()), &cfg(40, 12, 1, 3), &search).unwrap();
        for p in &out.predictions {
            assert_eq!(p.value, values[p.target - 12]);
        }
    }

    #[test]
    fn stride_and_refit_give_ascending_targets() {
        let values: Vec<f64> = (0..200).map(|t| 10.0 + libm::sin(t as f64 / 7.0)).collect();
        let c = cfg(50, 5, 3, 4);
        let out = sliding_window_predict(&series(values), &c, &SearchConfig::default()).unwrap();
        let targets: Vec<usize> = out.predictions.iter().map(|p| p.target).collect();
        let expected: Vec<usize> = (0..).map(|i| 54 + 3 * i).take_while(|&t| t < 200).collect();
        assert_eq!(targets, expected);
    }

    #[test]
    fn window_must_cover_max_order() {
        let c = cfg(10, 2, 1, 1);
        assert!(matches!(
            sliding_window_predict(&series(vec![1.0; 50]), &c, &SearchConfig::default()),
            Err(ArimaError::InvalidConfig(_))
        ));
    }
}
