//! Sliding-window forecasting over a thread pool.

use rayon::prelude::*;
use scalesim_core::arima::{predict_block, SlidingForecast, WindowPlan};
use scalesim_core::{ArimaError, DemandSeries, SearchConfig, SlidingWindowConfig};

use crate::error::{Error, Result};

/// Same output as [`scalesim_core::arima::sliding_window_predict`]; refit
/// blocks are spread over `jobs` threads (1 runs on the calling thread).
pub fn sliding_window_predict(
    series: &DemandSeries,
    cfg: &SlidingWindowConfig,
    search: &SearchConfig,
    jobs: usize,
) -> Result<SlidingForecast> {
    cfg.validate(search)?;
    search.validate()?;
    let plan = WindowPlan::new(series.len(), cfg)?;
    log::info!(
        "forecasting {} windows in {} refit blocks (window {}, horizon {})",
        plan.windows,
        plan.blocks,
        cfg.window_size,
        cfg.horizon
    );
    let values = series.values();
    let run = |b: usize| predict_block(values, &plan, search, b);
    let blocks = if jobs <= 1 {
        (0..plan.blocks).map(run).collect::<Result<Vec<_>, ArimaError>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?;
        pool.install(|| (0..plan.blocks).into_par_iter().map(run).collect::<Result<Vec<_>, ArimaError>>())?
    };
    SlidingForecast::from_blocks(blocks).ok_or_else(|| Error::Config("series yields no forecast windows".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_matches_sequential() {
        let values: Vec<f64> = (0..400).map(|t| 20.0 + 5.0 * (t as f64 / 30.0).sin() + ((t * 7919) % 13) as f64 / 13.0).collect();
        let series = DemandSeries::new(0, 60, values).unwrap();
        let cfg = SlidingWindowConfig { window_size: 120, horizon: 12, stride: 1, refit_interval: 25 };
        let search = SearchConfig { max_p: 2, max_q: 2, ..SearchConfig::default() };
        let seq = scalesim_core::arima::sliding_window_predict(&series, &cfg, &search).unwrap();
        let one = sliding_window_predict(&series, &cfg, &search, 1).unwrap();
        let four = sliding_window_predict(&series, &cfg, &search, 4).unwrap();
        assert_eq!(seq, one);
        assert_eq!(seq, four);
    }
}
