//! KPSS level-stationarity test and the choice of differencing degree.

use super::{difference, ArimaError, MAX_D};

const CRITICAL_VALUES: [(f64, f64); 4] = [(0.10, 0.347), (0.05, 0.463), (0.025, 0.574), (0.01, 0.739)];

/// Critical value of the level-stationarity statistic for a tabulated
/// significance level (0.10, 0.05, 0.025 or 0.01).
pub fn kpss_critical_value(alpha: f64) -> Option<f64> {
    CRITICAL_VALUES.iter().find(|(a, _)| (a - alpha).abs() < 1e-12).map(|&(_, c)| c)
}

/// Bartlett truncation lag `⌊4·(n/100)^¼⌋`.
pub fn bartlett_lag(n: usize) -> usize {
    libm::floor(4.0 * libm::pow(n as f64 / 100.0, 0.25)) as usize
}

/// KPSS statistic against level stationarity.
///
/// `η = Σ S_t² / (n² · λ²)` where `S_t` are partial sums of the demeaned
/// series and `λ²` is the Bartlett-weighted long-run variance. A series with
/// no variance at all is reported as perfectly stationary (0).
pub fn kpss_level_statistic(series: &[f64]) -> f64 {
    let n = series.len();
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    let mean = series.iter().sum::<f64>() / nf;
    let gamma0 = series.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / nf;
    if gamma0 <= f64::EPSILON * f64::EPSILON * (1.0 + mean * mean) {
        return 0.0;
    }

    let lag = bartlett_lag(n).min(n - 1);
    let mut long_run = gamma0;
    for j in 1..=lag {
        let gamma_j = (j..n).map(|t| (series[t] - mean) * (series[t - j] - mean)).sum::<f64>() / nf;
        long_run += 2.0 * (1.0 - j as f64 / (lag as f64 + 1.0)) * gamma_j;
    }

    let mut partial = 0.0;
    let mut sum_sq = 0.0;
    for v in series {
        partial += v - mean;
        sum_sq += partial * partial;
    }
    sum_sq / (nf * nf * long_run.max(f64::MIN_POSITIVE))
}

/// Smallest `d` in `0..=2` whose differenced series passes the KPSS test at
/// `alpha`; 2 when none does.
pub fn select_d(series: &[f64], alpha: f64) -> Result<usize, ArimaError> {
    if series.len() < 20 {
        return Err(ArimaError::SeriesTooShort { needed: 20, got: series.len() });
    }
    let critical = kpss_critical_value(alpha).ok_or(ArimaError::InvalidConfig("KPSS alpha must be 0.10, 0.05, 0.025 or 0.01"))?;
    for d in 0..MAX_D {
        let diffed = difference(series, d)?;
        if kpss_level_statistic(&diffed) <= critical {
            return Ok(d);
        }
    }
    Ok(MAX_D)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn noise(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    fn cumsum(v: &[f64]) -> Vec<f64> {
        v.iter()
            .scan(0.0, |acc, x| {
                *acc += x;
                Some(*acc)
            })
            .collect()
    }

    /// Direct transcription of the textbook formulas with explicit loops over
    /// the autocovariances, used to cross-check the statistic.
    fn reference_statistic(y: &[f64], lag: usize) -> f64 {
        let n = y.len();
        let mean: f64 = y.iter().sum::<f64>() / n as f64;
        let e: Vec<f64> = y.iter().map(|v| v - mean).collect();
        let s: Vec<f64> = (0..n).map(|t| e[..=t].iter().sum()).collect();
        let acov = |j: usize| -> f64 { (0..n - j).map(|t| e[t] * e[t + j]).sum::<f64>() / n as f64 };
        let mut lrv = acov(0);
        for j in 1..=lag {
            lrv += 2.0 * (1.0 - j as f64 / (lag + 1) as f64) * acov(j);
        }
        s.iter().map(|v| v * v).sum::<f64>() / ((n * n) as f64 * lrv)
    }

    #[test]
    fn critical_table() {
        assert_eq!(kpss_critical_value(0.05), Some(0.463));
        assert_eq!(kpss_critical_value(0.01), Some(0.739));
        assert_eq!(kpss_critical_value(0.2), None);
        assert_eq!(bartlett_lag(100), 4);
        assert_eq!(bartlett_lag(500), 5);
        assert_eq!(bartlett_lag(10_080), 12);
    }

    #[test]
    fn statistic_matches_reference() {
        for seed in 0..5 {
            let y = noise(seed, 300);
            let a = kpss_level_statistic(&y);
            let b = reference_statistic(&y, bartlett_lag(300));
            assert!((a - b).abs() < 1e-10 * b.abs().max(1.0), "{a} vs {b}");
            let rw = cumsum(&y);
            let a = kpss_level_statistic(&rw);
            let b = reference_statistic(&rw, bartlett_lag(300));
            assert!((a - b).abs() < 1e-10 * b.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn constant_series_is_level_stationary() {
        assert_eq!(kpss_level_statistic(&[5.0; 50]), 0.0);
        assert_eq!(select_d(&[5.0; 50], 0.05), Ok(0));
    }

    #[test]
    fn white_noise_selects_no_differencing() {
        let hits = (0..100).filter(|&s| select_d(&noise(1000 + s, 500), 0.05) == Ok(0)).count();
        assert!(hits >= 95, "d=0 in {hits}/100 trials");
    }

    #[test]
    fn random_walk_selects_one_difference() {
        let hits = (0..100).filter(|&s| select_d(&cumsum(&noise(2000 + s, 500)), 0.05) == Ok(1)).count();
        assert!(hits >= 95, "d=1 in {hits}/100 trials");
    }

    #[test]
    fn trend_needs_differencing() {
        let eps = noise(7, 400);
        let y: Vec<f64> = (0..400).map(|t| 0.05 * t as f64 + 0.1 * eps[t]).collect();
        let reference = reference_statistic(&y, bartlett_lag(400));
        assert!(reference > 0.463);
        assert!(select_d(&y, 0.05).unwrap() >= 1);
    }

    #[test]
    fn short_series_rejected() {
        assert_eq!(select_d(&[1.0; 19], 0.05), Err(ArimaError::SeriesTooShort { needed: 20, got: 19 }));
        assert!(matches!(select_d(&[1.0; 30], 0.2), Err(ArimaError::InvalidConfig(_))));
    }
}
