//! Forecast accuracy and auto-scaling quality metrics.

use alloc::vec::Vec;
use core::fmt;

use crate::arima::Prediction;
use crate::sim::{coefficient_of_variation, RecordField, SimulationRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricsError {
    LengthMismatch { actual: usize, predicted: usize },
    Empty,
    ZeroVariance,
    AllPointsExcluded,
    TooFewRecords,
    ZeroMean,
    InvalidBounds,
}

impl fmt::Display for MetricsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricsError::LengthMismatch { actual, predicted } => {
                write!(f, "{actual} actual values but {predicted} predictions")
            }
            MetricsError::Empty => f.write_str("no points to score"),
            MetricsError::ZeroVariance => f.write_str("actual values have zero variance"),
            MetricsError::AllPointsExcluded => f.write_str("every actual value is zero"),
            MetricsError::TooFewRecords => f.write_str("need at least two records"),
            MetricsError::ZeroMean => f.write_str("mean is zero"),
            MetricsError::InvalidBounds => f.write_str("bounds must satisfy 0 <= lower < upper <= 100"),
        }
    }
}

impl core::error::Error for MetricsError {}

fn check(actual: &[f64], predicted: &[f64]) -> Result<(), MetricsError> {
    if actual.len() != predicted.len() {
        return Err(MetricsError::LengthMismatch { actual: actual.len(), predicted: predicted.len() });
    }
    if actual.is_empty() {
        return Err(MetricsError::Empty);
    }
    Ok(())
}

/// Coefficient of determination `1 − SS_res / SS_tot`.
pub fn r2(actual: &[f64], predicted: &[f64]) -> Result<f64, MetricsError> {
    check(actual, predicted)?;
    let mean = actual.iter().sum::<f64>() / actual.len() as f64;
    let ss_tot: f64 = actual.iter().map(|y| (y - mean) * (y - mean)).sum();
    if ss_tot == 0.0 {
        return Err(MetricsError::ZeroVariance);
    }
    let ss_res: f64 = actual.iter().zip(predicted).map(|(y, p)| (p - y) * (p - y)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

pub fn mae(actual: &[f64], predicted: &[f64]) -> Result<f64, MetricsError> {
    check(actual, predicted)?;
    let total: f64 = actual.iter().zip(predicted).map(|(y, p)| libm::fabs(p - y)).sum();
    Ok(total / actual.len() as f64)
}

/// Mean absolute percentage error, percent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mape {
    pub value: f64,
    /// Points skipped because the actual value was zero.
    pub excluded: usize,
}

pub fn mape(actual: &[f64], predicted: &[f64]) -> Result<Mape, MetricsError> {
    check(actual, predicted)?;
    let mut total = 0.0;
    let mut included = 0usize;
    for (y, p) in actual.iter().zip(predicted) {
        if *y == 0.0 {
            continue;
        }
        total += libm::fabs((p - y) / y);
        included += 1;
    }
    if included == 0 {
        return Err(MetricsError::AllPointsExcluded);
    }
    Ok(Mape { value: 100.0 * total / included as f64, excluded: actual.len() - included })
}

/// Target utilization band, percent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiBounds {
    pub lower: f64,
    pub upper: f64,
}

impl Default for AdiBounds {
    fn default() -> Self {
        Self { lower: 25.0, upper: 50.0 }
    }
}

impl AdiBounds {
    pub fn new(lower: f64, upper: f64) -> Result<Self, MetricsError> {
        if !(0.0 <= lower && lower < upper && upper <= 100.0) {
            return Err(MetricsError::InvalidBounds);
        }
        Ok(Self { lower, upper })
    }

    /// Distance of one utilization sample from the band.
    pub fn distance(&self, u: f64) -> f64 {
        if u <= self.lower {
            self.lower - u
        } else if u < self.upper {
            0.0
        } else {
            u - self.upper
        }
    }
}

/// Auto-scaling demand index: total distance of `utilization` from the band.
pub fn adi(utilization: &[f64], bounds: &AdiBounds) -> f64 {
    utilization.iter().map(|&u| bounds.distance(u)).sum()
}

/// Scored summary of one simulation run.
///
/// The forecast metrics are `None` for runs without forecasts, and `r2` is
/// also `None` when the actual demand is constant.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub r2: Option<f64>,
    pub mae: Option<f64>,
    pub mape: Option<f64>,
    pub adi: f64,
    pub cov_allocated: f64,
    /// Records scored after the warm-up.
    pub n_points: usize,
    /// Forecast pairs dropped from MAPE for a zero actual.
    pub mape_excluded: usize,
}

/// Scores `records[warmup..]`.
///
/// `predictions` are matched to records by target index; those falling in the
/// warm-up or past the end are ignored.
pub fn report(
    records: &[SimulationRecord],
    predictions: &[Prediction],
    bounds: &AdiBounds,
    warmup: usize,
) -> Result<MetricsReport, MetricsError> {
    let scored = records.get(warmup..).ok_or(MetricsError::Empty)?;
    if scored.is_empty() {
        return Err(MetricsError::Empty);
    }
    let utilization: Vec<f64> = scored.iter().map(|r| r.utilization).collect();
    let cov_allocated = coefficient_of_variation(scored, RecordField::AllocatedCores)?;

    let (actual, predicted): (Vec<f64>, Vec<f64>) = predictions
        .iter()
        .filter(|p| p.target >= warmup && p.target < records.len())
        .map(|p| (records[p.target].demand_cores, p.value))
        .unzip();
    let (r2v, maev, mapev, excluded) = if actual.is_empty() {
        (None, None, None, 0)
    } else {
        let r2v = match r2(&actual, &predicted) {
            Ok(v) => Some(v),
            Err(MetricsError::ZeroVariance) => None,
            Err(e) => return Err(e),
        };
        let (mapev, excluded) = match mape(&actual, &predicted) {
            Ok(m) => (Some(m.value), m.excluded),
            Err(MetricsError::AllPointsExcluded) => (None, actual.len()),
            Err(e) => return Err(e),
        };
        (r2v, Some(mae(&actual, &predicted)?), mapev, excluded)
    };

    Ok(MetricsReport {
        r2: r2v,
        mae: maev,
        mape: mapev,
        adi: adi(&utilization, bounds),
        cov_allocated,
        n_points: scored.len(),
        mape_excluded: excluded,
    })
}
