use alloc::vec;
use alloc::vec::Vec;

use super::css::residuals_into;
use super::{difference, undifference_forecast, ArimaError, ArimaModel, ForecastResult};

/// `h`-step point forecasts continuing `history`.
///
/// Innovations over the history are reconstructed with the same conditional
/// recursion used for fitting; future innovations are zero. Forecasts of the
/// differenced series are integrated back onto the original scale.
pub fn forecast(model: &ArimaModel, history: &[f64], h: usize) -> Result<ForecastResult, ArimaError> {
    if history.is_empty() {
        return Err(ArimaError::EmptyHistory);
    }
    if h == 0 {
        return Err(ArimaError::InvalidConfig("forecast horizon must be at least 1"));
    }
    let p = model.ar.len();
    let q = model.ma.len();
    let d = model.order.d;
    let w = difference(history, d)?;
    if w.len() < p {
        return Err(ArimaError::SeriesTooShort { needed: d + p, got: history.len() });
    }

    let mean = model.mean();
    let cond = model.conditioning.max(p).min(w.len());
    let mut eps = vec![0.0; w.len()];
    residuals_into(&w, mean, &model.ar, &model.ma, cond, &mut eps);

    let n = w.len();
    let mut ext: Vec<f64> = w;
    ext.reserve(h);
    for step in 0..h {
        let t = n + step;
        let mut v = model.intercept;
        for (i, phi) in model.ar.iter().enumerate() {
            v += phi * ext[t - 1 - i];
        }
        for (j, theta) in model.ma.iter().enumerate().take(q) {
            // innovations are only known up to the end of the history
            if j >= step && t > j {
                v += theta * eps[t - 1 - j];
            }
        }
        ext.push(v);
    }
    let point_forecasts = undifference_forecast(history, d, &ext[n..])?;
    Ok(ForecastResult { point_forecasts, horizon: h })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arima::ArimaOrder;
    use alloc::vec;

    fn model(order: ArimaOrder, intercept: Option<f64>, ar: &[f64], ma: &[f64]) -> ArimaModel {
        ArimaModel {
            order,
            has_intercept: intercept.is_some(),
            intercept: intercept.unwrap_or(0.0),
            ar: ar.to_vec(),
            ma: ma.to_vec(),
            sigma2: 1.0,
            loglik: 0.0,
            aicc: 0.0,
            n_train: 100,
            conditioning: ar.len(),
        }
    }

    #[test]
    fn random_walk_repeats_last_value() {
        let m = model(ArimaOrder::new(0, 1, 0), None, &[], &[]);
        let f = forecast(&m, &[5.0, 7.0, 9.0], 3).unwrap();
        assert_eq!(f.point_forecasts, vec![9.0, 9.0, 9.0]);
        assert_eq!(f.horizon, 3);
    }

    #[test]
    fn ar1_decays_geometrically() {
        let m = model(ArimaOrder::new(1, 0, 0), None, &[0.5], &[]);
        let f = forecast(&m, &[3.0, 8.0], 3).unwrap();
        assert_eq!(f.point_forecasts, vec![4.0, 2.0, 1.0]);
    }

    #[test]
    fn drift_accumulates() {
        let m = model(ArimaOrder::new(0, 1, 0), Some(2.0), &[], &[]);
        let f = forecast(&m, &[4.0, 7.0, 10.0], 2).unwrap();
        assert_eq!(f.point_forecasts, vec![12.0, 14.0]);
    }

    #[test]
    fn ma1_uses_last_innovation_once() {
        // y = e + 0.5 e_{t-1}; with eps reconstructed from y: e0 = 2, e1 = 1 - 1 = 0, e2 = 4 - 0 = 4
        let m = model(ArimaOrder::new(0, 0, 1), None, &[], &[0.5]);
        let f = forecast(&m, &[2.0, 1.0, 4.0], 3).unwrap();
        assert_eq!(f.point_forecasts, vec![2.0, 0.0, 0.0]);
    }

    #[test]
    fn second_difference_extrapolates_linearly() {
        let m = model(ArimaOrder::new(0, 2, 0), None, &[], &[]);
        let f = forecast(&m, &[1.0, 3.0, 5.0], 2).unwrap();
        assert_eq!(f.point_forecasts, vec![7.0, 9.0]);
    }

    #[test]
    fn errors() {
        let m = model(ArimaOrder::new(0, 1, 0), None, &[], &[]);
        assert_eq!(forecast(&m, &[], 1), Err(ArimaError::EmptyHistory));
        assert!(forecast(&m, &[1.0], 1).is_err());
        assert!(forecast(&m, &[1.0, 2.0], 0).is_err());
    }
}
