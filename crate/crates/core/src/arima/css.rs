//! Conditional-sum-of-squares estimation.
//!
//! Innovations before the conditioning point are taken as zero, residuals are
//! accumulated over the remaining `n_eff` differenced observations, and the
//! Gaussian log-likelihood is evaluated at `σ² = SS / n_eff`:
//!
//! ```text
//! loglik = -n_eff/2 · (ln(2π·σ²) + 1)
//! ```
//!
//! The search runs over partial autocorrelations (see [`super::transform`]) so
//! every candidate is stationary and invertible.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::optim::NelderMead;
use super::transform::{ar_from_unconstrained, ar_to_unconstrained, ma_from_unconstrained, ma_to_unconstrained, pacf_to_unconstrained, sample_pacf};
use super::{aicc, difference, param_count, ArimaError, ArimaModel, ArimaOrder, MAX_D};

/// Per-fit options.
#[derive(Debug, Clone, Copy, Default)]
pub struct FitOptions<'a> {
    pub with_intercept: bool,
    /// Number of leading differenced observations to condition on. Defaults to
    /// `p`; values below `p` are raised to `p`. Fixing this across candidates
    /// makes their likelihoods cover the same observations.
    pub conditioning: Option<usize>,
    /// Start the optimizer from a previous fit of the same order.
    pub warm_start: Option<&'a ArimaModel>,
}

impl FitOptions<'_> {
    pub fn new(with_intercept: bool) -> Self {
        Self { with_intercept, ..Self::default() }
    }
}

/// Something that turns a series and an order into a fitted model.
pub trait Estimator {
    fn estimate(&self, series: &[f64], order: ArimaOrder, opts: &FitOptions<'_>) -> Result<ArimaModel, ArimaError>;
}

/// The conditional-sum-of-squares estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Css {
    pub optimizer: NelderMead,
    /// Starting simplex edge when warm-started.
    pub warm_step: f64,
}

impl Default for Css {
    fn default() -> Self {
        Self { optimizer: NelderMead::default(), warm_step: 0.05 }
    }
}

/// Fits `order` to `series` with the default CSS estimator.
pub fn fit(series: &[f64], order: ArimaOrder, with_intercept: bool) -> Result<ArimaModel, ArimaError> {
    Css::default().estimate(series, order, &FitOptions::new(with_intercept))
}

/// CSS residuals of the centred recursion; entries before `cond` are zero.
/// Returns the residual sum of squares.
pub(crate) fn residuals_into(w: &[f64], mean: f64, ar: &[f64], ma: &[f64], cond: usize, eps: &mut [f64]) -> f64 {
    let (p, q) = (ar.len(), ma.len());
    let c = mean * (1.0 - ar.iter().sum::<f64>());
    let mut ss = 0.0;
    for e in eps[..cond].iter_mut() {
        *e = 0.0;
    }
    for t in cond..w.len() {
        let mut e = w[t] - c;
        for (phi, x) in ar.iter().zip(w[t - p..t].iter().rev()) {
            e -= phi * x;
        }
        // before t = q the missing innovations count as zero
        let known = q.min(t);
        for (theta, x) in ma[..known].iter().zip(eps[t - known..t].iter().rev()) {
            e -= theta * x;
        }
        eps[t] = e;
        ss += e * e;
    }
    ss
}

fn loglik(sigma2: f64, n_eff: usize) -> f64 {
    if sigma2 <= 0.0 {
        return f64::INFINITY;
    }
    -0.5 * n_eff as f64 * (libm::log(2.0 * PI * sigma2) + 1.0)
}

impl Estimator for Css {
    fn estimate(&self, series: &[f64], order: ArimaOrder, opts: &FitOptions<'_>) -> Result<ArimaModel, ArimaError> {
        let ArimaOrder { p, d, q } = order;
        if d > MAX_D {
            return Err(ArimaError::InvalidOrder(order));
        }
        let needed = d + p.max(q + 1) + 10;
        if series.len() < needed {
            return Err(ArimaError::SeriesTooShort { needed, got: series.len() });
        }
        let w = difference(series, d)?;
        let cond = opts.conditioning.unwrap_or(p).max(p);
        if cond >= w.len() {
            return Err(ArimaError::SeriesTooShort { needed: needed + cond, got: series.len() });
        }
        let n_eff = w.len() - cond;
        let k = param_count(p, q, opts.with_intercept);

        let n = w.len() as f64;
        let w_mean = w.iter().sum::<f64>() / n;
        let w_var = w.iter().map(|v| (v - w_mean) * (v - w_mean)).sum::<f64>() / n;
        let degenerate = w_var <= 1e-20 * (1.0 + w_mean * w_mean);
        if p + q > 0 && degenerate {
            return Err(ArimaError::DegenerateSeries);
        }

        let mut eps = vec![0.0; w.len()];
        let (ar, ma, mu, ss) = if p + q == 0 {
            let mu = if opts.with_intercept { w[cond..].iter().sum::<f64>() / n_eff as f64 } else { 0.0 };
            let ss = residuals_into(&w, mu, &[], &[], cond, &mut eps);
            (Vec::new(), Vec::new(), mu, ss)
        } else {
            let scale = libm::sqrt(w_var);
            let dim = p + q + usize::from(opts.with_intercept);
            let mut x0 = Vec::with_capacity(dim);
            let warm = opts.warm_start.filter(|m| m.order.p == p && m.order.q == q && m.has_intercept == opts.with_intercept);
            match warm {
                Some(m) => {
                    x0.extend(ar_to_unconstrained(&m.ar));
                    x0.extend(ma_to_unconstrained(&m.ma));
                    if opts.with_intercept {
                        x0.push((m.mean() - w_mean) / scale);
                    }
                }
                None => {
                    x0.extend(sample_pacf(&w, p).into_iter().map(pacf_to_unconstrained));
                    x0.extend(core::iter::repeat_n(0.0, q));
                    if opts.with_intercept {
                        x0.push(0.0);
                    }
                }
            }
            let optimizer = NelderMead {
                initial_step: if warm.is_some() { self.warm_step } else { self.optimizer.initial_step },
                ..self.optimizer
            };
            let decode = |x: &[f64]| {
                let ar = ar_from_unconstrained(&x[..p]);
                let ma = ma_from_unconstrained(&x[p..p + q]);
                let mu = if opts.with_intercept { w_mean + x[p + q] * scale } else { 0.0 };
                (ar, ma, mu)
            };
            let mut scratch = vec![0.0; w.len()];
            let min = optimizer.minimize(
                |x| {
                    let (ar, ma, mu) = decode(x);
                    residuals_into(&w, mu, &ar, &ma, cond, &mut scratch) / n_eff as f64
                },
                &x0,
            );
            if !min.converged {
                return Err(ArimaError::NonConvergence { iterations: min.iterations });
            }
            let (ar, ma, mu) = decode(&min.x);
            let ss = residuals_into(&w, mu, &ar, &ma, cond, &mut eps);
            (ar, ma, mu, ss)
        };

        let sigma2 = ss / n_eff as f64;
        let ll = loglik(sigma2, n_eff);
        let aicc = aicc(ll, k, n_eff)?;
        let intercept = if opts.with_intercept { mu * (1.0 - ar.iter().sum::<f64>()) } else { 0.0 };
        Ok(ArimaModel {
            order,
            has_intercept: opts.with_intercept,
            intercept,
            ar,
            ma,
            sigma2,
            loglik: ll,
            aicc,
            n_train: n_eff,
            conditioning: cond,
        })
    }
}
