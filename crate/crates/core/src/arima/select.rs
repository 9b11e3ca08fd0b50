//! Stepwise AICc order search.
//!
//! `d` comes from repeated KPSS tests. The search then fits the starting
//! candidates (2,2), (0,0), (1,0) and (0,1) and walks to the best neighbour
//! (p and q each moved by at most one, or the intercept toggled) while that
//! strictly lowers the AICc. All candidates are conditioned on the same
//! `max_p` leading observations so their likelihoods are comparable.
//! Candidates with an AR or MA root inside modulus [`MIN_ROOT_MODULUS`] count
//! as failed fits: near-cancelling factors there buy spurious likelihood.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::css::{Css, Estimator, FitOptions};
use super::transform::{ar_is_stationary, ma_is_invertible};
use super::{select_d, ArimaError, ArimaModel, ArimaOrder, MAX_D};

pub const MIN_ROOT_MODULUS: f64 = 1.01;

/// All roots of `1 - Σ c_i z^i` lie outside radius `r` iff those of
/// `1 - Σ c_i r^i z^i` lie outside the unit circle.
fn scaled(coefs: &[f64], r: f64) -> Vec<f64> {
    let mut k = 1.0;
    coefs
        .iter()
        .map(|c| {
            k *= r;
            c * k
        })
        .collect()
}

/// True when every AR and MA root has modulus above [`MIN_ROOT_MODULUS`].
pub fn roots_clear_of_unit_circle(m: &ArimaModel) -> bool {
    ar_is_stationary(&scaled(&m.ar, MIN_ROOT_MODULUS)) && ma_is_invertible(&scaled(&m.ma, MIN_ROOT_MODULUS))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub max_p: usize,
    pub max_q: usize,
    /// KPSS significance level used to pick `d`.
    pub alpha: f64,
    /// Skip the search and fit this order (and intercept flag) directly.
    pub fixed: Option<(ArimaOrder, bool)>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { max_p: 5, max_q: 5, alpha: 0.05, fixed: None }
    }
}

impl SearchConfig {
    pub fn fixed(order: ArimaOrder, with_intercept: bool) -> Self {
        Self { fixed: Some((order, with_intercept)), ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), ArimaError> {
        if let Some((order, _)) = self.fixed {
            if order.d > MAX_D {
                return Err(ArimaError::InvalidOrder(order));
            }
        }
        if super::kpss_critical_value(self.alpha).is_none() {
            return Err(ArimaError::InvalidConfig("KPSS alpha must be 0.10, 0.05, 0.025 or 0.01"));
        }
        Ok(())
    }

    /// Largest AR/MA order the configuration can produce.
    pub fn max_order(&self) -> usize {
        match self.fixed {
            Some((o, _)) => o.p.max(o.q),
            None => self.max_p.max(self.max_q),
        }
    }
}

/// One evaluated point of the search.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub p: usize,
    pub q: usize,
    pub intercept: bool,
    /// `None` when the fit failed.
    pub aicc: Option<f64>,
}

/// Ordering used to pick between models: AICc, then fewer parameters, then
/// fewer AR terms, then no intercept.
fn rank(a: &ArimaModel, b: &ArimaModel) -> Ordering {
    a.aicc
        .total_cmp(&b.aicc)
        .then((a.order.p + a.order.q).cmp(&(b.order.p + b.order.q)))
        .then(a.order.p.cmp(&b.order.p))
        .then(a.has_intercept.cmp(&b.has_intercept))
}

/// Automatic order selection with the CSS estimator.
pub fn auto_select(series: &[f64], search: &SearchConfig) -> Result<ArimaModel, ArimaError> {
    auto_select_with(series, search, &Css::default())
}

pub fn auto_select_with<E: Estimator>(series: &[f64], search: &SearchConfig, estimator: &E) -> Result<ArimaModel, ArimaError> {
    auto_select_traced(series, search, estimator).map(|(m, _)| m)
}

/// Like [`auto_select_with`], also returning every candidate evaluated.
pub fn auto_select_traced<E: Estimator>(
    series: &[f64],
    search: &SearchConfig,
    estimator: &E,
) -> Result<(ArimaModel, Vec<Candidate>), ArimaError> {
    search.validate()?;
    if series.len() < 30 {
        return Err(ArimaError::SeriesTooShort { needed: 30, got: series.len() });
    }
    if let Some((order, intercept)) = search.fixed {
        let m = estimator.estimate(series, order, &FitOptions::new(intercept))?;
        let trace = alloc::vec![Candidate { p: order.p, q: order.q, intercept, aicc: Some(m.aicc) }];
        return Ok((m, trace));
    }

    let d = select_d(series, search.alpha)?;
    let allow_intercept = d <= 1;
    let conditioning = Some(search.max_p);

    let mut cache: BTreeMap<(usize, usize, bool), Option<ArimaModel>> = BTreeMap::new();
    let mut trace = Vec::new();
    let mut evaluate = |p: usize, q: usize, intercept: bool, trace: &mut Vec<Candidate>| -> Option<ArimaModel> {
        cache
            .entry((p, q, intercept))
            .or_insert_with(|| {
                let opts = FitOptions { with_intercept: intercept, conditioning, warm_start: None };
                let fitted = estimator.estimate(series, ArimaOrder::new(p, d, q), &opts).ok().filter(roots_clear_of_unit_circle);
                trace.push(Candidate { p, q, intercept, aicc: fitted.as_ref().map(|m| m.aicc) });
                fitted
            })
            .clone()
    };

    let mut current: Option<ArimaModel> = None;
    for (p, q) in [(2, 2), (0, 0), (1, 0), (0, 1)] {
        if p > search.max_p || q > search.max_q {
            continue;
        }
        if let Some(m) = evaluate(p, q, allow_intercept, &mut trace) {
            if current.as_ref().is_none_or(|c| rank(&m, c) == Ordering::Less) {
                current = Some(m);
            }
        }
    }
    let mut current = current.ok_or(ArimaError::AllFitsFailed)?;

    loop {
        let (p, q, c) = (current.order.p, current.order.q, current.has_intercept);
        let mut neighbours: Vec<(usize, usize, bool)> = Vec::with_capacity(9);
        for dp in -1i64..=1 {
            for dq in -1i64..=1 {
                if dp == 0 && dq == 0 {
                    continue;
                }
                let (np, nq) = (p as i64 + dp, q as i64 + dq);
                if np < 0 || nq < 0 || np as usize > search.max_p || nq as usize > search.max_q {
                    continue;
                }
                neighbours.push((np as usize, nq as usize, c));
            }
        }
        if allow_intercept {
            neighbours.push((p, q, !c));
        }

        let mut best: Option<ArimaModel> = None;
        for (np, nq, nc) in neighbours {
            if let Some(m) = evaluate(np, nq, nc, &mut trace) {
                if best.as_ref().is_none_or(|b| rank(&m, b) == Ordering::Less) {
                    best = Some(m);
                }
            }
        }
        match best {
            Some(b) if b.aicc < current.aicc => current = b,
            _ => break,
        }
    }
    Ok((current, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn noise(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    fn ar2(seed: u64, n: usize) -> Vec<f64> {
        let e = noise(seed, n + 200);
        let mut y = vec![0.0; n + 200];
        for t in 2..y.len() {
            y[t] = 0.5 * y[t - 1] - 0.3 * y[t - 2] + e[t];
        }
        y.split_off(200)
    }

    #[test]
    fn ar2_recovered() {
        let (m, _) = auto_select_traced(&ar2(5, 4000), &SearchConfig::default(), &Css::default()).unwrap();
        assert_eq!(m.order.d, 0);
        assert_eq!(m.order.p, 2, "selected {}", m.order);
        assert!(m.order.q <= 1);
    }

    #[test]
    fn selected_model_minimizes_evaluated_aicc() {
        for seed in 0..5 {
            let (m, trace) = auto_select_traced(&ar2(seed, 600), &SearchConfig::default(), &Css::default()).unwrap();
            assert!(trace.len() >= 4);
            for c in trace.iter().filter_map(|c| c.aicc) {
                assert!(m.aicc <= c, "{} > {c}", m.aicc);
            }
            assert!(m.is_stationary() && m.is_invertible());
        }
    }

    #[test]
    fn root_screen() {
        let mut m = auto_select(&noise(1, 200), &SearchConfig::fixed(ArimaOrder::new(1, 0, 1), false)).unwrap();
        m.ar = vec![0.5];
        m.ma = vec![0.3];
        assert!(roots_clear_of_unit_circle(&m));
        m.ar = vec![0.995];
        assert!(!roots_clear_of_unit_circle(&m));
        m.ar = vec![0.5];
        m.ma = vec![-0.995];
        assert!(!roots_clear_of_unit_circle(&m));
        // complex pair with modulus 1/sqrt(0.985) ≈ 1.0076
        m.ar = vec![0.0, -0.985];
        m.ma = vec![];
        assert!(ar_is_stationary(&m.ar) && !roots_clear_of_unit_circle(&m));
    }

    #[test]
    fn deterministic() {
        let y = noise(99, 800);
        let a = auto_select(&y, &SearchConfig::default()).unwrap();
        let b = auto_select(&y, &SearchConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn intercept_suppressed_for_second_difference() {
        // integrated twice: KPSS cannot accept d < 2
        let e = noise(3, 600);
        let mut y = vec![0.0; 600];
        let mut slope = 0.0;
        for t in 1..600 {
            slope += e[t];
            y[t] = y[t - 1] + slope;
        }
        let (m, trace) = auto_select_traced(&y, &SearchConfig::default(), &Css::default()).unwrap();
        assert_eq!(m.order.d, 2);
        assert!(trace.iter().all(|c| !c.intercept));
    }

    #[test]
    fn fixed_order_bypasses_search() {
        let y = noise(4, 100);
        let m = auto_select(&y, &SearchConfig::fixed(ArimaOrder::new(0, 1, 0), false)).unwrap();
        assert_eq!(m.order, ArimaOrder::new(0, 1, 0));
    }

    #[test]
    fn constant_series_picks_mean_model() {
        let m = auto_select(&[3.0; 60], &SearchConfig::default()).unwrap();
        assert_eq!(m.order, ArimaOrder::new(0, 0, 0));
        assert!(m.has_intercept);
        assert_eq!(m.intercept, 3.0);
    }

    #[test]
    fn too_short() {
        assert_eq!(
            auto_select(&[1.0; 29], &SearchConfig::default()),
            Err(ArimaError::SeriesTooShort { needed: 30, got: 29 })
        );
    }
}
