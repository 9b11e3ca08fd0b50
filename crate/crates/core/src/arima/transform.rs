//! Partial-autocorrelation parameterization of AR and MA polynomials.
//!
//! Any vector of partial autocorrelations in `(-1, 1)` maps, through the
//! Durbin–Levinson recursion, to the coefficients of a polynomial
//! `1 - φ1·z - … - φp·z^p` whose roots lie outside the unit circle, and every
//! such polynomial arises this way. Optimizing over unconstrained
//! `u = atanh(r)` therefore keeps fitted models stationary (AR) and
//! invertible (MA) without explicit constraints.

use alloc::vec::Vec;

/// Largest admissible partial autocorrelation magnitude. Closer to 1 the
/// step-down check loses the precision to confirm stationarity.
const PACF_LIMIT: f64 = 0.999;

/// Durbin–Levinson: partial autocorrelations to AR coefficients.
pub fn pacf_to_ar(pacf: &[f64]) -> Vec<f64> {
    let mut phi: Vec<f64> = Vec::with_capacity(pacf.len());
    let mut prev: Vec<f64> = Vec::with_capacity(pacf.len());
    for (k, &r) in pacf.iter().enumerate() {
        prev.clear();
        prev.extend_from_slice(&phi);
        for j in 0..k {
            phi[j] = prev[j] - r * prev[k - 1 - j];
        }
        phi.push(r);
    }
    phi
}

/// Step-down recursion, the inverse of [`pacf_to_ar`]. Returns `None` when the
/// polynomial is not stationary.
pub fn ar_to_pacf(ar: &[f64]) -> Option<Vec<f64>> {
    let mut phi = ar.to_vec();
    let mut pacf = alloc::vec![0.0; ar.len()];
    for k in (0..ar.len()).rev() {
        let r = phi[k];
        if r.is_nan() || r.abs() >= 1.0 {
            return None;
        }
        pacf[k] = r;
        let denom = 1.0 - r * r;
        let prev = phi.clone();
        for j in 0..k {
            phi[j] = (prev[j] + r * prev[k - 1 - j]) / denom;
        }
        phi.truncate(k);
    }
    Some(pacf)
}

/// True when `1 - Σ φ_i z^i` has all roots strictly outside the unit circle.
pub fn ar_is_stationary(ar: &[f64]) -> bool {
    ar_to_pacf(ar).is_some()
}

/// True when `1 + Σ θ_j z^j` has all roots strictly outside the unit circle.
pub fn ma_is_invertible(ma: &[f64]) -> bool {
    let negated: Vec<f64> = ma.iter().map(|t| -t).collect();
    ar_is_stationary(&negated)
}

pub(crate) fn unconstrained_to_pacf(u: f64) -> f64 {
    libm::tanh(u).clamp(-PACF_LIMIT, PACF_LIMIT)
}

pub(crate) fn pacf_to_unconstrained(r: f64) -> f64 {
    libm::atanh(r.clamp(-PACF_LIMIT, PACF_LIMIT))
}

/// AR coefficients from unconstrained optimizer coordinates.
pub(crate) fn ar_from_unconstrained(u: &[f64]) -> Vec<f64> {
    let pacf: Vec<f64> = u.iter().map(|&v| unconstrained_to_pacf(v)).collect();
    pacf_to_ar(&pacf)
}

/// MA coefficients from unconstrained optimizer coordinates.
pub(crate) fn ma_from_unconstrained(u: &[f64]) -> Vec<f64> {
    ar_from_unconstrained(u).into_iter().map(|v| -v).collect()
}

/// Unconstrained coordinates for given AR coefficients, pulling
/// non-stationary input back inside the admissible region.
pub(crate) fn ar_to_unconstrained(ar: &[f64]) -> Vec<f64> {
    match ar_to_pacf(ar) {
        Some(pacf) => pacf.into_iter().map(pacf_to_unconstrained).collect(),
        None => alloc::vec![0.0; ar.len()],
    }
}

pub(crate) fn ma_to_unconstrained(ma: &[f64]) -> Vec<f64> {
    let negated: Vec<f64> = ma.iter().map(|t| -t).collect();
    ar_to_unconstrained(&negated)
}

/// Sample partial autocorrelations of `series` up to `lag`.
pub fn sample_pacf(series: &[f64], lag: usize) -> Vec<f64> {
    let n = series.len();
    if n == 0 || lag == 0 {
        return Vec::new();
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let acov = |k: usize| -> f64 {
        if k >= n {
            return 0.0;
        }
        (k..n).map(|t| (series[t] - mean) * (series[t - k] - mean)).sum::<f64>() / n as f64
    };
    let gamma0 = acov(0);
    if gamma0 <= 0.0 {
        return alloc::vec![0.0; lag];
    }
    let rho: Vec<f64> = (0..=lag).map(|k| acov(k) / gamma0).collect();

    let mut pacf = Vec::with_capacity(lag);
    let mut phi: Vec<f64> = Vec::with_capacity(lag);
    let mut var = 1.0;
    for k in 0..lag {
        let num = rho[k + 1] - (0..k).map(|j| phi[j] * rho[k - j]).sum::<f64>();
        let r = if var > 1e-12 { (num / var).clamp(-0.99, 0.99) } else { 0.0 };
        let prev = phi.clone();
        for j in 0..k {
            phi[j] = prev[j] - r * prev[k - 1 - j];
        }
        phi.push(r);
        var *= 1.0 - r * r;
        pacf.push(r);
    }
    pacf
}
