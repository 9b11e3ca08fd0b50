//! Seeded synthetic utilization traces.
//!
//! `u(t) = base + amplitude·sin(2π(t + phase)/period) + trend·t/day + ramps + noise`,
//! clamped to `[0, 100]`. Each ramp rises linearly by `spike_height` over
//! `ramp_up`, holds for `spike_hold` and falls back over `ramp_down`. Ramps
//! are spread one per equal segment of the trace, so they never overlap.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use scalesim_core::TracePoint;

use crate::error::{Error, Result};

/// 2022-02-01T00:00:00Z.
pub const DEFAULT_START: i64 = 1_643_673_600;
const DAY: i64 = 86_400;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorParams {
    pub start: i64,
    pub step: i64,
    pub duration: i64,
    /// Mean utilization, percent.
    pub base: f64,
    /// Sinusoid amplitude, percent.
    pub amplitude: f64,
    /// Sinusoid period, seconds.
    pub period: i64,
    /// Seconds added to `t` inside the sinusoid.
    pub phase: i64,
    /// Percent per day.
    pub trend: f64,
    /// Gaussian noise standard deviation, percent.
    pub noise_sigma: f64,
    pub spikes: usize,
    /// Percent added at the top of a ramp.
    pub spike_height: f64,
    pub ramp_up: i64,
    pub spike_hold: i64,
    pub ramp_down: i64,
    pub instance_type: String,
    pub seed: u64,
}

impl Default for GeneratorParams {
    /// Two weeks of one-minute samples: 50 ± 35 % daily cycle, 3 % noise and
    /// ten +20 % ramps.
    fn default() -> Self {
        Self {
            start: DEFAULT_START,
            step: 60,
            duration: 14 * DAY,
            base: 50.0,
            amplitude: 35.0,
            period: DAY,
            phase: 0,
            trend: 0.0,
            noise_sigma: 3.0,
            spikes: 10,
            spike_height: 20.0,
            ramp_up: 900,
            spike_hold: 1800,
            ramp_down: 900,
            instance_type: "c5.xlarge".to_string(),
            seed: 42,
        }
    }
}

impl GeneratorParams {
    pub fn len(&self) -> usize {
        (self.duration / self.step) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn spike_steps(&self) -> usize {
        ((self.ramp_up + self.spike_hold + self.ramp_down) / self.step) as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("generator: {m}")));
        if self.step <= 0 || self.duration < self.step {
            return bad("step must be positive and duration at least one step");
        }
        if self.period <= 0 {
            return bad("period must be positive");
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad("noise sigma must be a finite non-negative number");
        }
        if self.ramp_up < 0 || self.spike_hold < 0 || self.ramp_down < 0 {
            return bad("ramp durations must be non-negative");
        }
        if self.spikes > 0 && (self.spike_steps() == 0 || self.len() / self.spikes < self.spike_steps()) {
            return bad("not enough room for the requested spikes");
        }
        if self.instance_type.is_empty() || self.instance_type.contains(',') {
            return bad("instance type must be non-empty and contain no comma");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub points: Vec<TracePoint>,
    /// First step of each ramp.
    pub spike_starts: Vec<usize>,
}

/// Ramp contribution `k` steps after a ramp start.
fn ramp(params: &GeneratorParams, k: usize) -> f64 {
    let t = k as i64 * params.step;
    let h = params.spike_height;
    if t < params.ramp_up {
        h * t as f64 / params.ramp_up as f64
    } else if t < params.ramp_up + params.spike_hold {
        h
    } else {
        let down = t - params.ramp_up - params.spike_hold;
        h * (1.0 - down as f64 / params.ramp_down.max(1) as f64)
    }
}

pub fn generate(params: &GeneratorParams) -> Result<Generated> {
    params.validate()?;
    let n = params.len();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let noise = Normal::new(0.0, params.noise_sigma).map_err(|e| Error::Config(e.to_string()))?;

    let mut spike_starts = Vec::with_capacity(params.spikes);
    if let Some(segment) = n.checked_div(params.spikes) {
        let room = segment - params.spike_steps();
        for s in 0..params.spikes {
            spike_starts.push(s * segment + rng.random_range(0..=room));
        }
    }
    let mut extra = vec![0.0; n];
    for &s in &spike_starts {
        for (k, slot) in extra[s..s + params.spike_steps()].iter_mut().enumerate() {
            *slot += ramp(params, k);
        }
    }

    let points = (0..n)
        .map(|i| {
            let t = i as i64 * params.step;
            let angle = core::f64::consts::TAU * ((t + params.phase) % params.period) as f64 / params.period as f64;
            let mut u = params.base + params.amplitude * angle.sin() + params.trend * t as f64 / DAY as f64 + extra[i];
            if params.noise_sigma > 0.0 {
                u += noise.sample(&mut rng);
            }
            TracePoint {
                timestamp: params.start + t,
                instance_type: params.instance_type.clone(),
                utilization: u.clamp(0.0, 100.0),
            }
        })
        .collect();
    Ok(Generated { points, spike_starts })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet() -> GeneratorParams {
        GeneratorParams { duration: 2 * DAY, noise_sigma: 0.0, spikes: 0, ..GeneratorParams::default() }
    }

    #[test]
    fn pure_sinusoid_hits_amplitude_bounds() {
        let g = generate(&quiet()).unwrap();
        let max = g.points.iter().map(|p| p.utilization).fold(f64::MIN, f64::max);
        let min = g.points.iter().map(|p| p.utilization).fold(f64::MAX, f64::min);
        assert!((max - 85.0).abs() < 1e-9 && (min - 15.0).abs() < 1e-9, "{min} {max}");
        assert_eq!(g.points.len(), 2 * 1440);
    }

    #[test]
    fn spikes_are_counted_and_separate() {
        let p = GeneratorParams { spikes: 7, ..quiet() };
        let g = generate(&p).unwrap();
        assert_eq!(g.spike_starts.len(), 7);
        for w in g.spike_starts.windows(2) {
            assert!(w[1] - w[0] >= p.spike_steps());
        }
        let base = generate(&quiet()).unwrap();
        let s = g.spike_starts[3];
        let top = s + (p.ramp_up / p.step) as usize + 1;
        let lift = g.points[top].utilization - base.points[top].utilization;
        assert!(lift > 0.0 && lift <= p.spike_height + 1e-9);
    }

    #[test]
    fn seeded_and_bounded() {
        let p = GeneratorParams { duration: 3 * DAY, noise_sigma: 20.0, ..GeneratorParams::default() };
        let a = generate(&p).unwrap();
        assert_eq!(a, generate(&p).unwrap());
        assert!(a.points.iter().all(|x| (0.0..=100.0).contains(&x.utilization)));
        let b = generate(&GeneratorParams { seed: 7, ..p }).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn rejects_crowded_spikes() {
        let p = GeneratorParams { duration: 3600, spikes: 2, ..GeneratorParams::default() };
        assert!(generate(&p).is_err());
        assert!(generate(&GeneratorParams { step: 0, ..GeneratorParams::default() }).is_err());
    }
}
