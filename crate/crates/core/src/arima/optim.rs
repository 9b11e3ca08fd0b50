//! Derivative-free minimization (Nelder–Mead simplex).

use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMead {
    /// Budget shared by the initial run and any restarts.
    pub max_iterations: usize,
    /// Relative spread of objective values across the simplex at which a run
    /// stops.
    pub tolerance: f64,
    /// Edge length of the starting simplex.
    pub initial_step: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self { max_iterations: 500, tolerance: 1e-8, initial_step: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl NelderMead {
    /// Minimizes `f` from `x0`. Non-finite objective values count as `+∞`.
    ///
    /// After a run converges the simplex is rebuilt around the best vertex and
    /// the search continues; this repeats until a restart no longer improves
    /// the minimum (guards against premature collapse of the simplex).
    pub fn minimize<F: FnMut(&[f64]) -> f64>(&self, mut f: F, x0: &[f64]) -> Minimum {
        let mut eval = |x: &[f64]| {
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };
        if x0.is_empty() {
            return Minimum { x: Vec::new(), value: eval(x0), iterations: 0, converged: true };
        }

        let mut best = x0.to_vec();
        let mut best_value = eval(&best);
        let mut used = 0;
        let mut converged_once = false;
        loop {
            let budget = self.max_iterations - used;
            if budget == 0 {
                break;
            }
            let (x, value, iterations, converged) = self.run(&mut eval, &best, budget);
            used += iterations;
            let improved = value < best_value - self.tolerance * best_value.abs();
            if value <= best_value {
                best = x;
                best_value = value;
            }
            if !converged {
                break;
            }
            let first = !converged_once;
            converged_once = true;
            if !first && !improved {
                break;
            }
        }
        Minimum { x: best, value: best_value, iterations: used, converged: converged_once }
    }

    fn run<F: FnMut(&[f64]) -> f64>(&self, eval: &mut F, x0: &[f64], budget: usize) -> (Vec<f64>, f64, usize, bool) {
        let n = x0.len();
        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        simplex.push(x0.to_vec());
        for i in 0..n {
            let mut v = x0.to_vec();
            v[i] += self.initial_step;
            simplex.push(v);
        }
        let mut values: Vec<f64> = simplex.iter().map(|v| eval(v)).collect();
        let mut centroid = vec![0.0; n];
        let mut trial = vec![0.0; n];
        let mut trial2 = vec![0.0; n];

        let mut iterations = 0;
        loop {
            // order vertices: best first
            let mut idx: Vec<usize> = (0..=n).collect();
            idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
            simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
            values = idx.iter().map(|&i| values[i]).collect();

            let lo = values[0];
            let hi = values[n];
            if hi - lo <= self.tolerance * lo.abs() || (hi.is_finite() && hi - lo <= f64::MIN_POSITIVE) {
                return (simplex.swap_remove(0), lo, iterations, true);
            }
            let diameter = simplex[1..]
                .iter()
                .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            if diameter < 1e-12 {
                return (simplex.swap_remove(0), lo, iterations, true);
            }
            if iterations >= budget {
                return (simplex.swap_remove(0), lo, iterations, false);
            }
            iterations += 1;

            for c in centroid.iter_mut() {
                *c = 0.0;
            }
            for v in &simplex[..n] {
                for (c, x) in centroid.iter_mut().zip(v) {
                    *c += x / n as f64;
                }
            }
            let worst = simplex[n].clone();

            // reflection
            for i in 0..n {
                trial[i] = centroid[i] + (centroid[i] - worst[i]);
            }
            let fr = eval(&trial);
            if fr < values[0] {
                // expansion
                for i in 0..n {
                    trial2[i] = centroid[i] + 2.0 * (centroid[i] - worst[i]);
                }
                let fe = eval(&trial2);
                if fe < fr {
                    simplex[n].copy_from_slice(&trial2);
                    values[n] = fe;
                } else {
                    simplex[n].copy_from_slice(&trial);
                    values[n] = fr;
                }
                continue;
            }
            if fr < values[n - 1] {
                simplex[n].copy_from_slice(&trial);
                values[n] = fr;
                continue;
            }
            // contraction, outside if the reflection beat the worst point
            let outside = fr < values[n];
            for i in 0..n {
                trial2[i] = if outside {
                    centroid[i] + 0.5 * (trial[i] - centroid[i])
                } else {
                    centroid[i] + 0.5 * (worst[i] - centroid[i])
                };
            }
            let fc = eval(&trial2);
            if fc < values[n].min(fr) {
                simplex[n].copy_from_slice(&trial2);
                values[n] = fc;
                continue;
            }
            // shrink towards the best vertex
            let best = simplex[0].clone();
            for k in 1..=n {
                for i in 0..n {
                    simplex[k][i] = best[i] + 0.5 * (simplex[k][i] - best[i]);
                }
                values[k] = eval(&simplex[k]);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let nm = NelderMead::default();
        let m = nm.minimize(|x| (x[0] - 1.0).powi(2) + 2.0 * (x[1] + 0.5).powi(2) + 3.0, &[0.0, 0.0]);
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-3 && (m.x[1] + 0.5).abs() < 1e-3, "{:?}", m.x);
        assert!((m.value - 3.0).abs() < 1e-7);
    }

    #[test]
    fn rosenbrock() {
        let nm = NelderMead { max_iterations: 5000, tolerance: 1e-14, initial_step: 0.5 };
        let m = nm.minimize(|x| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2), &[-1.2, 1.0]);
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-3 && (m.x[1] - 1.0).abs() < 1e-3, "{:?}", m.x);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let nm = NelderMead { max_iterations: 5, tolerance: 1e-12, initial_step: 0.1 };
        let m = nm.minimize(|x| x.iter().map(|v| (v - 3.0).powi(2)).sum::<f64>() + 1.0, &[0.0; 4]);
        assert!(!m.converged);
        assert!(m.iterations <= 5);
    }

    #[test]
    fn nan_treated_as_infinite() {
        let nm = NelderMead::default();
        let m = nm.minimize(|x| if x[0] < 0.0 { f64::NAN } else { (x[0] - 0.25).powi(2) + 1.0 }, &[0.5]);
        assert!((m.x[0] - 0.25).abs() < 1e-3);
    }

    #[test]
    fn deterministic() {
        let nm = NelderMead::default();
        let f = |x: &[f64]| (x[0] - 0.3).powi(2) + (x[1] * x[0] - 0.1).powi(2) + 1.0;
        assert_eq!(nm.minimize(f, &[1.0, 1.0]), nm.minimize(f, &[1.0, 1.0]));
    }
}
