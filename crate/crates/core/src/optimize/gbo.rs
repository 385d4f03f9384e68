//! Gradient-based optimizer: gradient search rule plus local escaping
//! operator, with greedy replacement.
//!
//! New positions for a whole iteration are generated from the population
//! as it stood at the start of the iteration, then evaluated as a batch.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{argmin, distinct_indices, Bounds, Evaluator, OptimizerConfig};

/// `beta_min + (beta_max - beta_min) (1 - (m/M)^3)^2`.
fn beta(m: usize, max_iter: usize, beta_min: f64, beta_max: f64) -> f64 {
    let t = (m as f64 / max_iter as f64).min(1.0);
    beta_min + (beta_max - beta_min) * (1.0 - t.powi(3)).powi(2)
}

/// `|beta sin(3 pi / 2 + sin(beta 3 pi / 2))|`.
fn alpha(beta: f64) -> f64 {
    (beta * (1.5 * PI + (1.5 * PI * beta).sin()).sin()).abs()
}

fn randn(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub(super) fn run<F: Fn(&[f64]) -> f64 + Sync>(
    ev: &mut Evaluator<'_, F>,
    bounds: &Bounds,
    cfg: &OptimizerConfig,
    rng: &mut ChaCha8Rng,
) {
    const EPS: f64 = f64::EPSILON;
    let p = &cfg.gbo;
    let n = cfg.population;
    let dim = bounds.dim();
    let max_iter = (ev.remaining() / n).max(1);

    let mut pop: Vec<Vec<f64>> = (0..n).map(|_| bounds.sample(rng)).collect();
    let mut fit = ev.evaluate(&pop);
    let mut m = 1;

    while !ev.exhausted() {
        let b = beta(m, max_iter, p.beta_min, p.beta_max);
        let a = alpha(b);
        let best_i = argmin(&fit);
        let worst_i = fit.iter().enumerate().fold(0, |w, (i, v)| if v.total_cmp(&fit[w]).is_gt() { i } else { w });
        let best = pop[best_i].clone();
        let worst = pop[worst_i].clone();

        let candidates: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let r = distinct_indices(rng, n, i, 4);
                let x = &pop[i];
                let rho1 = 2.0 * rng.random::<f64>() * a - a;
                let rho2 = 2.0 * rng.random::<f64>() * a - a;
                let mut x1 = vec![0.0; dim];
                let mut x2 = vec![0.0; dim];
                for j in 0..dim {
                    let mean_r = (pop[r[0]][j] + pop[r[1]][j] + pop[r[2]][j] + pop[r[3]][j]) / 4.0;
                    let delta = 2.0 * rng.random::<f64>() * (mean_r - x[j]).abs();
                    let step = ((best[j] - pop[r[0]][j]) + delta) / 2.0;
                    let dx = rng.random::<f64>() * step.abs();
                    let spread = worst[j] - best[j] + EPS;
                    let gsr = randn(rng) * rho1 * 2.0 * dx * x[j] / spread;
                    let dm = rng.random::<f64>() * rho2 * (best[j] - x[j]);
                    x1[j] = x[j] - gsr + dm;
                    let gsr2 = randn(rng) * rho1 * 2.0 * dx * x[j] / spread;
                    x2[j] = best[j] - gsr2 + rng.random::<f64>() * rho2 * (pop[r[0]][j] - pop[r[1]][j]);
                }
                let (ra, rb): (f64, f64) = (rng.random(), rng.random());
                let mut next: Vec<f64> = (0..dim)
                    .map(|j| {
                        let x3 = x[j] - rho1 * (x2[j] - x1[j]);
                        ra * (rb * x1[j] + (1.0 - rb) * x2[j]) + (1.0 - ra) * x3
                    })
                    .collect();

                if rng.random::<f64>() < p.local_escape_prob {
                    let f1: f64 = rng.random_range(-1.0..=1.0);
                    let f2 = randn(rng);
                    let rho = a * (2.0 * rng.random::<f64>() - 1.0);
                    let l1 = rng.random::<f64>() < 0.5;
                    let (u1, u2, u3) = if l1 {
                        (2.0 * rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>())
                    } else {
                        (1.0, 1.0, 1.0)
                    };
                    let l2 = rng.random::<f64>() < 0.5;
                    let random_point = bounds.sample(rng);
                    let k = rng.random_range(0..n);
                    let xk: Vec<f64> = if l2 { random_point } else { pop[k].clone() };
                    let from_best = u1 >= 0.5;
                    for j in 0..dim {
                        let jump = f1 * (u1 * best[j] - u2 * xk[j])
                            + f2 * rho * (u3 * (x2[j] - x1[j]) + u2 * (pop[r[0]][j] - pop[r[1]][j])) / 2.0;
                        next[j] = if from_best { best[j] + jump } else { next[j] + jump };
                    }
                }
                bounds.clamp(&mut next);
                next
            })
            .collect();

        let values = ev.evaluate(&candidates);
        for (i, (c, v)) in candidates.into_iter().zip(values).enumerate() {
            if v < fit[i] {
                pop[i] = c;
                fit[i] = v;
            }
        }
        m += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_shape() {
        assert!((beta(0, 100, 0.2, 1.2) - 1.2).abs() < 1e-15);
        assert!((beta(100, 100, 0.2, 1.2) - 0.2).abs() < 1e-15);
        let b = beta(50, 100, 0.2, 1.2);
        assert!((b - (0.2 + (1.0f64 - 0.125).powi(2))).abs() < 1e-15);
        assert!(alpha(1.2) >= 0.0 && alpha(0.2) >= 0.0);
    }
}
