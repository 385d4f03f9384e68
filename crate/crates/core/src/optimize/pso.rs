//! Particle swarm with constriction coefficients and a global-best topology.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{argmin, constriction_params, Bounds, Evaluator, OptimizeError, OptimizerConfig};

pub(super) fn run<F: Fn(&[f64]) -> f64 + Sync>(
    ev: &mut Evaluator<'_, F>,
    bounds: &Bounds,
    cfg: &OptimizerConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(), OptimizeError> {
    let (w, c1, c2) = constriction_params(cfg.pso.k, cfg.pso.phi1, cfg.pso.phi2)?;
    let n = cfg.population;
    let dim = bounds.dim();
    let vmax: Vec<f64> = (0..dim).map(|i| bounds.width(i)).collect();

    let mut x: Vec<Vec<f64>> = (0..n).map(|_| bounds.sample(rng)).collect();
    let mut v: Vec<Vec<f64>> =
        (0..n).map(|_| (0..dim).map(|i| 0.1 * vmax[i] * rng.random_range(-1.0..=1.0)).collect()).collect();
    let values = ev.evaluate(&x);
    let mut pbest = x.clone();
    let mut pbest_val = values;
    let mut g = argmin(&pbest_val);

    while !ev.exhausted() {
        for p in 0..n {
            for d in 0..dim {
                let r1: f64 = rng.random();
                let r2: f64 = rng.random();
                let vel = w * v[p][d] + c1 * r1 * (pbest[p][d] - x[p][d]) + c2 * r2 * (pbest[g][d] - x[p][d]);
                v[p][d] = vel.clamp(-vmax[d], vmax[d]);
                let next = x[p][d] + v[p][d];
                let clamped = next.clamp(bounds.lower()[d], bounds.upper()[d]);
                if clamped != next {
                    v[p][d] = 0.0;
                }
                x[p][d] = clamped;
            }
        }
        let values = ev.evaluate(&x);
        for p in 0..n {
            if values[p] < pbest_val[p] {
                pbest_val[p] = values[p];
                pbest[p].clone_from(&x[p]);
            }
        }
        g = argmin(&pbest_val);
    }
    Ok(())
}
