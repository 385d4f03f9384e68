//! DE/rand/1/bin with greedy one-to-one replacement.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{distinct_indices, Bounds, Evaluator, OptimizerConfig};

pub(super) fn run<F: Fn(&[f64]) -> f64 + Sync>(
    ev: &mut Evaluator<'_, F>,
    bounds: &Bounds,
    cfg: &OptimizerConfig,
    rng: &mut ChaCha8Rng,
) {
    let n = cfg.population;
    let dim = bounds.dim();
    let (f, cr) = (cfg.de.f, cfg.de.cr);

    let mut pop: Vec<Vec<f64>> = (0..n).map(|_| bounds.sample(rng)).collect();
    let mut fit = ev.evaluate(&pop);

    while !ev.exhausted() {
        let trials: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let r = distinct_indices(rng, n, i, 3);
                let j_rand = rng.random_range(0..dim);
                let mut trial = pop[i].clone();
                for j in 0..dim {
                    if j == j_rand || rng.random::<f64>() < cr {
                        trial[j] = pop[r[0]][j] + f * (pop[r[1]][j] - pop[r[2]][j]);
                    }
                }
                bounds.clamp(&mut trial);
                trial
            })
            .collect();
        let values = ev.evaluate(&trials);
        for (i, (trial, value)) in trials.into_iter().zip(values).enumerate() {
            if value <= fit[i] {
                pop[i] = trial;
                fit[i] = value;
            }
        }
    }
}
