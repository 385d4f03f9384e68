//! Generational real-coded GA: tournament selection, uniform crossover,
//! per-gene Gaussian mutation with an annealed step, and elitism.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{Bounds, Evaluator, OptimizerConfig};

fn tournament(rng: &mut ChaCha8Rng, fit: &[f64], size: usize) -> usize {
    let mut best = rng.random_range(0..fit.len());
    for _ in 1..size {
        let c = rng.random_range(0..fit.len());
        if fit[c] < fit[best] {
            best = c;
        }
    }
    best
}

pub(super) fn run<F: Fn(&[f64]) -> f64 + Sync>(
    ev: &mut Evaluator<'_, F>,
    bounds: &Bounds,
    cfg: &OptimizerConfig,
    rng: &mut ChaCha8Rng,
) {
    let p = &cfg.ga;
    let n = cfg.population;
    let dim = bounds.dim();
    let elites = p.elites.min(n - 1);
    let mutation_rate = p.mutation_rate.unwrap_or(1.0 / dim as f64);
    let budget = ev.remaining() as f64;

    let mut pop: Vec<Vec<f64>> = (0..n).map(|_| bounds.sample(rng)).collect();
    let mut fit = ev.evaluate(&pop);

    while !ev.exhausted() {
        let progress = 1.0 - ev.remaining() as f64 / budget;
        let scale = p.mutation_scale_initial * (p.mutation_scale_final / p.mutation_scale_initial).powf(progress);

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| fit[a].total_cmp(&fit[b]).then(a.cmp(&b)));
        let kept: Vec<usize> = order[..elites].to_vec();

        let children: Vec<Vec<f64>> = (0..n - elites)
            .map(|_| {
                let a = tournament(rng, &fit, p.tournament_size);
                let b = tournament(rng, &fit, p.tournament_size);
                let mut child = pop[a].clone();
                if rng.random::<f64>() < p.crossover_rate {
                    for (j, gene) in child.iter_mut().enumerate() {
                        if rng.random::<bool>() {
                            *gene = pop[b][j];
                        }
                    }
                }
                for (j, gene) in child.iter_mut().enumerate() {
                    if rng.random::<f64>() < mutation_rate {
                        let z: f64 = StandardNormal.sample(rng);
                        *gene += z * scale * bounds.width(j);
                    }
                }
                bounds.clamp(&mut child);
                child
            })
            .collect();
        let child_fit = ev.evaluate(&children);

        let mut next_pop: Vec<Vec<f64>> = kept.iter().map(|&i| pop[i].clone()).collect();
        let mut next_fit: Vec<f64> = kept.iter().map(|&i| fit[i]).collect();
        next_pop.extend(children);
        next_fit.extend(child_fit);
        pop = next_pop;
        fit = next_fit;
    }
}
