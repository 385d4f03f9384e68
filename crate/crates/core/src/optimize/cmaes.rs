//! (mu/mu_w, lambda)-CMA-ES with rank-one and rank-mu covariance updates and
//! cumulative step-size adaptation.
//!
//! Runs in the unit cube (every dimension rescaled to [0, 1]) so one step
//! size serves dimensions of very different widths. Samples are projected
//! onto the cube before evaluation and the projected steps drive the
//! update.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{Bounds, Evaluator, OptimizerConfig};

pub(super) fn default_lambda(dim: usize) -> usize {
    4 + (3.0 * (dim as f64).ln()).floor() as usize
}

pub(super) fn run<F: Fn(&[f64]) -> f64 + Sync>(
    ev: &mut Evaluator<'_, F>,
    bounds: &Bounds,
    cfg: &OptimizerConfig,
    rng: &mut ChaCha8Rng,
) {
    let n = bounds.dim();
    let nf = n as f64;
    let lambda = cfg.cmaes.lambda.unwrap_or_else(|| default_lambda(n)).max(2);
    let mu = lambda / 2;

    let raw: Vec<f64> = (1..=mu).map(|i| (mu as f64 + 0.5).ln() - (i as f64).ln()).collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let mu_eff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();

    let c_sigma = (mu_eff + 2.0) / (nf + mu_eff + 5.0);
    let d_sigma = 1.0 + 2.0 * (((mu_eff - 1.0) / (nf + 1.0)).sqrt() - 1.0).max(0.0) + c_sigma;
    let c_c = (4.0 + mu_eff / nf) / (nf + 4.0 + 2.0 * mu_eff / nf);
    let c_1 = 2.0 / ((nf + 1.3).powi(2) + mu_eff);
    let c_mu = (1.0 - c_1).min(2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((nf + 2.0).powi(2) + mu_eff));
    let chi_n = nf.sqrt() * (1.0 - 1.0 / (4.0 * nf) + 1.0 / (21.0 * nf * nf));

    let mut mean = DVector::from_element(n, 0.5);
    let mut sigma = cfg.cmaes.sigma0;
    let mut cov = DMatrix::<f64>::identity(n, n);
    let mut p_sigma = DVector::<f64>::zeros(n);
    let mut p_c = DVector::<f64>::zeros(n);
    let mut generation = 0i32;

    let to_problem =
        |u: &DVector<f64>| -> Vec<f64> { (0..n).map(|i| bounds.lower()[i] + u[i] * bounds.width(i)).collect() };

    while !ev.exhausted() {
        let eig = SymmetricEigen::new(cov.clone());
        let basis = eig.eigenvectors;
        let d = eig.eigenvalues.map(|e| e.max(1e-20).sqrt());
        let bd = &basis * DMatrix::from_diagonal(&d);

        let mut samples: Vec<DVector<f64>> = Vec::with_capacity(lambda);
        for _ in 0..lambda {
            let z = DVector::from_iterator(n, (0..n).map(|_| StandardNormal.sample(rng)));
            let u = (&mean + sigma * (&bd * z)).map(|v: f64| v.clamp(0.0, 1.0));
            samples.push(u);
        }
        let points: Vec<Vec<f64>> = samples.iter().map(to_problem).collect();
        let values = ev.evaluate(&points);
        if ev.exhausted() {
            break;
        }

        let mut order: Vec<usize> = (0..lambda).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        let steps: Vec<DVector<f64>> = order[..mu].iter().map(|&k| (&samples[k] - &mean) / sigma).collect();
        let mut y_w = DVector::<f64>::zeros(n);
        for (w, y) in weights.iter().zip(&steps) {
            y_w += *w * y;
        }
        mean += sigma * &y_w;
        mean.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));

        let inv_sqrt = &basis * DMatrix::from_diagonal(&d.map(|v| 1.0 / v)) * basis.transpose();
        p_sigma = (1.0 - c_sigma) * &p_sigma + (c_sigma * (2.0 - c_sigma) * mu_eff).sqrt() * (&inv_sqrt * &y_w);
        generation += 1;
        let ps_norm = p_sigma.norm();
        let h_sigma = ps_norm / (1.0 - (1.0 - c_sigma).powi(2 * generation)).sqrt() < (1.4 + 2.0 / (nf + 1.0)) * chi_n;
        let h = if h_sigma { 1.0 } else { 0.0 };
        p_c = (1.0 - c_c) * &p_c + h * (c_c * (2.0 - c_c) * mu_eff).sqrt() * &y_w;

        let mut rank_mu = DMatrix::<f64>::zeros(n, n);
        for (w, y) in weights.iter().zip(&steps) {
            rank_mu += *w * (y * y.transpose());
        }
        cov = (1.0 - c_1 - c_mu) * &cov
            + c_1 * (&p_c * p_c.transpose() + (1.0 - h) * c_c * (2.0 - c_c) * &cov)
            + c_mu * rank_mu;
        cov = 0.5 * (&cov + cov.transpose());

        sigma *= ((c_sigma / d_sigma) * (ps_norm / chi_n - 1.0)).exp();
        sigma = sigma.min(1.0);
        if !sigma.is_finite() || sigma < 1e-300 {
            sigma = 1e-300;
        }
    }
}

#[cfg(test)]
mod tests {
    #[test]
    fn population_size_rule() {
        assert_eq!(super::default_lambda(6), 9);
        assert_eq!(super::default_lambda(4), 8);
        assert_eq!(super::default_lambda(2), 6);
    }
}
