//! Population metaheuristics over box-bounded continuous spaces, and their
//! application to the DTS attribute search.
//!
//! Every algorithm minimizes, clamps candidates to the box after each
//! update, rounds integer dimensions before the objective sees them, treats
//! NaN as `+inf`, and stops once the evaluation budget is spent. The initial
//! population counts as generation 1. Candidates of one generation are
//! evaluated as a batch (optionally in parallel); all random draws happen
//! outside the batch, so results do not depend on evaluation order.

mod cmaes;
mod de;
mod ga;
mod gbo;
pub mod grid;
pub mod objective;
mod pso;
pub mod space;

use std::fmt;
use std::io;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use grid::{experiment_grid, write_grid_csv, GridRow};
pub use objective::DtsObjective;
pub use space::SearchSpace;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizeError {
    #[error("search space has no dimensions")]
    EmptySpace,
    #[error("bounds must be finite with lower <= upper (dimension {0})")]
    InvalidBounds(usize),
    #[error("lower, upper and integer masks differ in length")]
    BoundsShape,
    #[error("evaluation budget must be positive")]
    ZeroBudget,
    #[error("population must be at least {min} for {algorithm} (got {got})")]
    PopulationTooSmall { algorithm: Algorithm, min: usize, got: usize },
    #[error("phi1 + phi2 must be at least 4 (got {0})")]
    PhiTooSmall(f64),
    #[error("constriction k must lie in [0, 1] (got {0})")]
    InvalidK(f64),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("unknown algorithm {0:?}; expected pso, de, ga, cmaes or gbo")]
    UnknownAlgorithm(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Pso,
    De,
    Ga,
    #[serde(rename = "cmaes")]
    CmaEs,
    Gbo,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [Algorithm::Pso, Algorithm::De, Algorithm::Ga, Algorithm::CmaEs, Algorithm::Gbo];

    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Pso => "PSO",
            Algorithm::De => "DE",
            Algorithm::Ga => "GA",
            Algorithm::CmaEs => "CMA-ES",
            Algorithm::Gbo => "GBO",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Algorithm {
    type Err = OptimizeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "pso" => Ok(Self::Pso),
            "de" => Ok(Self::De),
            "ga" => Ok(Self::Ga),
            "cmaes" => Ok(Self::CmaEs),
            "gbo" => Ok(Self::Gbo),
            _ => Err(OptimizeError::UnknownAlgorithm(s.to_string())),
        }
    }
}

/// Clerc-Kennedy constriction: `chi = 2k / |2 - phi - sqrt(phi^2 - 4 phi)|`
/// with `phi = phi1 + phi2`; returns `(w, c1, c2) = (chi, phi1 chi, phi2 chi)`.
pub fn constriction_params(k: f64, phi1: f64, phi2: f64) -> Result<(f64, f64, f64), OptimizeError> {
    if !(0.0..=1.0).contains(&k) {
        return Err(OptimizeError::InvalidK(k));
    }
    let phi = phi1 + phi2;
    if phi.is_nan() || phi < 4.0 {
        return Err(OptimizeError::PhiTooSmall(phi));
    }
    let chi = 2.0 * k / (2.0 - phi - (phi * phi - 4.0 * phi).sqrt()).abs();
    Ok((chi, phi1 * chi, phi2 * chi))
}

/// Box constraints with an integer mask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
    integer: Vec<bool>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, OptimizeError> {
        let n = lower.len();
        Self::with_integers(lower, upper, vec![false; n])
    }

    pub fn with_integers(lower: Vec<f64>, upper: Vec<f64>, integer: Vec<bool>) -> Result<Self, OptimizeError> {
        if lower.len() != upper.len() || lower.len() != integer.len() {
            return Err(OptimizeError::BoundsShape);
        }
        if lower.is_empty() {
            return Err(OptimizeError::EmptySpace);
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l.is_finite() && u.is_finite() && l <= u) {
                return Err(OptimizeError::InvalidBounds(i));
            }
        }
        Ok(Self { lower, upper, integer })
    }

    /// The same interval in every dimension.
    pub fn cube(dim: usize, lower: f64, upper: f64) -> Result<Self, OptimizeError> {
        Self::new(vec![lower; dim], vec![upper; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn integer(&self) -> &[bool] {
        &self.integer
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for (i, v) in x.iter_mut().enumerate() {
            *v = if v.is_nan() { self.lower[i] } else { v.clamp(self.lower[i], self.upper[i]) };
        }
    }

    /// Rounds integer dimensions to the nearest integer inside the box.
    pub fn round_integers(&self, x: &mut [f64]) {
        for (i, v) in x.iter_mut().enumerate() {
            if self.integer[i] {
                *v = v.round().clamp(self.lower[i].ceil(), self.upper[i].floor());
            }
        }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..self.dim())
            .map(|i| if self.width(i) > 0.0 { rng.random_range(self.lower[i]..=self.upper[i]) } else { self.lower[i] })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PsoParams {
    pub k: f64,
    pub phi1: f64,
    pub phi2: f64,
}

impl Default for PsoParams {
    fn default() -> Self {
        Self { k: 1.0, phi1: 2.05, phi2: 2.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeParams {
    pub f: f64,
    pub cr: f64,
}

impl Default for DeParams {
    fn default() -> Self {
        Self { f: 0.5, cr: 0.9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaParams {
    pub tournament_size: usize,
    pub crossover_rate: f64,
    /// Per-gene mutation probability; `None` means `1 / dim`.
    pub mutation_rate: Option<f64>,
    /// Mutation standard deviation as a fraction of each dimension's width,
    /// annealed geometrically from `initial` to `final` over the budget.
    pub mutation_scale_initial: f64,
    pub mutation_scale_final: f64,
    pub elites: usize,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            tournament_size: 2,
            crossover_rate: 0.9,
            mutation_rate: None,
            mutation_scale_initial: 0.1,
            mutation_scale_final: 1e-4,
            elites: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CmaesParams {
    /// Initial step size as a fraction of each dimension's width.
    pub sigma0: f64,
    /// Offspring per generation; `None` means `4 + floor(3 ln n)`.
    pub lambda: Option<usize>,
}

impl Default for CmaesParams {
    fn default() -> Self {
        Self { sigma0: 0.3, lambda: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GboParams {
    pub local_escape_prob: f64,
    pub beta_min: f64,
    pub beta_max: f64,
}

impl Default for GboParams {
    fn default() -> Self {
        Self { local_escape_prob: 0.5, beta_min: 0.2, beta_max: 1.2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub population: usize,
    pub generations: usize,
    pub max_evaluations: usize,
    pub seed: u64,
    /// Evaluate each generation's candidates on the rayon pool.
    pub parallel: bool,
    pub pso: PsoParams,
    pub de: DeParams,
    pub ga: GaParams,
    pub cmaes: CmaesParams,
    pub gbo: GboParams,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            population: 50,
            generations: 100,
            max_evaluations: 5000,
            seed: 0,
            parallel: true,
            pso: PsoParams::default(),
            de: DeParams::default(),
            ga: GaParams::default(),
            cmaes: CmaesParams::default(),
            gbo: GboParams::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub generation: usize,
    pub evaluations: usize,
    pub best: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationRun {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub best_x: Vec<f64>,
    pub best_value: f64,
    /// Best-so-far after each generation.
    pub trace: Vec<TracePoint>,
    pub evaluations: usize,
}

/// Budgeted, order-independent batch evaluation with best-so-far tracking.
pub(crate) struct Evaluator<'a, F> {
    objective: &'a F,
    bounds: &'a Bounds,
    budget: usize,
    parallel: bool,
    used: usize,
    generation: usize,
    best_x: Vec<f64>,
    best_value: f64,
    trace: Vec<TracePoint>,
}

impl<'a, F: Fn(&[f64]) -> f64 + Sync> Evaluator<'a, F> {
    fn new(objective: &'a F, bounds: &'a Bounds, cfg: &OptimizerConfig) -> Self {
        Self {
            objective,
            bounds,
            budget: cfg.max_evaluations,
            parallel: cfg.parallel,
            used: 0,
            generation: 0,
            best_x: Vec::new(),
            best_value: f64::INFINITY,
            trace: Vec::new(),
        }
    }

    pub fn remaining(&self) -> usize {
        self.budget - self.used
    }

    pub fn exhausted(&self) -> bool {
        self.used >= self.budget
    }

    fn value_of(&self, x: &[f64]) -> f64 {
        let mut x = x.to_vec();
        self.bounds.round_integers(&mut x);
        let v = (self.objective)(&x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }

    /// Evaluates as many candidates as the budget allows; the rest score
    /// `+inf`. Closes a generation in the trace.
    pub fn evaluate(&mut self, xs: &[Vec<f64>]) -> Vec<f64> {
        let take = xs.len().min(self.remaining());
        let mut values: Vec<f64> = if self.parallel {
            xs[..take].par_iter().map(|x| self.value_of(x)).collect()
        } else {
            xs[..take].iter().map(|x| self.value_of(x)).collect()
        };
        values.resize(xs.len(), f64::INFINITY);
        self.used += take;
        for (x, &v) in xs[..take].iter().zip(&values) {
            if v < self.best_value || self.best_x.is_empty() {
                self.best_value = v;
                self.best_x = x.clone();
            }
        }
        self.generation += 1;
        self.trace.push(TracePoint { generation: self.generation, evaluations: self.used, best: self.best_value });
        values
    }

    fn finish(self, algorithm: Algorithm, seed: u64) -> OptimizationRun {
        let mut best_x = self.best_x;
        self.bounds.round_integers(&mut best_x);
        OptimizationRun {
            algorithm,
            seed,
            best_x,
            best_value: self.best_value,
            trace: self.trace,
            evaluations: self.used,
        }
    }
}

/// Minimizes `objective` over `bounds` with `algorithm`.
pub fn run_optimizer<F>(
    algorithm: Algorithm,
    bounds: &Bounds,
    objective: &F,
    cfg: &OptimizerConfig,
) -> Result<OptimizationRun, OptimizeError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if bounds.dim() == 0 {
        return Err(OptimizeError::EmptySpace);
    }
    if cfg.max_evaluations == 0 {
        return Err(OptimizeError::ZeroBudget);
    }
    let min_population = match algorithm {
        Algorithm::Pso | Algorithm::CmaEs => 1,
        Algorithm::Ga => 2,
        Algorithm::De => 4,
        Algorithm::Gbo => 5,
    };
    if algorithm != Algorithm::CmaEs && cfg.population < min_population {
        return Err(OptimizeError::PopulationTooSmall { algorithm, min: min_population, got: cfg.population });
    }
    let mut rng = <ChaCha8Rng as rand::SeedableRng>::seed_from_u64(cfg.seed);
    let mut ev = Evaluator::new(objective, bounds, cfg);
    match algorithm {
        Algorithm::Pso => pso::run(&mut ev, bounds, cfg, &mut rng)?,
        Algorithm::De => de::run(&mut ev, bounds, cfg, &mut rng),
        Algorithm::Ga => ga::run(&mut ev, bounds, cfg, &mut rng),
        Algorithm::CmaEs => cmaes::run(&mut ev, bounds, cfg, &mut rng),
        Algorithm::Gbo => gbo::run(&mut ev, bounds, cfg, &mut rng),
    }
    Ok(ev.finish(algorithm, cfg.seed))
}

/// Writes `generation,evaluations,best`.
pub fn write_trace_csv<W: io::Write>(run: &OptimizationRun, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["generation", "evaluations", "best"])?;
    for t in &run.trace {
        w.write_record([t.generation.to_string(), t.evaluations.to_string(), t.best.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Index of the smallest value (first on ties).
pub(crate) fn argmin(values: &[f64]) -> usize {
    values.iter().enumerate().fold(0, |best, (i, v)| if v.total_cmp(&values[best]).is_lt() { i } else { best })
}

/// `count` distinct indices from `0..n`, none equal to `exclude`.
pub(crate) fn distinct_indices(rng: &mut ChaCha8Rng, n: usize, exclude: usize, count: usize) -> Vec<usize> {
    debug_assert!(n > count);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let r = rng.random_range(0..n);
        if r != exclude && !out.contains(&r) {
            out.push(r);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    fn cfg(seed: u64) -> OptimizerConfig {
        OptimizerConfig { seed, parallel: false, ..Default::default() }
    }

    #[test]
    fn constriction_values() {
        let (w, c1, c2) = constriction_params(1.0, 2.05, 2.05).unwrap();
        assert!((w - 0.729_843_788).abs() < 1e-8);
        assert!((c1 - 1.496_179_765).abs() < 1e-8);
        assert_eq!(c1, c2);
        assert_eq!(constriction_params(0.0, 2.05, 2.05).unwrap(), (0.0, 0.0, 0.0));
        assert!(matches!(constriction_params(1.0, 1.95, 1.95), Err(OptimizeError::PhiTooSmall(_))));
        assert!(constriction_params(1.5, 2.05, 2.05).is_err());
    }

    #[test]
    fn algorithm_names() {
        for a in Algorithm::ALL {
            assert_eq!(a.label().parse::<Algorithm>().unwrap(), a);
        }
        assert_eq!("cmaes".parse::<Algorithm>().unwrap(), Algorithm::CmaEs);
        assert!("sa".parse::<Algorithm>().is_err());
    }

    #[test]
    fn bounds_validation_and_rounding() {
        assert_eq!(Bounds::new(vec![], vec![]).unwrap_err(), OptimizeError::EmptySpace);
        assert_eq!(Bounds::new(vec![1.0], vec![0.0]).unwrap_err(), OptimizeError::InvalidBounds(0));
        let b = Bounds::with_integers(vec![0.0, 0.0], vec![10.0, 1.0], vec![true, false]).unwrap();
        let mut x = vec![3.6, 0.37];
        b.round_integers(&mut x);
        assert_eq!(x, vec![4.0, 0.37]);
        let mut x = vec![f64::NAN, 7.0];
        b.clamp(&mut x);
        assert_eq!(x, vec![0.0, 1.0]);
    }

    #[test]
    fn one_generation_budget_returns_best_initial() {
        let b = Bounds::cube(6, -5.12, 5.12).unwrap();
        for a in Algorithm::ALL {
            let c = OptimizerConfig { max_evaluations: 50, ..cfg(3) };
            let run = run_optimizer(a, &b, &sphere, &c).unwrap();
            assert_eq!(run.evaluations, 50, "{a}");
            assert_eq!(run.best_value, sphere(&run.best_x), "{a}");
        }
    }

    #[test]
    fn integer_dimensions_reach_the_objective_rounded() {
        let b = Bounds::with_integers(vec![0.0, -1.0], vec![100.0, 1.0], vec![true, false]).unwrap();
        let f = |x: &[f64]| {
            assert_eq!(x[0], x[0].round());
            (x[0] - 42.0).abs() + x[1].abs()
        };
        for a in Algorithm::ALL {
            let run = run_optimizer(a, &b, &f, &OptimizerConfig { max_evaluations: 500, ..cfg(1) }).unwrap();
            assert_eq!(run.best_x[0], run.best_x[0].round());
        }
    }

    #[test]
    fn nan_is_never_best() {
        let b = Bounds::cube(2, -1.0, 1.0).unwrap();
        let f = |x: &[f64]| if x[0] > 0.0 { f64::NAN } else { -x[0] };
        for a in Algorithm::ALL {
            let run = run_optimizer(a, &b, &f, &OptimizerConfig { max_evaluations: 300, ..cfg(2) }).unwrap();
            assert!(run.best_value.is_finite(), "{a}");
        }
    }

    #[test]
    fn seeds_determine_runs_and_parallelism_does_not() {
        let b = Bounds::cube(3, -2.0, 2.0).unwrap();
        for a in Algorithm::ALL {
            let c = OptimizerConfig { max_evaluations: 600, ..cfg(9) };
            let serial = run_optimizer(a, &b, &sphere, &c).unwrap();
            let parallel = run_optimizer(a, &b, &sphere, &OptimizerConfig { parallel: true, ..c.clone() }).unwrap();
            assert_eq!(serial, parallel, "{a}");
        }
    }

    #[test]
    fn budget_errors() {
        let b = Bounds::cube(2, -1.0, 1.0).unwrap();
        let c = OptimizerConfig { max_evaluations: 0, ..cfg(0) };
        assert_eq!(run_optimizer(Algorithm::Pso, &b, &sphere, &c).unwrap_err(), OptimizeError::ZeroBudget);
        let c = OptimizerConfig { population: 3, ..cfg(0) };
        assert!(run_optimizer(Algorithm::De, &b, &sphere, &c).is_err());
    }
}
