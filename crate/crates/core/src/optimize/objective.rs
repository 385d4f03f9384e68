//! Simulator-backed volatility objective.

use crate::metrics::incentive_volatility_lenient;
use crate::model::{strategy_from_category_within, DtsStrategy, ModelError, SimulationConfig, Transaction};
use crate::simulator;

use super::{OptimizeError, SearchSpace};

/// Fewest sealed blocks that still give a volatility (two returns).
pub const MIN_BLOCKS: usize = 3;

/// Maps a search vector to the volatility of the resulting strategy on a
/// fixed dataset. Every candidate sees the same transactions, so
/// comparisons are free of sampling noise. Candidates that cannot be
/// evaluated score `+inf`.
#[derive(Debug, Clone)]
pub struct DtsObjective<'a> {
    space: SearchSpace,
    dataset: &'a [Transaction],
    sim: SimulationConfig,
}

impl<'a> DtsObjective<'a> {
    pub fn new(space: SearchSpace, dataset: &'a [Transaction], sim: &SimulationConfig) -> Result<Self, OptimizeError> {
        if dataset.is_empty() {
            return Err(OptimizeError::EmptyDataset);
        }
        // Commitments do not affect incentives; skip them in the search.
        let sim = SimulationConfig { build_commitments: false, ..sim.clone() };
        Ok(Self { space, dataset, sim })
    }

    pub fn space(&self) -> &SearchSpace {
        &self.space
    }

    pub fn strategy(&self, x: &[f64]) -> Result<DtsStrategy, ModelError> {
        strategy_from_category_within(self.space.category, &self.space.materialize(x), &self.space.bounds)
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        if x.len() != self.space.dim() || x.iter().any(|v| !v.is_finite()) {
            return f64::INFINITY;
        }
        match self.strategy(x) {
            Ok(s) => self.evaluate_strategy(&s),
            Err(_) => f64::INFINITY,
        }
    }

    pub fn evaluate_strategy(&self, s: &DtsStrategy) -> f64 {
        let Ok(out) = simulator::run(self.dataset, s, &self.sim) else {
            return f64::INFINITY;
        };
        if out.blocks.len() < MIN_BLOCKS {
            return f64::INFINITY;
        }
        incentive_volatility_lenient(&out.incentives()).unwrap_or(f64::INFINITY)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{generate, DatasetSpec};
    use crate::model::StrategyCategory;

    #[test]
    fn penalties_and_determinism() {
        let data = generate(&DatasetSpec { count: 20_000, seed: 5, ..Default::default() }).unwrap();
        let obj =
            DtsObjective::new(SearchSpace::new(StrategyCategory::TimeNoReserve), &data, &SimulationConfig::default())
                .unwrap();
        let x = [2_000.0, 110.0, 6.94, 1.0];
        let v = obj.evaluate(&x);
        assert!(v.is_finite() && v > 0.0);
        assert_eq!(v, obj.evaluate(&x));
        assert_eq!(obj.evaluate(&[2_000.0, 110.0, 6.94, f64::NAN]), f64::INFINITY);
        assert_eq!(obj.evaluate(&[2_000.0, 110.0]), f64::INFINITY);
        // Too few blocks for a return series.
        assert_eq!(obj.evaluate(&[80_000.0, 110.0, 6.94, 1.0]), f64::INFINITY);
        let mut s = DtsStrategy::experiment_17();
        s.shape = 0.0;
        assert_eq!(obj.evaluate_strategy(&s), f64::INFINITY);
    }

    #[test]
    fn empty_dataset_is_rejected() {
        let err =
            DtsObjective::new(SearchSpace::new(StrategyCategory::TimeNoReserve), &[], &SimulationConfig::default());
        assert_eq!(err.unwrap_err(), OptimizeError::EmptyDataset);
    }
}
