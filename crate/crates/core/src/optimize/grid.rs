//! The 5 algorithms x 4 categories experiment grid.

use std::io;

use rayon::prelude::*;

use crate::model::{
    AttributeBounds, DtsStrategy, FreeAttributes, SimulationConfig, SmallFeeReserve, StrategyCategory, Transaction,
};

use super::{run_optimizer, Algorithm, DtsObjective, OptimizationRun, OptimizeError, OptimizerConfig, SearchSpace};

/// Category order within each algorithm's block of four experiments.
pub const GRID_CATEGORY_ORDER: [StrategyCategory; 4] = [
    StrategyCategory::TimeNoReserve,
    StrategyCategory::TimeWithReserve,
    StrategyCategory::FeeNoReserve,
    StrategyCategory::FeeWithReserve,
];

#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub algorithm: Algorithm,
    /// 1-based, algorithm-major.
    pub experiment: usize,
    pub category: StrategyCategory,
    pub attributes: FreeAttributes,
    pub volatility: f64,
    pub run: OptimizationRun,
}

impl GridRow {
    pub fn strategy(&self) -> DtsStrategy {
        let a = &self.attributes;
        DtsStrategy {
            mempool_size: a.mempool_size,
            priority: self.category.priority(),
            small_fee: a
                .small_fee_threshold
                .zip(a.small_fee_count)
                .map(|(fee_threshold, max_count)| SmallFeeReserve { fee_threshold, max_count }),
            max_trx_nodes: a.max_trx_nodes,
            scale: a.scale,
            shape: a.shape,
        }
    }
}

/// Runs every (algorithm, category) cell. Cell `e` (1-based) is seeded with
/// `cfg.seed + e`; cells run concurrently and results are returned in
/// experiment order.
pub fn experiment_grid(
    dataset: &[Transaction],
    sim: &SimulationConfig,
    cfg: &OptimizerConfig,
    bounds: &AttributeBounds,
) -> Result<Vec<GridRow>, OptimizeError> {
    if dataset.is_empty() {
        return Err(OptimizeError::EmptyDataset);
    }
    let cells: Vec<(usize, Algorithm, StrategyCategory)> = Algorithm::ALL
        .iter()
        .enumerate()
        .flat_map(|(ai, &a)| GRID_CATEGORY_ORDER.iter().enumerate().map(move |(ci, &c)| (ai * 4 + ci + 1, a, c)))
        .collect();
    cells
        .into_par_iter()
        .map(|(experiment, algorithm, category)| {
            let space = SearchSpace::with_bounds(category, bounds.clone());
            let objective = DtsObjective::new(space.clone(), dataset, sim)?;
            let cell_cfg = OptimizerConfig { seed: cfg.seed.wrapping_add(experiment as u64), ..cfg.clone() };
            let run = run_optimizer(algorithm, &space.to_bounds()?, &|x: &[f64]| objective.evaluate(x), &cell_cfg)?;
            log::info!("experiment {experiment} ({algorithm}, category {category}): volatility {}", run.best_value);
            Ok(GridRow {
                algorithm,
                experiment,
                category,
                attributes: space.materialize(&run.best_x),
                volatility: run.best_value,
                run,
            })
        })
        .collect()
}

/// Writes `algorithm,experiment,A1,...,A8,volatility`; A4/A5 print as `-`
/// when the category has no designated space.
pub fn write_grid_csv<W: io::Write>(rows: &[GridRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["algorithm", "experiment", "A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "volatility"])?;
    for r in rows {
        let a = &r.attributes;
        w.write_record([
            r.algorithm.label().to_string(),
            r.experiment.to_string(),
            a.mempool_size.to_string(),
            r.category.priority().to_string(),
            if r.category.designated_space() { "True" } else { "False" }.to_string(),
            a.small_fee_threshold.map_or("-".into(), |v| v.to_string()),
            a.small_fee_count.map_or("-".into(), |v| v.to_string()),
            a.max_trx_nodes.to_string(),
            a.scale.to_string(),
            a.shape.to_string(),
            r.volatility.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn experiment_numbering_matches_layout() {
        // Experiment 17 is the first GBO cell: time-based, no reserve.
        let (ai, ci) = (4, 0);
        assert_eq!(ai * 4 + ci + 1, 17);
        assert_eq!(Algorithm::ALL[ai], Algorithm::Gbo);
        assert_eq!(GRID_CATEGORY_ORDER[ci], StrategyCategory::TimeNoReserve);
    }

    #[test]
    fn empty_dataset_fails_fast() {
        let err = experiment_grid(
            &[],
            &SimulationConfig::default(),
            &OptimizerConfig::default(),
            &AttributeBounds::default(),
        );
        assert_eq!(err.unwrap_err(), OptimizeError::EmptyDataset);
    }
}
