//! Run configuration: one TOML file with a section per concern.
//!
//! Precedence, highest first: command-line flags, the config file,
//! `DTS_SEED` (seed only), built-in defaults.

use std::path::{Path, PathBuf};

use anyhow::Context;
use dts_core::ingest::{DatasetSpec, IrrationalMix};
use dts_core::model::{AttributeBounds, DtsStrategy, Priority, SimulationConfig, SmallFeeReserve};
use dts_core::optimize::OptimizerConfig;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, CliResult};

pub const SEED_ENV: &str = "DTS_SEED";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed for data generation, fee injection and optimizers.
    pub seed: Option<u64>,
    pub simulation: SimulationSection,
    pub strategy: StrategySection,
    pub dataset: DatasetSection,
    pub optimizer: OptimizerConfig,
    pub bounds: AttributeBounds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    pub leaf_capacity: u32,
    pub commission_ratio: f64,
    pub branching_factor: usize,
    pub flush_tail: bool,
    pub build_commitments: bool,
    pub transaction_budget: Option<usize>,
    pub block_count_target: Option<usize>,
}

impl Default for SimulationSection {
    fn default() -> Self {
        let d = SimulationConfig::default();
        Self {
            leaf_capacity: d.leaf_capacity,
            commission_ratio: d.commission_ratio,
            branching_factor: d.verkle_branching_factor,
            flush_tail: d.flush_tail,
            build_commitments: d.build_commitments,
            transaction_budget: d.transaction_budget,
            block_count_target: d.block_count_target,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrategySection {
    pub mempool_size: usize,
    pub priority: Priority,
    /// Both small-fee fields set enables designated space.
    pub small_fee_threshold: Option<f64>,
    pub small_fee_count: Option<u32>,
    pub max_trx_nodes: u32,
    pub scale: f64,
    pub shape: f64,
}

impl Default for StrategySection {
    fn default() -> Self {
        let s = DtsStrategy::experiment_17();
        Self {
            mempool_size: s.mempool_size,
            priority: s.priority,
            small_fee_threshold: None,
            small_fee_count: None,
            max_trx_nodes: s.max_trx_nodes,
            scale: s.scale,
            shape: s.shape,
        }
    }
}

impl StrategySection {
    pub fn to_strategy(&self) -> CliResult<DtsStrategy> {
        let small_fee = match (self.small_fee_threshold, self.small_fee_count) {
            (Some(fee_threshold), Some(max_count)) => Some(SmallFeeReserve { fee_threshold, max_count }),
            (None, None) => None,
            _ => {
                return Err(config_err(anyhow::anyhow!(
                    "small_fee_threshold and small_fee_count must be given together"
                )))
            }
        };
        Ok(DtsStrategy {
            mempool_size: self.mempool_size,
            priority: self.priority,
            small_fee,
            max_trx_nodes: self.max_trx_nodes,
            scale: self.scale,
            shape: self.shape,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSection {
    /// Transaction CSV; when absent, commands that need data generate it.
    pub path: Option<PathBuf>,
    pub count: usize,
    pub arrival_rate_tps: f64,
    pub amount_log_mean: f64,
    pub amount_log_sd: f64,
    /// Apply the irrational-fee mix to the loaded or generated stream.
    pub irrational: bool,
    pub mix: IrrationalMix,
}

impl Default for DatasetSection {
    fn default() -> Self {
        let d = DatasetSpec::default();
        Self {
            path: None,
            count: d.count,
            arrival_rate_tps: d.arrival_rate_tps,
            amount_log_mean: d.amount_log_mean,
            amount_log_sd: d.amount_log_sd,
            irrational: false,
            mix: IrrationalMix::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))
            .map_err(config_err)?;
        Self::parse(&text).with_context(|| format!("parsing config {}", path.display())).map_err(config_err)
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    /// Flag, then file, then `DTS_SEED`, then 0.
    pub fn resolve_seed(&mut self, flag: Option<u64>) -> CliResult<u64> {
        let seed = match flag.or(self.seed) {
            Some(s) => s,
            None => match std::env::var(SEED_ENV) {
                Ok(v) => v
                    .trim()
                    .parse()
                    .with_context(|| format!("{SEED_ENV}={v:?} is not an unsigned integer"))
                    .map_err(config_err)?,
                Err(_) => 0,
            },
        };
        self.seed = Some(seed);
        self.optimizer.seed = seed;
        Ok(seed)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn simulation_config(&self) -> SimulationConfig {
        let s = &self.simulation;
        SimulationConfig {
            leaf_capacity: s.leaf_capacity,
            commission_ratio: s.commission_ratio,
            arrival_rate_tps: self.dataset.arrival_rate_tps,
            rng_seed: self.seed(),
            transaction_budget: s.transaction_budget,
            block_count_target: s.block_count_target,
            verkle_branching_factor: s.branching_factor,
            flush_tail: s.flush_tail,
            build_commitments: s.build_commitments,
        }
    }

    pub fn dataset_spec(&self) -> DatasetSpec {
        let d = &self.dataset;
        DatasetSpec {
            count: d.count,
            arrival_rate_tps: d.arrival_rate_tps,
            amount_log_mean: d.amount_log_mean,
            amount_log_sd: d.amount_log_sd,
            commission_ratio: self.simulation.commission_ratio,
            seed: self.seed(),
        }
    }
}
