//! Dynamic transaction storage (DTS) for fee-only block incentives.
//!
//! A miner following a DTS strategy maps each transaction fee through a
//! log-normal CDF to a number of occupied Verkle-tree leaf slots, so that
//! high-fee transactions consume more of the fixed per-block leaf budget.
//! This crate contains the allocation rule, a discrete-event incorporation
//! simulator, Verkle commitments and proof-size analytics, block-incentive
//! volatility metrics, five metaheuristics that search the strategy space,
//! the VRP reading of the problem with an exhaustive small-instance oracle,
//! and dataset ingestion.
//!
//! ```
//! use dts_core::allocation::{leaf_nodes, AllocationParams};
//!
//! let params = AllocationParams::new(6.94, 1.0, 110).unwrap();
//! // A fee at the median of the distribution takes half of the maximum.
//! assert_eq!(leaf_nodes(6.94f64.exp(), &params).unwrap(), 55);
//! ```

pub mod allocation;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod numeric;
pub mod optimize;
pub mod simulator;
pub mod special;
pub mod verkle;
pub mod vrp;

pub use model::{
    BlockRecord, DtsStrategy, FreeAttributes, Priority, SimulationConfig, SmallFeeReserve, StrategyCategory,
    Transaction, TxId,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
