//! Shared domain vocabulary: transactions, DTS strategies, sealed blocks and
//! simulation configuration.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::verkle::Digest;

pub type TxId = u64;

/// Default leaf-node budget of one block.
pub const DEFAULT_LEAF_CAPACITY: u32 = 2100;
/// Default commission ratio `f` (0.2%).
pub const DEFAULT_COMMISSION_RATIO: f64 = 0.002;
/// Default arrival rate of new transactions into the mempool.
pub const DEFAULT_ARRIVAL_RATE_TPS: f64 = 3.5;
/// Typical transaction size; informational only.
pub const DEFAULT_TX_SIZE_BYTES: u32 = 300;
/// Default branching factor of block commitment trees.
pub const DEFAULT_BRANCHING_FACTOR: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transaction {
    pub id: TxId,
    pub amount: f64,
    pub fee: f64,
    /// Milliseconds since simulation start.
    pub arrival_time: u64,
    pub size_bytes: u32,
}

impl Transaction {
    /// A rational user's transaction: `fee = amount * commission_ratio`.
    pub fn rational(id: TxId, amount: f64, arrival_time: u64, commission_ratio: f64) -> Self {
        Self { id, amount, fee: amount * commission_ratio, arrival_time, size_bytes: DEFAULT_TX_SIZE_BYTES }
    }

    pub fn with_fee(mut self, fee: f64) -> Self {
        self.fee = fee;
        self
    }
}

/// Transaction incorporation priority (A2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Priority {
    /// First come, first served.
    TimeBased,
    /// Highest fee first.
    FeeBased,
}

impl fmt::Display for Priority {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Priority::TimeBased => "Time-based",
            Priority::FeeBased => "Fee-based",
        })
    }
}

/// The four strategy categories spanned by priority (A2) and designated
/// small-fee space (A3).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StrategyCategory {
    TimeWithReserve = 1,
    TimeNoReserve = 2,
    FeeWithReserve = 3,
    FeeNoReserve = 4,
}

impl StrategyCategory {
    pub const ALL: [StrategyCategory; 4] = [
        StrategyCategory::TimeWithReserve,
        StrategyCategory::TimeNoReserve,
        StrategyCategory::FeeWithReserve,
        StrategyCategory::FeeNoReserve,
    ];

    pub fn from_id(id: u8) -> Result<Self, ModelError> {
        match id {
            1 => Ok(Self::TimeWithReserve),
            2 => Ok(Self::TimeNoReserve),
            3 => Ok(Self::FeeWithReserve),
            4 => Ok(Self::FeeNoReserve),
            other => Err(ModelError::UnknownCategory(other)),
        }
    }

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn priority(self) -> Priority {
        match self {
            Self::TimeWithReserve | Self::TimeNoReserve => Priority::TimeBased,
            Self::FeeWithReserve | Self::FeeNoReserve => Priority::FeeBased,
        }
    }

    pub fn designated_space(self) -> bool {
        matches!(self, Self::TimeWithReserve | Self::FeeWithReserve)
    }

    pub fn from_parts(priority: Priority, designated_space: bool) -> Self {
        match (priority, designated_space) {
            (Priority::TimeBased, true) => Self::TimeWithReserve,
            (Priority::TimeBased, false) => Self::TimeNoReserve,
            (Priority::FeeBased, true) => Self::FeeWithReserve,
            (Priority::FeeBased, false) => Self::FeeNoReserve,
        }
    }
}

impl fmt::Display for StrategyCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id())
    }
}

impl FromStr for StrategyCategory {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let id: u8 = s.trim().parse().map_err(|_| ModelError::UnknownCategoryName(s.to_string()))?;
        Self::from_id(id)
    }
}

/// Designated small-fee space: up to `max_count` transactions per block with
/// a fee below `fee_threshold` are admitted ahead of the priority order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallFeeReserve {
    /// A4
    pub fee_threshold: f64,
    /// A5
    pub max_count: u32,
}

/// A complete DTS strategy (attributes A1..A8).
///
/// A3 is `small_fee.is_some()`, so A4/A5 exist exactly when designated
/// space is enabled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DtsStrategy {
    /// A1
    pub mempool_size: usize,
    /// A2
    pub priority: Priority,
    /// A3..A5
    pub small_fee: Option<SmallFeeReserve>,
    /// A6
    pub max_trx_nodes: u32,
    /// A7, the log-normal location `mu`.
    pub scale: f64,
    /// A8, the log-normal shape `sigma`.
    pub shape: f64,
}

impl DtsStrategy {
    pub fn designated_space(&self) -> bool {
        self.small_fee.is_some()
    }

    pub fn category(&self) -> StrategyCategory {
        StrategyCategory::from_parts(self.priority, self.designated_space())
    }

    /// The free attributes this strategy was built from.
    pub fn free_attributes(&self) -> FreeAttributes {
        FreeAttributes {
            mempool_size: self.mempool_size,
            small_fee_threshold: self.small_fee.map(|r| r.fee_threshold),
            small_fee_count: self.small_fee.map(|r| r.max_count),
            max_trx_nodes: self.max_trx_nodes,
            scale: self.scale,
            shape: self.shape,
        }
    }

    /// Reference strategy from grid experiment 17 (GBO, time-based, no
    /// designated space): A1=25469, A6=110, A7=6.94, A8=1.00.
    pub fn experiment_17() -> Self {
        Self {
            mempool_size: 25_469,
            priority: Priority::TimeBased,
            small_fee: None,
            max_trx_nodes: 110,
            scale: 6.94,
            shape: 1.00,
        }
    }
}

/// The attributes left to the optimizer once a category fixes A2 and A3.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeAttributes {
    pub mempool_size: usize,
    pub small_fee_threshold: Option<f64>,
    pub small_fee_count: Option<u32>,
    pub max_trx_nodes: u32,
    pub scale: f64,
    pub shape: f64,
}

/// Admissible ranges of the free attributes. The defaults enclose the
/// reference strategies with some margin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AttributeBounds {
    pub mempool_size: (f64, f64),
    pub small_fee_threshold: (f64, f64),
    pub small_fee_count: (f64, f64),
    pub max_trx_nodes: (f64, f64),
    pub scale: (f64, f64),
    pub shape: (f64, f64),
}

impl Default for AttributeBounds {
    fn default() -> Self {
        Self {
            mempool_size: (1_000.0, 80_000.0),
            small_fee_threshold: (1.0, 2.0),
            small_fee_count: (0.0, 200.0),
            max_trx_nodes: (10.0, 800.0),
            scale: (4.0, 10.0),
            shape: (0.1, 1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("unknown strategy category {0}; expected 1..=4")]
    UnknownCategory(u8),
    #[error("cannot parse strategy category from {0:?}")]
    UnknownCategoryName(String),
    #[error("category {category} requires the {attribute} attribute")]
    MissingAttribute { category: StrategyCategory, attribute: &'static str },
    #[error("category {category} has no designated small-fee space; {attribute} must be absent")]
    ForbiddenAttribute { category: StrategyCategory, attribute: &'static str },
    #[error("{attribute} = {value} is outside [{lower}, {upper}]")]
    OutOfBounds { attribute: &'static str, value: f64, lower: f64, upper: f64 },
}

fn check_bound(attribute: &'static str, value: f64, (lower, upper): (f64, f64)) -> Result<(), ModelError> {
    if value.is_finite() && value >= lower && value <= upper {
        Ok(())
    } else {
        Err(ModelError::OutOfBounds { attribute, value, lower, upper })
    }
}

/// Builds a strategy from a category and the free attributes, checking the
/// attributes against the default bounds.
pub fn strategy_from_category(category: StrategyCategory, attrs: &FreeAttributes) -> Result<DtsStrategy, ModelError> {
    strategy_from_category_within(category, attrs, &AttributeBounds::default())
}

pub fn strategy_from_category_within(
    category: StrategyCategory,
    attrs: &FreeAttributes,
    bounds: &AttributeBounds,
) -> Result<DtsStrategy, ModelError> {
    let small_fee = if category.designated_space() {
        let fee_threshold = attrs
            .small_fee_threshold
            .ok_or(ModelError::MissingAttribute { category, attribute: "small_fee_threshold (A4)" })?;
        let max_count = attrs
            .small_fee_count
            .ok_or(ModelError::MissingAttribute { category, attribute: "small_fee_count (A5)" })?;
        check_bound("small_fee_threshold (A4)", fee_threshold, bounds.small_fee_threshold)?;
        check_bound("small_fee_count (A5)", max_count as f64, bounds.small_fee_count)?;
        Some(SmallFeeReserve { fee_threshold, max_count })
    } else {
        if attrs.small_fee_threshold.is_some() {
            return Err(ModelError::ForbiddenAttribute { category, attribute: "small_fee_threshold (A4)" });
        }
        if attrs.small_fee_count.is_some() {
            return Err(ModelError::ForbiddenAttribute { category, attribute: "small_fee_count (A5)" });
        }
        None
    };
    check_bound("mempool_size (A1)", attrs.mempool_size as f64, bounds.mempool_size)?;
    check_bound("max_trx_nodes (A6)", attrs.max_trx_nodes as f64, bounds.max_trx_nodes)?;
    check_bound("scale (A7)", attrs.scale, bounds.scale)?;
    check_bound("shape (A8)", attrs.shape, bounds.shape)?;
    Ok(DtsStrategy {
        mempool_size: attrs.mempool_size,
        priority: category.priority(),
        small_fee,
        max_trx_nodes: attrs.max_trx_nodes,
        scale: attrs.scale,
        shape: attrs.shape,
    })
}

/// A broken strategy invariant.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("shape must be positive (got {0})")]
    NonPositiveShape(f64),
    #[error("scale must be finite (got {0})")]
    NonFiniteScale(f64),
    #[error("max_trx_nodes must be at least 1")]
    ZeroMaxTrxNodes,
    #[error("max_trx_nodes {max_trx_nodes} exceeds the block leaf capacity {capacity}")]
    ExceedsCapacity { max_trx_nodes: u32, capacity: u32 },
    #[error("mempool_size must be at least 1")]
    EmptyMempool,
    #[error("small-fee threshold must be a non-negative finite fee (got {0})")]
    InvalidSmallFeeThreshold(f64),
}

/// Lists every violated strategy invariant; empty when the strategy can run
/// against `cfg`.
pub fn validate_strategy(s: &DtsStrategy, cfg: &SimulationConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    if !(s.shape > 0.0 && s.shape.is_finite()) {
        out.push(Violation::NonPositiveShape(s.shape));
    }
    if !s.scale.is_finite() {
        out.push(Violation::NonFiniteScale(s.scale));
    }
    if s.max_trx_nodes == 0 {
        out.push(Violation::ZeroMaxTrxNodes);
    }
    if s.max_trx_nodes > cfg.leaf_capacity {
        out.push(Violation::ExceedsCapacity { max_trx_nodes: s.max_trx_nodes, capacity: cfg.leaf_capacity });
    }
    if s.mempool_size == 0 {
        out.push(Violation::EmptyMempool);
    }
    if let Some(r) = s.small_fee {
        if !(r.fee_threshold >= 0.0 && r.fee_threshold.is_finite()) {
            out.push(Violation::InvalidSmallFeeThreshold(r.fee_threshold));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub leaf_capacity: u32,
    pub commission_ratio: f64,
    pub arrival_rate_tps: f64,
    pub rng_seed: u64,
    /// Stop after consuming this many transactions from the stream.
    pub transaction_budget: Option<usize>,
    /// Stop once this many blocks are sealed.
    pub block_count_target: Option<usize>,
    pub verkle_branching_factor: usize,
    /// Seal the unfinished tail block at end of stream.
    pub flush_tail: bool,
    /// Build a commitment tree for every sealed block.
    pub build_commitments: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            leaf_capacity: DEFAULT_LEAF_CAPACITY,
            commission_ratio: DEFAULT_COMMISSION_RATIO,
            arrival_rate_tps: DEFAULT_ARRIVAL_RATE_TPS,
            rng_seed: 0,
            transaction_budget: None,
            block_count_target: None,
            verkle_branching_factor: DEFAULT_BRANCHING_FACTOR,
            flush_tail: false,
            build_commitments: true,
        }
    }
}

/// A sealed block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockRecord {
    pub height: u64,
    pub tx_ids: Vec<TxId>,
    pub occupied_nodes: u32,
    /// Sum of the included fees.
    pub incentive: f64,
    /// Simulation clock (ms) when the block was sealed.
    pub seal_time: u64,
    /// Root of the block's commitment tree, when built.
    pub commitment: Option<Digest>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp17_attrs() -> FreeAttributes {
        FreeAttributes {
            mempool_size: 25_469,
            small_fee_threshold: None,
            small_fee_count: None,
            max_trx_nodes: 110,
            scale: 6.94,
            shape: 1.00,
        }
    }

    #[test]
    fn category_table() {
        let rows = [
            (1, Priority::TimeBased, true),
            (2, Priority::TimeBased, false),
            (3, Priority::FeeBased, true),
            (4, Priority::FeeBased, false),
        ];
        for (id, priority, space) in rows {
            let c = StrategyCategory::from_id(id).unwrap();
            assert_eq!((c.priority(), c.designated_space()), (priority, space));
            assert_eq!(c.id(), id);
            assert_eq!(StrategyCategory::from_parts(priority, space), c);
        }
        assert_eq!(StrategyCategory::from_id(5), Err(ModelError::UnknownCategory(5)));
        assert_eq!("3".parse::<StrategyCategory>().unwrap(), StrategyCategory::FeeWithReserve);
    }

    #[test]
    fn experiment_17_from_category_2() {
        let s = strategy_from_category(StrategyCategory::TimeNoReserve, &exp17_attrs()).unwrap();
        assert_eq!(s, DtsStrategy::experiment_17());
        assert!(validate_strategy(&s, &SimulationConfig::default()).is_empty());
    }

    #[test]
    fn category_1_without_threshold_is_rejected() {
        let err = strategy_from_category(StrategyCategory::TimeWithReserve, &exp17_attrs()).unwrap_err();
        assert!(matches!(err, ModelError::MissingAttribute { .. }));
    }

    #[test]
    fn category_4_rejects_small_fee_threshold() {
        let attrs = FreeAttributes {
            mempool_size: 71_907,
            small_fee_threshold: Some(1.47),
            small_fee_count: Some(17),
            max_trx_nodes: 56,
            scale: 6.19,
            shape: 1.00,
        };
        let err = strategy_from_category(StrategyCategory::FeeNoReserve, &attrs).unwrap_err();
        assert!(matches!(err, ModelError::ForbiddenAttribute { .. }));
        // The same attributes are fine for the designated-space fee category.
        let s = strategy_from_category(StrategyCategory::FeeWithReserve, &attrs).unwrap();
        assert_eq!(s.small_fee, Some(SmallFeeReserve { fee_threshold: 1.47, max_count: 17 }));
    }

    #[test]
    fn out_of_bounds_attributes_are_rejected() {
        let mut attrs = exp17_attrs();
        attrs.shape = 0.0;
        assert!(matches!(
            strategy_from_category(StrategyCategory::TimeNoReserve, &attrs),
            Err(ModelError::OutOfBounds { .. })
        ));
        let mut attrs = exp17_attrs();
        attrs.mempool_size = 500;
        assert!(strategy_from_category(StrategyCategory::TimeNoReserve, &attrs).is_err());
    }

    #[test]
    fn zero_small_fee_count_is_admissible() {
        let mut attrs = exp17_attrs();
        attrs.small_fee_threshold = Some(1.32);
        attrs.small_fee_count = Some(0);
        assert!(strategy_from_category(StrategyCategory::TimeWithReserve, &attrs).is_ok());
    }

    #[test]
    fn validation_lists_every_violation() {
        let cfg = SimulationConfig::default();
        let mut s = DtsStrategy::experiment_17();
        s.shape = 0.0;
        assert_eq!(validate_strategy(&s, &cfg), vec![Violation::NonPositiveShape(0.0)]);
        assert_eq!(Violation::NonPositiveShape(0.0).to_string(), "shape must be positive (got 0)");

        let mut s = DtsStrategy::experiment_17();
        s.max_trx_nodes = 5000;
        s.mempool_size = 0;
        let v = validate_strategy(&s, &cfg);
        assert_eq!(
            v,
            vec![Violation::ExceedsCapacity { max_trx_nodes: 5000, capacity: 2100 }, Violation::EmptyMempool]
        );
    }
}
