//! Fee-to-space allocation.
//!
//! A transaction with fee `x` occupies `ceil(F(x) * max_trx_nodes)` leaf
//! nodes, clamped to `[1, max_trx_nodes]`, where `F` is the log-normal CDF
//! with location `scale` and shape `shape`. A block accepts transactions
//! while the occupied total stays within its leaf capacity.

use std::f64::consts::SQRT_2;

use thiserror::Error;

use crate::model::DtsStrategy;
use crate::numeric::CompensatedSum;
use crate::special::erfc;

/// Stand-in for a zero fee when mapping it to space: the CDF is undefined
/// at zero.
pub const MIN_POSITIVE_FEE: f64 = f64::MIN_POSITIVE;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AllocationError {
    #[error("log-normal shape must be positive and finite (got {0})")]
    InvalidShape(f64),
    #[error("log-normal scale must be finite (got {0})")]
    InvalidScale(f64),
    #[error("max_trx_nodes must be at least 1")]
    ZeroMaxNodes,
    #[error("CDF argument must be positive (got {0})")]
    NonPositiveArgument(f64),
    #[error("fee must be positive (got {0})")]
    NonPositiveFee(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllocationParams {
    scale: f64,
    shape: f64,
    max_trx_nodes: u32,
}

impl AllocationParams {
    pub fn new(scale: f64, shape: f64, max_trx_nodes: u32) -> Result<Self, AllocationError> {
        if !(shape > 0.0 && shape.is_finite()) {
            return Err(AllocationError::InvalidShape(shape));
        }
        if !scale.is_finite() {
            return Err(AllocationError::InvalidScale(scale));
        }
        if max_trx_nodes == 0 {
            return Err(AllocationError::ZeroMaxNodes);
        }
        Ok(Self { scale, shape, max_trx_nodes })
    }

    pub fn from_strategy(s: &DtsStrategy) -> Result<Self, AllocationError> {
        Self::new(s.scale, s.shape, s.max_trx_nodes)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn max_trx_nodes(&self) -> u32 {
        self.max_trx_nodes
    }
}

/// `F(x) = 1/2 + 1/2 erf((ln x - mu) / (sigma sqrt 2))`, evaluated as
/// `erfc(-t)/2` so the lower tail keeps its relative precision.
pub fn lognormal_cdf(x: f64, params: &AllocationParams) -> Result<f64, AllocationError> {
    if x.is_nan() || x <= 0.0 {
        return Err(AllocationError::NonPositiveArgument(x));
    }
    if x == f64::INFINITY {
        return Ok(1.0);
    }
    let t = (x.ln() - params.scale) / (params.shape * SQRT_2);
    Ok((0.5 * erfc(-t)).clamp(0.0, 1.0))
}

/// Leaf nodes occupied by a transaction paying `fee`.
pub fn leaf_nodes(fee: f64, params: &AllocationParams) -> Result<u32, AllocationError> {
    if fee.is_nan() || fee <= 0.0 {
        return Err(AllocationError::NonPositiveFee(fee));
    }
    let f = lognormal_cdf(fee, params)?;
    let max = params.max_trx_nodes;
    let raw = (f * max as f64).ceil();
    Ok((raw as u32).clamp(1, max))
}

/// Like [`leaf_nodes`] but maps non-positive fees to [`MIN_POSITIVE_FEE`]
/// (one node) instead of failing.
pub fn leaf_nodes_clamped(fee: f64, params: &AllocationParams) -> u32 {
    let fee = if fee > 0.0 { fee } else { MIN_POSITIVE_FEE };
    leaf_nodes(fee, params).unwrap_or(1)
}

/// Whether `tx_nodes` more nodes fit in a block already holding `occupied`.
pub fn fits(occupied: u32, tx_nodes: u32, capacity: u32) -> bool {
    occupied as u64 + tx_nodes as u64 <= capacity as u64
}

/// Total fee-based incentive of a block.
pub fn block_incentive<I: IntoIterator<Item = f64>>(fees: I) -> f64 {
    fees.into_iter().collect::<CompensatedSum>().value()
}
