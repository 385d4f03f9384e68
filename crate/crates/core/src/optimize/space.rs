//! The free DTS attributes as a box-bounded search space.

use crate::model::{AttributeBounds, FreeAttributes, StrategyCategory};

use super::{Bounds, OptimizeError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dimension {
    pub name: &'static str,
    pub lower: f64,
    pub upper: f64,
    pub integer: bool,
}

/// A1, [A4, A5,] A6, A7, A8 for one category; A4/A5 exist only with
/// designated small-fee space.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    pub category: StrategyCategory,
    pub bounds: AttributeBounds,
}

impl SearchSpace {
    pub fn new(category: StrategyCategory) -> Self {
        Self { category, bounds: AttributeBounds::default() }
    }

    pub fn with_bounds(category: StrategyCategory, bounds: AttributeBounds) -> Self {
        Self { category, bounds }
    }

    pub fn dimensions(&self) -> Vec<Dimension> {
        let b = &self.bounds;
        let dim = |name, (lower, upper): (f64, f64), integer| Dimension { name, lower, upper, integer };
        let mut out = vec![dim("A1", b.mempool_size, true)];
        if self.category.designated_space() {
            out.push(dim("A4", b.small_fee_threshold, false));
            out.push(dim("A5", b.small_fee_count, true));
        }
        out.push(dim("A6", b.max_trx_nodes, true));
        out.push(dim("A7", b.scale, false));
        out.push(dim("A8", b.shape, false));
        out
    }

    pub fn dim(&self) -> usize {
        if self.category.designated_space() {
            6
        } else {
            4
        }
    }

    pub fn to_bounds(&self) -> Result<Bounds, OptimizeError> {
        let d = self.dimensions();
        Bounds::with_integers(
            d.iter().map(|d| d.lower).collect(),
            d.iter().map(|d| d.upper).collect(),
            d.iter().map(|d| d.integer).collect(),
        )
    }

    /// Clamps `x` into the box, rounds integer attributes and names them.
    pub fn materialize(&self, x: &[f64]) -> FreeAttributes {
        assert_eq!(x.len(), self.dim(), "vector length does not match the search space");
        let dims = self.dimensions();
        let v: Vec<f64> = x
            .iter()
            .zip(&dims)
            .map(|(&v, d)| {
                let v = if v.is_nan() { d.lower } else { v.clamp(d.lower, d.upper) };
                if d.integer {
                    v.round().clamp(d.lower.ceil(), d.upper.floor())
                } else {
                    v
                }
            })
            .collect();
        let (a4, a5, rest) = if self.category.designated_space() {
            (Some(v[1]), Some(v[2] as u32), &v[3..])
        } else {
            (None, None, &v[1..])
        };
        FreeAttributes {
            mempool_size: v[0] as usize,
            small_fee_threshold: a4,
            small_fee_count: a5,
            max_trx_nodes: rest[0] as u32,
            scale: rest[1],
            shape: rest[2],
        }
    }

    /// Inverse of [`materialize`](Self::materialize) for in-bounds attributes.
    pub fn encode(&self, attrs: &FreeAttributes) -> Vec<f64> {
        let mut out = vec![attrs.mempool_size as f64];
        if self.category.designated_space() {
            out.push(attrs.small_fee_threshold.unwrap_or(self.bounds.small_fee_threshold.0));
            out.push(attrs.small_fee_count.unwrap_or(0) as f64);
        }
        out.extend([attrs.max_trx_nodes as f64, attrs.scale, attrs.shape]);
        out
    }
}
