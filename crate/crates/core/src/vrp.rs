//! DTS read as a capacitated vehicle-routing problem: transactions are
//! customers with demand (leaf nodes) and value (fee), blocks are vehicles
//! with the leaf capacity, and the objective is the population variance of
//! per-block incentives.

use std::collections::HashMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::model::{BlockRecord, TxId};
use crate::numeric::CompensatedSum;
use crate::simulator::BlockMember;

/// Largest instance the exhaustive oracle accepts.
pub const ORACLE_MAX_TRANSACTIONS: usize = 12;
pub const ORACLE_MAX_BLOCKS: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VrpError {
    #[error("transaction {0} appears in more than one block")]
    DuplicateTransaction(TxId),
    #[error("transaction {0} is not part of the instance")]
    UnknownTransaction(TxId),
    #[error("instance ids, fees and demands differ in length")]
    Shape,
    #[error("duplicate id {0} in instance")]
    DuplicateId(TxId),
    #[error("need at least one block")]
    NoBlocks,
    #[error("oracle limited to {max_n} transactions and {max_blocks} blocks (got {n} and {blocks})")]
    TooLarge { n: usize, blocks: usize, max_n: usize, max_blocks: usize },
    #[error("transaction {id} demands {demand} nodes, more than the capacity {capacity}")]
    DemandExceedsCapacity { id: TxId, demand: u32, capacity: u32 },
    #[error("no assignment fills every block within capacity")]
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VrpInstance {
    pub ids: Vec<TxId>,
    pub fees: Vec<f64>,
    pub demands: Vec<u32>,
    pub capacity: u32,
    /// Reference incentive level per block; reporting only.
    pub target_incentive: Option<f64>,
}

impl VrpInstance {
    pub fn new(ids: Vec<TxId>, fees: Vec<f64>, demands: Vec<u32>, capacity: u32) -> Result<Self, VrpError> {
        if ids.len() != fees.len() || ids.len() != demands.len() {
            return Err(VrpError::Shape);
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(&dup) = ids.iter().find(|id| !seen.insert(**id)) {
            return Err(VrpError::DuplicateId(dup));
        }
        Ok(Self { ids, fees, demands, capacity, target_incentive: None })
    }

    /// The transactions of sealed simulator blocks, in block order.
    pub fn from_members(members: &[Vec<BlockMember>], capacity: u32) -> Result<Self, VrpError> {
        let all = members.iter().flatten();
        Self::new(
            all.clone().map(|m| m.id).collect(),
            all.clone().map(|m| m.fee).collect(),
            all.map(|m| m.leaf_nodes).collect(),
            capacity,
        )
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Sparse binary matrix `x[i][k]`: for each transaction row, the blocks it
/// is packed into.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentMatrix {
    rows: Vec<Vec<usize>>,
    blocks: usize,
}

impl AssignmentMatrix {
    pub fn empty(rows: usize, blocks: usize) -> Self {
        Self { rows: vec![Vec::new(); rows], blocks }
    }

    /// One block index per row.
    pub fn from_assignment(assignment: &[usize], blocks: usize) -> Self {
        Self { rows: assignment.iter().map(|&k| vec![k]).collect(), blocks }
    }

    pub fn set(&mut self, row: usize, block: usize) {
        if !self.rows[row].contains(&block) {
            self.rows[row].push(block);
            self.rows[row].sort_unstable();
        }
    }

    pub fn get(&self, row: usize, block: usize) -> bool {
        self.rows[row].contains(&block)
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks
    }

    pub fn row(&self, row: usize) -> &[usize] {
        &self.rows[row]
    }

    /// Block of every row when each row has exactly one.
    pub fn assignment(&self) -> Option<Vec<usize>> {
        self.rows.iter().map(|r| if r.len() == 1 { Some(r[0]) } else { None }).collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        self.rows.iter().map(|r| (0..self.blocks).map(|k| r.contains(&k) as u8).collect()).collect()
    }
}

/// Maps simulator blocks onto rows of `universe`.
pub fn encode(blocks: &[BlockRecord], universe: &[TxId]) -> Result<AssignmentMatrix, VrpError> {
    let index: HashMap<TxId, usize> = universe.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    let mut m = AssignmentMatrix::empty(universe.len(), blocks.len());
    for (k, b) in blocks.iter().enumerate() {
        for id in &b.tx_ids {
            let &row = index.get(id).ok_or(VrpError::UnknownTransaction(*id))?;
            if !m.rows[row].is_empty() {
                return Err(VrpError::DuplicateTransaction(*id));
            }
            m.rows[row].push(k);
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintViolation {
    /// A transaction packed `sum` times instead of exactly once.
    RowSum {
        row: usize,
        id: TxId,
        sum: usize,
    },
    Capacity {
        block: usize,
        demand: u64,
        capacity: u32,
    },
    /// Matrix and instance disagree on the number of transactions.
    Dimension {
        rows: usize,
        transactions: usize,
    },
}

impl std::fmt::Display for ConstraintViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::RowSum { row, id, sum } => write!(f, "transaction {id} (row {row}) packed {sum} times"),
            Self::Capacity { block, demand, capacity } => {
                write!(f, "block {block} demands {demand} nodes over capacity {capacity}")
            }
            Self::Dimension { rows, transactions } => {
                write!(f, "matrix has {rows} rows for {transactions} transactions")
            }
        }
    }
}

pub fn check_constraints(m: &AssignmentMatrix, instance: &VrpInstance) -> Vec<ConstraintViolation> {
    if m.n_rows() != instance.len() {
        return vec![ConstraintViolation::Dimension { rows: m.n_rows(), transactions: instance.len() }];
    }
    let mut out = Vec::new();
    let mut demand = vec![0u64; m.n_blocks()];
    for (row, blocks) in m.rows.iter().enumerate() {
        if blocks.len() != 1 {
            out.push(ConstraintViolation::RowSum { row, id: instance.ids[row], sum: blocks.len() });
        }
        for &k in blocks {
            demand[k] += instance.demands[row] as u64;
        }
    }
    for (block, &d) in demand.iter().enumerate() {
        if d > instance.capacity as u64 {
            out.push(ConstraintViolation::Capacity { block, demand: d, capacity: instance.capacity });
        }
    }
    out
}

/// Per-block incentive sums.
pub fn block_incentives(m: &AssignmentMatrix, fees: &[f64]) -> Vec<f64> {
    let mut sums = vec![CompensatedSum::new(); m.n_blocks()];
    for (row, blocks) in m.rows.iter().enumerate() {
        for &k in blocks {
            sums[k].add(fees[row]);
        }
    }
    sums.iter().map(CompensatedSum::value).collect()
}

fn population_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().copied().collect::<CompensatedSum>().value() / n;
    xs.iter().map(|x| (x - mean) * (x - mean)).collect::<CompensatedSum>().value() / n
}

/// Population variance of the per-block incentives.
pub fn variance_objective(m: &AssignmentMatrix, fees: &[f64]) -> Result<f64, VrpError> {
    if m.n_blocks() == 0 {
        return Err(VrpError::NoBlocks);
    }
    Ok(population_variance(&block_incentives(m, fees)))
}

/// Root-mean-square deviation of block incentives from the instance's
/// target level, when one is set.
pub fn target_deviation(m: &AssignmentMatrix, instance: &VrpInstance) -> Option<f64> {
    let target = instance.target_incentive?;
    let inc = block_incentives(m, &instance.fees);
    if inc.is_empty() {
        return None;
    }
    let ss = inc.iter().map(|x| (x - target) * (x - target)).collect::<CompensatedSum>().value();
    Some((ss / inc.len() as f64).sqrt())
}

/// Exhaustive minimum-variance packing of all transactions into exactly
/// `block_count` non-empty blocks within capacity. Ties resolve to the
/// lexicographically smallest assignment vector, independent of how the
/// enumeration is split across threads.
pub fn brute_force_min_variance(
    instance: &VrpInstance,
    block_count: usize,
) -> Result<(AssignmentMatrix, f64), VrpError> {
    let n = instance.len();
    if block_count == 0 {
        return Err(VrpError::NoBlocks);
    }
    if n > ORACLE_MAX_TRANSACTIONS || block_count > ORACLE_MAX_BLOCKS {
        return Err(VrpError::TooLarge {
            n,
            blocks: block_count,
            max_n: ORACLE_MAX_TRANSACTIONS,
            max_blocks: ORACLE_MAX_BLOCKS,
        });
    }
    if let Some(i) = (0..n).find(|&i| instance.demands[i] > instance.capacity) {
        return Err(VrpError::DemandExceedsCapacity {
            id: instance.ids[i],
            demand: instance.demands[i],
            capacity: instance.capacity,
        });
    }
    let k = block_count as u64;
    let total = k.pow(n as u32);
    // Codes enumerate assignments with row 0 as the most significant digit,
    // so ascending code order is lexicographic order.
    let decode = |mut code: u64, buf: &mut [usize]| {
        for slot in buf.iter_mut().rev() {
            *slot = (code % k) as usize;
            code /= k;
        }
    };
    let chunk = (total / 64).max(1);
    let best = (0..total.div_ceil(chunk))
        .into_par_iter()
        .filter_map(|c| {
            let mut assignment = vec![0usize; n];
            let mut demand = vec![0u64; block_count];
            let mut counts = vec![0usize; block_count];
            let mut acc = vec![CompensatedSum::new(); block_count];
            let mut sums = vec![0.0f64; block_count];
            let mut best: Option<(f64, u64)> = None;
            for code in c * chunk..((c + 1) * chunk).min(total) {
                decode(code, &mut assignment);
                demand.iter_mut().for_each(|d| *d = 0);
                counts.iter_mut().for_each(|d| *d = 0);
                for (i, &b) in assignment.iter().enumerate() {
                    demand[b] += instance.demands[i] as u64;
                    counts[b] += 1;
                }
                if counts.contains(&0) || demand.iter().any(|&d| d > instance.capacity as u64) {
                    continue;
                }
                acc.iter_mut().for_each(|a| *a = CompensatedSum::new());
                for (i, &b) in assignment.iter().enumerate() {
                    acc[b].add(instance.fees[i]);
                }
                for (s, a) in sums.iter_mut().zip(&acc) {
                    *s = a.value();
                }
                let v = population_variance(&sums);
                if best.is_none_or(|(bv, _)| v < bv) {
                    best = Some((v, code));
                }
            }
            best
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .ok_or(VrpError::Infeasible)?;
    let mut assignment = vec![0usize; n];
    decode(best.1, &mut assignment);
    Ok((AssignmentMatrix::from_assignment(&assignment, block_count), best.0))
}
