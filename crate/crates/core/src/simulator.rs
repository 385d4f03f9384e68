//! Discrete-event incorporation engine.
//!
//! Transactions are submitted to a bounded mempool in arrival order. The
//! miner works with a window of `A1` pending transactions: whenever the pool
//! holds at least `A1` entries it selects one (by priority, or through the
//! small-fee lane), maps its fee to leaf nodes and adds it to the current
//! block. A block is sealed when the next selected transaction no longer
//! fits; that transaction opens the following block.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, HashMap, HashSet};
use std::io;

use thiserror::Error;

use crate::allocation::{fits, leaf_nodes_clamped, AllocationParams};
use crate::model::{
    validate_strategy, BlockRecord, DtsStrategy, Priority, SimulationConfig, SmallFeeReserve, Transaction, TxId,
    Violation,
};
use crate::numeric::CompensatedSum;
use crate::verkle::{CommitmentScheme, Digest, Sha256Commitment, VerkleTree};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimulationError {
    #[error("invalid strategy: {}", join_violations(.0))]
    InvalidStrategy(Vec<Violation>),
    #[error("transaction stream is not ordered by arrival time at position {index} (t={arrival} after t={previous})")]
    Unordered { index: usize, arrival: u64, previous: u64 },
    #[error("transaction id {0} submitted twice")]
    DuplicateId(TxId),
    #[error("branching factor must be at least 2 (got {0})")]
    BranchingFactor(usize),
    #[error("leaf capacity must be at least 1")]
    ZeroCapacity,
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// `f64` ordered by `total_cmp`.
#[derive(Debug, Clone, Copy)]
struct OrdFee(f64);

impl PartialEq for OrdFee {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for OrdFee {}
impl PartialOrd for OrdFee {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OrdFee {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// First element = next time-based pick: earliest arrival, then higher fee,
/// then lower id.
type TimeKey = (u64, Reverse<OrdFee>, TxId);
/// Last element = next fee-based pick: highest fee, then earlier arrival,
/// then lower id. First element = eviction victim.
type FeeKey = (OrdFee, Reverse<u64>, Reverse<TxId>);

fn time_key(tx: &Transaction) -> TimeKey {
    (tx.arrival_time, Reverse(OrdFee(tx.fee)), tx.id)
}

fn fee_key(tx: &Transaction) -> FeeKey {
    (OrdFee(tx.fee), Reverse(tx.arrival_time), Reverse(tx.id))
}

#[derive(Debug, Clone, PartialEq)]
pub enum SubmitOutcome {
    Accepted,
    /// The newcomer was accepted and this lower-fee transaction left.
    Evicted(Transaction),
    /// The newcomer was turned away (pool full of higher fees, or a
    /// duplicate id).
    Rejected(Transaction),
}

/// Bounded pending-transaction pool with time and fee orderings.
#[derive(Debug, Clone)]
pub struct Mempool {
    capacity: usize,
    small_fee_threshold: Option<f64>,
    txs: HashMap<TxId, Transaction>,
    by_time: BTreeSet<TimeKey>,
    by_fee: BTreeSet<FeeKey>,
    small_by_time: BTreeSet<TimeKey>,
}

impl Mempool {
    pub fn new(capacity: usize) -> Self {
        Self::with_small_fee_threshold(capacity, None)
    }

    /// A pool that also indexes transactions with fee below `threshold` for
    /// the designated small-fee lane.
    pub fn with_small_fee_threshold(capacity: usize, threshold: Option<f64>) -> Self {
        Self {
            capacity,
            small_fee_threshold: threshold,
            txs: HashMap::new(),
            by_time: BTreeSet::new(),
            by_fee: BTreeSet::new(),
            small_by_time: BTreeSet::new(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.txs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.txs.is_empty()
    }

    pub fn contains(&self, id: TxId) -> bool {
        self.txs.contains_key(&id)
    }

    fn is_small(&self, tx: &Transaction) -> bool {
        self.small_fee_threshold.is_some_and(|t| tx.fee < t)
    }

    fn insert(&mut self, tx: Transaction) {
        self.by_time.insert(time_key(&tx));
        self.by_fee.insert(fee_key(&tx));
        if self.is_small(&tx) {
            self.small_by_time.insert(time_key(&tx));
        }
        self.txs.insert(tx.id, tx);
    }

    pub fn remove(&mut self, id: TxId) -> Option<Transaction> {
        let tx = self.txs.remove(&id)?;
        self.by_time.remove(&time_key(&tx));
        self.by_fee.remove(&fee_key(&tx));
        self.small_by_time.remove(&time_key(&tx));
        Some(tx)
    }

    /// Accepts while below capacity; when full, evicts the lowest-fee
    /// pending transaction if the newcomer pays strictly more.
    pub fn submit(&mut self, tx: Transaction) -> SubmitOutcome {
        if self.txs.contains_key(&tx.id) {
            return SubmitOutcome::Rejected(tx);
        }
        if self.txs.len() < self.capacity {
            self.insert(tx);
            return SubmitOutcome::Accepted;
        }
        match self.by_fee.first().copied() {
            Some((lowest, _, Reverse(victim))) if tx.fee > lowest.0 => {
                let evicted = self.remove(victim).expect("indexed transaction is present");
                self.insert(tx);
                SubmitOutcome::Evicted(evicted)
            }
            _ => SubmitOutcome::Rejected(tx),
        }
    }

    /// Next transaction under `priority`, without removing it.
    pub fn peek(&self, priority: Priority) -> Option<&Transaction> {
        let id = match priority {
            Priority::TimeBased => self.by_time.first().map(|k| k.2),
            Priority::FeeBased => self.by_fee.last().map(|k| (k.2).0),
        }?;
        self.txs.get(&id)
    }

    /// Earliest pending transaction below the small-fee threshold.
    pub fn peek_small(&self) -> Option<&Transaction> {
        self.small_by_time.first().and_then(|k| self.txs.get(&k.2))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transaction> {
        self.by_time.iter().map(|k| &self.txs[&k.2])
    }

    /// Remaining transactions in arrival order.
    pub fn into_pending(mut self) -> Vec<Transaction> {
        let keys = std::mem::take(&mut self.by_time);
        keys.into_iter().filter_map(|k| self.txs.remove(&k.2)).collect()
    }
}

/// Next transaction the strategy's priority rule would pick.
pub fn select_next<'a>(mempool: &'a Mempool, strategy: &DtsStrategy) -> Option<&'a Transaction> {
    mempool.peek(strategy.priority)
}

/// A transaction as placed in a block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockMember {
    pub id: TxId,
    pub fee: f64,
    pub leaf_nodes: u32,
}

#[derive(Debug, Clone, Default)]
struct OpenBlock {
    members: Vec<BlockMember>,
    leaf_digests: Vec<Digest>,
    occupied: u32,
    small_used: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Incorporation {
    Incorporated,
    /// The current block was sealed at this height first; the transaction
    /// opened the next block.
    SealedThenIncorporated(u64),
}

/// The miner's in-progress block and the sealed chain.
#[derive(Debug, Clone)]
pub struct MinerState {
    leaf_capacity: u32,
    branching_factor: usize,
    build_commitments: bool,
    small_fee: Option<SmallFeeReserve>,
    current: OpenBlock,
    sealed: Vec<BlockRecord>,
    sealed_members: Vec<Vec<BlockMember>>,
}

impl MinerState {
    pub fn new(cfg: &SimulationConfig, small_fee: Option<SmallFeeReserve>) -> Result<Self, SimulationError> {
        if cfg.leaf_capacity == 0 {
            return Err(SimulationError::ZeroCapacity);
        }
        if cfg.build_commitments && cfg.verkle_branching_factor < 2 {
            return Err(SimulationError::BranchingFactor(cfg.verkle_branching_factor));
        }
        Ok(Self {
            leaf_capacity: cfg.leaf_capacity,
            branching_factor: cfg.verkle_branching_factor,
            build_commitments: cfg.build_commitments,
            small_fee,
            current: OpenBlock::default(),
            sealed: Vec::new(),
            sealed_members: Vec::new(),
        })
    }

    pub fn occupied(&self) -> u32 {
        self.current.occupied
    }

    pub fn current_len(&self) -> usize {
        self.current.members.len()
    }

    /// Small-fee admissions counted in the current block.
    pub fn small_used(&self) -> u32 {
        self.current.small_used
    }

    /// Whether the designated small-fee lane still has room in this block.
    pub fn small_lane_open(&self) -> bool {
        self.small_fee.is_some_and(|r| self.current.small_used < r.max_count)
    }

    pub fn sealed(&self) -> &[BlockRecord] {
        &self.sealed
    }

    pub fn current_members(&self) -> &[BlockMember] {
        &self.current.members
    }

    /// Adds `tx`, occupying `nodes` leaves, sealing the current block first
    /// when it does not fit. `now` stamps a seal.
    pub fn try_incorporate(&mut self, tx: &Transaction, nodes: u32, now: u64) -> Incorporation {
        let mut outcome = Incorporation::Incorporated;
        if !self.current.members.is_empty() && !fits(self.current.occupied, nodes, self.leaf_capacity) {
            outcome = Incorporation::SealedThenIncorporated(self.seal(now));
        }
        if let Some(r) = self.small_fee {
            if tx.fee < r.fee_threshold && self.current.small_used < r.max_count {
                self.current.small_used += 1;
            }
        }
        self.current.members.push(BlockMember { id: tx.id, fee: tx.fee, leaf_nodes: nodes });
        if self.build_commitments {
            self.current.leaf_digests.push(leaf_digest(tx));
        }
        self.current.occupied += nodes;
        outcome
    }

    /// Seals the current block (even if empty) and returns its height.
    pub fn seal(&mut self, now: u64) -> u64 {
        let block = std::mem::take(&mut self.current);
        let height = self.sealed.len() as u64;
        let commitment = if self.build_commitments && !block.members.is_empty() {
            let mut leaves = Vec::with_capacity(block.occupied as usize);
            for (m, d) in block.members.iter().zip(&block.leaf_digests) {
                leaves.extend(std::iter::repeat_n(*d, m.leaf_nodes as usize));
            }
            let tree = VerkleTree::build(leaves, self.branching_factor).expect("non-empty leaves, k >= 2");
            Some(tree.root())
        } else {
            None
        };
        self.sealed.push(BlockRecord {
            height,
            tx_ids: block.members.iter().map(|m| m.id).collect(),
            occupied_nodes: block.occupied,
            incentive: block.members.iter().map(|m| m.fee).collect::<CompensatedSum>().value(),
            seal_time: now,
            commitment,
        });
        self.sealed_members.push(block.members);
        height
    }
}

/// Leaf digest of a transaction, repeated over every slot it occupies.
pub fn leaf_digest(tx: &Transaction) -> Digest {
    let mut data = [0u8; 24];
    data[..8].copy_from_slice(&tx.id.to_le_bytes());
    data[8..16].copy_from_slice(&tx.fee.to_bits().to_le_bytes());
    data[16..].copy_from_slice(&tx.arrival_time.to_le_bytes());
    Sha256Commitment.hash_leaf(&data)
}

/// How a transaction's fee becomes occupied leaf nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpaceRule {
    Dts(AllocationParams),
    /// Every transaction takes one node: a fixed count of
    /// `leaf_capacity` transactions per block.
    FixedCount,
}

impl SpaceRule {
    pub fn nodes(&self, fee: f64) -> u32 {
        match self {
            SpaceRule::Dts(p) => leaf_nodes_clamped(fee, p),
            SpaceRule::FixedCount => 1,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SimulationOutcome {
    pub blocks: Vec<BlockRecord>,
    /// Per sealed block, its transactions in incorporation order.
    pub members: Vec<Vec<BlockMember>>,
    /// Transactions of the unsealed last block.
    pub tail: Vec<BlockMember>,
    /// Transactions still waiting in the mempool, in arrival order.
    pub pending: Vec<Transaction>,
    pub submitted: usize,
    pub submitted_fees: f64,
    pub evicted: usize,
    pub evicted_fees: f64,
    pub rejected: usize,
    pub rejected_fees: f64,
    /// The block-count target was reached before the stream ended.
    pub stopped_early: bool,
}

impl SimulationOutcome {
    pub fn incentives(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.incentive).collect()
    }

    pub fn included_fees(&self) -> f64 {
        self.members.iter().flatten().map(|m| m.fee).collect::<CompensatedSum>().value()
    }

    pub fn tail_fees(&self) -> f64 {
        self.tail.iter().map(|m| m.fee).collect::<CompensatedSum>().value()
    }

    pub fn pending_fees(&self) -> f64 {
        self.pending.iter().map(|t| t.fee).collect::<CompensatedSum>().value()
    }

    /// Submitted fees minus everything accounted for; zero up to rounding.
    pub fn conservation_error(&self) -> f64 {
        let mut s = CompensatedSum::new();
        for b in &self.blocks {
            s.add(b.incentive);
        }
        s.add(self.tail_fees());
        s.add(self.pending_fees());
        s.add(self.evicted_fees);
        s.add(self.rejected_fees);
        self.submitted_fees - s.value()
    }
}

/// Runs `strategy` over an arrival-ordered stream.
pub fn run(
    txs: &[Transaction],
    strategy: &DtsStrategy,
    cfg: &SimulationConfig,
) -> Result<SimulationOutcome, SimulationError> {
    let violations = validate_strategy(strategy, cfg);
    if !violations.is_empty() {
        return Err(SimulationError::InvalidStrategy(violations));
    }
    let params = AllocationParams::from_strategy(strategy).expect("validated strategy");
    run_with_rule(txs, strategy.mempool_size, strategy.priority, strategy.small_fee, SpaceRule::Dts(params), cfg)
}

/// Fixed-count baseline: fee-priority selection, one node per transaction.
pub fn run_fixed_baseline(
    txs: &[Transaction],
    mempool_size: usize,
    cfg: &SimulationConfig,
) -> Result<SimulationOutcome, SimulationError> {
    if mempool_size == 0 {
        return Err(SimulationError::InvalidStrategy(vec![Violation::EmptyMempool]));
    }
    run_with_rule(txs, mempool_size, Priority::FeeBased, None, SpaceRule::FixedCount, cfg)
}

pub fn run_with_rule(
    txs: &[Transaction],
    mempool_size: usize,
    priority: Priority,
    small_fee: Option<SmallFeeReserve>,
    rule: SpaceRule,
    cfg: &SimulationConfig,
) -> Result<SimulationOutcome, SimulationError> {
    let mut pool = Mempool::with_small_fee_threshold(mempool_size, small_fee.map(|r| r.fee_threshold));
    let mut miner = MinerState::new(cfg, small_fee)?;
    let mut out = SimulationOutcome::default();
    let mut submitted = CompensatedSum::new();
    let mut evicted = CompensatedSum::new();
    let mut rejected = CompensatedSum::new();
    let mut seen: HashSet<TxId> = HashSet::with_capacity(txs.len());
    let budget = cfg.transaction_budget.unwrap_or(usize::MAX);
    let target = cfg.block_count_target.unwrap_or(usize::MAX);
    let mut now = 0u64;

    'stream: for (index, tx) in txs.iter().take(budget).enumerate() {
        if index > 0 && tx.arrival_time < now {
            return Err(SimulationError::Unordered { index, arrival: tx.arrival_time, previous: now });
        }
        if !seen.insert(tx.id) {
            return Err(SimulationError::DuplicateId(tx.id));
        }
        now = tx.arrival_time;
        out.submitted += 1;
        submitted.add(tx.fee);
        match pool.submit(tx.clone()) {
            SubmitOutcome::Accepted => {}
            SubmitOutcome::Evicted(e) => {
                out.evicted += 1;
                evicted.add(e.fee);
            }
            SubmitOutcome::Rejected(r) => {
                out.rejected += 1;
                rejected.add(r.fee);
            }
        }
        while pool.len() >= mempool_size {
            let next = if miner.small_lane_open() { pool.peek_small() } else { None }
                .or_else(|| pool.peek(priority))
                .map(|t| t.id)
                .expect("pool is non-empty");
            let tx = pool.remove(next).expect("peeked transaction is present");
            miner.try_incorporate(&tx, rule.nodes(tx.fee), now);
            if miner.sealed.len() >= target {
                out.stopped_early = true;
                break 'stream;
            }
        }
    }
    if cfg.flush_tail && !out.stopped_early && miner.current_len() > 0 {
        miner.seal(now);
    }

    out.blocks = miner.sealed;
    out.members = miner.sealed_members;
    out.tail = miner.current.members;
    out.pending = pool.into_pending();
    out.submitted_fees = submitted.value();
    out.evicted_fees = evicted.value();
    out.rejected_fees = rejected.value();
    Ok(out)
}

/// Writes `height,tx_count,occupied_nodes,incentive,seal_time`.
pub fn write_blocks_csv<W: io::Write>(blocks: &[BlockRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["height", "tx_count", "occupied_nodes", "incentive", "seal_time"])?;
    for b in blocks {
        w.write_record([
            b.height.to_string(),
            b.tx_ids.len().to_string(),
            b.occupied_nodes.to_string(),
            b.incentive.to_string(),
            b.seal_time.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `height,tx_id,fee,leaf_nodes`, one row per included transaction.
pub fn write_members_csv<W: io::Write>(
    blocks: &[BlockRecord],
    members: &[Vec<BlockMember>],
    out: W,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["height", "tx_id", "fee", "leaf_nodes"])?;
    for (b, ms) in blocks.iter().zip(members) {
        for m in ms {
            w.write_record([b.height.to_string(), m.id.to_string(), m.fee.to_string(), m.leaf_nodes.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}
