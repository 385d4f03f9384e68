//! k-ary commitment trees over a block's leaf slots, membership proofs, and
//! closed-form Merkle/Verkle proof sizes.
//!
//! The tree is generic over a [`CommitmentScheme`]. The bundled
//! [`Sha256Commitment`] commits to an ordered child list by hashing it, so a
//! membership proof carries the sibling digests at each level. A real vector
//! commitment would replace those with a constant-size opening; proof-size
//! analytics therefore come from the closed forms, not from the stand-in's
//! serialized proofs.

use std::fmt;
use std::io;

use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};
use thiserror::Error;

use crate::numeric::{ceil_log, floor_log};

/// Bits per hash or commitment in proof-size accounting.
pub const COMMITMENT_BITS: u32 = 256;
const COMMITMENT_BYTES: f64 = COMMITMENT_BITS as f64 / 8.0;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Digest(pub [u8; 32]);

impl Digest {
    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest({}..)", &self.to_hex()[..12])
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// Commits to an ordered sequence of child digests.
///
/// Implementations must be deterministic: equal child sequences yield equal
/// commitments.
pub trait CommitmentScheme {
    fn commit(&self, children: &[Digest]) -> Digest;

    fn hash_leaf(&self, data: &[u8]) -> Digest;

    /// Checks that `child` sits at `position` under `commitment`, given the
    /// remaining children in order.
    fn verify_opening(&self, commitment: &Digest, position: usize, child: &Digest, siblings: &[Digest]) -> bool {
        if position > siblings.len() {
            return false;
        }
        let mut children = Vec::with_capacity(siblings.len() + 1);
        children.extend_from_slice(&siblings[..position]);
        children.push(*child);
        children.extend_from_slice(&siblings[position..]);
        self.commit(&children) == *commitment
    }
}

/// Digest-based stand-in for a vector commitment.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sha256Commitment;

const LEAF_TAG: u8 = 0x00;
const NODE_TAG: u8 = 0x01;

impl CommitmentScheme for Sha256Commitment {
    fn commit(&self, children: &[Digest]) -> Digest {
        let mut h = Sha256::new();
        h.update([NODE_TAG]);
        h.update((children.len() as u32).to_le_bytes());
        for c in children {
            h.update(c.0);
        }
        Digest(h.finalize().into())
    }

    fn hash_leaf(&self, data: &[u8]) -> Digest {
        let mut h = Sha256::new();
        h.update([LEAF_TAG]);
        h.update(data);
        Digest(h.finalize().into())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerkleError {
    #[error("cannot build a tree without leaves")]
    NoLeaves,
    #[error("branching factor must be at least 2 (got {0})")]
    BranchingFactor(usize),
    #[error("leaf index {index} out of range for {leaves} leaves")]
    IndexOutOfRange { index: usize, leaves: usize },
    #[error("number of transactions must be at least 2 (got {0})")]
    TooFewTransactions(u64),
}

/// Commitment tree with branching factor `k`.
///
/// `levels[0]` holds the leaf digests; every following level commits to
/// consecutive groups of at most `k` nodes of the level below, ending in a
/// single root. At least one commitment level is always built, so a lone
/// leaf has root `commit([leaf])`.
#[derive(Debug, Clone)]
pub struct VerkleTree<S = Sha256Commitment> {
    branching_factor: usize,
    levels: Vec<Vec<Digest>>,
    scheme: S,
}

impl VerkleTree<Sha256Commitment> {
    pub fn build(leaves: Vec<Digest>, k: usize) -> Result<Self, VerkleError> {
        Self::build_with(Sha256Commitment, leaves, k)
    }
}

impl<S: CommitmentScheme> VerkleTree<S> {
    pub fn build_with(scheme: S, leaves: Vec<Digest>, k: usize) -> Result<Self, VerkleError> {
        if k < 2 {
            return Err(VerkleError::BranchingFactor(k));
        }
        if leaves.is_empty() {
            return Err(VerkleError::NoLeaves);
        }
        let mut levels = vec![leaves];
        loop {
            let below = levels.last().expect("at least the leaf level");
            let above: Vec<Digest> = below.chunks(k).map(|group| scheme.commit(group)).collect();
            let done = above.len() == 1;
            levels.push(above);
            if done {
                break;
            }
        }
        Ok(Self { branching_factor: k, levels, scheme })
    }

    pub fn root(&self) -> Digest {
        self.levels.last().expect("tree has a root level")[0]
    }

    /// Number of commitment levels above the leaves.
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn leaf_count(&self) -> usize {
        self.levels[0].len()
    }

    pub fn branching_factor(&self) -> usize {
        self.branching_factor
    }

    pub fn leaves(&self) -> &[Digest] {
        &self.levels[0]
    }

    pub fn scheme(&self) -> &S {
        &self.scheme
    }

    pub fn prove(&self, leaf_index: usize) -> Result<MembershipProof, VerkleError> {
        if leaf_index >= self.leaf_count() {
            return Err(VerkleError::IndexOutOfRange { index: leaf_index, leaves: self.leaf_count() });
        }
        let k = self.branching_factor;
        let mut index = leaf_index;
        let mut path = Vec::with_capacity(self.depth());
        for (level, nodes) in self.levels[..self.depth()].iter().enumerate() {
            let group_start = (index / k) * k;
            let group_end = (group_start + k).min(nodes.len());
            let position = index - group_start;
            let siblings = nodes[group_start..group_end]
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != position)
                .map(|(_, d)| *d)
                .collect();
            path.push(PathStep { level, position, siblings });
            index /= k;
        }
        Ok(MembershipProof { leaf_index, branching_factor: k, path })
    }

    pub fn verify(&self, proof: &MembershipProof, leaf: &Digest) -> bool {
        verify_with(&self.scheme, &self.root(), proof, leaf)
    }
}

/// One level of a membership path: the node's position among its parent's
/// children and the other children in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathStep {
    pub level: usize,
    pub position: usize,
    pub siblings: Vec<Digest>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MembershipProof {
    pub leaf_index: usize,
    pub branching_factor: usize,
    pub path: Vec<PathStep>,
}

impl MembershipProof {
    pub fn len(&self) -> usize {
        self.path.len()
    }

    pub fn is_empty(&self) -> bool {
        self.path.is_empty()
    }
}

/// Verifies `proof` for `leaf` against `root` with the default scheme.
pub fn verify(root: &Digest, proof: &MembershipProof, leaf: &Digest) -> bool {
    verify_with(&Sha256Commitment, root, proof, leaf)
}

/// Recomputes the commitments along the path; any malformed step yields
/// `false`.
pub fn verify_with<S: CommitmentScheme>(scheme: &S, root: &Digest, proof: &MembershipProof, leaf: &Digest) -> bool {
    let k = proof.branching_factor;
    if k < 2 || proof.path.is_empty() {
        return false;
    }
    let mut current = *leaf;
    let mut index: u128 = 0;
    let mut weight: u128 = 1;
    for (expected_level, step) in proof.path.iter().enumerate() {
        if step.level != expected_level || step.position >= k || step.siblings.len() >= k {
            return false;
        }
        if step.position > step.siblings.len() {
            return false;
        }
        let mut children = Vec::with_capacity(step.siblings.len() + 1);
        children.extend_from_slice(&step.siblings[..step.position]);
        children.push(current);
        children.extend_from_slice(&step.siblings[step.position..]);
        current = scheme.commit(&children);
        index += step.position as u128 * weight;
        weight = weight.saturating_mul(k as u128);
    }
    index == proof.leaf_index as u128 && current == *root
}

/// Tree depth for `n` leaves: `ceil(log_k n)`, and 1 for a single leaf.
pub fn depth_for(n: usize, k: usize) -> Result<usize, VerkleError> {
    if k < 2 {
        return Err(VerkleError::BranchingFactor(k));
    }
    if n == 0 {
        return Err(VerkleError::NoLeaves);
    }
    Ok((ceil_log(n as u64, k as u64) as usize).max(1))
}

/// How a fractional tree depth becomes a count of proof elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoundingMode {
    /// `ceil(log_k n)` whole levels, the exact sibling count of a full path.
    Ceil,
    /// The fractional `log_k n`, as in the usual bandwidth comparisons.
    Smooth,
    /// `floor(log_k n)` whole levels; the reading behind the 19-level,
    /// 608-byte figure for 540,000 transactions.
    Floor,
}

impl RoundingMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RoundingMode::Ceil => "ceil",
            RoundingMode::Smooth => "smooth",
            RoundingMode::Floor => "floor",
        }
    }
}

impl fmt::Display for RoundingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for RoundingMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ceil" => Ok(Self::Ceil),
            "smooth" => Ok(Self::Smooth),
            "floor" => Ok(Self::Floor),
            other => Err(format!("unknown rounding mode {other:?}; expected ceil, smooth or floor")),
        }
    }
}

/// Number of proof elements (levels) for `n_t` transactions at branching
/// factor `k`.
pub fn proof_levels(n_t: u64, k: u64, mode: RoundingMode) -> Result<f64, VerkleError> {
    if n_t < 2 {
        return Err(VerkleError::TooFewTransactions(n_t));
    }
    if k < 2 {
        return Err(VerkleError::BranchingFactor(k as usize));
    }
    Ok(match mode {
        RoundingMode::Ceil => ceil_log(n_t, k) as f64,
        RoundingMode::Floor => floor_log(n_t, k) as f64,
        // log2 ratio keeps k = 2 bit-identical to the Merkle formula.
        RoundingMode::Smooth => (n_t as f64).log2() / (k as f64).log2(),
    })
}

/// Merkle proof size in bytes with a 256-bit hash.
pub fn merkle_proof_size_bytes(n_t: u64, mode: RoundingMode) -> Result<f64, VerkleError> {
    Ok(proof_levels(n_t, 2, mode)? * COMMITMENT_BYTES)
}

/// Verkle proof size in bytes with 256-bit commitments.
pub fn verkle_proof_size_bytes(n_t: u64, k: u64, mode: RoundingMode) -> Result<f64, VerkleError> {
    Ok(proof_levels(n_t, k, mode)? * COMMITMENT_BYTES)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub n_t: u64,
}

impl Scenario {
    pub fn new(name: impl Into<String>, n_t: u64) -> Self {
        Self { name: name.into(), n_t }
    }
}

/// Block capacities of the compared scalability solutions, plus the
/// 540,000-transaction DTS-on-Graphene scenario.
pub fn default_scenarios() -> Vec<Scenario> {
    vec![
        Scenario::new("Bitcoin", 2_100),
        Scenario::new("XThin", 130_999),
        Scenario::new("Compact", 174_747),
        Scenario::new("Graphene", 413_507),
        Scenario::new("Graphene-DTS", 540_000),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Structure {
    Merkle,
    Verkle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProofSizeRow {
    pub scenario: String,
    pub n_t: u64,
    pub structure: Structure,
    pub k: u64,
    pub mode: RoundingMode,
    pub bytes: f64,
}

/// One Merkle row per scenario followed by one Verkle row per `k`.
pub fn bandwidth_report(
    scenarios: &[Scenario],
    ks: &[u64],
    mode: RoundingMode,
) -> Result<Vec<ProofSizeRow>, VerkleError> {
    let mut rows = Vec::with_capacity(scenarios.len() * (ks.len() + 1));
    for s in scenarios {
        rows.push(ProofSizeRow {
            scenario: s.name.clone(),
            n_t: s.n_t,
            structure: Structure::Merkle,
            k: 2,
            mode,
            bytes: merkle_proof_size_bytes(s.n_t, mode)?,
        });
        for &k in ks {
            rows.push(ProofSizeRow {
                scenario: s.name.clone(),
                n_t: s.n_t,
                structure: Structure::Verkle,
                k,
                mode,
                bytes: verkle_proof_size_bytes(s.n_t, k, mode)?,
            });
        }
    }
    Ok(rows)
}

/// Writes report rows as CSV (`scenario,n_t,structure,k,mode,bytes`), bytes
/// rounded to two decimals.
pub fn write_bandwidth_csv<W: io::Write>(rows: &[ProofSizeRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scenario", "n_t", "structure", "k", "mode", "bytes"])?;
    for r in rows {
        let structure = match r.structure {
            Structure::Merkle => "merkle",
            Structure::Verkle => "verkle",
        };
        w.write_record([
            r.scenario.as_str(),
            &r.n_t.to_string(),
            structure,
            &r.k.to_string(),
            r.mode.as_str(),
            &format!("{:.2}", r.bytes),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaves(n: usize) -> Vec<Digest> {
        (0..n as u64).map(|i| Sha256Commitment.hash_leaf(&i.to_le_bytes())).collect()
    }

    #[test]
    fn single_layer_and_binary_shapes() {
        let t = VerkleTree::build(leaves(4), 4).unwrap();
        assert_eq!(t.depth(), 1);
        let t = VerkleTree::build(leaves(4), 2).unwrap();
        assert_eq!(t.depth(), 2);
        assert_eq!(t.levels[1].len(), 2);
    }

    #[test]
    fn single_leaf_root_commits_to_it() {
        let l = leaves(1);
        for k in [2, 5, 16] {
            let t = VerkleTree::build(l.clone(), k).unwrap();
            assert_eq!(t.root(), Sha256Commitment.commit(&l));
            assert_eq!(t.depth(), 1);
            let p = t.prove(0).unwrap();
            assert_eq!(p.len(), 1);
            assert!(verify(&t.root(), &p, &l[0]));
        }
    }

    #[test]
    fn build_errors() {
        assert_eq!(VerkleTree::build(vec![], 3).unwrap_err(), VerkleError::NoLeaves);
        assert_eq!(VerkleTree::build(leaves(3), 1).unwrap_err(), VerkleError::BranchingFactor(1));
        let t = VerkleTree::build(leaves(3), 2).unwrap();
        assert!(matches!(t.prove(3), Err(VerkleError::IndexOutOfRange { .. })));
    }

    #[test]
    fn block_sized_tree_path_length() {
        let t = VerkleTree::build(leaves(2100), 5).unwrap();
        assert_eq!(t.depth(), 5);
        let p = t.prove(2099).unwrap();
        assert_eq!(p.len(), 5);
        assert!(t.verify(&p, &t.leaves()[2099]));
    }

    #[test]
    fn tampering_is_detected() {
        let l = leaves(10);
        let t = VerkleTree::build(l.clone(), 3).unwrap();
        let p = t.prove(4).unwrap();
        assert!(verify(&t.root(), &p, &l[4]));
        assert!(!verify(&t.root(), &p, &l[5]));
        assert!(!verify(&Digest([7; 32]), &p, &l[4]));

        let mut moved = p.clone();
        moved.leaf_index = 5;
        assert!(!verify(&t.root(), &moved, &l[4]));

        let mut bad_sibling = p.clone();
        bad_sibling.path[0].siblings[0] = Digest([0; 32]);
        assert!(!verify(&t.root(), &bad_sibling, &l[4]));

        let mut truncated = p;
        truncated.path.pop();
        assert!(!verify(&t.root(), &truncated, &l[4]));
    }

    #[test]
    fn depth_helper() {
        assert_eq!(depth_for(1, 7).unwrap(), 1);
        assert_eq!(depth_for(2100, 5).unwrap(), 5);
        assert_eq!(depth_for(4, 4).unwrap(), 1);
        assert!(depth_for(0, 4).is_err());
        assert!(depth_for(4, 1).is_err());
    }

    #[test]
    fn closed_form_sizes() {
        let s = |n, m| merkle_proof_size_bytes(n, m).unwrap();
        assert!((s(130_999, RoundingMode::Smooth) - 543.97).abs() < 0.01);
        assert!((s(413_507, RoundingMode::Smooth) - 597.04).abs() < 0.01);
        assert_eq!(s(2100, RoundingMode::Ceil), 384.0);
        assert_eq!(s(540_000, RoundingMode::Ceil), 640.0);
        assert_eq!(s(540_000, RoundingMode::Floor), 608.0);

        let v = |n, k| verkle_proof_size_bytes(n, k, RoundingMode::Smooth).unwrap();
        assert!((v(2100, 5) - 152.10).abs() < 0.01);
        assert!((v(413_507, 5) - 257.13).abs() < 0.01);
        assert!((v(130_999, 5) - 234.28).abs() < 0.01);
        assert!(v(540_000, 1024) < 61.0);

        assert!(merkle_proof_size_bytes(1, RoundingMode::Ceil).is_err());
        assert!(verkle_proof_size_bytes(100, 1, RoundingMode::Smooth).is_err());
    }

    #[test]
    fn report_shape_and_csv() {
        assert!(bandwidth_report(&[], &[3, 5], RoundingMode::Smooth).unwrap().is_empty());
        let rows = bandwidth_report(&[Scenario::new("Graphene-DTS", 540_000)], &[1024], RoundingMode::Smooth).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].structure, Structure::Merkle);
        let mut buf = Vec::new();
        write_bandwidth_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "scenario,n_t,structure,k,mode,bytes\n\
             Graphene-DTS,540000,merkle,2,smooth,609.36\n\
             Graphene-DTS,540000,verkle,1024,smooth,60.94\n"
        );
    }
}
