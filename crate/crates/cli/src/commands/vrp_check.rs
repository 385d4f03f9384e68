use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use dts_core::model::TxId;
use dts_core::vrp::{
    brute_force_min_variance, check_constraints, variance_objective, AssignmentMatrix, ConstraintViolation,
    VrpInstance, ORACLE_MAX_BLOCKS, ORACLE_MAX_TRANSACTIONS,
};
use serde::Deserialize;

use super::{ensure_dir, write_file, CommonArgs};
use crate::error::{config_bail, data_err, CliResult};
use crate::manifest::ManifestBuilder;

#[derive(Debug, Args)]
pub struct VrpCheckArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Block-membership CSV written by `simulate` (members.csv).
    #[arg(long)]
    pub blocks: PathBuf,
    /// Leaf-node capacity per block; defaults to the configured capacity.
    #[arg(long)]
    pub capacity: Option<u32>,
    /// Transactions per truncated oracle instance.
    #[arg(long, default_value_t = ORACLE_MAX_TRANSACTIONS)]
    pub oracle_max_n: usize,
    /// Consecutive blocks per oracle instance.
    #[arg(long, default_value_t = ORACLE_MAX_BLOCKS)]
    pub oracle_blocks: usize,
    /// Number of oracle instances, taken from the start of the chain.
    #[arg(long, default_value_t = 10)]
    pub oracle_instances: usize,
    /// Output directory; prints the reports to stdout when absent.
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
struct MemberRow {
    height: u64,
    tx_id: TxId,
    fee: f64,
    leaf_nodes: u32,
}

struct Chain {
    /// Members per block, in height order.
    blocks: Vec<Vec<MemberRow>>,
}

fn read_members(path: &Path) -> anyhow::Result<Chain> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut by_height: BTreeMap<u64, Vec<MemberRow>> = BTreeMap::new();
    for (i, row) in r.deserialize::<MemberRow>().enumerate() {
        let row = row.with_context(|| format!("{} record {}", path.display(), i + 1))?;
        if !row.fee.is_finite() || row.fee < 0.0 {
            anyhow::bail!("{} record {}: fee {} is not a non-negative number", path.display(), i + 1, row.fee);
        }
        by_height.entry(row.height).or_default().push(row);
    }
    Ok(Chain { blocks: by_height.into_values().collect() })
}

/// One row per distinct transaction (first occurrence supplies fee and
/// demand); every listing sets a matrix entry, so repeats surface as row-sum
/// violations.
fn full_instance(chain: &Chain, capacity: u32) -> (VrpInstance, AssignmentMatrix, Vec<usize>) {
    let mut index: HashMap<TxId, usize> = HashMap::new();
    let (mut ids, mut fees, mut demands) = (Vec::new(), Vec::new(), Vec::new());
    let mut listings = Vec::new();
    let mut cells = Vec::new();
    for (k, block) in chain.blocks.iter().enumerate() {
        for m in block {
            let row = *index.entry(m.tx_id).or_insert_with(|| {
                ids.push(m.tx_id);
                fees.push(m.fee);
                demands.push(m.leaf_nodes);
                listings.push(0);
                ids.len() - 1
            });
            listings[row] += 1;
            cells.push((row, k));
        }
    }
    let instance = VrpInstance::new(ids, fees, demands, capacity).expect("ids are deduplicated above");
    let mut matrix = AssignmentMatrix::empty(instance.len(), chain.blocks.len());
    for (row, k) in cells {
        matrix.set(row, k);
    }
    (instance, matrix, listings)
}

struct GapRow {
    instance: usize,
    first_height: u64,
    blocks: usize,
    n: usize,
    encoded: f64,
    oracle: f64,
}

pub fn run(args: VrpCheckArgs) -> CliResult<()> {
    let mut manifest = ManifestBuilder::new("vrp-check");
    let mut cfg = args.common.load()?;
    cfg.resolve_seed(args.common.seed)?;
    if let Some(c) = args.capacity {
        cfg.simulation.leaf_capacity = c;
    }
    if args.oracle_max_n > ORACLE_MAX_TRANSACTIONS {
        config_bail!("--oracle-max-n {} exceeds the exhaustive limit of {ORACLE_MAX_TRANSACTIONS}", args.oracle_max_n);
    }
    if args.oracle_blocks == 0 || args.oracle_blocks > ORACLE_MAX_BLOCKS {
        config_bail!("--oracle-blocks must be in 1..={ORACLE_MAX_BLOCKS}");
    }
    if args.oracle_max_n < args.oracle_blocks {
        config_bail!("--oracle-max-n must allow one transaction per block");
    }
    let capacity = cfg.simulation.leaf_capacity;
    let chain = read_members(&args.blocks).map_err(data_err)?;

    let (instance, matrix, listings) = full_instance(&chain, capacity);
    let mut violations = check_constraints(&matrix, &instance);
    // Repeats inside one block collapse to a single matrix entry.
    for (row, &count) in listings.iter().enumerate() {
        if count > matrix.row(row).len() {
            violations.push(ConstraintViolation::RowSum { row, id: instance.ids[row], sum: count });
        }
    }

    // Truncated instances: the first few members of consecutive blocks.
    let per_block = args.oracle_max_n / args.oracle_blocks;
    let mut gaps = Vec::new();
    for (i, group) in chain.blocks.chunks_exact(args.oracle_blocks).take(args.oracle_instances).enumerate() {
        let members: Vec<&[MemberRow]> = group.iter().map(|b| &b[..b.len().min(per_block)]).collect();
        let flat = members.iter().flat_map(|b| b.iter());
        let Ok(sub) = VrpInstance::new(
            flat.clone().map(|m| m.tx_id).collect(),
            flat.clone().map(|m| m.fee).collect(),
            flat.map(|m| m.leaf_nodes).collect(),
            capacity,
        ) else {
            continue; // duplicates already reported above
        };
        let assignment: Vec<usize> =
            members.iter().enumerate().flat_map(|(k, b)| std::iter::repeat_n(k, b.len())).collect();
        let encoded = AssignmentMatrix::from_assignment(&assignment, group.len());
        if !check_constraints(&encoded, &sub).is_empty() {
            continue;
        }
        let encoded_var = variance_objective(&encoded, &sub.fees).map_err(data_err)?;
        let (_, oracle) = brute_force_min_variance(&sub, group.len()).map_err(data_err)?;
        gaps.push(GapRow {
            instance: i,
            first_height: group[0][0].height,
            blocks: group.len(),
            n: sub.len(),
            encoded: encoded_var,
            oracle,
        });
    }

    let write_violations = |w: &mut dyn Write| -> anyhow::Result<()> {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["kind", "detail"])?;
        for v in &violations {
            let kind = match v {
                ConstraintViolation::RowSum { .. } => "row-sum",
                ConstraintViolation::Capacity { .. } => "capacity",
                ConstraintViolation::Dimension { .. } => "dimension",
            };
            w.write_record([kind, &v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    };
    let write_gaps = |w: &mut dyn Write| -> anyhow::Result<()> {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["instance", "first_height", "blocks", "n", "encoded_variance", "oracle_variance", "gap"])?;
        for g in &gaps {
            w.write_record([
                g.instance.to_string(),
                g.first_height.to_string(),
                g.blocks.to_string(),
                g.n.to_string(),
                g.encoded.to_string(),
                g.oracle.to_string(),
                (g.encoded - g.oracle).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    };

    match &args.out {
        Some(dir) => {
            ensure_dir(dir)?;
            let vpath = dir.join("violations.csv");
            write_file(&vpath, |w| write_violations(w))?;
            manifest.output(&vpath);
            let gpath = dir.join("oracle_gap.csv");
            write_file(&gpath, |w| write_gaps(w))?;
            manifest.output(&gpath);
            manifest.detail("transactions", instance.len() as i64);
            manifest.detail("blocks", chain.blocks.len() as i64);
            manifest.detail("violations", violations.len() as i64);
            manifest.write(dir, &cfg)?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            write_violations(&mut stdout)?;
            writeln!(stdout)?;
            write_gaps(&mut stdout)?;
        }
    }
    for v in &violations {
        eprintln!("violation: {v}");
    }
    eprintln!(
        "{} transactions in {} blocks: {} violations; {} oracle instances",
        instance.len(),
        chain.blocks.len(),
        violations.len(),
        gaps.len()
    );
    Ok(())
}
