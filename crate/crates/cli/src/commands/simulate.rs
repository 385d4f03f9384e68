use std::path::PathBuf;

use clap::Args;
use dts_core::metrics::{benchmark_check, incentive_volatility, HISTORICAL_MAX, HISTORICAL_MIN};
use dts_core::model::{DtsStrategy, SmallFeeReserve, StrategyCategory};
use dts_core::simulator::{run as simulate, run_fixed_baseline, write_blocks_csv, write_members_csv, SimulationError};

use super::{ensure_dir, write_file, write_summary, CommonArgs, DataArgs, PriorityArg};
use crate::config::RunConfig;
use crate::error::{config_err, data_err, CliResult};
use crate::manifest::ManifestBuilder;

#[derive(Debug, Args)]
pub struct StrategyArgs {
    /// A1: mempool window size.
    #[arg(long)]
    pub mempool_size: Option<usize>,
    /// A2: selection order.
    #[arg(long, value_enum)]
    pub priority: Option<PriorityArg>,
    /// A4: small-fee threshold; enables designated space with --small-fee-count.
    #[arg(long, requires = "small_fee_count")]
    pub small_fee_threshold: Option<f64>,
    /// A5: small-fee transactions admitted per block.
    #[arg(long, requires = "small_fee_threshold")]
    pub small_fee_count: Option<u32>,
    /// Disable designated small-fee space set in the config file.
    #[arg(long, conflicts_with_all = ["small_fee_threshold", "small_fee_count"])]
    pub no_small_fee: bool,
    /// A6: leaf nodes taken by the highest fees.
    #[arg(long)]
    pub max_trx_nodes: Option<u32>,
    /// A7: log-normal location.
    #[arg(long)]
    pub scale: Option<f64>,
    /// A8: log-normal shape.
    #[arg(long)]
    pub shape: Option<f64>,
}

impl StrategyArgs {
    pub fn apply(&self, cfg: &mut RunConfig) {
        let s = &mut cfg.strategy;
        if let Some(v) = self.mempool_size {
            s.mempool_size = v;
        }
        if let Some(v) = self.priority {
            s.priority = v.into();
        }
        if self.no_small_fee {
            s.small_fee_threshold = None;
            s.small_fee_count = None;
        }
        if let (Some(t), Some(c)) = (self.small_fee_threshold, self.small_fee_count) {
            s.small_fee_threshold = Some(t);
            s.small_fee_count = Some(c);
        }
        if let Some(v) = self.max_trx_nodes {
            s.max_trx_nodes = v;
        }
        if let Some(v) = self.scale {
            s.scale = v;
        }
        if let Some(v) = self.shape {
            s.shape = v;
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub strategy: StrategyArgs,
    /// Take the priority and designated space of a category (1-4) and keep
    /// the other attributes.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    pub category: Option<u8>,
    /// Fee-ordered baseline that gives every transaction one leaf node.
    #[arg(long, conflicts_with = "category")]
    pub baseline: bool,
    /// Seal the unfinished tail block at the end of the stream.
    #[arg(long)]
    pub flush_tail: bool,
    /// Leaf-node capacity per block.
    #[arg(long)]
    pub capacity: Option<u32>,
    /// Skip the per-block commitment trees.
    #[arg(long)]
    pub no_commitments: bool,
    /// Output directory.
    #[arg(long, short = 'o')]
    pub out: PathBuf,
}

fn strategy_for(cfg: &RunConfig, category: Option<u8>) -> CliResult<DtsStrategy> {
    let mut s = cfg.strategy.to_strategy()?;
    let Some(id) = category else {
        return Ok(s);
    };
    let category = StrategyCategory::from_id(id).map_err(config_err)?;
    s.priority = category.priority();
    s.small_fee = match (category.designated_space(), s.small_fee) {
        (false, _) => None,
        (true, Some(r)) => Some(r),
        // Lower ends of the search ranges: the mildest reserve.
        (true, None) => Some(SmallFeeReserve {
            fee_threshold: cfg.bounds.small_fee_threshold.0,
            max_count: cfg.bounds.small_fee_count.0 as u32,
        }),
    };
    Ok(s)
}

pub fn run(args: SimulateArgs) -> CliResult<()> {
    let mut manifest = ManifestBuilder::new("simulate");
    let mut cfg = args.common.load()?;
    args.data.apply(&mut cfg);
    args.strategy.apply(&mut cfg);
    if args.flush_tail {
        cfg.simulation.flush_tail = true;
    }
    if args.no_commitments {
        cfg.simulation.build_commitments = false;
    }
    if let Some(c) = args.capacity {
        cfg.simulation.leaf_capacity = c;
    }
    cfg.resolve_seed(args.common.seed)?;
    let strategy = strategy_for(&cfg, args.category)?;
    let sim = cfg.simulation_config();

    let txs = args.data.load(&cfg)?;
    let outcome = if args.baseline {
        run_fixed_baseline(&txs, strategy.mempool_size, &sim)
    } else {
        simulate(&txs, &strategy, &sim)
    }
    .map_err(|e| match e {
        SimulationError::Unordered { .. } | SimulationError::DuplicateId(_) => data_err(e),
        other => config_err(other),
    })?;

    ensure_dir(&args.out)?;
    let blocks_path = args.out.join("blocks.csv");
    write_file(&blocks_path, |w| Ok(write_blocks_csv(&outcome.blocks, w)?))?;
    manifest.output(&blocks_path);
    let members_path = args.out.join("members.csv");
    write_file(&members_path, |w| Ok(write_members_csv(&outcome.blocks, &outcome.members, w)?))?;
    manifest.output(&members_path);
    if sim.build_commitments {
        let path = args.out.join("commitments.csv");
        write_file(&path, |w| {
            let mut w = csv::Writer::from_writer(w);
            w.write_record(["height", "root"])?;
            for b in &outcome.blocks {
                let root = b.commitment.map(|d| d.to_hex()).unwrap_or_default();
                w.write_record([b.height.to_string(), root])?;
            }
            w.flush()?;
            Ok(())
        })?;
        manifest.output(&path);
    }

    let incentives = outcome.incentives();
    let (vol, class) = match incentive_volatility(&incentives) {
        Ok(v) => (v.to_string(), benchmark_check(v).to_string()),
        Err(e) => {
            log::warn!("no volatility: {e}");
            (String::new(), "n/a".to_string())
        }
    };
    let included: usize = outcome.blocks.iter().map(|b| b.tx_ids.len()).sum();
    let summary = [
        (
            "strategy",
            if args.baseline { "fixed-baseline".to_string() } else { format!("category {}", strategy.category()) },
        ),
        ("blocks", outcome.blocks.len().to_string()),
        ("submitted", outcome.submitted.to_string()),
        ("included", included.to_string()),
        ("tail", outcome.tail.len().to_string()),
        ("pending", outcome.pending.len().to_string()),
        ("evicted", outcome.evicted.to_string()),
        ("rejected", outcome.rejected.to_string()),
        ("volatility", vol.clone()),
        ("benchmark", class.clone()),
        ("historical_min", HISTORICAL_MIN.to_string()),
        ("historical_max", HISTORICAL_MAX.to_string()),
    ];
    let summary_path = args.out.join("volatility.csv");
    write_file(&summary_path, |w| Ok(write_summary(&summary, w)?))?;
    manifest.output(&summary_path);

    manifest.detail("blocks", outcome.blocks.len() as i64);
    manifest.detail("volatility", vol.clone());
    manifest.detail("benchmark", class.clone());
    manifest.write(&args.out, &cfg)?;
    println!("{} blocks, volatility {} ({class})", outcome.blocks.len(), if vol.is_empty() { "n/a" } else { &vol });
    Ok(())
}
