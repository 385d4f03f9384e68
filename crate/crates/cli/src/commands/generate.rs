use std::path::PathBuf;

use clap::Args;
use dts_core::ingest::write_csv;

use super::{ensure_dir, write_file, CommonArgs, DataArgs};
use crate::error::CliResult;
use crate::manifest::ManifestBuilder;

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Number of transactions.
    #[arg(long)]
    pub count: Option<usize>,
    /// Apply the configured irrational-fee mix.
    #[arg(long)]
    pub irrational: bool,
    /// Output directory.
    #[arg(long, short = 'o')]
    pub out: PathBuf,
}

pub fn run(args: GenerateArgs) -> CliResult<()> {
    let mut manifest = ManifestBuilder::new("generate");
    let mut cfg = args.common.load()?;
    let data = DataArgs { data: None, synthetic: true, count: args.count, irrational: args.irrational };
    data.apply(&mut cfg);
    cfg.resolve_seed(args.common.seed)?;
    let txs = data.load(&cfg)?;

    ensure_dir(&args.out)?;
    let path = args.out.join("transactions.csv");
    write_file(&path, |w| Ok(write_csv(&txs, w)?))?;
    manifest.output(&path);
    manifest.detail("transactions", txs.len() as i64);
    manifest.write(&args.out, &cfg)?;
    println!("{} transactions written to {}", txs.len(), path.display());
    Ok(())
}
