use std::io::Write;
use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use dts_core::verkle::{bandwidth_report, default_scenarios, write_bandwidth_csv, RoundingMode, Scenario};

use super::{ensure_dir, write_file, CommonArgs};
use crate::error::{config_bail, config_err, CliResult};
use crate::manifest::ManifestBuilder;

#[derive(Debug, Args)]
pub struct ProofsizeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated scenarios, `name=n_t` or bare `n_t`. Defaults to the
    /// Bitcoin, XThin, Compact, Graphene and Graphene-DTS block sizes.
    #[arg(long, value_delimiter = ',')]
    pub scenarios: Vec<String>,
    /// Verkle branching factors.
    #[arg(long, value_delimiter = ',', default_values_t = [3u64, 5, 10])]
    pub k: Vec<u64>,
    /// How fractional tree depths become level counts.
    #[arg(long, default_value = "smooth")]
    pub mode: RoundingMode,
    /// Output directory; prints CSV to stdout when absent.
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
}

fn parse_scenario(s: &str) -> anyhow::Result<Scenario> {
    let (name, n) = match s.split_once('=') {
        Some((name, n)) => (name.trim().to_string(), n),
        None => (s.trim().to_string(), s),
    };
    let n_t: u64 = n.trim().replace('_', "").parse().with_context(|| format!("bad scenario {s:?}"))?;
    Ok(Scenario::new(name, n_t))
}

pub fn run(args: ProofsizeArgs) -> CliResult<()> {
    let mut manifest = ManifestBuilder::new("proofsize");
    let mut cfg = args.common.load()?;
    cfg.resolve_seed(args.common.seed)?;
    if let Some(&k) = args.k.iter().find(|&&k| k < 2) {
        config_bail!("branching factor k = {k}; need k >= 2");
    }
    let scenarios = if args.scenarios.is_empty() {
        default_scenarios()
    } else {
        args.scenarios.iter().map(|s| parse_scenario(s)).collect::<anyhow::Result<_>>().map_err(config_err)?
    };
    let rows = bandwidth_report(&scenarios, &args.k, args.mode).map_err(config_err)?;

    match &args.out {
        Some(dir) => {
            ensure_dir(dir)?;
            let path = dir.join("proofsize.csv");
            write_file(&path, |w| Ok(write_bandwidth_csv(&rows, w)?))?;
            manifest.output(&path);
            manifest.detail("mode", args.mode.as_str());
            manifest.write(dir, &cfg)?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            write_bandwidth_csv(&rows, &mut stdout)?;
            stdout.flush()?;
        }
    }
    Ok(())
}
