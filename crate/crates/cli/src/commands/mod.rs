pub mod generate;
pub mod optimize;
pub mod proofsize;
pub mod simulate;
pub mod volatility;
pub mod vrp_check;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, ValueEnum};
use dts_core::ingest::{generate, inject_irrational, load_csv};
use dts_core::model::{Priority, Transaction};

use crate::config::RunConfig;
use crate::error::{config_bail, config_err, data_err, CliResult};

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML configuration file; see `dts --print-defaults`.
    #[arg(long, short = 'c')]
    pub config: Option<PathBuf>,
    /// Master seed (overrides the config file and DTS_SEED).
    #[arg(long)]
    pub seed: Option<u64>,
}

impl CommonArgs {
    pub fn load(&self) -> CliResult<RunConfig> {
        RunConfig::load(self.config.as_deref())
    }
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Transaction CSV (id, amount, arrival_time_ms[, fee]).
    #[arg(long, conflicts_with = "synthetic")]
    pub data: Option<PathBuf>,
    /// Generate a seeded synthetic stream instead of reading one.
    #[arg(long)]
    pub synthetic: bool,
    /// Length of the synthetic stream.
    #[arg(long)]
    pub count: Option<usize>,
    /// Apply the configured irrational-fee mix.
    #[arg(long)]
    pub irrational: bool,
}

impl DataArgs {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(p) = &self.data {
            cfg.dataset.path = Some(p.clone());
        }
        if self.synthetic {
            cfg.dataset.path = None;
        }
        if let Some(n) = self.count {
            cfg.dataset.count = n;
        }
        if self.irrational {
            cfg.dataset.irrational = true;
        }
    }

    /// Loads `cfg.dataset.path`, or generates when `--synthetic` was given.
    pub fn load(&self, cfg: &RunConfig) -> CliResult<Vec<Transaction>> {
        let txs = match &cfg.dataset.path {
            Some(path) => load_csv(path, cfg.simulation.commission_ratio)
                .with_context(|| format!("loading {}", path.display()))
                .map_err(data_err)?,
            None if self.synthetic => generate(&cfg.dataset_spec()).map_err(config_err)?,
            None => config_bail!("no dataset: pass --data <csv>, --synthetic, or set dataset.path"),
        };
        if txs.is_empty() {
            return Err(data_err(anyhow::anyhow!("dataset is empty")));
        }
        if cfg.dataset.irrational {
            // Offset keeps the injection stream independent of generation.
            return inject_irrational(&txs, &cfg.dataset.mix, cfg.seed().wrapping_add(1)).map_err(config_err);
        }
        Ok(txs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PriorityArg {
    #[value(alias = "time-based")]
    Time,
    #[value(alias = "fee-based")]
    Fee,
}

impl From<PriorityArg> for Priority {
    fn from(p: PriorityArg) -> Self {
        match p {
            PriorityArg::Time => Priority::TimeBased,
            PriorityArg::Fee => Priority::FeeBased,
        }
    }
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(())
}

/// Creates `path` and hands a buffered writer to `f`.
pub fn write_file<F>(path: &Path, f: F) -> CliResult<()>
where
    F: FnOnce(&mut BufWriter<File>) -> anyhow::Result<()>,
{
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

/// Two-column `key,value` CSV.
pub fn write_summary<W: Write>(rows: &[(&str, String)], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["key", "value"])?;
    for (k, v) in rows {
        w.write_record([*k, v.as_str()])?;
    }
    w.flush()?;
    Ok(())
}
