use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use dts_core::metrics::{benchmark_check, incentive_volatility, rolling_volatility};

use super::{ensure_dir, write_file, write_summary, CommonArgs};
use crate::error::{config_bail, data_bail, data_err, CliResult};
use crate::manifest::ManifestBuilder;

#[derive(Debug, Args)]
pub struct VolatilityArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// CSV with a header row.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Column holding the per-block (or per-day) incentives.
    #[arg(long, default_value = "incentive")]
    pub column: String,
    /// Rolling window, in returns.
    #[arg(long)]
    pub window: Option<usize>,
    /// Output directory; prints to stdout when absent.
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
}

/// Values of `column` with their 1-based data-row numbers.
fn read_column(path: &Path, column: &str) -> CliResult<Vec<(u64, f64)>> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))
        .map_err(data_err)?;
    let headers = r.headers().map_err(data_err)?.clone();
    let Some(idx) = headers.iter().position(|h| h == column) else {
        data_bail!("{}: no column {column:?} (have {:?})", path.display(), headers.iter().collect::<Vec<_>>());
    };
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let row = i as u64 + 1;
        let rec = rec.map_err(data_err)?;
        let cell = rec.get(idx).unwrap_or("");
        let v: f64 = cell.parse().with_context(|| format!("row {row}: {cell:?} is not a number")).map_err(data_err)?;
        out.push((row, v));
    }
    Ok(out)
}

pub fn run(args: VolatilityArgs) -> CliResult<()> {
    let mut manifest = ManifestBuilder::new("volatility");
    let mut cfg = args.common.load()?;
    cfg.resolve_seed(args.common.seed)?;
    if args.window == Some(0) {
        config_bail!("--window must be at least 1");
    }
    let rows = read_column(&args.input, &args.column)?;
    let bad: Vec<String> =
        rows.iter().filter(|(_, v)| !(v.is_finite() && *v > 0.0)).map(|(r, v)| format!("row {r} = {v}")).collect();
    if !bad.is_empty() {
        data_bail!("{} non-positive incentive value(s): {}", bad.len(), bad.join(", "));
    }
    let values: Vec<f64> = rows.iter().map(|(_, v)| *v).collect();
    let vol = incentive_volatility(&values).map_err(data_err)?;
    let class = benchmark_check(vol);
    let rolling = match args.window {
        Some(w) => {
            if w + 1 > values.len() {
                config_bail!("--window {w} needs at least {} values, have {}", w + 1, values.len());
            }
            Some(rolling_volatility(&values, w).map_err(data_err)?)
        }
        None => None,
    };

    let summary =
        [("values", values.len().to_string()), ("volatility", vol.to_string()), ("benchmark", class.to_string())];
    let write_rolling = |w: &mut dyn Write, r: &[f64], window: usize| -> anyhow::Result<()> {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["end_row", "volatility"])?;
        // Window i covers returns i..i+window, i.e. rows i+1..=i+window+1.
        for (i, v) in r.iter().enumerate() {
            w.write_record([(i + window + 1).to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    };

    match &args.out {
        Some(dir) => {
            ensure_dir(dir)?;
            let path = dir.join("volatility.csv");
            write_file(&path, |w| Ok(write_summary(&summary, w)?))?;
            manifest.output(&path);
            if let (Some(r), Some(window)) = (&rolling, args.window) {
                let path = dir.join("rolling.csv");
                write_file(&path, |w| write_rolling(w, r, window))?;
                manifest.output(&path);
            }
            manifest.detail("volatility", vol);
            manifest.detail("benchmark", class.to_string());
            manifest.write(dir, &cfg)?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            write_summary(&summary, &mut stdout)?;
            if let (Some(r), Some(window)) = (&rolling, args.window) {
                writeln!(stdout)?;
                write_rolling(&mut stdout, r, window)?;
            }
        }
    }
    Ok(())
}
