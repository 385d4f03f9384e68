use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use dts_core::metrics::benchmark_check;
use dts_core::model::{SimulationConfig, StrategyCategory, Transaction};
use dts_core::optimize::{
    constriction_params, experiment_grid, run_optimizer, write_grid_csv, write_trace_csv, Algorithm, DtsObjective,
    OptimizeError, SearchSpace,
};

use super::{ensure_dir, write_file, write_summary, CommonArgs, DataArgs};
use crate::config::RunConfig;
use crate::error::{config_bail, config_err, CliError, CliResult};
use crate::manifest::ManifestBuilder;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgoArg {
    Pso,
    De,
    Ga,
    #[value(alias = "cma-es")]
    Cmaes,
    Gbo,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Pso => Algorithm::Pso,
            AlgoArg::De => Algorithm::De,
            AlgoArg::Ga => Algorithm::Ga,
            AlgoArg::Cmaes => Algorithm::CmaEs,
            AlgoArg::Gbo => Algorithm::Gbo,
        }
    }
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, required_unless_present = "grid", conflicts_with = "grid")]
    pub algo: Option<AlgoArg>,
    /// Strategy category 1-4 (priority x designated small-fee space).
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=4), conflicts_with = "grid")]
    pub category: u8,
    /// Run all 20 (algorithm, category) experiments.
    #[arg(long)]
    pub grid: bool,
    /// Objective evaluations per run.
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long)]
    pub population: Option<usize>,
    /// Worker threads for objective evaluations and grid cells.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output directory.
    #[arg(long, short = 'o')]
    pub out: PathBuf,
}

fn optimize_err(e: OptimizeError) -> CliError {
    match e {
        OptimizeError::EmptyDataset => crate::error::data_err(e),
        other => config_err(other),
    }
}

pub fn run(args: OptimizeArgs) -> CliResult<()> {
    let mut manifest = ManifestBuilder::new("optimize");
    let mut cfg = args.common.load()?;
    args.data.apply(&mut cfg);
    if let Some(b) = args.budget {
        cfg.optimizer.max_evaluations = b;
    }
    if let Some(p) = args.population {
        cfg.optimizer.population = p;
    }
    cfg.resolve_seed(args.common.seed)?;
    if cfg.optimizer.max_evaluations == 0 {
        config_bail!("evaluation budget must be positive");
    }
    let jobs = match args.jobs {
        Some(0) => config_bail!("--jobs must be at least 1"),
        Some(n) => n,
        None => rayon::current_num_threads(),
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(anyhow::Error::from)?;

    let pso = &cfg.optimizer.pso;
    let (w, c1, c2) = constriction_params(pso.k, pso.phi1, pso.phi2).map_err(config_err)?;
    let involves_pso = args.grid || args.algo == Some(AlgoArg::Pso);
    if involves_pso {
        manifest.detail("pso_w", w);
        manifest.detail("pso_c1", c1);
        manifest.detail("pso_c2", c2);
    }

    let txs = args.data.load(&cfg)?;
    let sim = cfg.simulation_config();
    ensure_dir(&args.out)?;
    if args.grid {
        pool.install(|| run_grid(&cfg, &txs, &sim, &args.out, &mut manifest))?;
    } else {
        let algo: Algorithm = args.algo.expect("clap requires --algo without --grid").into();
        let category = StrategyCategory::from_id(args.category).map_err(config_err)?;
        pool.install(|| run_single(&cfg, &txs, &sim, algo, category, &args.out, &mut manifest))?;
    }
    manifest.write(&args.out, &cfg)?;
    if involves_pso {
        println!("PSO constriction: w = {w:.4}, c1 = {c1:.4}, c2 = {c2:.4}");
    }
    Ok(())
}

fn run_single(
    cfg: &RunConfig,
    txs: &[Transaction],
    sim: &SimulationConfig,
    algo: Algorithm,
    category: StrategyCategory,
    out: &Path,
    manifest: &mut ManifestBuilder,
) -> CliResult<()> {
    let space = SearchSpace::with_bounds(category, cfg.bounds.clone());
    let objective = DtsObjective::new(space.clone(), txs, sim).map_err(optimize_err)?;
    let bounds = space.to_bounds().map_err(optimize_err)?;
    let run = run_optimizer(algo, &bounds, &|x: &[f64]| objective.evaluate(x), &cfg.optimizer).map_err(optimize_err)?;

    let trace_path = out.join("trace.csv");
    write_file(&trace_path, |w| Ok(write_trace_csv(&run, w)?))?;
    manifest.output(&trace_path);

    let attrs = space.materialize(&run.best_x);
    let mut rows: Vec<(&str, String)> = vec![
        ("algorithm", algo.label().to_string()),
        ("category", category.to_string()),
        ("A1", attrs.mempool_size.to_string()),
        ("A2", category.priority().to_string()),
        ("A3", if category.designated_space() { "True" } else { "False" }.to_string()),
    ];
    if let (Some(a4), Some(a5)) = (attrs.small_fee_threshold, attrs.small_fee_count) {
        rows.push(("A4", a4.to_string()));
        rows.push(("A5", a5.to_string()));
    }
    rows.extend([
        ("A6", attrs.max_trx_nodes.to_string()),
        ("A7", attrs.scale.to_string()),
        ("A8", attrs.shape.to_string()),
        ("volatility", run.best_value.to_string()),
        ("benchmark", benchmark_check(run.best_value).to_string()),
        ("evaluations", run.evaluations.to_string()),
    ]);
    let best_path = out.join("best.csv");
    write_file(&best_path, |w| Ok(write_summary(&rows, w)?))?;
    manifest.output(&best_path);

    manifest.detail("algorithm", algo.label());
    manifest.detail("category", category.id() as i64);
    manifest.detail("best_volatility", run.best_value);
    manifest.detail("evaluations", run.evaluations as i64);
    println!(
        "{} category {category}: volatility {} after {} evaluations",
        algo.label(),
        run.best_value,
        run.evaluations
    );
    Ok(())
}

fn run_grid(
    cfg: &RunConfig,
    txs: &[Transaction],
    sim: &SimulationConfig,
    out: &Path,
    manifest: &mut ManifestBuilder,
) -> CliResult<()> {
    let rows = experiment_grid(txs, sim, &cfg.optimizer, &cfg.bounds).map_err(optimize_err)?;
    let grid_path = out.join("grid.csv");
    write_file(&grid_path, |w| Ok(write_grid_csv(&rows, w)?))?;
    manifest.output(&grid_path);

    let traces = out.join("traces");
    ensure_dir(&traces)?;
    for r in &rows {
        let path = traces.join(format!("experiment_{:02}.csv", r.experiment));
        write_file(&path, |w| Ok(write_trace_csv(&r.run, w)?))?;
        manifest.output(&path);
    }
    let best = rows.iter().min_by(|a, b| a.volatility.total_cmp(&b.volatility)).expect("grid has 20 rows");
    manifest.detail("best_experiment", best.experiment as i64);
    manifest.detail("best_volatility", best.volatility);
    println!("{} experiments; lowest volatility {} (experiment {})", rows.len(), best.volatility, best.experiment);
    Ok(())
}
