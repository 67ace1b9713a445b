use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tscluster::datagen::generate_dataset_with;
use tscluster::exec::{self, Execution};
use tscluster::forecast::{cross_validate, fit_frame, Architecture, Frame};
use tscluster::harness::{
    self, cluster_dataset, load_data, prepare, rebuild_report, render_summary, run_ablation, run_experiment,
    save_dataset, save_outliers, ClusterMethod, DataSource, ExperimentConfig,
};
use tscluster::rng::derive_seed;
use tscluster::series::SeriesRecord;
use tscluster::{Error, Result};

#[derive(Parser)]
#[command(name = "tscluster", version, about = "Clustering-assisted time-series forecasting experiments")]
struct Cli {
    /// Seed for data generation and training.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Experiment config (JSON); overrides --profile.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Built-in profile: desk or full.
    #[arg(long, global = true, default_value = "desk")]
    profile: String,
    /// Output directory.
    #[arg(long, global = true, env = "TSCLUSTER_OUT")]
    out: Option<PathBuf>,
    /// Worker threads; 1 runs everything sequentially.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset with its outlier log.
    Generate {
        #[arg(long)]
        records: Option<usize>,
        #[arg(long)]
        length: Option<usize>,
    },
    /// Impute and remove outliers, writing the cleaned dataset and a log.
    Clean {
        /// Dataset directory; generated from the config when absent.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Cluster the (cleaned) dataset and print the validity table.
    Cluster {
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value = "feature_a")]
        method: String,
    },
    /// Cross-validate one model at one horizon on all records.
    Train {
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value = "M1")]
        model: String,
        /// 1-based index of the forecast target.
        #[arg(long)]
        k: usize,
    },
    /// Run the full grid, resuming from earlier cells.
    Experiment {
        #[arg(long)]
        data: Option<PathBuf>,
        /// Stop after this many new cells (to test resumption).
        #[arg(long)]
        stop_after: Option<usize>,
    },
    /// Rebuild reports from a finished experiment directory.
    Report,
    /// Compare multi-column input subsets with M1 and M3.
    Ablation {
        #[arg(long)]
        data: Option<PathBuf>,
    },
}

fn config(cli: &Cli, data: Option<&Path>) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::profile(&cli.profile)?,
    };
    if let Some(seed) = cli.seed {
        cfg.set_seed(seed);
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if let Some(d) = data {
        cfg.data = DataSource::Path { path: d.to_path_buf() };
    }
    Ok(cfg)
}

fn ids(records: &[SeriesRecord]) -> Vec<String> {
    records.iter().map(|r| r.id.clone()).collect()
}

fn mkdir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn run(cli: &Cli, exec: Execution) -> Result<()> {
    match &cli.command {
        Command::Generate { records, length } => {
            let cfg = config(cli, None)?;
            let DataSource::Generate(mut g) = cfg.data else {
                return Err(Error::Config("the config reads its data from a file; nothing to generate".into()));
            };
            if let Some(n) = records {
                g.n_records = *n;
            }
            if let Some(l) = length {
                g.length = *l;
            }
            g.validate()?;
            let (ds, log) = generate_dataset_with(&g, exec)?;
            let dir = cfg.out_dir.join("data");
            save_dataset(&ds, &dir, Some(&g))?;
            save_outliers(&log, &dir.join(harness::io::OUTLIER_FILE))?;
            println!("wrote {} records of length {} to {}", ds.len(), ds.schema.length, dir.display());
        }
        Command::Clean { data } => {
            let cfg = config(cli, data.as_deref())?;
            let raw = load_data(&cfg, exec)?;
            let (clean, log) = prepare(&cfg, &raw, exec)?;
            let dir = cfg.out_dir.join("clean");
            save_dataset(&clean, &dir, None)?;
            let mut w = csv::Writer::from_path(dir.join("cleaning.csv"))?;
            for e in &log {
                w.serialize(e)?;
            }
            w.flush().map_err(|e| Error::Io { path: dir.clone(), source: e })?;
            let imputed = log.iter().filter(|e| e.original.is_none()).count();
            println!(
                "{} values replaced as outliers, {imputed} imputed; cleaned data in {}",
                log.len() - imputed,
                dir.display()
            );
        }
        Command::Cluster { data, method } => {
            let cfg = config(cli, data.as_deref())?;
            let method: ClusterMethod = method.parse()?;
            let (ds, _) = prepare(&cfg, &load_data(&cfg, exec)?, exec)?;
            let o = cluster_dataset(&cfg, &ds, method, exec)?;
            mkdir(&cfg.out_dir)?;
            let p = cfg.out_dir.join(format!("clusters_{method}.csv"));
            o.assignment.write_csv(
                std::fs::File::create(&p).map_err(|e| Error::Io { path: p.clone(), source: e })?,
                &ids(&ds.records),
            )?;
            println!("{:>3} {:>11} {:>10} {:>10}  sizes", "k", "silhouette", "dunn", "gamma");
            for r in &o.table {
                println!(
                    "{:>3} {:>11.4} {:>10.4} {:>10.4}  {:?}{}",
                    r.k,
                    r.silhouette,
                    r.dunn,
                    r.gamma,
                    r.sizes,
                    if r.eligible { "" } else { " (too small)" }
                );
            }
            println!("{method}: k = {} sizes {:?} in {:.3} s -> {}", o.assignment.k, o.assignment.sizes, o.seconds, p.display());
        }
        Command::Train { data, model, k } => {
            let cfg = config(cli, data.as_deref())?;
            let arch: Architecture = model.parse()?;
            let (ds, _) = prepare(&cfg, &load_data(&cfg, exec)?, exec)?;
            let frame = Frame {
                n_train: cfg.n_train,
                k: *k,
                window: cfg.training.window,
                inputs: cfg.inputs.clone(),
                target: cfg.target.clone(),
            };
            frame.validate(ds.schema.length)?;
            let spec = cfg.training.spec(arch, derive_seed(cfg.seed, &[0, arch.index() as u64, *k as u64]));
            let records: Vec<&SeriesRecord> = ds.records.iter().collect();
            let cv = cross_validate(&spec, &frame, &records, cfg.folds, derive_seed(cfg.seed, &[0]), exec)?;
            for f in &cv.folds {
                println!(
                    "fold {}: MAE {:.2} RMSE {:.2} MAPE {:.3} ({:.2} s)",
                    f.fold, f.errors.mae, f.errors.rmse, f.errors.mape, f.seconds
                );
            }
            println!("mean: MAE {:.2} RMSE {:.2} MAPE {:.3}", cv.mean.mae, cv.mean.rmse, cv.mean.mape);
            let fitted = fit_frame(&spec, &frame, &records)?;
            mkdir(&cfg.out_dir)?;
            let p = cfg.out_dir.join(format!("model_{}_k{k}.json", arch.name()));
            fitted.save(&p)?;
            println!("model fitted on all records saved to {}", p.display());
        }
        Command::Experiment { data, stop_after } => {
            let mut cfg = config(cli, data.as_deref())?;
            if stop_after.is_some() {
                cfg.stop_after = *stop_after;
            }
            let report = run_experiment(&cfg, exec)?;
            print!("{}", render_summary(&report));
            println!("reports written to {}", cfg.out_dir.display());
        }
        Command::Report => {
            let cfg = config(cli, None)?;
            let report = rebuild_report(&cfg.out_dir)?;
            print!("{}", render_summary(&report));
        }
        Command::Ablation { data } => {
            let cfg = config(cli, data.as_deref())?;
            let report = run_ablation(&cfg, exec)?;
            print!("{}", harness::ablation::render_ablation(&report));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let exec = if cli.jobs == Some(1) { Execution::Sequential } else { Execution::Parallel };
    match exec::with_jobs(cli.jobs, || run(&cli, exec)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 1 } else { 2 })
        }
    }
}
