use std::collections::BTreeSet;
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{CleanScope, ClusterMethod, DataSource, ExperimentConfig};
use super::io::{load_dataset, save_dataset};
use super::report::{assemble_report, write_report, ErrorReport};
use crate::cluster::{select_k, ClusterAssignment, ClusterInput, CviRow, SelectConfig};
use crate::datagen::generate_dataset_with;
use crate::distance::{distance_matrix_with, DistanceMatrix, DistanceMetric, LocalCost, PointSeq};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::features::{build_feature_matrix, Catalog};
use crate::forecast::{fold_partition, run_fold, Architecture, Frame};
use crate::metrics::ErrorTriple;
use crate::preprocess::{clean_series, impute, DetectorConfig};
use crate::rng::derive_seed;
use crate::series::{observed, Dataset, SeriesRecord};

pub const CELLS_FILE: &str = "cells.jsonl";

/// Loads or generates the configured dataset.
pub fn load_data(cfg: &ExperimentConfig, exec: Execution) -> Result<Dataset> {
    let ds = match &cfg.data {
        DataSource::Generate(g) => generate_dataset_with(g, exec)?.0,
        DataSource::Path { path } => load_dataset(path)?.0,
    };
    cfg.validate_schema(&ds.schema)?;
    Ok(ds)
}

/// One value changed by preprocessing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleaningEntry {
    pub record_id: String,
    pub column: String,
    pub index: usize,
    /// `None` for an imputed missing value.
    pub original: Option<f64>,
    pub replacement: f64,
}

/// Imputes missing values and (if enabled) replaces detected outliers in
/// the configured columns. Missing values in the other columns are imputed
/// too so every model input is complete.
pub fn prepare(cfg: &ExperimentConfig, ds: &Dataset, exec: Execution) -> Result<(Dataset, Vec<CleaningEntry>)> {
    let p = &cfg.preprocess;
    let det = DetectorConfig {
        span: p.span,
        period: p.period,
    };
    let to_clean: Vec<String> = match p.scope {
        CleanScope::All => ds.schema.columns.clone(),
        CleanScope::Target => vec![cfg.target.clone()],
    };
    let out = exec::map_slice(exec, &ds.records, |r| {
        let mut rec = r.clone();
        let mut log = Vec::new();
        for (name, col) in rec.measurements.iter_mut() {
            let mut values = impute(col, p.impute)?;
            for (i, v) in col.iter().enumerate() {
                if v.is_none() {
                    log.push(CleaningEntry {
                        record_id: r.id.clone(),
                        column: name.clone(),
                        index: i,
                        original: None,
                        replacement: values[i],
                    });
                }
            }
            if p.clean && to_clean.contains(name) {
                let (cleaned, report) = clean_series(&values, &det)?;
                for (&i, &rep) in report.flagged.iter().zip(&report.replacements) {
                    log.push(CleaningEntry {
                        record_id: r.id.clone(),
                        column: name.clone(),
                        index: i,
                        original: Some(values[i]),
                        replacement: rep,
                    });
                }
                values = cleaned;
            }
            *col = observed(&values);
        }
        Ok::<_, Error>((rec, log))
    });
    let mut records = Vec::with_capacity(ds.len());
    let mut log = Vec::new();
    for o in out {
        let (r, l) = o?;
        records.push(r);
        log.extend(l);
    }
    Ok((Dataset::new(records, ds.schema.clone(), ds.seed)?, log))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringOutcome {
    pub method: ClusterMethod,
    pub assignment: ClusterAssignment,
    /// CVI values for every candidate k (empty without clustering).
    pub table: Vec<CviRow>,
    /// Distance or feature computation plus clustering.
    pub seconds: f64,
}

fn record_sequence(r: &SeriesRecord, columns: &[String]) -> Result<Vec<f64>> {
    let cols: Vec<Vec<f64>> = columns.iter().map(|c| r.values(c)).collect::<Result<_>>()?;
    let len = cols[0].len();
    Ok((0..len).flat_map(|t| cols.iter().map(move |c| c[t])).collect())
}

/// DTW distances between records over the given columns (multivariate
/// points when more than one).
pub fn dtw_matrix(ds: &Dataset, columns: &[String], radius: Option<usize>, exec: Execution) -> Result<DistanceMatrix> {
    let flat: Vec<Vec<f64>> = exec::map_slice(exec, &ds.records, |r| record_sequence(r, columns))
        .into_iter()
        .collect::<Result<_>>()?;
    let seqs: Vec<PointSeq> = flat.iter().map(|f| PointSeq::new(f, columns.len())).collect::<Result<_>>()?;
    let cost = LocalCost::Absolute;
    let metric = match radius {
        Some(radius) => DistanceMetric::DtwBanded { radius, cost },
        None => DistanceMetric::Dtw { cost },
    };
    distance_matrix_with(&seqs, metric, exec)
}

pub fn cluster_dataset(cfg: &ExperimentConfig, ds: &Dataset, method: ClusterMethod, exec: Execution) -> Result<ClusteringOutcome> {
    let start = Instant::now();
    let n = ds.len();
    let min_size = cfg.min_cluster_size();
    let k_max = cfg.clustering.k_max.min(n / min_size.max(1));
    if method == ClusterMethod::None || k_max < cfg.clustering.k_min {
        if method != ClusterMethod::None {
            log::warn!("{method}: {n} records cannot form {} clusters of {min_size}; using one cluster", cfg.clustering.k_min);
        }
        return Ok(ClusteringOutcome {
            method,
            assignment: ClusterAssignment::single(n)?,
            table: Vec::new(),
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    let select = SelectConfig {
        k_min: cfg.clustering.k_min,
        k_max,
        seed: derive_seed(cfg.seed, &[0xc1]),
        min_cluster_size: min_size,
        ..SelectConfig::default()
    };
    let columns = cfg.cluster_columns();
    let sel = match method {
        ClusterMethod::Dtw => {
            let d = dtw_matrix(ds, &columns, cfg.clustering.dtw_radius, exec)?;
            let input = ClusterInput::Distances {
                dmatrix: &d,
                linkage: cfg.clustering.linkage,
            };
            select_k(input, &select, exec)?
        }
        ClusterMethod::FeatureA | ClusterMethod::FeatureB => {
            let catalog = if method == ClusterMethod::FeatureA { Catalog::A } else { Catalog::B };
            let fm = build_feature_matrix(ds, catalog, &columns, exec)?;
            for w in &fm.warnings {
                log::warn!("{w}");
            }
            let d = DistanceMatrix::from_rows(&fm.standardized, exec)?;
            let input = ClusterInput::Features {
                rows: &fm.standardized,
                dmatrix: &d,
            };
            select_k(input, &select, exec)?
        }
        ClusterMethod::None => unreachable!(),
    };
    Ok(ClusteringOutcome {
        method,
        assignment: sel.assignment,
        table: sel.table,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// One (method, cluster, model, K, fold) unit of work.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub method: ClusterMethod,
    pub cluster: usize,
    pub model: Architecture,
    pub k: usize,
    pub fold: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub fingerprint: String,
    #[serde(flatten)]
    pub key: CellKey,
    pub cluster_size: usize,
    pub test_ids: Vec<String>,
    pub errors: ErrorTriple,
    pub final_loss: Option<f64>,
    pub seconds: f64,
}

/// Completed cells for this fingerprint; lines from other configurations
/// or truncated by a crash are skipped.
pub fn load_cells(path: &Path, fingerprint: &str) -> Result<Vec<CellRecord>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for line in BufReader::new(f).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        match serde_json::from_str::<CellRecord>(&line) {
            Ok(c) if c.fingerprint == fingerprint => out.push(c),
            Ok(_) => {}
            Err(e) => log::warn!("skipping unreadable cell line in {}: {e}", path.display()),
        }
    }
    Ok(out)
}

/// Cluster `c` of an assignment gets partition seed `[c]` and model seed
/// `[c, model, K]`, so a single-cluster assignment reproduces the
/// unclustered cells exactly.
fn compute_cell(cfg: &ExperimentConfig, ds: &Dataset, members: &[usize], key: CellKey, fp: &str) -> Result<CellRecord> {
    let records: Vec<&SeriesRecord> = members.iter().map(|&i| &ds.records[i]).collect();
    let folds = fold_partition(records.len(), cfg.folds, derive_seed(cfg.seed, &[key.cluster as u64]))?;
    let frame = Frame {
        n_train: cfg.n_train,
        k: key.k,
        window: cfg.training.window,
        inputs: cfg.inputs.clone(),
        target: cfg.target.clone(),
    };
    let seed = derive_seed(cfg.seed, &[key.cluster as u64, key.model.index() as u64, key.k as u64]);
    let spec = cfg.training.spec(key.model, seed);
    let fold = run_fold(&spec, &frame, &records, &folds, key.fold)?;
    Ok(CellRecord {
        fingerprint: fp.to_string(),
        key,
        cluster_size: members.len(),
        test_ids: fold.test_ids,
        errors: fold.errors,
        final_loss: fold.final_loss,
        seconds: fold.seconds,
    })
}

/// Runs every missing cell, appending each to `cells.jsonl` as it
/// completes. Honors `stop_after`.
pub fn run_cells(cfg: &ExperimentConfig, ds: &Dataset, outcomes: &[ClusteringOutcome], exec: Execution) -> Result<Vec<CellRecord>> {
    let fp = cfg.fingerprint();
    let path = cfg.out_dir.join(CELLS_FILE);
    let mut done = load_cells(&path, &fp)?;
    let have: BTreeSet<CellKey> = done.iter().map(|c| c.key).collect();
    let mut todo: Vec<(CellKey, Vec<usize>)> = Vec::new();
    for o in outcomes {
        for c in 0..o.assignment.k {
            let members = o.assignment.members(c);
            for &model in &cfg.models {
                for &k in &cfg.horizons {
                    for fold in 0..cfg.folds {
                        let key = CellKey {
                            method: o.method,
                            cluster: c,
                            model,
                            k,
                            fold,
                        };
                        if !have.contains(&key) {
                            todo.push((key, members.clone()));
                        }
                    }
                }
            }
        }
    }
    let interrupted = match cfg.stop_after {
        Some(n) if n < todo.len() => {
            todo.truncate(n);
            true
        }
        _ => false,
    };
    log::info!("{} cells cached, {} to run", done.len(), todo.len());
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&path)
        .map_err(|e| Error::io(&path, e))?;
    let sink = Mutex::new(file);
    let results = exec::map_slice(exec, &todo, |(key, members)| {
        let cell = compute_cell(cfg, ds, members, *key, &fp)?;
        let line = serde_json::to_string(&cell)? + "\n";
        let mut f = sink.lock().expect("cell sink poisoned");
        f.write_all(line.as_bytes()).and_then(|_| f.flush()).map_err(|e| Error::io(&path, e))?;
        log::debug!("cell {key:?}: {:?}", cell.errors);
        Ok::<_, Error>(cell)
    });
    for r in results {
        done.push(r?);
    }
    if interrupted {
        return Err(Error::Interrupted { completed: todo.len() });
    }
    done.sort_by_key(|c| c.key);
    done.dedup_by_key(|c| c.key);
    Ok(done)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)?).map_err(|e| Error::io(path, e))
}

/// Clusters, trains and reports on an already prepared dataset.
pub fn run_prepared(cfg: &ExperimentConfig, ds: &Dataset, exec: Execution) -> Result<ErrorReport> {
    cfg.validate()?;
    cfg.validate_schema(&ds.schema)?;
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    cfg.save(&cfg.out_dir.join("config.json"))?;
    let mut outcomes = Vec::new();
    for &m in &cfg.clustering.methods {
        let o = cluster_dataset(cfg, ds, m, exec)?;
        log::info!("{m}: k = {} sizes {:?} in {:.2} s", o.assignment.k, o.assignment.sizes, o.seconds);
        let ids: Vec<String> = ds.records.iter().map(|r| r.id.clone()).collect();
        let p = cfg.out_dir.join(format!("clusters_{m}.csv"));
        o.assignment
            .write_csv(std::fs::File::create(&p).map_err(|e| Error::io(&p, e))?, &ids)?;
        outcomes.push(o);
    }
    write_json(&cfg.out_dir.join("clustering.json"), &outcomes)?;
    let cells = run_cells(cfg, ds, &outcomes, exec)?;
    let report = assemble_report(cfg, &outcomes, &cells)?;
    write_report(&report, &cfg.out_dir)?;
    Ok(report)
}

/// The full pipeline: data, preprocessing, clustering, cross-validated
/// forecasting and reports under `cfg.out_dir`.
pub fn run_experiment(cfg: &ExperimentConfig, exec: Execution) -> Result<ErrorReport> {
    cfg.validate()?;
    let raw = load_data(cfg, exec)?;
    let (ds, log) = prepare(cfg, &raw, exec)?;
    log::info!("preprocessing changed {} values", log.len());
    if let DataSource::Generate(g) = &cfg.data {
        if !cfg.out_dir.join("data").exists() {
            save_dataset(&raw, &cfg.out_dir.join("data"), Some(g))?;
        }
    }
    run_prepared(cfg, &ds, exec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::GenConfig;

    fn tiny(out: &Path) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::desk();
        cfg.data = DataSource::Generate(GenConfig {
            n_records: 20,
            ..GenConfig::desk()
        });
        cfg.horizons = vec![75];
        cfg.training.window = 6;
        cfg.training.hidden = 4;
        cfg.training.epochs = 2;
        cfg.clustering.k_max = 3;
        cfg.out_dir = out.to_path_buf();
        cfg
    }

    #[test]
    fn prepare_removes_injected_zeros() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny(dir.path());
        let raw = load_data(&cfg, Execution::Parallel).unwrap();
        let (clean, log) = prepare(&cfg, &raw, Execution::Parallel).unwrap();
        assert!(!log.is_empty());
        for r in &clean.records {
            assert!(r.values("gas").unwrap().iter().all(|&v| v > 1000.0));
        }
    }

    #[test]
    fn single_cluster_reproduces_unclustered_cells() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny(dir.path());
        cfg.models = vec![Architecture::M1];
        let ds = load_data(&cfg, Execution::Parallel).unwrap();
        let none = cluster_dataset(&cfg, &ds, ClusterMethod::None, Execution::Parallel).unwrap();
        let forced = ClusteringOutcome {
            method: ClusterMethod::FeatureA,
            ..none.clone()
        };
        let cells = run_cells(&cfg, &ds, &[none, forced], Execution::Parallel).unwrap();
        let (a, b): (Vec<_>, Vec<_>) = cells.iter().partition(|c| c.key.method == ClusterMethod::None);
        assert_eq!(a.len(), 5);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.errors, y.errors);
            assert_eq!(x.test_ids, y.test_ids);
        }
    }

    #[test]
    fn clustering_respects_min_size() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny(dir.path());
        let ds = load_data(&cfg, Execution::Parallel).unwrap();
        for m in [ClusterMethod::Dtw, ClusterMethod::FeatureA, ClusterMethod::FeatureB] {
            let o = cluster_dataset(&cfg, &ds, m, Execution::Parallel).unwrap();
            assert!(o.assignment.sizes.iter().all(|&s| s >= cfg.folds), "{m}: {:?}", o.assignment.sizes);
            assert_eq!(o.assignment.len(), 20);
        }
    }
}
