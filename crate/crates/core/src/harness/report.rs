use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ClusterMethod, ExperimentConfig};
use super::experiment::{load_cells, CellRecord, ClusteringOutcome, CELLS_FILE};
use crate::cluster::CviRow;
use crate::error::{Error, Result};
use crate::features::{CATALOG_A, CATALOG_B, CATALOG_VERSION};
use crate::forecast::{Architecture, INTERPRETATION};
use crate::metrics::{weighted_total, ClusterWeights, ErrorTriple, Metric};

pub const REPORT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub method: ClusterMethod,
    pub k: usize,
    pub sizes: Vec<usize>,
    pub seconds: f64,
    pub cvi: Vec<CviRow>,
}

/// Fold-averaged errors of one model at one K on one cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub method: ClusterMethod,
    pub cluster: usize,
    pub model: Architecture,
    pub k: usize,
    pub cluster_size: usize,
    pub errors: ErrorTriple,
    /// Summed over folds.
    pub seconds: f64,
    pub folds: usize,
}

/// Size-weighted total of one model over all clusters of a method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedTotal {
    pub method: ClusterMethod,
    pub model: Architecture,
    pub k: usize,
    pub sizes: Vec<usize>,
    pub per_cluster: Vec<ErrorTriple>,
    pub total: ErrorTriple,
    pub seconds: f64,
}

/// Best model per cluster under one metric, combined by size weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Composite {
    pub method: ClusterMethod,
    pub k: usize,
    pub metric: Metric,
    pub models: Vec<Architecture>,
    pub per_cluster: Vec<f64>,
    pub sizes: Vec<usize>,
    pub total: f64,
}

/// Best clustered weighted MAPE against the best unclustered MAPE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub method: ClusterMethod,
    pub k: usize,
    pub unclustered_model: Architecture,
    pub unclustered_mape: f64,
    pub clustered_model: Architecture,
    pub clustered_mape: f64,
    pub composite_mape: f64,
    pub improved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub format_version: u32,
    pub name: String,
    pub fingerprint: String,
    pub interpretation: String,
    pub catalog_version: String,
    pub catalog_a: Vec<String>,
    pub catalog_b: Vec<String>,
    pub config: ExperimentConfig,
    pub assumptions: Vec<String>,
    pub clustering: Vec<ClusterSummary>,
    pub cells: Vec<CellResult>,
    pub totals: Vec<WeightedTotal>,
    pub composites: Vec<Composite>,
    pub comparisons: Vec<Comparison>,
}

fn assumptions(cfg: &ExperimentConfig) -> Vec<String> {
    let mut a = vec![
        format!(
            "clustering columns: {:?}{}",
            cfg.cluster_columns(),
            if cfg.clustering.columns.is_empty() { " (defaulted to the target)" } else { "" }
        ),
        format!("minimum cluster size {} so every cluster supports {} folds", cfg.min_cluster_size(), cfg.folds),
        format!(
            "training: H = {}, w = {}, lr = {}, {} epochs, batch {}, lr decay {}",
            cfg.training.hidden,
            cfg.training.window,
            cfg.training.learning_rate,
            cfg.training.epochs,
            cfg.training.batch_size,
            cfg.training.lr_decay
        ),
        format!("forecast target is value K (1-based) of each series; the first {} values are visible", cfg.n_train),
    ];
    if let Some(r) = cfg.clustering.dtw_radius {
        a.push(format!("DTW restricted to a band of radius {r}"));
    }
    a
}

fn find<'a>(cells: &'a [CellResult], method: ClusterMethod, cluster: usize, model: Architecture, k: usize) -> Result<&'a CellResult> {
    cells
        .iter()
        .find(|c| c.method == method && c.cluster == cluster && c.model == model && c.k == k)
        .ok_or_else(|| Error::Config(format!("missing results for {method} cluster {cluster} {model} K = {k}")))
}

/// Aggregates completed cells. Every (method, cluster, model, K) must have
/// all its folds.
pub fn assemble_report(cfg: &ExperimentConfig, outcomes: &[ClusteringOutcome], cells: &[CellRecord]) -> Result<ErrorReport> {
    let mut groups: BTreeMap<(ClusterMethod, usize, Architecture, usize), Vec<&CellRecord>> = BTreeMap::new();
    for c in cells {
        groups
            .entry((c.key.method, c.key.cluster, c.key.model, c.key.k))
            .or_default()
            .push(c);
    }
    let mut results = Vec::new();
    for ((method, cluster, model, k), group) in groups {
        if group.len() != cfg.folds {
            return Err(Error::Config(format!(
                "{method} cluster {cluster} {model} K = {k}: {} of {} folds present",
                group.len(),
                cfg.folds
            )));
        }
        let triples: Vec<ErrorTriple> = group.iter().map(|c| c.errors).collect();
        results.push(CellResult {
            method,
            cluster,
            model,
            k,
            cluster_size: group[0].cluster_size,
            errors: ErrorTriple::mean(&triples)?,
            seconds: group.iter().map(|c| c.seconds).sum(),
            folds: group.len(),
        });
    }

    let mut totals = Vec::new();
    let mut composites = Vec::new();
    for o in outcomes {
        let weights = ClusterWeights::new(o.assignment.sizes.clone())?;
        for &k in &cfg.horizons {
            for &model in &cfg.models {
                let parts: Vec<&CellResult> = (0..o.assignment.k)
                    .map(|c| find(&results, o.method, c, model, k))
                    .collect::<Result<_>>()?;
                let per = |m: Metric| parts.iter().map(|p| p.errors.get(m)).collect::<Vec<_>>();
                totals.push(WeightedTotal {
                    method: o.method,
                    model,
                    k,
                    sizes: o.assignment.sizes.clone(),
                    per_cluster: parts.iter().map(|p| p.errors).collect(),
                    total: ErrorTriple {
                        mae: weighted_total(&weights, &per(Metric::Mae))?,
                        rmse: weighted_total(&weights, &per(Metric::Rmse))?,
                        mape: weighted_total(&weights, &per(Metric::Mape))?,
                    },
                    seconds: parts.iter().map(|p| p.seconds).sum(),
                });
            }
            for metric in Metric::ALL {
                let mut models = Vec::new();
                let mut values = Vec::new();
                for c in 0..o.assignment.k {
                    let best = cfg
                        .models
                        .iter()
                        .map(|&m| find(&results, o.method, c, m, k))
                        .collect::<Result<Vec<_>>>()?
                        .into_iter()
                        .min_by(|a, b| a.errors.get(metric).total_cmp(&b.errors.get(metric)))
                        .expect("models non-empty");
                    models.push(best.model);
                    values.push(best.errors.get(metric));
                }
                composites.push(Composite {
                    method: o.method,
                    k,
                    metric,
                    total: weighted_total(&weights, &values)?,
                    models,
                    per_cluster: values,
                    sizes: o.assignment.sizes.clone(),
                });
            }
        }
    }

    let mut comparisons = Vec::new();
    let best_total = |method: ClusterMethod, k: usize| {
        totals
            .iter()
            .filter(|t| t.method == method && t.k == k)
            .min_by(|a, b| a.total.mape.total_cmp(&b.total.mape))
    };
    for o in outcomes.iter().filter(|o| o.method != ClusterMethod::None) {
        for &k in &cfg.horizons {
            let (Some(base), Some(clus)) = (best_total(ClusterMethod::None, k), best_total(o.method, k)) else {
                continue;
            };
            let composite = composites
                .iter()
                .find(|c| c.method == o.method && c.k == k && c.metric == Metric::Mape)
                .map(|c| c.total)
                .unwrap_or(f64::NAN);
            comparisons.push(Comparison {
                method: o.method,
                k,
                unclustered_model: base.model,
                unclustered_mape: base.total.mape,
                clustered_model: clus.model,
                clustered_mape: clus.total.mape,
                composite_mape: composite,
                improved: clus.total.mape <= base.total.mape,
            });
        }
    }

    Ok(ErrorReport {
        format_version: REPORT_FORMAT_VERSION,
        name: cfg.name.clone(),
        fingerprint: cfg.fingerprint(),
        interpretation: INTERPRETATION.into(),
        catalog_version: CATALOG_VERSION.into(),
        catalog_a: CATALOG_A.iter().map(|s| s.to_string()).collect(),
        catalog_b: CATALOG_B.iter().map(|s| s.to_string()).collect(),
        config: cfg.clone(),
        assumptions: assumptions(cfg),
        clustering: outcomes
            .iter()
            .map(|o| ClusterSummary {
                method: o.method,
                k: o.assignment.k,
                sizes: o.assignment.sizes.clone(),
                seconds: o.seconds,
                cvi: o.table.clone(),
            })
            .collect(),
        cells: results,
        totals,
        composites,
        comparisons,
    })
}

impl ErrorReport {
    /// Largest gap between a stored weighted total and its recomputation
    /// from the per-cluster cells.
    pub fn weighted_total_residual(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for t in &self.totals {
            let w = ClusterWeights::new(t.sizes.clone())?;
            for m in Metric::ALL {
                let parts: Vec<f64> = (0..t.sizes.len())
                    .map(|c| find(&self.cells, t.method, c, t.model, t.k).map(|r| r.errors.get(m)))
                    .collect::<Result<_>>()?;
                worst = worst.max((weighted_total(&w, &parts)? - t.total.get(m)).abs());
            }
        }
        Ok(worst)
    }
}

fn fmt_triple(e: &ErrorTriple) -> String {
    format!("{:>12.2} {:>12.2} {:>8.2}", e.mae, e.rmse, e.mape)
}

/// Plain-text tables: one grid per method and cluster (models down, K
/// across), weighted totals, composites and the clustered-vs-unclustered
/// comparison with `>>` marking the headline lines.
pub fn render_summary(r: &ErrorReport) -> String {
    let mut s = String::new();
    let cfg = &r.config;
    let _ = writeln!(s, "Experiment {} ({})", r.name, r.fingerprint);
    let _ = writeln!(s, "{}; {}", r.interpretation, r.catalog_version);
    let _ = writeln!(s, "catalog A: {}", r.catalog_a.join(", "));
    let _ = writeln!(s, "catalog B: {}", r.catalog_b.join(", "));
    for a in &r.assumptions {
        let _ = writeln!(s, "assumption: {a}");
    }

    let _ = writeln!(s, "\nClustering");
    let _ = writeln!(s, "{:<10} {:>3} {:>10}  sizes", "method", "k", "seconds");
    for c in &r.clustering {
        let _ = writeln!(s, "{:<10} {:>3} {:>10.3}  {:?}", c.method.name(), c.k, c.seconds, c.sizes);
        for row in &c.cvi {
            let _ = writeln!(
                s,
                "    k={} silhouette {:.4} dunn {:.4} gamma {:.4} sizes {:?}{}",
                row.k,
                row.silhouette,
                row.dunn,
                row.gamma,
                row.sizes,
                if row.eligible { "" } else { " (too small)" }
            );
        }
    }

    for c in &r.clustering {
        for cl in 0..c.k {
            let _ = writeln!(s, "\nForecasting results: {} cluster {} ({} records)", c.method.name(), cl + 1, c.sizes[cl]);
            let _ = writeln!(s, "{:<6} {:>5} {:>12} {:>12} {:>8} {:>10}", "model", "K", "MAE", "RMSE", "MAPE", "seconds");
            for &m in &cfg.models {
                for &k in &cfg.horizons {
                    if let Ok(x) = find(&r.cells, c.method, cl, m, k) {
                        let _ = writeln!(s, "{:<6} {:>5} {} {:>10.2}", m.name(), k, fmt_triple(&x.errors), x.seconds);
                    }
                }
            }
        }
    }

    let _ = writeln!(s, "\nWeighted totals");
    let _ = writeln!(s, "{:<10} {:<6} {:>5} {:>12} {:>12} {:>8} {:>10}", "method", "model", "K", "MAE", "RMSE", "MAPE", "seconds");
    for t in &r.totals {
        let _ = writeln!(s, "{:<10} {:<6} {:>5} {} {:>10.2}", t.method.name(), t.model.name(), t.k, fmt_triple(&t.total), t.seconds);
    }

    let _ = writeln!(s, "\nBest model per cluster");
    for c in &r.composites {
        let models: Vec<&str> = c.models.iter().map(|m| m.name()).collect();
        let _ = writeln!(
            s,
            "{:<10} K={:<4} {:<5} {:>12.2}  models {:?} sizes {:?}",
            c.method.name(),
            c.k,
            c.metric.name(),
            c.total,
            models,
            c.sizes
        );
    }

    if !r.comparisons.is_empty() {
        let _ = writeln!(s, "\nClustered vs unclustered (best model, MAPE)");
        for c in &r.comparisons {
            let _ = writeln!(
                s,
                ">> {} K={}: clustered {:.3} ({}) vs unclustered {:.3} ({}); best-per-cluster {:.3}; {}",
                c.method.name(),
                c.k,
                c.clustered_mape,
                c.clustered_model.name(),
                c.unclustered_mape,
                c.unclustered_model.name(),
                c.composite_mape,
                if c.improved { "clustering helps" } else { "clustering does not help" }
            );
        }
    }
    s
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    Ok(csv::Writer::from_path(path)?)
}

/// Writes every report artifact into `dir`.
pub fn write_report(r: &ErrorReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut w = csv_writer(&dir.join("results.csv"))?;
    w.write_record(["method", "cluster", "cluster_size", "model", "k", "mae", "rmse", "mape", "seconds", "folds"])?;
    for c in &r.cells {
        w.write_record([
            c.method.name().to_string(),
            c.cluster.to_string(),
            c.cluster_size.to_string(),
            c.model.name().to_string(),
            c.k.to_string(),
            c.errors.mae.to_string(),
            c.errors.rmse.to_string(),
            c.errors.mape.to_string(),
            c.seconds.to_string(),
            c.folds.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(dir, e))?;

    let mut w = csv_writer(&dir.join("totals.csv"))?;
    w.write_record(["method", "model", "k", "sizes", "mae", "rmse", "mape", "seconds"])?;
    for t in &r.totals {
        w.write_record([
            t.method.name().to_string(),
            t.model.name().to_string(),
            t.k.to_string(),
            join(&t.sizes),
            t.total.mae.to_string(),
            t.total.rmse.to_string(),
            t.total.mape.to_string(),
            t.seconds.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(dir, e))?;

    let mut w = csv_writer(&dir.join("composites.csv"))?;
    w.write_record(["method", "k", "metric", "models", "per_cluster", "sizes", "total"])?;
    for c in &r.composites {
        let models: Vec<&str> = c.models.iter().map(|m| m.name()).collect();
        w.write_record([
            c.method.name().to_string(),
            c.k.to_string(),
            c.metric.name().to_string(),
            models.join(";"),
            join(&c.per_cluster),
            join(&c.sizes),
            c.total.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(dir, e))?;

    let mut w = csv_writer(&dir.join("clustering.csv"))?;
    w.write_record(["method", "k", "sizes", "seconds", "candidate_k", "silhouette", "dunn", "gamma", "eligible"])?;
    for c in &r.clustering {
        if c.cvi.is_empty() {
            w.write_record([c.method.name(), &c.k.to_string(), &join(&c.sizes), &c.seconds.to_string(), "", "", "", "", ""])?;
        }
        for row in &c.cvi {
            w.write_record([
                c.method.name().to_string(),
                c.k.to_string(),
                join(&c.sizes),
                c.seconds.to_string(),
                row.k.to_string(),
                row.silhouette.to_string(),
                row.dunn.to_string(),
                row.gamma.to_string(),
                row.eligible.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(dir, e))?;

    let mut w = csv_writer(&dir.join("comparison.csv"))?;
    w.write_record(["method", "k", "unclustered_model", "unclustered_mape", "clustered_model", "clustered_mape", "composite_mape", "improved"])?;
    for c in &r.comparisons {
        w.write_record([
            c.method.name().to_string(),
            c.k.to_string(),
            c.unclustered_model.name().to_string(),
            c.unclustered_mape.to_string(),
            c.clustered_model.name().to_string(),
            c.clustered_mape.to_string(),
            c.composite_mape.to_string(),
            c.improved.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(dir, e))?;

    let p = dir.join("summary.txt");
    std::fs::write(&p, render_summary(r)).map_err(|e| Error::io(&p, e))?;
    let p = dir.join("report.json");
    std::fs::write(&p, serde_json::to_string_pretty(r)?).map_err(|e| Error::io(&p, e))
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

pub fn load_report(path: &Path) -> Result<ErrorReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Rebuilds the report of an experiment directory from its saved config,
/// clustering outcomes and cell log.
pub fn rebuild_report(dir: &Path) -> Result<ErrorReport> {
    let cfg = ExperimentConfig::load(&dir.join("config.json"))?;
    let p = dir.join("clustering.json");
    let text = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
    let outcomes: Vec<ClusteringOutcome> = serde_json::from_str(&text)?;
    let cells = load_cells(&dir.join(CELLS_FILE), &cfg.fingerprint())?;
    let report = assemble_report(&cfg, &outcomes, &cells)?;
    write_report(&report, dir)?;
    Ok(report)
}
