use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::config::{ClusterMethod, ExperimentConfig};
use super::experiment::{load_data, prepare, run_prepared};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::forecast::Architecture;
use crate::metrics::ErrorTriple;

/// Models compared across input subsets.
pub const ABLATION_MODELS: [Architecture; 2] = [Architecture::M1, Architecture::M3];

/// Every subset of at least two columns, smaller subsets first and
/// column order within a size.
pub fn column_subsets(columns: &[String]) -> Result<Vec<Vec<String>>> {
    let n = columns.len();
    if n < 2 {
        return Err(Error::NoValidSubsets(n));
    }
    let mut masks: Vec<u32> = (1u32..1 << n).filter(|m| m.count_ones() >= 2).collect();
    let members = |m: u32| (0..n).filter(move |i| m >> i & 1 == 1);
    masks.sort_by_key(|&m| (m.count_ones(), members(m).collect::<Vec<_>>()));
    Ok(masks
        .into_iter()
        .map(|m| members(m).map(|i| columns[i].clone()).collect())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub inputs: Vec<String>,
    pub target_excluded: bool,
    pub model: Architecture,
    pub k: usize,
    pub errors: ErrorTriple,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub target: String,
    pub horizons: Vec<usize>,
    pub rows: Vec<AblationRow>,
}

/// Forecasts the target from each multi-column input subset without
/// clustering. Each subset is a separate, resumable experiment under
/// `out_dir/ablation/<columns>`.
pub fn run_ablation(cfg: &ExperimentConfig, exec: Execution) -> Result<AblationReport> {
    cfg.validate()?;
    let raw = load_data(cfg, exec)?;
    let subsets = column_subsets(&raw.schema.columns)?;
    let (ds, _) = prepare(cfg, &raw, exec)?;
    let mut rows = Vec::new();
    for inputs in subsets {
        let mut sub = cfg.clone();
        sub.name = format!("{}-ablation-{}", cfg.name, inputs.join("+"));
        sub.inputs = inputs.clone();
        sub.models = ABLATION_MODELS.to_vec();
        sub.clustering.methods = vec![ClusterMethod::None];
        sub.out_dir = cfg.out_dir.join("ablation").join(inputs.join("+"));
        let report = run_prepared(&sub, &ds, exec)?;
        let target_excluded = !inputs.contains(&cfg.target);
        for t in report.totals {
            rows.push(AblationRow {
                inputs: inputs.clone(),
                target_excluded,
                model: t.model,
                k: t.k,
                errors: t.total,
                seconds: t.seconds,
            });
        }
    }
    let report = AblationReport {
        target: cfg.target.clone(),
        horizons: cfg.horizons.clone(),
        rows,
    };
    write_ablation(&report, &cfg.out_dir.join("ablation"))?;
    Ok(report)
}

pub fn render_ablation(r: &AblationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "Input subsets forecasting {}", r.target);
    let _ = writeln!(
        s,
        "{:<24} {:<6} {:>5} {:>12} {:>12} {:>8} {:>10}",
        "inputs", "model", "K", "MAE", "RMSE", "MAPE", "seconds"
    );
    for row in &r.rows {
        let mut name = row.inputs.join("+");
        if row.target_excluded {
            name.push_str(" (target-excluded)");
        }
        let _ = writeln!(
            s,
            "{:<24} {:<6} {:>5} {:>12.2} {:>12.2} {:>8.2} {:>10.2}",
            name,
            row.model.name(),
            row.k,
            row.errors.mae,
            row.errors.rmse,
            row.errors.mape,
            row.seconds
        );
    }
    s
}

pub fn write_ablation(r: &AblationReport, dir: &std::path::Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut w = csv::Writer::from_path(dir.join("ablation.csv"))?;
    w.write_record(["inputs", "target_excluded", "model", "k", "mae", "rmse", "mape", "seconds"])?;
    for row in &r.rows {
        w.write_record([
            row.inputs.join("+"),
            row.target_excluded.to_string(),
            row.model.name().to_string(),
            row.k.to_string(),
            row.errors.mae.to_string(),
            row.errors.rmse.to_string(),
            row.errors.mape.to_string(),
            row.seconds.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(dir, e))?;
    let p = dir.join("ablation.txt");
    std::fs::write(&p, render_ablation(r)).map_err(|e| Error::io(&p, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cols(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn subsets_of_three_columns() {
        let s = column_subsets(&cols(&["oil", "water", "gas"])).unwrap();
        assert_eq!(
            s,
            vec![
                cols(&["oil", "water"]),
                cols(&["oil", "gas"]),
                cols(&["water", "gas"]),
                cols(&["oil", "water", "gas"]),
            ]
        );
    }

    #[test]
    fn subset_count_matches_binomial_sum() {
        for n in 2..7 {
            let names: Vec<String> = (0..n).map(|i| format!("c{i}")).collect();
            assert_eq!(column_subsets(&names).unwrap().len(), (1 << n) - 1 - n);
        }
    }

    #[test]
    fn single_column_is_rejected() {
        assert!(matches!(column_subsets(&cols(&["gas"])), Err(Error::NoValidSubsets(1))));
    }
}
