use std::time::Instant;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::frame::{fit_frame, predict_horizon, Frame};
use super::train::ModelSpec;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::metrics::ErrorTriple;
use crate::rng::{derive_seed, stream};
use crate::series::SeriesRecord;

/// Seeded shuffle of `0..n` cut into `n_folds` parts whose sizes differ by
/// at most one (larger parts first).
pub fn fold_partition(n: usize, n_folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if n_folds < 2 {
        return Err(Error::invalid("folds", "need at least 2"));
    }
    if n < n_folds {
        return Err(Error::InsufficientRecords { needed: n_folds, got: n });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut stream(seed, &[0xf01d]));
    let (base, extra) = (n / n_folds, n % n_folds);
    let mut out = Vec::with_capacity(n_folds);
    let mut start = 0;
    for f in 0..n_folds {
        let size = base + usize::from(f < extra);
        let mut part = idx[start..start + size].to_vec();
        part.sort_unstable();
        out.push(part);
        start += size;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub test_ids: Vec<String>,
    pub actuals: Vec<f64>,
    pub predictions: Vec<f64>,
    pub errors: ErrorTriple,
    pub final_loss: Option<f64>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub folds: Vec<FoldResult>,
    pub mean: ErrorTriple,
    pub seconds: f64,
}

/// Trains on every fold but `fold` and scores the held-out records. The
/// model seed is derived from `spec.seed` and the fold index.
pub fn run_fold(spec: &ModelSpec, frame: &Frame, records: &[&SeriesRecord], folds: &[Vec<usize>], fold: usize) -> Result<FoldResult> {
    let start = Instant::now();
    let test = folds.get(fold).ok_or(Error::OutOfRange {
        index: fold,
        len: folds.len(),
    })?;
    let train: Vec<&SeriesRecord> = folds
        .iter()
        .enumerate()
        .filter(|&(f, _)| f != fold)
        .flat_map(|(_, part)| part.iter().map(|&i| records[i]))
        .collect();
    let model = fit_frame(&spec.with_seed(derive_seed(spec.seed, &[fold as u64])), frame, &train)?;
    let mut actuals = Vec::with_capacity(test.len());
    let mut predictions = Vec::with_capacity(test.len());
    for &i in test {
        actuals.push(frame.query(records[i])?.1);
        predictions.push(predict_horizon(&model, records[i], frame.n_train, frame.k)?);
    }
    Ok(FoldResult {
        fold,
        test_ids: test.iter().map(|&i| records[i].id.clone()).collect(),
        errors: ErrorTriple::compute(&actuals, &predictions)?,
        actuals,
        predictions,
        final_loss: model.history.last().copied(),
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Record-level k-fold cross-validation of one model at one horizon.
pub fn cross_validate(
    spec: &ModelSpec,
    frame: &Frame,
    records: &[&SeriesRecord],
    n_folds: usize,
    seed: u64,
    exec: Execution,
) -> Result<CvResult> {
    let start = Instant::now();
    let folds = fold_partition(records.len(), n_folds, seed)?;
    let results = exec::map_range(exec, n_folds, |f| run_fold(spec, frame, records, &folds, f));
    let folds: Vec<FoldResult> = results.into_iter().collect::<Result<_>>()?;
    let triples: Vec<ErrorTriple> = folds.iter().map(|f| f.errors).collect();
    Ok(CvResult {
        mean: ErrorTriple::mean(&triples)?,
        folds,
        seconds: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{generate_dataset, GenConfig};
    use crate::forecast::Architecture;
    use proptest::prelude::*;

    #[test]
    fn paper_fold_sizes() {
        let f = fold_partition(400, 5, 1).unwrap();
        assert_eq!(f.iter().map(Vec::len).collect::<Vec<_>>(), vec![80; 5]);
        assert_eq!(f, fold_partition(400, 5, 1).unwrap());
        assert_ne!(f, fold_partition(400, 5, 2).unwrap());
        assert!(matches!(fold_partition(3, 5, 0), Err(Error::InsufficientRecords { .. })));
    }

    proptest! {
        #[test]
        fn folds_partition(n in 5usize..200, k in 2usize..6, seed in 0u64..100) {
            let f = fold_partition(n, k, seed).unwrap();
            let mut all: Vec<usize> = f.iter().flatten().copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
            let sizes: Vec<usize> = f.iter().map(Vec::len).collect();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        }
    }

    #[test]
    fn scores_held_out_records_only() {
        let cfg = GenConfig {
            n_records: 10,
            length: 40,
            n_spikes: 0,
            n_zeros: 0,
            ..GenConfig::full()
        };
        let (ds, _) = generate_dataset(&cfg).unwrap();
        let refs: Vec<&SeriesRecord> = ds.records.iter().collect();
        let frame = Frame {
            n_train: 20,
            k: 30,
            window: 5,
            inputs: vec!["gas".into()],
            target: "gas".into(),
        };
        let spec = ModelSpec {
            hidden: 4,
            window: 5,
            epochs: 2,
            ..ModelSpec::new(Architecture::M1)
        };
        let cv = cross_validate(&spec, &frame, &refs, 5, 3, Execution::Parallel).unwrap();
        let seq = cross_validate(&spec, &frame, &refs, 5, 3, Execution::Sequential).unwrap();
        assert_eq!(cv.folds.iter().map(|f| f.errors).collect::<Vec<_>>(), seq.folds.iter().map(|f| f.errors).collect::<Vec<_>>());
        let parts = fold_partition(10, 5, 3).unwrap();
        let mut seen = Vec::new();
        for (f, part) in cv.folds.iter().zip(&parts) {
            let ids: Vec<String> = part.iter().map(|&i| ds.records[i].id.clone()).collect();
            assert_eq!(f.test_ids, ids);
            for (id, a) in f.test_ids.iter().zip(&f.actuals) {
                let r = ds.records.iter().find(|r| &r.id == id).unwrap();
                assert_eq!(*a, r.values("gas").unwrap()[29]);
            }
            seen.extend(ids);
        }
        seen.sort();
        assert_eq!(seen, ds.records.iter().map(|r| r.id.clone()).collect::<Vec<_>>());
        let mean_mae = cv.folds.iter().map(|f| f.errors.mae).sum::<f64>() / 5.0;
        assert!((cv.mean.mae - mean_mae).abs() < 1e-9);
    }
}
