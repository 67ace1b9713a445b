//! End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
//! the process exits non-zero if any fails.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use tempfile::tempdir;

use tscluster::cluster::{select_k, ClusterInput, Linkage, SelectConfig};
use tscluster::datagen::{generate_dataset, generate_record, GenConfig};
use tscluster::distance::{dtw, dtw_banded, DistanceMatrix, PointSeq};
use tscluster::exec::Execution;
use tscluster::features::{acf, build_feature_matrix, pacf, padded_spectrum, Catalog};
use tscluster::forecast::{gradient_check, Architecture, Dims, Example, Network};
use tscluster::harness::{dtw_matrix, run_experiment, ClusterMethod, ErrorReport, ExperimentConfig, CELLS_FILE};
use tscluster::metrics::{mae, mape, rmse, weighted_total, ClusterWeights, ErrorTriple};
use tscluster::preprocess::{detect_outliers, DetectorConfig};
use tscluster::Error;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn weighted_totals() -> Outcome {
    // (sizes, per-cluster values, printed total, tolerance)
    let cases: [(&[usize], &[f64], f64, f64); 9] = [
        (&[94, 188, 118], &[13492.88, 4028.0, 7891.0], 7391.83, 0.5),
        (&[94, 188, 118], &[14.18, 27.26, 14.35], 20.38, 0.02),
        (&[94, 188, 118], &[10493.94, 3297.35, 5702.11], 5697.73, 0.5),
        (&[142, 258], &[3975.74, 11872.12], 9068.91, 0.05),
        (&[142, 258], &[32.34, 26.55], 28.61, 0.02),
        (&[142, 258], &[3204.0, 8838.86], 6838.48, 0.05),
        (&[230, 170], &[4906.85, 11296.55], 7622.47, 0.02),
        (&[230, 170], &[31.89, 12.81], 23.78, 0.02),
        (&[230, 170], &[3591.33, 7776.63], 5370.08, 0.02),
    ];
    let mut worst: f64 = 0.0;
    for (sizes, values, printed, tol) in cases {
        let got = weighted_total(&ClusterWeights::new(sizes.to_vec()).map_err(|e| e.to_string())?, values)
            .map_err(|e| e.to_string())?;
        // independent: the size-weighted mean written out directly
        let total: usize = sizes.iter().sum();
        let direct: f64 = sizes.iter().zip(values).map(|(&s, v)| s as f64 * v).sum::<f64>() / total as f64;
        ensure((got - direct).abs() < 1e-9, format!("{got} != direct {direct}"))?;
        ensure((got - printed).abs() <= tol, format!("{got:.4} vs {printed} (tol {tol})"))?;
        worst = worst.max((got - printed).abs() / tol);
    }
    Ok(format!("9 totals reproduced; worst |error| / tolerance = {worst:.3}"))
}

/// Minimum cost over every monotone path, enumerated explicitly.
fn dtw_paths(a: &[f64], b: &[f64]) -> f64 {
    fn walk(a: &[f64], b: &[f64], i: usize, j: usize, acc: f64, best: &mut f64) {
        let acc = acc + (a[i] - b[j]).abs();
        if i + 1 == a.len() && j + 1 == b.len() {
            *best = best.min(acc);
            return;
        }
        if i + 1 < a.len() {
            walk(a, b, i + 1, j, acc, best);
        }
        if j + 1 < b.len() {
            walk(a, b, i, j + 1, acc, best);
        }
        if i + 1 < a.len() && j + 1 < b.len() {
            walk(a, b, i + 1, j + 1, acc, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(a, b, 0, 0, 0.0, &mut best);
    best
}

fn random_seq(r: &mut ChaCha8Rng, max_len: usize) -> Vec<f64> {
    let n = r.random_range(1..=max_len);
    (0..n).map(|_| r.random_range(-10.0..10.0)).collect()
}

fn uni(x: &[f64]) -> PointSeq<'_> {
    PointSeq::univariate(x).unwrap()
}

fn dtw_oracle() -> Outcome {
    let mut r = rng(11);
    let pairs = 1500;
    for t in 0..pairs {
        let a = random_seq(&mut r, 8);
        let b = random_seq(&mut r, 8);
        let d = dtw(uni(&a), uni(&b)).map_err(|e| e.to_string())?;
        let oracle = dtw_paths(&a, &b);
        ensure(d == oracle, format!("pair {t}: dtw {d} vs enumeration {oracle}"))?;
        ensure(dtw(uni(&b), uni(&a)).unwrap() == d, format!("pair {t}: asymmetric"))?;
        ensure(dtw(uni(&a), uni(&a)).unwrap() == 0.0, format!("pair {t}: dtw(x, x) != 0"))?;
    }
    Ok(format!("{pairs} pairs equal path enumeration exactly; identity and symmetry hold"))
}

fn banded_dtw() -> Outcome {
    let mut r = rng(12);
    let pairs = 400;
    for t in 0..pairs {
        let a = random_seq(&mut r, 40);
        let b = random_seq(&mut r, 40);
        let full = dtw(uni(&a), uni(&b)).unwrap();
        let wide = dtw_banded(uni(&a), uni(&b), a.len().max(b.len())).unwrap();
        ensure(wide == full, format!("pair {t}: wide band {wide} vs full {full}"))?;
        for radius in [0, 1, 3, 7] {
            let d = dtw_banded(uni(&a), uni(&b), radius).unwrap();
            ensure(d >= full, format!("pair {t}: radius {radius} gives {d} < {full}"))?;
        }
    }
    Ok(format!("{pairs} pairs: wide band equals full DTW; narrow bands never below it"))
}

fn gradient_checks() -> Outcome {
    let seeds = 5;
    let mut worst: f64 = 0.0;
    for arch in Architecture::ALL {
        let d = Dims {
            window: 4,
            input: 2,
            static_dim: if arch.uses_static() { 3 } else { 0 },
            hidden: 4,
        };
        for seed in 0..seeds {
            let mut r = rng(100 + seed);
            let net = Network::init(arch, d, seed).map_err(|e| e.to_string())?;
            let n = 3;
            let windows: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..d.window * d.input).map(|_| StandardNormal.sample(&mut r)).collect())
                .collect();
            let statics: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..d.static_dim).map(|_| StandardNormal.sample(&mut r)).collect())
                .collect();
            let targets: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut r)).collect();
            let batch: Vec<Example> = (0..n)
                .map(|i| Example {
                    window: &windows[i],
                    statics: arch.uses_static().then_some(statics[i].as_slice()),
                })
                .collect();
            let gc = gradient_check(&net, &batch, &targets, 1e-5).map_err(|e| e.to_string())?;
            ensure(
                gc.max_rel_error < 1e-4,
                format!("{arch} seed {seed}: relative error {:.2e} at parameter {}", gc.max_rel_error, gc.worst_param),
            )?;
            worst = worst.max(gc.max_rel_error);
        }
    }
    Ok(format!("7 architectures x {seeds} seeds; worst relative error {worst:.2e}"))
}

fn metric_identities() -> Outcome {
    let mut r = rng(13);
    for t in 0..10_000 {
        let n = r.random_range(1..40);
        let a: Vec<f64> = (0..n).map(|_| r.random_range(-1e3..1e3)).collect();
        let p: Vec<f64> = (0..n).map(|_| r.random_range(-1e3..1e3)).collect();
        let (m, s) = (mae(&a, &p).unwrap(), rmse(&a, &p).unwrap());
        ensure(s >= m * (1.0 - 1e-12), format!("vector {t}: rmse {s} < mae {m}"))?;
    }
    let zero_at = matches!(mape(&[3.0, 0.0, 1.0], &[1.0, 1.0, 1.0]), Err(Error::UndefinedAtZero(1)));
    ensure(zero_at, "mape accepted a zero actual")?;
    let x = [5.0, 6.5, 100.0];
    let perfect = ErrorTriple::compute(&x, &x).unwrap();
    ensure(perfect == ErrorTriple { mae: 0.0, rmse: 0.0, mape: 0.0 }, "perfect forecast has non-zero error")?;
    Ok("rmse >= mae on 10000 vectors; zero actual rejected; perfect forecast scores zero".into())
}

fn datagen_contract() -> Outcome {
    let cfg = GenConfig::full();
    let (ds, log) = generate_dataset(&cfg).map_err(|e| e.to_string())?;
    ensure(ds.len() == 400, format!("{} records", ds.len()))?;
    ensure(ds.schema.columns == ["oil", "water", "gas"], format!("columns {:?}", ds.schema.columns))?;
    for r in &ds.records {
        ensure(r.measurements.len() == 3, "column count")?;
        ensure(r.measurements.values().all(|c| c.len() == 400), format!("{}: length", r.id))?;
        ensure(r.static_features.len() == 5, format!("{}: static width", r.id))?;
    }
    ensure(log.records.len() == 400, "outlier log records")?;
    for rec in &log.records {
        for (col, entries) in &rec.columns {
            let idx: BTreeSet<usize> = entries.iter().map(|e| e.index).collect();
            ensure(entries.len() == 10 && idx.len() == 10, format!("{} {col}: {} outliers", rec.record_id, entries.len()))?;
        }
    }
    let (again, log2) = generate_dataset(&cfg).unwrap();
    let bits = |d: &tscluster::series::Dataset| -> Vec<u64> {
        d.records
            .iter()
            .flat_map(|r| {
                r.measurements
                    .values()
                    .flat_map(|c| c.iter().map(|v| v.unwrap().to_bits()))
                    .chain(r.static_features.iter().map(|v| v.to_bits()))
                    .collect::<Vec<_>>()
            })
            .collect()
    };
    ensure(bits(&ds) == bits(&again) && log == log2, "repeated generation differs")?;
    Ok("400 x 3 x 400 with 400 x 5 statics, 10 outliers per column, bit-identical on repeat".into())
}

fn anomaly_detection() -> Outcome {
    let cfg = GenConfig::full();
    let det = DetectorConfig::default();
    let (mut hits, mut logged, mut false_pos, mut clean_points, mut columns) = (0, 0, 0, 0, 0);
    'outer: for i in 0..cfg.n_records {
        let (cols, log) = generate_record(&cfg, i).map_err(|e| e.to_string())?;
        for (name, values) in &cols {
            let truth: BTreeSet<usize> = log[name].iter().map(|e| e.index).collect();
            let flagged: BTreeSet<usize> = detect_outliers(values, &det)
                .map_err(|e| e.to_string())?
                .flagged
                .into_iter()
                .collect();
            hits += truth.intersection(&flagged).count();
            logged += truth.len();
            false_pos += flagged.difference(&truth).count();
            clean_points += values.len() - truth.len();
            columns += 1;
            if columns == 50 {
                break 'outer;
            }
        }
    }
    let recall = hits as f64 / logged as f64;
    let fpr = false_pos as f64 / clean_points as f64;
    ensure(recall >= 0.9 && fpr <= 0.02, format!("recall {recall:.3}, false-positive rate {fpr:.4}"))?;
    Ok(format!("{columns} columns: recall {recall:.3} ({hits}/{logged}), false-positive rate {fpr:.4}"))
}

/// Textbook O(n^2) transform of the mean-removed, zero-padded series.
fn naive_dft(x: &[f64]) -> Vec<(f64, f64)> {
    let n = x.len().next_power_of_two();
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let mut padded: Vec<f64> = x.iter().map(|v| v - mean).collect();
    padded.resize(n, 0.0);
    (0..n)
        .map(|k| {
            padded.iter().enumerate().fold((0.0, 0.0), |(re, im), (t, v)| {
                let ang = -2.0 * std::f64::consts::PI * ((k * t) % n) as f64 / n as f64;
                (re + v * ang.cos(), im + v * ang.sin())
            })
        })
        .collect()
}

fn simulate_ar1(phi: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    let mut x = vec![0.0; n + 500];
    for t in 1..x.len() {
        let e: f64 = StandardNormal.sample(&mut r);
        x[t] = phi * x[t - 1] + e;
    }
    x.split_off(500)
}

fn feature_oracles() -> Outcome {
    let mut r = rng(14);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = r.random_range(2..=512);
        let x: Vec<f64> = (0..n).map(|_| r.random_range(-5.0..5.0)).collect();
        let fast = padded_spectrum(&x);
        let slow = naive_dft(&x);
        ensure(fast.len() == slow.len(), "spectrum length")?;
        for (f, (re, im)) in fast.iter().zip(&slow) {
            worst = worst.max((f.re - re).abs()).max((f.im - im).abs()).max((f.norm() - re.hypot(*im)).abs());
        }
    }
    ensure(worst <= 1e-8, format!("FFT deviates from the direct transform by {worst:.2e}"))?;
    let ar = simulate_ar1(0.8, 10_000, 15);
    let r1 = acf(&ar, 1).unwrap()[0];
    let p2 = pacf(&ar, 2).unwrap()[1];
    ensure((r1 - 0.8).abs() <= 0.05, format!("acf(1) = {r1:.4}"))?;
    ensure(p2.abs() <= 0.05, format!("pacf(2) = {p2:.4}"))?;
    Ok(format!("100 spectra within {worst:.1e} of the direct transform; AR(1): acf(1) {r1:.3}, pacf(2) {p2:.3}"))
}

fn blobs(centers: &[[f64; 2]], per: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    let noise = Normal::new(0.0, 0.3).unwrap();
    centers
        .iter()
        .flat_map(|c| (0..per).map(|_| vec![c[0] + noise.sample(&mut r), c[1] + noise.sample(&mut r)]).collect::<Vec<_>>())
        .collect()
}

fn clustering_recovery() -> Outcome {
    let cfg = SelectConfig {
        k_min: 2,
        k_max: 6,
        seed: 5,
        ..SelectConfig::default()
    };
    let mut lines = Vec::new();
    for (centers, want) in [(&[[0.0, 0.0], [10.0, 0.0], [5.0, 9.0]][..], 3), (&[[0.0, 0.0], [12.0, 3.0]][..], 2)] {
        let rows = blobs(centers, 30, want as u64);
        let d = DistanceMatrix::from_rows(&rows, Execution::Parallel).unwrap();
        for (name, input) in [
            ("k-means", ClusterInput::Features { rows: &rows, dmatrix: &d }),
            (
                "agglomerative",
                ClusterInput::Distances {
                    dmatrix: &d,
                    linkage: Linkage::Average,
                },
            ),
        ] {
            let sel = select_k(input, &cfg, Execution::Parallel).map_err(|e| e.to_string())?;
            let sil = sel.table.iter().find(|row| row.k == sel.k).unwrap().silhouette;
            ensure(sel.k == want, format!("{name}: chose k = {} on {want} blobs", sel.k))?;
            ensure(sil >= 0.8, format!("{name}: silhouette {sil:.3} on {want} blobs"))?;
            lines.push(format!("{name} k={want} silhouette {sil:.3}"));
        }
    }
    Ok(lines.join("; "))
}

fn speed_claim() -> Outcome {
    let gen = GenConfig {
        n_records: 100,
        length: 400,
        ..GenConfig::full()
    };
    let (ds, _) = generate_dataset(&gen).map_err(|e| e.to_string())?;
    let columns = ds.schema.columns.clone();
    let select = SelectConfig {
        k_min: 2,
        k_max: 6,
        seed: 1,
        ..SelectConfig::default()
    };
    let exec = Execution::Parallel;

    let start = Instant::now();
    let fm = build_feature_matrix(&ds, Catalog::A, &columns, exec).map_err(|e| e.to_string())?;
    let d = DistanceMatrix::from_rows(&fm.standardized, exec).unwrap();
    let input = ClusterInput::Features {
        rows: &fm.standardized,
        dmatrix: &d,
    };
    let feat = select_k(input, &select, exec).map_err(|e| e.to_string())?;
    let feature_s = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let d = dtw_matrix(&ds, &columns, None, exec).map_err(|e| e.to_string())?;
    let input = ClusterInput::Distances {
        dmatrix: &d,
        linkage: Linkage::Average,
    };
    let dist = select_k(input, &select, exec).map_err(|e| e.to_string())?;
    let dtw_s = start.elapsed().as_secs_f64();

    let ratio = dtw_s / feature_s;
    let detail = format!(
        "features + k-means {feature_s:.3} s (k={}) vs full DTW + agglomerative {dtw_s:.3} s (k={}): {ratio:.1}x",
        feat.k, dist.k
    );
    ensure(ratio >= 10.0, detail.clone())?;
    Ok(detail)
}

fn same_numbers(a: &ErrorReport, b: &ErrorReport) -> bool {
    let key = |r: &ErrorReport| -> Vec<(String, usize, String, usize, [u64; 3])> {
        r.cells
            .iter()
            .map(|c| {
                (
                    c.method.to_string(),
                    c.cluster,
                    c.model.to_string(),
                    c.k,
                    [c.errors.mae.to_bits(), c.errors.rmse.to_bits(), c.errors.mape.to_bits()],
                )
            })
            .collect()
    };
    let totals = |r: &ErrorReport| -> Vec<[u64; 3]> {
        r.totals
            .iter()
            .map(|t| [t.total.mae.to_bits(), t.total.rmse.to_bits(), t.total.mape.to_bits()])
            .collect()
    };
    key(a) == key(b) && totals(a) == totals(b) && a.clustering.iter().map(|c| &c.sizes).eq(b.clustering.iter().map(|c| &c.sizes))
}

fn desk_experiment() -> Outcome {
    let dir = tempdir().map_err(|e| e.to_string())?;
    let mut cfg = ExperimentConfig::desk();
    cfg.out_dir = dir.path().join("interrupted");
    cfg.stop_after = Some(7);
    match run_experiment(&cfg, Execution::Parallel) {
        Err(Error::Interrupted { completed: 7 }) => {}
        other => return Err(format!("expected an interruption after 7 cells, got {other:?}")),
    }
    let lines = |p: &std::path::Path| std::fs::read_to_string(p.join(CELLS_FILE)).map(|s| s.lines().count()).unwrap_or(0);
    ensure(lines(&cfg.out_dir) == 7, format!("{} cells saved before interruption", lines(&cfg.out_dir)))?;

    cfg.stop_after = None;
    let resumed = run_experiment(&cfg, Execution::Parallel).map_err(|e| e.to_string())?;
    let expected: usize = resumed.clustering.iter().map(|c| c.k).sum::<usize>() * cfg.models.len() * cfg.horizons.len() * cfg.folds;
    ensure(
        lines(&cfg.out_dir) == expected,
        format!("{} cell lines after resume, expected {expected} (recomputed cells?)", lines(&cfg.out_dir)),
    )?;

    let mut fresh_cfg = ExperimentConfig::desk();
    fresh_cfg.out_dir = dir.path().join("fresh");
    let fresh = run_experiment(&fresh_cfg, Execution::Parallel).map_err(|e| e.to_string())?;
    ensure(same_numbers(&resumed, &fresh), "resumed and uninterrupted runs differ")?;

    let residual = fresh.weighted_total_residual().map_err(|e| e.to_string())?;
    ensure(residual <= 1e-9, format!("weighted totals off by {residual:e}"))?;
    for f in ["results.csv", "totals.csv", "composites.csv", "clustering.csv", "comparison.csv", "summary.txt", "report.json"] {
        ensure(fresh_cfg.out_dir.join(f).exists(), format!("missing {f}"))?;
    }
    let summary = std::fs::read_to_string(fresh_cfg.out_dir.join("summary.txt")).unwrap();
    let highlighted: Vec<&str> = summary.lines().filter(|l| l.starts_with(">>")).collect();
    ensure(!highlighted.is_empty(), "summary lacks the clustered-vs-unclustered comparison")?;
    for l in &highlighted {
        println!("    {l}");
    }
    let helped = fresh.comparisons.iter().filter(|c| c.improved).count();
    let methods: Vec<String> = fresh
        .clustering
        .iter()
        .filter(|c| c.method != ClusterMethod::None)
        .map(|c| format!("{} k={} {:?}", c.method, c.k, c.sizes))
        .collect();
    Ok(format!(
        "{expected} cells; interrupted at 7, resumed without recomputation, identical to a fresh run; {}; clustering helped in {helped}/{} comparisons",
        methods.join(", "),
        fresh.comparisons.len()
    ))
}

fn main() {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("weighted_totals", weighted_totals),
        ("dtw_oracle", dtw_oracle),
        ("banded_dtw", banded_dtw),
        ("gradient_checks", gradient_checks),
        ("metric_identities", metric_identities),
        ("datagen_contract", datagen_contract),
        ("anomaly_detection", anomaly_detection),
        ("feature_oracles", feature_oracles),
        ("clustering_recovery", clustering_recovery),
        ("speed_claim", speed_claim),
        ("desk_experiment", desk_experiment),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.1} s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.1} s): {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
