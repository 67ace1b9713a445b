//! Dataset files: `dataset.csv` (`record_id, t, <columns...>`, empty field
//! for a missing value), `static.csv` (`record_id, f1..fS`), a JSON sidecar
//! `dataset.json` with the schema, seed and generator settings, and
//! `outliers.csv` with the injected-outlier log.

use std::fs::File;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::datagen::{GenConfig, OutlierKind, OutlierLog};
use crate::error::{Error, Result};
use crate::series::{Column, Dataset, Schema, SeriesRecord};

pub const DATASET_FORMAT_VERSION: u32 = 1;
pub const DATASET_FILE: &str = "dataset.csv";
pub const STATIC_FILE: &str = "static.csv";
pub const SIDECAR_FILE: &str = "dataset.json";
pub const OUTLIER_FILE: &str = "outliers.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub format_version: u32,
    pub schema: Schema,
    pub seed: u64,
    pub gen_config: Option<GenConfig>,
}

/// The directory holding the dataset files; `path` may name the directory
/// or its `dataset.csv`.
pub fn dataset_dir(path: &Path) -> PathBuf {
    if path.extension().is_some_and(|e| e == "csv") {
        path.parent().map(Path::to_path_buf).unwrap_or_default()
    } else {
        path.to_path_buf()
    }
}

fn create(path: &Path) -> Result<csv::Writer<File>> {
    Ok(csv::Writer::from_writer(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn open(path: &Path) -> Result<csv::Reader<File>> {
    Ok(csv::Reader::from_reader(File::open(path).map_err(|e| Error::io(path, e))?))
}

fn fmt(v: f64) -> String {
    // Shortest representation that parses back to the same bits.
    format!("{v}")
}

pub fn save_dataset(ds: &Dataset, dir: &Path, gen: Option<&GenConfig>) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut w = create(&dir.join(DATASET_FILE))?;
    let mut header = vec!["record_id".to_string(), "t".to_string()];
    header.extend(ds.schema.columns.iter().cloned());
    w.write_record(&header)?;
    for r in &ds.records {
        let cols: Vec<&Column> = ds.schema.columns.iter().map(|c| r.column(c)).collect::<Result<_>>()?;
        for t in 0..ds.schema.length {
            let mut row = vec![r.id.clone(), t.to_string()];
            row.extend(cols.iter().map(|c| c[t].map(fmt).unwrap_or_default()));
            w.write_record(&row)?;
        }
    }
    w.flush().map_err(|e| Error::io(dir.join(DATASET_FILE), e))?;
    let mut w = create(&dir.join(STATIC_FILE))?;
    let mut header = vec!["record_id".to_string()];
    header.extend((1..=ds.schema.static_dim).map(|i| format!("f{i}")));
    w.write_record(&header)?;
    for r in &ds.records {
        let mut row = vec![r.id.clone()];
        row.extend(r.static_features.iter().map(|&v| fmt(v)));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(dir.join(STATIC_FILE), e))?;
    let side = Sidecar {
        format_version: DATASET_FORMAT_VERSION,
        schema: ds.schema.clone(),
        seed: ds.seed,
        gen_config: gen.cloned(),
    };
    let p = dir.join(SIDECAR_FILE);
    std::fs::write(&p, serde_json::to_string_pretty(&side)?).map_err(|e| Error::io(&p, e))
}

fn parse(s: &str, what: impl FnOnce() -> String) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Schema(format!("{}: cannot parse {s:?} as a number", what())))
}

pub fn load_dataset(path: &Path) -> Result<(Dataset, Option<Sidecar>)> {
    let dir = dataset_dir(path);
    let side_path = dir.join(SIDECAR_FILE);
    let side: Option<Sidecar> = if side_path.exists() {
        let text = std::fs::read_to_string(&side_path).map_err(|e| Error::io(&side_path, e))?;
        Some(serde_json::from_str(&text)?)
    } else {
        None
    };
    if let Some(s) = &side {
        if s.format_version != DATASET_FORMAT_VERSION {
            return Err(Error::Schema(format!("unsupported dataset format {}", s.format_version)));
        }
    }
    let mut rdr = open(&dir.join(DATASET_FILE))?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    for (i, want) in ["record_id", "t"].iter().enumerate() {
        match header.get(i) {
            Some(h) if h == want => {}
            Some(h) => return Err(Error::Schema(format!("malformed header: column {} is {h:?}, expected {want:?}", i + 1))),
            None => return Err(Error::Schema(format!("malformed header: missing {want:?} column"))),
        }
    }
    let columns: Vec<String> = header[2..].to_vec();
    if columns.is_empty() {
        return Err(Error::Schema("malformed header: no measurement columns".into()));
    }
    for (i, c) in columns.iter().enumerate() {
        if c.trim().is_empty() || columns[..i].contains(c) {
            return Err(Error::Schema(format!("malformed header: bad or duplicate column {c:?}")));
        }
        if let Some(s) = &side {
            if !s.schema.columns.contains(c) {
                return Err(Error::Schema(format!("malformed header: unexpected column {c:?}")));
            }
        }
    }
    if let Some(s) = &side {
        if let Some(missing) = s.schema.columns.iter().find(|c| !columns.contains(c)) {
            return Err(Error::Schema(format!("malformed header: missing column {missing:?}")));
        }
    }
    let mut data: IndexMap<String, Vec<Vec<Option<f64>>>> = IndexMap::new();
    for row in rdr.records() {
        let row = row?;
        let id = row[0].to_string();
        let series = data.entry(id.clone()).or_insert_with(|| vec![Vec::new(); columns.len()]);
        let t: usize = row[1]
            .trim()
            .parse()
            .map_err(|_| Error::Schema(format!("record {id}: bad time index {:?}", &row[1])))?;
        if t != series[0].len() {
            return Err(Error::Schema(format!("record {id}: time index {t} out of sequence")));
        }
        for (j, col) in columns.iter().enumerate() {
            let field = &row[j + 2];
            let v = if field.trim().is_empty() {
                None
            } else {
                Some(parse(field, || format!("record {id} t {t} column {col}"))?)
            };
            series[j].push(v);
        }
    }
    let length = data.values().next().map_or(0, |s| s[0].len());
    let mut statics: IndexMap<String, Vec<f64>> = IndexMap::new();
    let static_path = dir.join(STATIC_FILE);
    let mut static_dim = 0;
    if static_path.exists() {
        let mut rdr = open(&static_path)?;
        let h = rdr.headers()?.clone();
        if h.get(0) != Some("record_id") {
            return Err(Error::Schema("malformed static header: first column must be \"record_id\"".into()));
        }
        static_dim = h.len() - 1;
        for row in rdr.records() {
            let row = row?;
            let id = row[0].to_string();
            let v = (1..row.len())
                .map(|j| parse(&row[j], || format!("static {id} column {}", &h[j])))
                .collect::<Result<_>>()?;
            statics.insert(id, v);
        }
    }
    let schema = Schema {
        columns: columns.clone(),
        length,
        static_dim,
    };
    if let Some(s) = &side {
        if s.schema != schema {
            return Err(Error::Schema(format!("files describe {schema:?}, sidecar says {:?}", s.schema)));
        }
    }
    let mut records = Vec::with_capacity(data.len());
    for (id, series) in data {
        let st = match statics.shift_remove(&id) {
            Some(v) => v,
            None if static_dim == 0 => Vec::new(),
            None => return Err(Error::Schema(format!("record {id} has no static features"))),
        };
        let measurements = columns.iter().cloned().zip(series).collect();
        records.push(SeriesRecord::new(id, measurements, st)?);
    }
    if let Some(id) = statics.keys().next() {
        return Err(Error::Schema(format!("static features for unknown record {id}")));
    }
    let seed = side.as_ref().map_or(0, |s| s.seed);
    Ok((Dataset::new(records, schema, seed)?, side))
}

pub fn save_outliers(log: &OutlierLog, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(["record_id", "column", "index", "kind", "original"])?;
    for r in &log.records {
        for (col, entries) in &r.columns {
            for e in entries {
                let kind = match e.kind {
                    OutlierKind::Spike => "spike",
                    OutlierKind::Zero => "zero",
                };
                w.write_record([r.record_id.as_str(), col, &e.index.to_string(), kind, &fmt(e.original)])?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}
