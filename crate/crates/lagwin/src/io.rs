//! File formats: quantile/CDF tables, chain exports, data loaders, JSON
//! documents. Every writer goes through [`atomic_write`].

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use lagwin_core::chains::ChainRun;
use lagwin_core::fixedb::{FixedBQuantileTable, QuantileRow};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Writes `bytes` to a temporary file next to `path`, then renames it into
/// place.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

pub fn csv_bytes<S: Serialize>(path: &Path, rows: impl IntoIterator<Item = S>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|source| Error::Csv { path: path.into(), source })?;
    }
    w.into_inner().map_err(|e| Error::io(path, e.into_error()))
}

pub fn write_csv<S: Serialize>(path: &Path, rows: impl IntoIterator<Item = S>) -> Result<()> {
    atomic_write(path, &csv_bytes(path, rows)?)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|source| Error::Json { path: path.into(), source })?;
    bytes.push(b'\n');
    atomic_write(path, &bytes)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json { path: path.into(), source })
}

fn open_csv(path: &Path, headers: bool) -> Result<csv::Reader<fs::File>> {
    let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().has_headers(headers).trim(csv::Trim::All).from_reader(f))
}

/// Sidecar JSON path for a CSV file (`x.csv` → `x.json`).
pub fn sidecar(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Writes `level,critical_value,mc_se` rows plus the full table as a JSON
/// sidecar.
pub fn write_quantile_table(path: &Path, table: &FixedBQuantileTable) -> Result<()> {
    write_csv(path, &table.rows)?;
    write_json(&sidecar(path), table)
}

/// Reads a table from its JSON form, or from CSV rows plus the JSON sidecar
/// carrying the metadata. The CSV rows win over the sidecar's.
pub fn read_quantile_table(path: &Path) -> Result<FixedBQuantileTable> {
    if path.extension().is_some_and(|e| e == "json") {
        return read_json(path);
    }
    let meta = sidecar(path);
    if !meta.exists() {
        return Err(Error::Input(format!(
            "{}: quantile table CSV needs its metadata file {}",
            path.display(),
            meta.display()
        )));
    }
    let mut table: FixedBQuantileTable = read_json(&meta)?;
    let mut rdr = open_csv(path, true)?;
    table.rows = rdr
        .deserialize::<QuantileRow>()
        .collect::<std::result::Result<_, _>>()
        .map_err(|source| Error::Csv { path: path.into(), source })?;
    if table.rows.is_empty() {
        return Err(Error::Input(format!("{}: no quantile rows", path.display())));
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdfRow {
    pub x: f64,
    pub cdf: f64,
}

pub fn write_cdf(path: &Path, cdf: &[(f64, f64)]) -> Result<()> {
    write_csv(path, cdf.iter().map(|&(x, c)| CdfRow { x, cdf: c }))
}

pub fn read_cdf(path: &Path) -> Result<Vec<CdfRow>> {
    open_csv(path, true)?
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|source| Error::Csv { path: path.into(), source })
}

fn parse_number(path: &Path, line: usize, field: &str) -> Result<f64> {
    field
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Input(format!("{}:{line}: not a finite number: {field:?}", path.display())))
}

/// Reads a numeric series from a CSV file.
///
/// With `column = None` the file must have exactly one column; a non-numeric
/// first row is taken as a header. With `column = Some(name)` the file must
/// have a header containing `name`.
pub fn read_series(path: &Path, column: Option<&str>) -> Result<Vec<f64>> {
    let mut rdr = open_csv(path, false)?;
    let mut records = rdr.records();
    let mut out = Vec::new();
    let mut idx = 0;
    let mut line = 0;
    if let Some(name) = column {
        let header = match records.next() {
            Some(r) => r.map_err(|source| Error::Csv { path: path.into(), source })?,
            None => return Err(Error::Input(format!("{}: empty file", path.display()))),
        };
        idx = header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Input(format!("{}: no column named {name:?}", path.display())))?;
        line = 1;
    }
    for rec in records {
        let rec = rec.map_err(|source| Error::Csv { path: path.into(), source })?;
        line += 1;
        if column.is_none() && rec.len() != 1 {
            return Err(Error::Input(format!(
                "{}:{line}: expected a single column, found {}",
                path.display(),
                rec.len()
            )));
        }
        let field = rec.get(idx).unwrap_or("");
        if line == 1 && column.is_none() && field.parse::<f64>().is_err() {
            continue; // header
        }
        out.push(parse_number(path, line, field)?);
    }
    if out.is_empty() {
        return Err(Error::Input(format!("{}: no data rows", path.display())));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSidecar {
    pub model_id: String,
    pub seed: u64,
    pub n_total: usize,
    pub burn_in: usize,
    pub config: serde_json::Value,
}

#[derive(Serialize)]
struct HRow {
    h: f64,
}

/// Single-column `h` CSV plus a JSON sidecar with the seed and config.
pub fn write_chain(path: &Path, run: &ChainRun, config: serde_json::Value) -> Result<()> {
    write_csv(path, run.h_path.iter().map(|&h| HRow { h }))?;
    write_json(
        &sidecar(path),
        &ChainSidecar {
            model_id: run.model_id.clone(),
            seed: run.seed,
            n_total: run.n_total,
            burn_in: run.burn_in,
            config,
        },
    )
}

/// Logistic-regression data: a header row, the response in column `y`,
/// every other column a covariate. Returns `(y, row-major X, d)`.
pub fn read_logistic_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>, usize)> {
    let mut rdr = open_csv(path, true)?;
    let headers = rdr.headers().map_err(|source| Error::Csv { path: path.into(), source })?.clone();
    let yi = headers
        .iter()
        .position(|h| h == "y")
        .ok_or_else(|| Error::Input(format!("{}: no response column named \"y\"", path.display())))?;
    let d = headers.len() - 1;
    if d == 0 {
        return Err(Error::Input(format!("{}: no covariate columns", path.display())));
    }
    let (mut y, mut x) = (Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|source| Error::Csv { path: path.into(), source })?;
        for (j, field) in rec.iter().enumerate() {
            let v = parse_number(path, i + 2, field)?;
            if j == yi {
                if v != 0.0 && v != 1.0 {
                    return Err(Error::Input(format!("{}:{}: response must be 0 or 1", path.display(), i + 2)));
                }
                y.push(v);
            } else {
                x.push(v);
            }
        }
    }
    if y.is_empty() {
        return Err(Error::Input(format!("{}: no data rows", path.display())));
    }
    Ok((y, x, d))
}
