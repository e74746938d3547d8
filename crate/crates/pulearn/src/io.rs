//! Dataset files and their JSON sidecars.
//!
//! A dataset CSV has the header `f0,...,f{d-1},l` with an optional trailing
//! `y` column. Flags are written as `0`/`1` and features with 17 significant
//! digits, so a write/read round trip is exact.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use pulearn_core::{Dataset, GeneratorConfig, PsychmParams};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Provenance stored next to a generated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub seed: u64,
    pub generator: GeneratorConfig,
    pub true_params: Option<PsychmParams>,
}

/// `data.csv` -> `data.json`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

pub fn write_dataset(path: &Path, data: &Dataset) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    let mut header: Vec<String> = (0..data.dim()).map(|j| format!("f{j}")).collect();
    header.push("l".into());
    if data.truth().is_some() {
        header.push("y".into());
    }
    writeln!(w, "{}", header.join(",")).map_err(io)?;
    for (i, row) in data.rows().enumerate() {
        for v in row {
            write!(w, "{v:.16e},").map_err(io)?;
        }
        write!(w, "{}", flag(data.labels()[i])).map_err(io)?;
        if let Some(y) = data.truth() {
            write!(w, ",{}", flag(y[i])).map_err(io)?;
        }
        writeln!(w).map_err(io)?;
    }
    w.flush().map_err(io)
}

fn parse_flag(field: &str) -> Option<bool> {
    match field.trim() {
        "0" => Some(false),
        "1" => Some(true),
        _ => None,
    }
}

/// Reads a dataset CSV. Errors name the offending line.
pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let parse = |line: u64, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let header: Vec<String> = reader
        .headers()
        .map_err(|e| parse(1, e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let has_y = header.last().is_some_and(|h| h == "y");
    let l_col = if has_y { header.len().wrapping_sub(2) } else { header.len().wrapping_sub(1) };
    if header.get(l_col).map(String::as_str) != Some("l") {
        return Err(parse(1, "header must end with an `l` column, optionally followed by `y`".into()));
    }
    let dim = l_col;
    for (j, h) in header[..dim].iter().enumerate() {
        if *h != format!("f{j}") {
            return Err(parse(1, format!("expected feature column f{j}, found {h:?}")));
        }
    }

    let mut x = Vec::new();
    let mut l = Vec::new();
    let mut y = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(parse(
                line,
                format!("expected {} fields, found {}", header.len(), record.len()),
            ));
        }
        for (j, field) in record.iter().take(dim).enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| parse(line, format!("f{j}: {field:?} is not a number")))?;
            if !v.is_finite() {
                return Err(parse(line, format!("f{j}: {field:?} is not finite")));
            }
            x.push(v);
        }
        let li = parse_flag(&record[dim]).ok_or_else(|| parse(line, format!("l: {:?} is not 0 or 1", &record[dim])))?;
        l.push(li);
        if has_y {
            let yi = parse_flag(&record[dim + 1])
                .ok_or_else(|| parse(line, format!("y: {:?} is not 0 or 1", &record[dim + 1])))?;
            if li && !yi {
                return Err(parse(line, "annotated example has y = 0".into()));
            }
            y.push(yi);
        }
    }
    if l.is_empty() {
        return Err(parse(2, "no data rows".into()));
    }
    Ok(Dataset::new(x, dim, l, has_y.then_some(y))?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_sidecar(csv_path: &Path, sidecar: &Sidecar) -> Result<()> {
    write_json(&sidecar_path(csv_path), sidecar)
}

/// The sidecar of `csv_path`, or `None` when there is none.
pub fn read_sidecar(csv_path: &Path) -> Result<Option<Sidecar>> {
    let path = sidecar_path(csv_path);
    match std::fs::read_to_string(&path) {
        Ok(text) => Ok(Some(serde_json::from_str(&text)?)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(Error::io(path, e)),
    }
}

/// Reads a dataset and attaches the generating parameters from its sidecar, if any.
pub fn load_dataset(path: &Path) -> Result<(Dataset, Option<Sidecar>)> {
    let data = read_dataset(path)?;
    let sidecar = read_sidecar(path)?;
    let data = match sidecar.as_ref().and_then(|s| s.true_params.clone()) {
        Some(p) if p.target.dim() == data.dim() => data.with_true_params(p),
        _ => data,
    };
    Ok((data, sidecar))
}
