use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::generate::{Dataset, ProbabilitySample};
use super::task::TaskSpec;
use crate::error::{Error, Result};

const FORMAT_VERSION: u32 = 1;

/// Contents of the JSON file stored next to a dataset CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub format_version: u32,
    pub crate_version: String,
    pub class_names: Vec<String>,
    pub feature_count: usize,
    pub task: Option<TaskSpec>,
}

/// `data.csv` → `data.provenance.json`.
pub fn provenance_path(csv: &Path) -> PathBuf {
    let stem = csv.file_stem().and_then(|s| s.to_str()).unwrap_or("dataset");
    csv.with_file_name(format!("{stem}.provenance.json"))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::Dataset(format!("{}: {e}", path.display()))
}

/// Writes the CSV (`label,x0,…`) with 17 significant digits per feature plus
/// the provenance sidecar.
pub fn save_dataset(ds: &Dataset, path: &Path) -> Result<()> {
    ds.validate()?;
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    let header = std::iter::once("label".to_string()).chain((0..ds.feature_count).map(|i| format!("x{i}")));
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for s in &ds.samples {
        let row = std::iter::once(s.label.to_string()).chain(s.features.iter().map(|x| format!("{x:.16e}")));
        w.write_record(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush()?;

    let provenance = Provenance {
        format_version: FORMAT_VERSION,
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        class_names: ds.class_names.clone(),
        feature_count: ds.feature_count,
        task: ds.provenance.clone(),
    };
    let mut side = BufWriter::new(File::create(provenance_path(path))?);
    serde_json::to_writer_pretty(&mut side, &provenance)?;
    side.write_all(b"\n")?;
    Ok(())
}

/// Reads a dataset. Class names and the expected feature count come from the
/// sidecar when present; otherwise classes are named by label.
pub fn load_dataset(path: &Path) -> Result<Dataset> {
    load_dataset_expecting(path, None)
}

/// Like [`load_dataset`], and additionally requires `expected` features.
pub fn load_dataset_expecting(path: &Path, expected: Option<usize>) -> Result<Dataset> {
    let side = provenance_path(path);
    let provenance: Option<Provenance> = if side.exists() {
        let p: Provenance = serde_json::from_reader(BufReader::new(File::open(&side)?))?;
        if p.format_version != FORMAT_VERSION {
            return Err(Error::Dataset(format!(
                "{}: unsupported format version {}",
                side.display(),
                p.format_version
            )));
        }
        Some(p)
    } else {
        None
    };

    let mut r = csv::Reader::from_reader(BufReader::new(File::open(path)?));
    let header = r.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.is_empty() || header.get(0) != Some("label") {
        return Err(Error::Dataset(format!(
            "{}: missing `label,x0,…` header",
            path.display()
        )));
    }
    let feature_count = header.len() - 1;
    for (i, name) in header.iter().skip(1).enumerate() {
        if name != format!("x{i}") {
            return Err(Error::Dataset(format!(
                "{}: unexpected column `{name}`",
                path.display()
            )));
        }
    }
    let wanted = expected.or(provenance.as_ref().map(|p| p.feature_count));
    if let Some(n) = wanted {
        if n != feature_count {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: feature_count,
            }
            .context(format!("{}: feature columns", path.display())));
        }
    }

    let mut samples = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let parse_err = |what: &str| Error::Dataset(format!("{}: row {}: bad {what}", path.display(), line + 1));
        let label = record[0].trim().parse::<usize>().map_err(|_| parse_err("label"))?;
        let features = record
            .iter()
            .skip(1)
            .map(|v| v.trim().parse::<f64>().map_err(|_| parse_err("feature")))
            .collect::<Result<Vec<_>>>()?;
        samples.push(ProbabilitySample { label, features });
    }

    let class_names = match &provenance {
        Some(p) => p.class_names.clone(),
        None => {
            let classes = samples.iter().map(|s| s.label + 1).max().unwrap_or(0);
            (0..classes).map(|c| c.to_string()).collect()
        }
    };
    let mut ds = Dataset::new(samples, class_names, feature_count)?;
    ds.provenance = provenance.and_then(|p| p.task);
    Ok(ds)
}
