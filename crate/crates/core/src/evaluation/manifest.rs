use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::EvalError;

/// One rated stimulus: a degraded cloud, its reference and its MOS.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StimulusRecord {
    pub stimulus_id: String,
    pub group: String,
    pub reference: PathBuf,
    pub degraded: PathBuf,
    pub mos: f64,
}

/// Parses a manifest with header `stimulus_id,group,reference,degraded,mos`.
/// Relative paths are resolved against `base_dir`.
pub fn parse_manifest<R: Read>(
    reader: R,
    base_dir: &Path,
) -> Result<Vec<StimulusRecord>, EvalError> {
    let mut csv = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = csv
        .headers()
        .map_err(|e| EvalError::Manifest(e.to_string()))?
        .clone();
    let expected = ["stimulus_id", "group", "reference", "degraded", "mos"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(EvalError::Manifest(format!(
            "header must be `{}`, found `{}`",
            expected.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut records = Vec::new();
    for (row, rec) in csv.deserialize::<StimulusRecord>().enumerate() {
        let mut rec = rec.map_err(|e| EvalError::Manifest(format!("row {}: {e}", row + 2)))?;
        if !rec.mos.is_finite() {
            return Err(EvalError::Manifest(format!(
                "row {}: stimulus {} has non-finite MOS",
                row + 2,
                rec.stimulus_id
            )));
        }
        for p in [&mut rec.reference, &mut rec.degraded] {
            if p.is_relative() {
                *p = base_dir.join(&*p);
            }
        }
        records.push(rec);
    }
    let mut ids: Vec<&str> = records.iter().map(|r| r.stimulus_id.as_str()).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(EvalError::Manifest(format!(
            "duplicate stimulus_id {}",
            w[0]
        )));
    }
    Ok(records)
}

pub fn read_manifest(path: &Path) -> Result<Vec<StimulusRecord>, EvalError> {
    let file = std::fs::File::open(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_manifest(file, base)
}
