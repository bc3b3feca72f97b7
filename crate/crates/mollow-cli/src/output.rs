//! CSV and JSON emission. All frequencies in files are cyclic (GHz), delays
//! in ps; every header comment states the units. Floats are written in
//! shortest round-trip form, so identical inputs give byte-identical files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use mollow::fit::{DataSeries, FitResult};
use serde_json::json;

pub fn write_csv(
    path: &Path,
    header_comment: &str,
    columns: &[&str],
    rows: &[Vec<f64>],
) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# {header_comment}")?;
    writeln!(w, "{}", columns.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()
}

/// Read a numeric CSV with `#` comments and an optional header row. Returns
/// the column names (empty when the file had no header) and the rows.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), String> {
    let file = File::open(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut names: Vec<String> = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| format!("line {}: {e}", idx + 1))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Result<Vec<f64>, _> = cells.iter().map(|c| c.parse::<f64>()).collect();
        match parsed {
            Ok(nums) => {
                if let Some(first) = rows.first() {
                    if nums.len() != first.len() {
                        return Err(format!(
                            "line {}: expected {} columns, got {}",
                            idx + 1,
                            first.len(),
                            nums.len()
                        ));
                    }
                }
                rows.push(nums);
            }
            Err(_) if rows.is_empty() && names.is_empty() => {
                names = cells.iter().map(|c| c.to_string()).collect();
            }
            Err(_) => {
                return Err(format!("line {}: not numeric: {line:?}", idx + 1));
            }
        }
    }
    if rows.is_empty() {
        return Err("no data rows".into());
    }
    Ok((names, rows))
}

/// First two (or three, with errors) columns as a data series.
pub fn data_series_from_csv(path: &Path) -> Result<DataSeries<f64>, String> {
    let (_, rows) = read_csv(path)?;
    if rows[0].len() < 2 {
        return Err("need at least two columns (x, y)".into());
    }
    let x: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let y: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let y_err = if rows[0].len() >= 3 {
        Some(rows.iter().map(|r| r[2]).collect())
    } else {
        None
    };
    DataSeries::new(x, y, y_err).map_err(|e| e.to_string())
}

pub fn fit_result_json(result: &FitResult<f64>, extra: serde_json::Value) -> serde_json::Value {
    let params: serde_json::Map<String, serde_json::Value> = result
        .params
        .iter()
        .map(|(k, v)| (k.clone(), json!(v)))
        .collect();
    let errors: serde_json::Value = match &result.std_errors {
        Some(es) => {
            let m: serde_json::Map<String, serde_json::Value> =
                es.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
            serde_json::Value::Object(m)
        }
        None => serde_json::Value::Null,
    };
    let mut out = json!({
        "params": params,
        "std_errors": errors,
        "residual_norm": result.residual_norm,
        "n_iterations": result.n_iterations,
        "converged": result.converged,
        "warnings": result.warnings,
    });
    if let (Some(obj), serde_json::Value::Object(extra_map)) = (out.as_object_mut(), extra) {
        for (k, v) in extra_map {
            obj.insert(k, v);
        }
    }
    out
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()
}
