//! Artifact formats: CSV field dumps and pretty JSON reports.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use kolmo_core::fields::{GridSpec, ScalarField};

use crate::error::CliError;

/// `{:.16e}` prints 17 significant digits, enough to round-trip an `f64`.
fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn header(d: usize) -> Vec<String> {
    let mut h: Vec<String> = (1..=d).map(|k| format!("v{k}")).collect();
    h.extend((1..=d).map(|k| format!("x{k}")));
    h.push("t".into());
    h.push("value".into());
    h
}

/// Writes the field in node order, one row per node, columns
/// `v1..vd, x1..xd, t, value`.
pub fn write_field_csv(path: &Path, field: &ScalarField) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::config(format!("cannot write {}: {e}", path.display()));
    let g = field.grid();
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(header(g.dim())).map_err(io)?;
    let mut row = Vec::with_capacity(2 * g.dim() + 2);
    for (node, &value) in field.values().iter().enumerate() {
        let (iv, ix, it) = g.split(node);
        row.clear();
        row.extend(g.v_point(iv).into_iter().map(fmt_num));
        row.extend(g.x_point(ix).into_iter().map(fmt_num));
        row.push(fmt_num(g.t_coord(it)));
        row.push(fmt_num(value));
        w.write_record(&row).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a field written by [`write_field_csv`] and checks that it lives on
/// `grid`.
pub fn read_field_csv(path: &Path, grid: &GridSpec) -> Result<ScalarField, CliError> {
    let bad = |msg: String| CliError::config(format!("{}: {msg}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let d = grid.dim();
    let expected = header(d);
    let found: Vec<String> = r.headers().map_err(|e| bad(e.to_string()))?.iter().map(str::to_string).collect();
    if found != expected {
        return Err(bad(format!("expected columns {}", expected.join(","))));
    }
    let mut values = Vec::with_capacity(grid.len());
    for (node, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if node >= grid.len() {
            return Err(bad(format!("more rows than the {} grid nodes", grid.len())));
        }
        let nums = rec
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| bad(format!("row {}: {e}", node + 1)))?;
        let (iv, ix, it) = grid.split(node);
        let mut coords = grid.v_point(iv);
        coords.extend(grid.x_point(ix));
        coords.push(grid.t_coord(it));
        if coords.iter().zip(&nums).any(|(c, n)| (c - n).abs() > 1e-9 * (1.0 + c.abs())) {
            return Err(bad(format!("row {} does not match the configured grid", node + 1)));
        }
        values.push(nums[2 * d + 1]);
    }
    if values.len() != grid.len() {
        return Err(bad(format!("{} rows for {} grid nodes", values.len(), grid.len())));
    }
    Ok(ScalarField::new(grid.clone(), values)?)
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::config(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::config(format!("cannot create {}: {e}", dir.display())))
}
