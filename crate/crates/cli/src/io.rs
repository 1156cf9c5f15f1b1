//! Artifact writers: tidy CSV, binary table dumps and the run summary.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use contact_limit_core::kernels::KernelOperator;
use contact_limit_core::linalg::Matrix;
use contact_limit_core::quadrature::{GridKind, QuadratureGrid};
use serde::{Deserialize, Serialize};

/// First bytes of every binary table.
pub const TABLE_MAGIC: &[u8; 8] = b"CLTABLE1";

/// Tables with at most this many entries are also written as CSV.
pub const CSV_TABLE_LIMIT: usize = 10_000;

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisHeader {
    pub kind: String,
    pub lo: f64,
    pub hi: f64,
    pub nodes: Vec<f64>,
}

impl AxisHeader {
    pub fn from_grid(g: &QuadratureGrid) -> Self {
        let kind = match g.kind {
            GridKind::Trapezoid => "trapezoid",
            GridKind::Midpoint => "midpoint",
            GridKind::GaussLegendre => "gauss-legendre",
            GridKind::Composite => "composite",
            GridKind::Custom => "custom",
        };
        Self {
            kind: kind.into(),
            lo: g.lo,
            hi: g.hi,
            nodes: g.nodes.clone(),
        }
    }
}

/// Self-describing header of a binary table; values follow in row-major
/// order as little-endian `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableHeader {
    pub rows: usize,
    pub cols: usize,
    pub target_axes: Vec<AxisHeader>,
    pub source_axes: Vec<AxisHeader>,
    pub meta: BTreeMap<String, String>,
}

impl TableHeader {
    pub fn for_kernel(op: &KernelOperator) -> Self {
        let m = &op.meta;
        let meta = BTreeMap::from([
            ("kind".to_string(), "kernel".to_string()),
            ("class".to_string(), m.class.name().to_string()),
            ("eps".to_string(), m.eps.to_string()),
            ("z".to_string(), m.z.to_string()),
            ("q".to_string(), m.q.to_string()),
            ("coarse".to_string(), m.coarse.to_string()),
        ]);
        Self {
            rows: op.values.rows(),
            cols: op.values.cols(),
            target_axes: op.targets.axes.iter().map(AxisHeader::from_grid).collect(),
            source_axes: op.sources.axes.iter().map(AxisHeader::from_grid).collect(),
            meta,
        }
    }
}

/// `magic | u64 header length | JSON header | row-major f64 values`.
pub fn write_table(path: &Path, header: &TableHeader, values: &Matrix) -> Result<()> {
    if header.rows != values.rows() || header.cols != values.cols() {
        bail!("header shape differs from the table");
    }
    let json = serde_json::to_vec(header)?;
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    w.write_all(TABLE_MAGIC)?;
    w.write_all(&(json.len() as u64).to_le_bytes())?;
    w.write_all(&json)?;
    for v in values.as_slice() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_table(path: &Path) -> Result<(TableHeader, Matrix)> {
    let mut bytes = Vec::new();
    File::open(path)
        .with_context(|| format!("opening {}", path.display()))?
        .read_to_end(&mut bytes)?;
    if bytes.len() < 16 || &bytes[..8] != TABLE_MAGIC {
        bail!("{} is not a table dump", path.display());
    }
    let len = u64::from_le_bytes(bytes[8..16].try_into()?) as usize;
    let body = bytes.get(16..16 + len).context("truncated header")?;
    let header: TableHeader = serde_json::from_slice(body)?;
    let data = &bytes[16 + len..];
    if data.len() != 8 * header.rows * header.cols {
        bail!("table body has {} bytes, expected {}", data.len(), 8 * header.rows * header.cols);
    }
    let values = data
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    let m = Matrix::from_row_major(header.rows, header.cols, values).map_err(|e| anyhow::anyhow!("{e}"))?;
    Ok((header, m))
}

#[derive(Serialize)]
struct Entry {
    row: usize,
    col: usize,
    value: f64,
}

/// Long-format CSV `row, col, value`.
pub fn write_table_csv(path: &Path, values: &Matrix) -> Result<()> {
    let mut rows = Vec::with_capacity(values.rows() * values.cols());
    for i in 0..values.rows() {
        for (j, v) in values.row(i).iter().enumerate() {
            rows.push(Entry { row: i, col: j, value: *v });
        }
    }
    write_csv(path, &rows)
}

/// Binary dump, plus CSV when the table is small. Returns the file names.
pub fn export_table(dir: &Path, stem: &str, header: &TableHeader, values: &Matrix) -> Result<Vec<String>> {
    let bin = format!("{stem}.bin");
    write_table(&dir.join(&bin), header, values)?;
    let mut names = vec![bin];
    if values.rows() * values.cols() <= CSV_TABLE_LIMIT {
        let csv = format!("{stem}.csv");
        write_table_csv(&dir.join(&csv), values)?;
        names.push(csv);
    }
    Ok(names)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
