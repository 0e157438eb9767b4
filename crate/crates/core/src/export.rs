//! Grid snapshots: CSV with `x, y, z` plus named columns, or a JSON header
//! followed by a flat little-endian `f64` payload (point-major, columns
//! innermost, points in grid index order).

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::duality::InvariantMap;
use crate::error::ExportError;
use crate::grid::{GridSpec, VectorField, VectorFieldPair};

pub const SNAPSHOT_FORMAT: &str = "phonoscope-snapshot";
pub const SNAPSHOT_VERSION: u32 = 1;
pub const FIELD_COLUMNS: [&str; 6] = ["U1x", "U1y", "U1z", "U2x", "U2y", "U2z"];
pub const INVARIANT_COLUMNS: [&str; 2] = ["I1", "I2"];

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub grid: GridSpec,
    pub time: f64,
    pub columns: Vec<String>,
    /// `grid.len() * columns.len()` values.
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub format: String,
    pub version: u32,
    pub grid: GridSpec,
    pub time: f64,
    pub columns: Vec<String>,
    pub dtype: String,
    pub values: usize,
    /// Payload file name when the data is stored separately.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_file: Option<String>,
    /// Inline payload, used when no separate file is available.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<Vec<f64>>,
}

impl Snapshot {
    pub fn new(grid: GridSpec, time: f64, columns: Vec<String>, data: Vec<f64>) -> Result<Self, ExportError> {
        let expected = grid.len() * columns.len();
        if data.len() != expected {
            return Err(ExportError::Format(format!("expected {expected} values, found {}", data.len())));
        }
        Ok(Self { grid, time, columns, data })
    }

    pub fn from_fields(fields: &VectorFieldPair) -> Self {
        let data =
            fields.u1.values().iter().zip(fields.u2.values()).flat_map(|(a, b)| a.iter().chain(b).copied()).collect();
        Self { grid: *fields.grid(), time: fields.time, columns: owned(&FIELD_COLUMNS), data }
    }

    pub fn from_invariants(grid: &GridSpec, time: f64, map: &InvariantMap) -> Result<Self, ExportError> {
        let data = map.pointwise.iter().flat_map(|p| [p.i1, p.i2]).collect();
        Self::new(*grid, time, owned(&INVARIANT_COLUMNS), data)
    }

    pub fn to_fields(&self) -> Result<VectorFieldPair, ExportError> {
        if self.columns != owned(&FIELD_COLUMNS) {
            return Err(ExportError::Format(format!("not a field snapshot: columns {:?}", self.columns)));
        }
        let (u1, u2): (Vec<[f64; 3]>, Vec<[f64; 3]>) =
            self.data.chunks_exact(6).map(|c| ([c[0], c[1], c[2]], [c[3], c[4], c[5]])).unzip();
        Ok(VectorFieldPair::new(VectorField::new(self.grid, u1)?, VectorField::new(self.grid, u2)?, self.time)?)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), ExportError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["x".to_string(), "y".into(), "z".into()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header)?;
        let width = self.columns.len();
        for (idx, row) in self.data.chunks_exact(width.max(1)).enumerate() {
            let pos = self.grid.position(idx);
            w.write_record(pos.iter().chain(row).map(|v| format_float(*v)))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn header(&self, data_file: Option<String>) -> SnapshotHeader {
        SnapshotHeader {
            format: SNAPSHOT_FORMAT.into(),
            version: SNAPSHOT_VERSION,
            grid: self.grid,
            time: self.time,
            columns: self.columns.clone(),
            dtype: "f64le".into(),
            values: self.data.len(),
            data: data_file.is_none().then(|| self.data.clone()),
            data_file,
        }
    }

    /// JSON header naming `data_file`, payload written to `data`.
    pub fn write_binary<H: Write, D: Write>(&self, header: H, mut data: D, data_file: &str) -> Result<(), ExportError> {
        serde_json::to_writer_pretty(header, &self.header(Some(data_file.to_string())))?;
        let mut bytes = Vec::with_capacity(self.data.len() * 8);
        for v in &self.data {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        data.write_all(&bytes)?;
        data.flush()?;
        Ok(())
    }

    /// JSON header carrying the payload inline.
    pub fn write_json_inline<W: Write>(&self, writer: W) -> Result<(), ExportError> {
        serde_json::to_writer_pretty(writer, &self.header(None))?;
        Ok(())
    }

    /// Reads a header; `data` supplies the payload when the header names a file.
    pub fn read<H: Read, D: Read>(header: H, data: Option<D>) -> Result<Self, ExportError> {
        let header: SnapshotHeader = serde_json::from_reader(header)?;
        if header.format != SNAPSHOT_FORMAT || header.version != SNAPSHOT_VERSION {
            return Err(ExportError::Format(format!("unsupported {} v{}", header.format, header.version)));
        }
        if header.dtype != "f64le" {
            return Err(ExportError::Format(format!("unsupported dtype {}", header.dtype)));
        }
        let values = match (header.data, data) {
            (Some(inline), _) => inline,
            (None, Some(mut reader)) => {
                let mut bytes = Vec::new();
                reader.read_to_end(&mut bytes)?;
                if bytes.len() != header.values * 8 {
                    return Err(ExportError::Format(format!(
                        "payload has {} bytes, header promises {} values",
                        bytes.len(),
                        header.values
                    )));
                }
                bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect()
            }
            (None, None) => return Err(ExportError::Format("header names a data file but none was given".into())),
        };
        if values.len() != header.values {
            return Err(ExportError::Format("inline payload length disagrees with header".into()));
        }
        Self::new(header.grid, header.time, header.columns, values)
    }
}

fn owned(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|c| c.to_string()).collect()
}

/// Shortest round-trip representation; keeps CSV output byte-stable.
pub fn format_float(v: f64) -> String {
    format!("{v:?}")
}
