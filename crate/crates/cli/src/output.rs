//! Byte-stable report writers: CSV with 17 significant digits and LF line
//! endings, JSON with the config echoed for provenance, and atomic file
//! placement (write to a temp name, then rename).

use std::fs;
use std::path::{Path, PathBuf};

use admitlab_core::fem::ComplexField;
use admitlab_core::geometry::MeshTopology;
use serde::Serialize;

use crate::CliError;

/// Formats a float with 17 significant digits, `.` decimal point.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes bytes atomically: temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let tmp: PathBuf = {
        let mut name = path.as_os_str().to_owned();
        name.push(".tmp");
        PathBuf::from(name)
    };
    fs::write(&tmp, bytes)
        .map_err(|e| CliError::Other(format!("cannot write {}: {e}", tmp.display())))?;
    fs::rename(&tmp, path)
        .map_err(|e| CliError::Other(format!("cannot rename to {}: {e}", path.display())))?;
    Ok(())
}

/// A CSV table with a fixed header; rows are preformatted strings.
pub struct CsvTable {
    header: &'static [&'static str],
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &'static [&'static str]) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out.into_bytes()
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        write_atomic(path, &self.to_bytes())
    }
}

/// Serializes a report struct with the raw config text attached.
pub fn write_json_report<T: Serialize>(
    path: &Path,
    report: &T,
    config_echo: &str,
) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct Wrapped<'a, T: Serialize> {
        #[serde(flatten)]
        report: &'a T,
        config_echo: &'a str,
    }
    let wrapped = Wrapped {
        report,
        config_echo,
    };
    let mut bytes = serde_json::to_vec_pretty(&wrapped)
        .map_err(|e| CliError::Other(format!("serialization failed: {e}")))?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

#[derive(Serialize)]
struct MeshDocument {
    vertices: Vec<[f64; 2]>,
    cells: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdgeDoc>,
    cell_tags: Vec<u32>,
}

#[derive(Serialize)]
struct BoundaryEdgeDoc {
    vertices: [usize; 2],
    normal: [f64; 2],
}

/// The mesh JSON document `{vertices, cells, boundary_edges, cell_tags}`.
pub fn mesh_json(mesh: &MeshTopology) -> Vec<u8> {
    let doc = MeshDocument {
        vertices: mesh.vertices().to_vec(),
        cells: mesh.cells().to_vec(),
        boundary_edges: mesh
            .boundary_edges()
            .iter()
            .map(|e| BoundaryEdgeDoc {
                vertices: e.vertices,
                normal: e.normal,
            })
            .collect(),
        cell_tags: mesh.cell_tags().to_vec(),
    };
    let mut bytes = serde_json::to_vec_pretty(&doc).expect("mesh serialization");
    bytes.push(b'\n');
    bytes
}

/// Solution JSON `{ "<vertex>": [re, im], ... }` keyed by vertex index.
pub fn solution_json(field: &ComplexField) -> Vec<u8> {
    let map: std::collections::BTreeMap<String, [f64; 2]> = field
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| (i.to_string(), [v.re, v.im]))
        .collect();
    let mut bytes = serde_json::to_vec_pretty(&map).expect("solution serialization");
    bytes.push(b'\n');
    bytes
}
