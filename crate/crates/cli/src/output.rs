//! Deterministic CSV and JSON-sidecar rendering.
//!
//! Floats are written as `{:.16e}` (17 significant digits), which
//! round-trips every f64 exactly, so identical inputs give identical
//! bytes and the sidecar's echoed config reproduces the run.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::CliError;

pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:.16e}")
    }
}

/// One CSV field; commas are reserved as separators, so string cells must
/// not contain them.
#[derive(Debug, Clone)]
pub enum Cell {
    F(f64),
    I(usize),
    S(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(x) => fmt_float(*x),
            Cell::I(n) => n.to_string(),
            Cell::S(s) => {
                debug_assert!(!s.contains(',') && !s.contains('\n'));
                s.clone()
            }
        }
    }
}

/// Everything a finished (or schema-validated) invocation produces.
#[derive(Debug, Default)]
pub struct RunOutput {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub echo: BTreeMap<String, String>,
    pub column_variants: BTreeMap<String, String>,
    pub boundary_max: Option<f64>,
    pub output_path: String,
}

pub fn render_csv(columns: &[String], rows: &[Vec<Cell>]) -> String {
    let mut out = String::new();
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        let fields: Vec<String> = row.iter().map(Cell::render).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Sidecar lives next to the CSV with the extension swapped to `.json`.
pub fn sidecar_path(output: &str) -> String {
    let p = Path::new(output);
    let swapped = p.with_extension("json");
    if swapped == p {
        format!("{output}.meta.json")
    } else {
        swapped.to_string_lossy().into_owned()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AxisMeta {
    pub name: String,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepMeta {
    pub axes: Vec<AxisMeta>,
    pub metric: String,
    pub workers: usize,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    schema_version: u32,
    tool_version: &'a str,
    experiment: &'a str,
    config: &'a BTreeMap<String, String>,
    columns: &'a [String],
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    column_variants: &'a BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    boundary_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<&'a SweepMeta>,
    rows: usize,
    elapsed_seconds: f64,
}

/// Write the CSV and its sidecar; returns (csv_path, sidecar_path).
pub fn write_outputs(
    out: &RunOutput,
    experiment: &str,
    elapsed_seconds: f64,
    sweep: Option<&SweepMeta>,
) -> Result<(String, String), CliError> {
    let csv = render_csv(&out.columns, &out.rows);
    let meta = Sidecar {
        schema_version: 1,
        tool_version: env!("CARGO_PKG_VERSION"),
        experiment,
        config: &out.echo,
        columns: &out.columns,
        column_variants: &out.column_variants,
        boundary_max: out.boundary_max,
        sweep,
        rows: out.rows.len(),
        elapsed_seconds,
    };
    let json = serde_json::to_string_pretty(&meta).expect("sidecar serialization") + "\n";
    let side = sidecar_path(&out.output_path);
    let io_err = |path: &str, e: std::io::Error| {
        CliError::Runtime(format!("cannot write {path}: {e}"))
    };
    std::fs::write(&out.output_path, csv).map_err(|e| io_err(&out.output_path, e))?;
    std::fs::write(&side, json).map_err(|e| io_err(&side, e))?;
    Ok((out.output_path.clone(), side))
}
