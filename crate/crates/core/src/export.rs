//! Bit-stable CSV/JSON emission and the matching readers.
//!
//! CSV: '.' decimal, LF endings, every number as `{:.16e}` (17 significant
//! digits), empty cell for an undefined value. Optional metadata sits on a
//! single leading `# key=value,…` line. JSON uses shortest round-trip floats.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TqgError};
use crate::lemmas::{LatticeRow, LatticeTable};
use crate::tracker::{RadiusSample, RadiusTrace};

/// Seventeen significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn format_cell(x: Option<f64>) -> String {
    x.map(format_f64).unwrap_or_default()
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CsvTable {
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl CsvTable {
    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn meta_f64(&self, key: &str) -> Result<f64> {
        self.meta_value(key)
            .ok_or_else(|| TqgError::Parse(format!("missing metadata `{key}`")))?
            .parse()
            .map_err(|e| TqgError::Parse(format!("metadata `{key}`: {e}")))
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

fn csv_err(e: csv::Error) -> TqgError {
    TqgError::Io(e.to_string())
}

pub fn write_csv(path: &Path, table: &CsvTable) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    if !table.meta.is_empty() {
        let line: Vec<String> = table.meta.iter().map(|(k, v)| format!("{k}={v}")).collect();
        writeln!(out, "# {}", line.join(","))?;
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(&table.header).map_err(csv_err)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|&x| format_cell(x))).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<CsvTable> {
    let text = std::fs::read_to_string(path)?;
    let mut meta = Vec::new();
    if let Some(line) = text.lines().next().and_then(|l| l.strip_prefix("# ")) {
        for pair in line.split(',') {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| TqgError::Parse(format!("bad metadata entry `{pair}`")))?;
            meta.push((k.to_string(), v.to_string()));
        }
    }
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(csv_err)?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let row = record
            .iter()
            .map(|cell| {
                if cell.is_empty() {
                    Ok(None)
                } else {
                    cell.parse::<f64>()
                        .map(Some)
                        .map_err(|e| TqgError::Parse(format!("cell `{cell}`: {e}")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(CsvTable { meta, header, rows })
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// One row of trajectory.csv.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub s: f64,
    pub b_h4: f64,
    pub q_h3: f64,
    pub g: f64,
    pub phi: f64,
}

const TRAJECTORY_HEADER: [&str; 5] = ["s", "b_H4", "q_H3", "G", "phi"];

pub fn write_trajectory(path: &Path, rows: &[TrajectoryRow]) -> Result<()> {
    write_csv(
        path,
        &CsvTable {
            meta: Vec::new(),
            header: TRAJECTORY_HEADER.iter().map(|s| s.to_string()).collect(),
            rows: rows
                .iter()
                .map(|r| vec![Some(r.s), Some(r.b_h4), Some(r.q_h3), Some(r.g), Some(r.phi)])
                .collect(),
        },
    )
}

fn required(row: &[Option<f64>], i: usize) -> Result<f64> {
    row.get(i)
        .copied()
        .flatten()
        .ok_or_else(|| TqgError::Parse(format!("missing value in column {i}")))
}

fn check_header(table: &CsvTable, expected: &[&str]) -> Result<()> {
    if table.header.len() < expected.len() || table.header.iter().zip(expected).any(|(a, b)| a != b) {
        return Err(TqgError::Parse(format!(
            "unexpected header {:?}, expected {expected:?}",
            table.header
        )));
    }
    Ok(())
}

pub fn read_trajectory(path: &Path) -> Result<Vec<TrajectoryRow>> {
    let table = read_csv(path)?;
    check_header(&table, &TRAJECTORY_HEADER)?;
    table
        .rows
        .iter()
        .map(|r| {
            Ok(TrajectoryRow {
                s: required(r, 0)?,
                b_h4: required(r, 1)?,
                q_h3: required(r, 2)?,
                g: required(r, 3)?,
                phi: required(r, 4)?,
            })
        })
        .collect()
}

/// Radius trace with `# run_id=…,c=…,theta=…,D_data=…` metadata; the Gamma
/// column is present only when every sample carries Γ.
pub fn write_radius_trace(path: &Path, trace: &RadiusTrace) -> Result<()> {
    let with_gamma = !trace.samples.is_empty() && trace.samples.iter().all(|s| s.gamma.is_some());
    let mut header = vec!["s", "Theta", "phi", "G"];
    if with_gamma {
        header.push("Gamma");
    }
    let rows = trace
        .samples
        .iter()
        .map(|x| {
            let mut row = vec![Some(x.s), Some(x.theta_value), Some(x.phi), Some(x.g)];
            if with_gamma {
                row.push(x.gamma);
            }
            row
        })
        .collect();
    write_csv(
        path,
        &CsvTable {
            meta: vec![
                ("run_id".into(), trace.run_id.clone()),
                ("c".into(), format_f64(trace.c)),
                ("theta".into(), format_f64(trace.theta)),
                ("D_data".into(), format_f64(trace.d_data)),
            ],
            header: header.into_iter().map(String::from).collect(),
            rows,
        },
    )
}

pub fn read_radius_trace(path: &Path) -> Result<RadiusTrace> {
    let table = read_csv(path)?;
    check_header(&table, &["s", "Theta", "phi", "G"])?;
    let gamma_col = table.column("Gamma");
    let samples = table
        .rows
        .iter()
        .map(|r| {
            Ok(RadiusSample {
                s: required(r, 0)?,
                theta_value: required(r, 1)?,
                phi: required(r, 2)?,
                g: required(r, 3)?,
                gamma: gamma_col.map(|i| required(r, i)).transpose()?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(RadiusTrace {
        run_id: table.meta_value("run_id").unwrap_or_default().to_string(),
        c: table.meta_f64("c")?,
        theta: table.meta_f64("theta")?,
        d_data: table.meta_f64("D_data")?,
        samples,
    })
}

const LATTICE_HEADER: [&str; 3] = ["R", "partial_sum", "tail_estimate"];

pub fn write_lattice(path: &Path, table: &LatticeTable) -> Result<()> {
    write_csv(
        path,
        &CsvTable {
            meta: vec![("r".into(), format_f64(table.r))],
            header: LATTICE_HEADER.iter().map(|s| s.to_string()).collect(),
            rows: table
                .rows
                .iter()
                .map(|row| vec![Some(row.radius), Some(row.partial_sum), row.tail_estimate])
                .collect(),
        },
    )
}

pub fn read_lattice(path: &Path) -> Result<Vec<LatticeRow>> {
    let table = read_csv(path)?;
    check_header(&table, &LATTICE_HEADER)?;
    table
        .rows
        .iter()
        .map(|r| {
            Ok(LatticeRow {
                radius: required(r, 0)?,
                partial_sum: required(r, 1)?,
                tail_estimate: r.get(2).copied().flatten(),
            })
        })
        .collect()
}

/// (θ, s*) rows; s* is empty when no sample passed.
pub fn write_region_map(path: &Path, rows: &[(f64, Option<f64>)]) -> Result<()> {
    write_csv(
        path,
        &CsvTable {
            meta: Vec::new(),
            header: vec!["theta".into(), "s_star".into()],
            rows: rows.iter().map(|&(t, s)| vec![Some(t), s]).collect(),
        },
    )
}

pub fn read_region_map(path: &Path) -> Result<Vec<(f64, Option<f64>)>> {
    let table = read_csv(path)?;
    check_header(&table, &["theta", "s_star"])?;
    table
        .rows
        .iter()
        .map(|r| Ok((required(r, 0)?, r.get(1).copied().flatten())))
        .collect()
}
