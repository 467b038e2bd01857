//! Comparison reports and their CSV/JSON export.

use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec2;
use crate::oracle::{Score, TrajectorySample};
use crate::search::SearchStats;

pub const REPORT_FORMAT_VERSION: u32 = 1;

pub const TABLE_HEADER: &str = "variant,time,vertices,edges,saving_pct,deviation_pct";

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("cannot serialize report: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// A requested position and the lattice vertex it was snapped to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Snap {
    pub requested: Vec2,
    pub vertex: usize,
    pub snapped: Vec2,
    pub distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub vertex: usize,
    pub x: f64,
    pub y: f64,
    pub t_arrival: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantReport {
    pub name: String,
    pub sector: u32,
    pub vertices: usize,
    pub edges: usize,
    pub start: Snap,
    pub goal: Snap,
    /// Travel time from departure to goal arrival; `None` when no feasible path exists.
    pub duration: Option<f64>,
    pub saving_pct: Option<f64>,
    pub deviation_pct: Option<f64>,
    pub path: Vec<PathPoint>,
    pub stats: SearchStats,
    /// Duration found by Dijkstra on precomputed weights, for stationary fields.
    pub dijkstra_duration: Option<f64>,
}

impl VariantReport {
    pub fn is_feasible(&self) -> bool {
        self.duration.is_some()
    }
}

/// Outcome of a reference method. `duration: None` with `feasible: false`
/// means the method has no solution (printed as `inf`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceReport {
    pub feasible: bool,
    pub duration: Option<f64>,
    pub saving_pct: Option<f64>,
    pub deviation_pct: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalReport {
    #[serde(flatten)]
    pub summary: ReferenceReport,
    pub initial_heading: Option<f64>,
    pub miss: Option<f64>,
    pub shots: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trajectory: Vec<TrajectorySample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathReport {
    pub format_version: u32,
    pub scenario: String,
    pub field: String,
    pub t0: f64,
    pub variants: Vec<VariantReport>,
    pub direct_drive: Option<ReferenceReport>,
    pub optimal_control: Option<OptimalReport>,
}

impl Default for PathReport {
    fn default() -> Self {
        Self {
            format_version: REPORT_FORMAT_VERSION,
            scenario: String::new(),
            field: String::new(),
            t0: 0.0,
            variants: Vec::new(),
            direct_drive: None,
            optimal_control: None,
        }
    }
}

impl PathReport {
    pub fn all_feasible(&self) -> bool {
        self.variants.iter().all(VariantReport::is_feasible)
    }

    /// Fills the percentage columns from the duration columns.
    pub fn apply_scores(&mut self) {
        let direct = self.direct_drive.as_ref().and_then(|d| d.duration);
        let optimal = self
            .optimal_control
            .as_ref()
            .and_then(|o| o.summary.duration);
        let columns = |t: f64| match optimal {
            Some(o) => {
                let s: Score = crate::oracle::score(t, direct, o);
                (s.saving_pct, Some(s.deviation_pct))
            }
            None => (direct.map(|d| 100.0 * (d - t) / d), None),
        };
        for v in &mut self.variants {
            (v.saving_pct, v.deviation_pct) = match v.duration {
                Some(t) => columns(t),
                None => (None, None),
            };
        }
        for r in [
            self.direct_drive.as_mut(),
            self.optimal_control.as_mut().map(|o| &mut o.summary),
        ]
        .into_iter()
        .flatten()
        {
            (r.saving_pct, r.deviation_pct) = match r.duration {
                Some(t) => columns(t),
                None => (None, None),
            };
        }
    }

    /// The comparison table: reference rows first, then one row per variant.
    pub fn table_csv(&self) -> String {
        write_csv(
            &TABLE_HEADER.split(',').collect::<Vec<_>>(),
            self.table_rows(),
        )
    }

    fn table_rows(&self) -> Vec<[String; 6]> {
        let mut rows: Vec<[String; 6]> = Vec::new();
        let reference = |name: &str, r: &ReferenceReport| {
            [
                name.to_string(),
                time_cell(r.feasible, r.duration),
                String::new(),
                String::new(),
                pct_cell(r.feasible, r.saving_pct),
                pct_cell(r.feasible, r.deviation_pct),
            ]
        };
        if let Some(d) = &self.direct_drive {
            rows.push(reference("direct-drive", d));
        }
        if let Some(o) = &self.optimal_control {
            rows.push(reference("optimal-control", &o.summary));
        }
        for v in &self.variants {
            let feasible = v.is_feasible();
            rows.push([
                v.name.clone(),
                time_cell(feasible, v.duration),
                v.vertices.to_string(),
                v.edges.to_string(),
                pct_cell(feasible, v.saving_pct),
                pct_cell(feasible, v.deviation_pct),
            ]);
        }
        rows
    }

    /// Fixed-width rendering of the table for terminals.
    pub fn table_text(&self) -> String {
        let header: [String; 6] = TABLE_HEADER
            .split(',')
            .map(String::from)
            .collect::<Vec<_>>()
            .try_into()
            .expect("six columns");
        let mut rows = vec![header];
        rows.extend(self.table_rows());
        let widths: Vec<usize> = (0..6)
            .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for r in &rows {
            let cells: Vec<String> = r
                .iter()
                .enumerate()
                .map(|(c, s)| {
                    if c == 0 {
                        format!("{s:<w$}", w = widths[c])
                    } else {
                        format!("{s:>w$}", w = widths[c])
                    }
                })
                .collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Result<String, ExportError> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<PathReport, serde_json::Error> {
        serde_json::from_str(text)
    }
}

fn write_csv<R: IntoIterator<Item = I>, I: IntoIterator<Item = T>, T: AsRef<[u8]>>(
    header: &[&str],
    rows: R,
) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    // Writing into memory cannot fail.
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("fields are UTF-8")
}

fn time_cell(feasible: bool, t: Option<f64>) -> String {
    match (feasible, t) {
        (true, Some(t)) => format!("{t:.2}"),
        (false, _) => "inf".into(),
        (true, None) => String::new(),
    }
}

fn pct_cell(feasible: bool, p: Option<f64>) -> String {
    match (feasible, p) {
        (_, Some(p)) => format!("{p:.2}"),
        (false, None) => "inf".into(),
        (true, None) => String::new(),
    }
}

pub fn path_csv(path: &[PathPoint]) -> String {
    write_csv(
        &["x", "y", "t_arrival"],
        path.iter()
            .map(|p| [p.x.to_string(), p.y.to_string(), p.t_arrival.to_string()]),
    )
}

pub fn trajectory_csv(samples: &[TrajectorySample]) -> String {
    write_csv(
        &["t", "x", "y", "heading"],
        samples.iter().map(|s| {
            [
                s.t.to_string(),
                s.x.to_string(),
                s.y.to_string(),
                s.heading.to_string(),
            ]
        }),
    )
}

fn file_stem(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn write_file(path: PathBuf, contents: &str) -> Result<PathBuf, ExportError> {
    std::fs::write(&path, contents).map_err(|source| ExportError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Writes the report table (or JSON document) and one path file per feasible
/// variant into `dir`. Returns the files written.
pub fn export(
    report: &PathReport,
    format: Format,
    dir: &Path,
) -> Result<Vec<PathBuf>, ExportError> {
    std::fs::create_dir_all(dir).map_err(|source| ExportError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let stem = if report.scenario.is_empty() {
        "report".to_string()
    } else {
        file_stem(&report.scenario)
    };
    let mut written = Vec::new();
    written.push(match format {
        Format::Csv => write_file(dir.join(format!("{stem}.csv")), &report.table_csv())?,
        Format::Json => write_file(dir.join(format!("{stem}.json")), &report.to_json()?)?,
    });
    for v in report.variants.iter().filter(|v| v.is_feasible()) {
        let name = format!("{stem}_{}_path.csv", file_stem(&v.name));
        written.push(write_file(dir.join(name), &path_csv(&v.path))?);
    }
    if let Some(o) = report
        .optimal_control
        .as_ref()
        .filter(|o| !o.trajectory.is_empty())
    {
        written.push(write_file(
            dir.join(format!("{stem}_optimal_trajectory.csv")),
            &trajectory_csv(&o.trajectory),
        )?);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snap(x: f64, y: f64) -> Snap {
        Snap {
            requested: Vec2::new(x, y),
            vertex: 0,
            snapped: Vec2::new(x, y),
            distance: 0.0,
        }
    }

    fn variant(name: &str, duration: Option<f64>) -> VariantReport {
        VariantReport {
            name: name.into(),
            sector: 1,
            vertices: 403,
            edges: 2964,
            start: snap(0.0, 30.0),
            goal: snap(300.0, 30.0),
            duration,
            saving_pct: None,
            deviation_pct: None,
            path: vec![
                PathPoint {
                    vertex: 6,
                    x: 0.0,
                    y: 30.0,
                    t_arrival: 0.0,
                },
                PathPoint {
                    vertex: 19,
                    x: 10.0,
                    y: 30.0,
                    t_arrival: 4.545454545454546,
                },
            ],
            stats: SearchStats::default(),
            dijkstra_duration: None,
        }
    }

    fn reference(duration: Option<f64>) -> ReferenceReport {
        ReferenceReport {
            feasible: duration.is_some(),
            duration,
            saving_pct: None,
            deviation_pct: None,
            note: None,
        }
    }

    fn river_like() -> PathReport {
        let mut r = PathReport {
            scenario: "river".into(),
            field: "river".into(),
            variants: vec![variant("1-sector", Some(165.48)), variant("blocked", None)],
            direct_drive: Some(reference(Some(179.52))),
            optimal_control: Some(OptimalReport {
                summary: reference(Some(161.79)),
                initial_heading: Some(-0.8),
                miss: Some(0.01),
                shots: 10,
                trajectory: vec![],
            }),
            ..PathReport::default()
        };
        r.apply_scores();
        r
    }

    #[test]
    fn variant_names_are_quoted() {
        let mut r = river_like();
        r.variants[0].name = "a,b".into();
        assert!(r.table_csv().contains("\n\"a,b\",165.48,"));
    }

    #[test]
    fn empty_report_is_header_only() {
        assert_eq!(
            PathReport::default().table_csv(),
            format!("{TABLE_HEADER}\n")
        );
    }

    #[test]
    fn table_rows_and_scores() {
        let csv = river_like().table_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[1], "direct-drive,179.52,,,0.00,10.96");
        assert_eq!(lines[2], "optimal-control,161.79,,,9.88,0.00");
        assert_eq!(lines[3], "1-sector,165.48,403,2964,7.82,2.28");
        assert_eq!(lines[4], "blocked,inf,403,2964,inf,inf");
    }

    #[test]
    fn infeasible_direct_drive_prints_inf() {
        let mut r = river_like();
        r.direct_drive = Some(reference(None));
        r.apply_scores();
        let csv = r.table_csv();
        assert!(csv.contains("direct-drive,inf,,,inf,inf"), "{csv}");
        assert!(csv.contains("1-sector,165.48,403,2964,,2.28"), "{csv}");
    }

    #[test]
    fn json_round_trip() {
        let r = river_like();
        let back = PathReport::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn path_csv_keeps_full_precision() {
        let csv = path_csv(&variant("a", Some(1.0)).path);
        assert_eq!(csv, "x,y,t_arrival\n0,30,0\n10,30,4.545454545454546\n");
    }

    #[test]
    fn export_writes_table_and_paths() {
        let dir = tempfile::tempdir().unwrap();
        let files = export(&river_like(), Format::Csv, dir.path()).unwrap();
        let names: Vec<String> = files
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        assert_eq!(names, ["river.csv", "river_1-sector_path.csv"]);
        let files = export(&river_like(), Format::Json, dir.path()).unwrap();
        let text = std::fs::read_to_string(&files[0]).unwrap();
        assert_eq!(PathReport::from_json(&text).unwrap(), river_like());
    }
}
