//! Scenario files: a TOML description of one planning problem and the grid
//! variants to compare on it.
//!
//! ```toml
//! format_version = 1
//! name = "river"
//! start = { x = 0.0, y = 30.0 }
//! goal = { x = 300.0, y = 30.0 }
//!
//! [field]
//! kind = "river"
//! width = 300.0
//! peak_current = 1.8
//!
//! [vehicle]
//! speed = 2.2
//!
//! [grid]
//! origin = { x = 0.0, y = 0.0 }
//! nx = 31
//! ny = 13
//! dx = 10.0
//! dy = 5.0
//!
//! [[variants]]
//! name = "1-sector"
//! sector = 1
//! ```
//!
//! Unknown keys are rejected everywhere.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::{CostConfig, VehicleSpec};
use crate::flow::FieldSpec;
use crate::geometry::Vec2;
use crate::grid::{GridSpec, Obstacle};
use crate::oracle::OracleConfig;
use crate::search::{SearchOptions, DEFAULT_INSERTION_CAP_FACTOR};

pub const SCENARIO_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid scenario: `{field}` {reason}")]
    Invalid { field: String, reason: String },
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        field: field.into(),
        reason: reason.into(),
    }
}

/// Lattice layout shared by all variants unless a variant overrides it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseGrid {
    pub origin: Vec2,
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantSpec {
    pub name: String,
    pub sector: u32,
    pub origin: Option<Vec2>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub dx: Option<f64>,
    pub dy: Option<f64>,
}

impl VariantSpec {
    pub fn resolve(&self, base: &BaseGrid) -> GridSpec {
        GridSpec {
            origin: self.origin.unwrap_or(base.origin),
            nx: self.nx.unwrap_or(base.nx),
            ny: self.ny.unwrap_or(base.ny),
            dx: self.dx.unwrap_or(base.dx),
            dy: self.dy.unwrap_or(base.dy),
            sector: self.sector,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSection {
    pub insertion_cap_factor: usize,
    /// Also run Dijkstra on precomputed weights when the field is stationary.
    pub dijkstra_crosscheck: bool,
}

impl Default for SearchSection {
    fn default() -> Self {
        Self {
            insertion_cap_factor: DEFAULT_INSERTION_CAP_FACTOR,
            dijkstra_crosscheck: true,
        }
    }
}

impl SearchSection {
    pub fn options(&self) -> SearchOptions {
        SearchOptions {
            goal: None,
            insertion_cap_factor: self.insertion_cap_factor,
        }
    }
}

/// On-disk layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    format_version: u32,
    name: String,
    #[serde(default)]
    description: String,
    #[serde(default)]
    t0: f64,
    start: Vec2,
    goal: Vec2,
    /// Keys whose values were chosen rather than taken from a source.
    #[serde(default)]
    inferred: Vec<String>,
    field: FieldSpec,
    vehicle: VehicleSpec,
    grid: BaseGrid,
    variants: Vec<VariantSpec>,
    #[serde(default)]
    obstacles: Vec<Obstacle>,
    #[serde(default)]
    cost: CostConfig,
    #[serde(default)]
    oracle: OracleConfig,
    /// Run the optimal-control reference in comparisons.
    #[serde(default = "yes")]
    optimal_control: bool,
    #[serde(default)]
    search: SearchSection,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub name: String,
    pub grid: GridSpec,
}

/// A fully validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub t0: f64,
    pub start: Vec2,
    pub goal: Vec2,
    pub inferred: Vec<String>,
    pub field: FieldSpec,
    pub vehicle: VehicleSpec,
    pub variants: Vec<Variant>,
    pub obstacles: Vec<Obstacle>,
    pub cost: CostConfig,
    pub oracle: OracleConfig,
    pub optimal_control: bool,
    pub search: SearchSection,
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&text).map_err(|e| match e {
        ScenarioError::Parse { message, .. } => ScenarioError::Parse {
            path: path.to_path_buf(),
            message,
        },
        other => other,
    })
}

/// Parses and validates scenario text. Parse errors carry line and column.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| ScenarioError::Parse {
        path: PathBuf::from("<scenario>"),
        message: e.to_string(),
    })?;
    file.validate()
}

impl ScenarioFile {
    fn validate(self) -> Result<Scenario, ScenarioError> {
        if self.format_version != SCENARIO_FORMAT_VERSION {
            return Err(invalid(
                "format_version",
                format!(
                    "must be {SCENARIO_FORMAT_VERSION}, got {}",
                    self.format_version
                ),
            ));
        }
        if self.name.trim().is_empty() {
            return Err(invalid("name", "must not be empty"));
        }
        if !self.t0.is_finite() {
            return Err(invalid("t0", "must be finite"));
        }
        self.field
            .validate()
            .map_err(|e| invalid("field", e.to_string()))?;
        if VehicleSpec::new(self.vehicle.speed).is_none() {
            return Err(invalid(
                "vehicle.speed",
                format!("must be positive, got {}", self.vehicle.speed),
            ));
        }
        self.cost.validate().map_err(|e| invalid("cost", e))?;
        self.oracle
            .validate()
            .map_err(|e| invalid("oracle", e.to_string()))?;
        if self.search.insertion_cap_factor == 0 {
            return Err(invalid("search.insertion_cap_factor", "must be at least 1"));
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            o.validate()
                .map_err(|e| invalid(format!("obstacles[{i}]"), e))?;
        }
        for (key, p) in [("start", self.start), ("goal", self.goal)] {
            if !p.is_finite() {
                return Err(invalid(key, "must be finite"));
            }
            if let Some(i) = self.obstacles.iter().position(|o| o.contains(p)) {
                return Err(invalid(key, format!("lies inside obstacles[{i}]")));
            }
        }
        if self.variants.is_empty() {
            return Err(invalid("variants", "at least one grid variant is required"));
        }
        let mut variants = Vec::with_capacity(self.variants.len());
        for (i, v) in self.variants.iter().enumerate() {
            let field = format!("variants[{i}]");
            if v.name.trim().is_empty() {
                return Err(invalid(format!("{field}.name"), "must not be empty"));
            }
            if self.variants[..i].iter().any(|w| w.name == v.name) {
                return Err(invalid(
                    format!("{field}.name"),
                    format!("duplicates variant \"{}\"", v.name),
                ));
            }
            let grid = v.resolve(&self.grid);
            grid.validate()
                .map_err(|e| invalid(field.clone(), e.to_string()))?;
            for (key, p) in [("start", self.start), ("goal", self.goal)] {
                if !grid.contains(p) {
                    let max = grid.extent_max();
                    return Err(invalid(
                        key,
                        format!(
                            "({}, {}) is outside the grid of variant \"{}\" ([{}, {}] x [{}, {}])",
                            p.x, p.y, v.name, grid.origin.x, max.x, grid.origin.y, max.y
                        ),
                    ));
                }
            }
            variants.push(Variant {
                name: v.name.clone(),
                grid,
            });
        }
        Ok(Scenario {
            name: self.name,
            description: self.description,
            t0: self.t0,
            start: self.start,
            goal: self.goal,
            inferred: self.inferred,
            field: self.field,
            vehicle: self.vehicle,
            variants,
            obstacles: self.obstacles,
            cost: self.cost,
            oracle: self.oracle,
            optimal_control: self.optimal_control,
            search: self.search,
        })
    }
}
