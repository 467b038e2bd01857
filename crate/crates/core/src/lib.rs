//! Time-optimal route planning through time-varying current fields.
//!
//! The crate builds uniform lattice graphs with n-sector edge structure over
//! an operating area, weights edges by the time a vehicle needs to hold the
//! edge line against the local current, and searches them with either the
//! classic Dijkstra algorithm or a time-varying variant that evaluates edge
//! costs at the actual departure time. Reference solutions (Zermelo optimal
//! control and a straight-line baseline) score the graph routes.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cost;
pub mod flow;
pub mod geometry;
pub mod grid;
pub mod oracle;
pub mod report;
pub mod run;
pub mod scenario;
pub mod search;

pub use cost::{
    effective_speed, wfunc, CostConfig, GroundSpeed, Sampling, TravelTime, VehicleSpec,
};
pub use flow::{
    FieldSpec, FlowField, FlowJacobian, FlowVector, JetField, RiverField, UniformField,
};
pub use geometry::Vec2;
pub use grid::{build_grid, sector_offsets, segment_blocked, Edge, Graph, GridSpec, Obstacle};
pub use oracle::{direct_drive, score, shoot, solve_optimal, OracleConfig, Score, Trajectory};
pub use report::{export, Format, PathReport, VariantReport};
pub use run::{plan_variant, run_compare, run_plan, RunError};
pub use scenario::{load_scenario, parse_scenario, Scenario, ScenarioError};
pub use search::{dijkstra, dijkstra_from, extract_path, tve, EdgeWeight, SearchResult};
