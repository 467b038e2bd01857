//! Runs a scenario: one time-varying search per grid variant plus the
//! reference solutions, assembled into a [`PathReport`].

use rayon::prelude::*;
use thiserror::Error;

use crate::cost::TravelTime;
use crate::flow::FlowField;
use crate::grid::{build_grid, Graph, GridError};
use crate::oracle::{direct_drive, solve_optimal, OracleError};
use crate::report::{OptimalReport, PathPoint, PathReport, ReferenceReport, Snap, VariantReport};
use crate::scenario::{Scenario, Variant};
use crate::search::{
    dijkstra_with_options, extract_path, precompute_weights, tve_with_options, SearchError,
    SearchResult,
};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("variant \"{variant}\": {source}")]
    Grid { variant: String, source: GridError },
    #[error("variant \"{variant}\": {source}")]
    Search {
        variant: String,
        source: SearchError,
    },
}

/// Everything produced for one variant, including the data needed to audit it.
#[derive(Debug, Clone)]
pub struct VariantPlan {
    pub graph: Graph,
    pub result: SearchResult,
    pub report: VariantReport,
}

fn snap(graph: &Graph, p: crate::Vec2) -> Snap {
    let (vertex, distance) = graph.nearest_vertex(p).expect("graphs are never empty");
    Snap {
        requested: p,
        vertex,
        snapped: graph.position(vertex),
        distance,
    }
}

/// Builds the variant's grid and runs the time-varying search from the
/// snapped start at `t0`.
pub fn plan_variant(scenario: &Scenario, variant: &Variant) -> Result<VariantPlan, RunError> {
    let graph =
        build_grid(&variant.grid, &scenario.obstacles).map_err(|source| RunError::Grid {
            variant: variant.name.clone(),
            source,
        })?;
    let search_err = |source| RunError::Search {
        variant: variant.name.clone(),
        source,
    };
    let start = snap(&graph, scenario.start);
    let goal = snap(&graph, scenario.goal);
    let weight = TravelTime::new(&scenario.field, scenario.vehicle, scenario.cost);
    let opts = scenario.search.options();
    let result =
        tve_with_options(&graph, start.vertex, scenario.t0, &weight, &opts).map_err(search_err)?;

    let path = match extract_path(&result, goal.vertex, scenario.cost.large_weight) {
        Ok(p) => p,
        Err(SearchError::NoFeasiblePath { .. }) => Vec::new(),
        Err(e) => return Err(search_err(e)),
    };
    let duration = (!path.is_empty()).then(|| result.duration(goal.vertex));
    let dijkstra_duration = if scenario.field.is_stationary()
        && scenario.search.dijkstra_crosscheck
        && duration.is_some()
    {
        let weights = precompute_weights(&graph, &weight, scenario.t0);
        let d = dijkstra_with_options(&graph, start.vertex, scenario.t0, &weights, &opts)
            .map_err(search_err)?;
        Some(d.duration(goal.vertex))
    } else {
        None
    };
    let path = path
        .into_iter()
        .map(|v| {
            let p = graph.position(v);
            PathPoint {
                vertex: v,
                x: p.x,
                y: p.y,
                t_arrival: result.arrival[v],
            }
        })
        .collect();
    let report = VariantReport {
        name: variant.name.clone(),
        sector: variant.grid.sector,
        vertices: graph.vertex_count(),
        edges: graph.edge_count(),
        start,
        goal,
        duration,
        saving_pct: None,
        deviation_pct: None,
        path,
        stats: result.stats,
        dijkstra_duration,
    };
    Ok(VariantPlan {
        graph,
        result,
        report,
    })
}

fn base_report(scenario: &Scenario) -> PathReport {
    PathReport {
        scenario: scenario.name.clone(),
        field: scenario.field.kind().to_string(),
        t0: scenario.t0,
        ..PathReport::default()
    }
}

fn plan_all(scenario: &Scenario) -> Result<Vec<VariantReport>, RunError> {
    scenario
        .variants
        .par_iter()
        .map(|v| plan_variant(scenario, v).map(|p| p.report))
        .collect()
}

/// Graph searches only.
pub fn run_plan(scenario: &Scenario) -> Result<PathReport, RunError> {
    let mut report = base_report(scenario);
    report.variants = plan_all(scenario)?;
    Ok(report)
}

pub fn run_direct_drive(scenario: &Scenario) -> ReferenceReport {
    let d = direct_drive(
        &scenario.field,
        &scenario.vehicle,
        scenario.start,
        scenario.goal,
        scenario.t0,
        scenario.oracle.direct_step,
    );
    ReferenceReport {
        feasible: d.is_some(),
        duration: d,
        saving_pct: None,
        deviation_pct: None,
        note: None,
    }
}

/// Optimal-control reference between the requested (unsnapped) endpoints.
/// A failure to connect is recorded as a note, not an error.
pub fn run_optimal(scenario: &Scenario) -> OptimalReport {
    match solve_optimal(
        &scenario.field,
        &scenario.vehicle,
        scenario.start,
        scenario.goal,
        scenario.t0,
        &scenario.oracle,
    ) {
        Ok(s) => OptimalReport {
            summary: ReferenceReport {
                feasible: true,
                duration: Some(s.duration),
                saving_pct: None,
                deviation_pct: None,
                note: None,
            },
            initial_heading: Some(s.initial_heading),
            miss: Some(s.trajectory.miss),
            shots: s.shots,
            trajectory: s.trajectory.samples,
        },
        Err(e) => OptimalReport {
            summary: ReferenceReport {
                feasible: false,
                duration: None,
                saving_pct: None,
                deviation_pct: None,
                note: Some(e.to_string()),
            },
            initial_heading: None,
            miss: match e {
                OracleError::FailedToConnect { best_miss, .. } => Some(best_miss),
                OracleError::InvalidConfig(_) => None,
            },
            shots: 0,
            trajectory: Vec::new(),
        },
    }
}

/// Graph searches for every variant, direct drive and (unless disabled) the
/// optimal-control reference, with score columns filled in. Variant rows
/// keep declaration order.
pub fn run_compare(scenario: &Scenario) -> Result<PathReport, RunError> {
    let mut report = base_report(scenario);
    let (variants, optimal) = rayon::join(
        || plan_all(scenario),
        || scenario.optimal_control.then(|| run_optimal(scenario)),
    );
    report.variants = variants?;
    report.direct_drive = Some(run_direct_drive(scenario));
    report.optimal_control = optimal;
    report.apply_scores();
    Ok(report)
}
