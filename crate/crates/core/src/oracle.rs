//! Reference solutions used to score graph paths.
//!
//! [`solve_optimal`] integrates the Zermelo equations (vehicle kinematics plus
//! the optimal-heading ODE) with fixed-step RK4 and shoots on the initial
//! heading until a trajectory passes through the goal. [`direct_drive`] is the
//! baseline that holds the straight start-goal line, crabbing into the
//! current.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::{effective_speed, GroundSpeed, VehicleSpec};
use crate::flow::{FlowField, FlowJacobian, FlowVector, DEFAULT_FD_STEP};
use crate::geometry::Vec2;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("no initial heading brings the vehicle within {tolerance} of the goal (best miss {best_miss:.4} at heading {heading:.6} rad)")]
    FailedToConnect {
        tolerance: f64,
        best_miss: f64,
        heading: f64,
    },
    #[error("invalid oracle configuration: {0}")]
    InvalidConfig(String),
}

/// Position and world-frame heading (radians, kept in (-pi, pi]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleState {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl OracleState {
    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    fn offset(&self, rate: &StateRate, h: f64) -> OracleState {
        OracleState {
            x: self.x + h * rate.dx,
            y: self.y + h * rate.dy,
            heading: self.heading + h * rate.dheading,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateRate {
    pub dx: f64,
    pub dy: f64,
    pub dheading: f64,
}

/// Wraps an angle into (-pi, pi].
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Right-hand side given the local current and its partials.
pub fn zermelo_rates(
    state: &OracleState,
    flow: FlowVector,
    jac: &FlowJacobian,
    vehicle: &VehicleSpec,
) -> StateRate {
    let (sin, cos) = state.heading.sin_cos();
    StateRate {
        dx: flow.u + vehicle.speed * cos,
        dy: flow.v + vehicle.speed * sin,
        dheading: -jac.u_y * cos * cos + (jac.u_x - jac.v_y) * cos * sin + jac.v_x * sin * sin,
    }
}

pub fn zermelo_rhs<F: FlowField + ?Sized>(
    state: &OracleState,
    t: f64,
    field: &F,
    vehicle: &VehicleSpec,
    fd_step: f64,
) -> StateRate {
    let (flow, jac) = field.sample_with_jacobian(state.position(), t, fd_step);
    zermelo_rates(state, flow, &jac, vehicle)
}

fn rk4_step<F: FlowField + ?Sized>(
    s: &OracleState,
    t: f64,
    dt: f64,
    field: &F,
    vehicle: &VehicleSpec,
    fd_step: f64,
) -> OracleState {
    let k1 = zermelo_rhs(s, t, field, vehicle, fd_step);
    let k2 = zermelo_rhs(
        &s.offset(&k1, 0.5 * dt),
        t + 0.5 * dt,
        field,
        vehicle,
        fd_step,
    );
    let k3 = zermelo_rhs(
        &s.offset(&k2, 0.5 * dt),
        t + 0.5 * dt,
        field,
        vehicle,
        fd_step,
    );
    let k4 = zermelo_rhs(&s.offset(&k3, dt), t + dt, field, vehicle, fd_step);
    let w = dt / 6.0;
    OracleState {
        x: s.x + w * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx),
        y: s.y + w * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy),
        heading: normalize_angle(
            s.heading + w * (k1.dheading + 2.0 * k2.dheading + 2.0 * k3.dheading + k4.dheading),
        ),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Samples up to and including the point of closest approach.
    pub samples: Vec<TrajectorySample>,
    /// Distance from the goal at closest approach.
    pub miss: f64,
    /// Absolute time of closest approach.
    pub arrival_time: f64,
    pub start_time: f64,
    /// True if integration ran to the horizon without a capture.
    pub horizon_reached: bool,
}

impl Trajectory {
    pub fn duration(&self) -> f64 {
        self.arrival_time - self.start_time
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootConfig {
    pub dt: f64,
    /// Maximum integration time after the start.
    pub horizon: f64,
    pub fd_step: f64,
    /// Integration stops at the first local minimum of the goal distance
    /// inside this radius. Zero means always run to the horizon.
    pub capture_radius: f64,
}

impl ShootConfig {
    pub fn new(dt: f64, horizon: f64) -> Self {
        Self {
            dt,
            horizon,
            fd_step: DEFAULT_FD_STEP,
            capture_radius: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Approach {
    miss: f64,
    time: f64,
    horizon_reached: bool,
}

#[allow(clippy::too_many_arguments)]
fn integrate<F: FlowField + ?Sized>(
    field: &F,
    vehicle: &VehicleSpec,
    start: Vec2,
    goal: Vec2,
    t0: f64,
    heading0: f64,
    cfg: &ShootConfig,
    mut record: Option<&mut Vec<TrajectorySample>>,
) -> Approach {
    let mut s = OracleState {
        x: start.x,
        y: start.y,
        heading: normalize_angle(heading0),
    };
    let mut t = t0;
    let mut best = Approach {
        miss: start.distance(goal),
        time: t0,
        horizon_reached: false,
    };
    let mut dist = best.miss;
    let mut best_step = 0usize;
    let steps = (cfg.horizon / cfg.dt).ceil() as usize;
    if let Some(rec) = record.as_deref_mut() {
        rec.push(TrajectorySample {
            t,
            x: s.x,
            y: s.y,
            heading: s.heading,
        });
    }
    let mut captured = false;
    for k in 0..steps {
        let next = rk4_step(&s, t, cfg.dt, field, vehicle, cfg.fd_step);
        let tn = t0 + (k + 1) as f64 * cfg.dt;
        let (a, b) = (s.position(), next.position());
        let lam = Vec2::project_onto_segment(goal, a, b);
        let miss = a.lerp(b, lam).distance(goal);
        if miss < best.miss {
            best.miss = miss;
            best.time = t + lam * (tn - t);
            best_step = k;
        }
        let next_dist = b.distance(goal);
        if let Some(rec) = record.as_deref_mut() {
            rec.push(TrajectorySample {
                t: tn,
                x: next.x,
                y: next.y,
                heading: next.heading,
            });
        }
        if best.miss <= cfg.capture_radius && next_dist > dist {
            captured = true;
            break;
        }
        dist = next_dist;
        s = next;
        t = tn;
    }
    best.horizon_reached = !captured;
    if let Some(rec) = record {
        truncate_at(rec, best_step, best.time, goal);
    }
    best
}

/// Cuts the record after the closest-approach step and closes it with the
/// interpolated arrival sample.
fn truncate_at(rec: &mut Vec<TrajectorySample>, step: usize, time: f64, goal: Vec2) {
    if rec.len() < 2 {
        return;
    }
    let a = rec[step];
    let b = rec[step + 1];
    rec.truncate(step + 1);
    if time <= a.t {
        return;
    }
    let (pa, pb) = (Vec2::new(a.x, a.y), Vec2::new(b.x, b.y));
    let lam = Vec2::project_onto_segment(goal, pa, pb);
    let p = pa.lerp(pb, lam);
    let heading = normalize_angle(a.heading + lam * normalize_angle(b.heading - a.heading));
    rec.push(TrajectorySample {
        t: time,
        x: p.x,
        y: p.y,
        heading,
    });
}

/// Integrates from `start` with initial heading `heading0` and reports the
/// closest approach to `goal` within the horizon.
pub fn shoot<F: FlowField + ?Sized>(
    field: &F,
    vehicle: &VehicleSpec,
    start: Vec2,
    goal: Vec2,
    t0: f64,
    heading0: f64,
    cfg: &ShootConfig,
) -> Trajectory {
    let mut samples = Vec::new();
    let a = integrate(
        field,
        vehicle,
        start,
        goal,
        t0,
        heading0,
        cfg,
        Some(&mut samples),
    );
    Trajectory {
        samples,
        miss: a.miss,
        arrival_time: a.time,
        start_time: t0,
        horizon_reached: a.horizon_reached,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub heading_samples: usize,
    pub dt: f64,
    /// Optional coarser step for the heading search; connecting candidates
    /// are then re-polished at `dt`.
    pub search_dt: Option<f64>,
    /// Half-width (radians) of the heading interval re-polished at `dt`.
    pub polish_width: f64,
    pub horizon: f64,
    /// A trajectory connects when its closest approach is within this distance.
    pub position_tolerance: f64,
    pub fd_step: f64,
    /// Brackets kept per refinement level.
    pub beam: usize,
    /// Samples per bracket on each refinement level.
    pub zoom_samples: usize,
    pub zoom_levels: usize,
    pub golden_iterations: usize,
    /// Arc-length step of the direct-drive integration.
    pub direct_step: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            heading_samples: 720,
            dt: 0.05,
            search_dt: None,
            polish_width: 1e-4,
            horizon: 400.0,
            position_tolerance: 0.05,
            fd_step: DEFAULT_FD_STEP,
            beam: 8,
            zoom_samples: 24,
            zoom_levels: 4,
            golden_iterations: 60,
            direct_step: 1.0,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<(), OracleError> {
        let bad = |m: &str| Err(OracleError::InvalidConfig(m.to_string()));
        if self.heading_samples < 3 {
            return bad("heading_samples must be at least 3");
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive");
        }
        if let Some(c) = self.search_dt {
            if !(c > 0.0 && c.is_finite()) {
                return bad("search_dt must be positive");
            }
        }
        if !(self.polish_width > 0.0 && self.polish_width.is_finite()) {
            return bad("polish_width must be positive");
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad("horizon must be positive");
        }
        if !(self.position_tolerance > 0.0) {
            return bad("position_tolerance must be positive");
        }
        if !(self.fd_step > 0.0) {
            return bad("fd_step must be positive");
        }
        if self.beam == 0 || self.zoom_samples < 3 {
            return bad("beam must be >= 1 and zoom_samples >= 3");
        }
        if !(self.direct_step > 0.0 && self.direct_step.is_finite()) {
            return bad("direct_step must be positive");
        }
        Ok(())
    }

    fn shoot_config(&self, dt: f64) -> ShootConfig {
        ShootConfig {
            dt,
            horizon: self.horizon,
            fd_step: self.fd_step,
            capture_radius: self.position_tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalSolution {
    pub duration: f64,
    pub initial_heading: f64,
    pub trajectory: Trajectory,
    /// Number of trajectories integrated.
    pub shots: usize,
}

#[derive(Debug, Clone, Copy)]
struct Shot {
    heading: f64,
    miss: f64,
    time: f64,
}

#[derive(Debug, Clone, Copy)]
struct Bracket {
    center: f64,
    half_width: f64,
    miss: f64,
}

/// Indices of local minima of `miss` over a sequence; `circular` joins the ends.
fn local_minima(shots: &[Shot], circular: bool) -> Vec<usize> {
    let n = shots.len();
    (0..n)
        .filter(|&i| {
            let m = shots[i].miss;
            let left = if i > 0 {
                Some(shots[i - 1].miss)
            } else if circular {
                Some(shots[n - 1].miss)
            } else {
                None
            };
            let right = if i + 1 < n {
                Some(shots[i + 1].miss)
            } else if circular {
                Some(shots[0].miss)
            } else {
                None
            };
            left.is_none_or(|l| m <= l) && right.is_none_or(|r| m <= r)
        })
        .collect()
}

/// Minimum-time trajectory from `start` to `goal`.
///
/// Scans the initial heading over (-pi, pi], zooms into the most promising
/// local minima of the miss distance, then polishes each with golden-section
/// search. Among all trajectories that pass within `position_tolerance` of the
/// goal the earliest arrival wins.
pub fn solve_optimal<F: FlowField + ?Sized>(
    field: &F,
    vehicle: &VehicleSpec,
    start: Vec2,
    goal: Vec2,
    t0: f64,
    cfg: &OracleConfig,
) -> Result<OptimalSolution, OracleError> {
    cfg.validate()?;
    let shoot_cfg = cfg.shoot_config(cfg.dt);
    let search_cfg = cfg.shoot_config(cfg.search_dt.unwrap_or(cfg.dt));
    let shot_with = |sc: &ShootConfig, heading: f64| -> Shot {
        let a = integrate(field, vehicle, start, goal, t0, heading, sc, None);
        Shot {
            heading,
            miss: a.miss,
            time: a.time,
        }
    };
    let eval = |heading: f64| shot_with(&search_cfg, heading);
    let mut all: Vec<Shot> = Vec::new();

    let n = cfg.heading_samples;
    let spacing = TAU / n as f64;
    let scan: Vec<Shot> = (0..n)
        .into_par_iter()
        .map(|i| eval(-PI + (i + 1) as f64 * spacing))
        .collect();
    let mut brackets: Vec<Bracket> = local_minima(&scan, true)
        .into_iter()
        .map(|i| Bracket {
            center: scan[i].heading,
            half_width: spacing,
            miss: scan[i].miss,
        })
        .collect();
    all.extend_from_slice(&scan);
    keep_best(&mut brackets, cfg.beam);

    for _ in 0..cfg.zoom_levels {
        let m = cfg.zoom_samples;
        let mut next = Vec::new();
        for b in &brackets {
            let step = 2.0 * b.half_width / (m - 1) as f64;
            let shots: Vec<Shot> = (0..m)
                .into_par_iter()
                .map(|k| eval(b.center - b.half_width + k as f64 * step))
                .collect();
            next.extend(local_minima(&shots, false).into_iter().map(|i| Bracket {
                center: shots[i].heading,
                half_width: step,
                miss: shots[i].miss,
            }));
            all.extend_from_slice(&shots);
        }
        if next.is_empty() {
            break;
        }
        brackets = next;
        keep_best(&mut brackets, cfg.beam);
    }

    let polished: Vec<Vec<Shot>> = brackets
        .par_iter()
        .map(|b| {
            golden_section(
                &eval,
                b.center - b.half_width,
                b.center + b.half_width,
                cfg.golden_iterations,
            )
        })
        .collect();
    // One representative per bracket: its closest approach.
    let mut finalists: Vec<Shot> = polished.iter().filter_map(|shots| closest(shots)).collect();
    all.extend(polished.into_iter().flatten());

    if cfg.search_dt.is_some() {
        let fine = |heading: f64| shot_with(&shoot_cfg, heading);
        let repolished: Vec<Vec<Shot>> = finalists
            .par_iter()
            .filter(|s| s.miss <= cfg.position_tolerance)
            .map(|s| {
                golden_section(
                    &fine,
                    s.heading - cfg.polish_width,
                    s.heading + cfg.polish_width,
                    cfg.golden_iterations,
                )
            })
            .collect();
        finalists = repolished
            .iter()
            .filter_map(|shots| closest(shots))
            .collect();
        all.extend(repolished.into_iter().flatten());
    }

    let shots = all.len();
    let best = finalists
        .iter()
        .filter(|s| s.miss <= cfg.position_tolerance)
        .min_by(|a, b| a.time.total_cmp(&b.time));
    match best {
        Some(s) => {
            let trajectory = shoot(field, vehicle, start, goal, t0, s.heading, &shoot_cfg);
            Ok(OptimalSolution {
                duration: trajectory.duration(),
                initial_heading: normalize_angle(s.heading),
                trajectory,
                shots: shots + 1,
            })
        }
        None => {
            let closest = all
                .iter()
                .min_by(|a, b| a.miss.total_cmp(&b.miss))
                .expect("scan is non-empty");
            Err(OracleError::FailedToConnect {
                tolerance: cfg.position_tolerance,
                best_miss: closest.miss,
                heading: normalize_angle(closest.heading),
            })
        }
    }
}

fn closest(shots: &[Shot]) -> Option<Shot> {
    shots
        .iter()
        .copied()
        .min_by(|a, b| a.miss.total_cmp(&b.miss))
}

fn keep_best(brackets: &mut Vec<Bracket>, beam: usize) {
    brackets.sort_by(|a, b| {
        a.miss
            .total_cmp(&b.miss)
            .then(a.center.total_cmp(&b.center))
    });
    let mut kept: Vec<Bracket> = Vec::with_capacity(beam);
    for b in brackets.drain(..) {
        if kept.len() == beam {
            break;
        }
        if kept
            .iter()
            .all(|k| (k.center - b.center).abs() > 0.5 * k.half_width.min(b.half_width))
        {
            kept.push(b);
        }
    }
    *brackets = kept;
}

/// Golden-section minimisation of the miss distance on `[lo, hi]`; returns
/// every evaluated shot.
fn golden_section(
    eval: &(impl Fn(f64) -> Shot + Sync),
    mut lo: f64,
    mut hi: f64,
    iterations: usize,
) -> Vec<Shot> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut out = Vec::with_capacity(iterations + 2);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = eval(x1);
    let mut f2 = eval(x2);
    out.push(f1);
    out.push(f2);
    for _ in 0..iterations {
        if hi - lo <= 1e-15 * (1.0 + lo.abs()) {
            break;
        }
        if f1.miss <= f2.miss {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = eval(x1);
            out.push(f1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = eval(x2);
            out.push(f2);
        }
    }
    out
}

/// Travel time along the straight `start`-`goal` line while crabbing into the
/// current, or `None` if the current makes the line untenable anywhere.
/// Integrates `dt/ds = 1 / ground_speed(s, t)` with RK4 in arc length `step`.
pub fn direct_drive<F: FlowField + ?Sized>(
    field: &F,
    vehicle: &VehicleSpec,
    start: Vec2,
    goal: Vec2,
    t0: f64,
    step: f64,
) -> Option<f64> {
    assert!(step > 0.0, "direct-drive step must be positive");
    let length = start.distance(goal);
    if length == 0.0 {
        return Some(0.0);
    }
    let dir = (goal - start) * (1.0 / length);
    let pace = |s: f64, t: f64| -> Option<f64> {
        match effective_speed(vehicle, field.sample(start + dir * s, t), dir) {
            Ok(GroundSpeed::Feasible(g)) => Some(1.0 / g),
            _ => None,
        }
    };
    let mut s = 0.0;
    let mut t = t0;
    while s < length {
        let h = step.min(length - s);
        let k1 = pace(s, t)?;
        let k2 = pace(s + 0.5 * h, t + 0.5 * h * k1)?;
        let k3 = pace(s + 0.5 * h, t + 0.5 * h * k2)?;
        let k4 = pace(s + h, t + h * k3)?;
        t += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        s += h;
    }
    Some(t - t0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score {
    /// Percentage saved against direct drive; absent when direct drive is infeasible.
    pub saving_pct: Option<f64>,
    /// Percentage above the optimal-control time.
    pub deviation_pct: f64,
}

pub fn score(t_path: f64, t_direct: Option<f64>, t_optimal: f64) -> Score {
    Score {
        saving_pct: t_direct.map(|d| 100.0 * (d - t_path) / d),
        deviation_pct: 100.0 * (t_path - t_optimal) / t_optimal,
    }
}
