//! Time-dependent edge weights: travel time along a straight edge for a
//! vehicle holding its cruising speed through the water.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow::{FlowField, FlowVector};
use crate::geometry::Vec2;

pub const DEFAULT_LARGE_WEIGHT: f64 = 1e9;

#[derive(Debug, Error, PartialEq)]
pub enum CostError {
    #[error("direction must be a unit vector (|dir| = {0})")]
    NonUnitDirection(f64),
    #[error("edge endpoints coincide")]
    DegenerateSegment,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleSpec {
    /// Cruising speed through the water.
    pub speed: f64,
}

impl VehicleSpec {
    pub fn new(speed: f64) -> Option<Self> {
        (speed > 0.0 && speed.is_finite()).then_some(Self { speed })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    /// Current frozen at the departure time, sampled at each piece midpoint.
    #[default]
    Midpoint,
    /// Each piece samples the current at the time the vehicle enters it.
    SubstepResampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostConfig {
    /// Duration assigned to edges the vehicle cannot hold.
    pub large_weight: f64,
    pub substeps: u32,
    pub sampling: Sampling,
}

impl Default for CostConfig {
    fn default() -> Self {
        Self {
            large_weight: DEFAULT_LARGE_WEIGHT,
            substeps: 1,
            sampling: Sampling::Midpoint,
        }
    }
}

impl CostConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.large_weight.is_finite() && self.large_weight > 0.0) {
            return Err(format!(
                "large_weight must be positive and finite, got {}",
                self.large_weight
            ));
        }
        if self.substeps == 0 {
            return Err("substeps must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GroundSpeed {
    Feasible(f64),
    /// The cross-current overpowers the vehicle or the net progress is not positive.
    Infeasible,
}

impl GroundSpeed {
    pub fn value(self) -> Option<f64> {
        match self {
            GroundSpeed::Feasible(s) => Some(s),
            GroundSpeed::Infeasible => None,
        }
    }
}

/// Speed over ground along `dir` when the vehicle crabs into the cross-current
/// so that it stays on the line.
pub fn effective_speed(
    vehicle: &VehicleSpec,
    current: FlowVector,
    dir: Vec2,
) -> Result<GroundSpeed, CostError> {
    let n = dir.norm();
    if !((n - 1.0).abs() <= 1e-9) {
        return Err(CostError::NonUnitDirection(n));
    }
    Ok(ground_speed(vehicle.speed, current.as_vec2(), dir))
}

#[inline]
fn ground_speed(speed: f64, current: Vec2, dir: Vec2) -> GroundSpeed {
    let along = current.dot(dir);
    let across = dir.cross(current);
    let slack = speed * speed - across * across;
    if slack <= 0.0 {
        return GroundSpeed::Infeasible;
    }
    let g = along + slack.sqrt();
    if g > 0.0 {
        GroundSpeed::Feasible(g)
    } else {
        GroundSpeed::Infeasible
    }
}

/// Travel time from `from` to `to` departing at `t_depart`.
pub fn wfunc<F: FlowField + ?Sized>(
    from: Vec2,
    to: Vec2,
    t_depart: f64,
    field: &F,
    vehicle: &VehicleSpec,
    cfg: &CostConfig,
) -> Result<f64, CostError> {
    let delta = to - from;
    let length = delta.norm();
    if !(length > 0.0) {
        return Err(CostError::DegenerateSegment);
    }
    Ok(traverse(
        from,
        delta * (1.0 / length),
        length,
        t_depart,
        field,
        vehicle,
        cfg,
    ))
}

/// `wfunc` with the edge geometry already known.
pub(crate) fn traverse<F: FlowField + ?Sized>(
    from: Vec2,
    dir: Vec2,
    length: f64,
    t_depart: f64,
    field: &F,
    vehicle: &VehicleSpec,
    cfg: &CostConfig,
) -> f64 {
    let pieces = cfg.substeps.max(1);
    let piece = length / pieces as f64;
    let mut elapsed = 0.0;
    for k in 0..pieces {
        let mid = from + dir * ((k as f64 + 0.5) * piece);
        let t = match cfg.sampling {
            Sampling::Midpoint => t_depart,
            Sampling::SubstepResampled => t_depart + elapsed,
        };
        match ground_speed(vehicle.speed, field.sample(mid, t).as_vec2(), dir) {
            GroundSpeed::Feasible(s) => elapsed += piece / s,
            GroundSpeed::Infeasible => return cfg.large_weight,
        }
    }
    elapsed
}

/// Binds a field, a vehicle and a cost configuration into an edge weight
/// usable by the searches.
#[derive(Debug, Clone, Copy)]
pub struct TravelTime<'a, F: ?Sized> {
    pub field: &'a F,
    pub vehicle: VehicleSpec,
    pub cfg: CostConfig,
}

impl<'a, F: FlowField + ?Sized> TravelTime<'a, F> {
    pub fn new(field: &'a F, vehicle: VehicleSpec, cfg: CostConfig) -> Self {
        Self {
            field,
            vehicle,
            cfg,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{RiverField, UniformField};

    const V: VehicleSpec = VehicleSpec { speed: 2.2 };
    const EAST: Vec2 = Vec2 { x: 1.0, y: 0.0 };

    #[test]
    fn still_water_speed() {
        let s = effective_speed(&V, FlowVector::new(0.0, 0.0), Vec2::new(0.6, 0.8)).unwrap();
        assert_eq!(s, GroundSpeed::Feasible(2.2));
    }

    #[test]
    fn tailwind_adds() {
        let s = effective_speed(&V, FlowVector::new(1.0, 0.0), EAST)
            .unwrap()
            .value()
            .unwrap();
        assert!((s - 3.2).abs() < 1e-15);
    }

    #[test]
    fn crosscurrent_crab() {
        let s = effective_speed(&V, FlowVector::new(0.0, 1.8), EAST)
            .unwrap()
            .value()
            .unwrap();
        assert!((s - (2.2f64 * 2.2 - 1.8 * 1.8).sqrt()).abs() < 1e-15);
        assert!((s - 1.26491).abs() < 1e-5);
    }

    #[test]
    fn overpowering_currents() {
        assert_eq!(
            effective_speed(&V, FlowVector::new(0.0, 2.2), EAST).unwrap(),
            GroundSpeed::Infeasible
        );
        assert_eq!(
            effective_speed(&V, FlowVector::new(-3.0, 0.0), EAST).unwrap(),
            GroundSpeed::Infeasible
        );
        // Exactly cancelled head current.
        assert_eq!(
            effective_speed(&V, FlowVector::new(-2.2, 0.0), EAST).unwrap(),
            GroundSpeed::Infeasible
        );
    }

    #[test]
    fn non_unit_direction_rejected() {
        assert!(matches!(
            effective_speed(&V, FlowVector::default(), Vec2::new(1.0, 1.0)),
            Err(CostError::NonUnitDirection(_))
        ));
    }

    #[test]
    fn still_water_edge() {
        let f = UniformField::new(0.0, 0.0).unwrap();
        let w = wfunc(
            Vec2::ZERO,
            Vec2::new(6.0, 8.0),
            0.0,
            &f,
            &V,
            &CostConfig::default(),
        )
        .unwrap();
        assert!((w - 10.0 / 2.2).abs() < 1e-12);
        assert!((w - 4.54545).abs() < 1e-5);
    }

    #[test]
    fn river_centerline_edge() {
        let r = RiverField::new(300.0, 1.8).unwrap();
        let w = wfunc(
            Vec2::new(145.0, 0.0),
            Vec2::new(155.0, 0.0),
            0.0,
            &r,
            &V,
            &CostConfig::default(),
        )
        .unwrap();
        assert!((w - 10.0 / (2.2f64 * 2.2 - 1.8 * 1.8).sqrt()).abs() < 1e-12);
        assert!((w - 7.9057).abs() < 1e-4);
    }

    #[test]
    fn opposing_current_gets_large_weight() {
        let f = UniformField::new(-3.0, 0.0).unwrap();
        let cfg = CostConfig::default();
        let w = wfunc(Vec2::ZERO, Vec2::new(10.0, 0.0), 0.0, &f, &V, &cfg).unwrap();
        assert_eq!(w, cfg.large_weight);
    }

    #[test]
    fn degenerate_edge_rejected() {
        let f = UniformField::new(0.0, 0.0).unwrap();
        let p = Vec2::new(1.0, 1.0);
        assert_eq!(
            wfunc(p, p, 0.0, &f, &V, &CostConfig::default()),
            Err(CostError::DegenerateSegment)
        );
    }

    #[test]
    fn substep_refinement_converges_on_river() {
        let r = RiverField::new(300.0, 1.8).unwrap();
        let probes = [
            (Vec2::new(0.0, 0.0), Vec2::new(30.0, 10.0)),
            (Vec2::new(100.0, 30.0), Vec2::new(130.0, 50.0)),
            (Vec2::new(200.0, 0.0), Vec2::new(300.0, 5.0)),
        ];
        for (a, b) in probes {
            let w: Vec<f64> = (0..8)
                .map(|k| {
                    let cfg = CostConfig {
                        substeps: 1 << k,
                        sampling: Sampling::SubstepResampled,
                        ..CostConfig::default()
                    };
                    wfunc(a, b, 0.0, &r, &V, &cfg).unwrap()
                })
                .collect();
            let diffs: Vec<f64> = w.windows(2).map(|p| (p[1] - p[0]).abs()).collect();
            // The coarsest refinements can still be pre-asymptotic.
            for d in diffs[2..].windows(2) {
                assert!(d[1] <= d[0] + 1e-12, "{a:?}->{b:?}: {diffs:?}");
            }
        }
    }

    #[test]
    fn substep_modes_agree_on_stationary_fields() {
        let r = RiverField::new(300.0, 1.8).unwrap();
        let a = Vec2::new(20.0, 0.0);
        let b = Vec2::new(80.0, 15.0);
        let mid = CostConfig {
            substeps: 16,
            ..CostConfig::default()
        };
        let resampled = CostConfig {
            sampling: Sampling::SubstepResampled,
            ..mid
        };
        assert_eq!(
            wfunc(a, b, 3.0, &r, &V, &mid).unwrap(),
            wfunc(a, b, 99.0, &r, &V, &resampled).unwrap()
        );
    }
}
