use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;

use flowpath::{build_grid, load_scenario, FieldSpec, Obstacle, ScenarioError};

fn bundled(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(name)
}

#[test]
fn river_scenario() {
    let s = load_scenario(bundled("river.scenario")).unwrap();
    match s.field {
        FieldSpec::River(r) => {
            assert_eq!(r.width, 300.0);
            assert_eq!(r.peak_current, 1.8);
        }
        other => panic!("unexpected field {other:?}"),
    }
    assert_eq!(s.vehicle.speed, 2.2);
    let sectors: Vec<u32> = s.variants.iter().map(|v| v.grid.sector).collect();
    assert_eq!(sectors, [1, 2, 3]);
    assert!(s
        .variants
        .iter()
        .all(|v| (v.grid.nx, v.grid.ny) == (31, 13)));
    assert!(s.obstacles.is_empty());
}

#[test]
fn jet_scenario() {
    let s = load_scenario(bundled("jet.scenario")).unwrap();
    match s.field {
        FieldSpec::Jet(j) => {
            assert_eq!(j.mean_amplitude, 1.2);
            assert_eq!(j.oscillation_amplitude, 0.3);
            assert_eq!(j.frequency, 0.4);
            assert_eq!(j.phase, FRAC_PI_2);
            assert_eq!(j.wavenumber, 0.84);
            assert_eq!(j.phase_speed, 0.12);
        }
        other => panic!("unexpected field {other:?}"),
    }
    assert_eq!(s.vehicle.speed, 0.5);
    assert!(s
        .variants
        .iter()
        .all(|v| (v.grid.nx, v.grid.ny) == (41, 21)));
    for key in ["start", "goal", "grid.origin"] {
        assert!(
            s.inferred.iter().any(|k| k == key),
            "{key} not marked as inferred"
        );
    }
}

#[test]
fn jet_obstacle_scenario_masks_45_nodes() {
    let s = load_scenario(bundled("jet_obstacles.scenario")).unwrap();
    assert!(matches!(s.obstacles[..], [Obstacle::Rectangle { .. }]));
    for v in &s.variants {
        let g = build_grid(&v.grid, &s.obstacles).unwrap();
        assert_eq!(g.vertex_count(), 816);
    }
}

#[test]
fn missing_file_is_an_io_error() {
    let err = load_scenario(bundled("does-not-exist.scenario")).unwrap_err();
    assert!(matches!(err, ScenarioError::Io { .. }));
}

#[test]
fn parse_error_names_the_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.scenario");
    let text = std::fs::read_to_string(bundled("river.scenario"))
        .unwrap()
        .replace("nx = 31", "nx = [31");
    std::fs::write(&path, text).unwrap();
    let msg = load_scenario(&path).unwrap_err().to_string();
    assert!(msg.contains("broken.scenario"), "{msg}");
    assert!(msg.contains("line"), "{msg}");
}
