use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use flowpath::PathReport;

fn bundled(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(name)
}

fn flowpath(args: &[&str], scenario: &Path) -> Output {
    let (command, rest) = args.split_first().unwrap();
    Command::new(env!("CARGO_BIN_EXE_flowpath"))
        .arg(command)
        .arg(scenario)
        .args(rest)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn plan_writes_table_and_paths() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let o = flowpath(&["plan", "--out", out_dir], &bundled("river.scenario"));
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let table = std::fs::read_to_string(dir.path().join("river.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(
        lines[0],
        "variant,time,vertices,edges,saving_pct,deviation_pct"
    );
    assert_eq!(lines.len(), 4);
    assert!(
        lines[1].starts_with("1-sector,165.44,403,2964,"),
        "{}",
        lines[1]
    );
    let path = std::fs::read_to_string(dir.path().join("river_3-sector_path.csv")).unwrap();
    let mut rows = path.lines();
    assert_eq!(rows.next(), Some("x,y,t_arrival"));
    assert_eq!(rows.next(), Some("0,30,0"));
    let last = rows.last().unwrap();
    assert!(last.starts_with("300,30,"), "{last}");
    let t: f64 = last.rsplit(',').next().unwrap().parse().unwrap();
    assert!((t - 162.29).abs() < 0.005, "{last}");
}

#[test]
fn compare_is_deterministic_and_consistent() {
    let runs: Vec<String> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            let o = flowpath(
                &["compare", "--out", dir.path().to_str().unwrap()],
                &bundled("river.scenario"),
            );
            assert_eq!(o.status.code(), Some(0));
            std::fs::read_to_string(dir.path().join("river.csv")).unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    let lines: Vec<Vec<&str>> = runs[0]
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[0][0], "direct-drive");
    assert_eq!(lines[1][0], "optimal-control");
    let direct: f64 = lines[0][1].parse().unwrap();
    let optimal: f64 = lines[1][1].parse().unwrap();
    for row in &lines[2..] {
        let t: f64 = row[1].parse().unwrap();
        let saving: f64 = row[4].parse().unwrap();
        let deviation: f64 = row[5].parse().unwrap();
        // Printed times are rounded, so allow for that in the recomputation.
        assert!(
            (100.0 * (direct - t) / direct - saving).abs() <= 0.02,
            "{row:?}"
        );
        assert!(
            (100.0 * (t - optimal) / optimal - deviation).abs() <= 0.02,
            "{row:?}"
        );
    }
}

#[test]
fn json_export_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let o = flowpath(
        &[
            "compare",
            "--out",
            dir.path().to_str().unwrap(),
            "--format",
            "json",
        ],
        &bundled("river.scenario"),
    );
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("river.json")).unwrap();
    let report = PathReport::from_json(&text).unwrap();
    assert_eq!(report.format_version, 1);
    assert_eq!(report.variants.len(), 3);
    assert_eq!(report.to_json().unwrap(), text);
    let v = &report.variants[0];
    let recomputed = v.path.last().unwrap().t_arrival - report.t0;
    assert_eq!(v.duration, Some(recomputed));
    assert!(dir.path().join("river_optimal_trajectory.csv").exists());
}

#[test]
fn grid_stats_lists_every_variant() {
    let o = flowpath(&["grid-stats"], &bundled("jet_obstacles.scenario"));
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("1-sector,41,21,0.5,0.4,1,816,"), "{text}");
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn oracle_exports_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let o = flowpath(
        &["oracle", "--out", dir.path().to_str().unwrap()],
        &bundled("river.scenario"),
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("direct drive: 179.5"), "{}", stdout(&o));
    let csv = std::fs::read_to_string(dir.path().join("river_optimal_trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,x,y,heading"));
    assert!(lines.next().unwrap().starts_with("0,0,30,"));
    let last: Vec<f64> = lines
        .last()
        .unwrap()
        .split(',')
        .map(|c| c.parse().unwrap())
        .collect();
    assert!((last[0] - 161.79).abs() < 0.05, "{last:?}");
    assert!(
        (last[1] - 300.0).abs() < 0.05 && (last[2] - 30.0).abs() < 0.05,
        "{last:?}"
    );
}

#[test]
fn infeasible_scenario_exits_with_2() {
    let o = flowpath(&["compare"], &bundled("impossible.scenario"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("1-sector"));
}

#[test]
fn invalid_scenario_exits_with_1_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.scenario");
    let text = std::fs::read_to_string(bundled("river.scenario"))
        .unwrap()
        .replace(
            "start = { x = 0.0, y = 30.0 }",
            "start = { x = -10.0, y = 30.0 }",
        );
    std::fs::write(&path, text).unwrap();
    let o = flowpath(&["plan"], &path);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("`start`"), "{err}");
}
