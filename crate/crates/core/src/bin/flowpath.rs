use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use flowpath::grid::build_grid;
use flowpath::report::{trajectory_csv, OptimalReport, PathReport};
use flowpath::run::{run_direct_drive, run_optimal};
use flowpath::{export, load_scenario, run_compare, run_plan, Format, Scenario};

#[derive(Parser)]
#[command(
    name = "flowpath",
    version,
    about = "Time-optimal routes through current fields"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Csv => Format::Csv,
            OutputFormat::Json => Format::Json,
        }
    }
}

#[derive(clap::Args)]
struct Output {
    /// Directory for the report and per-variant path files.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
}

#[derive(Subcommand)]
enum Command {
    /// Search every grid variant and print the route durations.
    Plan {
        scenario: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Print lattice sizes for every grid variant.
    GridStats { scenario: PathBuf },
    /// Run the direct-drive and optimal-control references.
    Oracle {
        scenario: PathBuf,
        /// Directory for the optimal trajectory (t, x, y, heading).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Graph routes scored against the references.
    Compare {
        scenario: PathBuf,
        #[command(flatten)]
        output: Output,
    },
}

enum Outcome {
    Success,
    NoFeasiblePath,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::NoFeasiblePath) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

type BoxError = Box<dyn std::error::Error>;

fn execute(command: Command) -> Result<Outcome, BoxError> {
    match command {
        Command::Plan { scenario, output } => {
            let s = load_scenario(&scenario)?;
            let report = run_plan(&s)?;
            finish_report(&s, &report, &output)
        }
        Command::Compare { scenario, output } => {
            let s = load_scenario(&scenario)?;
            let report = run_compare(&s)?;
            finish_report(&s, &report, &output)
        }
        Command::GridStats { scenario } => {
            let s = load_scenario(&scenario)?;
            grid_stats(&s)?;
            Ok(Outcome::Success)
        }
        Command::Oracle { scenario, out } => {
            let s = load_scenario(&scenario)?;
            oracle(&s, out.as_deref())
        }
    }
}

fn print_snapping(s: &Scenario, report: &PathReport) {
    for v in &report.variants {
        for (what, snap) in [("start", &v.start), ("goal", &v.goal)] {
            if snap.distance > 0.0 {
                println!(
                    "{}: {what} ({}, {}) snapped to ({}, {}), distance {:.6}",
                    v.name,
                    snap.requested.x,
                    snap.requested.y,
                    snap.snapped.x,
                    snap.snapped.y,
                    snap.distance
                );
            }
        }
    }
    if !s.inferred.is_empty() {
        println!("inferred values: {}", s.inferred.join(", "));
    }
}

fn finish_report(s: &Scenario, report: &PathReport, output: &Output) -> Result<Outcome, BoxError> {
    println!("scenario {} ({} field)", report.scenario, report.field);
    print_snapping(s, report);
    print!("{}", report.table_text());
    if let Some(note) = report
        .optimal_control
        .as_ref()
        .and_then(|o| o.summary.note.as_ref())
    {
        println!("optimal control: {note}");
    }
    if let Some(dir) = &output.out {
        for f in export(report, output.format.into(), dir)? {
            println!("wrote {}", f.display());
        }
    }
    let blocked: Vec<&str> = report
        .variants
        .iter()
        .filter(|v| !v.is_feasible())
        .map(|v| v.name.as_str())
        .collect();
    if blocked.is_empty() {
        Ok(Outcome::Success)
    } else {
        eprintln!("no feasible path: {}", blocked.join(", "));
        Ok(Outcome::NoFeasiblePath)
    }
}

fn grid_stats(s: &Scenario) -> Result<(), BoxError> {
    println!("variant,nx,ny,dx,dy,sector,vertices,edges,lattice_edges");
    for v in &s.variants {
        let g = build_grid(&v.grid, &s.obstacles)?;
        println!(
            "{},{},{},{},{},{},{},{},{}",
            v.name,
            v.grid.nx,
            v.grid.ny,
            v.grid.dx,
            v.grid.dy,
            v.grid.sector,
            g.vertex_count(),
            g.edge_count(),
            v.grid.free_edge_count()?
        );
    }
    Ok(())
}

fn oracle(s: &Scenario, out: Option<&Path>) -> Result<Outcome, BoxError> {
    let direct = run_direct_drive(s);
    match direct.duration {
        Some(t) => println!("direct drive: {t:.4}"),
        None => println!("direct drive: infeasible"),
    }
    let optimal: OptimalReport = run_optimal(s);
    match (optimal.summary.duration, &optimal.summary.note) {
        (Some(t), _) => println!(
            "optimal control: {t:.4} (initial heading {:.6} rad, miss {:.2e}, {} shots)",
            optimal.initial_heading.unwrap_or(f64::NAN),
            optimal.miss.unwrap_or(f64::NAN),
            optimal.shots
        ),
        (None, Some(note)) => println!("optimal control: {note}"),
        (None, None) => println!("optimal control: no solution"),
    }
    if let Some(dir) = out {
        if !optimal.trajectory.is_empty() {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(format!("{}_optimal_trajectory.csv", s.name));
            std::fs::write(&path, trajectory_csv(&optimal.trajectory))?;
            println!("wrote {}", path.display());
        }
    }
    Ok(if optimal.summary.feasible {
        Outcome::Success
    } else {
        Outcome::NoFeasiblePath
    })
}
