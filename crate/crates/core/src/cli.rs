//! Command-line front end. Exit codes: 0 success, 1 domain error, 2 usage error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::experiments::run_sweep;
use crate::generators::{generate_random_grid, generate_wall_grid, RandomGridSpec, WallGridSpec};
use crate::grid::Grid;
use crate::report::{fmt3, parse_config, render_plots, write_csv, write_rows, CsvRow};
use crate::search::{solve, AlgorithmId, PeakMemoryProbe, SearchError, SolverParams};
use crate::selector::{
    evaluate_selection, select_algorithm, Priority, SelectionRequest, DEFAULT_CANDIDATES, DEFAULT_DISTANCE_THRESHOLD,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "gridbench", version, about = "Grid pathfinding solvers and benchmark sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the sweeps of a config file and write CSV tables and SVG charts.
    Sweep {
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Solve a grid file with one algorithm.
    Solve {
        grid: PathBuf,
        #[arg(long)]
        algo: AlgorithmId,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Print the algorithm chosen for a grid file and priority.
    Select {
        grid: PathBuf,
        #[arg(long)]
        priority: Priority,
        #[arg(long, default_value_t = DEFAULT_DISTANCE_THRESHOLD)]
        threshold: f64,
    },
    /// Benchmark the candidate algorithms on a grid file and compare with the selection.
    Evaluate {
        grid: PathBuf,
        #[arg(long)]
        priority: Priority,
        #[arg(long, default_value_t = DEFAULT_DISTANCE_THRESHOLD)]
        threshold: f64,
        #[arg(long, default_value_t = 100)]
        reps: usize,
        /// Comma-separated algorithm names; defaults to RTAA*, ARA* and D* Lite.
        #[arg(long, value_delimiter = ',')]
        candidates: Vec<AlgorithmId>,
        /// Also write the table to this CSV file.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Generate a grid file.
    #[command(subcommand)]
    Gen(GenCommand),
}

#[derive(Debug, Subcommand)]
enum GenCommand {
    /// Seeded random obstacle grid.
    Random {
        #[arg(long)]
        size: u32,
        #[arg(long)]
        density: f64,
        #[arg(long)]
        sg_distance: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// 31x71 grid with alternating horizontal walls.
    Walls {
        #[arg(long)]
        walls: u32,
        #[arg(long)]
        length: u32,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 250)]
    lookahead: usize,
    #[arg(long, default_value_t = 2.5)]
    ara_initial_weight: f64,
    #[arg(long, default_value_t = 0.5)]
    ara_weight_decrement: f64,
    #[arg(long)]
    allow_corner_cutting: bool,
}

impl SolverArgs {
    fn params(&self) -> SolverParams {
        SolverParams {
            lookahead: self.lookahead,
            ara_initial_weight: self.ara_initial_weight,
            ara_weight_decrement: self.ara_weight_decrement,
            ..SolverParams::default()
        }
    }
}

/// A failure that maps to exit code 1.
struct DomainError(String);

impl<E: std::fmt::Display> From<E> for DomainError {
    fn from(e: E) -> Self {
        DomainError(e.to_string())
    }
}

type Outcome = Result<(), DomainError>;

/// Parses `args` (including the program name) and runs the command.
pub fn cli_main<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    match run(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(DomainError(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_DOMAIN
        }
    }
}

fn read_grid(path: &Path) -> Result<Grid, DomainError> {
    let text = fs::read_to_string(path).map_err(|e| DomainError(format!("{}: {e}", path.display())))?;
    Grid::parse(&text).map_err(|e| DomainError(format!("{}: {e}", path.display())))
}

fn run(command: Command, out: &mut dyn Write) -> Outcome {
    match command {
        Command::Sweep { config, output_dir } => sweep(&config, output_dir, out),
        Command::Solve { grid, algo, solver } => {
            let grid = read_grid(&grid)?.with_corner_cutting(solver.allow_corner_cutting);
            let mut probe = PeakMemoryProbe::default();
            match solve(&grid, algo, &solver.params(), &mut probe) {
                Ok(o) => {
                    writeln!(out, "algorithm: {algo}")?;
                    writeln!(out, "path_cost: {}", fmt3(o.path_cost))?;
                    writeln!(out, "path_steps: {}", o.path.len().saturating_sub(1))?;
                    writeln!(out, "expanded: {}", o.expanded)?;
                    writeln!(out, "memory_allocation_kb: {}", fmt3(o.peak_memory_bytes as f64 / 1024.0))?;
                    writeln!(out, "solving_time_ms: {}", fmt3(o.solve_time_ms))?;
                    Ok(())
                }
                Err(SearchError::NoPath) => {
                    writeln!(out, "no path")?;
                    Err(DomainError(format!("no path from {} to {}", grid.start(), grid.goal())))
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Select {
            grid,
            priority,
            threshold,
        } => {
            let grid = read_grid(&grid)?;
            let choice = select_algorithm(&SelectionRequest::new(&grid, priority).with_threshold(threshold))?;
            writeln!(out, "{choice}")?;
            Ok(())
        }
        Command::Evaluate {
            grid,
            priority,
            threshold,
            reps,
            candidates,
            csv,
            solver,
        } => {
            let grid = read_grid(&grid)?.with_corner_cutting(solver.allow_corner_cutting);
            let req = SelectionRequest::new(&grid, priority).with_threshold(threshold);
            let candidates = if candidates.is_empty() {
                DEFAULT_CANDIDATES.to_vec()
            } else {
                candidates
            };
            let eval = evaluate_selection(&grid, &req, &candidates, &solver.params(), reps)?;
            let rows = CsvRow::from_evaluation(&grid, &eval);
            let mut table = Vec::new();
            write_rows(&rows, &mut table)?;
            out.write_all(&table)?;
            writeln!(out, "priority: {priority}")?;
            writeln!(out, "selected: {}", eval.selected)?;
            writeln!(out, "selected_is_best: {}", eval.selected_is_best)?;
            if let Some(path) = csv {
                fs::write(&path, &table).map_err(|e| DomainError(format!("{}: {e}", path.display())))?;
            }
            Ok(())
        }
        Command::Gen(gen) => {
            let (grid, output) = match gen {
                GenCommand::Random {
                    size,
                    density,
                    sg_distance,
                    seed,
                    output,
                } => (generate_random_grid(&RandomGridSpec::new(size, density, sg_distance, seed))?, output),
                GenCommand::Walls { walls, length, output } => {
                    (generate_wall_grid(&WallGridSpec::new(walls, length))?, output)
                }
            };
            match output {
                Some(path) => {
                    fs::write(&path, grid.to_text()).map_err(|e| DomainError(format!("{}: {e}", path.display())))?
                }
                None => out.write_all(grid.to_text().as_bytes())?,
            }
            Ok(())
        }
    }
}

fn sweep(config: &Path, output_dir: Option<PathBuf>, out: &mut dyn Write) -> Outcome {
    let plan = parse_config(config)?;
    let dir = output_dir.unwrap_or(plan.output_dir);
    fs::create_dir_all(&dir).map_err(|e| DomainError(format!("{}: {e}", dir.display())))?;
    let mut provenance = String::new();
    for cfg in &plan.sweeps {
        let report = run_sweep(cfg)?;
        let csv_path = dir.join(format!("{}.csv", cfg.kind));
        let rows = write_csv(&report, &csv_path)?;
        writeln!(out, "{}: {rows} rows", csv_path.display())?;
        for path in render_plots(&report, &dir)? {
            writeln!(out, "{}", path.display())?;
        }
        provenance.push_str(&report.provenance.to_string());
        provenance.push('\n');
    }
    let path = dir.join("provenance.txt");
    fs::write(&path, provenance).map_err(|e| DomainError(format!("{}: {e}", path.display())))?;
    Ok(())
}
