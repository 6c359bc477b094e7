//! Run-plan config files, CSV tables and SVG line charts.
//!
//! Config files are flat `key = value` lines; `#` starts a comment. Every key
//! is optional:
//!
//! | key | default |
//! |-----|---------|
//! | `sweeps` | all five: `grid_size, sg_distance, density, wall_count, wall_length` |
//! | `<sweep>_values` | built-in list for that sweep |
//! | `size`, `density`, `sg_distance` | 300, 0.25, 140 |
//! | `num_walls`, `wall_length` | 7, 15 |
//! | `algorithms` | the six benchmarked solvers |
//! | `instances_per_point`, `reps` | 10, 100 |
//! | `seed` | 0 |
//! | `output_dir` | `results` |
//! | `parallel_pairs`, `allow_corner_cutting` | false, false |
//! | `lookahead`, `ara_initial_weight`, `ara_weight_decrement`, `tie_break` | 250, 2.5, 0.5, `high_g` |

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::experiments::{default_sweeps, ExperimentReport, FixedParams, ReportRow, SweepConfig, SweepKind};
use crate::generators::{MAX_WALLS, WALL_GRID_WIDTH};
use crate::grid::Grid;
use crate::metrics::Metric;
use crate::search::{AlgorithmId, SolverParams, TieBreak};
use crate::selector::SelectionEvaluation;

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_OUTPUT_DIR: &str = "results";

pub const CSV_HEADER: [&str; 9] = [
    "algorithm",
    "number_of_walls",
    "wall_length",
    "obstacle_density",
    "grid_size",
    "sg_distance",
    "path_cost",
    "memory_allocation_kb",
    "solving_time_ms",
];
pub const BEST_MARKER_COLUMN: &str = "best_for_priority";

const NOT_APPLICABLE: &str = "-";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("invalid config: {0}")]
    InvalidPlan(String),
    #[error("{path}: malformed CSV record {record}: {msg}")]
    Malformed {
        path: PathBuf,
        record: usize,
        msg: String,
    },
    #[error("report has no rows")]
    EmptyReport,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> ReportError + '_ {
    move |source| ReportError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunPlan {
    pub sweeps: Vec<SweepConfig>,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for RunPlan {
    fn default() -> Self {
        RunPlan {
            sweeps: default_sweeps(),
            output_dir: PathBuf::from(DEFAULT_OUTPUT_DIR),
            seed: DEFAULT_SEED,
        }
    }
}

pub fn parse_config(path: &Path) -> Result<RunPlan, ReportError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<RunPlan, ReportError> {
    let mut kinds: Option<Vec<SweepKind>> = None;
    let mut values: Vec<(SweepKind, Vec<f64>)> = Vec::new();
    let mut fixed = FixedParams::default();
    let mut algorithms: Option<Vec<AlgorithmId>> = None;
    let mut instances = None;
    let mut reps = None;
    let mut seed = DEFAULT_SEED;
    let mut output_dir = PathBuf::from(DEFAULT_OUTPUT_DIR);
    let mut parallel_pairs = false;
    let mut corner_cutting = false;
    let mut params = SolverParams::default();
    let mut seen = HashSet::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |msg: String| ReportError::Config { line, msg };
        let (key, value) = content
            .split_once('=')
            .map(|(k, v)| (k.trim().to_ascii_lowercase(), v.trim()))
            .ok_or_else(|| err(format!("expected key=value, got {content:?}")))?;
        if !seen.insert(key.clone()) {
            return Err(err(format!("duplicate key {key:?}")));
        }

        let number = |v: &str| v.parse::<f64>().map_err(|_| err(format!("{key}: {v:?} is not a number")));
        let integer = |v: &str| v.parse::<u64>().map_err(|_| err(format!("{key}: {v:?} is not a nonnegative integer")));
        let boolean = |v: &str| match v.to_ascii_lowercase().as_str() {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            _ => Err(err(format!("{key}: {v:?} is not a boolean"))),
        };
        let check = |ok: bool, what: &str| if ok { Ok(()) } else { Err(err(format!("{key} = {value}: {what}"))) };

        match key.as_str() {
            "sweeps" => {
                let parsed = list(value)
                    .into_iter()
                    .map(|s| s.parse::<SweepKind>().map_err(&err))
                    .collect::<Result<Vec<_>, _>>()?;
                check(!parsed.is_empty(), "at least one sweep required")?;
                kinds = Some(parsed);
            }
            "size" => {
                let v = integer(value)?;
                check((3..=u32::MAX as u64).contains(&v), "must be >= 3")?;
                fixed.size = v as u32;
            }
            "density" => {
                let v = number(value)?;
                check((0.0..1.0).contains(&v), "must lie in [0, 1)")?;
                fixed.density = v;
            }
            "sg_distance" => {
                let v = number(value)?;
                check(v.is_finite() && v >= 0.0, "must be >= 0")?;
                fixed.sg_distance = v;
            }
            "num_walls" => {
                let v = integer(value)?;
                check(v <= MAX_WALLS as u64, "at most 7 walls")?;
                fixed.num_walls = v as u32;
            }
            "wall_length" => {
                let v = integer(value)?;
                check((1..WALL_GRID_WIDTH as u64 - 1).contains(&v), "must lie in [1, 29]")?;
                fixed.wall_length = v as u32;
            }
            "algorithms" => {
                let parsed = list(value)
                    .into_iter()
                    .map(|s| s.parse::<AlgorithmId>().map_err(|e| err(e.to_string())))
                    .collect::<Result<Vec<_>, _>>()?;
                check(!parsed.is_empty(), "at least one algorithm required")?;
                algorithms = Some(parsed);
            }
            "instances_per_point" => {
                let v = integer(value)?;
                check(v >= 1, "must be >= 1")?;
                instances = Some(v as usize);
            }
            "reps" => {
                let v = integer(value)?;
                check(v >= 1, "must be >= 1")?;
                reps = Some(v as usize);
            }
            "seed" => seed = integer(value)?,
            "output_dir" => {
                check(!value.is_empty(), "must not be empty")?;
                output_dir = PathBuf::from(value);
            }
            "parallel_pairs" => parallel_pairs = boolean(value)?,
            "allow_corner_cutting" => corner_cutting = boolean(value)?,
            "lookahead" => {
                let v = integer(value)?;
                check(v >= 1, "must be >= 1")?;
                params.lookahead = v as usize;
            }
            "ara_initial_weight" => {
                let v = number(value)?;
                check(v.is_finite() && v >= 1.0, "must be >= 1")?;
                params.ara_initial_weight = v;
            }
            "ara_weight_decrement" => {
                let v = number(value)?;
                check(v.is_finite() && v > 0.0, "must be > 0")?;
                params.ara_weight_decrement = v;
            }
            "tie_break" => params.tie_break = value.parse::<TieBreak>().map_err(&err)?,
            other => match other.strip_suffix("_values").map(str::parse::<SweepKind>) {
                Some(Ok(kind)) => {
                    let parsed = list(value).into_iter().map(number).collect::<Result<Vec<_>, _>>()?;
                    check(!parsed.is_empty(), "at least one value required")?;
                    check(parsed.windows(2).all(|w| w[0] < w[1]), "values must be strictly increasing")?;
                    values.push((kind, parsed));
                }
                _ => return Err(err(format!("unknown key {other:?}"))),
            },
        }
    }

    let wanted = kinds.unwrap_or_else(|| SweepKind::ALL.to_vec());
    let mut sweeps = Vec::with_capacity(wanted.len());
    for base in default_sweeps() {
        if !wanted.contains(&base.kind) {
            continue;
        }
        let custom = values.iter().find(|(k, _)| *k == base.kind).map(|(_, v)| v.clone());
        let cfg = SweepConfig {
            interpolated_values: custom.is_none() && base.interpolated_values,
            values: custom.unwrap_or(base.values.clone()),
            fixed,
            algorithms: algorithms.clone().unwrap_or(base.algorithms.clone()),
            instances_per_point: instances.unwrap_or(base.instances_per_point),
            reps: reps.unwrap_or(base.reps),
            seed,
            params,
            parallel_pairs,
            allow_corner_cutting: corner_cutting,
            ..base
        };
        cfg.validate().map_err(|e| ReportError::InvalidPlan(e.to_string()))?;
        sweeps.push(cfg);
    }
    Ok(RunPlan {
        sweeps,
        output_dir,
        seed,
    })
}

/// One line of a results table.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub algorithm: String,
    pub number_of_walls: Option<u32>,
    pub wall_length: Option<u32>,
    pub obstacle_density: Option<f64>,
    pub grid_size: String,
    pub sg_distance: f64,
    pub path_cost: f64,
    pub memory_allocation_kb: f64,
    pub solving_time_ms: f64,
    pub best_for_priority: Option<bool>,
}

impl CsvRow {
    pub fn from_report_row(row: &ReportRow) -> CsvRow {
        CsvRow {
            algorithm: row.algorithm.name().to_string(),
            number_of_walls: row.point.num_walls,
            wall_length: row.point.wall_length,
            obstacle_density: row.point.density,
            grid_size: row.point.grid_size.clone(),
            sg_distance: row.point.sg_distance,
            path_cost: row.stats.path_cost.mean,
            memory_allocation_kb: row.stats.memory_kb.mean,
            solving_time_ms: row.stats.solve_time_ms.mean,
            best_for_priority: None,
        }
    }

    /// Rows of a selector evaluation; walls and lengths are not recoverable
    /// from a grid file, so they are left inapplicable.
    pub fn from_evaluation(grid: &Grid, eval: &SelectionEvaluation) -> Vec<CsvRow> {
        let density = grid.obstacle_count() as f64 / grid.cell_count() as f64;
        let size = if grid.width() == grid.height() {
            grid.width().to_string()
        } else {
            format!("{}x{}", grid.width(), grid.height())
        };
        eval.candidates
            .iter()
            .map(|c| CsvRow {
                algorithm: c.algorithm.name().to_string(),
                number_of_walls: None,
                wall_length: None,
                obstacle_density: Some(density),
                grid_size: size.clone(),
                sg_distance: eval.distance,
                path_cost: c.stats.path_cost.mean,
                memory_allocation_kb: c.stats.memory_kb.mean,
                solving_time_ms: c.stats.solve_time_ms.mean,
                best_for_priority: Some(c.best_for_priority),
            })
            .collect()
    }

    pub fn fields(&self) -> Vec<String> {
        let opt = |v: Option<String>| v.unwrap_or_else(|| NOT_APPLICABLE.to_string());
        let mut out = vec![
            self.algorithm.clone(),
            opt(self.number_of_walls.map(|v| v.to_string())),
            opt(self.wall_length.map(|v| v.to_string())),
            opt(self.obstacle_density.map(fmt3)),
            self.grid_size.clone(),
            fmt3(self.sg_distance),
            fmt3(self.path_cost),
            fmt3(self.memory_allocation_kb),
            fmt3(self.solving_time_ms),
        ];
        if let Some(best) = self.best_for_priority {
            out.push(best.to_string());
        }
        out
    }
}

fn list(v: &str) -> Vec<&str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

pub fn fmt3(v: f64) -> String {
    format!("{v:.3}")
}

/// Writes rows under the fixed header (plus the marker column when any row
/// carries one) to an arbitrary sink.
pub fn write_rows<W: std::io::Write>(rows: &[CsvRow], sink: W) -> Result<(), csv::Error> {
    let mut header: Vec<&str> = CSV_HEADER.to_vec();
    if rows.iter().any(|r| r.best_for_priority.is_some()) {
        header.push(BEST_MARKER_COLUMN);
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink);
    w.write_record(&header)?;
    for r in rows {
        let mut fields = r.fields();
        fields.resize(header.len(), NOT_APPLICABLE.to_string());
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}

/// Returns the number of data rows written.
pub fn write_csv_rows(rows: &[CsvRow], path: &Path) -> Result<usize, ReportError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    write_rows(rows, std::io::BufWriter::new(file)).map_err(csv_err(path))?;
    Ok(rows.len())
}

pub fn write_csv(report: &ExperimentReport, path: &Path) -> Result<usize, ReportError> {
    if report.rows.is_empty() {
        return Err(ReportError::EmptyReport);
    }
    let rows: Vec<CsvRow> = report.rows.iter().map(CsvRow::from_report_row).collect();
    write_csv_rows(&rows, path)
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>, ReportError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header = r.headers().map_err(csv_err(path))?.clone();
    let malformed = |record: usize, msg: String| ReportError::Malformed {
        path: path.to_path_buf(),
        record,
        msg,
    };
    if header.iter().take(CSV_HEADER.len()).ne(CSV_HEADER.iter().copied()) {
        return Err(malformed(0, format!("unexpected header {header:?}")));
    }
    let marker = header.get(CSV_HEADER.len()) == Some(BEST_MARKER_COLUMN);
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let n = i + 1;
        let field = |k: usize| rec.get(k).ok_or_else(|| malformed(n, format!("missing column {}", k + 1)));
        let num = |k: usize| -> Result<f64, ReportError> {
            let s = field(k)?;
            s.parse().map_err(|_| malformed(n, format!("{s:?} is not a number")))
        };
        let opt_int = |k: usize| -> Result<Option<u32>, ReportError> {
            match field(k)? {
                NOT_APPLICABLE => Ok(None),
                s => s.parse().map(Some).map_err(|_| malformed(n, format!("{s:?} is not an integer"))),
            }
        };
        rows.push(CsvRow {
            algorithm: field(0)?.to_string(),
            number_of_walls: opt_int(1)?,
            wall_length: opt_int(2)?,
            obstacle_density: if field(3)? == NOT_APPLICABLE { None } else { Some(num(3)?) },
            grid_size: field(4)?.to_string(),
            sg_distance: num(5)?,
            path_cost: num(6)?,
            memory_allocation_kb: num(7)?,
            solving_time_ms: num(8)?,
            best_for_priority: if marker {
                Some(field(9)?.parse().map_err(|_| malformed(n, "bad marker".into()))?)
            } else {
                None
            },
        });
    }
    Ok(rows)
}

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 70.0;
const Y_TICKS: f64 = 5.0;

fn color(algo: AlgorithmId) -> &'static str {
    match algo {
        AlgorithmId::LrtaStar => "#1f77b4",
        AlgorithmId::RtaaStar => "#ff7f0e",
        AlgorithmId::AraStar => "#2ca02c",
        AlgorithmId::LpaStar => "#d62728",
        AlgorithmId::DStar => "#9467bd",
        AlgorithmId::DStarLite => "#8c564b",
        AlgorithmId::AstarOracle => "#7f7f7f",
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// A 1, 2 or 5 times power-of-ten step giving about `Y_TICKS` intervals.
fn tick_step(range: f64) -> f64 {
    if !(range > 0.0) {
        return 1.0;
    }
    let raw = range / Y_TICKS;
    let magnitude = 10f64.powf(raw.log10().floor());
    let mantissa = raw / magnitude;
    let nice = if mantissa <= 1.0 {
        1.0
    } else if mantissa <= 2.0 {
        2.0
    } else if mantissa <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * magnitude
}

struct Scale {
    lo: f64,
    hi: f64,
    from: f64,
    to: f64,
}

impl Scale {
    fn new(lo: f64, hi: f64, from: f64, to: f64) -> Scale {
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 1.0, hi + 1.0) };
        Scale { lo, hi, from, to }
    }

    fn map(&self, v: f64) -> f64 {
        self.from + (v - self.lo) / (self.hi - self.lo) * (self.to - self.from)
    }
}

/// The SVG chart of one metric of a report.
pub fn render_svg(report: &ExperimentReport, metric: Metric) -> String {
    let x_lo = report.values.iter().copied().fold(f64::INFINITY, f64::min);
    let x_hi = report.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for r in &report.rows {
        let s = r.stats.get(metric);
        y_lo = y_lo.min((s.mean - s.stddev).max(0.0));
        y_hi = y_hi.max(s.mean + s.stddev);
    }
    let xs = Scale::new(x_lo, x_hi, LEFT, WIDTH - RIGHT);
    let step = tick_step(y_hi - y_lo);
    let ys = Scale::new(
        (y_lo / step).floor() * step,
        (y_hi / step).ceil() * step,
        HEIGHT - BOTTOM,
        TOP,
    );

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, "<desc>{}</desc>", escape(&report.provenance.to_string()));
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="25" text-anchor="middle" font-size="15">{} vs. {}</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        escape(metric.label()),
        escape(report.kind.axis_label())
    );

    // Axes, grid lines and ticks.
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
    let _ = writeln!(
        s,
        r#"<path d="M{x0:.2},{y1:.2} V{y0:.2} H{x1:.2}" fill="none" stroke="black"/>"#
    );
    for &v in &report.values {
        let x = xs.map(v);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            y0 + 5.0,
            y0 + 20.0,
            fmt3(v)
        );
    }
    let ticks = ((ys.hi - ys.lo) / step).round() as usize;
    for i in 0..=ticks {
        let v = ys.lo + step * i as f64;
        let y = ys.map(v);
        let _ = writeln!(
            s,
            r##"<line x1="{x0:.2}" y1="{y:.2}" x2="{x1:.2}" y2="{y:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            x0 - 6.0,
            y + 4.0,
            fmt3(v)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 25.0,
        escape(report.kind.axis_label())
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(metric.label())
    );

    for (i, &algo) in report.algorithms.iter().enumerate() {
        let series = report.series(algo);
        let colour = color(algo);
        let point = |r: &ReportRow, dy: f64| {
            let y = (r.stats.get(metric).mean + dy).max(0.0);
            format!("{:.2},{:.2}", xs.map(r.value), ys.map(y))
        };
        let upper = series.iter().map(|r| point(r, r.stats.get(metric).stddev));
        let lower = series.iter().rev().map(|r| point(r, -r.stats.get(metric).stddev));
        let band: Vec<String> = upper.chain(lower).collect();
        let _ = writeln!(
            s,
            r#"<polygon points="{}" fill="{colour}" fill-opacity="0.2" stroke="none"/>"#,
            band.join(" ")
        );
        let line: Vec<String> = series.iter().map(|r| point(r, 0.0)).collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="2"/>"#,
            line.join(" ")
        );
        for r in &series {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{colour}"/>"#,
                xs.map(r.value),
                ys.map(r.stats.get(metric).mean)
            );
        }
        let ly = TOP + 10.0 + 22.0 * i as f64;
        let lx = WIDTH - RIGHT + 20.0;
        let _ = writeln!(
            s,
            r#"<rect x="{lx:.2}" y="{:.2}" width="24" height="10" fill="{colour}"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            ly - 9.0,
            lx + 32.0,
            ly,
            escape(algo.label())
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Writes `<sweep>_<metric>.svg` for each metric and returns the paths.
pub fn render_plots(report: &ExperimentReport, out_dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
    if report.rows.is_empty() {
        return Err(ReportError::EmptyReport);
    }
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut paths = Vec::with_capacity(Metric::ALL.len());
    for metric in Metric::ALL {
        let path = out_dir.join(format!("{}_{}.svg", report.kind.name(), metric.name()));
        fs::write(&path, render_svg(report, metric)).map_err(io_err(&path))?;
        paths.push(path);
    }
    Ok(paths)
}
