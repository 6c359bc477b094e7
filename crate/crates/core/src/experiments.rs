//! One-parameter-at-a-time sweeps over grid size, start-goal distance,
//! obstacle density, wall count and wall length.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::generators::{
    generate_random_grid, generate_wall_grid, wall_length_sequence, GenerationError, RandomGridSpec, WallGridSpec,
    MAX_WALLS, WALL_GRID_HEIGHT, WALL_GRID_WIDTH,
};
use crate::grid::{euclidean_heuristic, Grid};
use crate::metrics::{run_repetitions, MetricStats, MetricsError};
use crate::search::{AlgorithmId, SolverParams};

/// Seed offset between consecutive sweep points.
pub const POINT_SEED_STRIDE: u64 = 1000;

/// Random sweeps clamp a held-constant start-goal distance to this fraction
/// of `n - 1` so that small grids remain generable.
pub const SG_CAP_FRACTION: f64 = 0.75;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error("invalid sweep config: {0}")]
    InvalidConfig(String),
    #[error("{kind} sweep failed at {kind} = {value}: {source}")]
    Generation {
        kind: SweepKind,
        value: f64,
        source: GenerationError,
    },
    #[error("{kind} sweep failed at {kind} = {value} for {algorithm}: {source}")]
    Benchmark {
        kind: SweepKind,
        value: f64,
        algorithm: AlgorithmId,
        source: MetricsError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepKind {
    GridSize,
    SgDistance,
    Density,
    WallCount,
    WallLength,
}

impl SweepKind {
    pub const ALL: [SweepKind; 5] = [
        SweepKind::GridSize,
        SweepKind::SgDistance,
        SweepKind::Density,
        SweepKind::WallCount,
        SweepKind::WallLength,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepKind::GridSize => "grid_size",
            SweepKind::SgDistance => "sg_distance",
            SweepKind::Density => "density",
            SweepKind::WallCount => "wall_count",
            SweepKind::WallLength => "wall_length",
        }
    }

    pub fn axis_label(self) -> &'static str {
        match self {
            SweepKind::GridSize => "Grid size (cells per side)",
            SweepKind::SgDistance => "Start-goal distance (cells)",
            SweepKind::Density => "Obstacle density",
            SweepKind::WallCount => "Number of walls",
            SweepKind::WallLength => "Wall length (cells)",
        }
    }

    pub fn uses_wall_grid(self) -> bool {
        matches!(self, SweepKind::WallCount | SweepKind::WallLength)
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .chars()
            .filter(|c| !matches!(c, '_' | '-' | ' '))
            .collect::<String>()
            .to_ascii_lowercase();
        match norm.as_str() {
            "gridsize" | "size" => Ok(SweepKind::GridSize),
            "sgdistance" | "distance" => Ok(SweepKind::SgDistance),
            "density" | "obstacledensity" => Ok(SweepKind::Density),
            "wallcount" | "walls" | "numberofwalls" => Ok(SweepKind::WallCount),
            "walllength" => Ok(SweepKind::WallLength),
            _ => Err(format!("unknown sweep kind {s:?}")),
        }
    }
}

/// Parameters held constant while one is varied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedParams {
    pub size: u32,
    pub density: f64,
    pub sg_distance: f64,
    pub num_walls: u32,
    pub wall_length: u32,
}

impl Default for FixedParams {
    fn default() -> Self {
        FixedParams {
            size: 300,
            density: 0.25,
            sg_distance: 140.0,
            num_walls: MAX_WALLS,
            wall_length: WALL_GRID_WIDTH / 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub kind: SweepKind,
    pub values: Vec<f64>,
    pub fixed: FixedParams,
    pub algorithms: Vec<AlgorithmId>,
    pub instances_per_point: usize,
    pub reps: usize,
    pub seed: u64,
    pub params: SolverParams,
    pub parallel_pairs: bool,
    pub allow_corner_cutting: bool,
    /// Set when `values` are the built-in defaults rather than user supplied.
    pub interpolated_values: bool,
}

impl SweepConfig {
    pub fn new(kind: SweepKind, values: Vec<f64>) -> SweepConfig {
        SweepConfig {
            kind,
            values,
            fixed: FixedParams::default(),
            algorithms: AlgorithmId::BENCHMARKED.to_vec(),
            instances_per_point: 10,
            reps: 100,
            seed: 0,
            params: SolverParams::default(),
            parallel_pairs: false,
            allow_corner_cutting: false,
            interpolated_values: false,
        }
    }

    /// Instances actually generated per point. Wall grids are fixed layouts,
    /// so one instance is enough.
    pub fn effective_instances(&self) -> usize {
        if self.kind.uses_wall_grid() {
            1
        } else {
            self.instances_per_point
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |msg: String| Err(ExperimentError::InvalidConfig(format!("{}: {msg}", self.kind)));
        if self.values.is_empty() {
            return bad("no sweep values".into());
        }
        if self.values.windows(2).any(|w| !(w[0] < w[1])) {
            return bad(format!("values must be strictly increasing: {:?}", self.values));
        }
        if self.algorithms.is_empty() {
            return bad("no algorithms".into());
        }
        if self.instances_per_point == 0 {
            return bad("instances_per_point must be >= 1".into());
        }
        if self.reps == 0 {
            return bad("reps must be >= 1".into());
        }
        self.params
            .validate()
            .map_err(|e| ExperimentError::InvalidConfig(e.to_string()))?;
        let integral = |v: f64| v.fract() == 0.0 && v >= 0.0;
        for &v in &self.values {
            let ok = match self.kind {
                SweepKind::GridSize => integral(v) && v >= 3.0,
                SweepKind::SgDistance => v.is_finite() && v >= 0.0,
                SweepKind::Density => (0.0..1.0).contains(&v),
                SweepKind::WallCount => integral(v) && v <= MAX_WALLS as f64,
                SweepKind::WallLength => integral(v) && (1.0..WALL_GRID_WIDTH as f64 - 1.0).contains(&v),
            };
            if !ok {
                return bad(format!("value {v} out of range"));
            }
        }
        Ok(())
    }

    /// Parameters of the grids at `value`.
    pub fn point(&self, value: f64) -> PointParams {
        let f = &self.fixed;
        match self.kind {
            SweepKind::GridSize => {
                let size = value as u32;
                PointParams::Random {
                    size,
                    density: f.density,
                    sg_distance: capped_sg(f.sg_distance, size),
                }
            }
            SweepKind::SgDistance => PointParams::Random {
                size: f.size,
                density: f.density,
                sg_distance: value,
            },
            SweepKind::Density => PointParams::Random {
                size: f.size,
                density: value,
                sg_distance: capped_sg(f.sg_distance, f.size),
            },
            SweepKind::WallCount => PointParams::Walls {
                num_walls: value as u32,
                wall_length: f.wall_length,
            },
            SweepKind::WallLength => PointParams::Walls {
                num_walls: f.num_walls,
                wall_length: value as u32,
            },
        }
    }
}

/// Held-constant distance for an `n x n` grid, clamped to `SG_CAP_FRACTION * (n - 1)`.
pub fn capped_sg(sg: f64, n: u32) -> f64 {
    sg.min(SG_CAP_FRACTION * (n.saturating_sub(1)) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointParams {
    Random { size: u32, density: f64, sg_distance: f64 },
    Walls { num_walls: u32, wall_length: u32 },
}

impl PointParams {
    fn grids(&self, cfg: &SweepConfig, point_index: usize) -> Result<Vec<Grid>, GenerationError> {
        let grids = match *self {
            PointParams::Random {
                size,
                density,
                sg_distance,
            } => {
                let base = cfg.seed.wrapping_add(POINT_SEED_STRIDE.wrapping_mul(point_index as u64));
                (0..cfg.effective_instances() as u64)
                    .map(|i| generate_random_grid(&RandomGridSpec::new(size, density, sg_distance, base.wrapping_add(i))))
                    .collect::<Result<Vec<_>, _>>()?
            }
            PointParams::Walls {
                num_walls,
                wall_length,
            } => vec![generate_wall_grid(&WallGridSpec::new(num_walls, wall_length))?],
        };
        Ok(grids
            .into_iter()
            .map(|g| g.with_corner_cutting(cfg.allow_corner_cutting))
            .collect())
    }
}

/// Descriptive columns of a report row.
#[derive(Debug, Clone, PartialEq)]
pub struct PointDescriptor {
    pub num_walls: Option<u32>,
    pub wall_length: Option<u32>,
    pub density: Option<f64>,
    /// `"300"` for square random grids, `"31x71"` for wall grids.
    pub grid_size: String,
    /// Mean realised start-goal distance over the instances.
    pub sg_distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub algorithm: AlgorithmId,
    pub value: f64,
    pub point: PointDescriptor,
    /// Per-metric statistics of the per-instance means.
    pub stats: MetricStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub config: String,
    pub seed: u64,
    pub version: String,
    pub interpolated_values: bool,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "gridbench {} seed={} {}", self.version, self.seed, self.config)?;
        if self.interpolated_values {
            f.write_str(" (default sweep values are interpolated, not taken from published tick marks)")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub kind: SweepKind,
    pub algorithms: Vec<AlgorithmId>,
    pub values: Vec<f64>,
    /// Ordered by value, then by algorithm in config order.
    pub rows: Vec<ReportRow>,
    pub provenance: Provenance,
}

impl ExperimentReport {
    pub fn row(&self, algorithm: AlgorithmId, value: f64) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.algorithm == algorithm && r.value == value)
    }

    /// Rows of one algorithm, ordered by value.
    pub fn series(&self, algorithm: AlgorithmId) -> Vec<&ReportRow> {
        self.rows.iter().filter(|r| r.algorithm == algorithm).collect()
    }
}

fn describe(cfg: &SweepConfig) -> String {
    let f = &cfg.fixed;
    let algos: Vec<&str> = cfg.algorithms.iter().map(|a| a.name()).collect();
    format!(
        "sweep={} values={:?} size={} density={} sg_distance={} num_walls={} wall_length={} algorithms={} \
         instances_per_point={} reps={} lookahead={} parallel_pairs={} allow_corner_cutting={}",
        cfg.kind,
        cfg.values,
        f.size,
        f.density,
        f.sg_distance,
        f.num_walls,
        f.wall_length,
        algos.join(","),
        cfg.effective_instances(),
        cfg.reps,
        cfg.params.lookahead,
        cfg.parallel_pairs,
        cfg.allow_corner_cutting,
    )
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<ExperimentReport, ExperimentError> {
    cfg.validate()?;
    let mut rows = Vec::with_capacity(cfg.values.len() * cfg.algorithms.len());
    for (pi, &value) in cfg.values.iter().enumerate() {
        let params = cfg.point(value);
        let grids = params.grids(cfg, pi).map_err(|source| ExperimentError::Generation {
            kind: cfg.kind,
            value,
            source,
        })?;

        let jobs: Vec<(AlgorithmId, &Grid)> = cfg
            .algorithms
            .iter()
            .flat_map(|&a| grids.iter().map(move |g| (a, g)))
            .collect();
        let bench = |&(algo, grid): &(AlgorithmId, &Grid)| {
            run_repetitions(grid, algo, &cfg.params, cfg.reps).map_err(|source| ExperimentError::Benchmark {
                kind: cfg.kind,
                value,
                algorithm: algo,
                source,
            })
        };
        let results: Vec<MetricStats> = if cfg.parallel_pairs {
            jobs.par_iter().map(bench).collect::<Result<_, _>>()?
        } else {
            jobs.iter().map(bench).collect::<Result<_, _>>()?
        };

        let point = descriptor(&params, &grids);
        for (ai, &algorithm) in cfg.algorithms.iter().enumerate() {
            let per_instance = &results[ai * grids.len()..(ai + 1) * grids.len()];
            let stats = MetricStats::from_means(per_instance).map_err(|source| ExperimentError::Benchmark {
                kind: cfg.kind,
                value,
                algorithm,
                source,
            })?;
            rows.push(ReportRow {
                algorithm,
                value,
                point: point.clone(),
                stats,
            });
        }
    }
    Ok(ExperimentReport {
        kind: cfg.kind,
        algorithms: cfg.algorithms.clone(),
        values: cfg.values.clone(),
        rows,
        provenance: Provenance {
            config: describe(cfg),
            seed: cfg.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            interpolated_values: cfg.interpolated_values,
        },
    })
}

fn descriptor(params: &PointParams, grids: &[Grid]) -> PointDescriptor {
    let sg_distance =
        grids.iter().map(|g| euclidean_heuristic(g.start(), g.goal())).sum::<f64>() / grids.len() as f64;
    match *params {
        PointParams::Random { size, density, .. } => PointDescriptor {
            num_walls: None,
            wall_length: None,
            density: Some(density),
            grid_size: size.to_string(),
            sg_distance,
        },
        PointParams::Walls {
            num_walls,
            wall_length,
        } => PointDescriptor {
            num_walls: Some(num_walls),
            wall_length: Some(wall_length),
            density: None,
            grid_size: format!("{WALL_GRID_WIDTH}x{WALL_GRID_HEIGHT}"),
            sg_distance,
        },
    }
}

pub fn default_sweeps() -> Vec<SweepConfig> {
    let lists: [(SweepKind, Vec<f64>); 5] = [
        (SweepKind::GridSize, vec![50.0, 100.0, 150.0, 200.0, 250.0, 300.0]),
        (SweepKind::SgDistance, vec![20.0, 60.0, 100.0, 140.0, 180.0, 220.0, 260.0]),
        (SweepKind::Density, vec![0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40]),
        (SweepKind::WallCount, (0..=MAX_WALLS).map(f64::from).collect()),
        (
            SweepKind::WallLength,
            wall_length_sequence().into_iter().map(f64::from).collect(),
        ),
    ];
    lists
        .into_iter()
        .map(|(kind, values)| SweepConfig {
            interpolated_values: matches!(kind, SweepKind::GridSize | SweepKind::SgDistance | SweepKind::Density),
            ..SweepConfig::new(kind, values)
        })
        .collect()
}
