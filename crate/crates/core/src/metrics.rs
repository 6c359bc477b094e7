//! Timing, memory and path-cost measurement with repeated runs.
//!
//! Memory is the high-water mark of live search-structure bytes reported
//! through the solver probe, not process RSS, so it is identical across
//! repetitions and machines. Only `solve_time_ms` varies between runs.

use std::fmt;
use std::time::Instant;

use thiserror::Error;

use crate::grid::Grid;
use crate::search::{solve, AlgorithmId, PeakMemoryProbe, SearchError, SolverParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("cannot aggregate an empty sample list")]
    EmptySamples,
    #[error("repetition count must be >= 1")]
    InvalidReps,
    #[error("measurement failure: {0}")]
    Measurement(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    PathCost,
    MemoryKb,
    SolvingTimeMs,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::SolvingTimeMs, Metric::MemoryKb, Metric::PathCost];

    /// File-name stem.
    pub fn name(self) -> &'static str {
        match self {
            Metric::PathCost => "path_cost",
            Metric::MemoryKb => "memory_allocation",
            Metric::SolvingTimeMs => "solving_time",
        }
    }

    /// Axis label.
    pub fn label(self) -> &'static str {
        match self {
            Metric::PathCost => "Path cost",
            Metric::MemoryKb => "Memory allocation (KB)",
            Metric::SolvingTimeMs => "Solving time (ms)",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Metrics of a single solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunMetrics {
    pub path_cost: f64,
    pub memory_kb: f64,
    pub solve_time_ms: f64,
    pub expanded: u64,
}

impl RunMetrics {
    pub fn get(&self, m: Metric) -> f64 {
        match m {
            Metric::PathCost => self.path_cost,
            Metric::MemoryKb => self.memory_kb,
            Metric::SolvingTimeMs => self.solve_time_ms,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateStats {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (`n - 1` denominator); 0 when `n == 1`.
    pub stddev: f64,
    pub min: f64,
    pub max: f64,
}

/// One [`AggregateStats`] per metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricStats {
    pub path_cost: AggregateStats,
    pub memory_kb: AggregateStats,
    pub solve_time_ms: AggregateStats,
}

impl MetricStats {
    pub fn get(&self, m: Metric) -> &AggregateStats {
        match m {
            Metric::PathCost => &self.path_cost,
            Metric::MemoryKb => &self.memory_kb,
            Metric::SolvingTimeMs => &self.solve_time_ms,
        }
    }

    /// Aggregates each metric independently over `runs`.
    pub fn from_runs(runs: &[RunMetrics]) -> Result<MetricStats, MetricsError> {
        let column = |m: Metric| aggregate(&runs.iter().map(|r| r.get(m)).collect::<Vec<_>>());
        Ok(MetricStats {
            path_cost: column(Metric::PathCost)?,
            memory_kb: column(Metric::MemoryKb)?,
            solve_time_ms: column(Metric::SolvingTimeMs)?,
        })
    }

    /// Aggregates the per-metric means of several stats (unweighted), e.g.
    /// the per-grid results of the instances of one parameter point.
    pub fn from_means(parts: &[MetricStats]) -> Result<MetricStats, MetricsError> {
        let column = |m: Metric| aggregate(&parts.iter().map(|p| p.get(m).mean).collect::<Vec<_>>());
        Ok(MetricStats {
            path_cost: column(Metric::PathCost)?,
            memory_kb: column(Metric::MemoryKb)?,
            solve_time_ms: column(Metric::SolvingTimeMs)?,
        })
    }
}

/// Mean, sample standard deviation, min and max, using Welford's update.
pub fn aggregate(samples: &[f64]) -> Result<AggregateStats, MetricsError> {
    if samples.is_empty() {
        return Err(MetricsError::EmptySamples);
    }
    let (mut mean, mut m2) = (0.0f64, 0.0f64);
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    for (i, &x) in samples.iter().enumerate() {
        let delta = x - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (x - mean);
        min = min.min(x);
        max = max.max(x);
    }
    let n = samples.len();
    let stddev = if n > 1 { (m2.max(0.0) / (n - 1) as f64).sqrt() } else { 0.0 };
    Ok(AggregateStats {
        n,
        mean: mean.clamp(min, max),
        stddev,
        min,
        max,
    })
}

/// Solves once, timing only the solver call.
pub fn measure_run(grid: &Grid, algo: AlgorithmId, params: &SolverParams) -> Result<RunMetrics, MetricsError> {
    let mut probe = PeakMemoryProbe::default();
    let started = Instant::now();
    let outcome = solve(grid, algo, params, &mut probe)?;
    let solve_time_ms = started.elapsed().as_secs_f64() * 1e3;
    if probe.peak_bytes() != outcome.peak_memory_bytes {
        return Err(MetricsError::Measurement(format!(
            "probe saw {} peak bytes, solver reported {}",
            probe.peak_bytes(),
            outcome.peak_memory_bytes
        )));
    }
    Ok(RunMetrics {
        path_cost: outcome.path_cost,
        memory_kb: probe.peak_bytes() as f64 / 1024.0,
        solve_time_ms,
        expanded: outcome.expanded,
    })
}

/// One discarded warm-up run followed by `reps` measured runs, in sequence.
pub fn run_repetitions(
    grid: &Grid,
    algo: AlgorithmId,
    params: &SolverParams,
    reps: usize,
) -> Result<MetricStats, MetricsError> {
    if reps == 0 {
        return Err(MetricsError::InvalidReps);
    }
    measure_run(grid, algo, params)?;
    let runs = (0..reps)
        .map(|_| measure_run(grid, algo, params))
        .collect::<Result<Vec<_>, _>>()?;
    MetricStats::from_runs(&runs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridCoord;

    #[test]
    fn constant_samples() {
        let s = aggregate(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!((s.n, s.mean, s.stddev, s.min, s.max), (3, 1.0, 0.0, 1.0, 1.0));
        let s = aggregate(&[0.1; 7]).unwrap();
        assert_eq!(s.mean, 0.1);
        assert_eq!(s.stddev, 0.0);
    }

    #[test]
    fn two_points() {
        let s = aggregate(&[2.0, 4.0]).unwrap();
        assert_eq!(s.mean, 3.0);
        assert!((s.stddev - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn single_sample_has_zero_spread() {
        let s = aggregate(&[5.5]).unwrap();
        assert_eq!((s.n, s.mean, s.stddev), (1, 5.5, 0.0));
    }

    #[test]
    fn empty_is_error() {
        assert_eq!(aggregate(&[]), Err(MetricsError::EmptySamples));
    }

    #[test]
    fn trivial_solve() {
        let g = Grid::empty(4, 4, GridCoord::new(1, 1), GridCoord::new(1, 1)).unwrap();
        for algo in AlgorithmId::ALL {
            let m = measure_run(&g, algo, &SolverParams::default()).unwrap();
            assert_eq!(m.path_cost, 0.0);
            assert!(m.memory_kb > 0.0, "{algo}");
            assert!(m.solve_time_ms >= 0.0);
        }
    }

    #[test]
    fn repetitions() {
        let g = Grid::empty(8, 8, GridCoord::new(0, 0), GridCoord::new(7, 3)).unwrap();
        let params = SolverParams::default();
        let one = run_repetitions(&g, AlgorithmId::AraStar, &params, 1).unwrap();
        for m in Metric::ALL {
            assert_eq!(one.get(m).stddev, 0.0);
        }
        let many = run_repetitions(&g, AlgorithmId::DStarLite, &params, 20).unwrap();
        assert_eq!(many.path_cost.n, 20);
        assert_eq!(many.path_cost.stddev, 0.0);
        assert_eq!(many.memory_kb.stddev, 0.0);
        assert_eq!(
            run_repetitions(&g, AlgorithmId::DStar, &params, 0),
            Err(MetricsError::InvalidReps)
        );
    }
}
