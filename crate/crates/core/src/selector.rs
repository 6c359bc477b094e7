//! Priority-driven choice of a search algorithm for a grid.
//!
//! Memory and path-cost priorities always pick D* Lite. For solving time the
//! start-goal distance decides: RTAA* at or beyond the threshold, ARA* below.
//! Only the start and goal of the grid are consulted.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::grid::{euclidean_heuristic, Grid, GridCoord};
use crate::metrics::{run_repetitions, Metric, MetricStats, MetricsError};
use crate::search::{AlgorithmId, SolverParams};

pub const DEFAULT_DISTANCE_THRESHOLD: f64 = 140.0;

pub const DEFAULT_CANDIDATES: [AlgorithmId; 3] = [AlgorithmId::RtaaStar, AlgorithmId::AraStar, AlgorithmId::DStarLite];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SelectionError {
    #[error("invalid priority {0:?} (expected memory, pathcost or solvingtime)")]
    InvalidPriority(String),
    #[error("distance threshold must be a positive number, got {0}")]
    InvalidThreshold(f64),
    #[error("no candidate algorithms")]
    NoCandidates,
    #[error(transparent)]
    Benchmark(#[from] MetricsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Priority {
    Memory,
    PathCost,
    SolvingTime,
}

impl Priority {
    pub const ALL: [Priority; 3] = [Priority::Memory, Priority::PathCost, Priority::SolvingTime];

    pub fn name(self) -> &'static str {
        match self {
            Priority::Memory => "MEMORY",
            Priority::PathCost => "PATH_COST",
            Priority::SolvingTime => "SOLVING_TIME",
        }
    }

    /// The metric this priority minimises.
    pub fn metric(self) -> Metric {
        match self {
            Priority::Memory => Metric::MemoryKb,
            Priority::PathCost => Metric::PathCost,
            Priority::SolvingTime => Metric::SolvingTimeMs,
        }
    }
}

impl fmt::Display for Priority {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Priority {
    type Err = SelectionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .trim()
            .chars()
            .filter(|c| !matches!(c, '_' | '-' | ' '))
            .collect::<String>()
            .to_ascii_lowercase();
        match norm.as_str() {
            "memory" => Ok(Priority::Memory),
            "pathcost" => Ok(Priority::PathCost),
            "solvingtime" => Ok(Priority::SolvingTime),
            _ => Err(SelectionError::InvalidPriority(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionRequest {
    pub start: GridCoord,
    pub goal: GridCoord,
    pub distance_threshold: f64,
    pub priority: Priority,
}

impl SelectionRequest {
    pub fn new(grid: &Grid, priority: Priority) -> SelectionRequest {
        SelectionRequest {
            start: grid.start(),
            goal: grid.goal(),
            distance_threshold: DEFAULT_DISTANCE_THRESHOLD,
            priority,
        }
    }

    pub fn with_threshold(self, distance_threshold: f64) -> SelectionRequest {
        SelectionRequest {
            distance_threshold,
            ..self
        }
    }

    pub fn validate(&self) -> Result<(), SelectionError> {
        if self.distance_threshold > 0.0 && self.distance_threshold.is_finite() {
            Ok(())
        } else {
            Err(SelectionError::InvalidThreshold(self.distance_threshold))
        }
    }
}

pub fn compute_euclidean_distance(start: GridCoord, goal: GridCoord) -> f64 {
    euclidean_heuristic(start, goal)
}

pub fn select_algorithm(req: &SelectionRequest) -> Result<AlgorithmId, SelectionError> {
    req.validate()?;
    Ok(match req.priority {
        Priority::Memory | Priority::PathCost => AlgorithmId::DStarLite,
        Priority::SolvingTime => {
            if compute_euclidean_distance(req.start, req.goal) >= req.distance_threshold {
                AlgorithmId::RtaaStar
            } else {
                AlgorithmId::AraStar
            }
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateResult {
    pub algorithm: AlgorithmId,
    pub stats: MetricStats,
    /// Mean of the priority metric is minimal among candidates (ties included).
    pub best_for_priority: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionEvaluation {
    pub request: SelectionRequest,
    pub distance: f64,
    pub selected: AlgorithmId,
    pub candidates: Vec<CandidateResult>,
    pub selected_is_best: bool,
}

impl SelectionEvaluation {
    pub fn candidate(&self, algorithm: AlgorithmId) -> Option<&CandidateResult> {
        self.candidates.iter().find(|c| c.algorithm == algorithm)
    }
}

/// Benchmarks every candidate on `grid` (the selected algorithm is appended
/// if missing) and reports whether the selection was best for the priority.
pub fn evaluate_selection(
    grid: &Grid,
    req: &SelectionRequest,
    candidates: &[AlgorithmId],
    params: &SolverParams,
    reps: usize,
) -> Result<SelectionEvaluation, SelectionError> {
    if candidates.is_empty() {
        return Err(SelectionError::NoCandidates);
    }
    let selected = select_algorithm(req)?;
    let mut algos = candidates.to_vec();
    if !algos.contains(&selected) {
        algos.push(selected);
    }
    let metric = req.priority.metric();
    let measured = algos
        .iter()
        .map(|&a| run_repetitions(grid, a, params, reps).map(|s| (a, s)))
        .collect::<Result<Vec<_>, _>>()?;
    let best = measured
        .iter()
        .map(|(_, s)| s.get(metric).mean)
        .fold(f64::INFINITY, f64::min);
    let candidates: Vec<CandidateResult> = measured
        .into_iter()
        .map(|(algorithm, stats)| CandidateResult {
            algorithm,
            best_for_priority: stats.get(metric).mean <= best,
            stats,
        })
        .collect();
    let selected_is_best = candidates
        .iter()
        .any(|c| c.algorithm == selected && c.best_for_priority);
    Ok(SelectionEvaluation {
        request: *req,
        distance: compute_euclidean_distance(req.start, req.goal),
        selected,
        candidates,
        selected_is_best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: u32, y: u32) -> GridCoord {
        GridCoord::new(x, y)
    }

    fn request(start: GridCoord, goal: GridCoord, priority: Priority) -> SelectionRequest {
        SelectionRequest {
            start,
            goal,
            distance_threshold: DEFAULT_DISTANCE_THRESHOLD,
            priority,
        }
    }

    #[test]
    fn distances() {
        assert_eq!(compute_euclidean_distance(c(0, 0), c(3, 4)), 5.0);
        assert_eq!(compute_euclidean_distance(c(7, 7), c(7, 7)), 0.0);
        assert!((compute_euclidean_distance(c(1, 1), c(29, 69)) - 73.539).abs() < 1e-3);
    }

    #[test]
    fn rules() {
        let far = request(c(0, 0), c(0, 150), Priority::SolvingTime);
        assert_eq!(select_algorithm(&far).unwrap(), AlgorithmId::RtaaStar);
        let near = request(c(0, 0), c(0, 100), Priority::SolvingTime);
        assert_eq!(select_algorithm(&near).unwrap(), AlgorithmId::AraStar);
        let edge = request(c(0, 0), c(0, 140), Priority::SolvingTime);
        assert_eq!(select_algorithm(&edge).unwrap(), AlgorithmId::RtaaStar);
        for p in [Priority::Memory, Priority::PathCost] {
            assert_eq!(select_algorithm(&request(c(0, 0), c(0, 150), p)).unwrap(), AlgorithmId::DStarLite);
        }
    }

    #[test]
    fn parse_priority() {
        assert_eq!("memory".parse::<Priority>().unwrap(), Priority::Memory);
        assert_eq!("PathCost".parse::<Priority>().unwrap(), Priority::PathCost);
        assert_eq!("SOLVING_TIME".parse::<Priority>().unwrap(), Priority::SolvingTime);
        assert!(matches!("speed".parse::<Priority>(), Err(SelectionError::InvalidPriority(_))));
    }

    #[test]
    fn bad_threshold() {
        let req = request(c(0, 0), c(1, 1), Priority::Memory).with_threshold(0.0);
        assert_eq!(select_algorithm(&req), Err(SelectionError::InvalidThreshold(0.0)));
    }

    #[test]
    fn trivial_tie_is_best() {
        let g = Grid::empty(3, 3, c(1, 1), c(1, 1)).unwrap();
        let req = SelectionRequest::new(&g, Priority::PathCost);
        let eval = evaluate_selection(&g, &req, &DEFAULT_CANDIDATES, &SolverParams::default(), 2).unwrap();
        assert_eq!(eval.candidates.len(), 3);
        assert!(eval.selected_is_best);
    }

    #[test]
    fn appends_selected() {
        let g = Grid::empty(6, 6, c(0, 0), c(5, 5)).unwrap();
        let req = SelectionRequest::new(&g, Priority::Memory);
        let eval = evaluate_selection(&g, &req, &[AlgorithmId::AraStar], &SolverParams::default(), 1).unwrap();
        assert_eq!(eval.selected, AlgorithmId::DStarLite);
        assert_eq!(eval.candidates.len(), 2);
        assert!(eval.candidate(AlgorithmId::DStarLite).is_some());
        assert_eq!(
            evaluate_selection(&g, &req, &[], &SolverParams::default(), 1),
            Err(SelectionError::NoCandidates)
        );
    }
}
