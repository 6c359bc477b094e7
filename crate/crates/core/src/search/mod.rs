//! Solvers behind one contract: [`solve`] takes a grid, an [`AlgorithmId`],
//! [`SolverParams`] and a [`SearchProbe`], and returns a [`SearchOutcome`].

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use thiserror::Error;

use crate::grid::{step_cost, Grid, GridCoord};

mod ara;
mod astar;
mod dstar;
mod dstar_lite;
mod lpa;
mod realtime;
pub mod structures;

pub use ara::{ara_star_iterates, ara_star_solve, AraIterate, AraRun};
pub use astar::astar_oracle;
pub use dstar::{dstar_solve, DStar};
pub use dstar_lite::{dstar_lite_solve, DStarLite};
pub use lpa::{lpa_star_solve, LpaStar};
pub use realtime::{lrta_star_solve, lrta_star_traced, rtaa_star_solve, rtaa_star_traced, EpisodeTrace};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("no path from start to goal")]
    NoPath,
    #[error("invalid solver parameters: {0}")]
    InvalidParams(String),
    #[error("internal solver failure: {0}")]
    Internal(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AlgorithmId {
    LrtaStar,
    RtaaStar,
    AraStar,
    LpaStar,
    DStar,
    DStarLite,
    AstarOracle,
}

impl AlgorithmId {
    pub const ALL: [AlgorithmId; 7] = [
        AlgorithmId::LrtaStar,
        AlgorithmId::RtaaStar,
        AlgorithmId::AraStar,
        AlgorithmId::LpaStar,
        AlgorithmId::DStar,
        AlgorithmId::DStarLite,
        AlgorithmId::AstarOracle,
    ];

    /// The six benchmarked solvers, without the oracle.
    pub const BENCHMARKED: [AlgorithmId; 6] = [
        AlgorithmId::LrtaStar,
        AlgorithmId::RtaaStar,
        AlgorithmId::AraStar,
        AlgorithmId::LpaStar,
        AlgorithmId::DStar,
        AlgorithmId::DStarLite,
    ];

    /// Stable identifier, e.g. `D_STAR_LITE`.
    pub fn name(self) -> &'static str {
        match self {
            AlgorithmId::LrtaStar => "LRTA_STAR",
            AlgorithmId::RtaaStar => "RTAA_STAR",
            AlgorithmId::AraStar => "ARA_STAR",
            AlgorithmId::LpaStar => "LPA_STAR",
            AlgorithmId::DStar => "D_STAR",
            AlgorithmId::DStarLite => "D_STAR_LITE",
            AlgorithmId::AstarOracle => "ASTAR_ORACLE",
        }
    }

    /// Human-readable label used in tables and plot legends.
    pub fn label(self) -> &'static str {
        match self {
            AlgorithmId::LrtaStar => "LRTA*",
            AlgorithmId::RtaaStar => "RTAA*",
            AlgorithmId::AraStar => "ARA*",
            AlgorithmId::LpaStar => "LPA*",
            AlgorithmId::DStar => "D*",
            AlgorithmId::DStarLite => "D* Lite",
            AlgorithmId::AstarOracle => "A* (oracle)",
        }
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("unknown algorithm {0:?}")]
pub struct UnknownAlgorithm(pub String);

impl FromStr for AlgorithmId {
    type Err = UnknownAlgorithm;

    /// Accepts identifiers (`D_STAR_LITE`) and labels (`D* Lite`) in any case.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = |t: &str| {
            t.chars()
                .filter(|c| !matches!(c, '_' | '-' | ' '))
                .collect::<String>()
                .to_ascii_uppercase()
        };
        let wanted = norm(s.trim());
        AlgorithmId::ALL
            .into_iter()
            .find(|a| norm(a.name()) == wanted || norm(a.label()) == wanted)
            .or_else(|| match wanted.as_str() {
                "ASTAR" | "A*" | "ORACLE" => Some(AlgorithmId::AstarOracle),
                _ => None,
            })
            .ok_or_else(|| UnknownAlgorithm(s.to_string()))
    }
}

/// Ordering among equal-f entries in the A*-style open lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    #[default]
    HighG,
    LowG,
}

impl TieBreak {
    /// Secondary key component for a state with cost-so-far `g`.
    #[inline]
    pub fn secondary(self, g: f64) -> f64 {
        match self {
            TieBreak::HighG => -g,
            TieBreak::LowG => g,
        }
    }
}

impl FromStr for TieBreak {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "high_g" | "highg" => Ok(TieBreak::HighG),
            "low_g" | "lowg" => Ok(TieBreak::LowG),
            other => Err(format!("unknown tie break {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams {
    /// Expansions per planning episode for LRTA* and RTAA*.
    pub lookahead: usize,
    pub ara_initial_weight: f64,
    pub ara_weight_decrement: f64,
    pub tie_break: TieBreak,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            lookahead: 250,
            ara_initial_weight: 2.5,
            ara_weight_decrement: 0.5,
            tie_break: TieBreak::HighG,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<(), SearchError> {
        if self.lookahead == 0 {
            return Err(SearchError::InvalidParams("lookahead must be >= 1".into()));
        }
        if !(self.ara_initial_weight >= 1.0 && self.ara_initial_weight.is_finite()) {
            return Err(SearchError::InvalidParams(format!(
                "ara_initial_weight = {} (must be >= 1)",
                self.ara_initial_weight
            )));
        }
        if !(self.ara_weight_decrement > 0.0) {
            return Err(SearchError::InvalidParams(format!(
                "ara_weight_decrement = {} (must be > 0)",
                self.ara_weight_decrement
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub path: Vec<GridCoord>,
    pub path_cost: f64,
    pub expanded: u64,
    pub peak_memory_bytes: usize,
    pub solve_time_ms: f64,
}

/// Observer for allocation deltas and node expansions during a solve.
pub trait SearchProbe {
    fn on_alloc(&mut self, _delta_bytes: isize) {}
    fn on_expand(&mut self, _cell: GridCoord) {}
}

#[derive(Debug, Default, Clone, Copy)]
pub struct NoopProbe;

impl SearchProbe for NoopProbe {}

/// Tracks live search-structure bytes and their high-water mark.
#[derive(Debug, Default, Clone)]
pub struct PeakMemoryProbe {
    live: isize,
    peak: isize,
    expansions: u64,
}

impl PeakMemoryProbe {
    pub fn peak_bytes(&self) -> usize {
        self.peak.max(0) as usize
    }

    pub fn live_bytes(&self) -> usize {
        self.live.max(0) as usize
    }

    pub fn expansions(&self) -> u64 {
        self.expansions
    }
}

impl SearchProbe for PeakMemoryProbe {
    fn on_alloc(&mut self, delta_bytes: isize) {
        self.live += delta_bytes;
        self.peak = self.peak.max(self.live);
    }

    fn on_expand(&mut self, _cell: GridCoord) {
        self.expansions += 1;
    }
}

/// Runs `algo` on `grid` and times the call.
pub fn solve(
    grid: &Grid,
    algo: AlgorithmId,
    params: &SolverParams,
    probe: &mut dyn SearchProbe,
) -> Result<SearchOutcome, SearchError> {
    params.validate()?;
    let started = Instant::now();
    let mut outcome = match algo {
        AlgorithmId::LrtaStar => lrta_star_solve(grid, params, probe),
        AlgorithmId::RtaaStar => rtaa_star_solve(grid, params, probe),
        AlgorithmId::AraStar => ara_star_solve(grid, params, probe),
        AlgorithmId::LpaStar => lpa_star_solve(grid, params, probe),
        AlgorithmId::DStar => dstar_solve(grid, params, probe),
        AlgorithmId::DStarLite => dstar_lite_solve(grid, params, probe),
        AlgorithmId::AstarOracle => astar_oracle(grid, params, probe),
    }?;
    outcome.solve_time_ms = started.elapsed().as_secs_f64() * 1e3;
    Ok(outcome)
}

/// Sum of step costs along `path`; errors if two consecutive cells are not adjacent.
pub fn path_cost(path: &[GridCoord]) -> Result<f64, SearchError> {
    path.windows(2).try_fold(0.0, |acc, w| {
        step_cost(w[0], w[1])
            .map(|c| acc + c)
            .map_err(|e| SearchError::Internal(e.to_string()))
    })
}

/// Checks that `path` runs from the grid's start to its goal through legal moves.
pub fn validate_path(grid: &Grid, path: &[GridCoord]) -> Result<(), String> {
    match (path.first(), path.last()) {
        (Some(&first), Some(&last)) if first == grid.start() && last == grid.goal() => {}
        _ => return Err(format!("path does not run {} -> {}", grid.start(), grid.goal())),
    }
    if let Some(c) = path.iter().find(|c| !grid.is_traversable(**c)) {
        return Err(format!("path visits non-traversable cell {c}"));
    }
    for w in path.windows(2) {
        if grid.edge_cost(w[0], w[1]).is_none() {
            return Err(format!("illegal move {} -> {}", w[0], w[1]));
        }
    }
    Ok(())
}

pub(crate) fn finish(path: Vec<GridCoord>, ins: &structures::Instrument) -> Result<SearchOutcome, SearchError> {
    let path_cost = path_cost(&path)?;
    Ok(SearchOutcome {
        path,
        path_cost,
        expanded: ins.expanded(),
        peak_memory_bytes: ins.peak_bytes(),
        solve_time_ms: 0.0,
    })
}

/// Upper bound on path reconstruction steps before declaring a cycle.
pub(crate) fn step_limit(grid: &Grid) -> usize {
    grid.cell_count() + 1
}
