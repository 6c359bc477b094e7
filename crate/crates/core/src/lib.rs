//! Grid pathfinding solvers and a benchmarking harness.
//!
//! * [`grid`]: the 8-connected grid world, its text format and the Euclidean
//!   heuristic.
//! * [`generators`]: seeded random obstacle grids and horizontal-wall layouts.
//! * [`search`]: LRTA*, RTAA*, ARA*, LPA*, D*, D* Lite and an exact A* oracle
//!   behind one instrumented contract.
//! * [`metrics`]: timed, memory-probed repetitions and their statistics.
//! * [`experiments`]: one-parameter-at-a-time sweeps.
//! * [`selector`]: priority-driven choice of a solver for a grid.
//! * [`report`]: config parsing, CSV tables and SVG charts.
//! * [`cli`]: the `gridbench` command line.

pub mod cli;
pub mod experiments;
pub mod generators;
pub mod grid;
pub mod metrics;
pub mod report;
pub mod search;
pub mod selector;

pub use grid::{euclidean_heuristic, step_cost, Grid, GridCoord, GridError};
pub use search::{solve, AlgorithmId, SearchError, SearchOutcome, SolverParams};
