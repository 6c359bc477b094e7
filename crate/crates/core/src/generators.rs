//! Seeded environment generators: random `n x n` obstacle fields and the
//! fixed-size horizontal-wall layouts.
//!
//! Random grids draw from ChaCha8 seeded with `seed_from_u64`, so a spec
//! reproduces the same grid on every platform. Each attempt samples a start
//! uniformly, then a goal uniformly among cells whose distance to the start is
//! within 0.5 of the target, then the obstacle set uniformly without
//! replacement from the remaining cells. Unsolvable draws are discarded whole.

use std::collections::VecDeque;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::grid::{euclidean_heuristic, Grid, GridCoord};

/// Attempts before random generation gives up.
pub const MAX_ATTEMPTS: usize = 1000;
/// Acceptable deviation of the realised start-goal distance from the target.
pub const SG_TOLERANCE: f64 = 0.5;

pub const WALL_GRID_WIDTH: u32 = 31;
pub const WALL_GRID_HEIGHT: u32 = 71;
pub const WALL_SPACING: u32 = 10;
pub const MAX_WALLS: u32 = 7;
pub const WALL_GRID_START: GridCoord = GridCoord::new(1, 1);
pub const WALL_GRID_GOAL: GridCoord = GridCoord::new(29, 69);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenerationError {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("no solvable grid found for {spec} after {attempts} attempts")]
    Exhausted { spec: String, attempts: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomGridSpec {
    pub n: u32,
    pub density: f64,
    pub sg_distance: f64,
    pub seed: u64,
}

impl RandomGridSpec {
    pub fn new(n: u32, density: f64, sg_distance: f64, seed: u64) -> Self {
        RandomGridSpec {
            n,
            density,
            sg_distance,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), GenerationError> {
        if self.n < 3 {
            return Err(GenerationError::InvalidSpec(format!("n = {} (< 3)", self.n)));
        }
        if !(0.0..1.0).contains(&self.density) {
            return Err(GenerationError::InvalidSpec(format!(
                "density = {} outside [0, 1)",
                self.density
            )));
        }
        let max = std::f64::consts::SQRT_2 * (self.n - 1) as f64;
        if !(0.0..=max).contains(&self.sg_distance) {
            return Err(GenerationError::InvalidSpec(format!(
                "sg_distance = {} outside [0, {max:.3}] for n = {}",
                self.sg_distance, self.n
            )));
        }
        Ok(())
    }

    /// Obstacles placed for this spec: `floor(density * (n^2 - 2) + 0.5)`.
    pub fn obstacle_count(&self) -> usize {
        let free = (self.n as f64).powi(2) - 2.0;
        (self.density * free + 0.5).floor() as usize
    }
}

impl std::fmt::Display for RandomGridSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "n={} density={} sg_distance={} seed={}",
            self.n, self.density, self.sg_distance, self.seed
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WallGridSpec {
    pub num_walls: u32,
    pub wall_length: u32,
}

impl WallGridSpec {
    pub fn new(num_walls: u32, wall_length: u32) -> Self {
        WallGridSpec {
            num_walls,
            wall_length,
        }
    }

    pub fn validate(&self) -> Result<(), GenerationError> {
        if self.num_walls > MAX_WALLS {
            return Err(GenerationError::InvalidSpec(format!(
                "num_walls = {} (max {MAX_WALLS})",
                self.num_walls
            )));
        }
        if self.wall_length == 0 || self.wall_length >= WALL_GRID_WIDTH - 1 {
            return Err(GenerationError::InvalidSpec(format!(
                "wall_length = {} outside [1, {}]",
                self.wall_length,
                WALL_GRID_WIDTH - 2
            )));
        }
        Ok(())
    }
}

/// Breadth-first reachability of the goal from the start under the grid's
/// movement rules.
pub fn is_solvable(grid: &Grid) -> bool {
    let (start, goal) = (grid.start(), grid.goal());
    if start == goal {
        return true;
    }
    let mut seen = vec![false; grid.cell_count()];
    let mut queue = VecDeque::new();
    seen[grid.index(start)] = true;
    queue.push_back(start);
    while let Some(c) = queue.pop_front() {
        let mut found = false;
        grid.for_each_neighbor(c, |n, _| {
            let i = grid.index(n);
            if !seen[i] {
                seen[i] = true;
                found |= n == goal;
                queue.push_back(n);
            }
        });
        if found {
            return true;
        }
    }
    false
}

pub fn generate_random_grid(spec: &RandomGridSpec) -> Result<Grid, GenerationError> {
    spec.validate()?;
    let n = spec.n;
    let total = n as usize * n as usize;
    let obstacles = spec.obstacle_count();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut goals = Vec::new();

    for _ in 0..MAX_ATTEMPTS {
        let start = GridCoord::new(rng.gen_range(0..n), rng.gen_range(0..n));
        goal_candidates(n, start, spec.sg_distance, &mut goals);
        if goals.is_empty() {
            continue;
        }
        let goal = goals[rng.gen_range(0..goals.len())];

        let (si, gi) = (idx(n, start), idx(n, goal));
        let pool: Vec<usize> = (0..total).filter(|&i| i != si && i != gi).collect();
        let blocked = index::sample(&mut rng, pool.len(), obstacles.min(pool.len()))
            .into_iter()
            .map(|k| coord(n, pool[k]));
        let grid = Grid::new(n, n, blocked, start, goal)
            .map_err(|e| GenerationError::InvalidSpec(e.to_string()))?;
        if is_solvable(&grid) {
            return Ok(grid);
        }
    }
    Err(GenerationError::Exhausted {
        spec: spec.to_string(),
        attempts: MAX_ATTEMPTS,
    })
}

/// `count` grids from seeds `seed, seed + 1, ...`.
pub fn generate_instance_set(spec: &RandomGridSpec, count: usize) -> Result<Vec<Grid>, GenerationError> {
    if count == 0 {
        return Err(GenerationError::InvalidSpec("instance count must be >= 1".into()));
    }
    (0..count as u64)
        .map(|i| {
            generate_random_grid(&RandomGridSpec {
                seed: spec.seed.wrapping_add(i),
                ..*spec
            })
        })
        .collect()
}

/// The 31-column, 71-row wall layout. Wall `k` (1-based) fills row `10 * k`;
/// odd walls start at the left edge, even walls at the right edge.
pub fn generate_wall_grid(spec: &WallGridSpec) -> Result<Grid, GenerationError> {
    spec.validate()?;
    let mut blocked = Vec::with_capacity((spec.num_walls * spec.wall_length) as usize);
    for k in 1..=spec.num_walls {
        let row = WALL_SPACING * k;
        let columns = if k % 2 == 1 {
            0..spec.wall_length
        } else {
            WALL_GRID_WIDTH - spec.wall_length..WALL_GRID_WIDTH
        };
        blocked.extend(columns.map(|x| GridCoord::new(x, row)));
    }
    let grid = Grid::new(
        WALL_GRID_WIDTH,
        WALL_GRID_HEIGHT,
        blocked,
        WALL_GRID_START,
        WALL_GRID_GOAL,
    )
    .map_err(|e| GenerationError::InvalidSpec(e.to_string()))?;
    if !is_solvable(&grid) {
        return Err(GenerationError::InvalidSpec(format!("{spec:?} is not solvable")));
    }
    Ok(grid)
}

/// Wall lengths for the length sweep: half the width rounded down, growing by 2.
pub fn wall_length_sequence() -> Vec<u32> {
    (0..7).map(|i| WALL_GRID_WIDTH / 2 + 2 * i).collect()
}

fn goal_candidates(n: u32, start: GridCoord, target: f64, out: &mut Vec<GridCoord>) {
    out.clear();
    let reach = (target + SG_TOLERANCE).ceil() as i64;
    let (sx, sy) = (start.x as i64, start.y as i64);
    let clamp = |v: i64| v.clamp(0, n as i64 - 1);
    for y in clamp(sy - reach)..=clamp(sy + reach) {
        for x in clamp(sx - reach)..=clamp(sx + reach) {
            let c = GridCoord::new(x as u32, y as u32);
            if (euclidean_heuristic(start, c) - target).abs() <= SG_TOLERANCE {
                out.push(c);
            }
        }
    }
}

fn idx(n: u32, c: GridCoord) -> usize {
    c.y as usize * n as usize + c.x as usize
}

fn coord(n: u32, i: usize) -> GridCoord {
    GridCoord::new((i % n as usize) as u32, (i / n as usize) as u32)
}
