//! The 8-connected grid world shared by every solver.
//!
//! Coordinates use `x` for the column and `y` for the row with the origin in
//! the top-left corner, which is also how the text format lays cells out.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Cost of a diagonal move.
pub const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Clockwise neighbor offsets starting at north `(0, -1)`.
pub const DIRECTIONS: [(i32, i32); 8] = [
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("cell ({x}, {y}) is not traversable")]
    InvalidCell { x: u32, y: u32 },
    #[error("cells ({0}) and ({1}) are not 8-adjacent")]
    NotAdjacent(GridCoord, GridCoord),
    #[error("cell ({0}) lies outside the {1}x{2} grid")]
    OutOfBounds(GridCoord, u32, u32),
    #[error("{0} cell ({1}) is blocked")]
    BlockedEndpoint(&'static str, GridCoord),
    #[error("grid dimensions must be nonzero")]
    EmptyGrid,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A cell position: `x` is the column, `y` the row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridCoord {
    pub x: u32,
    pub y: u32,
}

impl GridCoord {
    pub const fn new(x: u32, y: u32) -> Self {
        GridCoord { x, y }
    }

    /// Shifts by `(dx, dy)`, returning `None` if either component goes negative.
    pub fn offset(self, dx: i32, dy: i32) -> Option<GridCoord> {
        let x = self.x.checked_add_signed(dx)?;
        let y = self.y.checked_add_signed(dy)?;
        Some(GridCoord { x, y })
    }
}

impl fmt::Display for GridCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.x, self.y)
    }
}

/// One executed or candidate move between 8-adjacent cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Move {
    pub from: GridCoord,
    pub to: GridCoord,
    pub cost: f64,
}

impl Move {
    pub fn new(from: GridCoord, to: GridCoord) -> Result<Move, GridError> {
        Ok(Move {
            from,
            to,
            cost: step_cost(from, to)?,
        })
    }
}

/// Rectangular cell world with a blocked set, a start and a goal.
///
/// Blocked cells are stored as a row-major bitmap. The grid itself is a plain
/// value: solvers that replan against edits keep their own copy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    width: u32,
    height: u32,
    blocked: Vec<bool>,
    start: GridCoord,
    goal: GridCoord,
    allow_corner_cutting: bool,
}

impl Grid {
    /// Builds a grid, validating that every blocked cell is in bounds and that
    /// start and goal are in bounds and free.
    pub fn new(
        width: u32,
        height: u32,
        blocked: impl IntoIterator<Item = GridCoord>,
        start: GridCoord,
        goal: GridCoord,
    ) -> Result<Grid, GridError> {
        if width == 0 || height == 0 {
            return Err(GridError::EmptyGrid);
        }
        let mut grid = Grid {
            width,
            height,
            blocked: vec![false; width as usize * height as usize],
            start,
            goal,
            allow_corner_cutting: false,
        };
        for c in [start, goal] {
            if !grid.in_bounds(c) {
                return Err(GridError::OutOfBounds(c, width, height));
            }
        }
        for c in blocked {
            if !grid.in_bounds(c) {
                return Err(GridError::OutOfBounds(c, width, height));
            }
            let i = grid.index(c);
            grid.blocked[i] = true;
        }
        if grid.is_blocked(start) {
            return Err(GridError::BlockedEndpoint("start", start));
        }
        if grid.is_blocked(goal) {
            return Err(GridError::BlockedEndpoint("goal", goal));
        }
        Ok(grid)
    }

    /// An obstacle-free grid.
    pub fn empty(width: u32, height: u32, start: GridCoord, goal: GridCoord) -> Result<Grid, GridError> {
        Grid::new(width, height, std::iter::empty(), start, goal)
    }

    /// Enables or disables diagonal moves that squeeze past a blocked flank.
    pub fn with_corner_cutting(mut self, allow: bool) -> Grid {
        self.allow_corner_cutting = allow;
        self
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn start(&self) -> GridCoord {
        self.start
    }

    pub fn goal(&self) -> GridCoord {
        self.goal
    }

    pub fn allow_corner_cutting(&self) -> bool {
        self.allow_corner_cutting
    }

    pub fn cell_count(&self) -> usize {
        self.blocked.len()
    }

    /// Moves the start to `c`, which must be traversable.
    pub fn set_start(&mut self, c: GridCoord) -> Result<(), GridError> {
        if !self.is_traversable(c) {
            return Err(GridError::InvalidCell { x: c.x, y: c.y });
        }
        self.start = c;
        Ok(())
    }

    /// Marks `c` blocked or free. Start and goal cannot be blocked.
    pub fn set_blocked(&mut self, c: GridCoord, blocked: bool) -> Result<(), GridError> {
        if !self.in_bounds(c) {
            return Err(GridError::OutOfBounds(c, self.width, self.height));
        }
        if blocked && c == self.start {
            return Err(GridError::BlockedEndpoint("start", c));
        }
        if blocked && c == self.goal {
            return Err(GridError::BlockedEndpoint("goal", c));
        }
        let i = self.index(c);
        self.blocked[i] = blocked;
        Ok(())
    }

    #[inline]
    pub fn index(&self, c: GridCoord) -> usize {
        c.y as usize * self.width as usize + c.x as usize
    }

    #[inline]
    pub fn in_bounds(&self, c: GridCoord) -> bool {
        c.x < self.width && c.y < self.height
    }

    #[inline]
    pub fn is_blocked(&self, c: GridCoord) -> bool {
        self.in_bounds(c) && self.blocked[self.index(c)]
    }

    #[inline]
    pub fn is_traversable(&self, c: GridCoord) -> bool {
        self.in_bounds(c) && !self.blocked[self.index(c)]
    }

    pub fn obstacle_count(&self) -> usize {
        self.blocked.iter().filter(|b| **b).count()
    }

    /// Blocked cells in row-major order.
    pub fn blocked_cells(&self) -> impl Iterator<Item = GridCoord> + '_ {
        let w = self.width;
        self.blocked
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(move |(i, _)| GridCoord::new(i as u32 % w, i as u32 / w))
    }

    /// Cost of the move `from -> to` in the current grid, or `None` when the
    /// move is not allowed (blocked endpoint, corner cut, or not adjacent).
    pub fn edge_cost(&self, from: GridCoord, to: GridCoord) -> Option<f64> {
        let dx = to.x as i64 - from.x as i64;
        let dy = to.y as i64 - from.y as i64;
        if dx.abs() > 1 || dy.abs() > 1 || (dx == 0 && dy == 0) {
            return None;
        }
        if !self.is_traversable(from) || !self.is_traversable(to) {
            return None;
        }
        if dx != 0 && dy != 0 {
            if !self.allow_corner_cutting {
                let side_a = GridCoord::new(to.x, from.y);
                let side_b = GridCoord::new(from.x, to.y);
                if !self.is_traversable(side_a) || !self.is_traversable(side_b) {
                    return None;
                }
            }
            Some(SQRT_2)
        } else {
            Some(1.0)
        }
    }

    /// Traversable 8-neighbors of `c` with their move costs, clockwise from north.
    pub fn neighbors8(&self, c: GridCoord) -> Result<Vec<(GridCoord, f64)>, GridError> {
        if !self.is_traversable(c) {
            return Err(GridError::InvalidCell { x: c.x, y: c.y });
        }
        let mut out = Vec::with_capacity(8);
        self.for_each_neighbor(c, |n, cost| out.push((n, cost)));
        Ok(out)
    }

    /// Allocation-free neighbor walk used in the solvers' inner loops. Does
    /// nothing when `c` itself is not traversable.
    #[inline]
    pub fn for_each_neighbor(&self, c: GridCoord, mut f: impl FnMut(GridCoord, f64)) {
        if !self.is_traversable(c) {
            return;
        }
        for (dx, dy) in DIRECTIONS {
            if let Some(n) = c.offset(dx, dy) {
                if let Some(cost) = self.edge_cost(c, n) {
                    f(n, cost);
                }
            }
        }
    }

    /// All in-bounds 8-adjacent cells regardless of obstacles, clockwise from north.
    pub fn adjacent_cells(&self, c: GridCoord) -> impl Iterator<Item = GridCoord> + '_ {
        DIRECTIONS
            .iter()
            .filter_map(move |&(dx, dy)| c.offset(dx, dy))
            .filter(move |n| self.in_bounds(*n))
    }

    /// Parses the text grid format: a `WIDTH HEIGHT` line, then `HEIGHT` rows
    /// of `WIDTH` characters drawn from `.`, `#`, `S` and `G`.
    pub fn parse(text: &str) -> Result<Grid, GridError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(GridError::Parse {
            line: 1,
            msg: "missing WIDTH HEIGHT header".into(),
        })?;
        let dims: Vec<&str> = header.split_whitespace().collect();
        let parse_dim = |s: &str| {
            s.parse::<u32>().map_err(|_| GridError::Parse {
                line: 1,
                msg: format!("invalid dimension {s:?}"),
            })
        };
        if dims.len() != 2 {
            return Err(GridError::Parse {
                line: 1,
                msg: "header must be WIDTH HEIGHT".into(),
            });
        }
        let (width, height) = (parse_dim(dims[0])?, parse_dim(dims[1])?);
        if width == 0 || height == 0 {
            return Err(GridError::EmptyGrid);
        }

        let mut blocked = Vec::new();
        let (mut start, mut goal) = (None, None);
        let mut rows = 0u32;
        for (i, line) in lines {
            let lineno = i + 1;
            if rows == height {
                return Err(GridError::Parse {
                    line: lineno,
                    msg: format!("more than {height} rows"),
                });
            }
            let line = line.trim_end_matches('\r');
            if line.chars().count() != width as usize {
                return Err(GridError::Parse {
                    line: lineno,
                    msg: format!("expected {width} cells, found {}", line.chars().count()),
                });
            }
            for (x, ch) in line.chars().enumerate() {
                let c = GridCoord::new(x as u32, rows);
                let dup = |what: &str| GridError::Parse {
                    line: lineno,
                    msg: format!("more than one {what}"),
                };
                match ch {
                    '.' => {}
                    '#' => blocked.push(c),
                    'S' => {
                        if start.replace(c).is_some() {
                            return Err(dup("'S'"));
                        }
                    }
                    'G' => {
                        if goal.replace(c).is_some() {
                            return Err(dup("'G'"));
                        }
                    }
                    other => {
                        return Err(GridError::Parse {
                            line: lineno,
                            msg: format!("unexpected character {other:?}"),
                        })
                    }
                }
            }
            rows += 1;
        }
        if rows != height {
            return Err(GridError::Parse {
                line: rows as usize + 2,
                msg: format!("expected {height} rows, found {rows}"),
            });
        }
        let missing = |what: &str| GridError::Parse {
            line: 1,
            msg: format!("missing {what}"),
        };
        let start = start.ok_or_else(|| missing("'S'"))?;
        let goal = goal.ok_or_else(|| missing("'G'"))?;
        Grid::new(width, height, blocked, start, goal)
    }

    /// Renders the text grid format. A grid whose start equals its goal
    /// cannot be represented and renders the cell as `S`.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity((self.width as usize + 1) * (self.height as usize + 1));
        out.push_str(&format!("{} {}\n", self.width, self.height));
        for y in 0..self.height {
            for x in 0..self.width {
                let c = GridCoord::new(x, y);
                out.push(if c == self.start {
                    'S'
                } else if c == self.goal {
                    'G'
                } else if self.is_blocked(c) {
                    '#'
                } else {
                    '.'
                });
            }
            out.push('\n');
        }
        out
    }
}

impl FromStr for Grid {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Grid::parse(s)
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Straight-line distance between two cells.
#[inline]
pub fn euclidean_heuristic(a: GridCoord, b: GridCoord) -> f64 {
    let dx = a.x as f64 - b.x as f64;
    let dy = a.y as f64 - b.y as f64;
    (dx * dx + dy * dy).sqrt()
}

/// Octile distance: the obstacle-free 8-connected path cost.
pub fn octile_distance(a: GridCoord, b: GridCoord) -> f64 {
    let dx = a.x.abs_diff(b.x) as f64;
    let dy = a.y.abs_diff(b.y) as f64;
    dx.max(dy) - dx.min(dy) + SQRT_2 * dx.min(dy)
}

/// 1 for orthogonal neighbors, √2 for diagonal ones.
pub fn step_cost(a: GridCoord, b: GridCoord) -> Result<f64, GridError> {
    match (a.x.abs_diff(b.x), a.y.abs_diff(b.y)) {
        (1, 0) | (0, 1) => Ok(1.0),
        (1, 1) => Ok(SQRT_2),
        _ => Err(GridError::NotAdjacent(a, b)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: u32, y: u32) -> GridCoord {
        GridCoord::new(x, y)
    }

    fn empty(w: u32, h: u32) -> Grid {
        Grid::empty(w, h, c(0, 0), c(w - 1, h - 1)).unwrap()
    }

    #[test]
    fn bounds() {
        let g = empty(10, 10);
        assert!(g.in_bounds(c(0, 0)));
        assert!(!g.in_bounds(c(10, 0)));
        let tall = empty(31, 71);
        assert!(tall.in_bounds(c(29, 69)));
        assert!(!tall.in_bounds(c(31, 69)));
    }

    #[test]
    fn traversable() {
        let g = Grid::new(4, 4, [c(1, 1)], c(0, 0), c(3, 3)).unwrap();
        assert!(g.is_traversable(c(2, 2)));
        assert!(!g.is_traversable(c(1, 1)));
        assert!(!g.is_traversable(c(4, 0)));
    }

    #[test]
    fn interior_neighbors() {
        let g = empty(5, 5);
        let n = g.neighbors8(c(2, 2)).unwrap();
        assert_eq!(n.len(), 8);
        assert_eq!(n.iter().filter(|(_, k)| *k == 1.0).count(), 4);
        assert_eq!(n.iter().filter(|(_, k)| *k == SQRT_2).count(), 4);
        assert_eq!(n[0].0, c(2, 1));
        assert_eq!(n[1].0, c(3, 1));
    }

    #[test]
    fn corner_neighbors() {
        let g = empty(5, 5);
        let n = g.neighbors8(c(0, 0)).unwrap();
        assert_eq!(n, vec![(c(1, 0), 1.0), (c(1, 1), SQRT_2), (c(0, 1), 1.0)]);
    }

    #[test]
    fn corner_cutting_rule() {
        // Diagonal (1,1)->(2,0) is flanked by (2,1) and (1,0).
        let g = Grid::new(3, 3, [c(1, 0)], c(1, 1), c(2, 2)).unwrap();
        let n: Vec<_> = g.neighbors8(c(1, 1)).unwrap().into_iter().map(|(n, _)| n).collect();
        assert!(!n.contains(&c(2, 0)));
        assert!(!n.contains(&c(0, 0)));
        assert!(n.contains(&c(2, 2)));
        assert_eq!(n.len(), 5);

        let g = g.with_corner_cutting(true);
        let n: Vec<_> = g.neighbors8(c(1, 1)).unwrap().into_iter().map(|(n, _)| n).collect();
        assert!(n.contains(&c(2, 0)));
        assert_eq!(n.len(), 7);
    }

    #[test]
    fn neighbors_of_blocked_cell_is_error() {
        let g = Grid::new(3, 3, [c(1, 1)], c(0, 0), c(2, 2)).unwrap();
        assert_eq!(g.neighbors8(c(1, 1)), Err(GridError::InvalidCell { x: 1, y: 1 }));
        assert!(g.neighbors8(c(5, 5)).is_err());
    }

    #[test]
    fn heuristic_values() {
        assert_eq!(euclidean_heuristic(c(0, 0), c(3, 4)), 5.0);
        assert_eq!(euclidean_heuristic(c(7, 7), c(7, 7)), 0.0);
        assert!((euclidean_heuristic(c(1, 1), c(29, 69)) - 73.539).abs() < 1e-3);
    }

    #[test]
    fn step_costs() {
        assert_eq!(step_cost(c(2, 2), c(2, 3)).unwrap(), 1.0);
        assert!((step_cost(c(2, 2), c(3, 3)).unwrap() - 1.41421356).abs() < 1e-8);
        assert!(matches!(step_cost(c(2, 2), c(2, 4)), Err(GridError::NotAdjacent(..))));
        assert!(step_cost(c(2, 2), c(2, 2)).is_err());
    }

    #[test]
    fn construction_rejects_bad_endpoints() {
        assert!(matches!(
            Grid::new(3, 3, [c(0, 0)], c(0, 0), c(2, 2)),
            Err(GridError::BlockedEndpoint("start", _))
        ));
        assert!(matches!(
            Grid::new(3, 3, [c(3, 0)], c(0, 0), c(2, 2)),
            Err(GridError::OutOfBounds(..))
        ));
        assert!(Grid::new(3, 3, [], c(0, 0), c(0, 0)).is_ok());
    }

    #[test]
    fn text_round_trip() {
        let text = "4 3\nS..#\n.##.\n...G\n";
        let g = Grid::parse(text).unwrap();
        assert_eq!(g.width(), 4);
        assert_eq!(g.height(), 3);
        assert_eq!(g.start(), c(0, 0));
        assert_eq!(g.goal(), c(3, 2));
        assert_eq!(g.obstacle_count(), 3);
        assert_eq!(g.to_text(), text);
    }

    #[test]
    fn text_errors() {
        assert!(Grid::parse("").is_err());
        assert!(Grid::parse("2 2\nS.\n..\n").is_err());
        assert!(Grid::parse("2 2\nSS\n.G\n").is_err());
        assert!(Grid::parse("2 2\nS.\n.G\n..\n").is_err());
        let err = Grid::parse("3 2\nS..\n.xG\n").unwrap_err();
        assert!(matches!(err, GridError::Parse { line: 3, .. }));
    }
}
