//! Anytime Repairing A*.
//!
//! Weighted A* with `f = g + w * h`, starting from `ara_initial_weight` and
//! lowering `w` by `ara_weight_decrement` after each published solution until
//! it reaches 1. Within an improvement pass a cell is expanded at most once;
//! cells whose `g` drops after they were closed go to an inconsistent list
//! that is merged back into the open list before the next pass, so earlier
//! work is reused instead of restarting the search.

use crate::grid::{euclidean_heuristic, Grid, GridCoord};

use super::astar::reconstruct;
use super::structures::{Instrument, Key, OpenList, ValueMap};
use super::{finish, path_cost, SearchError, SearchOutcome, SearchProbe, SolverParams, TieBreak};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Open,
    Closed,
    Inconsistent,
    Idle,
}

#[derive(Debug, Clone, Copy)]
struct Node {
    g: f64,
    parent: Option<GridCoord>,
    status: Status,
}

/// One published solution.
#[derive(Debug, Clone, PartialEq)]
pub struct AraIterate {
    pub weight: f64,
    pub path: Vec<GridCoord>,
    pub cost: f64,
    /// Cumulative expansions when this solution was published.
    pub expanded: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AraRun {
    pub iterates: Vec<AraIterate>,
    pub outcome: SearchOutcome,
}

/// The final solution of the full weight schedule.
pub fn ara_star_solve(
    grid: &Grid,
    params: &SolverParams,
    probe: &mut dyn SearchProbe,
) -> Result<SearchOutcome, SearchError> {
    ara_star_iterates(grid, params, probe).map(|run| run.outcome)
}

/// Every published solution of the weight schedule, first to last.
pub fn ara_star_iterates(
    grid: &Grid,
    params: &SolverParams,
    probe: &mut dyn SearchProbe,
) -> Result<AraRun, SearchError> {
    params.validate()?;
    let mut ins = Instrument::new(probe);
    let mut search = Ara {
        grid,
        goal: grid.goal(),
        tie: params.tie_break,
        weight: params.ara_initial_weight,
        nodes: ValueMap::new(),
        open: OpenList::new(),
    };
    let start = grid.start();
    search.nodes.insert(
        &mut ins,
        start,
        Node {
            g: 0.0,
            parent: None,
            status: Status::Open,
        },
    );
    search.open.push(&mut ins, search.key(start, 0.0), start);

    let mut iterates = Vec::new();
    loop {
        search.improve_path(&mut ins);
        let g_goal = search.g(search.goal);
        if g_goal.is_infinite() {
            return Err(SearchError::NoPath);
        }
        let path = reconstruct(grid, &search.nodes, search.goal, |n| n.parent)?;
        let cost = path_cost(&path)?;
        iterates.push(AraIterate {
            weight: search.weight,
            path,
            cost,
            expanded: ins.expanded(),
        });
        if search.weight <= 1.0 {
            break;
        }
        search.weight = (search.weight - params.ara_weight_decrement).max(1.0);
        search.reopen(&mut ins);
    }
    let last = iterates.last().expect("at least one pass").path.clone();
    let outcome = finish(last, &ins)?;
    Ok(AraRun { iterates, outcome })
}

struct Ara<'g> {
    grid: &'g Grid,
    goal: GridCoord,
    tie: TieBreak,
    weight: f64,
    nodes: ValueMap<Node>,
    open: OpenList,
}

impl Ara<'_> {
    fn g(&self, c: GridCoord) -> f64 {
        self.nodes.get(c).map_or(f64::INFINITY, |n| n.g)
    }

    fn key(&self, c: GridCoord, g: f64) -> Key {
        Key(g + self.weight * euclidean_heuristic(c, self.goal), self.tie.secondary(g))
    }

    fn improve_path(&mut self, ins: &mut Instrument) {
        loop {
            let nodes = &self.nodes;
            let (goal, weight, tie) = (self.goal, self.weight, self.tie);
            let valid = |e: &super::structures::QueueEntry| {
                nodes.get(e.coord).is_some_and(|n| {
                    n.status == Status::Open
                        && e.key == Key(n.g + weight * euclidean_heuristic(e.coord, goal), tie.secondary(n.g))
                })
            };
            let Some(top) = self.open.peek_valid(ins, valid) else {
                return;
            };
            if self.g(self.goal) <= top.key.0 {
                return;
            }
            self.open.pop_valid(ins, |_| true);
            let u = top.coord;
            let g_u = {
                let n = self.nodes.get_mut(u).expect("queued cell has a node");
                n.status = Status::Closed;
                n.g
            };
            ins.expand(u);

            let mut improved = Vec::new();
            let nodes = &mut self.nodes;
            self.grid.for_each_neighbor(u, |v, cost| {
                let g_v = g_u + cost;
                let node = nodes.entry_or_insert_with(ins, v, || Node {
                    g: f64::INFINITY,
                    parent: None,
                    status: Status::Idle,
                });
                if g_v < node.g {
                    node.g = g_v;
                    node.parent = Some(u);
                    node.status = match node.status {
                        Status::Closed | Status::Inconsistent => Status::Inconsistent,
                        Status::Open | Status::Idle => {
                            improved.push((v, g_v));
                            Status::Open
                        }
                    };
                }
            });
            for (v, g_v) in improved {
                let key = self.key(v, g_v);
                self.open.push(ins, key, v);
            }
        }
    }

    /// Moves inconsistent cells back to the open list, re-keys it under the
    /// current weight and empties the closed set.
    fn reopen(&mut self, ins: &mut Instrument) {
        self.open.clear(ins);
        let mut pending = Vec::new();
        for (c, n) in self.nodes.sorted_entries() {
            match n.status {
                Status::Open | Status::Inconsistent => pending.push((c, n.g)),
                Status::Closed | Status::Idle => {}
            }
        }
        for (c, g) in pending {
            self.nodes.get_mut(c).expect("listed cell").status = Status::Open;
            let key = self.key(c, g);
            self.open.push(ins, key, c);
        }
        let closed: Vec<GridCoord> = self
            .nodes
            .sorted_entries()
            .into_iter()
            .filter(|(_, n)| n.status == Status::Closed)
            .map(|(c, _)| c)
            .collect();
        for c in closed {
            self.nodes.get_mut(c).expect("listed cell").status = Status::Idle;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SQRT_2;
    use crate::search::{astar_oracle, NoopProbe};

    fn c(x: u32, y: u32) -> GridCoord {
        GridCoord::new(x, y)
    }

    #[test]
    fn default_schedule_has_four_improvements() {
        let g = Grid::empty(6, 6, c(0, 0), c(5, 3)).unwrap();
        let run = ara_star_iterates(&g, &SolverParams::default(), &mut NoopProbe).unwrap();
        let weights: Vec<f64> = run.iterates.iter().map(|i| i.weight).collect();
        assert_eq!(weights, vec![2.5, 2.0, 1.5, 1.0]);
    }

    #[test]
    fn empty_grid_is_optimal() {
        let g = Grid::empty(5, 5, c(0, 0), c(4, 4)).unwrap();
        let run = ara_star_iterates(&g, &SolverParams::default(), &mut NoopProbe).unwrap();
        assert!((run.iterates[0].cost - 4.0 * SQRT_2).abs() < 1e-9);
        assert!((run.outcome.path_cost - 4.0 * SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn bounded_then_optimal_around_a_wall() {
        let wall = (2..12).map(|y| c(6, y));
        let g = Grid::new(14, 14, wall, c(1, 7), c(12, 8)).unwrap();
        let opt = astar_oracle(&g, &SolverParams::default(), &mut NoopProbe).unwrap().path_cost;
        let run = ara_star_iterates(&g, &SolverParams::default(), &mut NoopProbe).unwrap();
        for it in &run.iterates {
            assert!(it.cost <= it.weight * opt + 1e-9);
        }
        assert!((run.outcome.path_cost - opt).abs() < 1e-9);
    }

    #[test]
    fn unit_weight_is_a_single_pass() {
        let g = Grid::empty(6, 6, c(0, 0), c(5, 2)).unwrap();
        let params = SolverParams {
            ara_initial_weight: 1.0,
            ..Default::default()
        };
        let run = ara_star_iterates(&g, &params, &mut NoopProbe).unwrap();
        assert_eq!(run.iterates.len(), 1);
    }

    #[test]
    fn no_path() {
        let wall = (0..6).map(|y| c(3, y));
        let g = Grid::new(6, 6, wall, c(0, 0), c(5, 5)).unwrap();
        assert_eq!(
            ara_star_solve(&g, &SolverParams::default(), &mut NoopProbe),
            Err(SearchError::NoPath)
        );
    }
}
