//! Lifelong Planning A*, searching forward from the start.
//!
//! Each cell carries `g` and the one-step lookahead
//! `rhs(s) = min_{s'} g(s') + c(s', s)` (zero at the start). A cell is locally
//! inconsistent when `g != rhs` and is then queued under
//! `[min(g, rhs) + h(s, goal); min(g, rhs)]`. The first call to
//! [`LpaStar::compute_shortest_path`] behaves like A*; after cells are blocked
//! or freed through [`LpaStar::set_blocked`] only the affected region is
//! repaired.

use crate::grid::{euclidean_heuristic, Grid, GridCoord};

use super::structures::{Instrument, Key, OpenList, ValueMap};
use super::{finish, step_limit, SearchError, SearchOutcome, SearchProbe, SolverParams};

#[derive(Debug, Clone, Copy)]
struct Values {
    g: f64,
    rhs: f64,
}

const UNSEEN: Values = Values {
    g: f64::INFINITY,
    rhs: f64::INFINITY,
};

pub struct LpaStar<'p> {
    grid: Grid,
    values: ValueMap<Values>,
    queued: ValueMap<Key>,
    open: OpenList,
    ins: Instrument<'p>,
}

pub fn lpa_star_solve(
    grid: &Grid,
    _params: &SolverParams,
    probe: &mut dyn SearchProbe,
) -> Result<SearchOutcome, SearchError> {
    let mut lpa = LpaStar::new(grid.clone(), probe);
    lpa.compute_shortest_path();
    let path = lpa.path()?;
    finish(path, &lpa.ins)
}

impl<'p> LpaStar<'p> {
    pub fn new(grid: Grid, probe: &'p mut dyn SearchProbe) -> Self {
        let mut lpa = LpaStar {
            grid,
            values: ValueMap::new(),
            queued: ValueMap::new(),
            open: OpenList::new(),
            ins: Instrument::new(probe),
        };
        let start = lpa.grid.start();
        lpa.values.insert(&mut lpa.ins, start, Values { g: f64::INFINITY, rhs: 0.0 });
        let key = lpa.key(start);
        lpa.enqueue(start, key);
        lpa
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn g(&self, c: GridCoord) -> f64 {
        self.values.get(c).map_or(f64::INFINITY, |v| v.g)
    }

    pub fn rhs(&self, c: GridCoord) -> f64 {
        self.values.get(c).map_or(f64::INFINITY, |v| v.rhs)
    }

    pub fn expanded(&self) -> u64 {
        self.ins.expanded()
    }

    pub fn peak_memory_bytes(&self) -> usize {
        self.ins.peak_bytes()
    }

    fn key(&self, c: GridCoord) -> Key {
        let v = self.values.get(c).copied().unwrap_or(UNSEEN);
        let m = v.g.min(v.rhs);
        Key(m + euclidean_heuristic(c, self.grid.goal()), m)
    }

    fn enqueue(&mut self, c: GridCoord, key: Key) {
        self.queued.insert(&mut self.ins, c, key);
        self.open.push(&mut self.ins, key, c);
    }

    fn top(&mut self) -> Option<(Key, GridCoord)> {
        let queued = &self.queued;
        self.open
            .peek_valid(&mut self.ins, |e| queued.get(e.coord) == Some(&e.key))
            .map(|e| (e.key, e.coord))
    }

    /// Recomputes `rhs(u)` and requeues `u` iff it is locally inconsistent.
    pub fn update_vertex(&mut self, u: GridCoord) {
        if u != self.grid.start() {
            let mut rhs = f64::INFINITY;
            let values = &self.values;
            self.grid.for_each_neighbor(u, |p, cost| {
                if let Some(v) = values.get(p) {
                    rhs = rhs.min(v.g + cost);
                }
            });
            if rhs.is_finite() || self.values.contains(u) {
                self.values.entry_or_insert_with(&mut self.ins, u, || UNSEEN).rhs = rhs;
            }
        }
        self.queued.remove(&mut self.ins, u);
        let v = self.values.get(u).copied().unwrap_or(UNSEEN);
        if v.g != v.rhs {
            let key = self.key(u);
            self.enqueue(u, key);
        }
    }

    pub fn compute_shortest_path(&mut self) {
        let goal = self.grid.goal();
        while let Some((top_key, u)) = self.top() {
            let goal_v = self.values.get(goal).copied().unwrap_or(UNSEEN);
            if top_key >= self.key(goal) && goal_v.g == goal_v.rhs {
                break;
            }
            self.open.pop_valid(&mut self.ins, |_| true);
            self.queued.remove(&mut self.ins, u);
            self.ins.expand(u);

            let v = self.values.get(u).copied().unwrap_or(UNSEEN);
            let mut successors = Vec::with_capacity(8);
            self.grid.for_each_neighbor(u, |s, _| successors.push(s));
            if v.g > v.rhs {
                self.values.get_mut(u).expect("queued cell has values").g = v.rhs;
            } else {
                self.values.entry_or_insert_with(&mut self.ins, u, || UNSEEN).g = f64::INFINITY;
                self.update_vertex(u);
            }
            for s in successors {
                self.update_vertex(s);
            }
        }
    }

    /// Blocks or frees `c` and refreshes every cell whose incoming edges may
    /// have changed: `c` and its 8-neighborhood (diagonals squeezing past
    /// `c` are affected as well when corner cutting is off).
    pub fn set_blocked(&mut self, c: GridCoord, blocked: bool) -> Result<(), SearchError> {
        self.grid
            .set_blocked(c, blocked)
            .map_err(|e| SearchError::InvalidParams(e.to_string()))?;
        let mut affected = vec![c];
        affected.extend(self.grid.adjacent_cells(c));
        for a in affected {
            self.update_vertex(a);
        }
        Ok(())
    }

    /// Current shortest path, traced back from the goal through the
    /// predecessor minimising `g(p) + c(p, s)`.
    pub fn path(&self) -> Result<Vec<GridCoord>, SearchError> {
        let (start, goal) = (self.grid.start(), self.grid.goal());
        if self.g(goal).is_infinite() {
            return Err(SearchError::NoPath);
        }
        let mut path = vec![goal];
        let mut cur = goal;
        while cur != start {
            let mut best: Option<(f64, GridCoord)> = None;
            self.grid.for_each_neighbor(cur, |p, cost| {
                let f = self.g(p) + cost;
                if best.is_none_or(|(b, _)| f < b) {
                    best = Some((f, p));
                }
            });
            match best {
                Some((f, p)) if f.is_finite() => {
                    path.push(p);
                    cur = p;
                }
                _ => return Err(SearchError::Internal(format!("broken predecessor chain at {cur}"))),
            }
            if path.len() > step_limit(&self.grid) {
                return Err(SearchError::Internal("predecessor chain cycles".into()));
            }
        }
        path.reverse();
        Ok(path)
    }

    pub fn outcome(&self) -> Result<SearchOutcome, SearchError> {
        finish(self.path()?, &self.ins)
    }
}
