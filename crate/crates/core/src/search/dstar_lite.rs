//! D* Lite: the LPA* machinery run backwards from the goal, so `g(s)`
//! estimates the cost from `s` to the goal and the agent's cell plays the
//! role of the search target.
//!
//! Keys are `[min(g, rhs) + h(agent, s) + k_m; min(g, rhs)]`. When the agent
//! moves, `k_m` grows by the heuristic distance covered, which keeps queued
//! keys lower bounds without re-keying the queue.

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

pub struct DStarLite<'p> {
    grid: Grid,
    agent: GridCoord,
    last: GridCoord,
    km: f64,
    values: ValueMap<Values>,
    queued: ValueMap<Key>,
    open: OpenList,
    ins: Instrument<'p>,
}

pub fn dstar_lite_solve(
    grid: &Grid,
    _params: &SolverParams,
    probe: &mut dyn SearchProbe,
) -> Result<SearchOutcome, SearchError> {
    let mut planner = DStarLite::new(grid.clone(), probe);
    planner.compute_shortest_path();
    planner.outcome()
}

impl<'p> DStarLite<'p> {
    pub fn new(grid: Grid, probe: &'p mut dyn SearchProbe) -> Self {
        let agent = grid.start();
        let mut planner = DStarLite {
            grid,
            agent,
            last: agent,
            km: 0.0,
            values: ValueMap::new(),
            queued: ValueMap::new(),
            open: OpenList::new(),
            ins: Instrument::new(probe),
        };
        let goal = planner.grid.goal();
        planner.values.insert(&mut planner.ins, goal, Values { g: f64::INFINITY, rhs: 0.0 });
        let key = planner.key(goal);
        planner.enqueue(goal, key);
        planner
    }

    pub fn agent(&self) -> GridCoord {
        self.agent
    }

    pub fn km(&self) -> f64 {
        self.km
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

    fn key(&self, c: GridCoord) -> Key {
        let v = self.values.get(c).copied().unwrap_or(UNSEEN);
        let m = v.g.min(v.rhs);
        Key(m + euclidean_heuristic(self.agent, c) + self.km, m)
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

    pub fn update_vertex(&mut self, u: GridCoord) {
        if u != self.grid.goal() {
            let mut rhs = f64::INFINITY;
            let values = &self.values;
            self.grid.for_each_neighbor(u, |s, cost| {
                if let Some(v) = values.get(s) {
                    rhs = rhs.min(cost + v.g);
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
        while let Some((old_key, u)) = self.top() {
            let agent_v = self.values.get(self.agent).copied().unwrap_or(UNSEEN);
            if old_key >= self.key(self.agent) && agent_v.g == agent_v.rhs {
                break;
            }
            let new_key = self.key(u);
            if old_key < new_key {
                self.queued.remove(&mut self.ins, u);
                self.enqueue(u, new_key);
                continue;
            }
            self.open.pop_valid(&mut self.ins, |_| true);
            self.queued.remove(&mut self.ins, u);
            self.ins.expand(u);

            let v = self.values.get(u).copied().unwrap_or(UNSEEN);
            let mut predecessors = Vec::with_capacity(8);
            self.grid.for_each_neighbor(u, |p, _| predecessors.push(p));
            if v.g > v.rhs {
                self.values.get_mut(u).expect("queued cell has values").g = v.rhs;
            } else {
                self.values.entry_or_insert_with(&mut self.ins, u, || UNSEEN).g = f64::INFINITY;
                self.update_vertex(u);
            }
            for p in predecessors {
                self.update_vertex(p);
            }
        }
    }

    /// Relocates the agent; call [`compute_shortest_path`](Self::compute_shortest_path)
    /// afterwards to replan from the new cell.
    pub fn move_agent(&mut self, to: GridCoord) -> Result<(), SearchError> {
        self.grid
            .set_start(to)
            .map_err(|e| SearchError::InvalidParams(e.to_string()))?;
        self.agent = to;
        self.km += euclidean_heuristic(self.last, to);
        self.last = to;
        Ok(())
    }

    /// Blocks or frees `c` and refreshes the cells whose edges changed.
    pub fn set_blocked(&mut self, c: GridCoord, blocked: bool) -> Result<(), SearchError> {
        self.grid
            .set_blocked(c, blocked)
            .map_err(|e| SearchError::InvalidParams(e.to_string()))?;
        self.km += euclidean_heuristic(self.last, self.agent);
        self.last = self.agent;
        let mut affected = vec![c];
        affected.extend(self.grid.adjacent_cells(c));
        for a in affected {
            self.update_vertex(a);
        }
        Ok(())
    }

    /// Greedy descent on `c(s, s') + g(s')` from the agent to the goal.
    pub fn path(&self) -> Result<Vec<GridCoord>, SearchError> {
        let goal = self.grid.goal();
        if self.g(self.agent).is_infinite() && self.agent != goal {
            return Err(SearchError::NoPath);
        }
        let mut path = vec![self.agent];
        let mut cur = self.agent;
        while cur != goal {
            let mut best: Option<(f64, GridCoord)> = None;
            self.grid.for_each_neighbor(cur, |s, cost| {
                let f = cost + self.g(s);
                if best.is_none_or(|(b, _)| f < b) {
                    best = Some((f, s));
                }
            });
            match best {
                Some((f, s)) if f.is_finite() => {
                    path.push(s);
                    cur = s;
                }
                _ => return Err(SearchError::NoPath),
            }
            if path.len() > step_limit(&self.grid) {
                return Err(SearchError::Internal("successor chain cycles".into()));
            }
        }
        Ok(path)
    }

    pub fn outcome(&self) -> Result<SearchOutcome, SearchError> {
        finish(self.path()?, &self.ins)
    }
}
