//! Stentz's original D*.
//!
//! A backward, uninformed search from the goal. Every cell carries a tag
//! (`New`, `Open`, `Closed`), a path-cost estimate `h` to the goal, a key `k`
//! (the smallest `h` it has had since it was last queued) and a back-pointer
//! toward the goal. A queued cell with `k < h` is a RAISE state and
//! propagates cost increases; one with `k == h` is a LOWER state. All eight
//! geometric neighbors are arcs; arcs into or out of blocked cells, and
//! corner-cutting diagonals when those are disallowed, cost `+inf`.
//!
//! The initial plan runs until the agent's cell is closed. After
//! [`DStar::set_blocked`] the affected arcs are re-queued and states are
//! processed until the minimum key reaches `h(agent)`.

use crate::grid::{Grid, GridCoord, DIRECTIONS};

use super::structures::{Instrument, Key, OpenList, ValueMap};
use super::{finish, step_limit, SearchError, SearchOutcome, SearchProbe, SolverParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tag {
    New,
    Open,
    Closed,
}

#[derive(Debug, Clone, Copy)]
struct State {
    tag: Tag,
    h: f64,
    k: f64,
    back: Option<GridCoord>,
}

const NEW_STATE: State = State {
    tag: Tag::New,
    h: f64::INFINITY,
    k: f64::INFINITY,
    back: None,
};

pub struct DStar<'p> {
    grid: Grid,
    states: ValueMap<State>,
    open: OpenList,
    ins: Instrument<'p>,
}

pub fn dstar_solve(
    grid: &Grid,
    _params: &SolverParams,
    probe: &mut dyn SearchProbe,
) -> Result<SearchOutcome, SearchError> {
    let mut planner = DStar::new(grid.clone(), probe);
    planner.initial_plan();
    planner.outcome()
}

impl<'p> DStar<'p> {
    pub fn new(grid: Grid, probe: &'p mut dyn SearchProbe) -> Self {
        let mut planner = DStar {
            grid,
            states: ValueMap::new(),
            open: OpenList::new(),
            ins: Instrument::new(probe),
        };
        let goal = planner.grid.goal();
        planner.insert(goal, 0.0);
        planner
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn tag(&self, c: GridCoord) -> Tag {
        self.state(c).tag
    }

    pub fn h(&self, c: GridCoord) -> f64 {
        self.state(c).h
    }

    pub fn expanded(&self) -> u64 {
        self.ins.expanded()
    }

    fn state(&self, c: GridCoord) -> State {
        self.states.get(c).copied().unwrap_or(NEW_STATE)
    }

    fn arc(&self, a: GridCoord, b: GridCoord) -> f64 {
        self.grid.edge_cost(a, b).unwrap_or(f64::INFINITY)
    }

    fn neighbors(&self, c: GridCoord) -> Vec<GridCoord> {
        DIRECTIONS
            .iter()
            .filter_map(|&(dx, dy)| c.offset(dx, dy))
            .filter(|n| self.grid.in_bounds(*n))
            .collect()
    }

    fn insert(&mut self, c: GridCoord, h_new: f64) {
        let s = self.states.entry_or_insert_with(&mut self.ins, c, || NEW_STATE);
        s.k = match s.tag {
            Tag::New => h_new,
            Tag::Open => s.k.min(h_new),
            Tag::Closed => s.h.min(h_new),
        };
        s.h = h_new;
        s.tag = Tag::Open;
        let k = s.k;
        self.open.push(&mut self.ins, Key(k, 0.0), c);
    }

    fn min_state(&mut self) -> Option<(f64, GridCoord)> {
        let states = &self.states;
        self.open
            .peek_valid(&mut self.ins, |e| {
                states.get(e.coord).is_some_and(|s| s.tag == Tag::Open && s.k == e.key.0)
            })
            .map(|e| (e.key.0, e.coord))
    }

    /// Smallest key on the open list, or `None` when it is empty.
    pub fn k_min(&mut self) -> Option<f64> {
        self.min_state().map(|(k, _)| k)
    }

    /// One PROCESS-STATE step; returns the new minimum key.
    pub fn process_state(&mut self) -> Option<f64> {
        let (k_old, x) = self.min_state()?;
        self.open.pop_valid(&mut self.ins, |_| true);
        self.states.get_mut(x).expect("queued state exists").tag = Tag::Closed;
        self.ins.expand(x);

        let neighbors = self.neighbors(x);
        let h_x = self.state(x).h;
        if k_old < h_x {
            // RAISE: try to lower h(x) through neighbors that are already optimal.
            for &y in &neighbors {
                let sy = self.state(y);
                let c = self.arc(y, x);
                if sy.tag != Tag::New && sy.h <= k_old && self.state(x).h > sy.h + c {
                    let sx = self.states.get_mut(x).expect("x exists");
                    sx.back = Some(y);
                    sx.h = sy.h + c;
                }
            }
        }
        let h_x = self.state(x).h;
        if k_old == h_x {
            // LOWER: propagate the (now optimal) cost to neighbors.
            for &y in &neighbors {
                let sy = self.state(y);
                let c = self.arc(x, y);
                let through_x = h_x + c;
                if sy.tag == Tag::New
                    || (sy.back == Some(x) && sy.h != through_x)
                    || (sy.back != Some(x) && sy.h > through_x)
                {
                    self.set_back(y, x);
                    self.insert(y, through_x);
                }
            }
        } else {
            for &y in &neighbors {
                let sy = self.state(y);
                let c = self.arc(x, y);
                let through_x = h_x + c;
                if sy.tag == Tag::New || (sy.back == Some(x) && sy.h != through_x) {
                    self.set_back(y, x);
                    self.insert(y, through_x);
                } else if sy.back != Some(x) && sy.h > through_x {
                    self.insert(x, h_x);
                } else if sy.back != Some(x)
                    && h_x > sy.h + self.arc(y, x)
                    && sy.tag == Tag::Closed
                    && sy.h > k_old
                {
                    self.insert(y, sy.h);
                }
            }
        }
        self.k_min()
    }

    fn set_back(&mut self, y: GridCoord, x: GridCoord) {
        self.states.entry_or_insert_with(&mut self.ins, y, || NEW_STATE).back = Some(x);
    }

    /// Processes states until the agent's cell is closed or the open list
    /// empties.
    pub fn initial_plan(&mut self) {
        let agent = self.grid.start();
        while self.tag(agent) != Tag::Closed {
            if self.process_state().is_none() && self.tag(agent) != Tag::Closed {
                break;
            }
        }
    }

    /// Blocks or frees `c`, re-queues closed endpoints of every changed arc
    /// and processes states until `k_min >= h(agent)`.
    pub fn set_blocked(&mut self, c: GridCoord, blocked: bool) -> Result<(), SearchError> {
        self.grid
            .set_blocked(c, blocked)
            .map_err(|e| SearchError::InvalidParams(e.to_string()))?;
        let mut touched = vec![c];
        touched.extend(self.neighbors(c));
        for t in touched {
            if self.tag(t) == Tag::Closed {
                let h = self.h(t);
                self.insert(t, h);
            }
        }
        self.replan();
        Ok(())
    }

    /// Moves the agent to `to` (a traversable cell) and replans if needed.
    pub fn move_agent(&mut self, to: GridCoord) -> Result<(), SearchError> {
        self.grid
            .set_start(to)
            .map_err(|e| SearchError::InvalidParams(e.to_string()))?;
        if self.tag(to) == Tag::New {
            self.initial_plan();
        } else {
            self.replan();
        }
        Ok(())
    }

    fn replan(&mut self) {
        let agent = self.grid.start();
        while let Some(k) = self.k_min() {
            if k >= self.h(agent) {
                break;
            }
            self.process_state();
        }
    }

    /// Back-pointer chain from the agent to the goal.
    pub fn path(&self) -> Result<Vec<GridCoord>, SearchError> {
        let (agent, goal) = (self.grid.start(), self.grid.goal());
        if self.h(agent).is_infinite() {
            return Err(SearchError::NoPath);
        }
        let mut path = vec![agent];
        let mut cur = agent;
        while cur != goal {
            let next = self
                .state(cur)
                .back
                .ok_or_else(|| SearchError::Internal(format!("no back-pointer at {cur}")))?;
            if self.grid.edge_cost(cur, next).is_none() {
                return Err(SearchError::Internal(format!("back-pointer {cur} -> {next} is not a legal move")));
            }
            path.push(next);
            cur = next;
            if path.len() > step_limit(&self.grid) {
                return Err(SearchError::Internal("back-pointers cycle".into()));
            }
        }
        Ok(path)
    }

    pub fn outcome(&self) -> Result<SearchOutcome, SearchError> {
        finish(self.path()?, &self.ins)
    }
}
