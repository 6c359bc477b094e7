//! Real-time agents that interleave bounded planning with movement.
//!
//! Both solvers share the same planning episode: an A* lookahead from the
//! agent's cell that expands at most `lookahead` cells and stops early when the
//! goal reaches the top of the open list. The cell left on top afterwards is
//! the best frontier cell `s̄`. They differ in how they learn and move:
//!
//! * LRTA* replaces the heuristic of every expanded cell by its
//!   dynamic-programming backup `h(s) = min_{s'} c(s, s') + h(s')`, computed
//!   Dijkstra-style from the frontier inward, then moves one step to the
//!   neighbor minimising `c + h`.
//! * RTAA* sets `h(s) = g(s̄) + h(s̄) - g(s)` for every expanded cell in one
//!   pass, then walks the lookahead tree all the way to `s̄`.
//!
//! The agent sees the whole grid. Each call is a single trial from start to
//! goal; learned values are discarded afterwards.

use std::collections::HashMap;
use std::mem::size_of;

use crate::generators::is_solvable;
use crate::grid::{euclidean_heuristic, Grid, GridCoord};

use super::structures::{Instrument, Key, OpenList, ValueMap};
use super::{finish, SearchError, SearchOutcome, SearchProbe, SolverParams};

/// Snapshot handed to an episode observer after the heuristic update.
#[derive(Debug, Clone)]
pub struct EpisodeTrace {
    /// Agent cell the episode planned from.
    pub agent: GridCoord,
    /// Cells expanded by the lookahead, in expansion order.
    pub expanded: Vec<GridCoord>,
    /// Heuristic after the update, for every expanded cell and its neighbors.
    pub h: HashMap<GridCoord, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Rule {
    Lrta,
    Rtaa,
}

/// LRTA* with an A* lookahead of `params.lookahead` expansions.
pub fn lrta_star_solve(
    grid: &Grid,
    params: &SolverParams,
    probe: &mut dyn SearchProbe,
) -> Result<SearchOutcome, SearchError> {
    run(grid, params, probe, Rule::Lrta, None)
}

/// RTAA* with an A* lookahead of `params.lookahead` expansions.
pub fn rtaa_star_solve(
    grid: &Grid,
    params: &SolverParams,
    probe: &mut dyn SearchProbe,
) -> Result<SearchOutcome, SearchError> {
    run(grid, params, probe, Rule::Rtaa, None)
}

impl EpisodeTrace {
    pub fn h(&self, c: GridCoord) -> f64 {
        self.h[&c]
    }
}

/// Like [`lrta_star_solve`], calling `observe` after every episode's update.
pub fn lrta_star_traced(
    grid: &Grid,
    params: &SolverParams,
    probe: &mut dyn SearchProbe,
    observe: &mut dyn FnMut(&EpisodeTrace),
) -> Result<SearchOutcome, SearchError> {
    run(grid, params, probe, Rule::Lrta, Some(observe))
}

/// Like [`rtaa_star_solve`], calling `observe` after every episode's update.
pub fn rtaa_star_traced(
    grid: &Grid,
    params: &SolverParams,
    probe: &mut dyn SearchProbe,
    observe: &mut dyn FnMut(&EpisodeTrace),
) -> Result<SearchOutcome, SearchError> {
    run(grid, params, probe, Rule::Rtaa, Some(observe))
}

/// Heuristic learned during a trial; unset cells read as the Euclidean
/// distance to the goal.
struct Learned {
    table: ValueMap<f64>,
    goal: GridCoord,
}

impl Learned {
    #[inline]
    fn h(&self, c: GridCoord) -> f64 {
        match self.table.get(c) {
            Some(h) => *h,
            None => euclidean_heuristic(c, self.goal),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Node {
    g: f64,
    parent: Option<GridCoord>,
    closed: bool,
}

struct Episode {
    nodes: ValueMap<Node>,
    open: OpenList,
    expanded: Vec<GridCoord>,
    best: Option<GridCoord>,
}

impl Episode {
    fn is_closed(&self, c: GridCoord) -> bool {
        self.nodes.get(c).is_some_and(|n| n.closed)
    }

    fn release(mut self, ins: &mut Instrument) {
        self.nodes.clear(ins);
        self.open.clear(ins);
        ins.free(self.expanded.len() * size_of::<GridCoord>());
    }
}

fn lookahead(
    grid: &Grid,
    agent: GridCoord,
    learned: &Learned,
    params: &SolverParams,
    ins: &mut Instrument,
) -> Episode {
    let goal = learned.goal;
    let tie = params.tie_break;
    let mut ep = Episode {
        nodes: ValueMap::new(),
        open: OpenList::new(),
        expanded: Vec::new(),
        best: None,
    };
    ep.nodes.insert(
        ins,
        agent,
        Node {
            g: 0.0,
            parent: None,
            closed: false,
        },
    );
    ep.open.push(ins, Key(learned.h(agent), tie.secondary(0.0)), agent);

    loop {
        let nodes = &ep.nodes;
        let Some(top) = ep.open.peek_valid(ins, |e| nodes.get(e.coord).is_some_and(|n| !n.closed)) else {
            break;
        };
        if top.coord == goal || ep.expanded.len() >= params.lookahead {
            ep.best = Some(top.coord);
            break;
        }
        ep.open.pop_valid(ins, |_| true);
        let u = top.coord;
        let g_u = {
            let n = ep.nodes.get_mut(u).expect("queued cell has a node");
            n.closed = true;
            n.g
        };
        ins.expand(u);
        ins.alloc(size_of::<GridCoord>());
        ep.expanded.push(u);

        let (nodes, open) = (&mut ep.nodes, &mut ep.open);
        grid.for_each_neighbor(u, |v, cost| {
            let g_v = g_u + cost;
            let node = nodes.entry_or_insert_with(ins, v, || Node {
                g: f64::INFINITY,
                parent: None,
                closed: false,
            });
            if !node.closed && g_v < node.g {
                node.g = g_v;
                node.parent = Some(u);
                open.push(ins, Key(g_v + learned.h(v), tie.secondary(g_v)), v);
            }
        });
    }
    ep
}

/// Dynamic-programming backup over the expanded cells, seeded from the
/// frontier and relaxed in increasing order of value.
fn lrta_update(grid: &Grid, ep: &Episode, learned: &mut Learned, ins: &mut Instrument) {
    let mut backup: ValueMap<f64> = ValueMap::new();
    let mut queue = OpenList::new();
    for (c, node) in ep.nodes.sorted_entries() {
        if !node.closed {
            queue.push(ins, Key(learned.h(c), 0.0), c);
        }
    }
    let value = |c: GridCoord, backup: &ValueMap<f64>, learned: &Learned| -> f64 {
        if ep.is_closed(c) {
            backup.get(c).copied().unwrap_or(f64::INFINITY)
        } else {
            learned.h(c)
        }
    };
    while let Some(entry) = queue.pop_valid(ins, |e| e.key.0 == value(e.coord, &backup, learned)) {
        let u = entry.coord;
        let h_u = entry.key.0;
        grid.for_each_neighbor(u, |s, cost| {
            if ep.is_closed(s) && cost + h_u < value(s, &backup, learned) {
                backup.insert(ins, s, cost + h_u);
                queue.push(ins, Key(cost + h_u, 0.0), s);
            }
        });
    }
    for &s in &ep.expanded {
        let h = backup.get(s).copied().unwrap_or(f64::INFINITY);
        learned.table.insert(ins, s, h);
    }
    queue.clear(ins);
    backup.clear(ins);
}

fn rtaa_update(ep: &Episode, best: GridCoord, learned: &mut Learned, ins: &mut Instrument) {
    let g_best = ep.nodes.get(best).expect("best frontier cell was generated").g;
    let f_best = g_best + learned.h(best);
    for &s in &ep.expanded {
        let g_s = ep.nodes.get(s).expect("expanded cell has a node").g;
        learned.table.insert(ins, s, f_best - g_s);
    }
}

fn greedy_step(grid: &Grid, from: GridCoord, learned: &Learned) -> Option<GridCoord> {
    let mut best: Option<(f64, GridCoord)> = None;
    grid.for_each_neighbor(from, |n, cost| {
        let f = cost + learned.h(n);
        if best.is_none_or(|(b, _)| f < b) {
            best = Some((f, n));
        }
    });
    best.map(|(_, n)| n)
}

fn tree_path(ep: &Episode, to: GridCoord) -> Vec<GridCoord> {
    let mut cells = vec![to];
    let mut cur = to;
    while let Some(p) = ep.nodes.get(cur).and_then(|n| n.parent) {
        cells.push(p);
        cur = p;
    }
    cells.reverse();
    cells
}

fn trace(grid: &Grid, agent: GridCoord, ep: &Episode, learned: &Learned) -> EpisodeTrace {
    let mut h = HashMap::new();
    for &s in &ep.expanded {
        h.insert(s, learned.h(s));
        grid.for_each_neighbor(s, |n, _| {
            h.insert(n, learned.h(n));
        });
    }
    EpisodeTrace {
        agent,
        expanded: ep.expanded.clone(),
        h,
    }
}

fn run(
    grid: &Grid,
    params: &SolverParams,
    probe: &mut dyn SearchProbe,
    rule: Rule,
    mut observe: Option<&mut dyn FnMut(&EpisodeTrace)>,
) -> Result<SearchOutcome, SearchError> {
    // An agent confined to a component without the goal would wander forever
    // while its learned values grow, so reachability is settled up front.
    if !is_solvable(grid) {
        return Err(SearchError::NoPath);
    }
    let mut ins = Instrument::new(probe);
    let goal = grid.goal();
    let mut learned = Learned {
        table: ValueMap::new(),
        goal,
    };
    let mut agent = grid.start();
    let mut path = vec![agent];
    let move_limit = 64 * grid.cell_count() + 64;

    loop {
        let ep = lookahead(grid, agent, &learned, params, &mut ins);
        let Some(best) = ep.best else {
            ep.release(&mut ins);
            return Err(SearchError::NoPath);
        };
        if agent == goal {
            ep.release(&mut ins);
            break;
        }
        match rule {
            Rule::Lrta => {
                lrta_update(grid, &ep, &mut learned, &mut ins);
                let next = greedy_step(grid, agent, &learned)
                    .ok_or_else(|| SearchError::Internal(format!("agent stuck at {agent}")))?;
                path.push(next);
                agent = next;
            }
            Rule::Rtaa => {
                rtaa_update(&ep, best, &mut learned, &mut ins);
                path.extend(tree_path(&ep, best).into_iter().skip(1));
                agent = best;
            }
        }
        if let Some(observe) = observe.as_deref_mut() {
            observe(&trace(grid, path[path.len() - 1], &ep, &learned));
        }
        ep.release(&mut ins);
        if agent == goal {
            break;
        }
        if path.len() > move_limit {
            return Err(SearchError::Internal(format!(
                "no arrival after {move_limit} moves"
            )));
        }
    }
    finish(path, &ins)
}
