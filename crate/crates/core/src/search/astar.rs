use crate::grid::{euclidean_heuristic, Grid, GridCoord};

use super::structures::{Instrument, Key, OpenList, ValueMap};
use super::{finish, step_limit, SearchError, SearchOutcome, SearchProbe, SolverParams};

#[derive(Debug, Clone, Copy)]
struct Node {
    g: f64,
    parent: Option<GridCoord>,
    closed: bool,
}

/// Exact A* with the Euclidean heuristic. Since the heuristic is consistent
/// the first expansion of a cell is final, so stale heap entries are exactly
/// those whose cell is already closed.
pub fn astar_oracle(
    grid: &Grid,
    params: &SolverParams,
    probe: &mut dyn SearchProbe,
) -> Result<SearchOutcome, SearchError> {
    let mut ins = Instrument::new(probe);
    let (start, goal) = (grid.start(), grid.goal());
    let tie = params.tie_break;
    let mut nodes: ValueMap<Node> = ValueMap::new();
    let mut open = OpenList::new();

    nodes.insert(
        &mut ins,
        start,
        Node {
            g: 0.0,
            parent: None,
            closed: false,
        },
    );
    open.push(&mut ins, Key(euclidean_heuristic(start, goal), tie.secondary(0.0)), start);

    while let Some(entry) = open.pop_valid(&mut ins, |e| nodes.get(e.coord).is_some_and(|n| !n.closed)) {
        let u = entry.coord;
        let g_u = {
            let node = nodes.get_mut(u).expect("queued cell has a node");
            node.closed = true;
            node.g
        };
        ins.expand(u);
        if u == goal {
            let path = reconstruct(grid, &nodes, goal, |n| n.parent)?;
            return finish(path, &ins);
        }
        grid.for_each_neighbor(u, |v, cost| {
            let g_v = g_u + cost;
            let node = nodes.entry_or_insert_with(&mut ins, v, || Node {
                g: f64::INFINITY,
                parent: None,
                closed: false,
            });
            if !node.closed && g_v < node.g {
                node.g = g_v;
                node.parent = Some(u);
                open.push(&mut ins, Key(g_v + euclidean_heuristic(v, goal), tie.secondary(g_v)), v);
            }
        });
    }
    Err(SearchError::NoPath)
}

/// Follows parent links from `goal` back to the root and returns the path
/// root-first.
pub(crate) fn reconstruct<N>(
    grid: &Grid,
    nodes: &ValueMap<N>,
    goal: GridCoord,
    parent: impl Fn(&N) -> Option<GridCoord>,
) -> Result<Vec<GridCoord>, SearchError> {
    let mut path = vec![goal];
    let mut cur = goal;
    while let Some(p) = nodes.get(cur).and_then(&parent) {
        path.push(p);
        cur = p;
        if path.len() > step_limit(grid) {
            return Err(SearchError::Internal("parent links form a cycle".into()));
        }
    }
    path.reverse();
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SQRT_2;
    use crate::search::{NoopProbe, TieBreak};

    fn c(x: u32, y: u32) -> GridCoord {
        GridCoord::new(x, y)
    }

    #[test]
    fn diagonal_on_empty_grid() {
        let g = Grid::empty(3, 3, c(0, 0), c(2, 2)).unwrap();
        let out = astar_oracle(&g, &SolverParams::default(), &mut NoopProbe).unwrap();
        assert!((out.path_cost - 2.0 * SQRT_2).abs() < 1e-12);
        assert_eq!(out.path, vec![c(0, 0), c(1, 1), c(2, 2)]);
    }

    #[test]
    fn corridor() {
        // 1-wide corridor of length 7 along row 1.
        let blocked = (0..7).flat_map(|x| [c(x, 0), c(x, 2)]);
        let g = Grid::new(7, 3, blocked, c(0, 1), c(6, 1)).unwrap();
        let out = astar_oracle(&g, &SolverParams::default(), &mut NoopProbe).unwrap();
        assert_eq!(out.path_cost, 6.0);
    }

    #[test]
    fn start_equals_goal() {
        let g = Grid::empty(4, 4, c(2, 2), c(2, 2)).unwrap();
        let out = astar_oracle(&g, &SolverParams::default(), &mut NoopProbe).unwrap();
        assert_eq!(out.path, vec![c(2, 2)]);
        assert_eq!(out.path_cost, 0.0);
        assert!(out.peak_memory_bytes > 0);
    }

    #[test]
    fn enclosed_goal() {
        let ring = [c(3, 3), c(4, 3), c(5, 3), c(3, 4), c(5, 4), c(3, 5), c(4, 5), c(5, 5)];
        let g = Grid::new(8, 8, ring, c(0, 0), c(4, 4)).unwrap();
        assert_eq!(
            astar_oracle(&g, &SolverParams::default(), &mut NoopProbe),
            Err(SearchError::NoPath)
        );
    }

    #[test]
    fn tie_break_changes_expansions_not_cost() {
        let g = Grid::empty(12, 12, c(0, 5), c(11, 5)).unwrap();
        let high = astar_oracle(&g, &SolverParams::default(), &mut NoopProbe).unwrap();
        let low = astar_oracle(
            &g,
            &SolverParams {
                tie_break: TieBreak::LowG,
                ..Default::default()
            },
            &mut NoopProbe,
        )
        .unwrap();
        assert_eq!(high.path_cost, low.path_cost);
        assert!(high.expanded <= low.expanded);
    }
}
