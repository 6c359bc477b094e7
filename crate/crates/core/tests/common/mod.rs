#![allow(dead_code)]

use std::collections::HashMap;

use gridbench::generators::{generate_random_grid, RandomGridSpec};
use gridbench::{Grid, GridCoord};

pub const EPS: f64 = 1e-9;

pub fn c(x: u32, y: u32) -> GridCoord {
    GridCoord::new(x, y)
}

pub fn random_grid(n: u32, density: f64, sg: f64, seed: u64) -> Grid {
    generate_random_grid(&RandomGridSpec::new(n, density, sg, seed)).expect("generable spec")
}

/// Legal moves out of `from`, derived from the blocked bitmap only.
pub fn moves(grid: &Grid, from: GridCoord) -> Vec<(GridCoord, f64)> {
    let free = |x: i64, y: i64| {
        x >= 0
            && y >= 0
            && x < grid.width() as i64
            && y < grid.height() as i64
            && !grid.is_blocked(GridCoord::new(x as u32, y as u32))
    };
    let (x, y) = (from.x as i64, from.y as i64);
    let mut out = Vec::new();
    for dx in -1i64..=1 {
        for dy in -1i64..=1 {
            if (dx, dy) == (0, 0) || !free(x + dx, y + dy) {
                continue;
            }
            let diagonal = dx != 0 && dy != 0;
            if diagonal && !grid.allow_corner_cutting() && !(free(x + dx, y) && free(x, y + dy)) {
                continue;
            }
            let cost = if diagonal { 2f64.sqrt() } else { 1.0 };
            out.push((GridCoord::new((x + dx) as u32, (y + dy) as u32), cost));
        }
    }
    out
}

/// Single-source shortest distances by Bellman-Ford relaxation over every
/// traversable cell. Unreachable cells are absent.
pub fn bellman_ford(grid: &Grid, source: GridCoord) -> HashMap<GridCoord, f64> {
    let cells: Vec<GridCoord> = (0..grid.height())
        .flat_map(|y| (0..grid.width()).map(move |x| GridCoord::new(x, y)))
        .filter(|&p| !grid.is_blocked(p))
        .collect();
    let edges: Vec<(GridCoord, GridCoord, f64)> = cells
        .iter()
        .flat_map(|&u| moves(grid, u).into_iter().map(move |(v, w)| (u, v, w)))
        .collect();
    let mut dist = HashMap::from([(source, 0.0)]);
    for _ in 0..cells.len() {
        let mut changed = false;
        for &(u, v, w) in &edges {
            if let Some(&du) = dist.get(&u) {
                let cand = du + w;
                if dist.get(&v).map_or(true, |&dv| cand < dv - 1e-12) {
                    dist.insert(v, cand);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    dist
}

/// Shortest start-to-goal cost, or `None` when unreachable.
pub fn optimal_cost(grid: &Grid) -> Option<f64> {
    bellman_ford(grid, grid.start()).get(&grid.goal()).copied()
}

/// Checks a path step by step against the bitmap and recomputes its cost.
pub fn walk_cost(grid: &Grid, path: &[GridCoord]) -> Result<f64, String> {
    if path.first() != Some(&grid.start()) || path.last() != Some(&grid.goal()) {
        return Err(format!("path does not run start to goal: {path:?}"));
    }
    let mut total = 0.0;
    for w in path.windows(2) {
        let (_, cost) = moves(grid, w[0])
            .into_iter()
            .find(|(n, _)| *n == w[1])
            .ok_or_else(|| format!("illegal move {} -> {}", w[0], w[1]))?;
        total += cost;
    }
    Ok(total)
}

/// Mean and sample standard deviation, computed in two passes.
pub fn two_pass(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for k in i..=j {
                r[idx[k]] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    let (mx, _) = two_pass(&rx);
    let (my, _) = two_pass(&ry);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum::<f64>().sqrt();
    let sy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum::<f64>().sqrt();
    cov / (sx * sy)
}
