//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any criterion fails.

mod common;

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::{bellman_ford, optimal_cost, random_grid, spearman, two_pass, walk_cost};
use gridbench::cli::cli_main;
use gridbench::experiments::{capped_sg, run_sweep, FixedParams, SweepConfig, SweepKind};
use gridbench::generators::{
    generate_random_grid, generate_wall_grid, RandomGridSpec, WallGridSpec, WALL_GRID_GOAL, WALL_GRID_START,
};
use gridbench::metrics::{aggregate, run_repetitions};
use gridbench::report::{parse_config, read_csv, render_plots};
use gridbench::search::{ara_star_iterates, rtaa_star_traced, NoopProbe};
use gridbench::selector::{compute_euclidean_distance, select_algorithm, Priority, SelectionRequest};
use gridbench::{euclidean_heuristic, solve, AlgorithmId, Grid, GridCoord, SolverParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPS: f64 = 1e-9;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// The 100 shared grids of criteria 1 to 3: 30x30, density 0.25, seeds 0..100.
fn hundred_grids() -> Vec<Grid> {
    (0..100).map(|seed| random_grid(30, 0.25, capped_sg(140.0, 30), seed)).collect()
}

fn cost(grid: &Grid, algo: AlgorithmId, params: &SolverParams) -> Result<f64, String> {
    solve(grid, algo, params, &mut NoopProbe)
        .map(|o| o.path_cost)
        .map_err(|e| format!("{algo}: {e}"))
}

fn optimal_family(grids: &[Grid]) -> Check {
    let params = SolverParams::default();
    for (seed, g) in grids.iter().enumerate() {
        let reference = cost(g, AlgorithmId::AstarOracle, &params)?;
        for algo in [AlgorithmId::LpaStar, AlgorithmId::DStar, AlgorithmId::DStarLite] {
            let c = cost(g, algo, &params)?;
            ensure((c - reference).abs() <= EPS, || format!("seed {seed}: {algo} {c} vs oracle {reference}"))?;
        }
    }
    Ok(format!("{} grids, oracle/LPA*/D*/D* Lite agree within 1e-9", grids.len()))
}

fn ara_bound(grids: &[Grid]) -> Check {
    let params = SolverParams::default();
    let mut worst = 1.0f64;
    for (seed, g) in grids.iter().enumerate() {
        let best = cost(g, AlgorithmId::AstarOracle, &params)?;
        let run = ara_star_iterates(g, &params, &mut NoopProbe).map_err(|e| e.to_string())?;
        let first = &run.iterates[0];
        ensure(first.weight == 2.5, || format!("seed {seed}: first weight {}", first.weight))?;
        ensure(first.cost <= 2.5 * best + EPS, || format!("seed {seed}: first cost {} > 2.5 x {best}", first.cost))?;
        let last = run.iterates.last().unwrap();
        ensure(last.weight == 1.0 && (last.cost - best).abs() <= EPS, || {
            format!("seed {seed}: final (w = {}) cost {} vs {best}", last.weight, last.cost)
        })?;
        for w in run.iterates.windows(2) {
            ensure(w[1].cost <= w[0].cost + EPS, || format!("seed {seed}: iterate cost rose"))?;
        }
        if best > 0.0 {
            worst = worst.max(first.cost / best);
        }
    }
    Ok(format!("worst first-iterate ratio {worst:.3} <= 2.5, final iterate optimal on all grids"))
}

fn realtime(grids: &[Grid]) -> Check {
    let params = SolverParams::default();
    for (seed, g) in grids.iter().enumerate() {
        let best = optimal_cost(g).ok_or_else(|| format!("seed {seed} unsolvable"))?;
        for algo in [AlgorithmId::LrtaStar, AlgorithmId::RtaaStar] {
            let out = solve(g, algo, &params, &mut NoopProbe).map_err(|e| format!("seed {seed} {algo}: {e}"))?;
            let walked = walk_cost(g, &out.path).map_err(|e| format!("seed {seed} {algo}: {e}"))?;
            ensure(walked >= best - EPS, || format!("seed {seed} {algo}: {walked} < {best}"))?;
        }
    }
    let mut checked = 0usize;
    for seed in 0..20 {
        let g = random_grid(15, 0.25, capped_sg(140.0, 15), seed);
        let mut violation = None;
        rtaa_star_traced(&g, &params, &mut NoopProbe, &mut |trace| {
            for &s in &trace.expanded {
                for (n, c) in common::moves(&g, s) {
                    checked += 1;
                    if trace.h(s) > c + trace.h(n) + EPS && violation.is_none() {
                        violation = Some(format!("seed {seed}: h({s}) > c + h({n})"));
                    }
                }
            }
        })
        .map_err(|e| e.to_string())?;
        if let Some(v) = violation {
            return Err(v);
        }
    }
    Ok(format!(
        "LRTA*/RTAA* reach the goal on 100 grids at cost >= optimum; {checked} RTAA* edge checks consistent"
    ))
}

fn selector_table() -> Check {
    let at = |d: u32, p: Priority| SelectionRequest {
        start: GridCoord::new(0, 0),
        goal: GridCoord::new(0, d),
        distance_threshold: 140.0,
        priority: p,
    };
    let cases = [
        (at(200, Priority::Memory), AlgorithmId::DStarLite),
        (at(10, Priority::Memory), AlgorithmId::DStarLite),
        (at(200, Priority::PathCost), AlgorithmId::DStarLite),
        (at(10, Priority::PathCost), AlgorithmId::DStarLite),
        (at(150, Priority::SolvingTime), AlgorithmId::RtaaStar),
        (at(100, Priority::SolvingTime), AlgorithmId::AraStar),
        (at(140, Priority::SolvingTime), AlgorithmId::RtaaStar),
        (at(139, Priority::SolvingTime), AlgorithmId::AraStar),
    ];
    for (req, want) in cases {
        let got = select_algorithm(&req).map_err(|e| e.to_string())?;
        ensure(got == want, || format!("{req:?}: got {got}, want {want}"))?;
    }
    Ok("four rules hold, d = threshold selects RTAA*".into())
}

fn wall_grids() -> Check {
    let d = compute_euclidean_distance(WALL_GRID_START, WALL_GRID_GOAL);
    ensure((d - 73.539).abs() <= 1e-3, || format!("start-goal distance {d}"))?;
    for walls in 0..=7 {
        for length in 15..=27 {
            let g = generate_wall_grid(&WallGridSpec::new(walls, length)).map_err(|e| e.to_string())?;
            ensure(g.obstacle_count() == (walls * length) as usize, || {
                format!("{walls} walls x {length}: {} blocked", g.obstacle_count())
            })?;
        }
    }
    Ok(format!("distance {d:.3}, blocked = walls x length on 104 layouts"))
}

fn generator_exactness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..50 {
        let n = rng.gen_range(5..=60u32);
        let density = rng.gen_range(0.0..0.35);
        let sg = rng.gen_range(0.0..0.7 * (n - 1) as f64);
        let spec = RandomGridSpec::new(n, density, sg, rng.gen());
        let g = generate_random_grid(&spec).map_err(|e| e.to_string())?;
        let expected = (density * ((n * n) as f64 - 2.0) + 0.5).floor() as usize;
        ensure(g.obstacle_count() == expected, || format!("{spec}: {} obstacles, want {expected}", g.obstacle_count()))?;
        ensure(bellman_ford(&g, g.start()).contains_key(&g.goal()), || format!("{spec}: unsolvable"))?;
        ensure((euclidean_heuristic(g.start(), g.goal()) - sg).abs() <= 0.5, || format!("{spec}: distance"))?;
        let again = generate_random_grid(&spec).map_err(|e| e.to_string())?;
        ensure(again.to_text() == g.to_text(), || format!("{spec}: regeneration differs"))?;
    }
    Ok("50 specs: exact obstacle counts, solvable, byte-identical regeneration".into())
}

fn memory_ordering() -> Check {
    let params = SolverParams::default();
    let sg = capped_sg(140.0, 100);
    let (mut lite_below_rtaa, mut lpa_below_dstar) = (0, 0);
    let mut lines = Vec::new();
    for seed in 0..10 {
        let g = random_grid(100, 0.25, sg, seed);
        let mem = |algo| -> Result<f64, String> {
            let stats = run_repetitions(&g, algo, &params, 3).map_err(|e| e.to_string())?;
            Ok(stats.memory_kb.mean)
        };
        let (lite, rtaa, lpa, dstar) = (
            mem(AlgorithmId::DStarLite)?,
            mem(AlgorithmId::RtaaStar)?,
            mem(AlgorithmId::LpaStar)?,
            mem(AlgorithmId::DStar)?,
        );
        lite_below_rtaa += usize::from(lite < rtaa);
        lpa_below_dstar += usize::from(lpa < dstar);
        lines.push(format!("seed {seed}: D* Lite {lite:.1} RTAA* {rtaa:.1} LPA* {lpa:.1} D* {dstar:.1} KB"));
    }
    let summary = format!(
        "sg {sg:.2}: D* Lite < RTAA* on {lite_below_rtaa}/10, LPA* < D* on {lpa_below_dstar}/10"
    );
    if lite_below_rtaa >= 9 && lpa_below_dstar >= 9 {
        Ok(summary)
    } else {
        Err(format!("{summary}\n      {}", lines.join("\n      ")))
    }
}

fn distance_trend() -> Check {
    let values = vec![20.0, 40.0, 60.0, 80.0, 100.0, 120.0];
    let cfg = SweepConfig {
        fixed: FixedParams {
            size: 100,
            density: 0.25,
            ..FixedParams::default()
        },
        instances_per_point: 5,
        reps: 5,
        seed: 8,
        algorithms: [AlgorithmId::AstarOracle]
            .into_iter()
            .chain(AlgorithmId::BENCHMARKED)
            .collect(),
        ..SweepConfig::new(SweepKind::SgDistance, values.clone())
    };
    let report = run_sweep(&cfg).map_err(|e| e.to_string())?;
    let means = |algo| -> Vec<f64> { report.series(algo).iter().map(|r| r.stats.path_cost.mean).collect() };
    let oracle = means(AlgorithmId::AstarOracle);
    ensure(oracle.windows(2).all(|w| w[0] < w[1]), || format!("oracle means not increasing: {oracle:?}"))?;
    let mut rhos = Vec::new();
    for algo in AlgorithmId::BENCHMARKED {
        let rho = spearman(&values, &means(algo));
        ensure(rho > 0.9, || format!("{algo}: Spearman {rho:.3}"))?;
        rhos.push(format!("{}={rho:.2}", algo.label()));
    }
    Ok(format!("oracle strictly increasing over {values:?}; Spearman {}", rhos.join(" ")))
}

fn harness_statistics() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for i in 0..1000 {
        let len = rng.gen_range(1..=100);
        let xs: Vec<f64> = (0..len).map(|_| rng.gen_range(0.0..1000.0)).collect();
        let s = aggregate(&xs).map_err(|e| e.to_string())?;
        let (mean, sd) = two_pass(&xs);
        ensure((s.mean - mean).abs() <= EPS && (s.stddev - sd).abs() <= EPS, || {
            format!("list {i}: ({}, {}) vs ({mean}, {sd})", s.mean, s.stddev)
        })?;
    }
    let g = random_grid(50, 0.25, 30.0, 1);
    for algo in AlgorithmId::BENCHMARKED {
        let stats = run_repetitions(&g, algo, &SolverParams::default(), 100).map_err(|e| e.to_string())?;
        ensure(stats.path_cost.stddev == 0.0 && stats.memory_kb.stddev == 0.0, || {
            format!("{algo}: nonzero spread over 100 repetitions")
        })?;
    }
    Ok("1000 lists match two-pass; path cost and memory spread 0 over 100 repetitions".into())
}

fn cli(args: &[&str]) -> Result<String, String> {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli_main(std::iter::once("gridbench").chain(args.iter().copied()), &mut out, &mut err);
    let out = String::from_utf8_lossy(&out).into_owned();
    if code == 0 {
        Ok(out)
    } else {
        Err(format!("{args:?} exited {code}: {}", String::from_utf8_lossy(&err)))
    }
}

fn end_to_end() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg_path = dir.path().join("scaled.cfg");
    let out = dir.path().join("cli");
    fs::write(
        &cfg_path,
        format!("instances_per_point = 3\nreps = 5\noutput_dir = {}\n", out.display()),
    )
    .map_err(|e| e.to_string())?;
    cli(&["sweep", cfg_path.to_str().unwrap()])?;

    let plan = parse_config(&cfg_path).map_err(|e| e.to_string())?;
    let mut svgs = 0;
    for sweep in &plan.sweeps {
        let rows = read_csv(&out.join(format!("{}.csv", sweep.kind))).map_err(|e| e.to_string())?;
        let want = sweep.values.len() * sweep.algorithms.len();
        ensure(rows.len() == want, || format!("{}: {} rows, want {want}", sweep.kind, rows.len()))?;
    }
    for entry in fs::read_dir(&out).map_err(|e| e.to_string())? {
        let name = entry.map_err(|e| e.to_string())?.file_name();
        svgs += usize::from(name.to_string_lossy().ends_with(".svg"));
    }
    ensure(svgs == 15, || format!("{svgs} SVG files"))?;

    // Rendering the same reports twice must give identical bytes.
    for sweep in &plan.sweeps {
        let report = run_sweep(sweep).map_err(|e| e.to_string())?;
        let (a, b) = (dir.path().join("a"), dir.path().join("b"));
        let first = render_plots(&report, &a).map_err(|e| e.to_string())?;
        let second = render_plots(&report, &b).map_err(|e| e.to_string())?;
        for (x, y) in first.iter().zip(&second) {
            ensure(fs::read(x).ok() == fs::read(y).ok(), || format!("{} differs", x.display()))?;
        }
    }

    let grid = random_grid(100, 0.35, 40.0, 4);
    let grid_path = dir.path().join("table.txt");
    fs::write(&grid_path, grid.to_text()).map_err(|e| e.to_string())?;
    let text = cli(&["evaluate", grid_path.to_str().unwrap(), "--priority", "solvingtime", "--reps", "5"])?;
    let lines: Vec<&str> = text.lines().collect();
    let rows: Vec<&str> = lines.iter().skip(1).copied().take_while(|l| l.contains(',')).collect();
    let algos: Vec<&str> = rows.iter().map(|r| r.split(',').next().unwrap()).collect();
    ensure(algos == ["RTAA_STAR", "ARA_STAR", "D_STAR_LITE"], || format!("candidate rows {algos:?}"))?;
    let selected = lines
        .iter()
        .find_map(|l| l.strip_prefix("selected: "))
        .ok_or("no selection line")?;
    ensure(selected == "ARA_STAR", || format!("selected {selected}"))?;
    Ok(format!("5 CSVs with full rows, 15 deterministic SVGs; evaluate lists 3 candidates, selects {selected}"))
}

fn main() {
    let started = Instant::now();
    let grids = hundred_grids();
    let criteria: Vec<(&str, Box<dyn Fn() -> Check + '_>)> = vec![
        ("optimal-family equivalence", Box::new(|| optimal_family(&grids))),
        ("ARA* suboptimality bound", Box::new(|| ara_bound(&grids))),
        ("real-time completeness and consistency", Box::new(|| realtime(&grids))),
        ("selector truth table", Box::new(selector_table)),
        ("wall-grid fidelity", Box::new(wall_grids)),
        ("generator exactness", Box::new(generator_exactness)),
        ("memory ordering", Box::new(memory_ordering)),
        ("distance trend", Box::new(distance_trend)),
        ("harness statistics", Box::new(harness_statistics)),
        ("end-to-end CLI", Box::new(end_to_end)),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = t.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS {name} ({secs:.1}s): {detail}", i + 1),
            Err(detail) => {
                println!("criterion {:>2} FAIL {name} ({secs:.1}s): {detail}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    println!(
        "acceptance: {}/{} passed in {:.1}s",
        criteria.len() - failed.len(),
        criteria.len(),
        started.elapsed().as_secs_f64()
    );
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
