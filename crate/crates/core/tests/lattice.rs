use std::collections::VecDeque;

use proptest::prelude::*;
use rydsim::lattice::*;

fn grid_strategy(max_m: usize) -> impl Strategy<Value = Grid> {
    (1..=max_m, any::<u64>()).prop_flat_map(|(m, seed)| {
        prop::collection::vec(0u8..3, m * m).prop_map(move |codes| {
            let cells = codes.into_iter().map(|c| CellState::from_code(c).unwrap()).collect();
            Grid::from_cells(m, cells, 0, seed).unwrap()
        })
    })
}

fn rates() -> impl Strategy<Value = StepParams> {
    (0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..=1.0, any::<bool>()).prop_map(|(beta, a, b, periodic)| {
        // Keep gamma + mu <= 1.
        let (mu, gamma) = (a * 0.5, b * 0.5);
        let boundary = if periodic { Boundary::Periodic } else { Boundary::AbsorbingEdge };
        StepParams { beta, mu, gamma, boundary }
    })
}

fn on_edge(r: usize, c: usize, m: usize) -> bool {
    r == 0 || c == 0 || r == m - 1 || c == m - 1
}

/// Expected grid after `t` deterministic steps (beta = 1, mu = gamma = 0).
///
/// Multi-source BFS over Moore moves through susceptible cells. Under an
/// absorbing edge a reached edge cell is removed in the same step, so it is
/// Depleted and never passes the infection on; initially infected cells
/// spread once before the edge rule removes them.
fn bfs_oracle(grid: &Grid, t: usize, boundary: Boundary) -> Vec<CellState> {
    let m = grid.side();
    let periodic = boundary == Boundary::Periodic;
    let mut dist = vec![usize::MAX; m * m];
    let mut queue = VecDeque::new();
    for (r, c) in grid.positions(CellState::Infected) {
        dist[r * m + c] = 0;
        queue.push_back((r, c));
    }
    while let Some((r, c)) = queue.pop_front() {
        let d = dist[r * m + c];
        if d == t || (d > 0 && !periodic && on_edge(r, c, m)) {
            continue;
        }
        for dr in [-1i64, 0, 1] {
            for dc in [-1i64, 0, 1] {
                if dr == 0 && dc == 0 {
                    continue;
                }
                let (nr, nc) = (r as i64 + dr, c as i64 + dc);
                let (nr, nc) = if periodic {
                    (nr.rem_euclid(m as i64) as usize, nc.rem_euclid(m as i64) as usize)
                } else if nr < 0 || nc < 0 || nr >= m as i64 || nc >= m as i64 {
                    continue;
                } else {
                    (nr as usize, nc as usize)
                };
                let k = nr * m + nc;
                if grid.get(nr, nc) == CellState::Susceptible && dist[k] == usize::MAX {
                    dist[k] = d + 1;
                    queue.push_back((nr, nc));
                }
            }
        }
    }
    (0..m * m)
        .map(|k| {
            let (r, c) = (k / m, k % m);
            let start = grid.get(r, c);
            let reached = dist[k] <= t;
            let removed = !periodic && on_edge(r, c, m) && t >= 1;
            match (start, reached) {
                (CellState::Depleted, _) => CellState::Depleted,
                (_, true) if removed => CellState::Depleted,
                (_, true) => CellState::Infected,
                _ => CellState::Susceptible,
            }
        })
        .collect()
}

fn run_steps(grid: &Grid, params: &StepParams, t: usize) -> Grid {
    let mut g = grid.clone();
    for _ in 0..t {
        g = step(&g, params).unwrap();
    }
    g
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn deterministic_limit_matches_bfs(grid in grid_strategy(20), t in 0usize..12, periodic in any::<bool>()) {
        let boundary = if periodic { Boundary::Periodic } else { Boundary::AbsorbingEdge };
        let params = StepParams { beta: 1.0, mu: 0.0, gamma: 0.0, boundary };
        let got = run_steps(&grid, &params, t);
        prop_assert_eq!(got.cells(), &bfs_oracle(&grid, t, boundary)[..]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn step_conserves_and_transitions_legally(grid in grid_strategy(24), params in rates()) {
        let next = step(&grid, &params).unwrap();
        let m = grid.side();
        prop_assert_eq!(next.counts().total(), m * m);
        prop_assert_eq!(next.iteration(), grid.iteration() + 1);
        for r in 0..m {
            for c in 0..m {
                let (a, b) = (grid.get(r, c), next.get(r, c));
                let edge_removal = params.boundary == Boundary::AbsorbingEdge
                    && on_edge(r, c, m)
                    && a == CellState::Susceptible
                    && b == CellState::Depleted;
                prop_assert!(a.can_become(b) || edge_removal, "({r},{c}) {a:?} -> {b:?}");
                if params.boundary == Boundary::AbsorbingEdge && on_edge(r, c, m) {
                    prop_assert!(b != CellState::Infected);
                }
            }
        }
    }

    #[test]
    fn step_is_deterministic(grid in grid_strategy(24), params in rates()) {
        let a = step_with(&grid, &params, Execution::Serial).unwrap();
        let b = step_with(&grid, &params, Execution::Parallel).unwrap();
        let c = step_with(&grid, &params, Execution::Serial).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(&a, &c);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn sir_counts_are_monotone(grid in grid_strategy(20), beta in 0.0f64..=1.0, gamma in 0.0f64..=1.0, steps in 1usize..30) {
        let params = StepParams::new(beta, 0.0, gamma);
        let mut g = grid;
        let mut prev = g.counts();
        for _ in 0..steps {
            g = step(&g, &params).unwrap();
            let now = g.counts();
            prop_assert!(now.susceptible <= prev.susceptible);
            prop_assert!(now.depleted >= prev.depleted);
            prev = now;
        }
    }

    #[test]
    fn no_spread_without_beta(grid in grid_strategy(20), mu in 0.0f64..0.5, gamma in 0.0f64..0.5, steps in 1usize..20) {
        let params = StepParams::new(0.0, mu, gamma);
        let mut g = grid;
        for _ in 0..steps {
            let next = step(&g, &params).unwrap();
            prop_assert!(next.counts().infected <= g.counts().infected);
            for (r, c) in g.positions(CellState::Susceptible) {
                prop_assert!(next.get(r, c) == CellState::Susceptible || next.get(r, c) == CellState::Depleted);
            }
            g = next;
        }
    }

    #[test]
    fn pgm_round_trip(grid in grid_strategy(20)) {
        let back = from_pgm(&to_pgm(&grid), &pgm_sidecar(&grid)).unwrap();
        prop_assert_eq!(back, grid);
    }
}

#[test]
fn depleted_is_absorbing_over_long_runs() {
    let m = 40;
    let cells = (0..m * m).map(|k| CellState::from_code((k % 3) as u8).unwrap()).collect();
    let mut g = Grid::from_cells(m, cells, 0, 9).unwrap();
    let params = StepParams { beta: 0.6, mu: 0.3, gamma: 0.1, boundary: Boundary::Periodic };
    for _ in 0..200 {
        let next = step(&g, &params).unwrap();
        for (r, c) in g.positions(CellState::Depleted) {
            assert_eq!(next.get(r, c), CellState::Depleted);
        }
        g = next;
    }
}
