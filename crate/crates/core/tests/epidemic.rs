use rydsim::epidemic::*;
use rydsim::lattice::{Boundary, CellState, Execution};

fn occupied(state: CellState) -> bool {
    state != CellState::Depleted
}

#[test]
fn gradient_occupancy_is_binomial() {
    let m = 200;
    let params = EpidemicParams { m, seed: 5, seeding: SeedPolicy::LeftEdge, ..EpidemicParams::sis() };
    let grid = init_grid(&params, None, Some((0.0, 0.9))).unwrap();
    for col in 0..m {
        let p = gradient_fraction(0.0, 0.9, col as f64, m);
        let count = (0..m).filter(|&r| occupied(grid.get(r, col))).count() as f64;
        let mean = m as f64 * p;
        let sd = (m as f64 * p * (1.0 - p)).sqrt();
        assert!((count - mean).abs() <= 5.0 * sd + 1e-9, "column {col}: {count} vs {mean} +- {sd}");
    }
}

#[test]
fn uniform_occupancy_is_binomial() {
    for f in [0.1, 0.5, 0.93] {
        let params = EpidemicParams { f_r: f, seed: 11, ..EpidemicParams::sis() };
        let grid = init_grid(&params, None, None).unwrap();
        let n = grid.len() as f64;
        let count = grid.cells().iter().filter(|s| occupied(**s)).count() as f64;
        let sd = (n * f * (1.0 - f)).sqrt();
        assert!((count - n * f).abs() <= 5.0 * sd);
    }
}

#[test]
fn layout_occupancy_follows_offsets() {
    let params = EpidemicParams { m: 120, f_r: 0.4, seed: 3, ..EpidemicParams::sis() };
    let layout = DomainLayout::horizontal_bands(120, &[0.3, 0.0, -0.3]);
    let grid = init_grid(&params, Some(&layout), None).unwrap();
    for (band, f) in [(0..40, 0.7), (40..80, 0.4), (80..120, 0.1)] {
        let cells = band.len() * 120;
        let count = band.flat_map(|r| (0..120).map(move |c| (r, c))).filter(|&(r, c)| occupied(grid.get(r, c))).count();
        let sd = (cells as f64 * f * (1.0 - f)).sqrt();
        assert!((count as f64 - cells as f64 * f).abs() <= 5.0 * sd);
    }
}

#[test]
fn deterministic_ball_growth_from_center() {
    let m = 11;
    let params = EpidemicParams {
        m,
        f_r: 1.0,
        beta: 1.0,
        mu: 0.0,
        gamma: 0.0,
        iterations: 8,
        seeding: SeedPolicy::Explicit(vec![(5, 5)]),
        ..EpidemicParams::sis()
    };
    let grid = init_grid(&params, None, None).unwrap();
    let (series, last) = run(&params, grid).unwrap();
    let n = (m * m) as f64;
    for r in &series.records {
        let t = r.iteration as usize;
        // Chebyshev ball of radius t until it hits the absorbing ring.
        let side = (2 * t + 1).min(m - 2) as f64;
        assert_eq!(r.f_i * n, side * side, "t = {t}");
    }
    assert_eq!(last.counts().depleted, 4 * (m - 1));
}

#[test]
fn single_domain_layout_matches_uniform_scan() {
    let params = EpidemicParams { m: 40, iterations: 60, replicates: 3, ..EpidemicParams::sis() };
    let layout = DomainLayout::horizontal_bands(40, &[0.0]);
    let f = linspace(0.0, 1.0, 6);
    let uniform = threshold_scan(&params, &f, 3).unwrap();
    let layered = multi_domain_scan(&params, &layout, &f).unwrap();
    assert_eq!(uniform, layered);
}

#[test]
fn scan_is_identical_serial_and_parallel() {
    let params = EpidemicParams { m: 30, iterations: 40, ..EpidemicParams::sis() };
    let f = linspace(0.3, 0.9, 4);
    let a = scan(&params, None, &f, 4, Execution::Serial).unwrap();
    let b = scan(&params, None, &f, 4, Execution::Parallel).unwrap();
    assert_eq!(scan_to_csv(&a), scan_to_csv(&b));
}

#[test]
fn replicate_seeds_are_distinct() {
    let mut seen = std::collections::BTreeSet::new();
    for f in linspace(0.0, 1.0, 21) {
        for r in 0..20 {
            assert!(seen.insert(replicate_seed(1, f, r)));
        }
    }
}

#[test]
fn periodic_sis_never_depletes() {
    let params =
        EpidemicParams { m: 50, f_r: 0.8, boundary: Boundary::Periodic, iterations: 150, ..EpidemicParams::sis() };
    let grid = init_grid(&params, None, None).unwrap();
    let depleted = grid.counts().depleted as f64 / grid.len() as f64;
    let (series, _) = run(&params, grid).unwrap();
    for r in &series.records {
        assert!((r.f_s + r.f_i + r.f_d - 1.0).abs() < 1e-12);
        assert_eq!(r.f_d, depleted);
    }
    // Above threshold the endemic state persists.
    assert!(series.final_record().f_i > 0.0);
}

#[test]
fn sis_left_edge_front_stays_confined_below_threshold() {
    let confined = |f_r: f64| {
        let params = EpidemicParams { m: 60, f_r, seeding: SeedPolicy::LeftEdge, ..EpidemicParams::sis() };
        let grid = init_grid(&params, None, None).unwrap();
        let occupied = 1.0 - grid.counts().fractions().2;
        let (series, _) = run(&params, grid).unwrap();
        series.final_record().f_i / occupied
    };
    let low = confined(0.3);
    let high = confined(0.9);
    assert!(low < 0.1, "{low}");
    assert!(high > 0.5, "{high}");
}

#[test]
fn sir_preset_reaches_herd_immunity() {
    for seed in 0..5 {
        let params = EpidemicParams { seed, ..EpidemicParams::sir() };
        let grid = init_grid(&params, None, None).unwrap();
        let (series, _) = run(&params, grid).unwrap();
        let last = series.final_record();
        assert_eq!(last.f_i, 0.0, "seed {seed}");
        assert!(last.f_s > 0.0, "seed {seed}");
        let (_, peak) = series.peak();
        assert!(peak > series.records[0].f_i);
    }
}

#[test]
fn time_series_csv_has_one_row_per_record() {
    let params = EpidemicParams { m: 20, iterations: 7, ..EpidemicParams::sis() };
    let grid = init_grid(&params, None, None).unwrap();
    let (series, _) = run(&params, grid).unwrap();
    let csv = series.to_csv();
    assert_eq!(csv.lines().count(), 1 + 8);
    assert!(csv.starts_with("iteration,f_S,f_I,f_D\n0,"));
}

#[test]
fn gradient_wall_sits_between_phases() {
    let params = EpidemicParams { seed: 2, ..EpidemicParams::sis() };
    let grid = init_grid(&params, None, Some((0.0, 0.9))).unwrap();
    let (_, last) = run(&params, grid).unwrap();
    let wall = detect_domain_wall(&last);
    let col = mean_column(&wall).expect("wall present");
    let f = gradient_fraction(0.0, 0.9, col, params.m);
    assert!((0.45..0.8).contains(&f), "wall at local f_R {f}");
}
