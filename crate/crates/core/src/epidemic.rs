//! SIS/SIR experiments on the lattice: initial conditions from fill
//! fractions, multi-domain layouts and density gradients, time series,
//! threshold scans and domain-wall extraction.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::lattice::{self, Boundary, CellState, Execution, Grid, LatticeError, StepParams};
use crate::rng;

/// Default per-contact infection probability of the SIS preset.
///
/// Chosen with `cargo run --release -p rydsim --example calibrate_beta`: the
/// single-domain threshold sits at f_Rc for any beta, while larger beta lets
/// infection leak across domain boundaries and merges the steps of a
/// multi-domain scan.
pub const SIS_BETA: f64 = 0.05;
pub const SIS_MU: f64 = 0.01;
pub const SIR_BETA: f64 = 0.95;
pub const SIR_GAMMA: f64 = 0.2;
/// Critical fill fraction used by [`SeedPolicy::ThresholdExcess`].
pub const DEFAULT_F_RC: f64 = 0.6;

const INIT_OCCUPANCY_STREAM: u64 = u64::MAX;
const INIT_SEEDING_STREAM: u64 = u64::MAX - 1;
const REPLICATE_TAG: u64 = 0x5245_504C; // "REPL"

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EpidemicError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("{name} = {value} outside [0, 1]")]
    Fraction { name: &'static str, value: f64 },
    #[error("domain regions {0} and {1} overlap")]
    Overlap(usize, usize),
    #[error("domain region {0} extends beyond the {1}x{1} grid")]
    RegionOutOfGrid(usize, usize),
    #[error("domain region {0} is empty")]
    EmptyRegion(usize),
    #[error("select at most one of layout or gradient initialisation")]
    ModeConflict,
    #[error("explicit seed ({row}, {col}) is not on an occupied cell")]
    SeedNotOccupied { row: usize, col: usize },
    #[error("scan needs at least one f_R value")]
    EmptyScan,
    #[error("{0} must be positive")]
    NonPositive(&'static str),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum SeedPolicy {
    /// Occupied cells in column 0 start infected.
    #[default]
    LeftEdge,
    /// Each occupied cell starts infected with probability
    /// `clamp((f_R - f_Rc) / (1 - f_Rc), 0, 1)` using its local f_R.
    ThresholdExcess,
    Explicit(Vec<(usize, usize)>),
}

/// Normalisation of the scan observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Observable {
    /// Final infected cells over initially occupied cells.
    #[default]
    OccupiedFraction,
    /// Final infected cells over all N cells.
    AllCells,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpidemicParams {
    pub m: usize,
    /// Global Rydberg fill fraction.
    pub f_r: f64,
    /// Critical fill fraction.
    pub f_rc: f64,
    pub beta: f64,
    pub mu: f64,
    pub gamma: f64,
    pub boundary: Boundary,
    pub iterations: usize,
    pub seeding: SeedPolicy,
    pub replicates: usize,
    pub seed: u64,
    pub observable: Observable,
}

impl EpidemicParams {
    /// Endemic regime: fast spreading, no decay, slow reverse process.
    pub fn sis() -> Self {
        Self {
            m: 100,
            f_r: 0.6,
            f_rc: DEFAULT_F_RC,
            beta: SIS_BETA,
            mu: SIS_MU,
            gamma: 0.0,
            boundary: Boundary::AbsorbingEdge,
            iterations: 200,
            seeding: SeedPolicy::ThresholdExcess,
            replicates: 20,
            seed: 1,
            observable: Observable::OccupiedFraction,
        }
    }

    /// Herd-immunity regime with the rates used for the SIR peak.
    pub fn sir() -> Self {
        Self {
            beta: SIR_BETA,
            mu: 0.0,
            gamma: SIR_GAMMA,
            f_r: 0.7,
            iterations: 500,
            seeding: SeedPolicy::LeftEdge,
            replicates: 1,
            ..Self::sis()
        }
    }

    pub fn step_params(&self) -> StepParams {
        StepParams { beta: self.beta, mu: self.mu, gamma: self.gamma, boundary: self.boundary }
    }

    pub fn validate(&self) -> Result<(), EpidemicError> {
        if self.m == 0 {
            return Err(EpidemicError::NonPositive("m"));
        }
        if self.replicates == 0 {
            return Err(EpidemicError::NonPositive("replicates"));
        }
        check_fraction("f_R", self.f_r)?;
        check_fraction("f_Rc", self.f_rc)?;
        self.step_params().validate()?;
        Ok(())
    }
}

fn check_fraction(name: &'static str, value: f64) -> Result<(), EpidemicError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(EpidemicError::Fraction { name, value })
    }
}

/// Axis-aligned block of cells, `rows x cols` starting at `(row, col)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub row: usize,
    pub col: usize,
    pub rows: usize,
    pub cols: usize,
}

impl Rect {
    pub fn contains(&self, row: usize, col: usize) -> bool {
        row >= self.row && row < self.row + self.rows && col >= self.col && col < self.col + self.cols
    }

    fn intersects(&self, other: &Rect) -> bool {
        self.row < other.row + other.rows
            && other.row < self.row + self.rows
            && self.col < other.col + other.cols
            && other.col < self.col + self.cols
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub region: Rect,
    /// Added to the base f_R inside the region; the sum is clamped to [0, 1].
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DomainLayout {
    pub domains: Vec<Domain>,
}

impl DomainLayout {
    /// Full-width horizontal bands of (nearly) equal height, top to bottom,
    /// one per offset. Every domain touches the left edge, so left-edge
    /// seeding reaches each of them directly.
    pub fn horizontal_bands(m: usize, offsets: &[f64]) -> Self {
        let k = offsets.len().max(1);
        let domains = offsets
            .iter()
            .enumerate()
            .map(|(i, &offset)| {
                let start = i * m / k;
                let end = (i + 1) * m / k;
                Domain { region: Rect { row: start, col: 0, rows: end - start, cols: m }, offset }
            })
            .collect();
        Self { domains }
    }

    pub fn validate(&self, m: usize) -> Result<(), EpidemicError> {
        for (i, d) in self.domains.iter().enumerate() {
            let r = d.region;
            if r.rows == 0 || r.cols == 0 {
                return Err(EpidemicError::EmptyRegion(i));
            }
            if r.row + r.rows > m || r.col + r.cols > m {
                return Err(EpidemicError::RegionOutOfGrid(i, m));
            }
            if !d.offset.is_finite() {
                return Err(EpidemicError::Fraction { name: "offset", value: d.offset });
            }
            for (j, e) in self.domains.iter().enumerate().skip(i + 1) {
                if r.intersects(&e.region) {
                    return Err(EpidemicError::Overlap(i, j));
                }
            }
        }
        Ok(())
    }

    /// Local fill fraction at a cell.
    pub fn density_at(&self, row: usize, col: usize, base: f64) -> f64 {
        self.domains.iter().find(|d| d.region.contains(row, col)).map_or(base, |d| (base + d.offset).clamp(0.0, 1.0))
    }
}

/// Local fill fraction at (possibly fractional) column `col` of a gradient
/// running from `start` at column 0 to `end` at column `m - 1`.
pub fn gradient_fraction(start: f64, end: f64, col: f64, m: usize) -> f64 {
    if m <= 1 {
        start
    } else {
        start + (end - start) * col / (m - 1) as f64
    }
}

/// How the local fill fraction varies over the grid.
#[derive(Debug, Clone, Copy)]
enum Density<'a> {
    Uniform(f64),
    Layout(&'a DomainLayout, f64),
    /// Linear in the column index, `start` at column 0 and `end` at column m-1.
    Gradient(f64, f64),
}

impl Density<'_> {
    fn at(&self, row: usize, col: usize, m: usize) -> f64 {
        match *self {
            Density::Uniform(f) => f,
            Density::Layout(layout, base) => layout.density_at(row, col, base),
            Density::Gradient(start, end) => gradient_fraction(start, end, col as f64, m),
        }
    }
}

/// Builds the initial grid.
///
/// Each cell is independently occupied (susceptible) with probability equal to
/// its local f_R, else depleted; the seed policy then infects some occupied
/// cells. With neither `layout` nor `gradient` the base f_R is used everywhere.
pub fn init_grid(
    params: &EpidemicParams,
    layout: Option<&DomainLayout>,
    gradient: Option<(f64, f64)>,
) -> Result<Grid, EpidemicError> {
    params.validate()?;
    let density = match (layout, gradient) {
        (Some(_), Some(_)) => return Err(EpidemicError::ModeConflict),
        (Some(l), None) => {
            l.validate(params.m)?;
            Density::Layout(l, params.f_r)
        }
        (None, Some((start, end))) => {
            check_fraction("gradient start", start)?;
            check_fraction("gradient end", end)?;
            Density::Gradient(start, end)
        }
        (None, None) => Density::Uniform(params.f_r),
    };

    let m = params.m;
    let seed = params.seed;
    let mut grid = Grid::filled(m, CellState::Depleted, seed)?;
    for row in 0..m {
        for col in 0..m {
            let p = density.at(row, col, m);
            if rng::cell_uniform(seed, INIT_OCCUPANCY_STREAM, row, col) < p {
                grid.set(row, col, CellState::Susceptible);
            }
        }
    }

    match &params.seeding {
        SeedPolicy::LeftEdge => {
            for row in 0..m {
                if grid.get(row, 0) == CellState::Susceptible {
                    grid.set(row, 0, CellState::Infected);
                }
            }
        }
        SeedPolicy::ThresholdExcess => {
            let span = 1.0 - params.f_rc;
            for row in 0..m {
                for col in 0..m {
                    if grid.get(row, col) != CellState::Susceptible {
                        continue;
                    }
                    let excess = density.at(row, col, m) - params.f_rc;
                    let p = if span > 0.0 {
                        (excess / span).clamp(0.0, 1.0)
                    } else if excess >= 0.0 {
                        1.0
                    } else {
                        0.0
                    };
                    if rng::cell_uniform(seed, INIT_SEEDING_STREAM, row, col) < p {
                        grid.set(row, col, CellState::Infected);
                    }
                }
            }
        }
        SeedPolicy::Explicit(coords) => {
            for &(row, col) in coords {
                grid.check(row, col)?;
                if grid.get(row, col) == CellState::Depleted {
                    return Err(EpidemicError::SeedNotOccupied { row, col });
                }
                grid.set(row, col, CellState::Infected);
            }
        }
    }
    Ok(grid)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Record {
    pub iteration: u64,
    pub f_s: f64,
    pub f_i: f64,
    pub f_d: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub records: Vec<Record>,
    pub params: EpidemicParams,
    pub seed: u64,
}

impl TimeSeries {
    pub fn final_record(&self) -> Record {
        *self.records.last().expect("time series always holds the initial record")
    }

    /// Iteration and value of the largest infected fraction (first on ties).
    pub fn peak(&self) -> (u64, f64) {
        self.records.iter().fold(
            (0, f64::NEG_INFINITY),
            |best, r| {
                if r.f_i > best.1 {
                    (r.iteration, r.f_i)
                } else {
                    best
                }
            },
        )
    }

    pub fn infected(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.f_i).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,f_S,f_I,f_D\n");
        for r in &self.records {
            let _ = writeln!(out, "{},{},{},{}", r.iteration, fmt_f64(r.f_s), fmt_f64(r.f_i), fmt_f64(r.f_d));
        }
        out
    }
}

fn record(grid: &Grid) -> Record {
    let (f_s, f_i, f_d) = lattice::counts(grid);
    Record { iteration: grid.iteration(), f_s, f_i, f_d }
}

/// Steps `params.iterations` times, recording fractions before the first
/// step and after every step.
pub fn run(params: &EpidemicParams, grid: Grid) -> Result<(TimeSeries, Grid), EpidemicError> {
    run_with(params, grid, Execution::Parallel)
}

pub fn run_with(params: &EpidemicParams, grid: Grid, exec: Execution) -> Result<(TimeSeries, Grid), EpidemicError> {
    let step = params.step_params();
    step.validate()?;
    let seed = grid.seed();
    let mut records = Vec::with_capacity(params.iterations + 1);
    records.push(record(&grid));
    let mut grid = grid;
    for done in 0..params.iterations {
        if grid.counts().infected == 0 {
            // Nothing can change any more; only the clock advances.
            let last = *records.last().expect("initial record present");
            let remaining = (params.iterations - done) as u64;
            for t in 1..=remaining {
                records.push(Record { iteration: last.iteration + t, ..last });
            }
            grid = Grid::from_cells(grid.side(), grid.cells().to_vec(), last.iteration + remaining, seed)?;
            break;
        }
        grid = lattice::step_with(&grid, &step, exec)?;
        records.push(record(&grid));
    }
    Ok((TimeSeries { records, params: params.clone(), seed }, grid))
}

/// One point of a threshold scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub f_r: f64,
    pub mean_f_i: f64,
    pub stddev: f64,
}

/// Seed of replicate `index` at fill fraction `f_r`.
pub fn replicate_seed(master: u64, f_r: f64, index: usize) -> u64 {
    rng::sub_seed(rng::sub_seed(master, REPLICATE_TAG, f_r.to_bits()), REPLICATE_TAG, index as u64)
}

/// Mean and sample standard deviation of the final infected fraction versus
/// uniform fill fraction.
pub fn threshold_scan(
    params: &EpidemicParams,
    f_r_values: &[f64],
    replicates: usize,
) -> Result<Vec<ScanPoint>, EpidemicError> {
    scan(params, None, f_r_values, replicates, Execution::Parallel)
}

/// Threshold scan where each domain of `layout` sits at `f_R + offset`.
pub fn multi_domain_scan(
    params: &EpidemicParams,
    layout: &DomainLayout,
    f_r_values: &[f64],
) -> Result<Vec<ScanPoint>, EpidemicError> {
    scan(params, Some(layout), f_r_values, params.replicates, Execution::Parallel)
}

/// Shared scan driver. With [`Execution::Parallel`] the independent runs are
/// spread over the pool; results are aggregated in input order either way.
pub fn scan(
    params: &EpidemicParams,
    layout: Option<&DomainLayout>,
    f_r_values: &[f64],
    replicates: usize,
    exec: Execution,
) -> Result<Vec<ScanPoint>, EpidemicError> {
    if f_r_values.is_empty() {
        return Err(EpidemicError::EmptyScan);
    }
    if replicates == 0 {
        return Err(EpidemicError::NonPositive("replicates"));
    }
    for &f in f_r_values {
        check_fraction("f_R", f)?;
    }
    params.validate()?;
    if let Some(l) = layout {
        l.validate(params.m)?;
    }

    let jobs: Vec<(usize, usize)> = (0..f_r_values.len()).flat_map(|p| (0..replicates).map(move |r| (p, r))).collect();
    let one = |&(p, r): &(usize, usize)| -> Result<f64, EpidemicError> {
        let f_r = f_r_values[p];
        let run_params = EpidemicParams { f_r, seed: replicate_seed(params.seed, f_r, r), ..params.clone() };
        let grid = init_grid(&run_params, layout, None)?;
        let initial = grid.counts();
        let (_, last) = run_with(&run_params, grid, Execution::Serial)?;
        let infected = last.counts().infected as f64;
        Ok(match params.observable {
            Observable::AllCells => infected / last.len() as f64,
            Observable::OccupiedFraction => {
                let occupied = initial.susceptible + initial.infected;
                if occupied == 0 {
                    0.0
                } else {
                    infected / occupied as f64
                }
            }
        })
    };
    let finals: Vec<f64> = match exec {
        Execution::Serial => jobs.iter().map(one).collect::<Result<_, _>>()?,
        Execution::Parallel => jobs.par_iter().map(one).collect::<Result<_, _>>()?,
    };

    Ok(f_r_values
        .iter()
        .zip(finals.chunks(replicates))
        .map(|(&f_r, values)| {
            let (mean_f_i, stddev) = mean_std(values);
            ScanPoint { f_r, mean_f_i, stddev }
        })
        .collect())
}

/// Mean and sample standard deviation (zero for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// `f_min, f_min + step, ..., f_max` with `points` entries.
pub fn linspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..points).map(|i| start + (stop - start) * i as f64 / (points - 1) as f64).collect(),
    }
}

pub fn scan_to_csv(points: &[ScanPoint]) -> String {
    let mut out = String::from("f_R,f_I,stddev\n");
    for p in points {
        let _ = writeln!(out, "{},{},{}", fmt_f64(p.f_r), fmt_f64(p.mean_f_i), fmt_f64(p.stddev));
    }
    out
}

/// Non-infected cells with at least one infected Moore neighbour.
pub fn detect_domain_wall(grid: &Grid) -> BTreeSet<(usize, usize)> {
    let m = grid.side();
    let mut wall = BTreeSet::new();
    for row in 0..m {
        for col in 0..m {
            if grid.get(row, col) == CellState::Infected {
                continue;
            }
            let touches = lattice::moore_neighbors(row, col, m)
                .expect("in-range coordinate")
                .into_iter()
                .any(|(r, c)| grid.get(r, c) == CellState::Infected);
            if touches {
                wall.insert((row, col));
            }
        }
    }
    wall
}

/// Mean column index of a set of cells.
pub fn mean_column(cells: &BTreeSet<(usize, usize)>) -> Option<f64> {
    if cells.is_empty() {
        return None;
    }
    Some(cells.iter().map(|&(_, c)| c as f64).sum::<f64>() / cells.len() as f64)
}

/// 17 significant digits, enough to round-trip any double.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(m: usize) -> EpidemicParams {
        EpidemicParams { m, replicates: 2, iterations: 20, ..EpidemicParams::sis() }
    }

    #[test]
    fn presets_respect_regimes() {
        let sis = EpidemicParams::sis();
        assert_eq!((sis.gamma, sis.mu), (0.0, 0.01));
        assert!(sis.beta > 0.0 && sis.gamma == 0.0);
        let sir = EpidemicParams::sir();
        assert_eq!((sir.beta, sir.gamma, sir.mu), (0.95, 0.2, 0.0));
        assert!(sir.beta / sir.gamma > 1.0);
    }

    #[test]
    fn empty_fill_is_all_depleted() {
        let p = EpidemicParams { f_r: 0.0, ..small(30) };
        let c = init_grid(&p, None, None).unwrap().counts();
        assert_eq!(c.depleted, 900);
    }

    #[test]
    fn full_fill_left_edge() {
        let p = EpidemicParams { f_r: 1.0, seeding: SeedPolicy::LeftEdge, ..small(30) };
        let g = init_grid(&p, None, None).unwrap();
        for r in 0..30 {
            for c in 0..30 {
                let want = if c == 0 { CellState::Infected } else { CellState::Susceptible };
                assert_eq!(g.get(r, c), want);
            }
        }
    }

    #[test]
    fn overlapping_layout_rejected() {
        let layout = DomainLayout {
            domains: vec![
                Domain { region: Rect { row: 0, col: 0, rows: 5, cols: 5 }, offset: 0.1 },
                Domain { region: Rect { row: 4, col: 4, rows: 5, cols: 5 }, offset: 0.2 },
            ],
        };
        assert_eq!(init_grid(&small(20), Some(&layout), None), Err(EpidemicError::Overlap(0, 1)));
        assert_eq!(
            init_grid(&small(20), Some(&DomainLayout::default()), Some((0.0, 1.0))),
            Err(EpidemicError::ModeConflict)
        );
    }

    #[test]
    fn horizontal_bands_tile() {
        let l = DomainLayout::horizontal_bands(100, &[0.3, 0.15, 0.0]);
        l.validate(100).unwrap();
        let rows: usize = l.domains.iter().map(|d| d.region.rows).sum();
        assert_eq!(rows, 100);
        assert_eq!(l.density_at(0, 0, 0.8), 1.0);
        assert_eq!(l.density_at(99, 99, 0.4), 0.4);
    }

    #[test]
    fn explicit_seed_must_be_occupied() {
        let p = EpidemicParams { f_r: 0.0, seeding: SeedPolicy::Explicit(vec![(1, 1)]), ..small(5) };
        assert_eq!(init_grid(&p, None, None), Err(EpidemicError::SeedNotOccupied { row: 1, col: 1 }));
        let p = EpidemicParams { f_r: 1.0, seeding: SeedPolicy::Explicit(vec![(9, 1)]), ..small(5) };
        assert!(matches!(init_grid(&p, None, None), Err(EpidemicError::Lattice(_))));
    }

    #[test]
    fn threshold_excess_probability() {
        let p = EpidemicParams { f_r: 0.8, f_rc: 0.6, seeding: SeedPolicy::ThresholdExcess, ..small(200) };
        let c = init_grid(&p, None, None).unwrap().counts();
        // P(infected) = 0.8 * (0.2 / 0.4)
        let frac = c.infected as f64 / 40_000.0;
        assert!((frac - 0.4).abs() < 5.0 * (0.24f64 / 40_000.0).sqrt(), "{frac}");
        let below = EpidemicParams { f_r: 0.5, ..p };
        assert_eq!(init_grid(&below, None, None).unwrap().counts().infected, 0);
    }

    #[test]
    fn zero_iterations_single_record() {
        let p = EpidemicParams { iterations: 0, ..small(10) };
        let g = init_grid(&p, None, None).unwrap();
        let (ts, g2) = run(&p, g.clone()).unwrap();
        assert_eq!(ts.records.len(), 1);
        assert_eq!(g, g2);
        let (s, i, d) = lattice::counts(&g);
        assert_eq!(ts.records[0], Record { iteration: 0, f_s: s, f_i: i, f_d: d });
    }

    #[test]
    fn scan_rejects_empty_and_zero_fill_gives_zero() {
        assert_eq!(threshold_scan(&small(10), &[], 2), Err(EpidemicError::EmptyScan));
        let pts = threshold_scan(&small(20), &[0.0], 3).unwrap();
        assert_eq!(pts[0].mean_f_i, 0.0);
        assert_eq!(pts[0].stddev, 0.0);
    }

    #[test]
    fn wall_of_all_infected_is_empty() {
        let g = Grid::filled(8, CellState::Infected, 0).unwrap();
        assert!(detect_domain_wall(&g).is_empty());
    }

    #[test]
    fn wall_of_half_plane_is_one_column() {
        let m = 12;
        let c = 5;
        let mut g = Grid::filled(m, CellState::Susceptible, 0).unwrap();
        for r in 0..m {
            for col in 0..c {
                g.set(r, col, CellState::Infected);
            }
        }
        let wall = detect_domain_wall(&g);
        let expect: BTreeSet<_> = (0..m).map(|r| (r, c)).collect();
        assert_eq!(wall, expect);
        assert_eq!(mean_column(&wall), Some(c as f64));
    }

    #[test]
    fn csv_headers() {
        let p = EpidemicParams { iterations: 1, ..small(6) };
        let (ts, _) = run(&p, init_grid(&p, None, None).unwrap()).unwrap();
        let csv = ts.to_csv();
        assert!(csv.starts_with("iteration,f_S,f_I,f_D\n0,"));
        assert_eq!(csv.lines().count(), 3);
        let s = scan_to_csv(&[ScanPoint { f_r: 0.5, mean_f_i: 0.25, stddev: 0.0 }]);
        assert_eq!(s, "f_R,f_I,stddev\n5.0000000000000000e-1,2.5000000000000000e-1,0.0000000000000000e0\n");
    }

    #[test]
    fn linspace_endpoints() {
        let v = linspace(0.0, 1.0, 21);
        assert_eq!(v.len(), 21);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[20], 1.0);
        assert!((v[12] - 0.6).abs() < 1e-15);
    }
}
