//! Square lattice of three-state cells and the synchronous stepping kernel.
//!
//! A cell is either depleted (no Rydberg atoms; immune), susceptible
//! (non-interacting Rydberg population) or infected (interacting Rydberg
//! population). Each step every cell looks at its Moore neighbourhood in the
//! pre-step grid and makes at most one random draw, keyed by
//! `(seed, iteration, row, col)`.

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("coordinate ({row}, {col}) outside {m}x{m} grid")]
    OutOfRange { row: usize, col: usize, m: usize },
    #[error("side length must be positive")]
    EmptyGrid,
    #[error("expected {expected} cells, got {got}")]
    CellCount { expected: usize, got: usize },
    #[error("probability {name} = {value} outside [0, 1]")]
    Probability { name: &'static str, value: f64 },
    #[error("gamma + mu = {sum} exceeds 1 (gamma = {gamma}, mu = {mu})")]
    ExitBudget { gamma: f64, mu: f64, sum: f64 },
    #[error("malformed PGM snapshot: {0}")]
    Pgm(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum CellState {
    /// Ground state, no Rydberg atoms left. Absorbing.
    Depleted = 0,
    /// Non-interacting Rydberg population.
    Susceptible = 1,
    /// Interacting Rydberg population.
    Infected = 2,
}

impl CellState {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Self::Depleted),
            1 => Some(Self::Susceptible),
            2 => Some(Self::Infected),
            _ => None,
        }
    }

    /// Whether a single step may take a cell from `self` to `next`.
    pub fn can_become(self, next: CellState) -> bool {
        use CellState::*;
        match (self, next) {
            (a, b) if a == b => true,
            (Susceptible, Infected) | (Infected, Susceptible) | (Infected, Depleted) => true,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Infected cells on the outer ring are removed (become depleted) at the
    /// end of every step.
    #[default]
    AbsorbingEdge,
    Periodic,
}

/// Whether the kernel fans rows out over the rayon pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepParams {
    /// Per-contact infection probability.
    pub beta: f64,
    /// Infected -> susceptible probability.
    pub mu: f64,
    /// Infected -> depleted probability.
    pub gamma: f64,
    pub boundary: Boundary,
}

impl StepParams {
    pub fn new(beta: f64, mu: f64, gamma: f64) -> Self {
        Self { beta, mu, gamma, boundary: Boundary::AbsorbingEdge }
    }

    pub fn validate(&self) -> Result<(), LatticeError> {
        for (name, value) in [("beta", self.beta), ("mu", self.mu), ("gamma", self.gamma)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(LatticeError::Probability { name, value });
            }
        }
        let sum = self.gamma + self.mu;
        if sum > 1.0 {
            return Err(LatticeError::ExitBudget { gamma: self.gamma, mu: self.mu, sum });
        }
        Ok(())
    }

    /// Infection probability for k infected neighbours, `1 - (1 - beta)^k`.
    fn infection_table(&self) -> [f64; 9] {
        let mut table = [0.0; 9];
        for (k, p) in table.iter_mut().enumerate() {
            *p = 1.0 - (1.0 - self.beta).powi(k as i32);
        }
        table
    }
}

/// Integer state counts of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counts {
    pub susceptible: usize,
    pub infected: usize,
    pub depleted: usize,
}

impl Counts {
    pub fn total(&self) -> usize {
        self.susceptible + self.infected + self.depleted
    }

    /// `(f_S, f_I, f_D)` as fractions of all cells.
    pub fn fractions(&self) -> (f64, f64, f64) {
        let n = self.total() as f64;
        (self.susceptible as f64 / n, self.infected as f64 / n, self.depleted as f64 / n)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    m: usize,
    cells: Vec<CellState>,
    iteration: u64,
    seed: u64,
}

impl Grid {
    pub fn filled(m: usize, state: CellState, seed: u64) -> Result<Self, LatticeError> {
        if m == 0 {
            return Err(LatticeError::EmptyGrid);
        }
        Ok(Self { m, cells: vec![state; m * m], iteration: 0, seed })
    }

    pub fn from_cells(m: usize, cells: Vec<CellState>, iteration: u64, seed: u64) -> Result<Self, LatticeError> {
        if m == 0 {
            return Err(LatticeError::EmptyGrid);
        }
        if cells.len() != m * m {
            return Err(LatticeError::CellCount { expected: m * m, got: cells.len() });
        }
        Ok(Self { m, cells, iteration, seed })
    }

    pub fn side(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn cells(&self) -> &[CellState] {
        &self.cells
    }

    pub fn get(&self, row: usize, col: usize) -> CellState {
        self.cells[row * self.m + col]
    }

    pub fn set(&mut self, row: usize, col: usize, state: CellState) {
        self.cells[row * self.m + col] = state;
    }

    pub fn check(&self, row: usize, col: usize) -> Result<(), LatticeError> {
        if row < self.m && col < self.m {
            Ok(())
        } else {
            Err(LatticeError::OutOfRange { row, col, m: self.m })
        }
    }

    pub fn counts(&self) -> Counts {
        let mut c = Counts::default();
        for s in &self.cells {
            match s {
                CellState::Depleted => c.depleted += 1,
                CellState::Susceptible => c.susceptible += 1,
                CellState::Infected => c.infected += 1,
            }
        }
        c
    }

    /// Coordinates of all cells in the given state, row-major.
    pub fn positions(&self, state: CellState) -> Vec<(usize, usize)> {
        self.cells.iter().enumerate().filter(|(_, s)| **s == state).map(|(i, _)| (i / self.m, i % self.m)).collect()
    }

    /// Number of infected cells among the eight neighbours of `(row, col)`.
    #[inline]
    fn infected_neighbors(&self, row: usize, col: usize, boundary: Boundary) -> usize {
        if row > 0 && col > 0 && row + 1 < self.m && col + 1 < self.m {
            let m = self.m;
            let up = &self.cells[(row - 1) * m + col - 1..(row - 1) * m + col + 2];
            let mid = &self.cells[row * m + col - 1..row * m + col + 2];
            let down = &self.cells[(row + 1) * m + col - 1..(row + 1) * m + col + 2];
            let hit = |s: &CellState| usize::from(*s == CellState::Infected);
            return up.iter().map(hit).sum::<usize>()
                + hit(&mid[0])
                + hit(&mid[2])
                + down.iter().map(hit).sum::<usize>();
        }
        let m = self.m as isize;
        let mut k = 0;
        for dr in -1isize..=1 {
            for dc in -1isize..=1 {
                if dr == 0 && dc == 0 {
                    continue;
                }
                let (mut r, mut c) = (row as isize + dr, col as isize + dc);
                match boundary {
                    Boundary::AbsorbingEdge => {
                        if r < 0 || c < 0 || r >= m || c >= m {
                            continue;
                        }
                    }
                    Boundary::Periodic => {
                        r = r.rem_euclid(m);
                        c = c.rem_euclid(m);
                    }
                }
                if self.cells[(r * m + c) as usize] == CellState::Infected {
                    k += 1;
                }
            }
        }
        k
    }
}

/// All in-grid cells at Chebyshev distance 1 from `(row, col)`.
pub fn moore_neighbors(row: usize, col: usize, m: usize) -> Result<Vec<(usize, usize)>, LatticeError> {
    if row >= m || col >= m {
        return Err(LatticeError::OutOfRange { row, col, m });
    }
    let mut out = Vec::with_capacity(8);
    for r in row.saturating_sub(1)..=(row + 1).min(m - 1) {
        for c in col.saturating_sub(1)..=(col + 1).min(m - 1) {
            if (r, c) != (row, col) {
                out.push((r, c));
            }
        }
    }
    Ok(out)
}

/// One synchronous update, parallel over rows.
pub fn step(grid: &Grid, params: &StepParams) -> Result<Grid, LatticeError> {
    step_with(grid, params, Execution::Parallel)
}

pub fn step_with(grid: &Grid, params: &StepParams, exec: Execution) -> Result<Grid, LatticeError> {
    params.validate()?;
    let m = grid.m;
    let table = params.infection_table();
    let mut next = vec![CellState::Depleted; m * m];

    let update_row = |row: usize, out: &mut [CellState]| {
        for (col, slot) in out.iter_mut().enumerate() {
            let mut state = match grid.get(row, col) {
                CellState::Depleted => CellState::Depleted,
                CellState::Susceptible => {
                    let k = grid.infected_neighbors(row, col, params.boundary);
                    if k > 0 && rng::cell_uniform(grid.seed, grid.iteration, row, col) < table[k] {
                        CellState::Infected
                    } else {
                        CellState::Susceptible
                    }
                }
                CellState::Infected => {
                    let u = rng::cell_uniform(grid.seed, grid.iteration, row, col);
                    if u < params.gamma {
                        CellState::Depleted
                    } else if u < params.gamma + params.mu {
                        CellState::Susceptible
                    } else {
                        CellState::Infected
                    }
                }
            };
            if params.boundary == Boundary::AbsorbingEdge
                && state == CellState::Infected
                && (row == 0 || col == 0 || row == m - 1 || col == m - 1)
            {
                state = CellState::Depleted;
            }
            *slot = state;
        }
    };

    match exec {
        Execution::Serial => next.chunks_mut(m).enumerate().for_each(|(row, out)| update_row(row, out)),
        Execution::Parallel => next.par_chunks_mut(m).enumerate().for_each(|(row, out)| update_row(row, out)),
    }

    Ok(Grid { m, cells: next, iteration: grid.iteration + 1, seed: grid.seed })
}

/// `(f_S, f_I, f_D)` of a grid.
pub fn counts(grid: &Grid) -> (f64, f64, f64) {
    grid.counts().fractions()
}

impl fmt::Display for Grid {
    /// Compact text rendering: `.` depleted, `s` susceptible, `I` infected.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.cells.chunks(self.m) {
            for s in row {
                let ch = match s {
                    CellState::Depleted => '.',
                    CellState::Susceptible => 's',
                    CellState::Infected => 'I',
                };
                write!(f, "{ch}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Plain P2 graymap, maxval 2, one code per cell, row-major.
pub fn to_pgm(grid: &Grid) -> String {
    let mut out = String::with_capacity(grid.len() * 2 + 64);
    out.push_str("P2\n");
    out.push_str(&format!("# m={} iteration={} seed={}\n", grid.m, grid.iteration, grid.seed));
    out.push_str(&format!("{} {}\n2\n", grid.m, grid.m));
    for row in grid.cells.chunks(grid.m) {
        let line: Vec<String> = row.iter().map(|s| s.code().to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// Sidecar metadata line written next to a snapshot.
pub fn pgm_sidecar(grid: &Grid) -> String {
    format!("m={} iteration={} seed={}\n", grid.m, grid.iteration, grid.seed)
}

/// Parses a snapshot written by [`to_pgm`] together with its sidecar line.
pub fn from_pgm(pgm: &str, sidecar: &str) -> Result<Grid, LatticeError> {
    let bad = |msg: &str| LatticeError::Pgm(msg.to_string());
    let mut meta = std::collections::HashMap::new();
    for kv in sidecar.split_whitespace() {
        let (k, v) = kv.split_once('=').ok_or_else(|| bad("sidecar entry without '='"))?;
        meta.insert(k, v.parse::<u64>().map_err(|_| bad("non-integer sidecar value"))?);
    }
    let get = |k: &str| meta.get(k).copied().ok_or_else(|| bad(&format!("sidecar missing {k}")));
    let (m, iteration, seed) = (get("m")? as usize, get("iteration")?, get("seed")?);

    let mut tokens = pgm.lines().filter(|l| !l.trim_start().starts_with('#')).flat_map(str::split_whitespace);
    if tokens.next() != Some("P2") {
        return Err(bad("missing P2 magic"));
    }
    let mut header = [0usize; 3];
    for h in header.iter_mut() {
        *h = tokens.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("truncated header"))?;
    }
    if header[0] != m || header[1] != m || header[2] != 2 {
        return Err(bad("header disagrees with sidecar"));
    }
    let cells = tokens
        .map(|t| t.parse::<u8>().ok().and_then(CellState::from_code).ok_or_else(|| bad("invalid cell code")))
        .collect::<Result<Vec<_>, _>>()?;
    Grid::from_cells(m, cells, iteration, seed)
}
