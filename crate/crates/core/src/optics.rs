//! Mean-field optical response of a driven three-level ladder.
//!
//! Levels are `g` (ground), `e` (intermediate) and `r` (Rydberg). The probe
//! couples g-e with Rabi frequency `omega_p`, the coupling laser couples e-r
//! with `omega_c`. In the rotating frame
//!
//! ```text
//! H = -dp |e><e| - (dp + dc_eff) |r><r| + omega_p/2 (|e><g| + h.c.) + omega_c/2 (|r><e| + h.c.)
//! ```
//!
//! with collapse operators `sqrt(gamma_e) |g><e|`, `sqrt(gamma_r) |e><r|` and
//! `sqrt(2 gamma_deph) |r><r|`. Interactions enter through the mean-field
//! shift `dc_eff = dc - shift_sign * V * f_R * rho_rr`, which makes the
//! steady state a scalar fixed-point problem in `rho_rr`.
//!
//! All frequencies and rates are in MHz (angular frequency divided by 2 pi).

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

/// Damping of the fixed-point iteration on `rho_rr`.
pub const DAMPING: f64 = 0.5;
pub const MAX_ITERATIONS: usize = 500;
/// Convergence tolerance on the self-consistency residual.
pub const TOLERANCE: f64 = 1e-10;
/// Iterations without residual improvement before falling back to bisection.
const STALL_WINDOW: usize = 20;
/// Bracketing step in `rho_rr` for the bisection fallback.
const BRACKET_STEP: f64 = 1e-3;

/// Rabi frequencies of the two perturbing beams in the experiment (MHz).
/// Reference values only; the model does not use them.
pub const PERTURBING_RABI_1_MHZ: f64 = 3.7;
pub const PERTURBING_RABI_2_MHZ: f64 = 2.2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OpticsError {
    #[error("{name} = {value} is invalid: {why}")]
    Parameter { name: &'static str, value: f64, why: &'static str },
    #[error("steady-state equations are singular at dc_eff = {0}")]
    Singular(f64),
    #[error("state did not converge (residual {0:e})")]
    NotConverged(f64),
    #[error("scan point {index} (dc = {delta_c}) did not converge, residual {residual:e}")]
    ScanNotConverged { index: usize, delta_c: f64, residual: f64 },
    #[error("sweep needs start < stop and at least 2 steps")]
    BadRange,
    #[error("domain weights must be positive and sum to 1 (sum = {0})")]
    BadWeights(f64),
    #[error("no domains given")]
    NoDomains,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldParams {
    /// Probe Rabi frequency.
    pub omega_p: f64,
    /// Coupling Rabi frequency.
    pub omega_c: f64,
    /// Probe detuning.
    pub delta_p: f64,
    /// Coupling detuning.
    pub delta_c: f64,
    /// Intermediate-state decay rate.
    pub gamma_e: f64,
    /// Rydberg decay rate (to the intermediate state).
    pub gamma_r: f64,
    /// Extra dephasing of the Rydberg level.
    pub gamma_deph: f64,
    /// Mean-field shift per unit Rydberg population at full density.
    pub v: f64,
    /// Resonant two-level optical depth.
    pub od: f64,
    /// Density fraction of this domain.
    pub f_r: f64,
    /// +1 shifts the resonance towards positive `delta_c` as `rho_rr`
    /// grows, -1 towards negative.
    pub shift_sign: f64,
}

impl Default for MeanFieldParams {
    /// Presentation defaults: jumps of a domain at `f_R = 0.33` land around
    /// `delta_c ~ -9 .. -20 MHz`, and a second domain is bistable above
    /// `f_R ~ 0.07`.
    fn default() -> Self {
        Self {
            omega_p: 2.0,
            omega_c: 5.0,
            delta_p: 0.0,
            delta_c: 0.0,
            gamma_e: 6.07,
            gamma_r: 0.01,
            gamma_deph: 0.1,
            v: 450.0,
            od: 2.0,
            f_r: 0.33,
            shift_sign: -1.0,
        }
    }
}

impl MeanFieldParams {
    pub fn validate(&self) -> Result<(), OpticsError> {
        let finite = [
            ("omega_p", self.omega_p),
            ("omega_c", self.omega_c),
            ("delta_p", self.delta_p),
            ("delta_c", self.delta_c),
            ("v", self.v),
        ];
        for (name, value) in finite {
            if !value.is_finite() {
                return Err(OpticsError::Parameter { name, value, why: "must be finite" });
            }
        }
        let rates =
            [("gamma_e", self.gamma_e), ("gamma_r", self.gamma_r), ("gamma_deph", self.gamma_deph), ("od", self.od)];
        for (name, value) in rates {
            if value < 0.0 || !value.is_finite() {
                return Err(OpticsError::Parameter { name, value, why: "must be >= 0" });
            }
        }
        if !(0.0..=1.0).contains(&self.f_r) {
            return Err(OpticsError::Parameter { name: "f_r", value: self.f_r, why: "must lie in [0, 1]" });
        }
        if self.shift_sign != 1.0 && self.shift_sign != -1.0 {
            return Err(OpticsError::Parameter { name: "shift_sign", value: self.shift_sign, why: "must be +1 or -1" });
        }
        Ok(())
    }

    /// Coupling detuning seen by the atoms at Rydberg population `rho_rr`.
    pub fn effective_detuning(&self, rho_rr: f64) -> f64 {
        self.delta_c - self.shift_sign * self.v * self.f_r * rho_rr
    }

    /// Feedback strength `V f_R`.
    pub fn interaction(&self) -> f64 {
        self.v * self.f_r
    }
}

/// Steady state of the linear master equation at a fixed detuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BareState {
    pub rho_rr: f64,
    pub rho_ee: f64,
    /// Probe coherence `rho_ge`.
    pub rho_ge: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub rho_rr: f64,
    /// `Im rho_ge`; positive for absorption.
    pub rho_ge_imag: f64,
    pub converged: bool,
    /// `|rho_rr - rho_rr^ss(dc_eff(rho_rr))|`.
    pub residual: f64,
}

const N: usize = 3;

fn idx(a: usize, b: usize) -> usize {
    a * N + b
}

fn mat_mul(a: &[[Complex64; N]; N], b: &[[Complex64; N]; N]) -> [[Complex64; N]; N] {
    let mut out = [[Complex64::new(0.0, 0.0); N]; N];
    for i in 0..N {
        for j in 0..N {
            for k in 0..N {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

fn dagger(a: &[[Complex64; N]; N]) -> [[Complex64; N]; N] {
    let mut out = [[Complex64::new(0.0, 0.0); N]; N];
    for i in 0..N {
        for j in 0..N {
            out[i][j] = a[j][i].conj();
        }
    }
    out
}

/// Liouvillian superoperator acting on row-major vectorised density
/// matrices, built column by column from its action on `|a><b|`.
fn liouvillian(p: &MeanFieldParams, delta_c_eff: f64) -> DMatrix<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let re = |x: f64| Complex64::new(x, 0.0);
    let mut h = [[zero; N]; N];
    h[1][1] = re(-p.delta_p);
    h[2][2] = re(-(p.delta_p + delta_c_eff));
    h[0][1] = re(p.omega_p / 2.0);
    h[1][0] = re(p.omega_p / 2.0);
    h[1][2] = re(p.omega_c / 2.0);
    h[2][1] = re(p.omega_c / 2.0);

    let jump = |from: usize, to: usize, rate: f64| {
        let mut l = [[zero; N]; N];
        l[to][from] = re(rate.sqrt());
        l
    };
    let collapse = [jump(1, 0, p.gamma_e), jump(2, 1, p.gamma_r), jump(2, 2, 2.0 * p.gamma_deph)];
    let collapse: Vec<_> = collapse.iter().map(|l| (*l, dagger(l), mat_mul(&dagger(l), l))).collect();

    let i = Complex64::new(0.0, 1.0);
    let mut m = DMatrix::from_element(N * N, N * N, zero);
    for a in 0..N {
        for b in 0..N {
            let mut rho = [[zero; N]; N];
            rho[a][b] = re(1.0);
            let hr = mat_mul(&h, &rho);
            let rh = mat_mul(&rho, &h);
            let mut out = [[zero; N]; N];
            for x in 0..N {
                for y in 0..N {
                    out[x][y] = -i * (hr[x][y] - rh[x][y]);
                }
            }
            for (l, ld, ldl) in &collapse {
                let lrl = mat_mul(&mat_mul(l, &rho), ld);
                let left = mat_mul(ldl, &rho);
                let right = mat_mul(&rho, ldl);
                for x in 0..N {
                    for y in 0..N {
                        out[x][y] += lrl[x][y] - 0.5 * (left[x][y] + right[x][y]);
                    }
                }
            }
            for x in 0..N {
                for y in 0..N {
                    m[(idx(x, y), idx(a, b))] = out[x][y];
                }
            }
        }
    }
    m
}

/// Solves `L rho = 0` with unit trace at a fixed coupling detuning.
pub fn bare_steady_state(p: &MeanFieldParams, delta_c_eff: f64) -> Result<BareState, OpticsError> {
    let mut m = liouvillian(p, delta_c_eff);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    // The ground-population equation is redundant with the others; replace
    // it by the trace condition.
    for c in 0..N * N {
        m[(0, c)] = zero;
    }
    for k in 0..N {
        m[(0, idx(k, k))] = one;
    }
    let mut rhs = DVector::from_element(N * N, zero);
    rhs[0] = one;
    let x = m.lu().solve(&rhs).ok_or(OpticsError::Singular(delta_c_eff))?;
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(OpticsError::Singular(delta_c_eff));
    }
    Ok(BareState { rho_rr: x[idx(2, 2)].re, rho_ee: x[idx(1, 1)].re, rho_ge: x[idx(0, 1)] })
}

/// Self-consistency residual `g(rho) = rho - rho_rr^ss(dc - s V f rho)`.
fn residual_fn(p: &MeanFieldParams, rho: f64) -> Result<f64, OpticsError> {
    Ok(rho - bare_steady_state(p, p.effective_detuning(rho))?.rho_rr)
}

fn finish(p: &MeanFieldParams, rho: f64) -> Result<SteadyState, OpticsError> {
    let bare = bare_steady_state(p, p.effective_detuning(rho))?;
    let residual = (rho - bare.rho_rr).abs();
    Ok(SteadyState {
        rho_rr: rho.clamp(0.0, 1.0),
        rho_ge_imag: bare.rho_ge.im,
        converged: residual < TOLERANCE,
        residual,
    })
}

/// Self-consistent steady state reached from the initial guess `seed`.
///
/// Damped fixed-point iteration first. If it cycles, stalls, or converges
/// far from `seed`, the root is bracketed by walking from `seed` along the
/// relaxation direction `-g(rho)` and refined by bisection, which always
/// lands on the nearest stable branch.
pub fn steady_state(p: &MeanFieldParams, seed: f64) -> Result<SteadyState, OpticsError> {
    p.validate()?;
    if !(0.0..=1.0).contains(&seed) {
        return Err(OpticsError::Parameter { name: "seed", value: seed, why: "must lie in [0, 1]" });
    }
    if p.interaction() == 0.0 {
        return finish(p, bare_steady_state(p, p.delta_c)?.rho_rr);
    }

    let mut rho = seed;
    let mut best = f64::INFINITY;
    let mut since_best = 0;
    for _ in 0..MAX_ITERATIONS {
        let g = residual_fn(p, rho)?;
        if g.abs() < TOLERANCE {
            // Damped steps can overshoot into another basin; a long move is
            // only trusted if no root lies between it and the seed.
            if (rho - seed).abs() <= BRACKET_STEP {
                return finish(p, rho);
            }
            break;
        }
        if g.abs() < best {
            best = g.abs();
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= STALL_WINDOW {
                break;
            }
        }
        rho = (rho - DAMPING * g).clamp(0.0, 1.0);
    }
    let rho = bracket_and_bisect(p, seed)?;
    finish(p, rho)
}

/// Largest self-consistent `rho_rr`: relaxes down from full population.
pub fn upper_steady_state(p: &MeanFieldParams) -> Result<SteadyState, OpticsError> {
    p.validate()?;
    finish(p, bracket_and_bisect(p, 1.0)?)
}

fn bracket_and_bisect(p: &MeanFieldParams, seed: f64) -> Result<f64, OpticsError> {
    let g0 = residual_fn(p, seed)?;
    if g0 == 0.0 {
        return Ok(seed);
    }
    // g(0) <= 0 and g(1) > 0, so walking against the sign of g always
    // finds a sign change before leaving [0, 1].
    let dir = if g0 > 0.0 { -1.0 } else { 1.0 };
    let (mut a, mut ga) = (seed, g0);
    let (mut b, mut gb);
    loop {
        b = (a + dir * BRACKET_STEP).clamp(0.0, 1.0);
        gb = residual_fn(p, b)?;
        if gb == 0.0 {
            return Ok(b);
        }
        if (gb > 0.0) != (ga > 0.0) || b == 0.0 || b == 1.0 {
            break;
        }
        a = b;
        ga = gb;
    }
    if (gb > 0.0) == (ga > 0.0) {
        return Ok(b);
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        let gm = residual_fn(p, mid)?;
        if gm == 0.0 {
            return Ok(mid);
        }
        if (gm > 0.0) == (ga > 0.0) {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
    }
    Ok(if ga.abs() < gb.abs() { a } else { b })
}

/// Resonant two-level `Im rho_ge` at probe Rabi frequency `omega_p` and
/// decay `gamma_e`, including saturation.
pub fn two_level_reference(omega_p: f64, gamma_e: f64) -> f64 {
    let ratio = omega_p / gamma_e;
    ratio / (1.0 + 2.0 * ratio * ratio)
}

/// Probe transmission `exp(-OD Im rho_ge / Im rho_ge^ref)`.
pub fn transmission(state: &SteadyState, p: &MeanFieldParams) -> Result<f64, OpticsError> {
    if !state.converged {
        return Err(OpticsError::NotConverged(state.residual));
    }
    if p.od == 0.0 || p.omega_p == 0.0 {
        return Ok(1.0);
    }
    let reference = two_level_reference(p.omega_p, p.gamma_e);
    let absorption = (state.rho_ge_imag / reference).max(0.0);
    Ok((-p.od * absorption).exp().clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Increasing `delta_c` (red to blue).
    Positive,
    /// Decreasing `delta_c`.
    Negative,
}

impl Direction {
    pub fn label(self) -> &'static str {
        match self {
            Direction::Positive => "+",
            Direction::Negative => "-",
        }
    }
}

/// `steps` equally spaced detunings from `start` to `stop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Sweep {
    pub fn new(start: f64, stop: f64, steps: usize) -> Self {
        Self { start, stop, steps }
    }

    fn validate(&self) -> Result<(), OpticsError> {
        if self.steps < 2 || self.start >= self.stop || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(OpticsError::BadRange);
        }
        Ok(())
    }

    /// Ascending detuning grid.
    pub fn values(&self) -> Vec<f64> {
        (0..self.steps).map(|i| self.start + (self.stop - self.start) * i as f64 / (self.steps - 1) as f64).collect()
    }

    /// Grid in scan order.
    pub fn ordered(&self, dir: Direction) -> Vec<f64> {
        let mut v = self.values();
        if dir == Direction::Negative {
            v.reverse();
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub delta_c: f64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HysteresisCurve {
    pub direction: Direction,
    /// Points in scan order.
    pub points: Vec<CurvePoint>,
}

impl HysteresisCurve {
    /// Transmission on the ascending detuning grid, whatever the direction.
    pub fn ascending(&self) -> Vec<f64> {
        let mut t: Vec<f64> = self.points.iter().map(|p| p.t).collect();
        if self.direction == Direction::Negative {
            t.reverse();
        }
        t
    }

    /// Consecutive points whose transmission differs by more than
    /// `min_height`, reported as the detuning midpoint and signed change
    /// in scan order.
    pub fn jumps(&self, min_height: f64) -> Vec<(f64, f64)> {
        self.points
            .windows(2)
            .filter(|w| (w[1].t - w[0].t).abs() > min_height)
            .map(|w| (0.5 * (w[0].delta_c + w[1].delta_c), w[1].t - w[0].t))
            .collect()
    }
}

/// Follows one branch across the sweep, one domain.
fn follow_branch(p: &MeanFieldParams, sweep: &Sweep, dir: Direction) -> Result<Vec<(f64, f64)>, OpticsError> {
    let mut out = Vec::with_capacity(sweep.steps);
    let mut prev: Option<f64> = None;
    for (index, delta_c) in sweep.ordered(dir).into_iter().enumerate() {
        let point = MeanFieldParams { delta_c, ..*p };
        let state = match (prev, dir) {
            (Some(rho), _) => steady_state(&point, rho)?,
            (None, Direction::Positive) => steady_state(&point, 0.0)?,
            (None, Direction::Negative) => upper_steady_state(&point)?,
        };
        if !state.converged {
            return Err(OpticsError::ScanNotConverged { index, delta_c, residual: state.residual });
        }
        prev = Some(state.rho_rr);
        out.push((delta_c, transmission(&state, &point)?));
    }
    Ok(out)
}

/// Sweeps `delta_c`, seeding every point with the previous point's
/// `rho_rr`. The first point starts from `rho_rr = 0` (positive) or from
/// the upper solution (negative).
pub fn scan_hysteresis(p: &MeanFieldParams, sweep: Sweep, dir: Direction) -> Result<HysteresisCurve, OpticsError> {
    p.validate()?;
    sweep.validate()?;
    let points = follow_branch(p, &sweep, dir)?.into_iter().map(|(delta_c, t)| CurvePoint { delta_c, t }).collect();
    Ok(HysteresisCurve { direction: dir, points })
}

/// How per-domain transmissions combine into the probe signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Composition {
    /// Domains in series along the probe: `T = prod T_i^w_i`.
    #[default]
    Multiplicative,
    /// `T = sum w_i T_i`.
    WeightedAverage,
}

pub fn compose_domains(
    domains: &[(MeanFieldParams, f64)],
    sweep: Sweep,
    dir: Direction,
) -> Result<HysteresisCurve, OpticsError> {
    compose_domains_with(domains, sweep, dir, Composition::Multiplicative)
}

/// Branch-follows every domain independently over the shared sweep and
/// combines the transmissions point by point.
pub fn compose_domains_with(
    domains: &[(MeanFieldParams, f64)],
    sweep: Sweep,
    dir: Direction,
    mode: Composition,
) -> Result<HysteresisCurve, OpticsError> {
    if domains.is_empty() {
        return Err(OpticsError::NoDomains);
    }
    let sum: f64 = domains.iter().map(|(_, w)| w).sum();
    if domains.iter().any(|(_, w)| *w <= 0.0 || w.is_nan()) || (sum - 1.0).abs() > 1e-9 {
        return Err(OpticsError::BadWeights(sum));
    }
    for (p, _) in domains {
        p.validate()?;
    }
    sweep.validate()?;

    let per_domain = domains.iter().map(|(p, _)| follow_branch(p, &sweep, dir)).collect::<Result<Vec<_>, _>>()?;
    let points = (0..sweep.steps)
        .map(|i| {
            let delta_c = per_domain[0][i].0;
            let t = match mode {
                Composition::Multiplicative => {
                    per_domain.iter().zip(domains).map(|(curve, (_, w))| curve[i].1.powf(*w)).product()
                }
                Composition::WeightedAverage => {
                    per_domain.iter().zip(domains).map(|(curve, (_, w))| w * curve[i].1).sum()
                }
            };
            CurvePoint { delta_c, t }
        })
        .collect();
    Ok(HysteresisCurve { direction: dir, points })
}

/// `T+ - T-` over (second-domain density, detuning).
#[derive(Debug, Clone, PartialEq)]
pub struct MultistabilityMap {
    pub f_r2: Vec<f64>,
    /// Ascending detunings.
    pub delta_c: Vec<f64>,
    /// Row-major, one row per `f_r2` entry.
    pub diff: Vec<f64>,
}

impl MultistabilityMap {
    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.delta_c.len();
        &self.diff[i * n..(i + 1) * n]
    }

    /// `f_R2,Delta_c,T_plus_minus_diff` triplets, row-major.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("f_R2,Delta_c,T_plus_minus_diff\n");
        for (i, f) in self.f_r2.iter().enumerate() {
            for (d, v) in self.delta_c.iter().zip(self.row(i)) {
                let _ = writeln!(out, "{f:.16e},{d:.16e},{v:.16e}");
            }
        }
        out
    }

    /// Dense matrix, one whitespace-separated row per `f_r2` value.
    pub fn matrix_text(&self) -> String {
        let mut out = String::new();
        for i in 0..self.f_r2.len() {
            let row: Vec<String> = self.row(i).iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

/// One value per line, for the matrix axis sidecars.
pub fn axis_text(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.16e}\n")).collect()
}

/// Two-domain transmission difference between scan directions.
///
/// Domain 1 is fixed at `f_r1`, domain 2 takes each value of `f_r2_values`;
/// both share `base` otherwise and weigh `weights`. Rows are independent and
/// computed in parallel.
pub fn multistability_map(
    base: &MeanFieldParams,
    f_r2_values: &[f64],
    sweep: Sweep,
    f_r1: f64,
    weights: (f64, f64),
    mode: Composition,
) -> Result<MultistabilityMap, OpticsError> {
    sweep.validate()?;
    let rows = f_r2_values
        .par_iter()
        .map(|&f_r2| {
            let domains = [
                (MeanFieldParams { f_r: f_r1, ..*base }, weights.0),
                (MeanFieldParams { f_r: f_r2, ..*base }, weights.1),
            ];
            let plus = compose_domains_with(&domains, sweep, Direction::Positive, mode)?;
            let minus = compose_domains_with(&domains, sweep, Direction::Negative, mode)?;
            Ok(plus.ascending().iter().zip(minus.ascending()).map(|(a, b)| a - b).collect::<Vec<f64>>())
        })
        .collect::<Result<Vec<_>, OpticsError>>()?;
    Ok(MultistabilityMap { f_r2: f_r2_values.to_vec(), delta_c: sweep.values(), diff: rows.concat() })
}

/// Contiguous index ranges `[lo, hi]` where `|values| > threshold`.
pub fn bands(values: &[f64], threshold: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, v) in values.iter().enumerate() {
        match (v.abs() > threshold, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, values.len() - 1));
    }
    out
}

/// `Delta_c,T,direction` rows for one or more curves.
pub fn curves_to_csv(curves: &[&HysteresisCurve]) -> String {
    let mut out = String::from("Delta_c,T,direction\n");
    for c in curves {
        for p in &c.points {
            let _ = writeln!(out, "{:.16e},{:.16e},{}", p.delta_c, p.t, c.direction.label());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_interaction() -> MeanFieldParams {
        MeanFieldParams { v: 0.0, ..MeanFieldParams::default() }
    }

    #[test]
    fn populations_are_physical() {
        let p = MeanFieldParams::default();
        for dc in [-30.0, -5.0, 0.0, 3.0, 40.0] {
            let s = bare_steady_state(&p, dc).unwrap();
            assert!((0.0..=1.0).contains(&s.rho_rr) && (0.0..=1.0).contains(&s.rho_ee));
            assert!(s.rho_ge.im >= 0.0);
        }
    }

    #[test]
    fn no_drive_no_coherence() {
        let p = MeanFieldParams { omega_p: 0.0, ..MeanFieldParams::default() };
        let s = steady_state(&p, 0.5).unwrap();
        assert!(s.converged);
        assert!(s.rho_rr.abs() < 1e-9 && s.rho_ge_imag.abs() < 1e-14);
        assert_eq!(transmission(&s, &p).unwrap(), 1.0);
    }

    #[test]
    fn zero_od_is_transparent() {
        let p = MeanFieldParams { od: 0.0, ..no_interaction() };
        let s = steady_state(&p, 0.0).unwrap();
        assert_eq!(transmission(&s, &p).unwrap(), 1.0);
    }

    #[test]
    fn ideal_eit_is_transparent() {
        let p = MeanFieldParams { gamma_r: 0.0, gamma_deph: 0.0, ..no_interaction() };
        let s = steady_state(&p, 0.0).unwrap();
        assert!((transmission(&s, &p).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_level_reference_transmission() {
        let p = MeanFieldParams { omega_c: 0.0, od: 1.0, ..no_interaction() };
        let s = steady_state(&p, 0.0).unwrap();
        assert!((transmission(&s, &p).unwrap() - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn unconverged_state_has_no_transmission() {
        let s = SteadyState { rho_rr: 0.1, rho_ge_imag: 0.1, converged: false, residual: 1e-3 };
        assert!(matches!(transmission(&s, &MeanFieldParams::default()), Err(OpticsError::NotConverged(_))));
    }

    #[test]
    fn parameter_checks() {
        let bad = MeanFieldParams { gamma_e: -1.0, ..MeanFieldParams::default() };
        assert!(bad.validate().is_err());
        let bad = MeanFieldParams { f_r: 1.5, ..MeanFieldParams::default() };
        assert!(steady_state(&bad, 0.0).is_err());
        assert!(steady_state(&MeanFieldParams::default(), 1.2).is_err());
        let sweep = Sweep::new(1.0, 0.0, 10);
        assert_eq!(
            scan_hysteresis(&MeanFieldParams::default(), sweep, Direction::Positive),
            Err(OpticsError::BadRange)
        );
        let sweep = Sweep::new(0.0, 1.0, 1);
        assert_eq!(
            scan_hysteresis(&MeanFieldParams::default(), sweep, Direction::Positive),
            Err(OpticsError::BadRange)
        );
    }

    #[test]
    fn weights_must_sum_to_one() {
        let p = MeanFieldParams::default();
        let sweep = Sweep::new(-10.0, 10.0, 5);
        assert!(matches!(compose_domains(&[(p, 0.5)], sweep, Direction::Positive), Err(OpticsError::BadWeights(_))));
        assert!(matches!(
            compose_domains(&[(p, 1.5), (p, -0.5)], sweep, Direction::Positive),
            Err(OpticsError::BadWeights(_))
        ));
        assert_eq!(compose_domains(&[], sweep, Direction::Positive), Err(OpticsError::NoDomains));
    }

    #[test]
    fn band_detection() {
        let v = [0.0, 0.2, 0.3, 0.0, 0.0, -0.4, 0.0, 0.5];
        assert_eq!(bands(&v, 0.1), vec![(1, 2), (5, 5), (7, 7)]);
        assert!(bands(&[0.0; 4], 0.1).is_empty());
    }

    #[test]
    fn sweep_order() {
        let s = Sweep::new(-1.0, 1.0, 3);
        assert_eq!(s.ordered(Direction::Positive), vec![-1.0, 0.0, 1.0]);
        assert_eq!(s.ordered(Direction::Negative), vec![1.0, 0.0, -1.0]);
    }

    #[test]
    fn curve_csv_layout() {
        let c = HysteresisCurve { direction: Direction::Negative, points: vec![CurvePoint { delta_c: 1.0, t: 0.5 }] };
        assert_eq!(curves_to_csv(&[&c]), "Delta_c,T,direction\n1.0000000000000000e0,5.0000000000000000e-1,-\n");
    }
}
