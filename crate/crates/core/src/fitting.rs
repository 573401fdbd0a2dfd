//! Damped least-squares fits of step and peak curves.
//!
//! Three fixed model families cover the observables of the automaton and the
//! optical scans:
//!
//! * `Tanh`: `A + B tanh((x - C) / w)`
//! * `MultiTanh`: `A + sum_i B_i tanh((x - C_i) / w_i)`
//! * `Gaussian`: `B exp(-w (x - C)^2)`
//!
//! Widths are optimised as `ln w` so they stay positive; every parameter
//! vector that crosses the public API is in natural units.

use std::fmt::{self, Write as _};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

pub const INITIAL_DAMPING: f64 = 1e-3;
pub const DAMPING_FACTOR: f64 = 10.0;
pub const MAX_ITERATIONS: usize = 200;
pub const TOLERANCE: f64 = 1e-10;
const MAX_DAMPING: f64 = 1e16;

/// FWHM of `sech^2(u)` in units of u: `2 acosh(sqrt 2)`.
const SECH2_FWHM: f64 = 1.762_747_174_039_086;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("xs has {xs} entries but ys has {ys}")]
    LengthMismatch { xs: usize, ys: usize },
    #[error("{points} points cannot determine {params} parameters")]
    TooFewPoints { points: usize, params: usize },
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("expected {expected} initial parameters, got {got}")]
    InitLength { expected: usize, got: usize },
    #[error("width parameter {0} must be positive")]
    NonPositiveWidth(f64),
    #[error("multi-tanh needs at least one component")]
    NoComponents,
    #[error("found {found} derivative peaks but {wanted} components were requested ({} missing)", wanted - found)]
    TooFewPeaks { wanted: usize, found: usize },
    #[error("x values must be strictly monotone (violated at index {0})")]
    NotMonotone(usize),
    #[error("duplicate x value at index {0}")]
    DuplicateX(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Tanh,
    /// Number of tanh components.
    MultiTanh(usize),
    Gaussian,
}

impl ModelKind {
    pub fn n_params(self) -> usize {
        match self {
            ModelKind::Tanh => 4,
            ModelKind::MultiTanh(k) => 1 + 3 * k,
            ModelKind::Gaussian => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Tanh => "tanh",
            ModelKind::MultiTanh(_) => "multi-tanh",
            ModelKind::Gaussian => "gaussian",
        }
    }

    /// Positions of width parameters in the natural parameter vector.
    fn width_slots(self) -> Vec<usize> {
        match self {
            ModelKind::Tanh => vec![3],
            ModelKind::MultiTanh(k) => (0..k).map(|i| 3 + 3 * i).collect(),
            ModelKind::Gaussian => vec![2],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TanhStep {
    pub b: f64,
    pub c: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FitModel {
    Tanh { a: f64, b: f64, c: f64, omega: f64 },
    MultiTanh { a: f64, steps: Vec<TanhStep> },
    Gaussian { b: f64, c: f64, omega: f64 },
}

impl FitModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            FitModel::Tanh { .. } => ModelKind::Tanh,
            FitModel::MultiTanh { steps, .. } => ModelKind::MultiTanh(steps.len()),
            FitModel::Gaussian { .. } => ModelKind::Gaussian,
        }
    }

    /// Builds a model from a natural parameter vector laid out as
    /// `[A, B, C, w]`, `[A, B_1, C_1, w_1, ...]` or `[B, C, w]`.
    pub fn from_params(kind: ModelKind, p: &[f64]) -> Result<Self, FitError> {
        if p.len() != kind.n_params() {
            return Err(FitError::InitLength { expected: kind.n_params(), got: p.len() });
        }
        Ok(match kind {
            ModelKind::Tanh => FitModel::Tanh { a: p[0], b: p[1], c: p[2], omega: p[3] },
            ModelKind::MultiTanh(_) => FitModel::MultiTanh {
                a: p[0],
                steps: p[1..].chunks(3).map(|s| TanhStep { b: s[0], c: s[1], omega: s[2] }).collect(),
            },
            ModelKind::Gaussian => FitModel::Gaussian { b: p[0], c: p[1], omega: p[2] },
        })
    }

    pub fn params(&self) -> Vec<f64> {
        match self {
            FitModel::Tanh { a, b, c, omega } => vec![*a, *b, *c, *omega],
            FitModel::MultiTanh { a, steps } => {
                let mut v = vec![*a];
                for s in steps {
                    v.extend([s.b, s.c, s.omega]);
                }
                v
            }
            FitModel::Gaussian { b, c, omega } => vec![*b, *c, *omega],
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            FitModel::Tanh { a, b, c, omega } => a + b * ((x - c) / omega).tanh(),
            FitModel::MultiTanh { a, steps } => {
                a + steps.iter().map(|s| s.b * ((x - s.c) / s.omega).tanh()).sum::<f64>()
            }
            FitModel::Gaussian { b, c, omega } => b * (-omega * (x - c).powi(2)).exp(),
        }
    }

    /// Step centres (tanh families) or the peak position (Gaussian),
    /// ascending.
    pub fn centers(&self) -> Vec<f64> {
        match self {
            FitModel::Tanh { c, .. } | FitModel::Gaussian { c, .. } => vec![*c],
            FitModel::MultiTanh { steps, .. } => steps.iter().map(|s| s.c).collect(),
        }
    }

    fn sort_steps(&mut self) {
        if let FitModel::MultiTanh { steps, .. } = self {
            steps.sort_by(|a, b| a.c.total_cmp(&b.c));
        }
    }
}

impl fmt::Display for FitModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitModel::Tanh { a, b, c, omega } => {
                write!(f, "{a:.6} + {b:.6} tanh((x - {c:.6}) / {omega:.6})")
            }
            FitModel::MultiTanh { a, steps } => {
                write!(f, "{a:.6}")?;
                for s in steps {
                    write!(f, " + {:.6} tanh((x - {:.6}) / {:.6})", s.b, s.c, s.omega)?;
                }
                Ok(())
            }
            FitModel::Gaussian { b, c, omega } => write!(f, "{b:.6} exp(-{omega:.6} (x - {c:.6})^2)"),
        }
    }
}

/// Analytic partial derivatives of the model at `x` with respect to the
/// natural parameters.
pub fn model_jacobian(kind: ModelKind, p: &[f64], x: f64) -> Vec<f64> {
    match kind {
        ModelKind::Tanh => {
            let (b, c, w) = (p[1], p[2], p[3]);
            let u = (x - c) / w;
            let t = u.tanh();
            let s = 1.0 - t * t;
            vec![1.0, t, -b * s / w, -b * s * u / w]
        }
        ModelKind::MultiTanh(_) => {
            let mut j = vec![1.0];
            for q in p[1..].chunks(3) {
                let (b, c, w) = (q[0], q[1], q[2]);
                let u = (x - c) / w;
                let t = u.tanh();
                let s = 1.0 - t * t;
                j.extend([t, -b * s / w, -b * s * u / w]);
            }
            j
        }
        ModelKind::Gaussian => {
            let (b, c, w) = (p[0], p[1], p[2]);
            let d = x - c;
            let e = (-w * d * d).exp();
            vec![e, 2.0 * b * w * d * e, -b * d * d * e]
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: FitModel,
    /// Euclidean norm of the residual vector.
    pub residual_norm: f64,
    pub n_points: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Variance estimate per natural parameter; `inf` marks a parameter the
    /// data cannot determine.
    pub covariance_diag: Vec<f64>,
    pub diagnostic: String,
}

impl FitResult {
    pub fn rms(&self) -> f64 {
        self.residual_norm / (self.n_points as f64).sqrt()
    }

    /// Plain-text block appended to experiment manifests.
    pub fn to_block(&self, label: &str) -> String {
        let names: Vec<String> = match &self.model {
            FitModel::Tanh { .. } => ["A", "B", "C", "omega"].map(String::from).to_vec(),
            FitModel::MultiTanh { steps, .. } => {
                let mut n = vec!["A".to_string()];
                for i in 1..=steps.len() {
                    n.extend([format!("B_{i}"), format!("C_{i}"), format!("omega_{i}")]);
                }
                n
            }
            FitModel::Gaussian { .. } => ["B", "C", "omega"].map(String::from).to_vec(),
        };
        let mut out = String::new();
        let _ = writeln!(out, "[fit {label}]");
        let _ = writeln!(out, "model = {}", self.model.kind().name());
        for ((name, value), var) in names.iter().zip(self.model.params()).zip(&self.covariance_diag) {
            let _ = writeln!(out, "{name} = {value:.16e}");
            let _ = writeln!(out, "var_{name} = {var:.16e}");
        }
        let _ = writeln!(out, "residual_norm = {:.16e}", self.residual_norm);
        let _ = writeln!(out, "rms = {:.16e}", self.rms());
        let _ = writeln!(out, "iterations = {}", self.iterations);
        let _ = writeln!(out, "converged = {}", self.converged);
        let _ = writeln!(out, "diagnostic = {}", self.diagnostic);
        out
    }
}

fn to_internal(kind: ModelKind, natural: &[f64]) -> Vec<f64> {
    let mut p = natural.to_vec();
    for i in kind.width_slots() {
        p[i] = p[i].ln();
    }
    p
}

fn to_natural(kind: ModelKind, internal: &[f64]) -> Vec<f64> {
    let mut p = internal.to_vec();
    for i in kind.width_slots() {
        p[i] = p[i].exp();
    }
    p
}

struct Problem<'a> {
    kind: ModelKind,
    xs: &'a [f64],
    ys: &'a [f64],
}

impl Problem<'_> {
    fn residuals(&self, internal: &[f64]) -> DVector<f64> {
        let model =
            FitModel::from_params(self.kind, &to_natural(self.kind, internal)).expect("parameter length fixed by kind");
        DVector::from_iterator(self.xs.len(), self.xs.iter().zip(self.ys).map(|(&x, &y)| model.eval(x) - y))
    }

    /// Jacobian in natural (`internal == false`) or log-width coordinates.
    fn jacobian(&self, internal_p: &[f64], internal: bool) -> DMatrix<f64> {
        let natural = to_natural(self.kind, internal_p);
        let slots = self.kind.width_slots();
        let n = self.xs.len();
        let np = self.kind.n_params();
        let mut j = DMatrix::zeros(n, np);
        for (row, &x) in self.xs.iter().enumerate() {
            let g = model_jacobian(self.kind, &natural, x);
            for (col, v) in g.into_iter().enumerate() {
                // d/d(ln w) = w d/dw
                j[(row, col)] = if internal && slots.contains(&col) { v * natural[col] } else { v };
            }
        }
        j
    }
}

fn check_inputs(kind: ModelKind, xs: &[f64], ys: &[f64]) -> Result<(), FitError> {
    if let ModelKind::MultiTanh(0) = kind {
        return Err(FitError::NoComponents);
    }
    if xs.len() != ys.len() {
        return Err(FitError::LengthMismatch { xs: xs.len(), ys: ys.len() });
    }
    if xs.len() < kind.n_params() {
        return Err(FitError::TooFewPoints { points: xs.len(), params: kind.n_params() });
    }
    if let Some(i) = xs.iter().zip(ys).position(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(FitError::NonFinite(i));
    }
    Ok(())
}

/// Levenberg-Marquardt fit starting from the natural parameter vector `init`.
///
/// Numerical trouble (singular normal equations, stalled damping, iteration
/// cap) yields `converged == false` with a diagnostic rather than an error.
pub fn fit(kind: ModelKind, xs: &[f64], ys: &[f64], init: &[f64]) -> Result<FitResult, FitError> {
    check_inputs(kind, xs, ys)?;
    if init.len() != kind.n_params() {
        return Err(FitError::InitLength { expected: kind.n_params(), got: init.len() });
    }
    for i in kind.width_slots() {
        if init[i] <= 0.0 || !init[i].is_finite() {
            return Err(FitError::NonPositiveWidth(init[i]));
        }
    }

    let problem = Problem { kind, xs, ys };
    let np = kind.n_params();
    let mut p = to_internal(kind, init);
    let mut r = problem.residuals(&p);
    let mut cost = 0.5 * r.norm_squared();
    let mut lambda = INITIAL_DAMPING;
    let mut converged = false;
    let mut diagnostic = String::from("iteration limit reached");
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        let j = problem.jacobian(&p, true);
        let g = j.transpose() * &r;
        if cost == 0.0 || g.amax() < TOLERANCE {
            converged = true;
            diagnostic = "gradient below tolerance".into();
            break;
        }
        let h = j.transpose() * &j;
        let dmax = h.diagonal().max().max(f64::MIN_POSITIVE);
        iterations += 1;

        let mut accepted = false;
        while lambda <= MAX_DAMPING {
            let mut a = h.clone();
            for i in 0..np {
                a[(i, i)] += lambda * h[(i, i)].max(1e-12 * dmax);
            }
            let step = match a.cholesky() {
                Some(ch) => ch.solve(&(-&g)),
                None => {
                    lambda *= DAMPING_FACTOR;
                    continue;
                }
            };
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let r_trial = problem.residuals(&trial);
            let cost_trial = 0.5 * r_trial.norm_squared();
            if cost_trial.is_finite() && cost_trial < cost {
                let rel = (cost - cost_trial) / cost;
                p = trial;
                r = r_trial;
                cost = cost_trial;
                lambda = (lambda / DAMPING_FACTOR).max(1e-15);
                accepted = true;
                if rel < TOLERANCE {
                    converged = true;
                    diagnostic = "relative residual change below tolerance".into();
                }
                break;
            }
            lambda *= DAMPING_FACTOR;
        }
        if converged {
            break;
        }
        if !accepted {
            // No descent direction left at any damping. At the rounding floor
            // of a zero-residual problem that is a solution; otherwise report.
            let floor = 1e-28 * (ys.iter().map(|y| y * y).sum::<f64>() + xs.len() as f64);
            converged = cost <= floor;
            diagnostic = if converged {
                "residual at rounding floor".into()
            } else {
                format!("damping exceeded {MAX_DAMPING:e} without descent (singular or indeterminate system)")
            };
            break;
        }
    }

    let natural = to_natural(kind, &p);
    let covariance_diag = covariance_diag(&problem, &p, 2.0 * cost);
    let mut model = FitModel::from_params(kind, &natural)?;
    model.sort_steps();
    let covariance_diag = reorder_covariance(kind, &natural, covariance_diag);
    Ok(FitResult {
        model,
        residual_norm: (2.0 * cost).sqrt(),
        n_points: xs.len(),
        iterations,
        converged,
        covariance_diag,
        diagnostic,
    })
}

/// Matches the covariance entries to the centre-sorted component order.
fn reorder_covariance(kind: ModelKind, natural: &[f64], cov: Vec<f64>) -> Vec<f64> {
    let ModelKind::MultiTanh(k) = kind else { return cov };
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| natural[2 + 3 * a].total_cmp(&natural[2 + 3 * b]));
    let mut out = vec![cov[0]];
    for i in order {
        out.extend_from_slice(&cov[1 + 3 * i..4 + 3 * i]);
    }
    out
}

/// `s^2 diag((J^T J)^-1)` in natural parameters, with column scaling and an
/// eigenvalue cutoff; parameters that are negligible or touch a null
/// direction get `inf`.
fn covariance_diag(problem: &Problem<'_>, internal: &[f64], rss: f64) -> Vec<f64> {
    let j = problem.jacobian(internal, false);
    let np = j.ncols();
    let dof = problem.xs.len().saturating_sub(np).max(1) as f64;
    let s2 = rss / dof;
    let h = j.transpose() * &j;
    let scale: Vec<f64> = (0..np).map(|i| h[(i, i)].sqrt()).collect();
    // A column this small relative to the strongest one means the parameter
    // has no measurable effect on the model.
    let strongest = scale.iter().copied().fold(0.0, f64::max);
    let live: Vec<usize> = (0..np).filter(|&i| scale[i].is_finite() && scale[i] > 1e-8 * strongest).collect();
    let mut out = vec![f64::INFINITY; np];
    if live.is_empty() {
        return out;
    }
    let hs = DMatrix::from_fn(live.len(), live.len(), |a, b| h[(live[a], live[b])] / (scale[live[a]] * scale[live[b]]));
    let eig = SymmetricEigen::new(hs);
    let cutoff = 1e-12 * eig.eigenvalues.max().max(0.0);
    for (a, &i) in live.iter().enumerate() {
        let mut acc = 0.0;
        let mut null_weight = 0.0;
        for k in 0..live.len() {
            let v = eig.eigenvectors[(a, k)];
            let lam = eig.eigenvalues[k];
            if lam > cutoff {
                acc += v * v / lam;
            } else {
                null_weight += v * v;
            }
        }
        out[i] = if null_weight > 1e-6 { f64::INFINITY } else { s2 * acc / (scale[i] * scale[i]) };
    }
    out
}

fn sorted_pairs(xs: &[f64], ys: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    (idx.iter().map(|&i| xs[i]).collect(), idx.iter().map(|&i| ys[i]).collect())
}

/// Derivative estimate at every sample: central differences inside,
/// one-sided at the ends. Requires at least two points with distinct x.
fn derivative(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    (0..n)
        .map(|i| {
            let (a, b) = match i {
                0 => (0, 1),
                _ if i == n - 1 => (n - 2, n - 1),
                _ => (i - 1, i + 1),
            };
            (ys[b] - ys[a]) / (xs[b] - xs[a])
        })
        .collect()
}

/// Linear-interpolated x where `ys` first crosses `level` walking from
/// `from` in direction `dir`.
fn crossing(xs: &[f64], ys: &[f64], from: usize, dir: isize, level: f64) -> Option<f64> {
    let mut i = from as isize;
    let above = ys[from] >= level;
    loop {
        let next = i + dir;
        if next < 0 || next as usize >= xs.len() {
            return None;
        }
        let (a, b) = (i as usize, next as usize);
        if (ys[b] >= level) != above {
            let t = (level - ys[a]) / (ys[b] - ys[a]);
            return Some(xs[a] + t * (xs[b] - xs[a]));
        }
        i = next;
    }
}

/// Heuristic starting point for [`fit`].
pub fn auto_init(kind: ModelKind, xs: &[f64], ys: &[f64]) -> Result<Vec<f64>, FitError> {
    check_inputs(kind, xs, ys)?;
    let (xs, ys) = sorted_pairs(xs, ys);
    let n = xs.len();
    let span = (xs[n - 1] - xs[0]).abs().max(f64::MIN_POSITIVE);
    let ymin = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let ymax = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    match kind {
        ModelKind::Tanh => {
            let a = 0.5 * (ymin + ymax);
            let half = 0.5 * (ymax - ymin);
            let b = if ys[n - 1] >= ys[0] { half } else { -half };
            let d = derivative(&xs, &ys);
            let peak = argmax_abs(&d);
            let c = xs[peak];
            // tanh crosses A -/+ B/2 at u = -/+ atanh(1/2).
            let lo = crossing(&xs, &ys, peak, -1, a - 0.5 * b);
            let hi = crossing(&xs, &ys, peak, 1, a + 0.5 * b);
            let omega = match (lo, hi) {
                (Some(l), Some(h)) if h > l => (h - l) / (2.0 * 0.5f64.atanh()),
                _ => span / 10.0,
            };
            Ok(vec![a, b, c, omega.max(span * 1e-6)])
        }
        ModelKind::MultiTanh(k) => {
            let a = 0.5 * (ys[0] + ys[n - 1]);
            let d = derivative(&xs, &ys);
            let peaks = separated_peaks(&xs, &d, k);
            if peaks.len() < k {
                return Err(FitError::TooFewPeaks { wanted: k, found: peaks.len() });
            }
            let mut p = vec![a];
            let mut comps: Vec<(f64, f64, f64)> = peaks
                .into_iter()
                .map(|(i, fwhm)| {
                    let omega = (fwhm / SECH2_FWHM).max(span * 1e-6);
                    (d[i] * omega, xs[i], omega)
                })
                .collect();
            comps.sort_by(|a, b| a.1.total_cmp(&b.1));
            for (b, c, w) in comps {
                p.extend([b, c, w]);
            }
            Ok(p)
        }
        ModelKind::Gaussian => {
            let peak = ys.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).unwrap();
            let b = ys[peak];
            let c = xs[peak];
            let half: Vec<f64> = [crossing(&xs, &ys, peak, -1, 0.5 * b), crossing(&xs, &ys, peak, 1, 0.5 * b)]
                .into_iter()
                .flatten()
                .map(|x| (x - c).abs())
                .collect();
            let hwhm = if half.is_empty() { span / 4.0 } else { half.iter().sum::<f64>() / half.len() as f64 };
            Ok(vec![b, c, std::f64::consts::LN_2 / hwhm.max(span * 1e-6).powi(2)])
        }
    }
}

fn argmax_abs(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    best
}

/// Up to `k` local maxima of `|d|`, largest first, each with the full width
/// at half maximum of its peak. A candidate inside an accepted peak's
/// half-maximum extent is skipped.
fn separated_peaks(xs: &[f64], d: &[f64], k: usize) -> Vec<(usize, f64)> {
    let n = d.len();
    let mag: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let mut candidates: Vec<usize> = (0..n)
        .filter(|&i| {
            let left = i == 0 || mag[i] > mag[i - 1] || (mag[i] == mag[i - 1] && i >= 2 && mag[i] > mag[i - 2]);
            let right = i == n - 1 || mag[i] >= mag[i + 1];
            mag[i] > 0.0 && left && right
        })
        .collect();
    candidates.sort_by(|&a, &b| mag[b].total_cmp(&mag[a]).then(a.cmp(&b)));

    let spacing = (xs[n - 1] - xs[0]) / (n - 1) as f64;
    let mut chosen: Vec<(usize, f64, f64, f64)> = Vec::new(); // index, fwhm, lo, hi
    for i in candidates {
        if chosen.len() == k {
            break;
        }
        if chosen.iter().any(|&(_, _, lo, hi)| xs[i] >= lo && xs[i] <= hi) {
            continue;
        }
        let level = 0.5 * mag[i];
        let lo = crossing(xs, &mag, i, -1, level).unwrap_or(xs[0] - 0.5 * spacing);
        let hi = crossing(xs, &mag, i, 1, level).unwrap_or(xs[n - 1] + 0.5 * spacing);
        let fwhm = (hi - lo).max(spacing);
        chosen.push((i, fwhm, lo, hi));
    }
    chosen.into_iter().map(|(i, w, _, _)| (i, w)).collect()
}

/// Location and magnitude of the largest `|dy/dx|` along a sampled curve.
///
/// Central differences inside, one-sided at the ends; ties go to the
/// smallest x.
pub fn susceptibility(curve: &[(f64, f64)]) -> Result<(f64, f64), FitError> {
    if curve.len() < 3 {
        return Err(FitError::TooFewPoints { points: curve.len(), params: 3 });
    }
    if let Some(i) = curve.iter().position(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(FitError::NonFinite(i));
    }
    let increasing = curve[1].0 > curve[0].0;
    for i in 1..curve.len() {
        let (a, b) = (curve[i - 1].0, curve[i].0);
        if a == b {
            return Err(FitError::DuplicateX(i));
        }
        if (b > a) != increasing {
            return Err(FitError::NotMonotone(i));
        }
    }
    let xs: Vec<f64> = curve.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = curve.iter().map(|p| p.1).collect();
    let d = derivative(&xs, &ys);
    let mut best = 0;
    for i in 1..d.len() {
        let (cur, top) = (d[i].abs(), d[best].abs());
        if cur > top || (cur == top && xs[i] < xs[best]) {
            best = i;
        }
    }
    Ok((xs[best], d[best].abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn model_param_roundtrip() {
        let m = FitModel::from_params(ModelKind::MultiTanh(2), &[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7]).unwrap();
        assert_eq!(m.params(), vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7]);
        assert_eq!(m.centers(), vec![0.3, 0.6]);
        assert!(FitModel::from_params(ModelKind::Tanh, &[1.0]).is_err());
    }

    #[test]
    fn constant_data_flags_center() {
        let xs = grid(0.0, 1.0, 40);
        let ys = vec![0.5; 40];
        let init = auto_init(ModelKind::Tanh, &xs, &ys).unwrap();
        let r = fit(ModelKind::Tanh, &xs, &ys, &init).unwrap();
        assert!(r.converged, "{}", r.diagnostic);
        let p = r.model.params();
        assert!((p[0] - 0.5).abs() < 1e-9 && p[1].abs() < 1e-9, "{p:?}");
        assert!(r.covariance_diag[2] > 1e6, "{r:?}");
    }

    #[test]
    fn constant_data_from_generic_start() {
        let xs = grid(0.0, 1.0, 40);
        let ys = vec![0.5; 40];
        let r = fit(ModelKind::Tanh, &xs, &ys, &[0.3, 0.1, 0.5, 0.1]).unwrap();
        let p = r.model.params();
        assert!((p[0] - 0.5).abs() < 1e-6 && p[1].abs() < 1e-6, "{r:?}");
        assert!(r.covariance_diag[2] > 1e6, "{r:?}");
    }

    #[test]
    fn input_errors() {
        assert!(matches!(fit(ModelKind::Tanh, &[0.0, 1.0], &[0.0], &[0.0; 4]), Err(FitError::LengthMismatch { .. })));
        assert!(matches!(fit(ModelKind::Tanh, &[0.0; 3], &[0.0; 3], &[0.0; 4]), Err(FitError::TooFewPoints { .. })));
        let xs = grid(0.0, 1.0, 10);
        assert!(matches!(fit(ModelKind::Tanh, &xs, &xs, &[0.0, 1.0, 0.5, -0.1]), Err(FitError::NonPositiveWidth(_))));
        assert_eq!(fit(ModelKind::MultiTanh(0), &xs, &xs, &[0.0]), Err(FitError::NoComponents));
    }

    #[test]
    fn too_few_peaks_named() {
        let xs = grid(0.0, 1.0, 50);
        let ys: Vec<f64> = xs.iter().map(|x| ((x - 0.5) / 0.05).tanh()).collect();
        let err = auto_init(ModelKind::MultiTanh(3), &xs, &ys).unwrap_err();
        assert_eq!(err, FitError::TooFewPeaks { wanted: 3, found: 1 });
        assert!(err.to_string().contains("2 missing"));
    }

    #[test]
    fn tanh_init_near_steepest_point() {
        let xs = grid(0.0, 1.0, 60);
        let ys: Vec<f64> = xs.iter().map(|x| 0.2 - 0.3 * ((x - 0.37) / 0.06).tanh()).collect();
        let p = auto_init(ModelKind::Tanh, &xs, &ys).unwrap();
        assert!((p[2] - 0.37).abs() <= 1.0 / 59.0, "{p:?}");
        assert!(p[1] < 0.0);
        assert!((p[3] - 0.06).abs() < 0.02, "{p:?}");
    }

    #[test]
    fn gaussian_init_at_argmax() {
        let xs = grid(0.0, 100.0, 101);
        let ys: Vec<f64> = xs.iter().map(|t| 0.98 * (-0.0041 * (t - 27.6f64).powi(2)).exp()).collect();
        let p = auto_init(ModelKind::Gaussian, &xs, &ys).unwrap();
        assert!((p[1] - 27.6).abs() <= 1.0);
        assert!((p[2] / 0.0041 - 1.0).abs() < 0.1, "{p:?}");
    }

    #[test]
    fn susceptibility_cases() {
        let line: Vec<(f64, f64)> = grid(0.0, 1.0, 11).into_iter().map(|x| (x, x)).collect();
        assert_eq!(susceptibility(&line).unwrap(), (0.0, 1.0));
        let rev: Vec<_> = line.iter().rev().copied().collect();
        assert_eq!(susceptibility(&rev).unwrap(), (0.0, 1.0));
        let dup = vec![(0.0, 0.0), (0.5, 1.0), (0.5, 2.0)];
        assert_eq!(susceptibility(&dup), Err(FitError::DuplicateX(2)));
        let zig = vec![(0.0, 0.0), (0.5, 1.0), (0.2, 2.0)];
        assert_eq!(susceptibility(&zig), Err(FitError::NotMonotone(2)));
        assert!(susceptibility(&line[..2]).is_err());
    }

    #[test]
    fn susceptibility_of_tanh_step() {
        let curve: Vec<(f64, f64)> = grid(0.0, 1.0, 2001).into_iter().map(|x| (x, ((x - 0.5) / 0.1).tanh())).collect();
        let (x, s) = susceptibility(&curve).unwrap();
        assert!((x - 0.5).abs() < 1e-3);
        assert!((s - 10.0).abs() < 1e-3, "{s}");
    }

    #[test]
    fn fit_block_lists_parameters() {
        let xs = grid(0.0, 1.0, 30);
        let ys: Vec<f64> = xs.iter().map(|x| 0.47 + 0.47 * ((x - 0.6) / 0.05).tanh()).collect();
        let r = fit(ModelKind::Tanh, &xs, &ys, &auto_init(ModelKind::Tanh, &xs, &ys).unwrap()).unwrap();
        let block = r.to_block("sis");
        assert!(block.starts_with("[fit sis]\nmodel = tanh\nA = "));
        assert!(block.contains("\nomega = "));
        assert!(block.contains("converged = true"));
    }
}
