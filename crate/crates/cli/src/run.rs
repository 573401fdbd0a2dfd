//! Runs one experiment and writes its outputs plus a manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rydsim::epidemic::{self, DomainLayout, EpidemicParams};
use rydsim::fitting::{self, FitResult, ModelKind};
use rydsim::lattice::{self, Execution};
use rydsim::optics::{self, Direction, MeanFieldParams, Sweep};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::{to_toml, Config, Experiment, FitModelName};

pub const MANIFEST: &str = "manifest.txt";
/// Minimum |T+ - T-| counted as bistable in summaries.
pub const BISTABLE_THRESHOLD: f64 = 0.05;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Epidemic(#[from] epidemic::EpidemicError),
    #[error(transparent)]
    Lattice(#[from] lattice::LatticeError),
    #[error(transparent)]
    Optics(#[from] optics::OpticsError),
    #[error(transparent)]
    Fit(#[from] fitting::FitError),
    #[error("fit input: {0}")]
    Input(String),
    #[error("thread pool: {0}")]
    Pool(String),
}

/// What a finished run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub dir: PathBuf,
    /// Output file names with their SHA-256, in write order.
    pub files: Vec<(String, String)>,
    /// `key = value` summary lines.
    pub summary: Vec<String>,
}

struct Writer {
    dir: PathBuf,
    files: Vec<(String, String)>,
    summary: Vec<String>,
    fits: String,
}

impl Writer {
    fn write(&mut self, name: &str, contents: &str) -> Result<(), RunError> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|source| RunError::Io { path, source })?;
        self.files.push((name.to_string(), sha256_hex(contents.as_bytes())));
        Ok(())
    }

    fn note(&mut self, key: &str, value: impl std::fmt::Display) {
        self.summary.push(format!("{key} = {value}"));
    }

    /// Fit outcomes go into the manifest whether or not they succeed.
    fn fit(&mut self, label: &str, result: Result<FitResult, fitting::FitError>) -> Option<FitResult> {
        match result {
            Ok(r) => {
                self.fits.push_str(&r.to_block(label));
                self.fits.push('\n');
                Some(r)
            }
            Err(e) => {
                let _ = writeln!(self.fits, "[fit {label}]\nerror = {e}\n");
                None
            }
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Runs `experiment` into `out`, always leaving a manifest behind. On error
/// the manifest is marked partial and lists whatever was written.
pub fn run_experiment(config: &Config, experiment: Experiment, out: &Path) -> Result<Outcome, RunError> {
    fs::create_dir_all(out).map_err(|source| RunError::Io { path: out.to_path_buf(), source })?;
    let mut w = Writer { dir: out.to_path_buf(), files: Vec::new(), summary: Vec::new(), fits: String::new() };
    let start = Instant::now();
    let result = if config.run.parallel {
        dispatch(config, experiment, &mut w)
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .map_err(|e| RunError::Pool(e.to_string()))
            .and_then(|pool| pool.install(|| dispatch(config, experiment, &mut w)))
    };
    let elapsed = start.elapsed().as_secs_f64();

    let mut manifest = String::new();
    let _ = writeln!(manifest, "experiment = {}", experiment.name());
    let _ = writeln!(manifest, "version = {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(manifest, "seed = {}", config.run.seed);
    let _ = writeln!(manifest, "execution = {}", if config.run.parallel { "parallel" } else { "serial" });
    let _ = writeln!(manifest, "wall_time_s = {elapsed:.3}");
    match &result {
        Ok(()) => manifest.push_str("status = complete\n"),
        Err(e) => {
            let _ = writeln!(manifest, "status = partial\nerror = {e}");
        }
    }
    manifest.push_str("\n[files]\n");
    for (name, hash) in &w.files {
        let _ = writeln!(manifest, "{name} sha256={hash}");
    }
    if !w.summary.is_empty() {
        manifest.push_str("\n[summary]\n");
        for line in &w.summary {
            manifest.push_str(line);
            manifest.push('\n');
        }
    }
    if !w.fits.is_empty() {
        manifest.push('\n');
        manifest.push_str(&w.fits);
    }
    manifest.push_str("\n[config]\n");
    manifest.push_str(&to_toml(config));
    let path = out.join(MANIFEST);
    fs::write(&path, manifest).map_err(|source| RunError::Io { path, source })?;

    result.map(|()| Outcome { dir: out.to_path_buf(), files: w.files, summary: w.summary })
}

fn dispatch(config: &Config, experiment: Experiment, w: &mut Writer) -> Result<(), RunError> {
    let exec = if config.run.parallel { Execution::Parallel } else { Execution::Serial };
    match experiment {
        Experiment::SisScan => sis_scan(config, exec, w),
        Experiment::SirRun => sir_run(config, exec, w),
        Experiment::GradientSnapshot => gradient_snapshot(config, exec, w),
        Experiment::MultiDomainScan => multi_domain_scan(config, exec, w),
        Experiment::Hysteresis => hysteresis(config, w),
        Experiment::MultistabilityMap => multistability_map(config, w),
        Experiment::Fit => fit_file(config, w),
    }
}

fn scan_values(config: &Config) -> Vec<f64> {
    epidemic::linspace(config.scan.f_min, config.scan.f_max, config.scan.points)
}

fn fit_curve(kind: ModelKind, xs: &[f64], ys: &[f64]) -> Result<FitResult, fitting::FitError> {
    let init = fitting::auto_init(kind, xs, ys)?;
    fitting::fit(kind, xs, ys, &init)
}

fn sis_scan(config: &Config, exec: Execution, w: &mut Writer) -> Result<(), RunError> {
    let params = config.epidemic_params();
    let f = scan_values(config);
    let points = epidemic::scan(&params, None, &f, params.replicates, exec)?;
    w.write("scan.csv", &epidemic::scan_to_csv(&points))?;
    let ys: Vec<f64> = points.iter().map(|p| p.mean_f_i).collect();
    w.fit("sis-scan", fit_curve(ModelKind::Tanh, &f, &ys));
    let curve: Vec<(f64, f64)> = f.iter().copied().zip(ys).collect();
    let (x, slope) = fitting::susceptibility(&curve)?;
    w.note("max_susceptibility_f_R", x);
    w.note("max_susceptibility", slope);
    Ok(())
}

fn sir_run(config: &Config, exec: Execution, w: &mut Writer) -> Result<(), RunError> {
    let params = config.epidemic_params();
    let grid = epidemic::init_grid(&params, None, None)?;
    let (series, last) = epidemic::run_with(&params, grid, exec)?;
    w.write("timeseries.csv", &series.to_csv())?;
    w.write("final.pgm", &lattice::to_pgm(&last))?;
    w.write("final.pgm.meta", &lattice::pgm_sidecar(&last))?;
    let (t, peak) = series.peak();
    let end = series.final_record();
    w.note("peak_iteration", t);
    w.note("peak_f_I", peak);
    w.note("final_f_S", end.f_s);
    w.note("final_f_I", end.f_i);
    let ts: Vec<f64> = series.records.iter().map(|r| r.iteration as f64).collect();
    w.fit("sir-run", fit_curve(ModelKind::Gaussian, &ts, &series.infected()));
    Ok(())
}

fn gradient_snapshot(config: &Config, exec: Execution, w: &mut Writer) -> Result<(), RunError> {
    let params = config.epidemic_params();
    let (start, end) = (config.gradient.start, config.gradient.end);
    let grid = epidemic::init_grid(&params, None, Some((start, end)))?;
    let (series, last) = epidemic::run_with(&params, grid, exec)?;
    w.write("timeseries.csv", &series.to_csv())?;
    w.write("snapshot.pgm", &lattice::to_pgm(&last))?;
    w.write("snapshot.pgm.meta", &lattice::pgm_sidecar(&last))?;
    let wall = epidemic::detect_domain_wall(&last);
    let mut csv = String::from("row,col\n");
    for (r, c) in &wall {
        let _ = writeln!(csv, "{r},{c}");
    }
    w.write("wall.csv", &csv)?;
    w.note("wall_cells", wall.len());
    if let Some(col) = epidemic::mean_column(&wall) {
        w.note("wall_mean_column", col);
        w.note("wall_local_f_R", epidemic::gradient_fraction(start, end, col, params.m));
    }
    Ok(())
}

/// Number of distinct offsets, which is the number of steps to expect.
pub fn distinct_offsets(offsets: &[f64]) -> usize {
    let mut v = offsets.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.len()
}

fn multi_domain_scan(config: &Config, exec: Execution, w: &mut Writer) -> Result<(), RunError> {
    let params: EpidemicParams = config.epidemic_params();
    let layout = DomainLayout::horizontal_bands(params.m, &config.domains.offsets);
    let f = scan_values(config);
    let points = epidemic::scan(&params, Some(&layout), &f, params.replicates, exec)?;
    w.write("scan.csv", &epidemic::scan_to_csv(&points))?;
    let ys: Vec<f64> = points.iter().map(|p| p.mean_f_i).collect();
    let k = distinct_offsets(&config.domains.offsets);
    let kind = if k == 1 { ModelKind::Tanh } else { ModelKind::MultiTanh(k) };
    if let Some(r) = w.fit("multi-domain-scan", fit_curve(kind, &f, &ys)) {
        let centers: Vec<String> = r.model.centers().iter().map(|c| format!("{c:.6}")).collect();
        w.note("centers", centers.join(" "));
    }
    Ok(())
}

fn sweep(config: &Config) -> Sweep {
    Sweep::new(config.sweep.start, config.sweep.stop, config.sweep.steps)
}

fn hysteresis(config: &Config, w: &mut Writer) -> Result<(), RunError> {
    let p: MeanFieldParams = config.optics.params;
    let s = sweep(config);
    let plus = optics::scan_hysteresis(&p, s, Direction::Positive)?;
    let minus = optics::scan_hysteresis(&p, s, Direction::Negative)?;
    w.write("hysteresis.csv", &optics::curves_to_csv(&[&plus, &minus]))?;
    let diff: Vec<f64> = plus.ascending().iter().zip(minus.ascending()).map(|(a, b)| a - b).collect();
    let xs = s.values();
    let max = diff.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    w.note("max_abs_T_difference", max);
    for (lo, hi) in optics::bands(&diff, BISTABLE_THRESHOLD) {
        w.note("bistable_window", format!("{} {}", xs[lo], xs[hi]));
    }
    for (curve, name) in [(&plus, "jump_positive"), (&minus, "jump_negative")] {
        for (at, height) in curve.jumps(BISTABLE_THRESHOLD) {
            w.note(name, format!("{at} {height}"));
        }
    }
    Ok(())
}

fn multistability_map(config: &Config, w: &mut Writer) -> Result<(), RunError> {
    let m = &config.map;
    let f_r2 = epidemic::linspace(m.f_r2_min, m.f_r2_max, m.f_r2_points);
    let map = optics::multistability_map(
        &config.optics.params,
        &f_r2,
        sweep(config),
        m.f_r1,
        (m.weight1, 1.0 - m.weight1),
        config.optics.composition,
    )?;
    w.write("map.csv", &map.to_csv())?;
    w.write("map.matrix", &map.matrix_text())?;
    w.write("map.rows", &optics::axis_text(&map.f_r2))?;
    w.write("map.cols", &optics::axis_text(&map.delta_c))?;
    for (i, f) in map.f_r2.iter().enumerate() {
        let bands = optics::bands(map.row(i), BISTABLE_THRESHOLD);
        let spans: Vec<String> =
            bands.iter().map(|(lo, hi)| format!("[{}, {}]", map.delta_c[*lo], map.delta_c[*hi])).collect();
        w.note(&format!("bands f_R2={f:.4}"), spans.join(" "));
    }
    Ok(())
}

/// Reads two named columns of a CSV file.
pub fn read_columns(path: &Path, x: &str, y: &str) -> Result<(Vec<f64>, Vec<f64>), RunError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| RunError::Input(format!("{}: {e}", path.display())))?;
    let headers = reader.headers().map_err(|e| RunError::Input(e.to_string()))?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| RunError::Input(format!("column `{name}` not found in {}", path.display())))
    };
    let (xi, yi) = (find(x)?, find(y)?);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| RunError::Input(e.to_string()))?;
        let parse = |i: usize| {
            record
                .get(i)
                .and_then(|v| v.trim().parse::<f64>().ok())
                .ok_or_else(|| RunError::Input(format!("row {}: column {} is not a number", line + 2, i + 1)))
        };
        xs.push(parse(xi)?);
        ys.push(parse(yi)?);
    }
    Ok((xs, ys))
}

fn fit_file(config: &Config, w: &mut Writer) -> Result<(), RunError> {
    let f = &config.fit;
    if f.input.is_empty() {
        return Err(RunError::Input("fit.input is not set".into()));
    }
    let (xs, ys) = read_columns(Path::new(&f.input), &f.x_column, &f.y_column)?;
    let kind = match f.model {
        FitModelName::Tanh => ModelKind::Tanh,
        FitModelName::MultiTanh => ModelKind::MultiTanh(f.steps),
        FitModelName::Gaussian => ModelKind::Gaussian,
    };
    let result = fit_curve(kind, &xs, &ys)?;
    w.write("fit.txt", &result.to_block("fit"))?;
    w.fit("fit", Ok(result));
    Ok(())
}
