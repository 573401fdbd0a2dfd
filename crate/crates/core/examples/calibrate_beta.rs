//! Coarse scan of the per-contact infection probability for the SIS preset.
//!
//! For each beta this runs the 21-point threshold scan of the preset (m = 100,
//! 200 iterations, threshold-excess seeding) and fits
//! `A + B tanh((x - C) / w)`. Any beta whose fitted C falls in 0.55..0.65 is
//! admissible; the preset takes the smallest one that still keeps the steps
//! of multi-domain scans apart.
//!
//!     cargo run --release -p rydsim --example calibrate_beta [replicates] [beta...]
//!
//! Without betas the grid is 0.3..1.0 in 8 steps. `SEEDING=left-edge` or
//! `SEEDING=threshold-excess` overrides the seeding, `ALL_CELLS` switches the
//! observable to all-cell normalisation and `VERBOSE` prints each scan.

use rydsim::epidemic::{linspace, threshold_scan, EpidemicParams, SeedPolicy};
use rydsim::fitting::{auto_init, fit, ModelKind};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let replicates = args.first().and_then(|a| a.parse().ok()).unwrap_or(20);
    let betas: Vec<f64> =
        if args.len() > 1 { args[1..].iter().filter_map(|a| a.parse().ok()).collect() } else { linspace(0.3, 1.0, 8) };
    let f_values = linspace(0.0, 1.0, 21);
    println!("beta,A,B,C,omega,rms");
    for beta in betas {
        let mut params = EpidemicParams { beta, ..EpidemicParams::sis() };
        if std::env::var("SEEDING").as_deref() == Ok("threshold-excess") {
            params.seeding = SeedPolicy::ThresholdExcess;
        }
        if std::env::var("SEEDING").as_deref() == Ok("left-edge") {
            params.seeding = SeedPolicy::LeftEdge;
        }
        if std::env::var("ALL_CELLS").is_ok() {
            params.observable = rydsim::epidemic::Observable::AllCells;
        }
        let pts = threshold_scan(&params, &f_values, replicates).expect("valid scan");
        let ys: Vec<f64> = pts.iter().map(|p| p.mean_f_i).collect();
        let init = auto_init(ModelKind::Tanh, &f_values, &ys).expect("init");
        let r = fit(ModelKind::Tanh, &f_values, &ys, &init).expect("fit");
        let p = r.model.params();
        println!("{beta:.3},{:.4},{:.4},{:.4},{:.4},{:.4}", p[0], p[1], p[2], p[3], r.rms());
        if std::env::var("VERBOSE").is_ok() {
            for pt in &pts {
                eprintln!("  {:.2} {:.4} {:.4}", pt.f_r, pt.mean_f_i, pt.stddev);
            }
        }
    }
}
