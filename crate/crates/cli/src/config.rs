//! Experiment configuration.
//!
//! Configs are flat TOML: a handful of `[section]` tables holding scalar or
//! array keys. Every accepted key is listed in [`SCHEMA`], which drives type
//! and range checks, the `--help` listing and serialisation. Parsing collects
//! every problem it finds instead of stopping at the first.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use rydsim::epidemic::{EpidemicParams, Observable, SeedPolicy};
use rydsim::lattice::Boundary;
use rydsim::optics::{Composition, MeanFieldParams};
use toml::{Table, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    SisScan,
    SirRun,
    GradientSnapshot,
    MultiDomainScan,
    Hysteresis,
    MultistabilityMap,
    Fit,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::SisScan,
        Experiment::SirRun,
        Experiment::GradientSnapshot,
        Experiment::MultiDomainScan,
        Experiment::Hysteresis,
        Experiment::MultistabilityMap,
        Experiment::Fit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::SisScan => "sis-scan",
            Experiment::SirRun => "sir-run",
            Experiment::GradientSnapshot => "gradient-snapshot",
            Experiment::MultiDomainScan => "multi-domain-scan",
            Experiment::Hysteresis => "hysteresis",
            Experiment::MultistabilityMap => "multistability-map",
            Experiment::Fit => "fit",
        }
    }

    /// Epidemic preset used when the config does not name one.
    pub fn default_preset(self) -> Preset {
        if self == Experiment::SirRun {
            Preset::Sir
        } else {
            Preset::Sis
        }
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL.into_iter().find(|e| e.name() == s).ok_or_else(|| format!("unknown experiment `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Sis,
    Sir,
}

impl Preset {
    fn name(self) -> &'static str {
        match self {
            Preset::Sis => "sis",
            Preset::Sir => "sir",
        }
    }

    fn params(self) -> EpidemicParams {
        match self {
            Preset::Sis => EpidemicParams::sis(),
            Preset::Sir => EpidemicParams::sir(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Seeding {
    LeftEdge,
    ThresholdExcess,
    /// One infected cell at the grid centre.
    Center,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModelName {
    Tanh,
    MultiTanh,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSection {
    pub seed: u64,
    pub parallel: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpidemicSection {
    pub preset: Preset,
    pub m: usize,
    pub boundary: Boundary,
    pub iterations: usize,
    pub beta: f64,
    pub mu: f64,
    pub gamma: f64,
    pub f_r: f64,
    pub f_rc: f64,
    pub seeding: Seeding,
    pub replicates: usize,
    pub observable: Observable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSection {
    pub f_min: f64,
    pub f_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainsSection {
    pub offsets: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientSection {
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpticsSection {
    pub params: MeanFieldParams,
    pub composition: Composition,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSection {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapSection {
    pub f_r1: f64,
    pub f_r2_min: f64,
    pub f_r2_max: f64,
    pub f_r2_points: usize,
    pub weight1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitSection {
    pub model: FitModelName,
    pub steps: usize,
    pub input: String,
    pub x_column: String,
    pub y_column: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub run: RunSection,
    pub epidemic: EpidemicSection,
    pub scan: ScanSection,
    pub domains: DomainsSection,
    pub gradient: GradientSection,
    pub optics: OpticsSection,
    pub sweep: SweepSection,
    pub map: MapSection,
    pub fit: FitSection,
}

#[derive(Debug, Clone, Copy)]
pub enum Kind {
    Int { min: i64, max: i64 },
    Float { min: f64, max: f64 },
    Bool,
    Choice(&'static [&'static str]),
    FloatList { min: f64, max: f64 },
    Text,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Int { min, max } if *max == i64::MAX => write!(f, "integer >= {min}"),
            Kind::Int { min, max } => write!(f, "integer in [{min}, {max}]"),
            Kind::Float { min, max } if min.is_infinite() && max.is_infinite() => write!(f, "number"),
            Kind::Float { min, max } if max.is_infinite() => write!(f, "number >= {min}"),
            Kind::Float { min, max } => write!(f, "number in [{min}, {max}]"),
            Kind::Bool => write!(f, "true | false"),
            Kind::Choice(options) => write!(f, "{}", options.join(" | ")),
            Kind::FloatList { min, max } => write!(f, "list of numbers in [{min}, {max}]"),
            Kind::Text => write!(f, "string"),
        }
    }
}

pub struct KeySpec {
    pub section: &'static str,
    pub key: &'static str,
    pub kind: Kind,
    pub default: &'static str,
    pub doc: &'static str,
}

const UNIT: Kind = Kind::Float { min: 0.0, max: 1.0 };
const ANY: Kind = Kind::Float { min: f64::NEG_INFINITY, max: f64::INFINITY };
const NONNEG: Kind = Kind::Float { min: 0.0, max: f64::INFINITY };
const COUNT: Kind = Kind::Int { min: 1, max: i64::MAX };

pub const SCHEMA: &[KeySpec] = &[
    KeySpec {
        section: "run",
        key: "seed",
        kind: Kind::Int { min: 0, max: i64::MAX },
        default: "1",
        doc: "master seed",
    },
    KeySpec {
        section: "run",
        key: "parallel",
        kind: Kind::Bool,
        default: "true",
        doc: "use the thread pool (results are identical either way)",
    },
    KeySpec {
        section: "epidemic",
        key: "preset",
        kind: Kind::Choice(&["sis", "sir"]),
        default: "sir for sir-run, else sis",
        doc: "rate preset the other keys override",
    },
    KeySpec {
        section: "epidemic",
        key: "m",
        kind: Kind::Int { min: 1, max: 100_000 },
        default: "100",
        doc: "grid side length",
    },
    KeySpec {
        section: "epidemic",
        key: "boundary",
        kind: Kind::Choice(&["absorbing", "periodic"]),
        default: "absorbing",
        doc: "edge handling",
    },
    KeySpec {
        section: "epidemic",
        key: "iterations",
        kind: Kind::Int { min: 0, max: i64::MAX },
        default: "200 (sis) / 500 (sir)",
        doc: "steps per run",
    },
    KeySpec {
        section: "epidemic",
        key: "beta",
        kind: UNIT,
        default: "0.05 (sis) / 0.95 (sir)",
        doc: "per-contact infection probability",
    },
    KeySpec {
        section: "epidemic",
        key: "mu",
        kind: UNIT,
        default: "0.01 (sis) / 0 (sir)",
        doc: "infected -> susceptible probability",
    },
    KeySpec {
        section: "epidemic",
        key: "gamma",
        kind: UNIT,
        default: "0 (sis) / 0.2 (sir)",
        doc: "infected -> depleted probability; gamma + mu <= 1",
    },
    KeySpec {
        section: "epidemic",
        key: "f_r",
        kind: UNIT,
        default: "0.6 (sis) / 0.7 (sir)",
        doc: "fill fraction for single runs",
    },
    KeySpec {
        section: "epidemic",
        key: "f_rc",
        kind: UNIT,
        default: "0.6",
        doc: "critical fraction for threshold-excess seeding",
    },
    KeySpec {
        section: "epidemic",
        key: "seeding",
        kind: Kind::Choice(&["left-edge", "threshold-excess", "center"]),
        default: "threshold-excess (sis) / left-edge (sir)",
        doc: "initial infection rule",
    },
    KeySpec {
        section: "epidemic",
        key: "replicates",
        kind: COUNT,
        default: "20 (sis) / 1 (sir)",
        doc: "runs per scan point",
    },
    KeySpec {
        section: "epidemic",
        key: "observable",
        kind: Kind::Choice(&["occupied", "all-cells"]),
        default: "occupied",
        doc: "scan normalisation of the final infected count",
    },
    KeySpec { section: "scan", key: "f_min", kind: UNIT, default: "0", doc: "first fill fraction" },
    KeySpec { section: "scan", key: "f_max", kind: UNIT, default: "1", doc: "last fill fraction" },
    KeySpec {
        section: "scan",
        key: "points",
        kind: Kind::Int { min: 2, max: 10_000 },
        default: "21",
        doc: "scan points",
    },
    KeySpec {
        section: "domains",
        key: "offsets",
        kind: Kind::FloatList { min: -1.0, max: 1.0 },
        default: "[0.2, 0.3]",
        doc: "per-band density offsets, top to bottom",
    },
    KeySpec { section: "gradient", key: "start", kind: UNIT, default: "0", doc: "fill fraction at column 0" },
    KeySpec { section: "gradient", key: "end", kind: UNIT, default: "0.9", doc: "fill fraction at the last column" },
    KeySpec { section: "optics", key: "omega_p", kind: NONNEG, default: "2", doc: "probe Rabi frequency (MHz)" },
    KeySpec { section: "optics", key: "omega_c", kind: NONNEG, default: "5", doc: "coupling Rabi frequency (MHz)" },
    KeySpec { section: "optics", key: "delta_p", kind: ANY, default: "0", doc: "probe detuning (MHz)" },
    KeySpec { section: "optics", key: "gamma_e", kind: NONNEG, default: "6.07", doc: "intermediate-state decay (MHz)" },
    KeySpec { section: "optics", key: "gamma_r", kind: NONNEG, default: "0.01", doc: "Rydberg decay (MHz)" },
    KeySpec { section: "optics", key: "gamma_deph", kind: NONNEG, default: "0.1", doc: "Rydberg dephasing (MHz)" },
    KeySpec {
        section: "optics",
        key: "v",
        kind: NONNEG,
        default: "450",
        doc: "mean-field shift at full density and population (MHz)",
    },
    KeySpec { section: "optics", key: "od", kind: NONNEG, default: "2", doc: "resonant optical depth" },
    KeySpec { section: "optics", key: "f_r", kind: UNIT, default: "0.33", doc: "domain density for hysteresis" },
    KeySpec {
        section: "optics",
        key: "shift_sign",
        kind: Kind::Choice(&["red", "blue"]),
        default: "red",
        doc: "direction the resonance moves as rho_rr grows",
    },
    KeySpec {
        section: "optics",
        key: "composition",
        kind: Kind::Choice(&["multiplicative", "weighted-average"]),
        default: "multiplicative",
        doc: "how domain transmissions combine",
    },
    KeySpec { section: "sweep", key: "start", kind: ANY, default: "-40", doc: "lowest coupling detuning (MHz)" },
    KeySpec { section: "sweep", key: "stop", kind: ANY, default: "10", doc: "highest coupling detuning (MHz)" },
    KeySpec {
        section: "sweep",
        key: "steps",
        kind: Kind::Int { min: 2, max: 1_000_000 },
        default: "401",
        doc: "detuning points",
    },
    KeySpec { section: "map", key: "f_r1", kind: UNIT, default: "0.33", doc: "density of the fixed domain" },
    KeySpec { section: "map", key: "f_r2_min", kind: UNIT, default: "0", doc: "first density of the varied domain" },
    KeySpec { section: "map", key: "f_r2_max", kind: UNIT, default: "0.33", doc: "last density of the varied domain" },
    KeySpec {
        section: "map",
        key: "f_r2_points",
        kind: Kind::Int { min: 1, max: 100_000 },
        default: "34",
        doc: "rows of the map",
    },
    KeySpec {
        section: "map",
        key: "weight1",
        kind: Kind::Float { min: 0.0, max: 1.0 },
        default: "0.5",
        doc: "weight of the fixed domain, exclusive of 0 and 1",
    },
    KeySpec {
        section: "fit",
        key: "model",
        kind: Kind::Choice(&["tanh", "multi-tanh", "gaussian"]),
        default: "tanh",
        doc: "model for the fit subcommand",
    },
    KeySpec {
        section: "fit",
        key: "steps",
        kind: Kind::Int { min: 1, max: 16 },
        default: "2",
        doc: "steps of the multi-tanh model",
    },
    KeySpec {
        section: "fit",
        key: "input",
        kind: Kind::Text,
        default: "\"\"",
        doc: "CSV file to fit (relative to the working directory)",
    },
    KeySpec {
        section: "fit",
        key: "x_column",
        kind: Kind::Text,
        default: "\"f_R\"",
        doc: "CSV header of the abscissa",
    },
    KeySpec {
        section: "fit",
        key: "y_column",
        kind: Kind::Text,
        default: "\"f_I\"",
        doc: "CSV header of the ordinate",
    },
];

/// One line per key: `section.key  type  default  description`.
pub fn schema_help() -> String {
    let mut out = String::from("Config keys (TOML, one [section] per prefix):\n");
    for spec in SCHEMA {
        let _ = writeln!(
            out,
            "  {:<22} {:<44} default {:<28} {}",
            format!("{}.{}", spec.section, spec.key),
            spec.kind.to_string(),
            spec.default,
            spec.doc
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<String>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} config error(s):", self.0.len())?;
        for e in &self.0 {
            writeln!(f, "  - {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

/// A checked value from the config file.
#[derive(Debug, Clone)]
enum Checked {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
    List(Vec<f64>),
}

fn check_value(spec: &KeySpec, value: &Value) -> Result<Checked, String> {
    let name = format!("{}.{}", spec.section, spec.key);
    let number = |v: &Value| match v {
        Value::Float(x) => Some(*x),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    };
    let in_range = |x: f64, min: f64, max: f64| x.is_finite() && x >= min && x <= max;
    match spec.kind {
        Kind::Int { min, max } => match value {
            Value::Integer(i) if *i >= min && *i <= max => Ok(Checked::Int(*i)),
            Value::Integer(i) => Err(format!("{name} = {i} is out of range ({})", spec.kind)),
            other => Err(format!("{name}: expected an integer, found {}", other.type_str())),
        },
        Kind::Float { min, max } => match number(value) {
            Some(x) if in_range(x, min, max) => Ok(Checked::Float(x)),
            Some(x) => Err(format!("{name} = {x} is out of range ({})", spec.kind)),
            None => Err(format!("{name}: expected a number, found {}", value.type_str())),
        },
        Kind::Bool => match value {
            Value::Boolean(b) => Ok(Checked::Bool(*b)),
            other => Err(format!("{name}: expected true or false, found {}", other.type_str())),
        },
        Kind::Choice(options) => match value {
            Value::String(s) if options.contains(&s.as_str()) => Ok(Checked::Text(s.clone())),
            Value::String(s) => Err(format!("{name} = \"{s}\" is not one of {}", options.join(", "))),
            other => Err(format!("{name}: expected a string, found {}", other.type_str())),
        },
        Kind::FloatList { min, max } => match value {
            Value::Array(items) => {
                let mut out = Vec::with_capacity(items.len());
                for (i, item) in items.iter().enumerate() {
                    match number(item) {
                        Some(x) if in_range(x, min, max) => out.push(x),
                        Some(x) => return Err(format!("{name}[{i}] = {x} is out of range [{min}, {max}]")),
                        None => return Err(format!("{name}[{i}]: expected a number, found {}", item.type_str())),
                    }
                }
                Ok(Checked::List(out))
            }
            other => Err(format!("{name}: expected an array, found {}", other.type_str())),
        },
        Kind::Text => match value {
            Value::String(s) => Ok(Checked::Text(s.clone())),
            other => Err(format!("{name}: expected a string, found {}", other.type_str())),
        },
    }
}

#[derive(Default)]
struct Values(Vec<(&'static str, &'static str, Checked)>);

impl Values {
    fn get(&self, section: &str, key: &str) -> Option<&Checked> {
        self.0.iter().find(|(s, k, _)| *s == section && *k == key).map(|(_, _, v)| v)
    }

    fn float(&self, section: &str, key: &str, default: f64) -> f64 {
        match self.get(section, key) {
            Some(Checked::Float(x)) => *x,
            _ => default,
        }
    }

    fn int(&self, section: &str, key: &str, default: usize) -> usize {
        match self.get(section, key) {
            Some(Checked::Int(i)) => *i as usize,
            _ => default,
        }
    }

    fn text(&self, section: &str, key: &str) -> Option<&str> {
        match self.get(section, key) {
            Some(Checked::Text(s)) => Some(s),
            _ => None,
        }
    }
}

/// Parses and validates a config for `experiment`, reporting every error.
pub fn parse_config(text: &str, experiment: Experiment) -> Result<Config, ConfigErrors> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| ConfigErrors(vec![e.to_string()]))?;
    let mut errors = Vec::new();
    let mut values = Values::default();

    for (section, body) in &table {
        let Some(body) = body.as_table() else {
            errors.push(format!("top-level key `{section}` must be a [section] table"));
            continue;
        };
        if !SCHEMA.iter().any(|s| s.section == section) {
            errors.push(format!("unknown section [{section}]"));
            continue;
        }
        for (key, value) in body {
            match SCHEMA.iter().find(|s| s.section == section && s.key == key) {
                None => errors.push(format!("unknown key `{section}.{key}`")),
                Some(spec) => match check_value(spec, value) {
                    Ok(v) => values.0.push((spec.section, spec.key, v)),
                    Err(e) => errors.push(e),
                },
            }
        }
    }

    let config = build(&values, experiment);
    errors.extend(cross_checks(&config));
    if errors.is_empty() {
        Ok(config)
    } else {
        Err(ConfigErrors(errors))
    }
}

/// Defaults for `experiment` with no file.
pub fn default_config(experiment: Experiment) -> Config {
    build(&Values::default(), experiment)
}

fn build(v: &Values, experiment: Experiment) -> Config {
    let preset = match v.text("epidemic", "preset") {
        Some("sir") => Preset::Sir,
        Some(_) => Preset::Sis,
        None => experiment.default_preset(),
    };
    let base = preset.params();
    let preset_seeding = match base.seeding {
        SeedPolicy::ThresholdExcess => Seeding::ThresholdExcess,
        _ => Seeding::LeftEdge,
    };
    let optics = MeanFieldParams::default();

    Config {
        run: RunSection {
            seed: match v.get("run", "seed") {
                Some(Checked::Int(i)) => *i as u64,
                _ => 1,
            },
            parallel: !matches!(v.get("run", "parallel"), Some(Checked::Bool(false))),
        },
        epidemic: EpidemicSection {
            preset,
            m: v.int("epidemic", "m", base.m),
            boundary: match v.text("epidemic", "boundary") {
                Some("periodic") => Boundary::Periodic,
                _ => Boundary::AbsorbingEdge,
            },
            iterations: v.int("epidemic", "iterations", base.iterations),
            beta: v.float("epidemic", "beta", base.beta),
            mu: v.float("epidemic", "mu", base.mu),
            gamma: v.float("epidemic", "gamma", base.gamma),
            f_r: v.float("epidemic", "f_r", base.f_r),
            f_rc: v.float("epidemic", "f_rc", base.f_rc),
            seeding: match v.text("epidemic", "seeding") {
                Some("left-edge") => Seeding::LeftEdge,
                Some("threshold-excess") => Seeding::ThresholdExcess,
                Some("center") => Seeding::Center,
                _ => preset_seeding,
            },
            replicates: v.int("epidemic", "replicates", base.replicates),
            observable: match v.text("epidemic", "observable") {
                Some("all-cells") => Observable::AllCells,
                _ => Observable::OccupiedFraction,
            },
        },
        scan: ScanSection {
            f_min: v.float("scan", "f_min", 0.0),
            f_max: v.float("scan", "f_max", 1.0),
            points: v.int("scan", "points", 21),
        },
        domains: DomainsSection {
            offsets: match v.get("domains", "offsets") {
                Some(Checked::List(l)) => l.clone(),
                _ => vec![0.2, 0.3],
            },
        },
        gradient: GradientSection { start: v.float("gradient", "start", 0.0), end: v.float("gradient", "end", 0.9) },
        optics: OpticsSection {
            params: MeanFieldParams {
                omega_p: v.float("optics", "omega_p", optics.omega_p),
                omega_c: v.float("optics", "omega_c", optics.omega_c),
                delta_p: v.float("optics", "delta_p", optics.delta_p),
                delta_c: 0.0,
                gamma_e: v.float("optics", "gamma_e", optics.gamma_e),
                gamma_r: v.float("optics", "gamma_r", optics.gamma_r),
                gamma_deph: v.float("optics", "gamma_deph", optics.gamma_deph),
                v: v.float("optics", "v", optics.v),
                od: v.float("optics", "od", optics.od),
                f_r: v.float("optics", "f_r", optics.f_r),
                shift_sign: if v.text("optics", "shift_sign") == Some("blue") { 1.0 } else { -1.0 },
            },
            composition: if v.text("optics", "composition") == Some("weighted-average") {
                Composition::WeightedAverage
            } else {
                Composition::Multiplicative
            },
        },
        sweep: SweepSection {
            start: v.float("sweep", "start", -40.0),
            stop: v.float("sweep", "stop", 10.0),
            steps: v.int("sweep", "steps", 401),
        },
        map: MapSection {
            f_r1: v.float("map", "f_r1", 0.33),
            f_r2_min: v.float("map", "f_r2_min", 0.0),
            f_r2_max: v.float("map", "f_r2_max", 0.33),
            f_r2_points: v.int("map", "f_r2_points", 34),
            weight1: v.float("map", "weight1", 0.5),
        },
        fit: FitSection {
            model: match v.text("fit", "model") {
                Some("multi-tanh") => FitModelName::MultiTanh,
                Some("gaussian") => FitModelName::Gaussian,
                _ => FitModelName::Tanh,
            },
            steps: v.int("fit", "steps", 2),
            input: v.text("fit", "input").unwrap_or("").to_string(),
            x_column: v.text("fit", "x_column").unwrap_or("f_R").to_string(),
            y_column: v.text("fit", "y_column").unwrap_or("f_I").to_string(),
        },
    }
}

fn cross_checks(c: &Config) -> Vec<String> {
    let mut errors = Vec::new();
    let e = &c.epidemic;
    if e.gamma + e.mu > 1.0 {
        errors.push(format!(
            "epidemic.gamma + epidemic.mu = {} exceeds 1 (gamma = {}, mu = {})",
            e.gamma + e.mu,
            e.gamma,
            e.mu
        ));
    }
    if c.scan.f_min >= c.scan.f_max {
        errors.push(format!("scan.f_min ({}) must be below scan.f_max ({})", c.scan.f_min, c.scan.f_max));
    }
    if c.domains.offsets.is_empty() {
        errors.push("domains.offsets must hold at least one offset".into());
    }
    if c.domains.offsets.len() > e.m {
        errors.push(format!("domains.offsets has {} bands but epidemic.m is only {}", c.domains.offsets.len(), e.m));
    }
    if c.sweep.start >= c.sweep.stop {
        errors.push(format!("sweep.start ({}) must be below sweep.stop ({})", c.sweep.start, c.sweep.stop));
    }
    if c.map.f_r2_min > c.map.f_r2_max {
        errors.push(format!("map.f_r2_min ({}) exceeds map.f_r2_max ({})", c.map.f_r2_min, c.map.f_r2_max));
    }
    if c.map.weight1 <= 0.0 || c.map.weight1 >= 1.0 {
        errors.push(format!("map.weight1 = {} must lie strictly between 0 and 1", c.map.weight1));
    }
    errors
}

fn float(x: f64) -> String {
    // Debug formatting is the shortest string that round-trips.
    format!("{x:?}")
}

fn text(s: &str) -> String {
    Value::String(s.to_string()).to_string()
}

/// Writes every key, so the output reproduces the config exactly.
pub fn to_toml(c: &Config) -> String {
    let e = &c.epidemic;
    let o = &c.optics.params;
    let mut out = String::new();
    let _ = writeln!(out, "[run]\nseed = {}\nparallel = {}\n", c.run.seed, c.run.parallel);
    let _ = writeln!(out, "[epidemic]");
    let _ = writeln!(out, "preset = {}", text(e.preset.name()));
    let _ = writeln!(out, "m = {}", e.m);
    let boundary = if e.boundary == Boundary::Periodic { "periodic" } else { "absorbing" };
    let _ = writeln!(out, "boundary = {}", text(boundary));
    let _ = writeln!(out, "iterations = {}", e.iterations);
    let _ = writeln!(out, "beta = {}\nmu = {}\ngamma = {}", float(e.beta), float(e.mu), float(e.gamma));
    let _ = writeln!(out, "f_r = {}\nf_rc = {}", float(e.f_r), float(e.f_rc));
    let seeding = match e.seeding {
        Seeding::LeftEdge => "left-edge",
        Seeding::ThresholdExcess => "threshold-excess",
        Seeding::Center => "center",
    };
    let _ = writeln!(out, "seeding = {}", text(seeding));
    let _ = writeln!(out, "replicates = {}", e.replicates);
    let observable = if e.observable == Observable::AllCells { "all-cells" } else { "occupied" };
    let _ = writeln!(out, "observable = {}\n", text(observable));
    let _ = writeln!(
        out,
        "[scan]\nf_min = {}\nf_max = {}\npoints = {}\n",
        float(c.scan.f_min),
        float(c.scan.f_max),
        c.scan.points
    );
    let offsets: Vec<String> = c.domains.offsets.iter().map(|x| float(*x)).collect();
    let _ = writeln!(out, "[domains]\noffsets = [{}]\n", offsets.join(", "));
    let _ = writeln!(out, "[gradient]\nstart = {}\nend = {}\n", float(c.gradient.start), float(c.gradient.end));
    let _ = writeln!(out, "[optics]");
    for (k, x) in [
        ("omega_p", o.omega_p),
        ("omega_c", o.omega_c),
        ("delta_p", o.delta_p),
        ("gamma_e", o.gamma_e),
        ("gamma_r", o.gamma_r),
        ("gamma_deph", o.gamma_deph),
        ("v", o.v),
        ("od", o.od),
        ("f_r", o.f_r),
    ] {
        let _ = writeln!(out, "{k} = {}", float(x));
    }
    let _ = writeln!(out, "shift_sign = {}", text(if o.shift_sign > 0.0 { "blue" } else { "red" }));
    let composition = match c.optics.composition {
        Composition::Multiplicative => "multiplicative",
        Composition::WeightedAverage => "weighted-average",
    };
    let _ = writeln!(out, "composition = {}\n", text(composition));
    let _ = writeln!(
        out,
        "[sweep]\nstart = {}\nstop = {}\nsteps = {}\n",
        float(c.sweep.start),
        float(c.sweep.stop),
        c.sweep.steps
    );
    let m = &c.map;
    let _ = writeln!(
        out,
        "[map]\nf_r1 = {}\nf_r2_min = {}\nf_r2_max = {}\nf_r2_points = {}\nweight1 = {}\n",
        float(m.f_r1),
        float(m.f_r2_min),
        float(m.f_r2_max),
        m.f_r2_points,
        float(m.weight1)
    );
    let model = match c.fit.model {
        FitModelName::Tanh => "tanh",
        FitModelName::MultiTanh => "multi-tanh",
        FitModelName::Gaussian => "gaussian",
    };
    let _ = writeln!(out, "[fit]\nmodel = {}\nsteps = {}", text(model), c.fit.steps);
    let _ = writeln!(out, "input = {}", text(&c.fit.input));
    let _ = writeln!(out, "x_column = {}\ny_column = {}", text(&c.fit.x_column), text(&c.fit.y_column));
    out
}

impl Config {
    pub fn epidemic_params(&self) -> EpidemicParams {
        let e = &self.epidemic;
        let seeding = match e.seeding {
            Seeding::LeftEdge => SeedPolicy::LeftEdge,
            Seeding::ThresholdExcess => SeedPolicy::ThresholdExcess,
            Seeding::Center => SeedPolicy::Explicit(vec![(e.m / 2, e.m / 2)]),
        };
        EpidemicParams {
            m: e.m,
            f_r: e.f_r,
            f_rc: e.f_rc,
            beta: e.beta,
            mu: e.mu,
            gamma: e.gamma,
            boundary: e.boundary,
            iterations: e.iterations,
            seeding,
            replicates: e.replicates,
            seed: self.run.seed,
            observable: e.observable,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        for exp in Experiment::ALL {
            assert_eq!(parse_config("", exp).unwrap(), default_config(exp));
        }
        let sir = default_config(Experiment::SirRun);
        assert_eq!((sir.epidemic.beta, sir.epidemic.gamma, sir.epidemic.iterations), (0.95, 0.2, 500));
        assert_eq!(default_config(Experiment::SisScan).epidemic.beta, rydsim::epidemic::SIS_BETA);
    }

    #[test]
    fn keys_override_the_preset() {
        let c = parse_config("[epidemic]\npreset = \"sir\"\nbeta = 0.5\nm = 40\n", Experiment::SisScan).unwrap();
        assert_eq!(c.epidemic.preset, Preset::Sir);
        assert_eq!((c.epidemic.beta, c.epidemic.gamma, c.epidemic.m), (0.5, 0.2, 40));
    }

    #[test]
    fn integers_are_accepted_for_numbers() {
        let c = parse_config("[optics]\nv = 300\n", Experiment::Hysteresis).unwrap();
        assert_eq!(c.optics.params.v, 300.0);
    }

    #[test]
    fn collects_every_error() {
        let text = "[epidemic]\nbetta = 0.3\nbeta = 2.0\ngamma = 0.7\nmu = 0.6\nm = \"big\"\n[nonsense]\nx = 1\n[scan]\nf_min = 0.9\nf_max = 0.1\n";
        let err = parse_config(text, Experiment::SisScan).unwrap_err();
        let all = err.to_string();
        assert!(all.contains("unknown key `epidemic.betta`"), "{all}");
        assert!(all.contains("epidemic.beta = 2"), "{all}");
        assert!(all.contains("epidemic.m: expected an integer"), "{all}");
        assert!(all.contains("unknown section [nonsense]"), "{all}");
        assert!(all.contains("epidemic.gamma + epidemic.mu"), "{all}");
        assert!(all.contains("scan.f_min"), "{all}");
        assert_eq!(err.0.len(), 6, "{all}");
    }

    #[test]
    fn bad_choice_names_the_options() {
        let err = parse_config("[epidemic]\nboundary = \"torus\"\n", Experiment::SisScan).unwrap_err();
        assert!(err.0[0].contains("absorbing, periodic"));
    }

    #[test]
    fn syntax_errors_are_reported() {
        assert!(parse_config("[epidemic\nbeta = ", Experiment::SisScan).is_err());
    }

    #[test]
    fn round_trip() {
        let text = "[run]\nseed = 99\nparallel = false\n[epidemic]\nseeding = \"center\"\nboundary = \"periodic\"\nobservable = \"all-cells\"\n\
                    [domains]\noffsets = [0.3, 0.15, 0.0]\n[optics]\nshift_sign = \"blue\"\ncomposition = \"weighted-average\"\nomega_p = 1e-5\n\
                    [fit]\nmodel = \"multi-tanh\"\ninput = \"a \\\"quoted\\\" path.csv\"\n";
        for exp in Experiment::ALL {
            let c = parse_config(text, exp).unwrap();
            let again = parse_config(&to_toml(&c), exp).unwrap();
            assert_eq!(c, again);
            assert_eq!(to_toml(&c), to_toml(&again));
        }
    }

    #[test]
    fn help_lists_every_key() {
        let help = schema_help();
        for spec in SCHEMA {
            assert!(help.contains(&format!("{}.{}", spec.section, spec.key)));
        }
    }

    #[test]
    fn experiment_names_round_trip() {
        for exp in Experiment::ALL {
            assert_eq!(exp.name().parse::<Experiment>().unwrap(), exp);
        }
        assert!("nope".parse::<Experiment>().is_err());
    }
}
