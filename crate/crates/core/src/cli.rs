//! Batch driver behind the `price-lab` binary.
//!
//! [`run_config`] is a pure function from a validated configuration to the
//! bytes of its artifacts, so identical configurations give identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Parser;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{FunctionConfig, GridConfig, RunConfig, Scenario, SchemaError, SpaceConfig};
use crate::error::Error;
use crate::hypergeom::{calibrated_q, q_quadrature, rescaled_q};
use crate::mu::{growth_profile_seeded, GrowthSample};
use crate::price::{
    energy_window_report, envelope_report, growth_exponent_window, with_half_radius,
    EnvelopeReport,
};

pub const PROFILE_COLUMNS: [&str; 9] = [
    "R",
    "sphere_energy",
    "ball_energy",
    "dirichlet",
    "iterated",
    "mu",
    "almgren",
    "lower_env",
    "upper_env",
];

pub const POISSON_Q_COLUMNS: [&str; 4] = ["R", "Q_closed_form", "Q_quadrature", "rel_diff"];

#[derive(Debug, Parser)]
#[command(name = "price-lab", version, about = "Growth profiles and envelope checks for harmonic functions")]
pub struct Args {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the scenario in the configuration.
    #[arg(long)]
    pub scenario: Option<String>,
    /// Overrides the output path in the configuration.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "PRICE_LAB_THREADS")]
    pub threads: Option<usize>,
    #[arg(long)]
    pub verbose: bool,
}

#[derive(Debug)]
pub enum CliError {
    Schema(SchemaError),
    Run(Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Run(Error::NumericalViolation(_)) => 3,
            CliError::Run(Error::NonConvergence { .. }) => 4,
            _ => 1,
        }
    }

    pub fn info(&self) -> ErrorInfo {
        let (kind, path, message) = match self {
            CliError::Schema(e) => ("schema", Some(e.path.clone()), e.message.clone()),
            CliError::Run(e) => (e.kind(), None, e.to_string()),
            CliError::Io(m) => ("io", None, m.clone()),
        };
        ErrorInfo {
            kind: kind.into(),
            path,
            message,
            exit_code: self.exit_code(),
        }
    }
}

impl From<SchemaError> for CliError {
    fn from(e: SchemaError) -> Self {
        CliError::Schema(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorInfo {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    pub message: String,
    pub exit_code: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances {
    pub target_rel_tol: f64,
    pub slack: f64,
    pub tail_tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponent_tol: Option<f64>,
}

/// Machine-readable summary of one verification run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub scenario: String,
    pub function: Option<FunctionConfig>,
    pub space: SpaceConfig,
    pub grid: GridConfig,
    #[serde(rename = "C1")]
    pub c1: Option<f64>,
    #[serde(rename = "C2")]
    pub c2: Option<f64>,
    pub exponent: Option<f64>,
    /// Whether the scenario's own diagnostic held.
    pub stability_ok: bool,
    pub tolerances: Tolerances,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<serde_json::Value>,
}

impl VerificationReport {
    fn blank(cfg: &RunConfig) -> Self {
        Self {
            scenario: cfg.scenario.name().into(),
            function: cfg.function.clone(),
            space: cfg.space,
            grid: cfg.grid,
            c1: None,
            c2: None,
            exponent: None,
            stability_ok: false,
            tolerances: Tolerances {
                target_rel_tol: cfg.quadrature.target_rel_tol,
                slack: cfg.verification.slack,
                tail_tol: cfg.verification.tail_tol,
                exponent_tol: None,
            },
            error: None,
            details: None,
        }
    }
}

/// Bytes produced by one run. `primary` goes to the output path (or standard
/// output); `sidecar` goes next to it as `<out>.json`.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub primary: String,
    pub sidecar: Option<String>,
    /// Set when the run produced a report but its scenario failed.
    pub failure: Option<ErrorInfo>,
}

fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:e}")
    } else {
        String::new()
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable report");
    s.push('\n');
    s
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

/// Profile CSV; envelope columns stay empty when `env` is `None`.
pub fn profile_csv(samples: &[GrowthSample], env: Option<&EnvelopeReport>) -> String {
    csv_text(
        &PROFILE_COLUMNS,
        samples.iter().enumerate().map(|(i, s)| {
            let (lo, up) = match env {
                Some(e) => (fmt_num(e.lower_env[i]), fmt_num(e.upper_env[i])),
                None => (String::new(), String::new()),
            };
            vec![
                fmt_num(s.radius),
                fmt_num(s.sphere_energy),
                fmt_num(s.ball_energy),
                fmt_num(s.dirichlet),
                fmt_num(s.iterated),
                fmt_num(s.mu),
                fmt_num(s.almgren),
                lo,
                up,
            ]
        }),
    )
}

/// Validates and runs a configuration.
pub fn run_config(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    cfg.validate()?;
    match cfg.scenario {
        Scenario::Mu | Scenario::Almgren => {
            let f = cfg.harmonic()?;
            let samples = growth_profile_seeded(&f, &cfg.grid.radii(), &cfg.quadrature, cfg.seed)?;
            Ok(Artifacts {
                primary: profile_csv(&samples, None),
                sidecar: None,
                failure: None,
            })
        }
        Scenario::PriceVerify => price_verify(cfg),
        Scenario::EnergyWindow => energy_window(cfg),
        Scenario::Exponent => {
            let rep = exponent(cfg)?;
            Ok(Artifacts {
                primary: to_json(&rep),
                sidecar: None,
                failure: None,
            })
        }
        Scenario::PoissonQ => poisson_q(cfg),
        Scenario::Sweep => Ok(Artifacts {
            primary: to_json(&sweep(cfg)),
            sidecar: None,
            failure: None,
        }),
    }
}

fn envelope_grid(cfg: &RunConfig) -> Vec<f64> {
    let mut g = cfg.grid.radii();
    let r0 = cfg.verification.r0;
    if g[0] > r0 {
        g.insert(0, r0);
    }
    g
}

fn price_verify_report(cfg: &RunConfig) -> Result<(Vec<GrowthSample>, EnvelopeReport), CliError> {
    let f = cfg.harmonic()?;
    if f.is_constant() {
        return Err(Error::Precondition(
            "double-sided verification needs a non-constant function".into(),
        )
        .into());
    }
    let samples = growth_profile_seeded(&f, &envelope_grid(cfg), &cfg.quadrature, cfg.seed)?;
    let env = envelope_report(&samples, f.space(), cfg.space.k_prime(), cfg.verification.slack)?;
    Ok((samples, env))
}

fn envelope_summary(cfg: &RunConfig, env: &EnvelopeReport) -> VerificationReport {
    let mut rep = VerificationReport::blank(cfg);
    rep.c1 = Some(env.c1);
    rep.c2 = Some(env.c2);
    rep.exponent = Some(env.window_exponents.upper);
    rep.stability_ok = env.stability_ok;
    rep.details = serde_json::to_value(env).ok();
    rep
}

fn price_verify(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let (samples, env) = price_verify_report(cfg)?;
    Ok(Artifacts {
        primary: profile_csv(&samples, Some(&env)),
        sidecar: Some(to_json(&envelope_summary(cfg, &env))),
        failure: None,
    })
}

fn energy_window(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let f = cfg.harmonic()?;
    let grid = cfg.grid.radii();
    let full = with_half_radius(&grid);
    let samples = growth_profile_seeded(&f, &full, &cfg.quadrature, cfg.seed)?;
    let rows: Vec<GrowthSample> = samples
        .iter()
        .filter(|s| grid.contains(&s.radius))
        .copied()
        .collect();
    let mut rep = VerificationReport::blank(cfg);
    let v = cfg.verification;
    let failure = match energy_window_report(&samples, &grid, f.space(), v.tail_tol, v.slack) {
        Ok(w) => {
            rep.c1 = Some(w.min);
            rep.c2 = Some(w.max);
            rep.stability_ok = w.stability_ok && w.mu_bound_ok;
            rep.details = serde_json::to_value(&w).ok();
            None
        }
        Err(e) => {
            let info = CliError::Run(e).info();
            rep.error = Some(info.clone());
            Some(info)
        }
    };
    Ok(Artifacts {
        primary: profile_csv(&rows, None),
        sidecar: Some(to_json(&rep)),
        failure,
    })
}

fn exponent(cfg: &RunConfig) -> Result<VerificationReport, CliError> {
    let f = cfg.harmonic()?;
    let w = growth_exponent_window(&f, cfg.space.k_prime(), &cfg.grid.radii(), &cfg.quadrature)?;
    let mut rep = VerificationReport::blank(cfg);
    rep.exponent = Some(w.lambda);
    rep.stability_ok = w.within;
    rep.tolerances.exponent_tol = Some(w.tol);
    rep.details = serde_json::to_value(&w).ok();
    Ok(rep)
}

#[derive(Serialize)]
struct QHeader {
    n: usize,
    k: f64,
    c1: f64,
    /// `(j, alpha_j)` pairs.
    alpha: Vec<(i64, f64)>,
}

fn poisson_q(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let n = cfg.space.dim;
    let k = cfg.space.k;
    let q = calibrated_q(n)?;
    let rows = cfg
        .grid
        .radii()
        .into_iter()
        .map(|r| {
            let closed = rescaled_q(&q, k, r)?;
            let quad = q_quadrature(n, k, r, &cfg.quadrature)?;
            Ok(vec![
                fmt_num(r),
                fmt_num(closed),
                fmt_num(quad),
                fmt_num((quad - closed).abs() / closed.abs()),
            ])
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(Artifacts {
        primary: csv_text(&POISSON_Q_COLUMNS, rows),
        sidecar: Some(to_json(&QHeader {
            n,
            k,
            c1: q.c1,
            alpha: q.indexed(),
        })),
        failure: None,
    })
}

fn sweep_entry(cfg: &RunConfig) -> VerificationReport {
    let mut rep = VerificationReport::blank(cfg);
    let outcome: Result<VerificationReport, CliError> = (|| {
        cfg.validate()?;
        match cfg.scenario {
            Scenario::Exponent => exponent(cfg),
            Scenario::PriceVerify => {
                let (_, env) = price_verify_report(cfg)?;
                Ok(envelope_summary(cfg, &env))
            }
            _ => {
                let art = run_config(cfg)?;
                let mut r = match &art.sidecar {
                    Some(s) => {
                        let v: serde_json::Value = serde_json::from_str(s).unwrap_or_default();
                        let mut r = VerificationReport::blank(cfg);
                        r.details = Some(v);
                        r
                    }
                    None => VerificationReport::blank(cfg),
                };
                r.error = art.failure.clone();
                r.stability_ok = art.failure.is_none();
                Ok(r)
            }
        }
    })();
    match outcome {
        Ok(r) => r,
        Err(e) => {
            rep.error = Some(e.info());
            rep
        }
    }
}

/// Runs every expanded entry; failures are recorded in their report.
pub fn sweep(cfg: &RunConfig) -> Vec<VerificationReport> {
    cfg.expand_sweep().par_iter().map(sweep_entry).collect()
}

/// Appends `.json` to the full file name.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load(args: &Args) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Io(format!("{}: {e}", args.config.display())))?;
    let mut cfg = RunConfig::from_json(&text)?;
    if let Some(s) = &args.scenario {
        cfg.scenario = crate::config::Scenario::parse(s)
            .ok_or_else(|| SchemaError::new("--scenario", format!("unknown scenario `{s}`")))?;
    }
    if let Some(o) = &args.out {
        cfg.output = Some(o.clone());
    }
    Ok(cfg)
}

/// Runs the command line and returns the process exit code.
pub fn main_with_args(args: Args) -> i32 {
    if let Some(t) = args.threads {
        // a second initialisation in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global();
    }
    let result = load(&args).and_then(|cfg| {
        if args.verbose {
            eprintln!(
                "price-lab: scenario {} on n={} k={} with {} radii",
                cfg.scenario.name(),
                cfg.space.dim,
                cfg.space.k,
                cfg.grid.count
            );
        }
        let art = run_config(&cfg)?;
        match &cfg.output {
            Some(out) => {
                write(out, &art.primary)?;
                if let Some(side) = &art.sidecar {
                    write(&sidecar_path(out), side)?;
                }
                if args.verbose {
                    eprintln!("price-lab: wrote {}", out.display());
                }
            }
            None => {
                print!("{}", art.primary);
                if let Some(side) = &art.sidecar {
                    print!("{side}");
                }
            }
        }
        Ok(art.failure)
    });
    match result {
        Ok(None) => 0,
        Ok(Some(info)) => {
            eprintln!("{}", error_line(&info));
            info.exit_code
        }
        Err(e) => {
            let info = e.info();
            eprintln!("{}", error_line(&info));
            info.exit_code
        }
    }
}

fn error_line(info: &ErrorInfo) -> String {
    let mut s = String::new();
    let _ = write!(s, "{}", serde_json::json!({ "error": info }));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> RunConfig {
        RunConfig::from_json(text).unwrap()
    }

    const MU: &str = r#"{
        "schema": 1,
        "space": {"dim": 3, "k": 0},
        "function": {"kind": "polynomial", "terms": [{"basis": "coordinate", "index": 0}]},
        "grid": {"start": 0.5, "stop": 2.5, "count": 5},
        "scenario": "mu"
    }"#;

    #[test]
    fn mu_csv_has_constant_half() {
        let art = run_config(&cfg(MU)).unwrap();
        let mut rd = csv::Reader::from_reader(art.primary.as_bytes());
        assert_eq!(rd.headers().unwrap().iter().collect::<Vec<_>>(), PROFILE_COLUMNS);
        let mut n = 0;
        for row in rd.records() {
            let row = row.unwrap();
            let mu: f64 = row[5].parse().unwrap();
            assert!((mu - 0.5).abs() < 1e-12);
            assert_eq!(&row[7], "");
            n += 1;
        }
        assert_eq!(n, 5);
    }

    #[test]
    fn outputs_are_deterministic() {
        let a = run_config(&cfg(MU)).unwrap();
        let b = run_config(&cfg(MU)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn exit_codes() {
        let bad = cfg(&MU.replace("\"stop\": 2.5", "\"stop\": 0.2"));
        assert_eq!(run_config(&bad).unwrap_err().exit_code(), 2);
        assert_eq!(CliError::Run(Error::NumericalViolation("x".into())).exit_code(), 3);
        let nc = Error::NonConvergence { best: 1.0, err_est: 1.0, target: 1e-9 };
        assert_eq!(CliError::Run(nc).exit_code(), 4);
        assert_eq!(CliError::Run(Error::Domain("x".into())).exit_code(), 1);
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(sidecar_path(Path::new("out/p.csv")), PathBuf::from("out/p.csv.json"));
    }
}
