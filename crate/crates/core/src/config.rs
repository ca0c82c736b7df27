//! Versioned JSON run configurations.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::harmonics::{HarmonicFunction, PoissonAtom, Term};
use crate::price::{DEFAULT_SLACK, DEFAULT_TAIL_TOL, R0};
use crate::quadrature::QuadratureSpec;
use crate::spaceform::SpaceForm;

pub const SCHEMA_VERSION: u32 = 1;
pub const MAX_SWEEP_RUNS: usize = 10_000;

/// A configuration problem, with the JSON path where it was found.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemaError {
    pub path: String,
    pub message: String,
}

impl SchemaError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for SchemaError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl std::error::Error for SchemaError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Mu,
    Almgren,
    PriceVerify,
    EnergyWindow,
    Exponent,
    PoissonQ,
    Sweep,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Mu => "mu",
            Scenario::Almgren => "almgren",
            Scenario::PriceVerify => "price-verify",
            Scenario::EnergyWindow => "energy-window",
            Scenario::Exponent => "exponent",
            Scenario::PoissonQ => "poisson-q",
            Scenario::Sweep => "sweep",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_owned())).ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub dim: usize,
    pub k: f64,
    /// Lower curvature bound for the upper envelope; defaults to `k`.
    #[serde(default)]
    pub k_prime: Option<f64>,
}

impl SpaceConfig {
    pub fn k_prime(&self) -> f64 {
        self.k_prime.unwrap_or(self.k)
    }
}

/// A Poisson atom given either by an explicit direction or by a coordinate
/// axis and sign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomConfig {
    #[serde(default = "one")]
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign: Option<i8>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionConfig {
    Constant { value: f64 },
    Polynomial { terms: Vec<Term> },
    Poisson { atoms: Vec<AtomConfig> },
}

impl FunctionConfig {
    pub fn build(&self, space: SpaceForm, path: &str) -> Result<HarmonicFunction, SchemaError> {
        let res = match self {
            FunctionConfig::Constant { value } => HarmonicFunction::constant(space, *value),
            FunctionConfig::Polynomial { terms } => HarmonicFunction::polynomial(space, terms.clone()),
            FunctionConfig::Poisson { atoms } => {
                let mut out = Vec::with_capacity(atoms.len());
                for (i, a) in atoms.iter().enumerate() {
                    out.push(atom(a, space.dim(), &format!("{path}.atoms[{i}]"))?);
                }
                HarmonicFunction::poisson(space, out)
            }
        };
        res.map_err(|e| SchemaError::new(path, e.to_string()))
    }
}

fn atom(a: &AtomConfig, n: usize, path: &str) -> Result<PoissonAtom, SchemaError> {
    let direction = match (&a.direction, a.axis) {
        (Some(d), None) if a.sign.is_none() => d.clone(),
        (None, Some(ax)) => {
            if ax >= n {
                return Err(SchemaError::new(
                    format!("{path}.axis"),
                    format!("axis {ax} out of range for dimension {n}"),
                ));
            }
            let s = match a.sign.unwrap_or(1) {
                1 => 1.0,
                -1 => -1.0,
                other => {
                    return Err(SchemaError::new(
                        format!("{path}.sign"),
                        format!("sign must be 1 or -1, got {other}"),
                    ))
                }
            };
            let mut d = vec![0.0; n];
            d[ax] = s;
            d
        }
        _ => {
            return Err(SchemaError::new(
                path,
                "give either `direction` or `axis` (with optional `sign`)",
            ))
        }
    };
    Ok(PoissonAtom {
        weight: a.weight,
        direction,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl GridConfig {
    pub fn validate(&self, path: &str) -> Result<(), SchemaError> {
        if !(self.start > 0.0) || !self.start.is_finite() {
            return Err(SchemaError::new(format!("{path}.start"), "must be positive"));
        }
        if !(self.stop > self.start) || !self.stop.is_finite() {
            return Err(SchemaError::new(format!("{path}.stop"), "must exceed start"));
        }
        if self.count < 2 {
            return Err(SchemaError::new(format!("{path}.count"), "must be at least 2"));
        }
        Ok(())
    }

    pub fn radii(&self) -> Vec<f64> {
        let m = (self.count - 1) as f64;
        let mut out: Vec<f64> = (0..self.count)
            .map(|i| {
                let t = i as f64 / m;
                match self.spacing {
                    Spacing::Linear => self.start + (self.stop - self.start) * t,
                    Spacing::Log => (self.start.ln() + (self.stop.ln() - self.start.ln()) * t).exp(),
                }
            })
            .collect();
        out[0] = self.start;
        out[self.count - 1] = self.stop;
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerificationConfig {
    /// Calibration radius of the envelopes.
    pub r0: f64,
    pub slack: f64,
    pub tail_tol: f64,
}

impl Default for VerificationConfig {
    fn default() -> Self {
        Self {
            r0: R0,
            slack: DEFAULT_SLACK,
            tail_tol: DEFAULT_TAIL_TOL,
        }
    }
}

/// Parameter lists for a sweep. An absent list keeps the template value; a
/// present but empty list yields no runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Scenario run for each entry.
    #[serde(default = "default_sweep_scenario")]
    pub scenario: Scenario,
    #[serde(default)]
    pub dims: Option<Vec<usize>>,
    /// `[k, k']` pairs.
    #[serde(default)]
    pub curvatures: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub functions: Option<Vec<FunctionConfig>>,
}

fn default_sweep_scenario() -> Scenario {
    Scenario::Exponent
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub space: SpaceConfig,
    #[serde(default)]
    pub function: Option<FunctionConfig>,
    pub grid: GridConfig,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    pub scenario: Scenario,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub verification: VerificationConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

impl RunConfig {
    /// Parses JSON, reporting the path of the first offending field.
    pub fn from_json(text: &str) -> Result<Self, SchemaError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            SchemaError::new(if path.is_empty() { ".".into() } else { path }, e.inner().to_string())
        })?;
        Ok(cfg)
    }

    pub fn space_form(&self) -> Result<SpaceForm, SchemaError> {
        let sp = SpaceForm::new(self.space.dim, self.space.k)
            .map_err(|e| SchemaError::new("space", e.to_string()))?;
        let kp = self.space.k_prime();
        if !(kp <= self.space.k) || !kp.is_finite() {
            return Err(SchemaError::new("space.k_prime", "need k_prime <= k <= 0"));
        }
        Ok(sp)
    }

    pub fn harmonic(&self) -> Result<HarmonicFunction, SchemaError> {
        let f = self
            .function
            .as_ref()
            .ok_or_else(|| SchemaError::new("function", "missing for this scenario"))?;
        f.build(self.space_form()?, "function")
    }

    /// Static checks beyond the JSON shape.
    pub fn validate(&self) -> Result<(), SchemaError> {
        if self.schema != SCHEMA_VERSION {
            return Err(SchemaError::new(
                "schema",
                format!("unsupported schema version {}, expected {SCHEMA_VERSION}", self.schema),
            ));
        }
        self.grid.validate("grid")?;
        self.quadrature
            .validate()
            .map_err(|e| SchemaError::new("quadrature", e.to_string()))?;
        let v = &self.verification;
        if !(v.r0 > 0.0) || !(v.slack >= 1.0) || !(v.tail_tol > 0.0) {
            return Err(SchemaError::new(
                "verification",
                "need r0 > 0, slack >= 1 and tail_tol > 0",
            ));
        }
        match self.scenario {
            Scenario::Sweep => self.validate_sweep(),
            Scenario::PoissonQ => {
                self.space_form()?;
                if self.space.k >= 0.0 {
                    return Err(SchemaError::new("space.k", "poisson-q needs k < 0"));
                }
                Ok(())
            }
            s => {
                self.harmonic()?;
                if s == Scenario::PriceVerify && self.grid.start < v.r0 {
                    return Err(SchemaError::new(
                        "grid.start",
                        format!("envelope scenarios need start >= r0 = {}", v.r0),
                    ));
                }
                Ok(())
            }
        }
    }

    fn validate_sweep(&self) -> Result<(), SchemaError> {
        let sw = self
            .sweep
            .as_ref()
            .ok_or_else(|| SchemaError::new("sweep", "missing for scenario sweep"))?;
        if sw.scenario == Scenario::Sweep {
            return Err(SchemaError::new("sweep.scenario", "sweeps cannot nest"));
        }
        let count = |o: &Option<Vec<_>>| o.as_ref().map_or(1, |v: &Vec<_>| v.len());
        let total = count(&sw.dims)
            .checked_mul(sw.curvatures.as_ref().map_or(1, |v| v.len()))
            .and_then(|x| x.checked_mul(sw.functions.as_ref().map_or(1, |v| v.len())));
        match total {
            Some(t) if t <= MAX_SWEEP_RUNS => Ok(()),
            _ => Err(SchemaError::new(
                "sweep",
                format!("parameter product exceeds {MAX_SWEEP_RUNS} runs"),
            )),
        }
    }

    /// Expands a sweep into single-run configurations in a fixed order:
    /// dimensions outermost, then curvature pairs, then functions.
    pub fn expand_sweep(&self) -> Vec<RunConfig> {
        let Some(sw) = &self.sweep else {
            return Vec::new();
        };
        let dims = sw.dims.clone().unwrap_or_else(|| vec![self.space.dim]);
        let curv = sw
            .curvatures
            .clone()
            .unwrap_or_else(|| vec![[self.space.k, self.space.k_prime()]]);
        let funcs: Vec<Option<FunctionConfig>> = match &sw.functions {
            Some(v) => v.iter().cloned().map(Some).collect(),
            None => vec![self.function.clone()],
        };
        let mut out = Vec::new();
        for &dim in &dims {
            for &[k, kp] in &curv {
                for f in &funcs {
                    let mut c = self.clone();
                    c.scenario = sw.scenario;
                    c.sweep = None;
                    c.output = None;
                    c.space = SpaceConfig {
                        dim,
                        k,
                        k_prime: Some(kp),
                    };
                    c.function = f.clone();
                    out.push(c);
                }
            }
        }
        out
    }
}
