//! Run configuration: a TOML document whose keys are read as flat dotted
//! names (`basis.dimension`, `scattering.epsilon`, ...). Either
//! `basis.dimension = 64` or a `[basis]` table with `dimension = 64` works.
//!
//! | key                          | type            | default / notes                          |
//! |------------------------------|-----------------|------------------------------------------|
//! | `mode`                       | string          | `spectrum`, `evolve`, `scatter`, `converge` |
//! | `basis.dimension`            | integer ≥ 2     | required except in `converge`            |
//! | `basis.scale`                | float > 0       | 1                                        |
//! | `basis.quad_order`           | integer         | max(2N, 64)                              |
//! | `potential.kind`             | string          | `polynomial`, `harmonic`, `gaussian`, `tabulated`, `zero` |
//! | `potential.coeffs`           | float array     | polynomial: `c_0 + c_1 x + ...`          |
//! | `potential.amplitude/width`  | float           | gaussian `a·exp(−x²/(2w²))`              |
//! | `potential.table`            | array of [x, v] | tabulated, inline                        |
//! | `potential.table_file`       | path            | tabulated, CSV `x,v`                     |
//! | `state.center/width/momentum`| float           | gaussian packet                          |
//! | `state.coefficients_file`    | path            | CSV `re,im`, one row per basis function  |
//! | `evolve.times`               | float array     | or `evolve.t_max` + `evolve.steps`       |
//! | `scattering.epsilon`         | float > 0       | required for `scatter`                   |
//! | `scattering.t_max`           | float > 0       | required for `scatter`                   |
//! | `scattering.steps`           | integer ≥ 1     | 100                                      |
//! | `scattering.tolerance`       | float > 0       | 1e-3                                     |
//! | `scattering.energy_window`   | [lo, hi]        | whole free spectrum                      |
//! | `converge.dimensions`        | integer array   | required for `converge`, increasing      |
//! | `converge.levels`            | integer ≥ 1     | 4                                        |
//! | `converge.epsilons`          | float array     | optional (N, ε, T) sweep                 |
//! | `converge.t_max_values`      | float array     | defaults to `[scattering.t_max]`         |
//! | `output.dir`                 | path            | overridden by `--out`                    |
//!
//! Relative paths are resolved against the directory holding the config.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;
use toml::Value;

use crate::basis::{gaussian_packet, project_function, BasisSpec, PotentialSpec};
use crate::scattering::ScatteringConfig;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown key \"{0}\"")]
    UnknownKey(String),
    #[error("missing required key \"{0}\"")]
    MissingKey(String),
    #[error("key \"{key}\": expected {expected}")]
    Type { key: String, expected: &'static str },
    #[error("key \"{key}\": {constraint}")]
    Range { key: String, constraint: String },
    #[error("key \"{key}\": cannot read {path}: {reason}")]
    Path {
        key: String,
        path: String,
        reason: String,
    },
}

impl ConfigError {
    /// The offending key, when the error concerns one.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Syntax(_) => None,
            ConfigError::UnknownKey(k) | ConfigError::MissingKey(k) => Some(k),
            ConfigError::Type { key, .. }
            | ConfigError::Range { key, .. }
            | ConfigError::Path { key, .. } => Some(key),
        }
    }
}

fn range(key: &str, constraint: impl Into<String>) -> ConfigError {
    ConfigError::Range {
        key: key.to_string(),
        constraint: constraint.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Spectrum,
    Evolve,
    Scatter,
    Converge,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Spectrum => "spectrum",
            Mode::Evolve => "evolve",
            Mode::Scatter => "scatter",
            Mode::Converge => "converge",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "spectrum" => Ok(Mode::Spectrum),
            "evolve" => Ok(Mode::Evolve),
            "scatter" => Ok(Mode::Scatter),
            "converge" => Ok(Mode::Converge),
            _ => Err(()),
        }
    }
}

/// How the initial state was specified.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSource {
    Packet {
        center: f64,
        width: f64,
        momentum: f64,
    },
    CoefficientFile(PathBuf),
}

/// Initial state and its normalized Hermite coefficients on the configured
/// basis.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialState {
    pub source: StateSource,
    pub coefficients: Vec<Complex64>,
}

impl InitialState {
    /// Coefficients on another basis. Packets are re-expanded; coefficient
    /// files are only valid for the dimension they were written for.
    pub fn coefficients_for(
        &self,
        spec: &BasisSpec,
        quad_order: usize,
    ) -> Result<Vec<Complex64>, ConfigError> {
        match &self.source {
            StateSource::Packet {
                center,
                width,
                momentum,
            } => expand_packet(*center, *width, *momentum, spec, quad_order, "state.center"),
            StateSource::CoefficientFile(_) => {
                if self.coefficients.len() != spec.dimension() {
                    return Err(range(
                        "state.coefficients_file",
                        format!(
                            "has {} coefficients, basis needs {}",
                            self.coefficients.len(),
                            spec.dimension()
                        ),
                    ));
                }
                Ok(self.coefficients.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergeSpec {
    pub dimensions: Vec<usize>,
    pub levels: usize,
    pub epsilons: Vec<f64>,
    pub t_max_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub basis: BasisSpec,
    pub quad_order: usize,
    pub potential: PotentialSpec,
    pub scattering: Option<ScatteringConfig>,
    pub energy_window: Option<(f64, f64)>,
    pub evolve_times: Vec<f64>,
    pub initial_state: Option<InitialState>,
    pub converge: Option<ConvergeSpec>,
    pub output_dir: Option<PathBuf>,
    /// External files the configuration read, for the manifest.
    pub inputs: Vec<PathBuf>,
}

const KNOWN_KEYS: &[&str] = &[
    "mode",
    "basis.dimension",
    "basis.scale",
    "basis.quad_order",
    "potential.kind",
    "potential.coeffs",
    "potential.amplitude",
    "potential.width",
    "potential.table",
    "potential.table_file",
    "state.center",
    "state.width",
    "state.momentum",
    "state.coefficients_file",
    "evolve.times",
    "evolve.t_max",
    "evolve.steps",
    "scattering.epsilon",
    "scattering.t_max",
    "scattering.steps",
    "scattering.tolerance",
    "scattering.energy_window",
    "converge.dimensions",
    "converge.levels",
    "converge.epsilons",
    "converge.t_max_values",
    "output.dir",
];

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

/// Typed access to the flattened key map.
struct Keys {
    map: BTreeMap<String, Value>,
    base_dir: PathBuf,
}

impl Keys {
    fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn required<T>(&self, key: &str, get: impl Fn(&Self, &str) -> Result<Option<T>, ConfigError>) -> Result<T, ConfigError> {
        get(self, key)?.ok_or_else(|| ConfigError::MissingKey(key.to_string()))
    }

    fn float(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.map.get(key) {
            None => Ok(None),
            Some(v) => as_float(v).map(Some).ok_or(ConfigError::Type {
                key: key.to_string(),
                expected: "a number",
            }),
        }
    }

    fn positive(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        let v = self.float(key)?;
        if let Some(x) = v {
            if !(x.is_finite() && x > 0.0) {
                return Err(range(key, format!("must be positive and finite, got {x}")));
            }
        }
        Ok(v)
    }

    fn integer(&self, key: &str, min: i64) -> Result<Option<usize>, ConfigError> {
        match self.map.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) => {
                if *i < min {
                    Err(range(key, format!("must be at least {min}, got {i}")))
                } else {
                    Ok(Some(*i as usize))
                }
            }
            Some(_) => Err(ConfigError::Type {
                key: key.to_string(),
                expected: "an integer",
            }),
        }
    }

    fn string(&self, key: &str) -> Result<Option<&str>, ConfigError> {
        match self.map.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(_) => Err(ConfigError::Type {
                key: key.to_string(),
                expected: "a string",
            }),
        }
    }

    fn floats(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        match self.map.get(key) {
            None => Ok(None),
            Some(Value::Array(a)) => a
                .iter()
                .map(as_float)
                .collect::<Option<Vec<_>>>()
                .map(Some)
                .ok_or(ConfigError::Type {
                    key: key.to_string(),
                    expected: "an array of numbers",
                }),
            Some(_) => Err(ConfigError::Type {
                key: key.to_string(),
                expected: "an array of numbers",
            }),
        }
    }

    fn integers(&self, key: &str) -> Result<Option<Vec<usize>>, ConfigError> {
        let err = || ConfigError::Type {
            key: key.to_string(),
            expected: "an array of non-negative integers",
        };
        match self.map.get(key) {
            None => Ok(None),
            Some(Value::Array(a)) => a
                .iter()
                .map(|v| v.as_integer().filter(|i| *i >= 0).map(|i| i as usize))
                .collect::<Option<Vec<_>>>()
                .map(Some)
                .ok_or_else(err),
            Some(_) => Err(err()),
        }
    }

    fn path(&self, key: &str) -> Result<Option<PathBuf>, ConfigError> {
        Ok(self.string(key)?.map(|s| {
            let p = Path::new(s);
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                self.base_dir.join(p)
            }
        }))
    }
}

fn as_float(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn read_file(key: &str, path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|e| ConfigError::Path {
        key: key.to_string(),
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}

/// Parses two-column numeric CSV, skipping a non-numeric header row.
fn read_pairs(key: &str, path: &Path) -> Result<Vec<(f64, f64)>, ConfigError> {
    let text = read_file(key, path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let bad = |reason: String| ConfigError::Path {
            key: key.to_string(),
            path: path.display().to_string(),
            reason,
        };
        let record = record.map_err(|e| bad(e.to_string()))?;
        if record.len() != 2 {
            return Err(bad(format!("row {}: expected 2 columns, got {}", line + 1, record.len())));
        }
        match (record[0].parse::<f64>(), record[1].parse::<f64>()) {
            (Ok(a), Ok(b)) => {
                if !(a.is_finite() && b.is_finite()) {
                    return Err(bad(format!("row {}: non-finite value", line + 1)));
                }
                rows.push((a, b));
            }
            _ if line == 0 => {}
            _ => return Err(bad(format!("row {}: not numeric", line + 1))),
        }
    }
    Ok(rows)
}

fn expand_packet(
    center: f64,
    width: f64,
    momentum: f64,
    spec: &BasisSpec,
    quad_order: usize,
    key: &str,
) -> Result<Vec<Complex64>, ConfigError> {
    let coeffs = project_function(gaussian_packet(center, width, momentum), spec, quad_order)
        .map_err(|e| range(key, e.to_string()))?;
    normalize(coeffs, key)
}

fn normalize(mut coeffs: Vec<Complex64>, key: &str) -> Result<Vec<Complex64>, ConfigError> {
    let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if !(norm.is_finite() && norm > 1e-12) {
        return Err(range(
            key,
            format!("state has norm {norm:e} on this basis; it is not representable"),
        ));
    }
    for c in &mut coeffs {
        *c /= norm;
    }
    Ok(coeffs)
}

/// Parses and validates a configuration. `mode` overrides (and must agree
/// with) the document's `mode` key; `base_dir` anchors relative paths.
pub fn parse_config(
    text: &str,
    mode: Option<Mode>,
    base_dir: &Path,
) -> Result<RunConfig, ConfigError> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
        ConfigError::Syntax(e.message().to_string())
    })?;
    let mut map = BTreeMap::new();
    flatten("", &table, &mut map);
    if let Some(unknown) = map.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
        return Err(ConfigError::UnknownKey(unknown.clone()));
    }
    let keys = Keys {
        map,
        base_dir: base_dir.to_path_buf(),
    };
    let mut inputs = Vec::new();

    let mode = match (keys.string("mode")?, mode) {
        (None, None) => return Err(ConfigError::MissingKey("mode".into())),
        (None, Some(m)) => m,
        (Some(s), given) => {
            let parsed = s.parse::<Mode>().map_err(|_| {
                range("mode", format!("must be spectrum, evolve, scatter or converge, got \"{s}\""))
            })?;
            if let Some(g) = given {
                if g != parsed {
                    return Err(range("mode", format!("is \"{parsed}\" but the command is \"{g}\"")));
                }
            }
            parsed
        }
    };

    // Basis.
    let converge_dims = keys.integers("converge.dimensions")?;
    let scale = keys.positive("basis.scale")?.unwrap_or(1.0);
    let dimension = match keys.integer("basis.dimension", 2)? {
        Some(n) => n,
        None => match (&mode, &converge_dims) {
            (Mode::Converge, Some(d)) if !d.is_empty() => d[0],
            _ => return Err(ConfigError::MissingKey("basis.dimension".into())),
        },
    };
    let basis = BasisSpec::new(dimension, scale).map_err(|e| range("basis.dimension", e.to_string()))?;

    // Potential.
    let kind = keys.string("potential.kind")?.unwrap_or("polynomial");
    let expect_only = |allowed: &[&str]| -> Result<(), ConfigError> {
        for k in [
            "potential.coeffs",
            "potential.amplitude",
            "potential.width",
            "potential.table",
            "potential.table_file",
        ] {
            if keys.has(k) && !allowed.contains(&k) {
                return Err(range(k, format!("does not apply to potential.kind = \"{kind}\"")));
            }
        }
        Ok(())
    };
    let potential = match kind {
        "polynomial" => {
            expect_only(&["potential.coeffs"])?;
            PotentialSpec::polynomial(keys.required("potential.coeffs", Keys::floats)?)
        }
        "harmonic" => {
            expect_only(&[])?;
            PotentialSpec::harmonic()
        }
        "zero" => {
            expect_only(&[])?;
            PotentialSpec::zero()
        }
        "gaussian" => {
            expect_only(&["potential.amplitude", "potential.width"])?;
            let a = keys.required("potential.amplitude", Keys::float)?;
            let w = keys.required("potential.width", Keys::positive)?;
            PotentialSpec::gaussian(a, w)
        }
        "tabulated" => {
            expect_only(&["potential.table", "potential.table_file"])?;
            let points = match (keys.map.get("potential.table"), keys.path("potential.table_file")?) {
                (Some(_), Some(_)) => {
                    return Err(range("potential.table_file", "give either potential.table or potential.table_file"))
                }
                (Some(Value::Array(rows)), None) => rows
                    .iter()
                    .map(|r| match r.as_array().map(|a| a.as_slice()) {
                        Some([x, v]) => as_float(x).zip(as_float(v)),
                        _ => None,
                    })
                    .collect::<Option<Vec<_>>>()
                    .ok_or(ConfigError::Type {
                        key: "potential.table".into(),
                        expected: "an array of [x, value] pairs",
                    })?,
                (Some(_), None) => {
                    return Err(ConfigError::Type {
                        key: "potential.table".into(),
                        expected: "an array of [x, value] pairs",
                    })
                }
                (None, Some(p)) => {
                    let rows = read_pairs("potential.table_file", &p)?;
                    inputs.push(p);
                    rows
                }
                (None, None) => return Err(ConfigError::MissingKey("potential.table".into())),
            };
            let key = if keys.has("potential.table") { "potential.table" } else { "potential.table_file" };
            PotentialSpec::tabulated(&points).map_err(|e| range(key, e.to_string()))?
        }
        other => {
            return Err(range(
                "potential.kind",
                format!("must be polynomial, harmonic, gaussian, tabulated or zero, got \"{other}\""),
            ))
        }
    };
    let potential_key = match kind {
        "gaussian" => "potential.width",
        _ => "potential.coeffs",
    };
    potential.validate().map_err(|e| range(potential_key, e.to_string()))?;

    let required_quad = potential.required_quadrature_order(dimension);
    let quad_order = match keys.integer("basis.quad_order", 1)? {
        Some(q) => {
            if q < required_quad {
                return Err(range(
                    "basis.quad_order",
                    format!("must be at least {required_quad} for this potential and dimension, got {q}"),
                ));
            }
            if q > crate::basis::MAX_QUADRATURE_ORDER {
                return Err(range(
                    "basis.quad_order",
                    format!("must not exceed {}, got {q}", crate::basis::MAX_QUADRATURE_ORDER),
                ));
            }
            q
        }
        None => basis.default_quadrature_order().max(required_quad),
    };

    // Initial state.
    let packet_keys = ["state.center", "state.width", "state.momentum"];
    let has_packet = packet_keys.iter().any(|k| keys.has(k));
    let coeff_file = keys.path("state.coefficients_file")?;
    let initial_state = match (has_packet, coeff_file) {
        (true, Some(_)) => {
            return Err(range("state.coefficients_file", "give either a packet or a coefficient file"))
        }
        (true, None) => {
            let center = keys.float("state.center")?.unwrap_or(0.0);
            let width = keys.required("state.width", Keys::positive)?;
            let momentum = keys.float("state.momentum")?.unwrap_or(0.0);
            let coefficients = expand_packet(center, width, momentum, &basis, quad_order, "state.width")?;
            Some(InitialState {
                source: StateSource::Packet {
                    center,
                    width,
                    momentum,
                },
                coefficients,
            })
        }
        (false, Some(p)) => {
            let rows = read_pairs("state.coefficients_file", &p)?;
            if rows.len() != dimension {
                return Err(range(
                    "state.coefficients_file",
                    format!("has {} rows, basis.dimension is {dimension}", rows.len()),
                ));
            }
            let coeffs = rows.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
            let coefficients = normalize(coeffs, "state.coefficients_file")?;
            inputs.push(p.clone());
            Some(InitialState {
                source: StateSource::CoefficientFile(p),
                coefficients,
            })
        }
        (false, None) => None,
    };

    // Evolution times.
    let evolve_times = match (keys.floats("evolve.times")?, keys.has("evolve.t_max") || keys.has("evolve.steps")) {
        (Some(_), true) => return Err(range("evolve.times", "give either evolve.times or evolve.t_max with evolve.steps")),
        (Some(times), false) => {
            if times.is_empty() || times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[0] >= w[1]) {
                return Err(range("evolve.times", "must be a non-empty, finite, strictly increasing list"));
            }
            times
        }
        (None, true) => {
            let t_max = keys.required("evolve.t_max", Keys::positive)?;
            let steps = keys.required("evolve.steps", |k, key| k.integer(key, 1))?;
            (0..=steps).map(|k| t_max * k as f64 / steps as f64).collect()
        }
        (None, false) => Vec::new(),
    };

    // Scattering.
    let scattering = if keys.has("scattering.epsilon") || keys.has("scattering.t_max") || mode == Mode::Scatter {
        let eps = keys.required("scattering.epsilon", Keys::positive)?;
        let t_max = keys.required("scattering.t_max", Keys::positive)?;
        let steps = keys.integer("scattering.steps", 1)?.unwrap_or(100);
        let tol = keys.positive("scattering.tolerance")?.unwrap_or(1e-3);
        Some(ScatteringConfig::uniform(eps, t_max, steps, tol).map_err(|e| range("scattering.epsilon", e.to_string()))?)
    } else {
        for k in ["scattering.steps", "scattering.tolerance"] {
            if keys.has(k) {
                return Err(ConfigError::MissingKey("scattering.epsilon".into()));
            }
        }
        None
    };
    let energy_window = match keys.floats("scattering.energy_window")? {
        None => None,
        Some(w) => match w.as_slice() {
            [lo, hi] if lo.is_finite() && hi.is_finite() && lo < hi => Some((*lo, *hi)),
            _ => return Err(range("scattering.energy_window", "must be [lo, hi] with lo < hi")),
        },
    };

    // Convergence sweep.
    let converge = match converge_dims {
        None => None,
        Some(dims) => {
            if dims.is_empty() || dims.iter().any(|&d| d < 2) || dims.windows(2).any(|w| w[0] >= w[1]) {
                return Err(range("converge.dimensions", "must be a non-empty strictly increasing list of integers ≥ 2"));
            }
            let levels = keys.integer("converge.levels", 1)?.unwrap_or(4);
            if levels > dims[0] {
                return Err(range("converge.levels", format!("must not exceed the smallest dimension {}", dims[0])));
            }
            let epsilons = keys.floats("converge.epsilons")?.unwrap_or_default();
            if epsilons.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
                return Err(range("converge.epsilons", "all values must be positive and finite"));
            }
            let t_max_values = match keys.floats("converge.t_max_values")? {
                Some(t) => t,
                None => scattering.as_ref().map(|s| vec![s.t_max()]).unwrap_or_default(),
            };
            if t_max_values.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
                return Err(range("converge.t_max_values", "all values must be positive and finite"));
            }
            if !epsilons.is_empty() && t_max_values.is_empty() {
                return Err(ConfigError::MissingKey("converge.t_max_values".into()));
            }
            Some(ConvergeSpec {
                dimensions: dims,
                levels,
                epsilons,
                t_max_values,
            })
        }
    };

    match mode {
        Mode::Evolve => {
            if evolve_times.is_empty() {
                return Err(ConfigError::MissingKey("evolve.times".into()));
            }
            if initial_state.is_none() {
                return Err(ConfigError::MissingKey("state.width".into()));
            }
        }
        Mode::Converge if converge.is_none() => {
            return Err(ConfigError::MissingKey("converge.dimensions".into()));
        }
        _ => {}
    }

    Ok(RunConfig {
        mode,
        basis,
        quad_order,
        potential,
        scattering,
        energy_window,
        evolve_times,
        initial_state,
        converge,
        output_dir: keys.path("output.dir")?,
        inputs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        parse_config(text, None, Path::new("."))
    }

    #[test]
    fn minimal_spectrum_config_gets_defaults() {
        let c = parse("mode = \"spectrum\"\nbasis.dimension = 64\npotential.kind = \"polynomial\"\npotential.coeffs = [0, 0, 1]\n").unwrap();
        assert_eq!(c.mode, Mode::Spectrum);
        assert_eq!(c.basis.dimension(), 64);
        assert_eq!(c.basis.scale(), 1.0);
        assert_eq!(c.quad_order, 128);
        assert_eq!(c.potential, PotentialSpec::harmonic());
        assert!(c.scattering.is_none());
        let c = parse("mode = \"spectrum\"\n[basis]\ndimension = 8\n[potential]\ncoeffs = [1]\n").unwrap();
        assert_eq!(c.quad_order, 64);
    }

    #[test]
    fn negative_epsilon_names_key() {
        let e = parse("mode = \"scatter\"\nbasis.dimension = 16\npotential.kind = \"zero\"\nscattering.epsilon = -0.1\nscattering.t_max = 5.0\n").unwrap_err();
        assert!(matches!(e, ConfigError::Range { .. }));
        assert_eq!(e.key(), Some("scattering.epsilon"));
    }

    #[test]
    fn unknown_key_is_named() {
        let e = parse("mode = \"spectrum\"\nbasis.dimenson = 64\n").unwrap_err();
        assert_eq!(e, ConfigError::UnknownKey("basis.dimenson".into()));
        assert!(e.to_string().contains("basis.dimenson"));
    }

    #[test]
    fn missing_and_type_errors() {
        assert_eq!(parse("basis.dimension = 4\npotential.kind = \"zero\"").unwrap_err(), ConfigError::MissingKey("mode".into()));
        assert_eq!(parse("mode = \"spectrum\"\npotential.kind = \"zero\"").unwrap_err().key(), Some("basis.dimension"));
        let e = parse("mode = \"spectrum\"\nbasis.dimension = \"big\"\npotential.kind = \"zero\"").unwrap_err();
        assert!(matches!(e, ConfigError::Type { .. }));
        let e = parse("mode = \"spectrum\"\nbasis.dimension = 8\npotential.kind = \"gaussian\"\npotential.amplitude = 1.0\npotential.width = 1.0\nbasis.quad_order = 10").unwrap_err();
        assert_eq!(e.key(), Some("basis.quad_order"));
        let e = parse("mode = \"spectrum\"\nbasis.dimension = 8\npotential.kind = \"gaussian\"\npotential.amplitude = 1.0\npotential.coeffs = [1]").unwrap_err();
        assert_eq!(e.key(), Some("potential.coeffs"));
        assert!(matches!(parse("mode = ").unwrap_err(), ConfigError::Syntax(_)));
    }

    #[test]
    fn mode_override_must_agree() {
        let text = "mode = \"spectrum\"\nbasis.dimension = 8\npotential.kind = \"zero\"";
        assert!(parse_config(text, Some(Mode::Spectrum), Path::new(".")).is_ok());
        assert_eq!(parse_config(text, Some(Mode::Evolve), Path::new(".")).unwrap_err().key(), Some("mode"));
        let text = "basis.dimension = 8\npotential.kind = \"zero\"";
        assert_eq!(parse_config(text, Some(Mode::Spectrum), Path::new(".")).unwrap().mode, Mode::Spectrum);
    }

    #[test]
    fn packet_is_expanded_and_normalized() {
        let c = parse("mode = \"evolve\"\nbasis.dimension = 64\npotential.kind = \"harmonic\"\nstate.center = 1.0\nstate.width = 0.8\nstate.momentum = 0.5\nevolve.t_max = 1.0\nevolve.steps = 4\n").unwrap();
        let s = c.initial_state.unwrap();
        let norm: f64 = s.coefficients.iter().map(|z| z.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        assert_eq!(c.evolve_times, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn scatter_defaults() {
        let c = parse("mode = \"scatter\"\nbasis.dimension = 32\npotential.kind = \"gaussian\"\npotential.amplitude = 0.5\npotential.width = 1\nscattering.epsilon = 0.2\nscattering.t_max = 4\nscattering.energy_window = [1, 3]\n").unwrap();
        let s = c.scattering.unwrap();
        assert_eq!(s.t_grid().len(), 101);
        assert_eq!(s.tolerance(), 1e-3);
        assert_eq!(c.energy_window, Some((1.0, 3.0)));
        assert_eq!(c.quad_order, 64);
    }
}
