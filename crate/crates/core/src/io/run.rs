//! Mode drivers: build the operators a configuration describes, compute, and
//! write CSV/JSON outputs plus a checksummed manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::config::{ConfigError, Mode, RunConfig};
use super::persist::{save_eigensystem, PersistError};
use crate::basis::{kinetic_matrix, position_matrix, potential_matrix, BasisError, BasisSpec, PotentialSpec};
use crate::operator::{diagonalize, max_norm, vector_norm, CMatrix, CVector, HermitianOperator, OperatorError};
use crate::scattering::{
    continuum_indices, detect_wave_limit, intertwining_defect, moller_abel_average, moller_resolvent,
    s_matrix, t_matrix, Direction, EpsilonWindow, ScatteringConfig, ScatteringError, ScatteringPair,
    Verdict, INTERTWINING_TIMES,
};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Scattering(#[from] ScatteringError),
    #[error(transparent)]
    Persist(#[from] PersistError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("non-finite value in {file}, row {row}")]
    NonFinite { file: String, row: usize },
}

impl RunError {
    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config",
            RunError::Basis(_) => "basis",
            RunError::Operator(_) => "operator",
            RunError::Scattering(_) => "scattering",
            RunError::Persist(_) => "persist",
            RunError::Io { .. } => "io",
            RunError::NonFinite { .. } => "non_finite",
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Formats a float with 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Collects rows, rejecting non-finite cells, and writes CSV.
struct Table {
    name: &'static str,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &'static str, header: &[&'static str]) -> Self {
        Self {
            name,
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, ints: &[usize], floats: &[f64]) -> Result<(), RunError> {
        if floats.iter().any(|v| !v.is_finite()) {
            return Err(RunError::NonFinite {
                file: self.name.to_string(),
                row: self.rows.len() + 1,
            });
        }
        let mut row: Vec<String> = ints.iter().map(|i| i.to_string()).collect();
        row.extend(floats.iter().map(|&v| num(v)));
        self.rows.push(row);
        Ok(())
    }

    fn push_matrix(&mut self, m: &CMatrix) -> Result<(), RunError> {
        for j in 0..m.nrows() {
            for k in 0..m.ncols() {
                self.push(&[j, k], &[m[(j, k)].re, m[(j, k)].im])?;
            }
        }
        Ok(())
    }

    fn write(&self, out: &mut Outputs) -> Result<(), RunError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| RunError::Io {
            path: self.name.to_string(),
            source: std::io::Error::other(e.to_string()),
        };
        w.write_record(&self.header).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| RunError::Io {
            path: self.name.to_string(),
            source: std::io::Error::other(e.to_string()),
        })?;
        out.write(self.name, &bytes)
    }
}

#[derive(Serialize)]
struct FileRecord {
    file: String,
    sha256: String,
    bytes: u64,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Output directory plus the checksum record of every file written to it.
struct Outputs {
    dir: PathBuf,
    files: Vec<FileRecord>,
}

impl Outputs {
    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), RunError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(io_err(&path))?;
        self.record(name, bytes);
        Ok(())
    }

    fn record(&mut self, name: &str, bytes: &[u8]) {
        self.files.push(FileRecord {
            file: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), RunError> {
        let mut text = serde_json::to_string_pretty(value).expect("serializable report");
        text.push('\n');
        self.write(name, text.as_bytes())
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'a str,
    version: &'a str,
    mode: &'a str,
    config: Option<FileRecord>,
    inputs: Vec<FileRecord>,
    outputs: &'a [FileRecord],
}

/// Runs one configuration, writing outputs under `out_dir`. `config_text` is
/// the source document, checksummed into the manifest.
pub fn run(config: &RunConfig, config_text: Option<&str>, out_dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut out = Outputs {
        dir: out_dir.to_path_buf(),
        files: Vec::new(),
    };
    match config.mode {
        Mode::Spectrum => run_spectrum(config, &mut out)?,
        Mode::Evolve => run_evolve(config, &mut out)?,
        Mode::Scatter => run_scatter(config, &mut out)?,
        Mode::Converge => run_converge(config, &mut out)?,
    }

    let mut inputs = Vec::new();
    for p in &config.inputs {
        let bytes = fs::read(p).map_err(io_err(p))?;
        inputs.push(FileRecord {
            file: p.display().to_string(),
            sha256: sha256_hex(&bytes),
            bytes: bytes.len() as u64,
        });
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        mode: config.mode.as_str(),
        config: config_text.map(|t| FileRecord {
            file: "config".into(),
            sha256: sha256_hex(t.as_bytes()),
            bytes: t.len() as u64,
        }),
        inputs,
        outputs: &out.files,
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("serializable manifest");
    text.push('\n');
    let path = out_dir.join("manifest.json");
    fs::write(&path, text).map_err(io_err(&path))?;

    let mut written: Vec<PathBuf> = out.files.iter().map(|f| out_dir.join(&f.file)).collect();
    written.push(path);
    Ok(written)
}

/// `p² + V` on the given basis.
pub fn hamiltonian(spec: &BasisSpec, potential: &PotentialSpec, quad_order: usize) -> Result<HermitianOperator, RunError> {
    let v = potential_matrix(potential, spec, quad_order)?;
    Ok(kinetic_matrix(spec).add(&v)?)
}

fn run_spectrum(config: &RunConfig, out: &mut Outputs) -> Result<(), RunError> {
    let h = hamiltonian(&config.basis, &config.potential, config.quad_order)?;
    let eig = diagonalize(&h)?;
    let mut table = Table::new("eigenvalues.csv", &["index", "eigenvalue"]);
    for (i, &v) in eig.eigenvalues().iter().enumerate() {
        table.push(&[i], &[v])?;
    }
    table.write(out)?;
    let path = out.dir.join("eigensystem.hqev");
    save_eigensystem(&eig, &path)?;
    let bytes = fs::read(&path).map_err(io_err(&path))?;
    out.record("eigensystem.hqev", &bytes);
    Ok(())
}

fn run_evolve(config: &RunConfig, out: &mut Outputs) -> Result<(), RunError> {
    let state = config.initial_state.as_ref().ok_or(ConfigError::MissingKey("state.width".into()))?;
    let h = hamiltonian(&config.basis, &config.potential, config.quad_order)?;
    let eig = diagonalize(&h)?;
    let q = position_matrix(&config.basis);
    let x0 = CVector::from_vec(state.coefficients.clone());
    let mut table = Table::new("evolution.csv", &["t", "norm", "overlap_re", "overlap_im", "position"]);
    for &t in &config.evolve_times {
        let xt = crate::operator::evolve(&eig, t, &x0)?;
        let overlap = x0.dotc(&xt);
        let position = xt.dotc(&q.apply(&xt)?).re;
        table.push(&[], &[t, vector_norm(&xt), overlap.re, overlap.im, position])?;
    }
    table.write(out)
}

#[derive(Serialize)]
struct WaveReport {
    direction: &'static str,
    abel_resolvent_distance: f64,
    intertwining_times: Vec<f64>,
    intertwining_defects: Vec<f64>,
}

#[derive(Serialize)]
struct WaveLimitReport {
    direction: &'static str,
    convergent: bool,
    final_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    settle_time: Option<f64>,
}

#[derive(Serialize)]
struct ScatterReport {
    dimension: usize,
    epsilon: f64,
    t_max: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    energy_window: Option<(f64, f64)>,
    window_indices: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon_window: Option<EpsilonWindowReport>,
    t_matrix_dual_gap: f64,
    s_discrepancy: f64,
    s_discrepancy_window: f64,
    s_unitarity_defect_window: f64,
    wave_operators: Vec<WaveReport>,
    wave_limits: Vec<WaveLimitReport>,
}

#[derive(Serialize)]
struct EpsilonWindowReport {
    energy: f64,
    local_spacing: f64,
    contains_epsilon: bool,
}

struct ScatterResult {
    indices: Vec<usize>,
    discrepancy_window: f64,
    unitarity_window: f64,
    intertwining_window: f64,
    wave_limit: Option<(Verdict, f64)>,
}

/// Energy at which to check the ε window: the packet mean energy if a state
/// is given, else the centre of the energy window.
fn reference_energy(pair: &ScatteringPair, state: Option<&CVector>, window: Option<(f64, f64)>) -> Option<f64> {
    if let Some(x) = state {
        let coeffs = pair.eig_free().eigenvectors().ad_mul(x);
        let e: f64 = coeffs
            .iter()
            .zip(pair.eig_free().eigenvalues())
            .map(|(c, l)| c.norm_sqr() * l)
            .sum();
        return Some(e);
    }
    window.map(|(lo, hi)| 0.5 * (lo + hi))
}

fn warn_epsilon(pair: &ScatteringPair, eps: f64, energy: Option<f64>) -> Option<EpsilonWindowReport> {
    let energy = energy?;
    let w = EpsilonWindow::at_energy(pair.eig_free(), energy);
    let contains = w.contains(eps);
    if !contains {
        eprintln!(
            "warning: epsilon {eps} is outside the validity window ({:.6e}, {:.6e}) at energy {energy:.6e}",
            w.local_spacing, w.energy
        );
    }
    Some(EpsilonWindowReport {
        energy,
        local_spacing: w.local_spacing,
        contains_epsilon: contains,
    })
}

fn scatter_pair(spec: &BasisSpec, potential: &PotentialSpec, quad_order: usize) -> Result<ScatteringPair, RunError> {
    let free = kinetic_matrix(spec);
    let v = potential_matrix(potential, spec, quad_order)?;
    Ok(ScatteringPair::from_interaction(free, &v)?)
}

fn window_indices(pair: &ScatteringPair, window: Option<(f64, f64)>) -> Vec<usize> {
    match window {
        Some((lo, hi)) => continuum_indices(pair.eig_free(), lo, hi),
        None => (0..pair.dimension()).collect(),
    }
}

fn run_scatter(config: &RunConfig, out: &mut Outputs) -> Result<(), RunError> {
    let cfg = config
        .scattering
        .as_ref()
        .ok_or(ConfigError::MissingKey("scattering.epsilon".into()))?;
    let pair = scatter_pair(&config.basis, &config.potential, config.quad_order)?;
    let indices = window_indices(&pair, config.energy_window);
    let state = config
        .initial_state
        .as_ref()
        .map(|s| CVector::from_vec(s.coefficients.clone()));
    let eps_report = warn_epsilon(&pair, cfg.epsilon(), reference_energy(&pair, state.as_ref(), config.energy_window));

    let mut diag = Table::new(
        "wave_operators.csv",
        &["direction", "t", "intertwining_defect", "intertwining_defect_window", "abel_resolvent_distance"],
    );
    let mut wave_reports = Vec::new();
    for dir in [Direction::Plus, Direction::Minus] {
        let abel = moller_abel_average(&pair, cfg, dir);
        let res = moller_resolvent(&pair, cfg, dir);
        let distance = max_norm(&(&abel.matrix - &res.matrix));
        for (&t, &defect) in INTERTWINING_TIMES.iter().zip(&res.diagnostics) {
            let windowed = intertwining_defect(&pair, &res.matrix, t, Some(&indices));
            diag.rows.push(vec![
                dir.label().to_string(),
                num(t),
                num(defect),
                num(windowed),
                num(distance),
            ]);
            if !(defect.is_finite() && windowed.is_finite() && distance.is_finite()) {
                return Err(RunError::NonFinite {
                    file: "wave_operators.csv".into(),
                    row: diag.rows.len(),
                });
            }
        }
        wave_reports.push(WaveReport {
            direction: dir.label(),
            abel_resolvent_distance: distance,
            intertwining_times: INTERTWINING_TIMES.to_vec(),
            intertwining_defects: res.diagnostics.clone(),
        });
    }
    diag.write(out)?;

    let t = t_matrix(&pair, cfg);
    let mut tt = Table::new("t_matrix.csv", &["j", "k", "re", "im"]);
    tt.push_matrix(&t.matrix)?;
    tt.write(out)?;

    let s = s_matrix(&pair, cfg);
    let mut sd = Table::new("s_matrix_direct.csv", &["j", "k", "re", "im"]);
    sd.push_matrix(&s.direct)?;
    sd.write(out)?;
    let mut sb = Table::new("s_matrix_born.csv", &["j", "k", "re", "im"]);
    sb.push_matrix(&s.born_like)?;
    sb.write(out)?;

    let mut wave_limits = Vec::new();
    if let Some(x) = &state {
        for dir in [Direction::Plus, Direction::Minus] {
            let lim = detect_wave_limit(&pair, x, cfg, dir)?;
            wave_limits.push(WaveLimitReport {
                direction: dir.label(),
                convergent: lim.verdict == Verdict::Convergent,
                final_residual: *lim.residuals.last().unwrap_or(&0.0),
                settle_time: lim.settle_time,
            });
        }
    }

    let report = ScatterReport {
        dimension: pair.dimension(),
        epsilon: cfg.epsilon(),
        t_max: cfg.t_max(),
        energy_window: config.energy_window,
        window_indices: indices.len(),
        epsilon_window: eps_report,
        t_matrix_dual_gap: t.dual_gap,
        s_discrepancy: s.discrepancy,
        s_discrepancy_window: s.discrepancy_on(&indices),
        s_unitarity_defect_window: s.unitarity_defect_on(&indices),
        wave_operators: wave_reports,
        wave_limits,
    };
    check_report_finite("scattering_report.json", &report)?;
    out.write_json("scattering_report.json", &report)
}

/// serde_json writes non-finite floats as `null`; absent options are skipped,
/// so any `null` in a report is a non-finite value.
fn check_report_finite<T: Serialize>(name: &str, report: &T) -> Result<(), RunError> {
    fn has_null(v: &serde_json::Value) -> bool {
        match v {
            serde_json::Value::Null => true,
            serde_json::Value::Array(a) => a.iter().any(has_null),
            serde_json::Value::Object(o) => o.values().any(has_null),
            _ => false,
        }
    }
    let value = serde_json::to_value(report).expect("serializable report");
    if has_null(&value) {
        return Err(RunError::NonFinite {
            file: name.to_string(),
            row: 0,
        });
    }
    Ok(())
}

fn scatter_at(
    spec: &BasisSpec,
    potential: &PotentialSpec,
    cfg: &ScatteringConfig,
    window: Option<(f64, f64)>,
    state: Option<&CVector>,
) -> Result<ScatterResult, RunError> {
    let pair = scatter_pair(spec, potential, spec.default_quadrature_order().max(potential.required_quadrature_order(spec.dimension())))?;
    let indices = window_indices(&pair, window);
    let s = s_matrix(&pair, cfg);
    let w = moller_resolvent(&pair, cfg, Direction::Plus).matrix;
    let wave_limit = match state {
        Some(x) => {
            let lim = detect_wave_limit(&pair, x, cfg, Direction::Plus)?;
            Some((lim.verdict, *lim.residuals.last().unwrap_or(&0.0)))
        }
        None => None,
    };
    Ok(ScatterResult {
        discrepancy_window: s.discrepancy_on(&indices),
        unitarity_window: s.unitarity_defect_on(&indices),
        intertwining_window: intertwining_defect(&pair, &w, INTERTWINING_TIMES[0], Some(&indices)),
        wave_limit,
        indices,
    })
}

fn run_converge(config: &RunConfig, out: &mut Outputs) -> Result<(), RunError> {
    let conv = config
        .converge
        .as_ref()
        .ok_or(ConfigError::MissingKey("converge.dimensions".into()))?;

    // Lowest eigenvalues per dimension, and successive differences.
    let mut energies = Table::new("energy_convergence.csv", &["dimension", "level", "eigenvalue"]);
    let mut diffs = Table::new("energy_differences.csv", &["dimension_from", "dimension_to", "level", "abs_difference"]);
    let mut previous: Option<(usize, Vec<f64>)> = None;
    for &n in &conv.dimensions {
        let spec = config.basis.with_dimension(n)?;
        let q = spec.default_quadrature_order().max(config.potential.required_quadrature_order(n));
        let eig = diagonalize(&hamiltonian(&spec, &config.potential, q)?)?;
        let low: Vec<f64> = eig.eigenvalues()[..conv.levels].to_vec();
        for (level, &e) in low.iter().enumerate() {
            energies.push(&[n, level], &[e])?;
        }
        if let Some((m, prev)) = &previous {
            for (level, (a, b)) in prev.iter().zip(&low).enumerate() {
                diffs.push(&[*m, n, level], &[(a - b).abs()])?;
            }
        }
        previous = Some((n, low));
    }
    energies.write(out)?;
    diffs.write(out)?;

    if conv.epsilons.is_empty() {
        return Ok(());
    }
    // (N, ε, T) scattering sweep.
    let tolerance = config.scattering.as_ref().map_or(1e-3, |s| s.tolerance());
    let steps = config.scattering.as_ref().map_or(100, |s| s.t_grid().len() - 1);
    let mut header = vec!["dimension", "epsilon", "t_max", "window_size", "s_discrepancy_window", "unitarity_defect_window", "intertwining_defect_window"];
    let with_state = config.initial_state.is_some();
    if with_state {
        header.extend(["wave_limit_convergent", "wave_limit_final_residual"]);
    }
    let mut sweep = Table::new("sweep.csv", &header);
    for &n in &conv.dimensions {
        let spec = config.basis.with_dimension(n)?;
        let state = match &config.initial_state {
            Some(s) => {
                let q = spec.default_quadrature_order();
                Some(CVector::from_vec(s.coefficients_for(&spec, q)?))
            }
            None => None,
        };
        for &eps in &conv.epsilons {
            for &t_max in &conv.t_max_values {
                let cfg = ScatteringConfig::uniform(eps, t_max, steps, tolerance)?;
                let r = scatter_at(&spec, &config.potential, &cfg, config.energy_window, state.as_ref())?;
                let floats = [eps, t_max];
                let metrics = [r.discrepancy_window, r.unitarity_window, r.intertwining_window];
                if floats.iter().chain(&metrics).any(|v| !v.is_finite()) {
                    return Err(RunError::NonFinite {
                        file: "sweep.csv".into(),
                        row: sweep.rows.len() + 1,
                    });
                }
                let mut row = vec![n.to_string(), num(eps), num(t_max), r.indices.len().to_string()];
                row.extend(metrics.iter().map(|&v| num(v)));
                if let Some((verdict, residual)) = r.wave_limit {
                    if !residual.is_finite() {
                        return Err(RunError::NonFinite {
                            file: "sweep.csv".into(),
                            row: sweep.rows.len() + 1,
                        });
                    }
                    row.push((verdict == Verdict::Convergent).to_string());
                    row.push(num(residual));
                }
                sweep.rows.push(row);
            }
        }
    }
    sweep.write(out)
}
