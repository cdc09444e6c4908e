//! Declarative run configuration (single JSON document) and its
//! validation into a resolved, numerics-ready form.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use dirac_mti_core::cases::RationalPotential;
use dirac_mti_core::field::{ScalarField, SpinorField};
use dirac_mti_core::grid::Grid;
use dirac_mti_core::potential::PotentialSampler;
use num_complex::Complex64;

use crate::expr::Expr;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
pub struct Domain {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub enum CaseSpec {
    /// Built-in case id; `"nm"` is the bundled Gaussian/rational case.
    Builtin(String),
    Custom(CustomCase),
}

impl Default for CaseSpec {
    fn default() -> Self {
        CaseSpec::Builtin("nm".into())
    }
}

/// User-supplied case: expressions over `(t, x)` for the potentials and
/// over `x` for the initial data. Imaginary parts default to zero, time
/// derivatives to central differences when the potential depends on `t`.
#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct CustomCase {
    pub v: String,
    pub a1: String,
    #[serde(default)]
    pub v_t: Option<String>,
    #[serde(default)]
    pub a1_t: Option<String>,
    pub phi1: String,
    pub phi2: String,
    #[serde(default)]
    pub phi1_im: Option<String>,
    #[serde(default)]
    pub phi2_im: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Mti,
    Tsfp,
    Schrodinger,
    Pauli,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Mti => "mti",
            Method::Tsfp => "tsfp",
            Method::Schrodinger => "schrodinger",
            Method::Pauli => "pauli",
        }
    }
}

fn default_method() -> Method {
    Method::Mti
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct ReferenceSpec {
    /// Reference mesh size `h_e`.
    pub h: f64,
    /// Reference time step `tau_e`.
    pub tau: f64,
    /// Extra snapshot times beyond the study's final time.
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct RunConfig {
    pub domain: Domain,
    #[serde(default)]
    pub case: CaseSpec,
    pub epsilons: Vec<f64>,
    /// Mesh sizes; alternative to `m_values`.
    #[serde(default)]
    pub h_values: Vec<f64>,
    /// Mode counts; alternative to `h_values`.
    #[serde(default)]
    pub m_values: Vec<usize>,
    pub taus: Vec<f64>,
    pub final_time: f64,
    #[serde(default = "default_method")]
    pub method: Method,
    /// Reference-solution spec; required for sweeps and `make-ref`,
    /// ignored by the limit study.
    #[serde(default)]
    pub reference: Option<ReferenceSpec>,
    /// Observer cadence in steps (0 = endpoints only).
    #[serde(default)]
    pub observer_every: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Worker threads for the sweep; 0 picks the machine default.
    #[serde(default)]
    pub threads: usize,
    /// Also emit whitespace-separated data files for plotting.
    #[serde(default)]
    pub emit_plot_data: bool,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        Ok(serde_json::from_str(&text)?)
    }

    /// The part of the configuration that determines cell values; hashed
    /// for the restart cache.
    pub fn numeric_identity(&self) -> String {
        let case = serde_json::to_string(&self.case).unwrap();
        let (h_e, tau_e) = self
            .reference
            .as_ref()
            .map_or((f64::NAN, f64::NAN), |r| (r.h, r.tau));
        format!(
            "a={};b={};case={};T={};method={};h_e={};tau_e={}",
            self.domain.a,
            self.domain.b,
            case,
            self.final_time,
            self.method.name(),
            h_e,
            tau_e,
        )
    }

    pub fn resolve(&self) -> Result<ResolvedConfig, ConfigError> {
        let Domain { a, b } = self.domain;
        if !(b > a) || !a.is_finite() || !b.is_finite() {
            return Err(invalid(format!("domain must satisfy b > a, got ({a}, {b})")));
        }
        if self.epsilons.is_empty() {
            return Err(invalid("epsilons must be non-empty"));
        }
        for &eps in &self.epsilons {
            if !(eps > 0.0 && eps <= 1.0) {
                return Err(invalid(format!("epsilon {eps} outside (0, 1]")));
            }
        }
        if !(self.final_time > 0.0 && self.final_time.is_finite()) {
            return Err(invalid(format!("final_time {} must be positive", self.final_time)));
        }
        if self.taus.is_empty() {
            return Err(invalid("taus must be non-empty"));
        }
        for &tau in &self.taus {
            if !(tau > 0.0 && tau <= self.final_time) {
                return Err(invalid(format!(
                    "tau {tau} outside (0, final_time = {}]",
                    self.final_time
                )));
            }
        }

        let length = b - a;
        let m_of_h = |h: f64| -> Result<usize, ConfigError> {
            if !(h > 0.0) {
                return Err(invalid(format!("mesh size {h} must be positive")));
            }
            let m = (length / h).round();
            if !((length / h) - m).abs().le(&1e-9) {
                return Err(invalid(format!("mesh size {h} does not divide the domain")));
            }
            Ok(m as usize)
        };

        let mut m_values: Vec<usize> = Vec::new();
        match (self.h_values.is_empty(), self.m_values.is_empty()) {
            (false, true) => {
                for &h in &self.h_values {
                    m_values.push(m_of_h(h)?);
                }
            }
            (true, false) => m_values.extend_from_slice(&self.m_values),
            (true, true) => return Err(invalid("one of h_values or m_values is required")),
            (false, false) => {
                return Err(invalid("h_values and m_values are mutually exclusive"))
            }
        }
        let mut grids = Vec::new();
        for &m in &m_values {
            let grid = Grid::new(a, b, m)
                .map_err(|e| invalid(format!("study grid with M = {m}: {e}")))?;
            grids.push(grid);
        }

        let reference = match &self.reference {
            None => None,
            Some(spec) => {
                let reference_m = m_of_h(spec.h)?;
                let reference_grid = Grid::new(a, b, reference_m)
                    .map_err(|e| invalid(format!("reference grid: {e}")))?;
                for grid in &grids {
                    if !grid.is_subgrid_of(&reference_grid) {
                        return Err(invalid(format!(
                            "study grid M = {} is not a sub-grid of the reference grid M = {}",
                            grid.len(),
                            reference_grid.len()
                        )));
                    }
                }
                let tau_min = self.taus.iter().cloned().fold(f64::INFINITY, f64::min);
                if !(spec.tau > 0.0) {
                    return Err(invalid("reference tau must be positive"));
                }
                if spec.tau > tau_min / 10.0 {
                    return Err(invalid(format!(
                        "reference tau {} too coarse (need at most a tenth of the smallest study tau {})",
                        spec.tau, tau_min
                    )));
                }
                let mut snapshot_times = spec.snapshot_times.clone();
                snapshot_times.push(self.final_time);
                snapshot_times.sort_by(f64::total_cmp);
                snapshot_times.dedup();
                for &t in &snapshot_times {
                    if !(t > 0.0 && t <= self.final_time) {
                        return Err(invalid(format!(
                            "snapshot time {t} outside (0, final_time]"
                        )));
                    }
                }
                Some(ResolvedReference {
                    grid: reference_grid,
                    tau: spec.tau,
                    snapshot_times,
                })
            }
        };

        let case = ResolvedCase::build(&self.case)?;

        Ok(ResolvedConfig {
            domain: self.domain,
            case,
            epsilons: self.epsilons.clone(),
            grids,
            taus: self.taus.clone(),
            final_time: self.final_time,
            method: self.method,
            reference,
            observer_every: self.observer_every,
            threads: self.threads,
            emit_plot_data: self.emit_plot_data,
        })
    }
}

/// Validated reference spec.
#[derive(Debug, Clone)]
pub struct ResolvedReference {
    pub grid: Grid,
    pub tau: f64,
    pub snapshot_times: Vec<f64>,
}

/// Potential sampler backed by parsed expressions. Analytic time
/// derivatives are used when supplied; otherwise a central difference in
/// `t` stands in for time-dependent potentials.
pub struct ExprPotential {
    v: Expr,
    a1: Expr,
    v_t: Option<Expr>,
    a1_t: Option<Expr>,
    time_independent: bool,
}

const FD_HALF_STEP: f64 = 5e-6;

impl PotentialSampler for ExprPotential {
    fn sample(&self, t: f64, x: f64) -> (f64, f64) {
        (self.v.eval(t, x), self.a1.eval(t, x))
    }

    fn sample_dt(&self, t: f64, x: f64) -> (f64, f64) {
        let dv = match &self.v_t {
            Some(e) => e.eval(t, x),
            None => (self.v.eval(t + FD_HALF_STEP, x) - self.v.eval(t - FD_HALF_STEP, x))
                / (2.0 * FD_HALF_STEP),
        };
        let da = match &self.a1_t {
            Some(e) => e.eval(t, x),
            None => (self.a1.eval(t + FD_HALF_STEP, x) - self.a1.eval(t - FD_HALF_STEP, x))
                / (2.0 * FD_HALF_STEP),
        };
        (dv, da)
    }

    fn is_time_independent(&self) -> bool {
        self.time_independent
    }
}

/// A validated case: sampler plus initial data constructors.
#[derive(Clone)]
pub enum ResolvedCase {
    Builtin,
    Custom(Arc<CustomResolved>),
}

pub struct CustomResolved {
    pub sampler: ExprPotential,
    pub phi1: Expr,
    pub phi2: Expr,
    pub phi1_im: Option<Expr>,
    pub phi2_im: Option<Expr>,
}

impl ResolvedCase {
    fn build(spec: &CaseSpec) -> Result<ResolvedCase, ConfigError> {
        match spec {
            CaseSpec::Builtin(id) if id == "nm" => Ok(ResolvedCase::Builtin),
            CaseSpec::Builtin(id) => Err(invalid(format!("unknown case id '{id}'"))),
            CaseSpec::Custom(custom) => {
                let parse = |label: &str, src: &str| {
                    Expr::parse(src)
                        .map_err(|e| invalid(format!("case field '{label}': {e}")))
                };
                let v = parse("v", &custom.v)?;
                let a1 = parse("a1", &custom.a1)?;
                let v_t = custom.v_t.as_deref().map(|s| parse("v_t", s)).transpose()?;
                let a1_t = custom
                    .a1_t
                    .as_deref()
                    .map(|s| parse("a1_t", s))
                    .transpose()?;
                let phi1 = parse("phi1", &custom.phi1)?;
                let phi2 = parse("phi2", &custom.phi2)?;
                let phi1_im = custom
                    .phi1_im
                    .as_deref()
                    .map(|s| parse("phi1_im", s))
                    .transpose()?;
                let phi2_im = custom
                    .phi2_im
                    .as_deref()
                    .map(|s| parse("phi2_im", s))
                    .transpose()?;
                for (label, e) in [
                    ("phi1", &phi1),
                    ("phi2", &phi2),
                ] {
                    if e.depends_on_time() {
                        return Err(invalid(format!("initial data '{label}' must not depend on t")));
                    }
                }
                let time_independent = !v.depends_on_time() && !a1.depends_on_time();
                Ok(ResolvedCase::Custom(Arc::new(CustomResolved {
                    sampler: ExprPotential {
                        v,
                        a1,
                        v_t,
                        a1_t,
                        time_independent,
                    },
                    phi1,
                    phi2,
                    phi1_im,
                    phi2_im,
                })))
            }
        }
    }

    pub fn sampler(&self) -> &dyn PotentialSampler {
        match self {
            ResolvedCase::Builtin => &RationalPotential,
            ResolvedCase::Custom(custom) => &custom.sampler,
        }
    }

    pub fn initial_spinor(&self, grid: Grid) -> SpinorField {
        match self {
            ResolvedCase::Builtin => dirac_mti_core::cases::gaussian_initial(grid),
            ResolvedCase::Custom(custom) => SpinorField::from_fn(grid, |x| {
                let re1 = custom.phi1.eval(0.0, x);
                let im1 = custom.phi1_im.as_ref().map_or(0.0, |e| e.eval(0.0, x));
                let re2 = custom.phi2.eval(0.0, x);
                let im2 = custom.phi2_im.as_ref().map_or(0.0, |e| e.eval(0.0, x));
                (Complex64::new(re1, im1), Complex64::new(re2, im2))
            }),
        }
    }

    pub fn initial_scalars(&self, grid: Grid) -> (ScalarField, ScalarField) {
        match self {
            ResolvedCase::Builtin => (
                dirac_mti_core::cases::gaussian_initial_up(grid),
                dirac_mti_core::cases::gaussian_initial_dn(grid),
            ),
            ResolvedCase::Custom(_) => {
                let spinor = self.initial_spinor(grid);
                (
                    ScalarField::from_values(grid, spinor.up().to_vec()).expect("same grid"),
                    ScalarField::from_values(grid, spinor.dn().to_vec()).expect("same grid"),
                )
            }
        }
    }
}

/// Validated, numerics-ready configuration.
pub struct ResolvedConfig {
    pub domain: Domain,
    pub case: ResolvedCase,
    pub epsilons: Vec<f64>,
    pub grids: Vec<Grid>,
    pub taus: Vec<f64>,
    pub final_time: f64,
    pub method: Method,
    pub reference: Option<ResolvedReference>,
    pub observer_every: usize,
    pub threads: usize,
    pub emit_plot_data: bool,
}
