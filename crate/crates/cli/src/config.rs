//! Experiment configuration: a TOML document with one table per concern.
//!
//! ```toml
//! kind = "run"
//! threads = 4            # optional; default is all cores
//!
//! [grid]
//! n = 32
//! L = 8.0
//!
//! [initial]
//! preset = "fat-tail"    # maxwellian | bimodal | fat-tail | point-mass | from-file
//! m = 2.5
//!
//! [solver]
//! t_end = 0.5
//! dt = 0.01              # omit for the adaptive step
//! ```
//!
//! Unknown keys are rejected, and every rejection carries a line number.

use std::fmt;
use std::path::PathBuf;

use landau_core::evolution::{Clipping, DtPolicy, Scheme, SolverConfig};
use landau_core::hydro::Preset;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Run,
    VerifyCoefficients,
    VerifyEstimates,
    Classify,
    Hydro,
    Symmetry,
}

impl Kind {
    pub const ALL: [Kind; 6] = [
        Kind::Run,
        Kind::VerifyCoefficients,
        Kind::VerifyEstimates,
        Kind::Classify,
        Kind::Hydro,
        Kind::Symmetry,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Run => "run",
            Kind::VerifyCoefficients => "verify-coefficients",
            Kind::VerifyEstimates => "verify-estimates",
            Kind::Classify => "classify",
            Kind::Hydro => "hydro",
            Kind::Symmetry => "symmetry",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kind: Kind,
    /// Artifact directory; defaults to `<root>/<kind>-<hash>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialCondition>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimates: Option<EstimatesSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classify: Option<ClassifySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hydro: Option<HydroSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetry: Option<SymmetrySection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    #[serde(rename = "L")]
    pub extent: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialCondition {
    Maxwellian {
        #[serde(default = "one")]
        rho: f64,
        #[serde(default)]
        u: [f64; 3],
        #[serde(default = "one")]
        theta: f64,
    },
    Bimodal,
    FatTail {
        m: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Unit mass in one cell; the origin node when `center` is absent.
    PointMass {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<[usize; 3]>,
    },
    /// A distribution in the binary snapshot container.
    FromFile {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClippingMode {
    Off,
    ClipAndReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    /// Fixed step; absent means adaptive.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default = "one")]
    pub t_end: f64,
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
    #[serde(default = "default_clipping")]
    pub clipping: ClippingMode,
    #[serde(default = "default_safety")]
    pub safety: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ceiling: Option<f64>,
    #[serde(default = "default_m_list")]
    pub m_list: Vec<f64>,
}

fn default_scheme() -> Scheme {
    SolverConfig::default().scheme
}
fn default_stride() -> usize {
    SolverConfig::default().snapshot_stride
}
fn default_clipping() -> ClippingMode {
    ClippingMode::Off
}
fn default_safety() -> f64 {
    SolverConfig::default().safety
}
fn default_m_list() -> Vec<f64> {
    SolverConfig::default().m_list
}

impl Default for SolverSection {
    fn default() -> Self {
        Self::from_solver(&SolverConfig::default())
    }
}

impl SolverSection {
    pub fn from_solver(cfg: &SolverConfig) -> Self {
        Self {
            scheme: cfg.scheme,
            dt: match cfg.dt_policy {
                DtPolicy::Fixed(dt) => Some(dt),
                DtPolicy::Adaptive => None,
            },
            t_end: cfg.t_end,
            snapshot_stride: cfg.snapshot_stride,
            clipping: match cfg.clipping {
                Clipping::Off => ClippingMode::Off,
                Clipping::ClipAndReport => ClippingMode::ClipAndReport,
            },
            safety: cfg.safety,
            ceiling: cfg.ceiling,
            m_list: cfg.m_list.clone(),
        }
    }

    pub fn to_solver(&self) -> SolverConfig {
        SolverConfig {
            scheme: self.scheme,
            dt_policy: self.dt.map_or(DtPolicy::Adaptive, DtPolicy::Fixed),
            t_end: self.t_end,
            snapshot_stride: self.snapshot_stride,
            clipping: match self.clipping {
                ClippingMode::Off => Clipping::Off,
                ClippingMode::ClipAndReport => Clipping::ClipAndReport,
            },
            safety: self.safety,
            ceiling: self.ceiling,
            m_list: self.m_list.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatesSection {
    /// A `run` artifact directory; when absent the trajectory is computed
    /// from `[grid]`, `[initial]` and `[solver]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<PathBuf>,
    /// Weights for the envelope and level-set checks (non-integer, in (2, 5)).
    #[serde(default = "default_estimate_m")]
    pub m: Vec<f64>,
    #[serde(default)]
    pub level: LevelSection,
    /// `(α, m)` pairs for the convolution battery.
    #[serde(default = "default_convolution")]
    pub convolution: Vec<[f64; 2]>,
    /// `(p, m)` pairs for the `sup a` bound.
    #[serde(default = "default_sup_a")]
    pub sup_a: Vec<[f64; 2]>,
    /// Worst allowed relative Riccati margin.
    #[serde(default = "default_riccati_tol")]
    pub riccati_tolerance: f64,
}

fn default_estimate_m() -> Vec<f64> {
    vec![2.5]
}
fn default_convolution() -> Vec<[f64; 2]> {
    vec![[1.0, 2.5], [1.0, 3.0], [1.0, 4.0], [2.0, 2.5], [2.0, 4.0]]
}
fn default_sup_a() -> Vec<[f64; 2]> {
    vec![[2.0, 2.5], [2.0, 4.0]]
}
fn default_riccati_tol() -> f64 {
    1e-3
}

impl Default for EstimatesSection {
    fn default() -> Self {
        Self {
            trajectory: None,
            m: default_estimate_m(),
            level: LevelSection::default(),
            convolution: default_convolution(),
            sup_a: default_sup_a(),
            riccati_tolerance: default_riccati_tol(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LevelKind {
    Constant,
    #[default]
    Gronwall,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelSection {
    #[serde(default)]
    pub rule: LevelKind,
    /// Defaults to `‖f(0)‖_{L∞_m}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell0: Option<f64>,
    /// Grönwall rate; defaults to the measured `sup K̂`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_hat: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifySection {
    /// CSV with a header row.
    pub input: PathBuf,
    #[serde(default = "default_t_column")]
    pub t_column: String,
    #[serde(default = "default_value_column")]
    pub value_column: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hint: Option<f64>,
}

fn default_t_column() -> String {
    "t".into()
}
fn default_value_column() -> String {
    "sup".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HydroSection {
    pub preset: Preset,
    #[serde(default = "default_cells")]
    pub cells: usize,
    /// Defaults to the preset's own end time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    /// Write the profile CSV every `profile_stride` steps (and at the end).
    #[serde(default = "default_profile_stride")]
    pub profile_stride: usize,
}

fn default_cells() -> usize {
    400
}
fn default_profile_stride() -> usize {
    50
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetrySection {
    pub mu: f64,
    pub lambda: f64,
    pub t_end: f64,
    #[serde(default = "default_symmetry_tol")]
    pub tolerance: f64,
}

fn default_symmetry_tol() -> f64 {
    1e-3
}

/// A rejected document: 1-based line (when known) and reason.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of `key` inside `[section]` (top level when `section` is empty),
/// falling back to the section header, then to the first line.
fn locate(text: &str, section: &str, key: &str) -> usize {
    let mut current = String::new();
    let mut header = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().to_string();
            if current == section {
                header = Some(i + 1);
            }
            continue;
        }
        if current == section {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return i + 1;
                }
            }
        }
    }
    header.unwrap_or(1)
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError {
        line: e.span().map(|s| line_of(text, s.start)),
        message: e.message().trim().to_string(),
    })?;
    cfg.validate()
        .map_err(|(section, key, message)| ConfigError {
            line: Some(locate(text, section, key)),
            message: if section.is_empty() {
                format!("`{key}`: {message}")
            } else {
                format!("`{section}.{key}`: {message}")
            },
        })?;
    Ok(cfg)
}

pub fn emit_config(cfg: &RunConfig) -> String {
    toml::to_string(cfg).expect("configuration is always representable")
}

type Rejection = (&'static str, &'static str, String);

fn positive(section: &'static str, key: &'static str, x: f64) -> Result<(), Rejection> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err((
            section,
            key,
            format!("must be positive and finite, got {x}"),
        ))
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), Rejection> {
        if self.threads == Some(0) {
            return Err(("", "threads", "must be at least 1".into()));
        }
        let needs_grid = matches!(
            self.kind,
            Kind::Run | Kind::VerifyCoefficients | Kind::Symmetry
        ) || (self.kind == Kind::VerifyEstimates
            && self
                .estimates
                .as_ref()
                .and_then(|e| e.trajectory.as_ref())
                .is_none());
        if needs_grid {
            if self.grid.is_none() {
                return Err((
                    "",
                    "kind",
                    format!("`{}` needs a [grid] table", self.kind.name()),
                ));
            }
            if self.initial.is_none() {
                return Err((
                    "",
                    "kind",
                    format!("`{}` needs an [initial] table", self.kind.name()),
                ));
            }
        }
        if let Some(g) = &self.grid {
            if g.n < 4 || g.n % 2 != 0 {
                return Err((
                    "grid",
                    "n",
                    format!("must be even and at least 4, got {}", g.n),
                ));
            }
            positive("grid", "L", g.extent)?;
        }
        if let Some(init) = &self.initial {
            match init {
                InitialCondition::Maxwellian { rho, u, theta } => {
                    if !(*rho >= 0.0 && rho.is_finite()) {
                        return Err(("initial", "rho", format!("must be >= 0, got {rho}")));
                    }
                    if u.iter().any(|x| !x.is_finite()) {
                        return Err(("initial", "u", "must be finite".into()));
                    }
                    positive("initial", "theta", *theta)?;
                }
                InitialCondition::FatTail { m, amplitude } => {
                    positive("initial", "m", *m)?;
                    if !(*amplitude >= 0.0 && amplitude.is_finite()) {
                        return Err((
                            "initial",
                            "amplitude",
                            format!("must be >= 0, got {amplitude}"),
                        ));
                    }
                }
                InitialCondition::PointMass { center: Some(c) } => {
                    if let Some(g) = &self.grid {
                        if c.iter().any(|&i| i >= g.n) {
                            return Err((
                                "initial",
                                "center",
                                format!("{c:?} outside an n = {} lattice", g.n),
                            ));
                        }
                    }
                }
                _ => {}
            }
        }
        if let Some(s) = &self.solver {
            positive("solver", "t_end", s.t_end)?;
            if let Some(dt) = s.dt {
                positive("solver", "dt", dt)?;
            }
            if s.snapshot_stride == 0 {
                return Err(("solver", "snapshot_stride", "must be at least 1".into()));
            }
            if !(s.safety > 0.0 && s.safety <= 1.0) {
                return Err((
                    "solver",
                    "safety",
                    format!("must lie in (0, 1], got {}", s.safety),
                ));
            }
            if let Some(c) = s.ceiling {
                positive("solver", "ceiling", c)?;
            }
            if let Some(m) = s.m_list.iter().find(|m| !(**m >= 0.0 && m.is_finite())) {
                return Err(("solver", "m_list", format!("weights must be >= 0, got {m}")));
            }
        }
        match self.kind {
            Kind::VerifyEstimates => {
                let est = self.estimates.clone().unwrap_or_default();
                if let Some(m) = est
                    .m
                    .iter()
                    .find(|&&m| !(m > 2.0 && m < 5.0) || (m - m.round()).abs() < 1e-9)
                {
                    return Err((
                        "estimates",
                        "m",
                        format!("weights must be non-integer in (2, 5), got {m}"),
                    ));
                }
                positive("estimates", "riccati_tolerance", est.riccati_tolerance)?;
                if let Some(ell0) = est.level.ell0 {
                    if !(ell0 >= 0.0 && ell0.is_finite()) {
                        return Err((
                            "estimates.level",
                            "ell0",
                            format!("must be >= 0, got {ell0}"),
                        ));
                    }
                }
                if let Some(k) = est.level.k_hat {
                    if !k.is_finite() {
                        return Err(("estimates.level", "k_hat", "must be finite".into()));
                    }
                }
                if est.trajectory.is_none() {
                    let list = self.solver.clone().unwrap_or_default().m_list;
                    if let Some(m) = est
                        .m
                        .iter()
                        .find(|m| !list.iter().any(|x| (x - *m).abs() < 1e-12))
                    {
                        return Err(("estimates", "m", format!("{m} is not in solver.m_list")));
                    }
                }
            }
            Kind::Classify => {
                let Some(c) = &self.classify else {
                    return Err(("", "kind", "`classify` needs a [classify] table".into()));
                };
                if let Some(h) = c.hint {
                    if !h.is_finite() {
                        return Err(("classify", "hint", "must be finite".into()));
                    }
                }
            }
            Kind::Hydro => {
                let Some(h) = &self.hydro else {
                    return Err(("", "kind", "`hydro` needs a [hydro] table".into()));
                };
                if h.cells < 2 {
                    return Err((
                        "hydro",
                        "cells",
                        format!("need at least 2 cells, got {}", h.cells),
                    ));
                }
                if let Some(t) = h.t_end {
                    positive("hydro", "t_end", t)?;
                }
                if h.profile_stride == 0 {
                    return Err(("hydro", "profile_stride", "must be at least 1".into()));
                }
            }
            Kind::Symmetry => {
                let Some(s) = &self.symmetry else {
                    return Err(("", "kind", "`symmetry` needs a [symmetry] table".into()));
                };
                positive("symmetry", "mu", s.mu)?;
                positive("symmetry", "lambda", s.lambda)?;
                positive("symmetry", "t_end", s.t_end)?;
                positive("symmetry", "tolerance", s.tolerance)?;
            }
            Kind::Run | Kind::VerifyCoefficients => {}
        }
        Ok(())
    }
}
