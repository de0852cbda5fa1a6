//! Scenario files: a sectioned key = value format.
//!
//! ```text
//! [physics]     hbar = 1, m = 1
//! [invariant]   A0 = 1, B0 = 0, C0 = 0, caustic_margin = 0.99
//! [force]       kind = zero | constant | sinusoidal | tabulated
//!               F0, omega, phi, times = t0, t1, ..., values = f0, f1, ...
//! [packet]      a = 0.5
//! [grid]        x_min, x_max, n, dt   (section optional)
//! [run]         t_end, n_samples, rel_tol, abs_tol, max_depth,
//!               l2_tol, moment_tol, norm_tol
//! ```
//!
//! `#` and `;` start comments. Every key has a default except `t_end`.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::path::Path;

use thiserror::Error;

use crate::force::ForceProfile;
use crate::grid::GridSpec;
use crate::invariant::{InvariantCoeffs, PhysicalParams, DEFAULT_CAUSTIC_MARGIN};
use crate::packet::PacketSpec;
use crate::quadrature::QuadratureConfig;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: String, source: IoMessage },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{}", validation_text(*line, message))]
    Validation { line: Option<usize>, message: String },
}

fn validation_text(line: Option<usize>, message: &str) -> String {
    match line {
        Some(l) => format!("validation error at line {l}: {message}"),
        None => format!("validation error: {message}"),
    }
}

/// Comparable wrapper for I/O failures.
#[derive(Error, Debug, Clone, PartialEq)]
#[error("{0}")]
pub struct IoMessage(pub String);

/// Acceptance thresholds used by `compare`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub l2: f64,
    pub moment: f64,
    pub norm: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            l2: 1e-5,
            moment: 1e-5,
            norm: 1e-9,
        }
    }
}

/// Grid used by `compare` when the scenario has no `[grid]` section.
pub fn default_grid() -> GridSpec {
    GridSpec::new(-20.0, 20.0, 2048, 1e-3).expect("valid default grid")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub params: PhysicalParams,
    pub a0: f64,
    pub b0: f64,
    pub c0: f64,
    pub caustic_margin: f64,
    pub force: ForceProfile,
    pub a: f64,
    pub grid: Option<GridSpec>,
    pub t_end: f64,
    pub n_samples: usize,
    pub quad: QuadratureConfig,
    pub tolerances: Tolerances,
}

impl Scenario {
    /// Defaults for everything except the end time.
    pub fn new(t_end: f64) -> Self {
        Self {
            params: PhysicalParams::default(),
            a0: 1.0,
            b0: 0.0,
            c0: 0.0,
            caustic_margin: DEFAULT_CAUSTIC_MARGIN,
            force: ForceProfile::Zero,
            a: 0.5,
            grid: None,
            t_end,
            n_samples: 11,
            quad: QuadratureConfig::default(),
            tolerances: Tolerances::default(),
        }
    }

    pub fn coeffs(&self) -> crate::Result<InvariantCoeffs> {
        InvariantCoeffs::new(self.a0, self.b0, self.c0, self.params, self.force.clone())?
            .with_caustic_margin(self.caustic_margin)
    }

    pub fn packet(&self) -> crate::Result<PacketSpec> {
        PacketSpec::new(self.coeffs()?, self.a, self.quad)
    }

    /// Uniform report times 0 = t₀ < … < t_end.
    pub fn sample_times(&self) -> Vec<f64> {
        let last = (self.n_samples - 1) as f64;
        (0..self.n_samples)
            .map(|k| self.t_end * k as f64 / last)
            .collect()
    }

    /// Checks the cross-field invariants of a scenario built in code.
    pub fn validate(&self) -> Result<(), ConfigError> {
        validate(self, &Lines::default())
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            source: IoMessage(e.to_string()),
        })?;
        text.parse()
    }

    /// Scenario file text that parses back to an identical scenario.
    pub fn emit(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "[physics]\nhbar = {}\nm = {}", self.params.hbar(), self.params.mass());
        let _ = writeln!(
            out,
            "\n[invariant]\nA0 = {}\nB0 = {}\nC0 = {}\ncaustic_margin = {}",
            self.a0, self.b0, self.c0, self.caustic_margin
        );
        out.push_str("\n[force]\n");
        match &self.force {
            ForceProfile::Zero => out.push_str("kind = zero\n"),
            ForceProfile::Constant { f0 } => {
                let _ = writeln!(out, "kind = constant\nF0 = {f0}");
            }
            ForceProfile::Sinusoidal {
                amplitude,
                omega,
                phase,
            } => {
                let _ = writeln!(out, "kind = sinusoidal\nF0 = {amplitude}\nomega = {omega}\nphi = {phase}");
            }
            ForceProfile::Tabulated(tab) => {
                let _ = writeln!(
                    out,
                    "kind = tabulated\ntimes = {}\nvalues = {}",
                    join(tab.times()),
                    join(tab.values())
                );
            }
        }
        let _ = writeln!(out, "\n[packet]\na = {}", self.a);
        if let Some(g) = &self.grid {
            let _ = writeln!(
                out,
                "\n[grid]\nx_min = {}\nx_max = {}\nn = {}\ndt = {}",
                g.x_min(),
                g.x_max(),
                g.n(),
                g.dt()
            );
        }
        let _ = writeln!(
            out,
            "\n[run]\nt_end = {}\nn_samples = {}\nrel_tol = {}\nabs_tol = {}\nmax_depth = {}\nl2_tol = {}\nmoment_tol = {}\nnorm_tol = {}",
            self.t_end,
            self.n_samples,
            self.quad.rel_tol,
            self.quad.abs_tol,
            self.quad.max_depth,
            self.tolerances.l2,
            self.tolerances.moment,
            self.tolerances.norm
        );
        out
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(", ")
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.emit())
    }
}

const KEYS: &[(&str, &[&str])] = &[
    ("physics", &["hbar", "m"]),
    ("invariant", &["A0", "B0", "C0", "caustic_margin"]),
    ("force", &["kind", "F0", "omega", "phi", "times", "values"]),
    ("packet", &["a"]),
    ("grid", &["x_min", "x_max", "n", "dt"]),
    (
        "run",
        &["t_end", "n_samples", "rel_tol", "abs_tol", "max_depth", "l2_tol", "moment_tol", "norm_tol"],
    ),
];

/// Raw key/value pairs with the line each came from.
#[derive(Default)]
struct Lines {
    entries: HashMap<(String, String), (String, usize)>,
    sections: HashMap<String, usize>,
}

impl Lines {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut lines = Lines::default();
        let mut section: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split(['#', ';']).next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Parse {
                    line,
                    message: format!("unterminated section header '{content}'"),
                })?;
                let name = name.trim();
                if !KEYS.iter().any(|(s, _)| *s == name) {
                    return Err(ConfigError::Parse {
                        line,
                        message: format!("unknown section [{name}]"),
                    });
                }
                if lines.sections.insert(name.to_string(), line).is_some() {
                    return Err(ConfigError::Parse {
                        line,
                        message: format!("duplicate section [{name}]"),
                    });
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Parse {
                line,
                message: format!("expected 'key = value', got '{content}'"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let sec = section.as_deref().ok_or_else(|| ConfigError::Parse {
                line,
                message: format!("key '{key}' appears before any section header"),
            })?;
            let allowed = KEYS.iter().find(|(s, _)| *s == sec).map(|(_, k)| *k).unwrap_or(&[]);
            if !allowed.contains(&key) {
                return Err(ConfigError::Parse {
                    line,
                    message: format!("unknown key '{key}' in [{sec}]"),
                });
            }
            if value.is_empty() {
                return Err(ConfigError::Parse {
                    line,
                    message: format!("missing value for '{key}'"),
                });
            }
            let slot = (sec.to_string(), key.to_string());
            if lines.entries.insert(slot, (value.to_string(), line)).is_some() {
                return Err(ConfigError::Parse {
                    line,
                    message: format!("duplicate key '{key}' in [{sec}]"),
                });
            }
        }
        Ok(lines)
    }

    fn line(&self, section: &str, key: &str) -> Option<usize> {
        self.entries
            .get(&(section.to_string(), key.to_string()))
            .map(|(_, l)| *l)
    }

    fn raw(&self, section: &str, key: &str) -> Option<(&str, usize)> {
        self.entries
            .get(&(section.to_string(), key.to_string()))
            .map(|(v, l)| (v.as_str(), *l))
    }

    fn real(&self, section: &str, key: &str, default: Option<f64>) -> Result<f64, ConfigError> {
        match self.raw(section, key) {
            Some((v, line)) => v.parse::<f64>().map_err(|_| ConfigError::Parse {
                line,
                message: format!("'{key}' expects a number, got '{v}'"),
            }),
            None => default.ok_or_else(|| ConfigError::Validation {
                line: self.sections.get(section).copied(),
                message: format!("missing required key '{key}' in [{section}]"),
            }),
        }
    }

    fn integer(&self, section: &str, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.raw(section, key) {
            Some((v, line)) => v.parse::<usize>().map_err(|_| ConfigError::Parse {
                line,
                message: format!("'{key}' expects a non-negative integer, got '{v}'"),
            }),
            None => Ok(default),
        }
    }

    fn list(&self, section: &str, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        let Some((v, line)) = self.raw(section, key) else {
            return Ok(None);
        };
        v.split(',')
            .map(|s| {
                let s = s.trim();
                s.parse::<f64>().map_err(|_| ConfigError::Parse {
                    line,
                    message: format!("'{key}' expects comma-separated numbers, got '{s}'"),
                })
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }
}

impl std::str::FromStr for Scenario {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let lines = Lines::parse(text)?;
        let invalid = |section: &str, key: &str, message: String| ConfigError::Validation {
            line: lines.line(section, key),
            message,
        };

        let hbar = lines.real("physics", "hbar", Some(1.0))?;
        let mass = lines.real("physics", "m", Some(1.0))?;
        let params = PhysicalParams::new(hbar, mass).map_err(|e| {
            let key = if hbar > 0.0 && hbar.is_finite() { "m" } else { "hbar" };
            invalid("physics", key, error_text(e))
        })?;

        let force = parse_force(&lines)?;
        let grid = if lines.sections.contains_key("grid") {
            let d = default_grid();
            let x_min = lines.real("grid", "x_min", Some(d.x_min()))?;
            let x_max = lines.real("grid", "x_max", Some(d.x_max()))?;
            let n = lines.integer("grid", "n", d.n())?;
            let dt = lines.real("grid", "dt", Some(d.dt()))?;
            let g = GridSpec::new(x_min, x_max, n, dt).map_err(|e| ConfigError::Validation {
                line: lines.sections.get("grid").copied(),
                message: error_text(e),
            })?;
            Some(g)
        } else {
            None
        };

        let qd = QuadratureConfig::default();
        let max_depth = lines.integer("run", "max_depth", qd.max_depth as usize)?;
        let scenario = Scenario {
            params,
            a0: lines.real("invariant", "A0", Some(1.0))?,
            b0: lines.real("invariant", "B0", Some(0.0))?,
            c0: lines.real("invariant", "C0", Some(0.0))?,
            caustic_margin: lines.real("invariant", "caustic_margin", Some(DEFAULT_CAUSTIC_MARGIN))?,
            force,
            a: lines.real("packet", "a", Some(0.5))?,
            grid,
            t_end: lines.real("run", "t_end", None)?,
            n_samples: lines.integer("run", "n_samples", 11)?,
            quad: QuadratureConfig {
                rel_tol: lines.real("run", "rel_tol", Some(qd.rel_tol))?,
                abs_tol: lines.real("run", "abs_tol", Some(qd.abs_tol))?,
                max_depth: u32::try_from(max_depth).unwrap_or(u32::MAX),
            },
            tolerances: Tolerances {
                l2: lines.real("run", "l2_tol", Some(Tolerances::default().l2))?,
                moment: lines.real("run", "moment_tol", Some(Tolerances::default().moment))?,
                norm: lines.real("run", "norm_tol", Some(Tolerances::default().norm))?,
            },
        };
        validate(&scenario, &lines)?;
        Ok(scenario)
    }
}

fn error_text(e: crate::Error) -> String {
    match e {
        crate::Error::InvalidParameter(m) => m,
        other => other.to_string(),
    }
}

fn parse_force(lines: &Lines) -> Result<ForceProfile, ConfigError> {
    let (kind, kind_line) = lines.raw("force", "kind").unwrap_or(("zero", 0));
    let invalid = |key: &str, e: crate::Error| ConfigError::Validation {
        line: lines.line("force", key).or(Some(kind_line)).filter(|&l| l > 0),
        message: error_text(e),
    };
    match kind {
        "zero" => Ok(ForceProfile::Zero),
        "constant" => {
            let f0 = lines.real("force", "F0", Some(0.0))?;
            ForceProfile::constant(f0).map_err(|e| invalid("F0", e))
        }
        "sinusoidal" => {
            let f0 = lines.real("force", "F0", Some(0.0))?;
            let omega = lines.real("force", "omega", Some(1.0))?;
            let phi = lines.real("force", "phi", Some(0.0))?;
            ForceProfile::sinusoidal(f0, omega, phi).map_err(|e| invalid("F0", e))
        }
        "tabulated" => {
            let times = lines.list("force", "times")?;
            let values = lines.list("force", "values")?;
            match (times, values) {
                (Some(t), Some(v)) => ForceProfile::tabulated(t, v).map_err(|e| invalid("times", e)),
                _ => Err(ConfigError::Validation {
                    line: Some(kind_line),
                    message: "tabulated force needs both 'times' and 'values'".into(),
                }),
            }
        }
        other => Err(ConfigError::Parse {
            line: kind_line,
            message: format!("unknown force kind '{other}' (expected zero, constant, sinusoidal or tabulated)"),
        }),
    }
}

fn validate(s: &Scenario, lines: &Lines) -> Result<(), ConfigError> {
    let fail = |section: &str, key: &str, message: String| {
        Err(ConfigError::Validation {
            line: lines.line(section, key),
            message,
        })
    };
    if !(s.a > 0.0 && s.a.is_finite()) {
        return fail("packet", "a", format!("a must be positive (got {})", s.a));
    }
    for (key, v) in [("A0", s.a0), ("B0", s.b0), ("C0", s.c0)] {
        if !v.is_finite() {
            return fail("invariant", key, format!("{key} must be finite"));
        }
    }
    if s.a0 == 0.0 {
        return fail("invariant", "A0", "A0 must be nonzero".into());
    }
    if !(s.caustic_margin > 0.0 && s.caustic_margin <= 1.0) {
        return fail("invariant", "caustic_margin", "caustic_margin must lie in (0, 1]".into());
    }
    if !(s.t_end > 0.0 && s.t_end.is_finite()) {
        return fail("run", "t_end", format!("t_end must be positive (got {})", s.t_end));
    }
    if s.n_samples < 2 {
        return fail("run", "n_samples", format!("n_samples must be at least 2 (got {})", s.n_samples));
    }
    if let Err(e) = s.quad.validate() {
        return fail("run", "rel_tol", error_text(e));
    }
    for (key, v) in [("l2_tol", s.tolerances.l2), ("moment_tol", s.tolerances.moment), ("norm_tol", s.tolerances.norm)] {
        if !(v > 0.0 && v.is_finite()) {
            return fail("run", key, format!("{key} must be positive"));
        }
    }
    let coeffs = s.coeffs().map_err(|e| ConfigError::Validation {
        line: None,
        message: error_text(e),
    })?;
    if let Some(t_star) = coeffs.caustic_time() {
        if coeffs.check_time(s.t_end).is_err() {
            return fail(
                "run",
                "t_end",
                format!(
                    "t_end = {} reaches the caustic at t* = m*A0/B0 = {} (guard {})",
                    s.t_end,
                    t_star,
                    coeffs.guard_time()
                ),
            );
        }
    }
    if let ForceProfile::Tabulated(tab) = &s.force {
        let (first, last) = (tab.times()[0], tab.times()[tab.times().len() - 1]);
        if first > 0.0 || last < s.t_end {
            return fail(
                "force",
                "times",
                format!("tabulated force covers [{first}, {last}] but the run needs [0, {}]", s.t_end),
            );
        }
    }
    Ok(())
}
