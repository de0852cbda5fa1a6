//! Orchestration behind the CLI verbs and the CSV/summary writers.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::force::ForceProfile;
use crate::grid::{grid_moments, init_from_packet, l2_distance, GridSpec, GridState, SplitStep};
use crate::invariant::PhysicalParams;
use crate::packet::{MomentSet, MomentSource, GRID_TOL};
use crate::scenario::{default_grid, ConfigError, Scenario};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridColumns {
    pub mean_x: f64,
    pub mean_p: f64,
    pub sigma_x: f64,
    pub sigma_p: f64,
    pub norm: f64,
    pub l2_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportRow {
    pub t: f64,
    pub mean_x: f64,
    pub mean_p: f64,
    pub sigma_x: f64,
    pub sigma_p: f64,
    pub product: f64,
    pub grid: Option<GridColumns>,
}

pub const ANALYTIC_COLUMNS: [&str; 6] = [
    "t",
    "mean_x_analytic",
    "mean_p_analytic",
    "sigma_x_analytic",
    "sigma_p_analytic",
    "product_analytic",
];

pub const GRID_COLUMNS: [&str; 6] = [
    "mean_x_grid",
    "mean_p_grid",
    "sigma_x_grid",
    "sigma_p_grid",
    "norm_grid",
    "l2_error",
];

fn num(v: f64) -> String {
    // adding +0.0 maps -0.0 to 0.0 so signs of exact zeros do not leak into reports
    format!("{:.16e}", v + 0.0)
}

/// CSV with a header row; numbers carry 17 significant digits.
pub fn rows_to_csv(rows: &[ReportRow]) -> String {
    let with_grid = rows.first().is_some_and(|r| r.grid.is_some());
    let mut header: Vec<&str> = ANALYTIC_COLUMNS.to_vec();
    if with_grid {
        header.extend(GRID_COLUMNS);
    }
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        let mut cells = vec![r.t, r.mean_x, r.mean_p, r.sigma_x, r.sigma_p, r.product];
        if let Some(g) = r.grid {
            cells.extend([g.mean_x, g.mean_p, g.sigma_x, g.sigma_p, g.norm, g.l2_error]);
        }
        out.push_str(&cells.into_iter().map(num).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

fn analytic_row(m: &MomentSet, hbar: f64) -> Result<ReportRow> {
    m.validate(hbar)?;
    Ok(ReportRow {
        t: m.t,
        mean_x: m.mean_x,
        mean_p: m.mean_p,
        sigma_x: m.sigma_x,
        sigma_p: m.sigma_p,
        product: m.uncertainty_product(),
        grid: None,
    })
}

/// Propagator step that divides the report interval exactly.
fn snapped_grid(grid: GridSpec, interval: f64) -> Result<GridSpec> {
    let steps = (interval / grid.dt() - 1e-9).ceil().max(1.0);
    grid.with_dt(interval / steps)
}

/// Analytic moments at uniform times; with a grid, the split-step solution is
/// carried along and compared with the closed form at every report time.
pub fn run_evolve(s: &Scenario) -> Result<Vec<ReportRow>> {
    evolve_on(s, s.grid)
}

fn evolve_on(s: &Scenario, grid: Option<GridSpec>) -> Result<Vec<ReportRow>> {
    let packet = s.packet()?;
    let hbar = s.params.hbar();
    let times = s.sample_times();
    let mut rows = Vec::with_capacity(times.len());

    let mut numeric = match grid {
        Some(g) => {
            let g = snapped_grid(g, times[1] - times[0])?;
            let state = init_from_packet(&packet, g, 0.0)?;
            Some((SplitStep::new(g, packet.coeffs()), state))
        }
        None => None,
    };

    for &t in &times {
        let frame = packet.frame(t)?;
        let mut row = analytic_row(&frame.moments(), hbar)?;
        if let Some((stepper, state)) = numeric.as_mut() {
            if t > state.t() {
                *state = stepper.propagate(state, packet.coeffs(), t)?;
            }
            let m = grid_moments(state, packet.coeffs())?;
            let bound = 0.5 * hbar;
            if m.uncertainty_product() < bound - GRID_TOL {
                return Err(Error::BoundViolation {
                    product: m.uncertainty_product(),
                    bound,
                });
            }
            let exact = GridState::from_fn(*state.spec(), t, |x| frame.amplitude(x))?;
            row.grid = Some(GridColumns {
                mean_x: m.mean_x,
                mean_p: m.mean_p,
                sigma_x: m.sigma_x,
                sigma_p: m.sigma_p,
                norm: m.norm,
                l2_error: l2_distance(state, &exact)?,
            });
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Outcome of an analytic-versus-grid comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareSummary {
    pub max_l2: f64,
    pub mean_l2: f64,
    pub max_dmean_x: f64,
    pub max_dmean_p: f64,
    pub max_dsigma_x: f64,
    pub max_dsigma_p: f64,
    pub norm_drift: f64,
    pub breaches: Vec<&'static str>,
}

impl CompareSummary {
    pub fn passed(&self) -> bool {
        self.breaches.is_empty()
    }
}

impl fmt::Display for CompareSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "max_l2_error = {}", num(self.max_l2))?;
        writeln!(f, "mean_l2_error = {}", num(self.mean_l2))?;
        writeln!(f, "max_mean_x_diff = {}", num(self.max_dmean_x))?;
        writeln!(f, "max_mean_p_diff = {}", num(self.max_dmean_p))?;
        writeln!(f, "max_sigma_x_diff = {}", num(self.max_dsigma_x))?;
        writeln!(f, "max_sigma_p_diff = {}", num(self.max_dsigma_p))?;
        writeln!(f, "norm_drift = {}", num(self.norm_drift))?;
        for b in &self.breaches {
            writeln!(f, "breach = {b}")?;
        }
        writeln!(f, "status = {}", if self.passed() { "pass" } else { "fail" })
    }
}

/// Runs `evolve` with a grid (the default grid if the scenario has none) and
/// checks the discrepancies against the scenario tolerances.
pub fn run_compare(s: &Scenario) -> Result<CompareSummary> {
    let rows = evolve_on(s, Some(s.grid.unwrap_or_else(default_grid)))?;
    let grid: Vec<(&ReportRow, GridColumns)> = rows.iter().filter_map(|r| r.grid.map(|g| (r, g))).collect();
    let max = |f: &dyn Fn(&ReportRow, &GridColumns) -> f64| grid.iter().map(|(r, g)| f(r, g)).fold(0.0, f64::max);
    let max_l2 = max(&|_, g| g.l2_error);
    let mean_l2 = grid.iter().map(|(_, g)| g.l2_error).sum::<f64>() / grid.len() as f64;
    let norm0 = grid[0].1.norm;
    let summary_values = (
        max(&|r, g| (r.mean_x - g.mean_x).abs()),
        max(&|r, g| (r.mean_p - g.mean_p).abs()),
        max(&|r, g| (r.sigma_x - g.sigma_x).abs()),
        max(&|r, g| (r.sigma_p - g.sigma_p).abs()),
        max(&|_, g| (g.norm - norm0).abs()),
    );
    let (dmx, dmp, dsx, dsp, drift) = summary_values;
    let tol = s.tolerances;
    let mut breaches = Vec::new();
    if max_l2 > tol.l2 {
        breaches.push("l2_error");
    }
    for (name, v) in [("mean_x", dmx), ("mean_p", dmp), ("sigma_x", dsx), ("sigma_p", dsp)] {
        if v > tol.moment {
            breaches.push(name);
        }
    }
    if drift > tol.norm {
        breaches.push("norm_drift");
    }
    Ok(CompareSummary {
        max_l2,
        mean_l2,
        max_dmean_x: dmx,
        max_dmean_p: dmp,
        max_dsigma_x: dsx,
        max_dsigma_p: dsp,
        norm_drift: drift,
        breaches,
    })
}

/// Scenario fields that `sweep` can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    A,
    A0,
    B0,
    C0,
    F0,
    Omega,
    Phi,
    Hbar,
    Mass,
    TEnd,
}

impl FromStr for SweepParam {
    type Err = ConfigError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "a" => Self::A,
            "A0" => Self::A0,
            "B0" => Self::B0,
            "C0" => Self::C0,
            "F0" => Self::F0,
            "omega" => Self::Omega,
            "phi" => Self::Phi,
            "hbar" => Self::Hbar,
            "m" => Self::Mass,
            "t_end" => Self::TEnd,
            other => {
                return Err(ConfigError::Validation {
                    line: None,
                    message: format!(
                        "unknown sweep parameter '{other}' (expected a, A0, B0, C0, F0, omega, phi, hbar, m or t_end)"
                    ),
                })
            }
        })
    }
}

impl SweepParam {
    fn apply(self, s: &Scenario, value: f64) -> std::result::Result<Scenario, ConfigError> {
        let mut out = s.clone();
        let invalid = |e: Error| ConfigError::Validation {
            line: None,
            message: e.to_string(),
        };
        match self {
            Self::A => out.a = value,
            Self::A0 => out.a0 = value,
            Self::B0 => out.b0 = value,
            Self::C0 => out.c0 = value,
            Self::F0 => out.force = s.force.with_amplitude(value).map_err(invalid)?,
            Self::Omega | Self::Phi => match s.force {
                ForceProfile::Sinusoidal {
                    amplitude,
                    omega,
                    phase,
                } => {
                    out.force = if self == Self::Omega {
                        ForceProfile::sinusoidal(amplitude, value, phase)
                    } else {
                        ForceProfile::sinusoidal(amplitude, omega, value)
                    }
                    .map_err(invalid)?
                }
                _ => {
                    return Err(ConfigError::Validation {
                        line: None,
                        message: "omega and phi can only be swept for a sinusoidal force".into(),
                    })
                }
            },
            Self::Hbar => out.params = PhysicalParams::new(value, s.params.mass()).map_err(invalid)?,
            Self::Mass => out.params = PhysicalParams::new(s.params.hbar(), value).map_err(invalid)?,
            Self::TEnd => out.t_end = value,
        }
        out.validate()?;
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub sigma_x_0: f64,
    pub product_0: f64,
    pub sigma_x_end: f64,
    pub sigma_p_end: f64,
    pub product_end: f64,
    pub mean_x_end: f64,
    pub mean_p_end: f64,
}

pub const SWEEP_COLUMNS: [&str; 8] = [
    "value",
    "sigma_x_0",
    "product_0",
    "sigma_x_end",
    "sigma_p_end",
    "product_end",
    "mean_x_end",
    "mean_p_end",
];

#[derive(Debug)]
pub enum SweepError {
    Config(ConfigError),
    Numeric(Error),
}

/// One row per value, in input order: Δx and ΔxΔp at t = 0 and all moments at t_end.
pub fn run_sweep(s: &Scenario, param: SweepParam, values: &[f64]) -> std::result::Result<Vec<SweepRow>, SweepError> {
    values
        .iter()
        .map(|&value| {
            let scenario = param.apply(s, value).map_err(SweepError::Config)?;
            sweep_point(&scenario, value).map_err(SweepError::Numeric)
        })
        .collect()
}

fn sweep_point(s: &Scenario, value: f64) -> Result<SweepRow> {
    let packet = s.packet()?;
    let hbar = s.params.hbar();
    let start = packet.analytic_moments(0.0)?;
    let end = packet.analytic_moments(s.t_end)?;
    start.validate(hbar)?;
    end.validate(hbar)?;
    Ok(SweepRow {
        value,
        sigma_x_0: start.sigma_x,
        product_0: packet.uncertainty_product(0.0)?,
        sigma_x_end: end.sigma_x,
        sigma_p_end: end.sigma_p,
        product_end: packet.uncertainty_product(s.t_end)?,
        mean_x_end: end.mean_x,
        mean_p_end: end.mean_p,
    })
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = SWEEP_COLUMNS.join(",");
    out.push('\n');
    for r in rows {
        let cells = [
            r.value,
            r.sigma_x_0,
            r.product_0,
            r.sigma_x_end,
            r.sigma_p_end,
            r.product_end,
            r.mean_x_end,
            r.mean_p_end,
        ];
        out.push_str(&cells.map(num).join(","));
        out.push('\n');
    }
    out
}

/// Moments at a single time: closed form, plus the grid estimate when the
/// scenario has a grid.
pub fn moments_at(s: &Scenario, t: f64) -> Result<(MomentSet, Option<MomentSet>)> {
    let packet = s.packet()?;
    let analytic = packet.analytic_moments(t)?;
    analytic.validate(s.params.hbar())?;
    let grid = match s.grid {
        Some(g) => {
            let state = init_from_packet(&packet, g, 0.0)?;
            let state = SplitStep::new(g, packet.coeffs()).propagate(&state, packet.coeffs(), t)?;
            Some(grid_moments(&state, packet.coeffs())?)
        }
        None => None,
    };
    Ok((analytic, grid))
}

pub fn format_moments(m: &MomentSet) -> String {
    let source = match m.source {
        MomentSource::Analytic => "analytic",
        MomentSource::Grid => "grid",
    };
    format!(
        "source = {source}\nt = {}\nmean_x = {}\nmean_p = {}\nsigma_x = {}\nsigma_p = {}\nproduct = {}\nnorm = {}\n",
        num(m.t),
        num(m.mean_x),
        num(m.mean_p),
        num(m.sigma_x),
        num(m.sigma_p),
        num(m.uncertainty_product()),
        num(m.norm)
    )
}
