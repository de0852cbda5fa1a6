//! External force profiles F(t) and their cumulative integrals.

use crate::error::{Error, Result};

/// Piecewise-linear force through strictly increasing sample times.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedForce {
    times: Vec<f64>,
    values: Vec<f64>,
    // Primitives of F and tau*F from times[0] to each knot.
    cum_impulse: Vec<f64>,
    cum_moment: Vec<f64>,
}

impl TabulatedForce {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::InvalidParameter(format!(
                "tabulated force has {} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.len() < 2 {
            return Err(Error::InvalidParameter(
                "tabulated force needs at least two samples".into(),
            ));
        }
        if times.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "tabulated force samples must be finite".into(),
            ));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "tabulated force times must be strictly increasing".into(),
            ));
        }
        let mut cum_impulse = vec![0.0; times.len()];
        let mut cum_moment = vec![0.0; times.len()];
        for i in 1..times.len() {
            let (di, dm) = segment_integrals(times[i - 1], values[i - 1], slope(&times, &values, i - 1), times[i] - times[i - 1]);
            cum_impulse[i] = cum_impulse[i - 1] + di;
            cum_moment[i] = cum_moment[i - 1] + dm;
        }
        Ok(Self {
            times,
            values,
            cum_impulse,
            cum_moment,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn range_check(&self, t: f64) -> Result<()> {
        let (start, end) = (self.times[0], self.times[self.times.len() - 1]);
        if t < start || t > end || t.is_nan() {
            return Err(Error::OutOfTabulatedRange { t, start, end });
        }
        Ok(())
    }

    // Index of the segment containing t (t already range-checked).
    fn segment(&self, t: f64) -> usize {
        let i = self.times.partition_point(|&s| s <= t);
        i.saturating_sub(1).min(self.times.len() - 2)
    }

    fn eval(&self, t: f64) -> Result<f64> {
        self.range_check(t)?;
        let i = self.segment(t);
        Ok(self.values[i] + slope(&self.times, &self.values, i) * (t - self.times[i]))
    }

    /// (∫F, ∫τF) from times[0] to t.
    fn primitives(&self, t: f64) -> Result<(f64, f64)> {
        self.range_check(t)?;
        let i = self.segment(t);
        let (di, dm) = segment_integrals(
            self.times[i],
            self.values[i],
            slope(&self.times, &self.values, i),
            t - self.times[i],
        );
        Ok((self.cum_impulse[i] + di, self.cum_moment[i] + dm))
    }
}

fn slope(times: &[f64], values: &[f64], i: usize) -> f64 {
    (values[i + 1] - values[i]) / (times[i + 1] - times[i])
}

// Exact integrals of F and τF over [t0, t0 + d] for F = v + s(τ - t0).
fn segment_integrals(t0: f64, v: f64, s: f64, d: f64) -> (f64, f64) {
    let impulse = v * d + 0.5 * s * d * d;
    let moment = t0 * v * d + 0.5 * (t0 * s + v) * d * d + s * d * d * d / 3.0;
    (impulse, moment)
}

/// The external force F(t) of the potential -F(t) x.
#[derive(Debug, Clone, PartialEq)]
pub enum ForceProfile {
    Zero,
    Constant { f0: f64 },
    /// F0 sin(omega t + phi)
    Sinusoidal { amplitude: f64, omega: f64, phase: f64 },
    Tabulated(TabulatedForce),
}

impl ForceProfile {
    pub fn constant(f0: f64) -> Result<Self> {
        finite("F0", f0)?;
        Ok(Self::Constant { f0 })
    }

    pub fn sinusoidal(amplitude: f64, omega: f64, phase: f64) -> Result<Self> {
        finite("F0", amplitude)?;
        finite("omega", omega)?;
        finite("phi", phase)?;
        Ok(Self::Sinusoidal {
            amplitude,
            omega,
            phase,
        })
    }

    pub fn tabulated(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        TabulatedForce::new(times, values).map(Self::Tabulated)
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        match self {
            Self::Zero => Ok(0.0),
            Self::Constant { f0 } => Ok(*f0),
            Self::Sinusoidal {
                amplitude,
                omega,
                phase,
            } => Ok(amplitude * (omega * t + phase).sin()),
            Self::Tabulated(tab) => tab.eval(t),
        }
    }

    /// Returns (∫₀ᵗ F dτ, ∫₀ᵗ τ F dτ) in closed form.
    pub fn cumulative(&self, t: f64) -> Result<(f64, f64)> {
        match self {
            Self::Zero => Ok((0.0, 0.0)),
            Self::Constant { f0 } => Ok((f0 * t, 0.5 * f0 * t * t)),
            Self::Sinusoidal {
                amplitude,
                omega,
                phase,
            } => {
                if *omega == 0.0 {
                    let f = amplitude * phase.sin();
                    return Ok((f * t, 0.5 * f * t * t));
                }
                let (s0, c0) = phase.sin_cos();
                let (st, ct) = (omega * t + phase).sin_cos();
                let impulse = amplitude * (c0 - ct) / omega;
                let moment = amplitude * (-t * ct / omega + (st - s0) / (omega * omega));
                Ok((impulse, moment))
            }
            Self::Tabulated(tab) => {
                let (i0, m0) = tab.primitives(0.0)?;
                let (it, mt) = tab.primitives(t)?;
                Ok((it - i0, mt - m0))
            }
        }
    }

    /// Kinks of F inside (lo, hi), used to split quadrature panels.
    pub fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        match self {
            Self::Tabulated(tab) => tab
                .times
                .iter()
                .copied()
                .filter(|&s| s > lo && s < hi)
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Same profile with the amplitude replaced; tabulated values are rescaled
    /// so that their largest magnitude equals `f0`.
    pub fn with_amplitude(&self, f0: f64) -> Result<Self> {
        match self {
            Self::Zero | Self::Constant { .. } => Self::constant(f0),
            Self::Sinusoidal { omega, phase, .. } => Self::sinusoidal(f0, *omega, *phase),
            Self::Tabulated(tab) => {
                let peak = tab.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let scale = if peak > 0.0 { f0 / peak } else { 0.0 };
                Self::tabulated(
                    tab.times.clone(),
                    tab.values.iter().map(|v| v * scale).collect(),
                )
            }
        }
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")))
    }
}
