use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{GridSpec, GridState, BOUNDARY_TOL};
use crate::error::{Error, Result};
use crate::invariant::InvariantCoeffs;

/// Symmetric split-step integrator for H = p²/2m − F(t)x on a periodic grid.
///
/// One step of length h applies exp(iF(t+h/2)x h/2ħ), the exact kinetic
/// propagator exp(−iħk²h/2m) in Fourier space, and the same potential half
/// step again. The scheme is unitary and second order in h.
pub struct SplitStep {
    spec: GridSpec,
    hbar: f64,
    mass: f64,
    nodes: Vec<f64>,
    k2: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    // kinetic factor for the nominal dt
    kinetic: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl SplitStep {
    pub fn new(spec: GridSpec, coeffs: &InvariantCoeffs) -> Self {
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(spec.n());
        let ifft = planner.plan_fft_inverse(spec.n());
        let scratch_len = fft.get_inplace_scratch_len().max(ifft.get_inplace_scratch_len());
        let k2: Vec<f64> = spec.wavenumbers().iter().map(|k| k * k).collect();
        let hbar = coeffs.params().hbar();
        let mass = coeffs.params().mass();
        let mut s = Self {
            spec,
            hbar,
            mass,
            nodes: spec.nodes(),
            k2,
            fft,
            ifft,
            kinetic: Vec::new(),
            scratch: vec![Complex64::default(); scratch_len],
        };
        s.kinetic = s.kinetic_factors(spec.dt());
        s
    }

    fn kinetic_factors(&self, h: f64) -> Vec<Complex64> {
        let scale = 1.0 / self.spec.n() as f64;
        self.k2
            .iter()
            .map(|k2| Complex64::from_polar(scale, -self.hbar * k2 * h / (2.0 * self.mass)))
            .collect()
    }

    /// Advances `psi` from `t` by `h` in place.
    pub fn advance(&mut self, psi: &mut [Complex64], coeffs: &InvariantCoeffs, t: f64, h: f64) -> Result<()> {
        let f_mid = coeffs.force().eval(t + 0.5 * h)?;
        let half = 0.5 * f_mid * h / self.hbar;
        let potential: Vec<Complex64> = self
            .nodes
            .iter()
            .map(|x| Complex64::from_polar(1.0, half * x))
            .collect();
        for (z, v) in psi.iter_mut().zip(&potential) {
            *z *= v;
        }
        self.fft.process_with_scratch(psi, &mut self.scratch);
        if h == self.spec.dt() {
            for (z, kf) in psi.iter_mut().zip(&self.kinetic) {
                *z *= kf;
            }
        } else {
            for (z, kf) in psi.iter_mut().zip(self.kinetic_factors(h)) {
                *z *= kf;
            }
        }
        self.ifft.process_with_scratch(psi, &mut self.scratch);
        for (z, v) in psi.iter_mut().zip(&potential) {
            *z *= v;
        }
        Ok(())
    }

    /// Repeated steps from `state.t` to `t_final`; the last step is shortened
    /// to land exactly on `t_final`. Leakage is checked after every step.
    pub fn propagate(&mut self, state: &GridState, coeffs: &InvariantCoeffs, t_final: f64) -> Result<GridState> {
        if state.spec != self.spec {
            return Err(Error::InvalidParameter("state grid differs from propagator grid".into()));
        }
        let t0 = state.t;
        if !(t_final >= t0) {
            return Err(Error::InvalidParameter(format!(
                "cannot propagate backwards from {t0} to {t_final}"
            )));
        }
        let dt = self.spec.dt();
        let span = t_final - t0;
        let ratio = span / dt;
        let mut full = ratio.floor() as u64;
        // absorb roundoff in span/dt so that e.g. 1.0 / 1e-4 gives 10000 steps
        if ratio - full as f64 > 1.0 - 1e-9 {
            full += 1;
        }
        let mut psi = state.amplitudes.clone();
        for i in 0..full {
            let t = t0 + i as f64 * dt;
            self.advance(&mut psi, coeffs, t, dt)?;
            check_nodes(&psi)?;
        }
        let t_done = t0 + full as f64 * dt;
        let rest = t_final - t_done;
        if rest > 1e-9 * dt {
            self.advance(&mut psi, coeffs, t_done, rest)?;
            check_nodes(&psi)?;
        }
        Ok(GridState {
            spec: self.spec,
            t: t_final,
            amplitudes: psi,
        })
    }
}

fn check_nodes(psi: &[Complex64]) -> Result<()> {
    let left = psi[0].norm();
    let right = psi[psi.len() - 1].norm();
    if left < BOUNDARY_TOL && right < BOUNDARY_TOL {
        Ok(())
    } else {
        Err(Error::LeakingState {
            left,
            right,
            tolerance: BOUNDARY_TOL,
        })
    }
}

/// One split-step of length `spec.dt()`.
pub fn step(state: &GridState, coeffs: &InvariantCoeffs) -> Result<GridState> {
    state.check_boundary(BOUNDARY_TOL)?;
    let mut stepper = SplitStep::new(state.spec, coeffs);
    let mut psi = state.amplitudes.clone();
    stepper.advance(&mut psi, coeffs, state.t, state.spec.dt())?;
    check_nodes(&psi)?;
    Ok(GridState {
        spec: state.spec,
        t: state.t + state.spec.dt(),
        amplitudes: psi,
    })
}

pub fn propagate(state: &GridState, coeffs: &InvariantCoeffs, t_final: f64) -> Result<GridState> {
    state.check_boundary(BOUNDARY_TOL)?;
    SplitStep::new(state.spec, coeffs).propagate(state, coeffs, t_final)
}
