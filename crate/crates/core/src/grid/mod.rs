//! Periodic spectral grid: the independent numerical check on the closed forms.

mod observables;
mod propagator;
mod superpose;

pub use observables::{apply_invariant, eigen_residual, grid_moments, l2_distance, raised_cosine_window};
pub use propagator::{propagate, step, SplitStep};
pub use superpose::{superpose, WeightFunction, WeightKind};

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::packet::PacketSpec;

/// Amplitude allowed at the outermost nodes before a state counts as leaking.
pub const BOUNDARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    x_min: f64,
    x_max: f64,
    n: usize,
    dt: f64,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, n: usize, dt: f64) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(Error::InvalidParameter(format!(
                "grid needs x_max > x_min, got [{x_min}, {x_max}]"
            )));
        }
        if n < 64 || !n.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "grid size must be a power of two >= 64, got {n}"
            )));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        Ok(Self { x_min, x_max, n, dt })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn with_dt(&self, dt: f64) -> Result<Self> {
        Self::new(self.x_min, self.x_max, self.n, dt)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n as f64
    }

    /// Node positions; x_max is the periodic image of x_min and is excluded.
    pub fn nodes(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.n).map(|j| self.x_min + j as f64 * dx).collect()
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let dk = 2.0 * PI / (self.x_max - self.x_min);
        let n = self.n as i64;
        (0..n)
            .map(|j| if j < n / 2 { j } else { j - n } as f64 * dk)
            .collect()
    }
}

/// Wavefunction samples on a grid at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    spec: GridSpec,
    t: f64,
    amplitudes: Vec<Complex64>,
}

impl GridState {
    pub fn new(spec: GridSpec, t: f64, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != spec.n {
            return Err(Error::InvalidParameter(format!(
                "expected {} amplitudes, got {}",
                spec.n,
                amplitudes.len()
            )));
        }
        if amplitudes.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidParameter("amplitudes must be finite".into()));
        }
        Ok(Self { spec, t, amplitudes })
    }

    /// Samples `f` at every node.
    pub fn from_fn<F: Fn(f64) -> Complex64>(spec: GridSpec, t: f64, f: F) -> Result<Self> {
        Self::new(spec, t, spec.nodes().into_iter().map(f).collect())
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    /// Σ|Ψⱼ|² Δx
    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.spec.dx()
    }

    /// |Ψ| at the first and last node.
    pub fn boundary_moduli(&self) -> (f64, f64) {
        (
            self.amplitudes[0].norm(),
            self.amplitudes[self.spec.n - 1].norm(),
        )
    }

    pub fn check_boundary(&self, tolerance: f64) -> Result<()> {
        let (left, right) = self.boundary_moduli();
        if left < tolerance && right < tolerance {
            Ok(())
        } else {
            Err(Error::LeakingState {
                left,
                right,
                tolerance,
            })
        }
    }

    pub fn is_leaking(&self) -> bool {
        self.check_boundary(BOUNDARY_TOL).is_err()
    }

    /// αΨ₁ + βΨ₂ on the same grid and time.
    pub fn combine(&self, alpha: Complex64, other: &GridState, beta: Complex64) -> Result<GridState> {
        if self.spec != other.spec {
            return Err(Error::InvalidParameter("states live on different grids".into()));
        }
        let amps = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        Ok(GridState {
            spec: self.spec,
            t: self.t,
            amplitudes: amps,
        })
    }
}

/// Samples the analytic packet at the grid nodes at time `t0`.
pub fn init_from_packet(spec: &PacketSpec, grid: GridSpec, t0: f64) -> Result<GridState> {
    let frame = spec.frame(t0)?;
    let state = GridState::from_fn(grid, t0, |x| frame.amplitude(x))?;
    state.check_boundary(BOUNDARY_TOL)?;
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::force::ForceProfile;
    use crate::invariant::{InvariantCoeffs, PhysicalParams};
    use crate::quadrature::QuadratureConfig;

    fn packet(a: f64) -> PacketSpec {
        let c = InvariantCoeffs::new(1.0, 0.0, 0.0, PhysicalParams::default(), ForceProfile::Zero).unwrap();
        PacketSpec::new(c, a, QuadratureConfig::default()).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(GridSpec::new(-1.0, 1.0, 64, 0.1).is_ok());
        assert!(GridSpec::new(1.0, 1.0, 64, 0.1).is_err());
        assert!(GridSpec::new(-1.0, 1.0, 32, 0.1).is_err());
        assert!(GridSpec::new(-1.0, 1.0, 100, 0.1).is_err());
        assert!(GridSpec::new(-1.0, 1.0, 64, 0.0).is_err());
    }

    #[test]
    fn wavenumbers_in_fft_order() {
        let g = GridSpec::new(0.0, 2.0 * PI, 64, 0.1).unwrap();
        let k = g.wavenumbers();
        assert_eq!(k[0], 0.0);
        assert_eq!(k[1], 1.0);
        assert_eq!(k[31], 31.0);
        assert_eq!(k[32], -32.0);
        assert_eq!(k[63], -1.0);
    }

    #[test]
    fn init_is_normalised() {
        let g = GridSpec::new(-20.0, 20.0, 1024, 1e-3).unwrap();
        let s = init_from_packet(&packet(0.5), g, 0.0).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn init_peaks_at_origin() {
        let g = GridSpec::new(-20.0, 20.0, 1024, 1e-3).unwrap();
        let s = init_from_packet(&packet(0.5), g, 0.0).unwrap();
        let (imax, _) = s
            .amplitudes()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .unwrap();
        let nodes = g.nodes();
        let nearest = nodes
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .unwrap()
            .0;
        assert_eq!(imax, nearest);
    }

    #[test]
    fn wide_packet_leaks() {
        // Δx₀ = 2.5 on a domain of width 10.
        let g = GridSpec::new(-5.0, 5.0, 256, 1e-3).unwrap();
        let err = init_from_packet(&packet(6.25), g, 0.0).unwrap_err();
        assert!(matches!(err, Error::LeakingState { .. }));
    }
}
