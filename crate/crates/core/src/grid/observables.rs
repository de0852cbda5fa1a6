use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{GridSpec, GridState, BOUNDARY_TOL};
use crate::error::{Error, Result};
use crate::invariant::InvariantCoeffs;
use crate::packet::{eigenfunction, MomentSet, MomentSource};

/// ∂ₓψ by Fourier differentiation (Nyquist mode dropped).
fn spectral_derivative(spec: &GridSpec, psi: &[Complex64]) -> Vec<Complex64> {
    let n = spec.n();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);
    let mut buf = psi.to_vec();
    fft.process(&mut buf);
    let scale = 1.0 / n as f64;
    for (j, (z, k)) in buf.iter_mut().zip(spec.wavenumbers()).enumerate() {
        *z = if j == n / 2 {
            Complex64::default()
        } else {
            *z * Complex64::new(0.0, k * scale)
        };
    }
    ifft.process(&mut buf);
    buf
}

/// Position and momentum moments estimated on the grid. Expectations are
/// normalised by the discrete norm, which is reported alongside.
pub fn grid_moments(state: &GridState, coeffs: &InvariantCoeffs) -> Result<MomentSet> {
    state.check_boundary(BOUNDARY_TOL)?;
    let hbar = coeffs.params().hbar();
    let spec = state.spec();
    let dx = spec.dx();
    let psi = state.amplitudes();
    let nodes = spec.nodes();

    let norm = state.norm();
    let mut mx = 0.0;
    let mut mx2 = 0.0;
    for (z, x) in psi.iter().zip(&nodes) {
        let w = z.norm_sqr();
        mx += x * w;
        mx2 += x * x * w;
    }
    let mean_x = mx * dx / norm;
    let var_x = mx2 * dx / norm - mean_x * mean_x;

    let dpsi = spectral_derivative(spec, psi);
    let mut p = Complex64::default();
    let mut p2 = 0.0;
    for (z, d) in psi.iter().zip(&dpsi) {
        p += z.conj() * Complex64::new(0.0, -hbar) * d;
        p2 += hbar * hbar * d.norm_sqr();
    }
    let p = p * dx / norm;
    let p2 = p2 * dx / norm;
    let residue = p.im.abs();
    if residue > 1e-10 * p2.sqrt().max(1.0) {
        return Err(Error::ComplexResidue { residue });
    }
    let mean_p = p.re;
    Ok(MomentSet {
        t: state.t(),
        mean_x,
        mean_p,
        sigma_x: var_x.max(0.0).sqrt(),
        sigma_p: (p2 - mean_p * mean_p).max(0.0).sqrt(),
        norm,
        source: MomentSource::Grid,
    })
}

/// I(t)Ψ = (A(t)(−iħ∂ₓ) + B₀x + C(t))Ψ at the state's time.
///
/// With B₀ = 0 the operator commutes with translations and is exact on any
/// periodic sample, so the boundary check only applies when B₀ ≠ 0.
pub fn apply_invariant(state: &GridState, coeffs: &InvariantCoeffs) -> Result<GridState> {
    if coeffs.b0() != 0.0 {
        state.check_boundary(BOUNDARY_TOL)?;
    }
    let t = state.t();
    let a_t = coeffs.coeff_a(t);
    let c_t = coeffs.coeff_c(t)?;
    let hbar = coeffs.params().hbar();
    let spec = *state.spec();
    let dpsi = spectral_derivative(&spec, state.amplitudes());
    let amps = state
        .amplitudes()
        .iter()
        .zip(&dpsi)
        .zip(spec.nodes())
        .map(|((z, d), x)| Complex64::new(0.0, -hbar * a_t) * d + (coeffs.b0() * x + c_t) * z)
        .collect();
    GridState::new(spec, t, amps)
}

/// Raised-cosine window supported on the central half of the grid, together
/// with its derivative. The Hann profile is squared so the window is C³ at
/// the support edges.
pub fn raised_cosine_window(spec: &GridSpec) -> (Vec<f64>, Vec<f64>) {
    let centre = 0.5 * (spec.x_min() + spec.x_max());
    let half = 0.25 * (spec.x_max() - spec.x_min());
    let mut w = Vec::with_capacity(spec.n());
    let mut dw = Vec::with_capacity(spec.n());
    for x in spec.nodes() {
        let u = (x - centre) / half;
        if u.abs() >= 1.0 {
            w.push(0.0);
            dw.push(0.0);
        } else {
            let hann = 0.5 * (1.0 + (PI * u).cos());
            let dhann = -0.5 * PI * (PI * u).sin() / half;
            w.push(hann * hann);
            dw.push(2.0 * hann * dhann);
        }
    }
    (w, dw)
}

/// Windowed relative residual ‖w (I(t) − λ) φ_λ‖ / ‖w φ_λ‖.
///
/// φ_λ is not normalisable, so I(t) acts on wφ_λ and the commutator
/// [I, w]φ_λ = −iħA w' φ_λ is removed in closed form.
pub fn eigen_residual(coeffs: &InvariantCoeffs, lambda: f64, t: f64, spec: GridSpec) -> Result<f64> {
    coeffs.check_time(t)?;
    let (w, dw) = raised_cosine_window(&spec);
    let nodes = spec.nodes();
    let phi: Vec<Complex64> = nodes
        .iter()
        .map(|&x| eigenfunction(coeffs, lambda, x, t))
        .collect::<Result<_>>()?;
    let windowed = GridState::new(spec, t, phi.iter().zip(&w).map(|(p, w)| p * w).collect())?;
    let applied = apply_invariant(&windowed, coeffs)?;
    let hbar = coeffs.params().hbar();
    let a_t = coeffs.coeff_a(t);
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..spec.n() {
        let commutator = Complex64::new(0.0, -hbar * a_t * dw[j]) * phi[j];
        let r = applied.amplitudes()[j] - lambda * windowed.amplitudes()[j] - commutator;
        num += r.norm_sqr();
        den += windowed.amplitudes()[j].norm_sqr();
    }
    Ok((num / den).sqrt())
}

/// Discrete L2 distance √(Σ|Ψⱼ − Φⱼ|² Δx).
pub fn l2_distance(a: &GridState, b: &GridState) -> Result<f64> {
    if a.spec() != b.spec() {
        return Err(Error::InvalidParameter("states live on different grids".into()));
    }
    let s: f64 = a
        .amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum();
    Ok((s * a.spec().dx()).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::force::ForceProfile;
    use crate::grid::init_from_packet;
    use crate::invariant::PhysicalParams;
    use crate::packet::PacketSpec;
    use crate::quadrature::QuadratureConfig;

    fn coeffs(b0: f64, c0: f64, force: ForceProfile) -> InvariantCoeffs {
        InvariantCoeffs::new(1.0, b0, c0, PhysicalParams::default(), force).unwrap()
    }

    #[test]
    fn moments_of_initial_packet_match_closed_form() {
        let c = coeffs(0.3, 0.4, ForceProfile::constant(1.0).unwrap());
        let p = PacketSpec::new(c, 0.5, QuadratureConfig::default()).unwrap();
        let g = GridSpec::new(-20.0, 20.0, 1024, 1e-3).unwrap();
        let s = init_from_packet(&p, g, 0.0).unwrap();
        let m = grid_moments(&s, p.coeffs()).unwrap();
        let e = p.analytic_moments(0.0).unwrap();
        assert_eq!(m.source, MomentSource::Grid);
        for (a, b) in [
            (m.mean_x, e.mean_x),
            (m.mean_p, e.mean_p),
            (m.sigma_x, e.sigma_x),
            (m.sigma_p, e.sigma_p),
            (m.norm, 1.0),
        ] {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
        assert!(m.uncertainty_product() >= 0.5 - 1e-6);
    }

    #[test]
    fn symmetric_packet_has_zero_means() {
        let p = PacketSpec::new(coeffs(0.0, 0.0, ForceProfile::Zero), 0.5, QuadratureConfig::default()).unwrap();
        let g = GridSpec::new(-20.0, 20.0, 512, 1e-3).unwrap();
        let m = grid_moments(&init_from_packet(&p, g, 0.0).unwrap(), p.coeffs()).unwrap();
        assert!(m.mean_x.abs() < 1e-12);
        assert!(m.mean_p.abs() < 1e-12);
    }

    #[test]
    fn invariant_on_constant_state() {
        let c = coeffs(0.0, 0.7, ForceProfile::Zero);
        let g = GridSpec::new(-5.0, 5.0, 64, 1e-3).unwrap();
        let s = GridState::from_fn(g, 0.0, |_| Complex64::new(0.3, -0.2)).unwrap();
        let out = apply_invariant(&s, &c).unwrap();
        for (a, b) in out.amplitudes().iter().zip(s.amplitudes()) {
            assert!((a - 0.7 * b).norm() < 1e-15);
        }
    }

    #[test]
    fn invariant_is_linear() {
        let c = coeffs(0.4, 0.2, ForceProfile::constant(1.0).unwrap());
        let g = GridSpec::new(-10.0, 10.0, 256, 1e-3).unwrap();
        let s1 = GridState::from_fn(g, 0.3, |x| Complex64::from_polar((-x * x).exp(), 2.0 * x)).unwrap();
        let s2 = GridState::from_fn(g, 0.3, |x| Complex64::new((-(x - 1.0).powi(2)).exp(), 0.0)).unwrap();
        let (alpha, beta) = (Complex64::new(0.5, -1.5), Complex64::new(2.0, 0.25));
        let lhs = apply_invariant(&s1.combine(alpha, &s2, beta).unwrap(), &c).unwrap();
        let rhs = apply_invariant(&s1, &c)
            .unwrap()
            .combine(alpha, &apply_invariant(&s2, &c).unwrap(), beta)
            .unwrap();
        for (a, b) in lhs.amplitudes().iter().zip(rhs.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn invariant_checks_leak_when_b0_nonzero() {
        let c = coeffs(0.5, 0.0, ForceProfile::Zero);
        let g = GridSpec::new(-5.0, 5.0, 64, 1e-3).unwrap();
        let s = GridState::from_fn(g, 0.0, |_| Complex64::new(1.0, 0.0)).unwrap();
        assert!(matches!(apply_invariant(&s, &c), Err(Error::LeakingState { .. })));
    }

    #[test]
    fn eigenfunction_residual_small() {
        let c = coeffs(0.0, 0.0, ForceProfile::Zero);
        let g = GridSpec::new(-20.0, 20.0, 1024, 1e-3).unwrap();
        for lambda in [-2.0, 0.0, 1.5] {
            let r = eigen_residual(&c, lambda, 0.0, g).unwrap();
            assert!(r < 1e-6, "lambda={lambda}: {r}");
        }
    }

    #[test]
    fn window_shape() {
        let g = GridSpec::new(-4.0, 4.0, 64, 1e-3).unwrap();
        let (w, _) = raised_cosine_window(&g);
        assert_eq!(w[0], 0.0);
        assert_eq!(w[32], 1.0);
        assert!(w.iter().all(|v| (0.0..=1.0).contains(v)));
    }
}
