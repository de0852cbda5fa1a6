//! Closed-form invariant eigenstates and the Gaussian wave packet built from them.
//!
//! The eigenfunctions of I(t) are pure phases,
//! φ_λ = exp{(i/ħ)[(λ − C)x − B₀x²/2] / A}, and ψ_λ = √(A₀/A) e^{iα_λ} φ_λ
//! solves the Schrödinger equation. Superposing ψ_λ with a Gaussian weight
//! exp(−aλ²) gives a packet whose density stays Gaussian, centred on the
//! classical trajectory, with a width that does not depend on F.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::invariant::{CoeffFrame, InvariantCoeffs};
use crate::quadrature::QuadratureConfig;

/// Complex amplitude of a wavefunction sample.
pub type ComplexAmplitude = Complex64;

/// Tolerance on the moment invariants for closed-form moments.
pub const ANALYTIC_TOL: f64 = 1e-9;
/// Tolerance on the moment invariants for grid-estimated moments.
pub const GRID_TOL: f64 = 1e-6;

/// φ_λ(x, t): eigenfunction of I(t) with eigenvalue λ.
pub fn eigenfunction(c: &InvariantCoeffs, lambda: f64, x: f64, t: f64) -> Result<ComplexAmplitude> {
    c.check_time(t)?;
    Ok(eigenfunction_with(c, c.coeff_a(t), c.coeff_c(t)?, lambda, x))
}

fn eigenfunction_with(c: &InvariantCoeffs, a_t: f64, c_t: f64, lambda: f64, x: f64) -> Complex64 {
    let hbar = c.params().hbar();
    let theta = ((lambda - c_t) * x - 0.5 * c.b0() * x * x) / (hbar * a_t);
    Complex64::from_polar(1.0, theta)
}

/// α_λ(t) − α_λ(0) = −∫₀ᵗ (λ − C)² / (2ħ m A²) dτ.
///
/// The imaginary logarithmic part of α_λ is carried by the amplitude factor
/// √(A₀/A) of [`eigen_solution`] instead.
pub fn eigen_residual_phase(c: &InvariantCoeffs, lambda: f64, t: f64, q: &QuadratureConfig) -> Result<f64> {
    let frame = c.frame(t, q)?;
    Ok(phase_from_frame(c, &frame, lambda))
}

fn phase_from_frame(c: &InvariantCoeffs, f: &CoeffFrame, lambda: f64) -> f64 {
    let hbar = c.params().hbar();
    -(lambda * lambda * f.inv_a2 - lambda * f.c_over_a2 / hbar + f.c2_over_a2)
}

/// ψ_λ(x, t), an exact solution of the Schrödinger equation.
pub fn eigen_solution(
    c: &InvariantCoeffs,
    lambda: f64,
    x: f64,
    t: f64,
    q: &QuadratureConfig,
) -> Result<ComplexAmplitude> {
    let frame = c.frame(t, q)?;
    Ok(EigenFrame::new(c, frame).eval(lambda, x))
}

/// Coefficient data for evaluating many ψ_λ(x, t) at one fixed time.
#[derive(Debug, Clone)]
pub struct EigenFrame<'a> {
    coeffs: &'a InvariantCoeffs,
    frame: CoeffFrame,
    modulus: f64,
}

impl<'a> EigenFrame<'a> {
    pub fn new(coeffs: &'a InvariantCoeffs, frame: CoeffFrame) -> Self {
        let modulus = (coeffs.a0() / frame.a).sqrt();
        Self {
            coeffs,
            frame,
            modulus,
        }
    }

    pub fn at(coeffs: &'a InvariantCoeffs, t: f64, q: &QuadratureConfig) -> Result<Self> {
        Ok(Self::new(coeffs, coeffs.frame(t, q)?))
    }

    pub fn frame(&self) -> &CoeffFrame {
        &self.frame
    }

    pub fn eval(&self, lambda: f64, x: f64) -> Complex64 {
        let phase = phase_from_frame(self.coeffs, &self.frame, lambda);
        let phi = eigenfunction_with(self.coeffs, self.frame.a, self.frame.c, lambda, x);
        Complex64::from_polar(self.modulus, phase) * phi
    }

    pub fn eigenfunction(&self, lambda: f64, x: f64) -> Complex64 {
        eigenfunction_with(self.coeffs, self.frame.a, self.frame.c, lambda, x)
    }
}

/// Gaussian packet: invariant coefficients plus the weight width `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketSpec {
    coeffs: InvariantCoeffs,
    a: f64,
    quad: QuadratureConfig,
}

impl PacketSpec {
    pub fn new(coeffs: InvariantCoeffs, a: f64, quad: QuadratureConfig) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidParameter(format!("a must be positive, got {a}")));
        }
        quad.validate()?;
        Ok(Self { coeffs, a, quad })
    }

    pub fn coeffs(&self) -> &InvariantCoeffs {
        &self.coeffs
    }

    pub fn width(&self) -> f64 {
        self.a
    }

    pub fn quad(&self) -> &QuadratureConfig {
        &self.quad
    }

    fn hbar(&self) -> f64 {
        self.coeffs.params().hbar()
    }

    /// Δx₀ = ħ|A₀|√a
    pub fn initial_sigma_x(&self) -> f64 {
        self.hbar() * self.coeffs.a0().abs() * self.a.sqrt()
    }

    /// Everything needed to evaluate the packet at time `t`.
    pub fn frame(&self, t: f64) -> Result<PacketFrame> {
        PacketFrame::new(self, self.coeffs.frame(t, &self.quad)?)
    }

    pub fn packet_amplitude(&self, x: f64, t: f64) -> Result<ComplexAmplitude> {
        Ok(self.frame(t)?.amplitude(x))
    }

    pub fn probability_density(&self, x: f64, t: f64) -> Result<f64> {
        Ok(self.frame(t)?.density(x))
    }

    /// ⟨x⟩ = −A(t) ∫₀ᵗ C / (m A²) dτ
    pub fn mean_x(&self, t: f64) -> Result<f64> {
        let j = self.coeffs.kernel_c_over_a2(t, &self.quad)?;
        Ok(-self.coeffs.coeff_a(t) * j)
    }

    /// ⟨p⟩ = −C/A + B₀ ∫₀ᵗ C / (m A²) dτ
    pub fn mean_p(&self, t: f64) -> Result<f64> {
        let j = self.coeffs.kernel_c_over_a2(t, &self.quad)?;
        Ok(-self.coeffs.coeff_c(t)? / self.coeffs.coeff_a(t) + self.coeffs.b0() * j)
    }

    /// Δx = ħ|A|√((a² + K²)/a) with K = ∫₀ᵗ dτ/(2ħmA²); independent of F.
    pub fn sigma_x(&self, t: f64) -> Result<f64> {
        let k = self.coeffs.kernel_inv_a2(t)?;
        Ok(sigma_x_from(self.hbar(), self.coeffs.coeff_a(t), self.a, k))
    }

    pub fn sigma_p(&self, t: f64) -> Result<f64> {
        Ok(self.uncertainty_product(t)? / self.sigma_x(t)?)
    }

    /// ΔxΔp = √(ħ²/4 + β²) where β is the position–momentum covariance.
    pub fn uncertainty_product(&self, t: f64) -> Result<f64> {
        let k = self.coeffs.kernel_inv_a2(t)?;
        Ok(product_from(self.hbar(), self.coeffs.b0(), self.coeffs.coeff_a(t), self.a, k))
    }

    pub fn analytic_moments(&self, t: f64) -> Result<MomentSet> {
        Ok(self.frame(t)?.moments())
    }
}

fn sigma_x_from(hbar: f64, a_t: f64, a: f64, k: f64) -> f64 {
    hbar * a_t.abs() * ((a * a + k * k) / a).sqrt()
}

// ħK/(2a) equals ∫₀ᵗ dτ/(4amA²).
fn covariance_from(hbar: f64, b0: f64, a_t: f64, a: f64, k: f64) -> f64 {
    hbar * k / (2.0 * a) - hbar * hbar * b0 * a_t * (a * a + k * k) / a
}

fn product_from(hbar: f64, b0: f64, a_t: f64, a: f64, k: f64) -> f64 {
    let beta = covariance_from(hbar, b0, a_t, a, k);
    (0.25 * hbar * hbar + beta * beta).sqrt()
}

/// The packet frozen at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketFrame {
    coeff: CoeffFrame,
    hbar: f64,
    b0: f64,
    a: f64,
    mean_x: f64,
    mean_p: f64,
    sigma_x: f64,
    product: f64,
    peak_modulus: f64,
    // −arg(a + iK)/2, the phase of the principal root 1/√(a + iK)
    prefactor_phase: f64,
}

impl PacketFrame {
    fn new(spec: &PacketSpec, coeff: CoeffFrame) -> Result<Self> {
        let hbar = spec.hbar();
        let b0 = spec.coeffs.b0();
        let a = spec.a;
        let k = coeff.inv_a2;
        let sigma_x = sigma_x_from(hbar, coeff.a, a, k);
        let frame = Self {
            coeff,
            hbar,
            b0,
            a,
            mean_x: -coeff.a * coeff.c_over_a2,
            mean_p: -coeff.c / coeff.a + b0 * coeff.c_over_a2,
            sigma_x,
            product: product_from(hbar, b0, coeff.a, a, k),
            peak_modulus: (2.0 * PI * sigma_x * sigma_x).powf(-0.25),
            prefactor_phase: -0.5 * k.atan2(a),
        };
        let bound = 0.5 * hbar;
        if frame.product < bound - ANALYTIC_TOL {
            return Err(Error::BoundViolation {
                product: frame.product,
                bound,
            });
        }
        Ok(frame)
    }

    pub fn t(&self) -> f64 {
        self.coeff.t
    }

    pub fn coeff_frame(&self) -> &CoeffFrame {
        &self.coeff
    }

    pub fn mean_x(&self) -> f64 {
        self.mean_x
    }

    pub fn mean_p(&self) -> f64 {
        self.mean_p
    }

    pub fn sigma_x(&self) -> f64 {
        self.sigma_x
    }

    pub fn sigma_p(&self) -> f64 {
        self.product / self.sigma_x
    }

    pub fn uncertainty_product(&self) -> f64 {
        self.product
    }

    /// Ψ(x, t). The modulus is fixed by normalisation, (2πΔx²)^(−1/4) at the
    /// centre; Ψ(⟨x⟩, 0) is real and positive.
    pub fn amplitude(&self, x: f64) -> Complex64 {
        let CoeffFrame {
            a: a_t,
            c: c_t,
            inv_a2: k,
            c2_over_a2: q_phase,
            ..
        } = self.coeff;
        let hbar = self.hbar;
        let d = x - self.mean_x;
        let denom = 4.0 * hbar * hbar * a_t * a_t * (self.a * self.a + k * k);
        let envelope = -d * d * self.a / denom;
        let chirp = d * d * k / denom;
        let plane = (-c_t * x - 0.5 * self.b0 * x * x) / (hbar * a_t);
        let phase = self.prefactor_phase - q_phase + plane + chirp;
        Complex64::from_polar(self.peak_modulus * envelope.exp(), phase)
    }

    /// |Ψ(x, t)|², a normalised Gaussian of width Δx about ⟨x⟩.
    pub fn density(&self, x: f64) -> f64 {
        let d = x - self.mean_x;
        (-d * d / (2.0 * self.sigma_x * self.sigma_x)).exp() / ((2.0 * PI).sqrt() * self.sigma_x)
    }

    pub fn moments(&self) -> MomentSet {
        MomentSet {
            t: self.coeff.t,
            mean_x: self.mean_x,
            mean_p: self.mean_p,
            sigma_x: self.sigma_x,
            sigma_p: self.sigma_p(),
            norm: 1.0,
            source: MomentSource::Analytic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentSource {
    Analytic,
    Grid,
}

/// First and second moments of a state at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSet {
    pub t: f64,
    pub mean_x: f64,
    pub mean_p: f64,
    pub sigma_x: f64,
    pub sigma_p: f64,
    pub norm: f64,
    pub source: MomentSource,
}

impl MomentSet {
    pub fn uncertainty_product(&self) -> f64 {
        self.sigma_x * self.sigma_p
    }

    pub fn tolerance(&self) -> f64 {
        match self.source {
            MomentSource::Analytic => ANALYTIC_TOL,
            MomentSource::Grid => GRID_TOL,
        }
    }

    /// Checks finiteness, the Heisenberg bound and (for closed forms) unit norm.
    pub fn validate(&self, hbar: f64) -> Result<()> {
        let fields = [self.mean_x, self.mean_p, self.sigma_x, self.sigma_p, self.norm];
        if fields.iter().any(|v| !v.is_finite()) || self.sigma_x <= 0.0 || self.sigma_p <= 0.0 {
            return Err(Error::InvalidParameter(format!("degenerate moments {self:?}")));
        }
        let bound = 0.5 * hbar;
        let product = self.uncertainty_product();
        if product < bound - self.tolerance() {
            return Err(Error::BoundViolation { product, bound });
        }
        if self.source == MomentSource::Analytic && (self.norm - 1.0).abs() > self.tolerance() {
            return Err(Error::InvalidParameter(format!("norm {} differs from 1", self.norm)));
        }
        Ok(())
    }
}
