//! The linear invariant I(t) = A(t) p + B₀ x + C(t) and the time integrals
//! that the closed-form solutions are built from.
//!
//! With H = p²/2m − F(t)x the invariance condition reduces to
//! A' = −B₀/m and C' = −A F, so A is linear in t and C is a first-moment
//! integral of the force. A(t) vanishes at the caustic t* = m A₀ / B₀; every
//! time-dependent kernel refuses times at or past a guard placed just before it.

use crate::error::{Error, Result};
use crate::force::ForceProfile;
use crate::quadrature::{integrate_piecewise, QuadratureConfig};

/// Default fraction of the caustic time beyond which evaluations are refused.
pub const DEFAULT_CAUSTIC_MARGIN: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    hbar: f64,
    mass: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
        }
    }
}

impl PhysicalParams {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidParameter(format!("hbar must be positive, got {hbar}")));
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidParameter(format!("m must be positive, got {mass}")));
        }
        Ok(Self { hbar, mass })
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }
}

/// Coefficient values and kernels frozen at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoeffFrame {
    pub t: f64,
    /// A(t)
    pub a: f64,
    /// C(t)
    pub c: f64,
    /// ∫₀ᵗ dτ / (2ħ m A²)
    pub inv_a2: f64,
    /// ∫₀ᵗ C / (m A²) dτ
    pub c_over_a2: f64,
    /// ∫₀ᵗ C² / (2ħ m A²) dτ
    pub c2_over_a2: f64,
}

/// Residuals of the coefficient equations A' = −B₀/m, B' = 0, C' = −A F.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvarianceResidual {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl InvarianceResidual {
    pub fn max(&self) -> f64 {
        self.a.max(self.b).max(self.c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantCoeffs {
    a0: f64,
    b0: f64,
    c0: f64,
    params: PhysicalParams,
    force: ForceProfile,
    caustic_margin: f64,
}

impl InvariantCoeffs {
    pub fn new(a0: f64, b0: f64, c0: f64, params: PhysicalParams, force: ForceProfile) -> Result<Self> {
        for (name, v) in [("A0", a0), ("B0", b0), ("C0", c0)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")));
            }
        }
        if a0 == 0.0 {
            return Err(Error::InvalidParameter("A0 must be nonzero".into()));
        }
        Ok(Self {
            a0,
            b0,
            c0,
            params,
            force,
            caustic_margin: DEFAULT_CAUSTIC_MARGIN,
        })
    }

    /// Sets the fraction of t* beyond which times are refused; 1.0 refuses
    /// only t ≥ t*.
    pub fn with_caustic_margin(mut self, margin: f64) -> Result<Self> {
        if !(margin > 0.0 && margin <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "caustic margin must lie in (0, 1], got {margin}"
            )));
        }
        self.caustic_margin = margin;
        Ok(self)
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn b0(&self) -> f64 {
        self.b0
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn force(&self) -> &ForceProfile {
        &self.force
    }

    pub fn caustic_margin(&self) -> f64 {
        self.caustic_margin
    }

    /// A copy with a different force profile and the same constants.
    pub fn with_force(&self, force: ForceProfile) -> Self {
        Self {
            force,
            ..self.clone()
        }
    }

    /// A(t) = A₀ − B₀ t / m
    pub fn coeff_a(&self, t: f64) -> f64 {
        self.a0 - self.b0 * t / self.params.mass
    }

    /// B(t) = B₀
    pub fn coeff_b(&self) -> f64 {
        self.b0
    }

    /// C(t) = C₀ − A₀ ∫₀ᵗ F + (B₀/m) ∫₀ᵗ τ F, from the closed-form primitives of F.
    pub fn coeff_c(&self, t: f64) -> Result<f64> {
        nonnegative(t)?;
        self.c_unchecked(t)
    }

    fn c_unchecked(&self, t: f64) -> Result<f64> {
        let (impulse, moment) = self.force.cumulative(t)?;
        Ok(self.c0 - self.a0 * impulse + self.b0 / self.params.mass * moment)
    }

    /// C(t) with both force integrals done by adaptive quadrature.
    pub fn coeff_c_quadrature(&self, t: f64, q: &QuadratureConfig) -> Result<f64> {
        nonnegative(t)?;
        if t == 0.0 {
            return Ok(self.c0);
        }
        let f = &self.force;
        // surface range errors before integrating
        f.eval(0.0)?;
        f.eval(t)?;
        let br = f.breakpoints(0.0, t);
        let impulse = integrate_piecewise(|s| f.eval(s).unwrap_or(f64::NAN), 0.0, t, &br, q)?;
        let moment = integrate_piecewise(|s| s * f.eval(s).unwrap_or(f64::NAN), 0.0, t, &br, q)?;
        Ok(self.c0 - self.a0 * impulse + self.b0 / self.params.mass * moment)
    }

    /// t* = m A₀ / B₀ when it lies in the future.
    pub fn caustic_time(&self) -> Option<f64> {
        if self.b0 == 0.0 {
            return None;
        }
        let t_star = self.params.mass * self.a0 / self.b0;
        (t_star > 0.0).then_some(t_star)
    }

    /// Largest admissible time (infinite when there is no caustic).
    pub fn guard_time(&self) -> f64 {
        self.caustic_time()
            .map_or(f64::INFINITY, |ts| self.caustic_margin * ts)
    }

    /// Rejects negative times and times at or past the caustic guard.
    pub fn check_time(&self, t: f64) -> Result<()> {
        nonnegative(t)?;
        if let Some(t_star) = self.caustic_time() {
            let guard = self.caustic_margin * t_star;
            if t >= t_star || t > guard {
                return Err(Error::CausticReached { t, t_star, guard });
            }
        }
        Ok(())
    }

    /// ∫₀ᵗ dτ / (2ħ m A(τ)²) = t / (2ħ m A₀ A(t)).
    pub fn kernel_inv_a2(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(t / (2.0 * self.params.hbar * self.params.mass * self.a0 * self.coeff_a(t)))
    }

    /// Quadrature route for [`Self::kernel_inv_a2`].
    pub fn kernel_inv_a2_quadrature(&self, t: f64, q: &QuadratureConfig) -> Result<f64> {
        self.check_time(t)?;
        let scale = 2.0 * self.params.hbar * self.params.mass;
        integrate_piecewise(
            |s| {
                let a = self.coeff_a(s);
                1.0 / (scale * a * a)
            },
            0.0,
            t,
            &[],
            q,
        )
    }

    /// ∫₀ᵗ C(τ) / (m A(τ)²) dτ
    pub fn kernel_c_over_a2(&self, t: f64, q: &QuadratureConfig) -> Result<f64> {
        self.weighted_c_integral(t, q, |c| c / self.params.mass)
    }

    /// ∫₀ᵗ C(τ)² / (2ħ m A(τ)²) dτ
    pub fn kernel_c2_over_a2(&self, t: f64, q: &QuadratureConfig) -> Result<f64> {
        let scale = 2.0 * self.params.hbar * self.params.mass;
        self.weighted_c_integral(t, q, |c| c * c / scale)
    }

    fn weighted_c_integral<G>(&self, t: f64, q: &QuadratureConfig, g: G) -> Result<f64>
    where
        G: Fn(f64) -> f64,
    {
        self.check_time(t)?;
        if t == 0.0 {
            return Ok(0.0);
        }
        self.force.cumulative(t)?;
        let br = self.force.breakpoints(0.0, t);
        integrate_piecewise(
            |s| {
                let a = self.coeff_a(s);
                self.c_unchecked(s).map_or(f64::NAN, |c| g(c) / (a * a))
            },
            0.0,
            t,
            &br,
            q,
        )
    }

    /// Evaluates A, C and all kernels at `t`.
    pub fn frame(&self, t: f64, q: &QuadratureConfig) -> Result<CoeffFrame> {
        self.check_time(t)?;
        Ok(CoeffFrame {
            t,
            a: self.coeff_a(t),
            c: self.coeff_c(t)?,
            inv_a2: self.kernel_inv_a2(t)?,
            c_over_a2: self.kernel_c_over_a2(t, q)?,
            c2_over_a2: self.kernel_c2_over_a2(t, q)?,
        })
    }

    /// Forward differences of A, B, C over [t, t+dt] compared with the
    /// invariance equations evaluated at the interval midpoint; each
    /// component is O(dt²) for smooth F.
    pub fn invariance_residual(&self, t: f64, dt: f64) -> Result<InvarianceResidual> {
        nonnegative(t)?;
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        let m = self.params.mass;
        let mid = t + 0.5 * dt;
        let da = (self.coeff_a(t + dt) - self.coeff_a(t)) / dt;
        let db = (self.coeff_b() - self.coeff_b()) / dt;
        let dc = (self.c_unchecked(t + dt)? - self.c_unchecked(t)?) / dt;
        Ok(InvarianceResidual {
            a: (da + self.b0 / m).abs(),
            b: db.abs(),
            c: (dc + self.coeff_a(mid) * self.force.eval(mid)?).abs(),
        })
    }
}

fn nonnegative(t: f64) -> Result<()> {
    if t < 0.0 || t.is_nan() {
        Err(Error::NegativeTime(t))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coeffs(a0: f64, b0: f64, c0: f64, m: f64, force: ForceProfile) -> InvariantCoeffs {
        InvariantCoeffs::new(a0, b0, c0, PhysicalParams::new(1.0, m).unwrap(), force).unwrap()
    }

    #[test]
    fn params_must_be_positive() {
        assert!(PhysicalParams::new(0.0, 1.0).is_err());
        assert!(PhysicalParams::new(1.0, -2.0).is_err());
        assert!(PhysicalParams::new(f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn a0_must_be_nonzero() {
        let p = PhysicalParams::default();
        assert!(InvariantCoeffs::new(0.0, 1.0, 0.0, p, ForceProfile::Zero).is_err());
        assert!(InvariantCoeffs::new(1.0, f64::NAN, 0.0, p, ForceProfile::Zero).is_err());
    }

    #[test]
    fn coeff_a_examples() {
        assert_eq!(coeffs(1.0, 0.0, 0.0, 1.0, ForceProfile::Zero).coeff_a(17.0), 1.0);
        assert_eq!(coeffs(1.0, 1.0, 0.0, 1.0, ForceProfile::Zero).coeff_a(0.5), 0.5);
        assert_eq!(coeffs(2.0, -1.0, 0.0, 2.0, ForceProfile::Zero).coeff_a(4.0), 4.0);
    }

    #[test]
    fn coeff_c_examples() {
        let q = QuadratureConfig::default();
        let z = coeffs(1.0, 0.0, 0.3, 1.0, ForceProfile::Zero);
        for t in [0.0, 1.0, 10.0] {
            assert_eq!(z.coeff_c(t).unwrap(), 0.3);
        }
        let f1 = ForceProfile::constant(1.0).unwrap();
        let c = coeffs(1.0, 0.0, 0.0, 1.0, f1.clone());
        assert!((c.coeff_c(2.0).unwrap() + 2.0).abs() < 1e-15);
        assert!((c.coeff_c_quadrature(2.0, &q).unwrap() + 2.0).abs() < 1e-12);
        // A0 = 0 is inadmissible, so isolate the B0 term (B0/m) F0 t²/2 = 2 by
        // differencing against the B0 = 0 case.
        let with_b = coeffs(1.0, 1.0, 0.0, 1.0, f1);
        assert!((with_b.coeff_c(2.0).unwrap() - c.coeff_c(2.0).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn kernel_examples() {
        let q = QuadratureConfig::default();
        let free = coeffs(1.0, 0.0, 0.0, 1.0, ForceProfile::Zero);
        assert_eq!(free.kernel_inv_a2(1.0).unwrap(), 0.5);
        assert_eq!(coeffs(2.0, 0.0, 0.0, 1.0, ForceProfile::Zero).kernel_inv_a2(4.0).unwrap(), 0.5);
        let focusing = coeffs(1.0, 1.0, 0.0, 1.0, ForceProfile::Zero);
        assert!((focusing.kernel_inv_a2(0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!((focusing.kernel_inv_a2_quadrature(0.5, &q).unwrap() - 0.5).abs() < 1e-10);

        assert_eq!(free.kernel_c_over_a2(3.0, &q).unwrap(), 0.0);
        let push = coeffs(1.0, 0.0, 0.0, 1.0, ForceProfile::constant(1.0).unwrap());
        assert!((push.kernel_c_over_a2(1.0, &q).unwrap() + 0.5).abs() < 1e-12);
        let drift = coeffs(1.0, 0.0, 1.0, 1.0, ForceProfile::Zero);
        assert!((drift.kernel_c_over_a2(2.0, &q).unwrap() - 2.0).abs() < 1e-12);

        assert_eq!(free.kernel_c2_over_a2(3.0, &q).unwrap(), 0.0);
        assert!((drift.kernel_c2_over_a2(2.0, &q).unwrap() - 1.0).abs() < 1e-12);
        assert!((push.kernel_c2_over_a2(1.0, &q).unwrap() - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn caustic_guard() {
        let c = coeffs(1.0, 1.0, 0.0, 1.0, ForceProfile::Zero);
        assert_eq!(c.caustic_time(), Some(1.0));
        assert!(c.kernel_inv_a2(0.98).is_ok());
        assert!(matches!(c.kernel_inv_a2(0.995), Err(Error::CausticReached { .. })));
        let exact = c.clone().with_caustic_margin(1.0).unwrap();
        assert!(exact.kernel_inv_a2(0.995).is_ok());
        assert!(matches!(exact.kernel_inv_a2(1.0), Err(Error::CausticReached { .. })));
        // Negative B0 with positive A0 never reaches A = 0 forward in time.
        let away = coeffs(1.0, -1.0, 0.0, 1.0, ForceProfile::Zero);
        assert_eq!(away.caustic_time(), None);
        assert!(away.kernel_inv_a2(1e6).is_ok());
        assert!(c.with_caustic_margin(0.0).is_err());
    }

    #[test]
    fn negative_time_rejected() {
        let c = coeffs(1.0, 0.0, 0.0, 1.0, ForceProfile::Zero);
        assert!(matches!(c.coeff_c(-1.0), Err(Error::NegativeTime(_))));
        assert!(matches!(c.kernel_inv_a2(-1.0), Err(Error::NegativeTime(_))));
    }

    #[test]
    fn residual_examples() {
        let any = coeffs(1.3, -0.4, 0.7, 2.0, ForceProfile::Zero);
        assert!(any.invariance_residual(0.8, 1e-4).unwrap().max() <= 1e-8);
        let push = coeffs(1.0, 0.0, 0.0, 1.0, ForceProfile::constant(1.0).unwrap());
        assert!(push.invariance_residual(0.8, 1e-4).unwrap().max() <= 1e-8);
        let wave = coeffs(1.0, 1.0, 0.0, 1.0, ForceProfile::sinusoidal(1.0, 1.0, 0.0).unwrap());
        let r = wave.invariance_residual(0.3, 1e-4).unwrap();
        assert!(r.max() <= 1e-6, "{r:?}");
        assert!(wave.invariance_residual(0.3, 0.0).is_err());
    }
}
