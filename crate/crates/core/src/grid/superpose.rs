use std::f64::consts::PI;
use std::fmt;
use std::num::NonZeroUsize;
use std::sync::Arc;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;

use super::{GridSpec, GridState};
use crate::error::{Error, Result};
use crate::invariant::InvariantCoeffs;
use crate::packet::EigenFrame;

/// Largest |g| tolerated at the truncation endpoints.
pub const ENDPOINT_TOL: f64 = 1e-14;

#[derive(Clone)]
pub enum WeightKind {
    /// Normalised Gaussian weight of width `a`; reproduces the closed-form packet.
    Gaussian { a: f64 },
    /// Cubic phase exp(iλ³/3) apodised by exp(−taper λ²).
    Airy { taper: f64 },
    Custom(Arc<dyn Fn(f64) -> Complex64 + Send + Sync>),
}

impl fmt::Debug for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Gaussian { a } => f.debug_struct("Gaussian").field("a", a).finish(),
            Self::Airy { taper } => f.debug_struct("Airy").field("taper", taper).finish(),
            Self::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Weight g(λ) truncated to [λ_min, λ_max] and integrated with an
/// `n_lambda`-point Gauss–Legendre rule.
#[derive(Debug, Clone)]
pub struct WeightFunction {
    kind: WeightKind,
    lambda_min: f64,
    lambda_max: f64,
    n_lambda: usize,
}

impl WeightFunction {
    pub fn new(kind: WeightKind, lambda_min: f64, lambda_max: f64, n_lambda: usize) -> Result<Self> {
        if !(lambda_min.is_finite() && lambda_max.is_finite() && lambda_min < lambda_max) {
            return Err(Error::InvalidParameter(format!(
                "lambda range must satisfy min < max, got [{lambda_min}, {lambda_max}]"
            )));
        }
        if n_lambda < 16 {
            return Err(Error::InvalidParameter(format!(
                "n_lambda must be at least 16, got {n_lambda}"
            )));
        }
        match &kind {
            WeightKind::Gaussian { a } if !(*a > 0.0) => {
                return Err(Error::InvalidParameter(format!("a must be positive, got {a}")))
            }
            WeightKind::Airy { taper } if !(*taper >= 0.0) => {
                return Err(Error::InvalidParameter(format!("taper must be non-negative, got {taper}")))
            }
            _ => {}
        }
        Ok(Self {
            kind,
            lambda_min,
            lambda_max,
            n_lambda,
        })
    }

    /// Gaussian weight on a symmetric window wide enough that |g| < 1e-14 at
    /// the ends; never narrower than ±8/√(2a).
    pub fn gaussian(a: f64, coeffs: &InvariantCoeffs, n_lambda: usize) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::InvalidParameter(format!("a must be positive, got {a}")));
        }
        let peak = gaussian_peak(a, coeffs);
        let needed = ((peak / (0.1 * ENDPOINT_TOL)).ln().max(0.0) / a).sqrt();
        let half = needed.max(8.0 / (2.0 * a).sqrt());
        Self::new(WeightKind::Gaussian { a }, -half, half, n_lambda)
    }

    /// Apodised cubic-phase weight on the symmetric window where the taper
    /// has fallen below 1e-15.
    pub fn airy(taper: f64, n_lambda: usize) -> Result<Self> {
        if !(taper > 0.0) {
            return Err(Error::InvalidParameter(format!("taper must be positive, got {taper}")));
        }
        let half = (0.1 * ENDPOINT_TOL).ln().abs().sqrt() / taper.sqrt();
        Self::new(WeightKind::Airy { taper }, -half, half, n_lambda)
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lambda_min, self.lambda_max)
    }

    pub fn n_lambda(&self) -> usize {
        self.n_lambda
    }

    pub fn eval(&self, lambda: f64, coeffs: &InvariantCoeffs) -> Complex64 {
        match &self.kind {
            WeightKind::Gaussian { a } => Complex64::new(gaussian_peak(*a, coeffs) * (-a * lambda * lambda).exp(), 0.0),
            WeightKind::Airy { taper } => Complex64::from_polar((-taper * lambda * lambda).exp(), lambda.powi(3) / 3.0),
            WeightKind::Custom(g) => g(lambda),
        }
    }
}

// √(√a / (ħ|A₀|π√(2π))), the prefactor that makes the superposition unit-normalised.
fn gaussian_peak(a: f64, coeffs: &InvariantCoeffs) -> f64 {
    let hbar = coeffs.params().hbar();
    (a.sqrt() / (hbar * coeffs.a0().abs() * PI * (2.0 * PI).sqrt())).sqrt()
}

/// Ψ(x, t) = ∫ g(λ) ψ_λ(x, t) dλ sampled on `grid`.
pub fn superpose(weight: &WeightFunction, coeffs: &InvariantCoeffs, grid: GridSpec, t: f64) -> Result<GridState> {
    let (lo, hi) = weight.range();
    let endpoint = weight.eval(lo, coeffs).norm().max(weight.eval(hi, coeffs).norm());
    if endpoint > ENDPOINT_TOL {
        return Err(Error::TruncationTooCoarse {
            weight: endpoint,
            threshold: ENDPOINT_TOL,
        });
    }
    let q = Default::default();
    let frame = EigenFrame::at(coeffs, t, &q)?;
    let degree = NonZeroUsize::new(weight.n_lambda()).expect("n_lambda validated at construction");
    let rule = GaussLegendre::new(degree);
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let samples: Vec<(f64, Complex64)> = rule
        .as_node_weight_pairs()
        .iter()
        .map(|&(node, w)| {
            let lambda = mid + half * node;
            (lambda, weight.eval(lambda, coeffs) * (w * half))
        })
        .collect();
    GridState::from_fn(grid, t, |x| {
        samples
            .iter()
            .map(|&(lambda, gw)| gw * frame.eval(lambda, x))
            .sum()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::force::ForceProfile;
    use crate::invariant::PhysicalParams;
    use crate::packet::PacketSpec;
    use crate::quadrature::QuadratureConfig;

    fn coeffs(force: ForceProfile) -> InvariantCoeffs {
        InvariantCoeffs::new(1.0, 0.0, 0.0, PhysicalParams::default(), force).unwrap()
    }

    fn max_deviation(state: &GridState, spec: &PacketSpec) -> f64 {
        let frame = spec.frame(state.t()).unwrap();
        state
            .spec()
            .nodes()
            .iter()
            .zip(state.amplitudes())
            .map(|(&x, z)| (z - frame.amplitude(x)).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn gauss_legendre_rule_is_accurate() {
        let rule = GaussLegendre::new(NonZeroUsize::new(256).unwrap());
        let total: f64 = rule.as_node_weight_pairs().iter().map(|p| p.1).sum();
        assert!((total - 2.0).abs() < 1e-13);
        let v = rule.integrate(-8.0, 8.0, |x| (-x * x).exp() * (5.0 * x).cos());
        let exact = PI.sqrt() * (-25.0f64 / 4.0).exp();
        assert!((v - exact).abs() < 1e-11);
    }

    #[test]
    fn gaussian_weight_reproduces_free_packet() {
        let c = coeffs(ForceProfile::Zero);
        let p = PacketSpec::new(c.clone(), 0.5, QuadratureConfig::default()).unwrap();
        let w = WeightFunction::gaussian(0.5, &c, 256).unwrap();
        let g = GridSpec::new(-20.0, 20.0, 512, 1e-3).unwrap();
        let s = superpose(&w, &c, g, 0.0).unwrap();
        assert!(max_deviation(&s, &p) < 1e-6);
    }

    #[test]
    fn truncation_guard() {
        let c = coeffs(ForceProfile::Zero);
        let w = WeightFunction::new(WeightKind::Gaussian { a: 0.5 }, -2.0, 2.0, 64).unwrap();
        let g = GridSpec::new(-20.0, 20.0, 64, 1e-3).unwrap();
        assert!(matches!(
            superpose(&w, &c, g, 0.0),
            Err(Error::TruncationTooCoarse { .. })
        ));
    }

    #[test]
    fn weight_validation() {
        assert!(WeightFunction::new(WeightKind::Airy { taper: 1.0 }, 1.0, -1.0, 64).is_err());
        assert!(WeightFunction::new(WeightKind::Airy { taper: 1.0 }, -1.0, 1.0, 8).is_err());
        assert!(WeightFunction::new(WeightKind::Gaussian { a: -1.0 }, -1.0, 1.0, 64).is_err());
    }

    #[test]
    fn custom_weight_matches_builtin() {
        let c = coeffs(ForceProfile::constant(1.0).unwrap());
        let builtin = WeightFunction::gaussian(0.5, &c, 128).unwrap();
        let (lo, hi) = builtin.range();
        let peak = gaussian_peak(0.5, &c);
        let custom = WeightFunction::new(
            WeightKind::Custom(Arc::new(move |l: f64| Complex64::new(peak * (-0.5 * l * l).exp(), 0.0))),
            lo,
            hi,
            128,
        )
        .unwrap();
        let g = GridSpec::new(-10.0, 10.0, 64, 1e-3).unwrap();
        let a = superpose(&builtin, &c, g, 0.3).unwrap();
        let b = superpose(&custom, &c, g, 0.3).unwrap();
        assert_eq!(a, b);
    }
}
