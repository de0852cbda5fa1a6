use proptest::prelude::*;

use linwave::grid::{init_from_packet, GridSpec, SplitStep};
use linwave::packet::{eigen_solution, eigenfunction};
use linwave::scenario::Scenario;
use linwave::{Error, ForceProfile, InvariantCoeffs, PacketSpec, PhysicalParams, QuadratureConfig};

fn force() -> impl Strategy<Value = ForceProfile> {
    prop_oneof![
        Just(ForceProfile::Zero),
        (-5.0..5.0f64).prop_map(|f| ForceProfile::constant(f).unwrap()),
        (-5.0..5.0f64, 0.1..6.0f64, 0.0..std::f64::consts::TAU).prop_map(|(f, w, p)| ForceProfile::sinusoidal(f, w, p).unwrap()),
    ]
}

prop_compose! {
    fn coeffs()(
        a0 in 0.2..3.0f64,
        b0 in -1.5..1.5f64,
        c0 in -1.0..1.0f64,
        hbar in 0.3..2.0f64,
        m in 0.3..3.0f64,
        f in force(),
    ) -> InvariantCoeffs {
        InvariantCoeffs::new(a0, b0, c0, PhysicalParams::new(hbar, m).unwrap(), f).unwrap()
    }
}

/// A time strictly inside the admissible window, as a fraction of it.
fn admissible(c: &InvariantCoeffs, frac: f64) -> f64 {
    frac * c.guard_time().min(3.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coeff_a_is_affine(c in coeffs(), u in 0.0..1.0f64, v in 0.0..1.0f64) {
        let (s, t) = (admissible(&c, u), admissible(&c, v));
        let mid = c.coeff_a(0.5 * (s + t));
        prop_assert!((c.coeff_a(s) + c.coeff_a(t) - 2.0 * mid).abs() < 1e-12 * (1.0 + mid.abs()));
    }

    #[test]
    fn closed_form_c_matches_quadrature(c in coeffs(), u in 0.0..1.0f64) {
        let t = admissible(&c, u);
        let q = QuadratureConfig::default();
        let closed = c.coeff_c(t).unwrap();
        let quad = c.coeff_c_quadrature(t, &q).unwrap();
        prop_assert!((closed - quad).abs() < 1e-8 * (1.0 + closed.abs()), "{closed} vs {quad}");
    }

    #[test]
    fn kernels_are_monotone(c in coeffs(), u in 0.0..1.0f64, v in 0.0..1.0f64) {
        let (s, t) = (admissible(&c, u.min(v)), admissible(&c, u.max(v)));
        let q = QuadratureConfig::default();
        prop_assert!(c.kernel_inv_a2(t).unwrap() >= c.kernel_inv_a2(s).unwrap());
        prop_assert!(c.kernel_c2_over_a2(t, &q).unwrap() >= c.kernel_c2_over_a2(s, &q).unwrap() - 1e-12);
    }

    #[test]
    fn full_margin_rejects_exactly_past_caustic(c in coeffs(), frac in 0.0..2.0f64) {
        let c = c.with_caustic_margin(1.0).unwrap();
        if let Some(t_star) = c.caustic_time() {
            let t = frac * t_star;
            let rejected = matches!(c.check_time(t), Err(Error::CausticReached { .. }));
            prop_assert_eq!(rejected, t >= t_star);
        } else {
            prop_assert!(c.check_time(10.0 * frac).is_ok());
        }
    }

    #[test]
    fn eigenfunction_is_pure_phase(c in coeffs(), lambda in -5.0..5.0f64, x in -20.0..20.0f64, u in 0.0..1.0f64) {
        let z = eigenfunction(&c, lambda, x, admissible(&c, u)).unwrap();
        prop_assert!((z.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigen_solution_modulus_law(c in coeffs(), lambda in -5.0..5.0f64, x in -20.0..20.0f64, u in 0.0..1.0f64) {
        let t = admissible(&c, u);
        let z = eigen_solution(&c, lambda, x, t, &QuadratureConfig::default()).unwrap();
        let expected = (c.a0() / c.coeff_a(t)).abs().sqrt();
        prop_assert!((z.norm() - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn uncertainty_bound_holds(c in coeffs(), a in 0.05..5.0f64, u in 0.0..1.0f64) {
        let hbar = c.params().hbar();
        let t = admissible(&c, u);
        let p = PacketSpec::new(c, a, QuadratureConfig::default()).unwrap();
        prop_assert!(p.uncertainty_product(t).unwrap() >= 0.5 * hbar - 1e-12);
    }

    #[test]
    fn density_is_amplitude_modulus_squared(c in coeffs(), a in 0.05..5.0f64, x in -10.0..10.0f64, u in 0.0..1.0f64) {
        let t = admissible(&c, u);
        let p = PacketSpec::new(c, a, QuadratureConfig::default()).unwrap();
        let frame = p.frame(t).unwrap();
        let rho = frame.density(x);
        prop_assert!((rho - frame.amplitude(x).norm_sqr()).abs() <= 1e-12 * (1.0 + rho));
    }

    // Rescaling the invariant by k (and the weight width by 1/k²) describes the same state.
    #[test]
    fn invariant_scale_is_a_gauge(c in coeffs(), a in 0.1..3.0f64, k in 0.3..3.0f64, u in 0.0..1.0f64) {
        let t = admissible(&c, u);
        let scaled = InvariantCoeffs::new(k * c.a0(), k * c.b0(), k * c.c0(), *c.params(), c.force().clone()).unwrap();
        let q = QuadratureConfig::default();
        let m1 = PacketSpec::new(c, a, q).unwrap().analytic_moments(t).unwrap();
        let m2 = PacketSpec::new(scaled, a / (k * k), q).unwrap().analytic_moments(t).unwrap();
        for (x, y) in [(m1.mean_x, m2.mean_x), (m1.mean_p, m2.mean_p), (m1.sigma_x, m2.sigma_x), (m1.sigma_p, m2.sigma_p)] {
            prop_assert!((x - y).abs() < 1e-8 * (1.0 + x.abs()), "{x} vs {y}");
        }
    }

    #[test]
    fn scenario_emit_round_trips(
        c in coeffs(),
        a in 0.05..5.0f64,
        u in 0.05..1.0f64,
        n_samples in 2usize..200,
        with_grid in any::<bool>(),
    ) {
        let mut s = Scenario::new(admissible(&c, u));
        s.params = *c.params();
        s.a0 = c.a0();
        s.b0 = c.b0();
        s.c0 = c.c0();
        s.force = c.force().clone();
        s.a = a;
        s.n_samples = n_samples;
        s.grid = with_grid.then(|| GridSpec::new(-17.25, 23.5, 512, 3.3e-4).unwrap());
        let parsed: Scenario = s.emit().parse().unwrap();
        prop_assert_eq!(parsed, s);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn split_step_conserves_norm(
        a0 in 0.5..2.0f64,
        b0 in -0.5..0.5f64,
        f0 in -2.0..2.0f64,
        u in 0.0..1.0f64,
    ) {
        // parameters bounded so the packet stays well inside the domain up to t = 1
        let force = ForceProfile::sinusoidal(f0, 2.0, 0.3).unwrap();
        let c = InvariantCoeffs::new(a0, b0, 0.0, PhysicalParams::default(), force).unwrap();
        let t = admissible(&c, u).min(1.0);
        let p = PacketSpec::new(c, 1.0, QuadratureConfig::default()).unwrap();
        let grid = GridSpec::new(-40.0, 40.0, 2048, 1e-2).unwrap();
        let state = init_from_packet(&p, grid, 0.0).unwrap();
        let evolved = SplitStep::new(grid, p.coeffs()).propagate(&state, p.coeffs(), t).unwrap();
        prop_assert!((evolved.norm() - state.norm()).abs() < 1e-12);
    }
}
