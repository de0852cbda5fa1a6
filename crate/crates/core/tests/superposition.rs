use std::sync::Arc;

use num_complex::Complex64;

use linwave::grid::{l2_distance, superpose, GridSpec, SplitStep, WeightFunction, WeightKind};
use linwave::{ForceProfile, InvariantCoeffs, PhysicalParams};

fn coeffs(b0: f64, force: ForceProfile) -> InvariantCoeffs {
    InvariantCoeffs::new(1.0, b0, 0.1, PhysicalParams::default(), force).unwrap()
}

// A superposition built at t and carried forward by the propagator must agree
// with the superposition built directly at the later time.
fn propagated_mismatch(w: &WeightFunction, c: &InvariantCoeffs, t0: f64, t1: f64) -> f64 {
    let grid = GridSpec::new(-40.0, 40.0, 2048, 1e-3).unwrap();
    let start = superpose(w, c, grid, t0).unwrap();
    let moved = SplitStep::new(grid, c).propagate(&start, c, t1).unwrap();
    let direct = superpose(w, c, grid, t1).unwrap();
    l2_distance(&moved, &direct).unwrap()
}

#[test]
fn airy_weight_is_consistent_with_propagation() {
    for (b0, force) in [
        (0.0, ForceProfile::constant(1.0).unwrap()),
        (0.3, ForceProfile::sinusoidal(1.0, 2.0, 0.5).unwrap()),
    ] {
        let c = coeffs(b0, force);
        let w = WeightFunction::airy(1.0, 256).unwrap();
        let err = propagated_mismatch(&w, &c, 0.0, 0.6);
        assert!(err < 1e-5, "B0={b0}: {err:e}");
    }
}

#[test]
fn custom_two_lobe_weight_is_consistent_with_propagation() {
    let c = coeffs(0.2, ForceProfile::constant(-0.5).unwrap());
    let g = Arc::new(|l: f64| {
        let lobe = |m: f64| (-(l - m) * (l - m)).exp();
        Complex64::new(lobe(-1.5) + lobe(1.5), 0.0)
    });
    let w = WeightFunction::new(WeightKind::Custom(g), -8.0, 8.0, 256).unwrap();
    let err = propagated_mismatch(&w, &c, 0.1, 0.7);
    assert!(err < 1e-5, "{err:e}");
}
