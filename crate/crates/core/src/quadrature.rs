//! Adaptive Simpson quadrature with Richardson correction.
//!
//! Intervals are bisected until the two-panel and one-panel Simpson estimates
//! agree to within a tolerance proportional to the panel width, so the total
//! error budget is `max(abs_tol, rel_tol * |I|)` spread evenly over `[a, b]`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-13,
            max_depth: 40,
        }
    }
}

impl QuadratureConfig {
    pub fn new(rel_tol: f64, abs_tol: f64, max_depth: u32) -> Result<Self> {
        let q = Self {
            rel_tol,
            abs_tol,
            max_depth,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "rel_tol must be positive, got {}",
                self.rel_tol
            )));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "abs_tol must be positive, got {}",
                self.abs_tol
            )));
        }
        if self.max_depth < 1 {
            return Err(Error::InvalidParameter("max_depth must be at least 1".into()));
        }
        Ok(())
    }
}

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    depth: u32,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) * (fa + 4.0 * fm + fb) / 6.0
}

/// Integrates `f` over `[a, b]` (requires `a <= b`).
pub fn integrate<F>(f: F, a: f64, b: f64, q: &QuadratureConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    debug_assert!(a < b);
    let span = b - a;

    // Coarse 4-panel estimate fixes the scale for the relative tolerance.
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let f1 = f(a + 0.25 * span);
    let f3 = f(a + 0.75 * span);
    let coarse = simpson(a, m, fa, f1, fm) + simpson(m, b, fm, f3, fb);
    let tol = q.abs_tol.max(q.rel_tol * coarse.abs());

    let mut total = 0.0;
    let mut stack = vec![
        Panel {
            a: m,
            b,
            fa: fm,
            fm: f3,
            fb,
            whole: simpson(m, b, fm, f3, fb),
            depth: 1,
        },
        Panel {
            a,
            b: m,
            fa,
            fm: f1,
            fb: fm,
            whole: simpson(a, m, fa, f1, fm),
            depth: 1,
        },
    ];
    while let Some(p) = stack.pop() {
        let mid = 0.5 * (p.a + p.b);
        let left_mid = 0.5 * (p.a + mid);
        let right_mid = 0.5 * (mid + p.b);
        let flm = f(left_mid);
        let frm = f(right_mid);
        let left = simpson(p.a, mid, p.fa, flm, p.fm);
        let right = simpson(mid, p.b, p.fm, frm, p.fb);
        let delta = left + right - p.whole;
        let local_tol = tol * (p.b - p.a) / span;
        if delta.abs() <= 15.0 * local_tol {
            total += left + right + delta / 15.0;
            continue;
        }
        if p.depth >= q.max_depth || mid <= p.a || mid >= p.b {
            return Err(Error::QuadratureNonConvergence {
                lower: a,
                upper: b,
            });
        }
        stack.push(Panel {
            a: mid,
            b: p.b,
            fa: p.fm,
            fm: frm,
            fb: p.fb,
            whole: right,
            depth: p.depth + 1,
        });
        stack.push(Panel {
            a: p.a,
            b: mid,
            fa: p.fa,
            fm: flm,
            fb: p.fm,
            whole: left,
            depth: p.depth + 1,
        });
    }
    Ok(total)
}

/// Integrates over `[a, b]` split at the interior `breaks`, so kinks in the
/// integrand fall on panel edges.
pub fn integrate_piecewise<F>(f: F, a: f64, b: f64, breaks: &[f64], q: &QuadratureConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut lo = a;
    let mut total = 0.0;
    for &x in breaks.iter().filter(|&&x| x > a && x < b) {
        total += integrate(&f, lo, x, q)?;
        lo = x;
    }
    total += integrate(&f, lo, b, q)?;
    Ok(total)
}
