//! Adaptive Simpson quadrature with a cap on the number of subintervals.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Subintervals accepted.
    pub intervals: usize,
    /// False when the interval cap was hit before every piece met its
    /// tolerance; `value` is then the best available estimate.
    pub converged: bool,
}

pub const MAX_INTERVALS: usize = 10_000;
pub const ABS_TOL: f64 = 1e-9;

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    max_intervals: usize,
) -> Quadrature {
    if a == b {
        return Quadrature {
            value: 0.0,
            intervals: 0,
            converged: true,
        };
    }
    let simpson = |a: f64, fa: f64, fm: f64, b: f64, fb: f64| (b - a) / 6.0 * (fa + 4.0 * fm + fb);

    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, fa, fm, b, fb);

    // (a, fa, m, fm, b, fb, estimate, tol, depth)
    let mut stack = vec![(a, fa, m, fm, b, fb, whole, tol, 0u32)];
    let mut value = 0.0;
    let mut intervals = 0;
    let mut converged = true;
    while let Some((a, fa, m, fm, b, fb, est, tol, depth)) = stack.pop() {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, fa, flm, m, fm);
        let right = simpson(m, fm, frm, b, fb);
        let diff = left + right - est;
        let capped = intervals + stack.len() + 2 > max_intervals || depth > 50;
        if diff.abs() <= 15.0 * tol || capped {
            if capped && diff.abs() > 15.0 * tol {
                converged = false;
            }
            value += left + right + diff / 15.0;
            intervals += 1;
        } else {
            stack.push((m, fm, rm, frm, b, fb, right, tol / 2.0, depth + 1));
            stack.push((a, fa, lm, flm, m, fm, left, tol / 2.0, depth + 1));
        }
    }
    Quadrature {
        value,
        intervals,
        converged,
    }
}
