//! Bracketed scalar root finding.

use crate::error::{Result, SpectraError};
use crate::types::TolerancePolicy;

/// Root of `g` inside `[lo, hi]` by safeguarded secant steps.
///
/// A secant step is taken only when it lands strictly inside the current
/// bracket and the bracket has been shrinking fast enough; otherwise the
/// step is a bisection. `g` may return `±∞` (treated as a sign only).
/// Stops when the bracket is narrower than `tol.root_abs_tol`, when `g`
/// vanishes exactly, or when the bracket can no longer be split in floating
/// point.
pub fn first_root<F>(g: F, lo: f64, hi: f64, tol: &TolerancePolicy) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut ga = g(a);
    let mut gb = g(b);
    if ga == 0.0 {
        return Ok(a);
    }
    if gb == 0.0 {
        return Ok(b);
    }
    if ga.is_nan() || gb.is_nan() || ga.signum() == gb.signum() {
        return Err(SpectraError::NoSignChange { lo: a, hi: b });
    }

    let mut width_two_steps_ago = b - a;
    let mut width_one_step_ago = b - a;
    for _ in 0..tol.max_iterations.max(1) * 4 {
        let width = b - a;
        if width <= tol.root_abs_tol {
            return Ok(pick(a, ga, b, gb));
        }
        let mid = a + 0.5 * width;
        if mid <= a || mid >= b {
            return Ok(pick(a, ga, b, gb));
        }

        // force bisection if the last two steps did not halve the bracket
        let stalled = width > 0.5 * width_two_steps_ago;
        let mut x = mid;
        if !stalled && ga.is_finite() && gb.is_finite() {
            let secant = b - gb * (b - a) / (gb - ga);
            let guard = 1e-3 * width;
            if secant.is_finite() && secant > a + guard && secant < b - guard {
                x = secant;
            }
        }

        let gx = g(x);
        if gx == 0.0 {
            return Ok(x);
        }
        if gx.is_nan() {
            return Err(SpectraError::NoSignChange { lo: a, hi: b });
        }
        if gx.signum() == ga.signum() {
            a = x;
            ga = gx;
        } else {
            b = x;
            gb = gx;
        }
        width_two_steps_ago = width_one_step_ago;
        width_one_step_ago = width;
    }
    Err(SpectraError::MaxIterations(tol.max_iterations * 4))
}

fn pick(a: f64, ga: f64, b: f64, gb: f64) -> f64 {
    if !ga.is_finite() {
        return b;
    }
    if !gb.is_finite() {
        return a;
    }
    // linear interpolation across the final bracket
    let x = b - gb * (b - a) / (gb - ga);
    if x.is_finite() && x >= a && x <= b {
        x
    } else {
        0.5 * (a + b)
    }
}
