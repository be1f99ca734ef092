//! Safeguarded Newton iteration for strictly monotone scalar equations.

use crate::error::{Error, Result};

/// Outcome of an implicit solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImplicitResult {
    pub value: f64,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 200,
        }
    }
}

/// Solves `f(x) = 0` for a strictly monotone `f` (increasing or decreasing).
///
/// `fdf` returns `(f(x), f'(x))`. The bracket `[lo, hi]` is a hint; it is
/// grown geometrically until it contains a sign change. Newton steps that
/// leave the bracket or fail to shrink the residual fall back to bisection.
/// Once the residual is below `tol` one extra Newton step is taken when it
/// lowers the residual, so returned roots are accurate to rounding.
pub fn solve_monotone<F>(
    what: &'static str,
    mut fdf: F,
    guess: f64,
    lo: f64,
    hi: f64,
    opts: NewtonOptions,
) -> Result<ImplicitResult>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut flo = fdf(lo).0;
    let mut fhi = fdf(hi).0;
    let mut iterations = 0usize;

    // grow until the bracket straddles the root
    let mut width = (hi - lo).max(1.0);
    while flo.signum() == fhi.signum() && flo != 0.0 && fhi != 0.0 {
        iterations += 1;
        if iterations > opts.max_iter || !width.is_finite() {
            return Err(Error::NoConvergence {
                what,
                iterations,
                residual: flo.abs().min(fhi.abs()),
            });
        }
        width *= 2.0;
        if flo.abs() < fhi.abs() {
            lo -= width;
            flo = fdf(lo).0;
        } else {
            hi += width;
            fhi = fdf(hi).0;
        }
    }
    if flo == 0.0 {
        return Ok(ImplicitResult { value: lo, residual: 0.0, iterations });
    }
    if fhi == 0.0 {
        return Ok(ImplicitResult { value: hi, residual: 0.0, iterations });
    }
    let increasing = fhi > flo;

    let mut x = if guess.is_finite() && guess > lo && guess < hi {
        guess
    } else {
        0.5 * (lo + hi)
    };
    let (mut fx, mut dfx) = fdf(x);
    let mut last_step = hi - lo;
    loop {
        if fx.abs() <= opts.tol {
            // polish
            if dfx != 0.0 && dfx.is_finite() {
                let xn = x - fx / dfx;
                if xn.is_finite() {
                    let fxn = fdf(xn).0;
                    if fxn.abs() < fx.abs() {
                        x = xn;
                        fx = fxn;
                    }
                }
            }
            return Ok(ImplicitResult { value: x, residual: fx, iterations });
        }
        iterations += 1;
        if iterations > opts.max_iter {
            return Err(Error::NoConvergence { what, iterations, residual: fx.abs() });
        }
        if (fx > 0.0) == increasing {
            hi = x;
        } else {
            lo = x;
        }
        if hi - lo <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
            // bracket collapsed to adjacent floats
            return Ok(ImplicitResult { value: x, residual: fx, iterations });
        }
        let newton = if dfx != 0.0 { x - fx / dfx } else { f64::NAN };
        let step_ok = newton.is_finite() && newton > lo && newton < hi && (newton - x).abs() < 0.5 * last_step;
        let next = if step_ok { newton } else { 0.5 * (lo + hi) };
        last_step = (next - x).abs();
        x = next;
        (fx, dfx) = fdf(x);
    }
}
