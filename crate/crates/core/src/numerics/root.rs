//! Root finding for increasing functions: bracket by doubling, then
//! bisection refined by secant steps. Convergence is judged on `|f(x)|`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    /// Stop once `|f(x)| <= f_tol`.
    pub f_tol: f64,
    pub max_iter: usize,
    /// Number of doublings allowed while searching for an upper bracket.
    pub max_doublings: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            f_tol: 1e-12,
            max_iter: 200,
            max_doublings: 200,
        }
    }
}

/// Smallest `start * 2^k` with `f >= 0`, together with the previous point
/// (or `lower`) which has `f < 0`.
pub fn expand_bracket<F>(f: &mut F, lower: f64, start: f64, opts: &RootOptions) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut lo = lower;
    let mut hi = start.max(f64::MIN_POSITIVE);
    for _ in 0..opts.max_doublings {
        if f(hi)? >= 0.0 {
            return Ok((lo, hi));
        }
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            break;
        }
    }
    Err(Error::BracketExhausted { last_upper: lo })
}

/// Solves `f(x) = 0` on `[lo, hi]` for non-decreasing `f` with
/// `f(lo) <= 0 <= f(hi)`.
pub fn solve_increasing<F>(f: &mut F, lo: f64, hi: f64, opts: &RootOptions) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa.abs() <= opts.f_tol {
        return Ok(a);
    }
    if fb.abs() <= opts.f_tol {
        return Ok(b);
    }
    if fa > 0.0 || fb < 0.0 {
        return Err(Error::BracketExhausted { last_upper: b });
    }
    let mut force_bisect = false;
    let mut best = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    for _ in 0..opts.max_iter {
        let width = b - a;
        let secant = a - fa * (b - a) / (fb - fa);
        let x = if !force_bisect && secant > a && secant < b {
            secant
        } else {
            0.5 * (a + b)
        };
        let fx = f(x)?;
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx.abs() <= opts.f_tol {
            return Ok(x);
        }
        if fx < 0.0 {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        // A step that fails to halve the bracket is followed by a bisection.
        force_bisect = b - a > 0.5 * width;
        if b - a <= 4.0 * f64::EPSILON * a.abs().max(b.abs()) {
            return Ok(best.0);
        }
    }
    Ok(best.0)
}
