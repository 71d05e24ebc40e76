//! Indexed root search for Wronskian-type functions.
//!
//! Between consecutive roots the sign of w is fixed and alternates with the
//! interval index (sign w-dot at root n is (-1)^{n+1}), so the sign of w at
//! the asymptotic seed tells on which side root n lies. The bracket is then
//! expanded in that direction only and polished by bracket-safeguarded
//! Newton using the analytic lambda-derivative.

use crate::error::{Result, SlError};

/// Fraction of the expansion scale used per marching step.
const MARCH_STEPS: usize = 32;
/// Newton iteration cap; convergence is quadratic so this is generous.
const MAX_POLISH: usize = 100;

/// Finds the index-n root of w, given an evaluator returning (w, w-dot),
/// a seed from the eigenvalue asymptotics and the expansion scale
/// (pi^2 (n+1)/2 for both boundary families).
pub(crate) fn find_root_indexed(
    eval: &dyn Fn(f64) -> Result<(f64, f64)>,
    n: usize,
    seed: f64,
    gap: f64,
) -> Result<f64> {
    let (w_seed, _) = eval(seed)?;
    if w_seed == 0.0 {
        return Ok(seed);
    }
    // sign of w on (lambda_{n-1}, lambda_n) is (-1)^n
    let sign_below = if n % 2 == 0 { 1.0 } else { -1.0 };
    let dir = if w_seed.signum() == sign_below { 1.0 } else { -1.0 };

    let step = gap / 8.0;
    let mut prev_x = seed;
    let mut prev_w = w_seed;
    let mut bracket = None;
    for k in 1..=MARCH_STEPS {
        let x = seed + dir * k as f64 * step;
        let (w, _) = eval(x)?;
        if w == 0.0 {
            return Ok(x);
        }
        if w.signum() != prev_w.signum() {
            bracket = Some(if dir > 0.0 {
                (prev_x, x, prev_w)
            } else {
                (x, prev_x, w)
            });
            break;
        }
        prev_x = x;
        prev_w = w;
    }
    let (mut lo, mut hi, mut w_lo) =
        bracket.ok_or(SlError::BracketFailure { index: n, seed })?;

    let mut x = 0.5 * (lo + hi);
    for _ in 0..MAX_POLISH {
        let (w, wd) = eval(x)?;
        if w == 0.0 {
            return Ok(x);
        }
        if w.signum() == w_lo.signum() {
            lo = x;
            w_lo = w;
        } else {
            hi = x;
        }
        let newton = x - w / wd;
        let next = if wd != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let dx = (next - x).abs();
        x = next;
        let scale = x.abs().max(1.0);
        if dx <= 4.0 * f64::EPSILON * scale || (hi - lo) <= 4.0 * f64::EPSILON * scale {
            return Ok(x);
        }
    }
    Ok(x)
}
