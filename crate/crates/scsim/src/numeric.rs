//! Small numeric helpers shared by the calibration routines.

use crate::error::{Error, Result};

/// Bisection root find on `[lo, hi]`.
///
/// Requires a sign change over the bracket; iterates until the bracket width
/// drops below `rel_tol * max(|lo|, |hi|, 1)` or `f` hits zero exactly.
pub(crate) fn bisect(
    f: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    rel_tol: f64,
    context: &str,
) -> Result<f64> {
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Calibration {
            context: format!("{context}: no sign change in bracket"),
            lo,
            hi,
            f_lo,
            f_hi,
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
        if (hi - lo).abs() <= rel_tol * lo.abs().max(hi.abs()).max(1.0) {
            break;
        }
    }
    let _ = (f_lo, f_hi);
    Ok(0.5 * (lo + hi))
}

/// Convert a linear power ratio to decibels.
pub fn db_from_linear(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// Convert decibels to a linear power ratio.
pub fn linear_from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
