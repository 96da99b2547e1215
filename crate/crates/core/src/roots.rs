//! Bracketed bisection for the strictly monotone root functions of the envelope
//! construction.

use crate::error::{Error, Result};

/// Stop once the bracket is narrower than this.
pub const X_TOL: f64 = 1e-14;
/// ... or once `|f|` drops below this.
pub const F_TOL: f64 = 1e-12;

/// Finds the sign change of `f` on `[lo, hi]`.
///
/// Either orientation is accepted. Fails with [`Error::Bracket`] when `f(lo)` and
/// `f(hi)` share a sign.
pub fn bisect<F: Fn(f64) -> f64>(name: &'static str, f: F, lo: f64, hi: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() {
        return Err(Error::Bracket { name, lo, hi, f_lo: fa, f_hi: fb });
    }
    let increasing = fa < 0.0;
    // 200 halvings exhaust any finite bracket in f64.
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if fm.abs() <= F_TOL || (b - a).abs() <= X_TOL || mid == a || mid == b {
            return Ok(mid);
        }
        if (fm < 0.0) == increasing {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}
