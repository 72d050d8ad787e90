//! One-dimensional minimization on a closed interval.

use crate::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Minimizes a unimodal `f` on `[lo, hi]` by golden-section search until the
/// bracket is shorter than `tol`. The endpoints are evaluated too, and the
/// best of the three candidates is returned as `(x, f(x))`; ties go to the
/// smaller `x`.
pub fn golden_section_min<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::Domain(format!("invalid interval [{lo}, {hi}]")));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance {tol} must be positive")));
    }
    let f_lo = f(lo);
    if hi == lo {
        return Ok((lo, f_lo));
    }
    let f_hi = f(hi);

    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    let f_mid = f(mid);

    let mut best = (lo, f_lo);
    for cand in [(mid, f_mid), (hi, f_hi)] {
        if cand.1 < best.1 {
            best = cand;
        }
    }
    Ok(best)
}
