//! Scalar root finding on a bracket.

use crate::error::{Error, Result};

/// Bisection for a sign change of `g` on [lo, hi].
///
/// Requires `g(lo) <= 0 <= g(hi)` (an increasing crossing). Stops once the
/// bracket is narrower than `tol`; returns the midpoint of the final bracket,
/// or an endpoint where `g` vanishes exactly.
pub fn bisect_increasing<G: FnMut(f64) -> f64>(
    mut g: G,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<f64> {
    let glo = g(lo);
    let ghi = g(hi);
    if glo == 0.0 {
        return Ok(lo);
    }
    if ghi == 0.0 {
        return Ok(hi);
    }
    if !(glo < 0.0 && ghi > 0.0) {
        return Err(Error::Numerical(format!(
            "no increasing sign change on [{lo}, {hi}]: g = ({glo}, {ghi})"
        )));
    }
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm == 0.0 {
            return Ok(mid);
        }
        if gm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt2() {
        let r = bisect_increasing(|x| x * x - 2.0, 0.0, 2.0, 1e-13).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn exact_endpoint() {
        assert_eq!(bisect_increasing(|x| x - 1.0, 1.0, 3.0, 1e-12).unwrap(), 1.0);
    }

    #[test]
    fn rejects_missing_bracket() {
        assert!(bisect_increasing(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    }
}
