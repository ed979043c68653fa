//! Scalar bracketed root finding.

use crate::error::Result;

/// Illinois-modified regula falsi on a sign-changing bracket.
///
/// Stops once the bracket is narrower than `xtol` or |f| ≤ `ftol`.
pub fn illinois<F>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    xtol: f64,
    ftol: f64,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    debug_assert!(fa * fb <= 0.0);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    for it in 0..400 {
        let c = if it % 8 == 7 {
            0.5 * (a + b)
        } else {
            let c = (a * fb - b * fa) / (fb - fa);
            if c.is_finite() && c > a.min(b) && c < a.max(b) {
                c
            } else {
                0.5 * (a + b)
            }
        };
        let fc = f(c)?;
        if fc == 0.0 || fc.abs() <= ftol {
            return Ok(c);
        }
        if fc * fb < 0.0 {
            a = b;
            fa = fb;
        } else {
            fa *= 0.5;
        }
        b = c;
        fb = fc;
        if (b - a).abs() <= xtol {
            return Ok(if fa.abs() < fb.abs() { a } else { b });
        }
    }
    Ok(0.5 * (a + b))
}

/// Plain bisection on a monotone predicate: returns x with `pred(x)` true and
/// `pred(x + tol)` false, assuming `pred(lo)` and `!pred(hi)`.
pub fn bisect_predicate<P>(mut pred: P, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    P: FnMut(f64) -> Result<bool>,
{
    while (hi - lo).abs() > tol {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if pred(mid)? {
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
    fn finds_cubic_root() {
        let f = |x: f64| Ok(x * x * x - 2.0);
        let r = illinois(f, 0.0, 3.0, -2.0, 25.0, 1e-14, 0.0).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-12);
        let r = bisect_predicate(|x| Ok(x * x < 2.0), 0.0, 2.0, 1e-13).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
    }
}
