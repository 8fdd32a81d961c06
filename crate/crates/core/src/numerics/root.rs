//! Root finding for monotone scalar functions.

use crate::error::{Error, Result};

/// Locates `inf { x in [lo, hi] : f(x) >= 0 }` for a nondecreasing `f` by
/// bisection, stopping once the bracket is no wider than `xtol`.
///
/// Returns the right end of the final bracket, so the returned point always
/// satisfies `f(x) >= 0`.
pub fn bisect_increasing<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, xtol: f64) -> Result<f64> {
    if !(lo <= hi) || !(xtol > 0.0) {
        return Err(Error::Domain(format!("bad bisection bracket [{lo}, {hi}] / xtol {xtol}")));
    }
    if f(lo) >= 0.0 {
        return Ok(lo);
    }
    if f(hi) < 0.0 {
        return Err(Error::NoConvergence {
            method: "bisection",
            iterations: 0,
            detail: format!("no sign change on [{lo}, {hi}]"),
        });
    }
    let mut iterations = 0;
    while hi - lo > xtol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
        if iterations > 2000 {
            break;
        }
    }
    Ok(hi)
}

/// Solves `f(x) = 0` for a strictly increasing `f` with derivative `df` on a
/// bracket `[lo, hi]` with `f(lo) <= 0 <= f(hi)`.
///
/// Newton steps that leave the current bracket are replaced by bisection.
/// Terminates when `|f(x)| <= ftol`.
pub fn newton_bracketed<F, D>(f: F, df: D, mut lo: f64, mut hi: f64, ftol: f64, max_iter: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut x = 0.5 * (lo + hi);
    let mut fx = f(x);
    for _ in 0..max_iter {
        if fx.abs() <= ftol {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let d = df(x);
        let newton = x - fx / d;
        x = if d > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        fx = f(x);
        if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
    }
    if fx.abs() <= ftol {
        return Ok(x);
    }
    Err(Error::NoConvergence {
        method: "safeguarded Newton",
        iterations: max_iter,
        detail: format!("x = {x}, residual {fx:.3e} > {ftol:.3e}, bracket [{lo}, {hi}]"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_finds_threshold() {
        let x = bisect_increasing(|x| x * x - 2.0, 0.0, 2.0, 1e-12).unwrap();
        assert!((x - 2f64.sqrt()).abs() < 1e-12);
        assert!(x * x - 2.0 >= 0.0);
    }

    #[test]
    fn bisection_returns_lo_when_already_satisfied() {
        assert_eq!(bisect_increasing(|x| x + 1.0, 0.0, 1.0, 1e-9).unwrap(), 0.0);
    }

    #[test]
    fn bisection_without_sign_change_fails() {
        assert!(bisect_increasing(|x| x - 5.0, 0.0, 1.0, 1e-9).is_err());
    }

    #[test]
    fn newton_solves_cubic() {
        let x = newton_bracketed(|x| x * x * x + x - 10.0, |x| 3.0 * x * x + 1.0, 0.0, 10.0, 1e-14, 200).unwrap();
        assert!((x * x * x + x - 10.0).abs() <= 1e-14);
    }

    #[test]
    fn newton_reports_cap() {
        let err = newton_bracketed(|x| x - 0.3, |_| 1.0, 0.0, 1.0, 0.0, 0).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { .. }));
    }
}
