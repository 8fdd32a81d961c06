//! Globally adaptive Simpson quadrature.
//!
//! Intervals are kept in a max-heap keyed by their local error estimate and
//! the worst one is bisected until the summed estimate falls below the
//! requested absolute tolerance. A global (rather than recursive, per-branch)
//! strategy copes with integrable endpoint singularities such as
//! `(x - y)^{beta - 1}`, where the per-level tolerance halving of the
//! recursive scheme never terminates.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Upper bound on the number of live subintervals.
pub const MAX_SUBINTERVALS: usize = 1 << 15;

/// Result of a quadrature call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub abs_error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    refined: f64,
    err: f64,
    // midpoints of the two halves, cached so a bisection costs two evaluations
    flm: f64,
    frm: f64,
}

impl Panel {
    fn new<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> Self {
        let m = 0.5 * (a + b);
        let flm = f(0.5 * (a + m));
        let frm = f(0.5 * (m + b));
        let h = b - a;
        let whole = h / 6.0 * (fa + 4.0 * fm + fb);
        let left = h / 12.0 * (fa + 4.0 * flm + fm);
        let right = h / 12.0 * (fm + 4.0 * frm + fb);
        let refined = left + right;
        let err = (refined - whole).abs() / 15.0;
        Panel { a, b, fa, fm, fb, whole, refined, err, flm, frm }
    }

    fn estimate(&self) -> f64 {
        self.refined + (self.refined - self.whole) / 15.0
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Reversed limits give the negated integral; `a == b` gives zero.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<Quadrature> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("quadrature tolerance must be positive, got {tol}")));
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!("quadrature limits must be finite, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(Quadrature { value: 0.0, abs_error: 0.0, intervals: 0 });
    }
    if b < a {
        let q = integrate(f, b, a, tol)?;
        return Ok(Quadrature { value: -q.value, ..q });
    }

    // Seed with a few panels so that narrow features are not missed by the
    // very first five-point estimate.
    const SEED: usize = 8;
    let mut heap = BinaryHeap::with_capacity(64);
    let h = (b - a) / SEED as f64;
    let mut fa = f(a);
    for i in 0..SEED {
        let lo = a + i as f64 * h;
        let hi = if i + 1 == SEED { b } else { a + (i + 1) as f64 * h };
        let fm = f(0.5 * (lo + hi));
        let fb = f(hi);
        heap.push(Panel::new(&f, lo, hi, fa, fm, fb));
        fa = fb;
    }

    let mut total_err: f64 = heap.iter().map(|p| p.err).sum();
    loop {
        if total_err <= tol {
            break;
        }
        if heap.len() >= MAX_SUBINTERVALS {
            return Err(Error::NoConvergence {
                method: "adaptive Simpson",
                iterations: heap.len(),
                detail: format!("error estimate {total_err:.3e} above tolerance {tol:.3e} on [{a}, {b}]"),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            // interval exhausted at machine resolution; accept what we have
            heap.push(Panel { err: 0.0, ..worst });
            total_err -= worst.err;
            continue;
        }
        let left = Panel::new(&f, worst.a, m, worst.fa, worst.flm, worst.fm);
        let right = Panel::new(&f, m, worst.b, worst.fm, worst.frm, worst.fb);
        total_err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
        // guard against drift of the running sum
        if heap.len() % 256 == 0 {
            total_err = heap.iter().map(|p| p.err).sum();
        }
    }

    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = panels.iter().map(Panel::estimate).sum();
    let abs_error = panels.iter().map(|p| p.err).sum();
    Ok(Quadrature { value, abs_error, intervals: panels.len() })
}
