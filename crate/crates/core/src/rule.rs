//! The optimal threshold `a*`, the value functions `V_a` and `V = V_{a*}`,
//! and the moments of the last zero `g` that close the prediction problem.

use serde::{Deserialize, Serialize};

use crate::convolve::{build_table_with, Convolution, ConvolutionTable, HMethod, DEFAULT_QUAD_TOL};
use crate::error::{Error, Result};
use crate::model::{LevyModel, Variation};
use crate::numerics::integrate;
use crate::scale::{w_q_brownian, ScaleEvaluator};

/// Default bisection width for `a*`.
pub const DEFAULT_A_TOL: f64 = 1e-10;

/// Absolute tolerance for integrals of `H` inside `V_a`.
pub const VALUE_QUAD_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitRegime {
    SmoothFit,
    ContinuousFitOnly,
}

/// Solved stopping rule `tau_{a*} = inf { t : X_t > a* }`.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalRule {
    pub a_star: f64,
    pub x0: f64,
    pub regime: FitRegime,
    /// `E(g)` started from 0.
    pub expected_g: f64,
    pub h_at_a_star: f64,
    pub tol: f64,
    pub conv: Convolution,
    pub table: ConvolutionTable,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub quad_tol: f64,
    pub a_tol: f64,
    pub table_points: usize,
    /// Integrate `H` numerically even when a closed form exists.
    pub force_numeric: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { quad_tol: DEFAULT_QUAD_TOL, a_tol: DEFAULT_A_TOL, table_points: 201, force_numeric: false }
    }
}

/// Convenience wrapper: builds an `H` table wide enough to contain the
/// median and solves for `a*`.
pub fn solve(model: LevyModel, opts: SolveOptions) -> Result<OptimalRule> {
    let ev = ScaleEvaluator::new(model)?;
    let conv = if opts.force_numeric {
        Convolution::numeric(ev, opts.quad_tol)
    } else {
        Convolution::new(ev, opts.quad_tol)
    };
    // H(x) >= F(x/2)^2, so twice the 1 - 1e-4 quantile of F clears 1/2
    let x_max = (2.0 * ev.quantile(1.0 - 1e-4)).max(1.0);
    let table = build_table_with(&conv, x_max, opts.table_points)?;
    solve_a_star(&conv, table, opts.a_tol)
}

/// Locates `a* = inf { x : H(x) >= 1/2 }`, bracketing on the table and
/// refining by bisection on `H` itself.
pub fn solve_a_star(conv: &Convolution, table: ConvolutionTable, tol: f64) -> Result<OptimalRule> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("a* tolerance must be positive, got {tol}")));
    }
    let ev = conv.ev;
    let x0 = ev.x0();
    let expected_g = expected_g(&ev.model, 0.0)?;
    let f0 = ev.f(0.0);
    if ev.profile.variation == Variation::FiniteVariation && f0 * f0 >= 0.5 {
        return Ok(OptimalRule {
            a_star: 0.0,
            x0,
            regime: FitRegime::ContinuousFitOnly,
            expected_g,
            h_at_a_star: conv.eval(0.0)?,
            tol,
            conv: *conv,
            table,
        });
    }

    let h_max = *table.values.last().expect("non-empty table");
    if h_max <= 0.5 {
        return Err(Error::TableTooShort { x_max: table.x_max(), h_max });
    }
    let i = table.first_at_least(0.5).expect("h_max > 1/2");
    let mut lo = table.grid[i.saturating_sub(2)];
    let mut hi = table.grid[(i + 1).min(table.grid.len() - 1)];
    // the table is monotonised, so confirm the bracket against H directly
    while conv.eval(lo)? >= 0.5 && lo > 0.0 {
        lo = (lo - (hi - lo)).max(0.0);
    }
    while conv.eval(hi)? < 0.5 {
        hi += hi - lo;
        if hi > 1e3 * table.x_max() {
            return Err(Error::TableTooShort { x_max: hi, h_max: conv.eval(hi)? });
        }
    }
    let mut h_lo = conv.eval(lo)?;
    let mut h_hi = conv.eval(hi)?;
    let mut iterations = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let h_mid = conv.eval(mid)?;
        if h_mid >= 0.5 {
            hi = mid;
            h_hi = h_mid;
        } else {
            lo = mid;
            h_lo = h_mid;
        }
        iterations += 1;
        if iterations > 500 {
            return Err(Error::NoConvergence {
                method: "a* bisection",
                iterations,
                detail: format!("bracket [{lo}, {hi}]"),
            });
        }
    }
    // H is smooth inside the final bracket, so interpolating beats either end
    let a_star = if h_hi > h_lo { (lo + (hi - lo) * (0.5 - h_lo) / (h_hi - h_lo)).clamp(lo, hi) } else { hi };
    Ok(OptimalRule {
        a_star,
        x0,
        regime: FitRegime::SmoothFit,
        expected_g,
        h_at_a_star: conv.eval(a_star)?,
        tol,
        conv: *conv,
        table,
    })
}

impl OptimalRule {
    pub fn psi_prime0(&self) -> f64 {
        self.conv.ev.psi_prime0()
    }

    pub fn method(&self) -> HMethod {
        self.conv.method
    }

    /// `V(x) = V_{a*}(x)`.
    pub fn value(&self, x: f64) -> Result<f64> {
        value_a(&self.conv, self.a_star, x)
    }

    /// `V'(x) = (1 - 2 H(x)) / psi'(0+)` below `a*`, zero above.
    ///
    /// At `x = a*` the left derivative is returned in the smooth-fit regime;
    /// under continuous fit only the derivative does not exist there.
    pub fn value_prime(&self, x: f64) -> Result<f64> {
        if x > self.a_star {
            return Ok(0.0);
        }
        if x == self.a_star && self.regime == FitRegime::ContinuousFitOnly {
            return Err(Error::Domain(format!("V has a kink at a* = {}; no derivative", self.a_star)));
        }
        Ok((1.0 - 2.0 * self.conv.eval(x)?) / self.psi_prime0())
    }

    /// Optimal `E|g - tau|` from 0: `V(0) + E(g)`.
    pub fn prediction_error(&self) -> Result<f64> {
        Ok(self.value(0.0)? + self.expected_g)
    }
}

/// `V_a(x) = E_x int_0^{tau_a} G(X_t) dt`: zero for `x >= a`, otherwise
/// `(2/psi') int_x^a H(y) dy - (a - x)/psi'`.
pub fn value_a(conv: &Convolution, a: f64, x: f64) -> Result<f64> {
    if x >= a {
        return Ok(0.0);
    }
    let psi1 = conv.ev.psi_prime0();
    // H vanishes on the negative half-line
    let lo = x.max(0.0);
    let integral = if a > lo { integrate_h(conv, lo, a)? } else { 0.0 };
    Ok(2.0 / psi1 * integral - (a - x) / psi1)
}

/// `int_lo^hi H(y) dy` for `0 <= lo <= hi`.
pub fn integrate_h(conv: &Convolution, lo: f64, hi: f64) -> Result<f64> {
    let failure = std::cell::RefCell::new(None);
    let q = integrate(
        |y| match conv.eval(y) {
            Ok(h) => h,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        lo,
        hi,
        VALUE_QUAD_TOL,
    )?;
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(q.value),
    }
}

/// `V_a` on a set of abscissae, sharing the integral of `H` between
/// neighbouring points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueCurve {
    pub a: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub v_prime: Vec<f64>,
}

pub fn value_curve(conv: &Convolution, a: f64, xs: &[f64]) -> Result<ValueCurve> {
    let psi1 = conv.ev.psi_prime0();
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&i, &j| xs[j].total_cmp(&xs[i]));

    // walk from the right: tail[i] = int_{max(x_i,0)}^a H
    let mut v = vec![0.0; xs.len()];
    let mut v_prime = vec![0.0; xs.len()];
    let mut acc = 0.0;
    let mut left = a.max(0.0);
    for &i in &order {
        let x = xs[i];
        if x >= a {
            continue;
        }
        let lo = x.max(0.0);
        if lo < left {
            acc += integrate_h(conv, lo, left)?;
            left = lo;
        }
        v[i] = 2.0 / psi1 * acc - (a - x) / psi1;
        v_prime[i] = (1.0 - 2.0 * conv.eval(x)?) / psi1;
    }
    Ok(ValueCurve { a, x: xs.to_vec(), v, v_prime })
}

/// Cross-check form of `V_a` through the Lebesgue self-convolution of `W`:
/// `2 psi' [int_0^a W(y) W(a-y) dy - int_0^x W(y) W(x-y) dy] - (a-x)/psi'`.
pub fn value_a_via_scale(ev: &ScaleEvaluator, a: f64, x: f64, tol: f64) -> Result<f64> {
    if x >= a {
        return Ok(0.0);
    }
    let psi1 = ev.psi_prime0();
    let ww = |z: f64| -> Result<f64> {
        if z <= 0.0 {
            return Ok(0.0);
        }
        Ok(integrate(|y| ev.w(y) * ev.w(z - y), 0.0, z, tol)?.value)
    };
    Ok(2.0 * psi1 * (ww(a)? - ww(x)?) - (a - x) / psi1)
}

/// `E_x(g)` for the last zero `g = sup { t : X_t <= 0 }`.
///
/// Available for every model when `x <= 0` (there `W^(q)(x)` does not
/// depend on `q`) and for Brownian motion everywhere.
pub fn expected_g(model: &LevyModel, x: f64) -> Result<f64> {
    let (p1, p2) = model.psi_derivatives();
    if x <= 0.0 {
        return Ok(p2 / (p1 * p1) - x / p1);
    }
    match *model {
        LevyModel::BrownianDrift { mu, sigma } => {
            let s2 = sigma * sigma;
            let b = (-2.0 * mu * x / s2).exp();
            Ok(b * (x / mu + s2 / (mu * mu)))
        }
        other => Err(Error::Unsupported(format!("E_x(g) for x > 0 needs d/dq W^(q), unavailable for {other}"))),
    }
}

/// `E(tau_a^+) = a / psi'(0+)` from 0.
pub fn expected_tau_plus(model: &LevyModel, a: f64) -> Result<f64> {
    if !(a >= 0.0) {
        return Err(Error::Domain(format!("expected_tau_plus needs a >= 0, got {a}")));
    }
    Ok(a / model.psi_derivatives().0)
}

/// `E_x(exp(-q g))` for Brownian motion with drift.
pub fn laplace_g_brownian(mu: f64, sigma: f64, q: f64, x: f64) -> Result<f64> {
    LevyModel::brownian(mu, sigma)?;
    if !(q >= 0.0) {
        return Err(Error::Domain(format!("Laplace transform needs q >= 0, got {q}")));
    }
    let s2 = sigma * sigma;
    let s = (mu * mu + 2.0 * q * s2).sqrt();
    let phi = (s - mu) / s2;
    let phi_prime = 1.0 / s;
    let w = w_q_brownian(mu, sigma, 0.0, x)?;
    let wq = w_q_brownian(mu, sigma, q, x)?;
    Ok((phi * x).exp() * phi_prime * mu + mu * (w - wq))
}

/// [`laplace_g_brownian`] dispatched on a model.
pub fn laplace_g(model: &LevyModel, q: f64, x: f64) -> Result<f64> {
    match *model {
        LevyModel::BrownianDrift { mu, sigma } => laplace_g_brownian(mu, sigma, q, x),
        other => Err(Error::Unsupported(format!("closed-form Laplace transform of g needs W^(q); unavailable for {other}"))),
    }
}
