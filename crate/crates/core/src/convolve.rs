//! `H = F * F`, the law of the sum of two independent copies of the
//! all-time infimum depth.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::LevyModel;
use crate::numerics::integrate;
use crate::scale::ScaleEvaluator;

/// Default absolute tolerance for the convolution integral.
pub const DEFAULT_QUAD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HMethod {
    AnalyticBM,
    AnalyticCL,
    NumericQuadrature,
}

/// Closed-form `H` for Brownian motion and Cramér–Lundberg.
pub fn h_analytic(model: &LevyModel, x: f64) -> Result<f64> {
    if x < 0.0 {
        return match model {
            LevyModel::BetaFamily { .. } => Err(unsupported(model)),
            _ => Ok(0.0),
        };
    }
    match *model {
        LevyModel::BrownianDrift { mu, sigma } => {
            let kx = 2.0 * mu / (sigma * sigma) * x;
            Ok(-(-kx).exp_m1() - kx * (-kx).exp())
        }
        LevyModel::CramerLundberg { mu, lambda, rho } => {
            let c = lambda / (mu * rho);
            let kx = (rho - lambda / mu) * x;
            let e = (-kx).exp();
            let one_minus_e = -(-kx).exp_m1();
            Ok((1.0 - c) * (1.0 - c) + 2.0 * c * (1.0 - c) * one_minus_e + c * c * (one_minus_e - kx * e))
        }
        LevyModel::BetaFamily { .. } => Err(unsupported(model)),
    }
}

fn unsupported(model: &LevyModel) -> Error {
    Error::Unsupported(format!("no closed-form H for {model}"))
}

/// `H(x) = psi'^2 W(x) W(0) + psi'^2 int_0^x W(y) W'(x - y) dy` by adaptive
/// quadrature, with absolute error at most `quad_tol`.
pub fn h_numeric(ev: &ScaleEvaluator, x: f64, quad_tol: f64) -> Result<f64> {
    if !(quad_tol > 0.0) {
        return Err(Error::Domain(format!("quad_tol must be positive, got {quad_tol}")));
    }
    if x < 0.0 {
        return Ok(0.0);
    }
    let p2 = ev.psi_prime0() * ev.psi_prime0();
    let atom = p2 * ev.w(x) * ev.w(0.0);
    if x == 0.0 {
        return Ok(atom);
    }
    // Integrate over u = x - y, the argument of W', so any blow-up of W' sits
    // at u = 0.
    let tol = quad_tol / p2;
    let integral = match ev.w_prime_singularity() {
        None => integrate(|u| ev.w(x - u) * ev.w_prime_right(u), 0.0, x, tol)?.value,
        Some(p) => {
            // W'(u) ~ C u^p near 0: with t = u^(p+1), du = u^(-p) dt / (p+1)
            // and the integrand W(x-u) W'(u) u^(-p) / (p+1) stays bounded.
            let half = 0.5 * x;
            let q = p + 1.0;
            let near = integrate(
                |t: f64| {
                    let u = t.max(0.0).powf(1.0 / q);
                    ev.w(x - u) * w_prime_scaled(ev, u, p) / q
                },
                0.0,
                half.powf(q),
                0.5 * tol,
            )?;
            let far = integrate(|u| ev.w(x - u) * ev.w_prime_right(u), half, x, 0.5 * tol)?;
            near.value + far.value
        }
    };
    Ok((atom + p2 * integral).clamp(0.0, 1.0))
}

/// `W'(u) u^(-p)`, finite at `u = 0`.
fn w_prime_scaled(ev: &ScaleEvaluator, u: f64, p: f64) -> f64 {
    match ev.model {
        LevyModel::BetaFamily { beta } => {
            // (beta-1) ((1 - e^-u)/u)^(beta-2) e^-u
            let ratio = if u == 0.0 { 1.0 } else { -(-u).exp_m1() / u };
            (beta - 1.0) * ratio.powf(beta - 2.0) * (-u).exp()
        }
        _ => ev.w_prime_right(u) * u.powf(-p),
    }
}

/// Pointwise evaluator for `H`, analytic where available.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Convolution {
    pub ev: ScaleEvaluator,
    pub method: HMethod,
    pub quad_tol: f64,
}

impl Convolution {
    /// Prefers the closed form when the family has one.
    pub fn new(ev: ScaleEvaluator, quad_tol: f64) -> Self {
        let method = match ev.model {
            LevyModel::BrownianDrift { .. } => HMethod::AnalyticBM,
            LevyModel::CramerLundberg { .. } => HMethod::AnalyticCL,
            LevyModel::BetaFamily { .. } => HMethod::NumericQuadrature,
        };
        Convolution { ev, method, quad_tol }
    }

    /// Always integrates numerically.
    pub fn numeric(ev: ScaleEvaluator, quad_tol: f64) -> Self {
        Convolution { ev, method: HMethod::NumericQuadrature, quad_tol }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        match self.method {
            HMethod::NumericQuadrature => h_numeric(&self.ev, x, self.quad_tol),
            _ => h_analytic(&self.ev.model, x),
        }
    }
}

/// `H` tabulated on a uniform grid over `[0, x_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionTable {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub method: HMethod,
    pub quad_tol: f64,
}

/// Tabulates `H` at `n_points` equispaced nodes on `[0, x_max]`.
pub fn build_table(ev: &ScaleEvaluator, x_max: f64, n_points: usize, quad_tol: f64) -> Result<ConvolutionTable> {
    build_table_with(&Convolution::new(*ev, quad_tol), x_max, n_points)
}

pub fn build_table_with(conv: &Convolution, x_max: f64, n_points: usize) -> Result<ConvolutionTable> {
    if !(x_max > 0.0) || n_points < 2 {
        return Err(Error::Domain(format!("table needs x_max > 0 and n >= 2, got {x_max}, {n_points}")));
    }
    let step = x_max / (n_points - 1) as f64;
    let grid: Vec<f64> = (0..n_points)
        .map(|i| if i + 1 == n_points { x_max } else { i as f64 * step })
        .collect();
    let raw: Vec<f64> = grid.par_iter().map(|&x| conv.eval(x)).collect::<Result<_>>()?;
    // quadrature noise can wiggle H by up to quad_tol; keep the table monotone
    let mut values = Vec::with_capacity(raw.len());
    let mut running = 0.0_f64;
    for v in raw {
        running = running.max(v.clamp(0.0, 1.0));
        values.push(running);
    }
    Ok(ConvolutionTable { grid, values, method: conv.method, quad_tol: conv.quad_tol })
}

impl ConvolutionTable {
    pub fn x_max(&self) -> f64 {
        *self.grid.last().expect("table has at least two nodes")
    }

    /// Monotone piecewise-linear interpolation; 0 left of the grid and the
    /// last node value right of it.
    pub fn interpolate(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        if x >= self.x_max() {
            return *self.values.last().unwrap();
        }
        let i = self.grid.partition_point(|&g| g <= x).saturating_sub(1);
        let (x0, x1) = (self.grid[i], self.grid[i + 1]);
        let (h0, h1) = (self.values[i], self.values[i + 1]);
        h0 + (h1 - h0) * (x - x0) / (x1 - x0)
    }

    /// First node with `H >= level`, if any.
    pub fn first_at_least(&self, level: f64) -> Option<usize> {
        self.values.iter().position(|&h| h >= level)
    }
}
