//! Supported spectrally negative Lévy families and their Laplace exponents.

use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{digamma, ln_gamma};

use crate::error::{Error, Result};
use crate::numerics::newton_bracketed;

/// Euler–Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Iteration cap for the inverse of the Laplace exponent.
pub const PHI_MAX_ITER: usize = 200;

/// Default residual tolerance for [`LevyModel::phi`].
pub const PHI_TOL: f64 = 1e-13;

/// A spectrally negative Lévy process drifting to `+inf`.
///
/// Build through the validating constructors or call [`LevyModel::validate`]
/// after deserialising.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum LevyModel {
    /// `X_t = sigma B_t + mu t`.
    #[serde(rename = "bm")]
    BrownianDrift { mu: f64, sigma: f64 },
    /// `X_t = mu t - sum_{i <= N_t} xi_i`, `N` Poisson(`lambda`), `xi` Exp(`rho`).
    #[serde(rename = "cl")]
    CramerLundberg { mu: f64, lambda: f64, rho: f64 },
    /// Laplace exponent `Gamma(theta + beta) / (Gamma(theta) Gamma(beta))`.
    #[serde(rename = "beta")]
    BetaFamily { beta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variation {
    FiniteVariation,
    InfiniteVariation,
}

/// Derived constants of a model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelProfile {
    pub psi_prime0: f64,
    pub psi_double_prime0: f64,
    pub variation: Variation,
    /// Drift coefficient; only defined for finite variation.
    pub d: Option<f64>,
    /// `F(0) = psi'(0+) W(0)`.
    pub f0: f64,
}

impl LevyModel {
    pub fn brownian(mu: f64, sigma: f64) -> Result<Self> {
        let m = LevyModel::BrownianDrift { mu, sigma };
        m.validate()?;
        Ok(m)
    }

    pub fn cramer_lundberg(mu: f64, lambda: f64, rho: f64) -> Result<Self> {
        let m = LevyModel::CramerLundberg { mu, lambda, rho };
        m.validate()?;
        Ok(m)
    }

    pub fn beta_family(beta: f64) -> Result<Self> {
        let m = LevyModel::BetaFamily { beta };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            LevyModel::BrownianDrift { mu, sigma } => {
                if !(mu.is_finite() && mu > 0.0) {
                    return Err(Error::Validation(format!("Brownian drift needs mu > 0, got {mu}")));
                }
                if !(sigma.is_finite() && sigma > 0.0) {
                    return Err(Error::Validation(format!("Brownian drift needs sigma > 0, got {sigma}")));
                }
            }
            LevyModel::CramerLundberg { mu, lambda, rho } => {
                for (name, v) in [("mu", mu), ("lambda", lambda), ("rho", rho)] {
                    if !(v.is_finite() && v > 0.0) {
                        return Err(Error::Validation(format!("Cramér–Lundberg needs {name} > 0, got {v}")));
                    }
                }
                let load = lambda / (rho * mu);
                if !(load < 1.0) {
                    return Err(Error::Validation(format!(
                        "Cramér–Lundberg must drift to +inf: lambda/(rho mu) = {load} >= 1"
                    )));
                }
            }
            LevyModel::BetaFamily { beta } => {
                if !(beta > 1.0 && beta <= 2.0) {
                    return Err(Error::Validation(format!("beta family needs 1 < beta <= 2, got {beta}")));
                }
            }
        }
        Ok(())
    }

    pub fn variation(&self) -> Variation {
        match self {
            LevyModel::CramerLundberg { .. } => Variation::FiniteVariation,
            _ => Variation::InfiniteVariation,
        }
    }

    /// Short family tag used in file names and reports.
    pub fn family(&self) -> &'static str {
        match self {
            LevyModel::BrownianDrift { .. } => "bm",
            LevyModel::CramerLundberg { .. } => "cl",
            LevyModel::BetaFamily { .. } => "beta",
        }
    }

    /// Laplace exponent `psi(theta) = log E exp(theta X_1)`.
    pub fn psi(&self, theta: f64) -> Result<f64> {
        check_theta(theta)?;
        Ok(self.psi_unchecked(theta))
    }

    fn psi_unchecked(&self, theta: f64) -> f64 {
        match *self {
            LevyModel::BrownianDrift { mu, sigma } => 0.5 * sigma * sigma * theta * theta + mu * theta,
            LevyModel::CramerLundberg { mu, lambda, rho } => mu * theta - lambda * theta / (rho + theta),
            LevyModel::BetaFamily { beta } => theta * beta_ratio(theta, beta),
        }
    }

    /// First derivative `psi'(theta)`, right derivative at zero.
    pub fn psi_prime(&self, theta: f64) -> Result<f64> {
        check_theta(theta)?;
        Ok(self.psi_prime_unchecked(theta))
    }

    fn psi_prime_unchecked(&self, theta: f64) -> f64 {
        match *self {
            LevyModel::BrownianDrift { mu, sigma } => sigma * sigma * theta + mu,
            LevyModel::CramerLundberg { mu, lambda, rho } => mu - lambda * rho / ((rho + theta) * (rho + theta)),
            LevyModel::BetaFamily { beta } => {
                // psi = theta h, h' = h (digamma(theta + beta) - digamma(theta + 1))
                let h = beta_ratio(theta, beta);
                h + theta * h * (digamma(theta + beta) - digamma(theta + 1.0))
            }
        }
    }

    /// `(psi'(0+), psi''(0+))`.
    pub fn psi_derivatives(&self) -> (f64, f64) {
        match *self {
            LevyModel::BrownianDrift { mu, sigma } => (mu, sigma * sigma),
            LevyModel::CramerLundberg { mu, lambda, rho } => (mu - lambda / rho, 2.0 * lambda / (rho * rho)),
            // h(0) = 1 and psi''(0) = 2 h'(0) = 2 (digamma(beta) - digamma(1))
            LevyModel::BetaFamily { beta } => (1.0, 2.0 * (digamma(beta) + EULER_GAMMA)),
        }
    }

    /// Right inverse `Phi(q) = sup { theta >= 0 : psi(theta) = q }`, with
    /// `|psi(Phi(q)) - q| <= tol`.
    pub fn phi(&self, q: f64, tol: f64) -> Result<f64> {
        if !(q >= 0.0) || !q.is_finite() {
            return Err(Error::Domain(format!("Phi needs q >= 0, got {q}")));
        }
        if !(tol > 0.0) {
            return Err(Error::Domain(format!("Phi needs tol > 0, got {tol}")));
        }
        if q == 0.0 {
            return Ok(0.0);
        }
        let mut hi = 1.0;
        while self.psi_unchecked(hi) <= q {
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::NoConvergence {
                    method: "Phi bracketing",
                    iterations: 0,
                    detail: format!("psi stays below q = {q}"),
                });
            }
        }
        newton_bracketed(
            |t| self.psi_unchecked(t) - q,
            |t| self.psi_prime_unchecked(t),
            0.0,
            hi,
            tol,
            PHI_MAX_ITER,
        )
    }

    /// `(Phi'(0), Phi''(0)) = (1/psi'(0+), -psi''(0+)/psi'(0+)^3)`.
    pub fn phi_derivs0(&self) -> (f64, f64) {
        let (p1, p2) = self.psi_derivatives();
        (1.0 / p1, -p2 / (p1 * p1 * p1))
    }

    pub fn profile(&self) -> Result<ModelProfile> {
        self.validate()?;
        let (psi_prime0, psi_double_prime0) = self.psi_derivatives();
        let variation = self.variation();
        let d = match *self {
            LevyModel::CramerLundberg { mu, .. } => Some(mu),
            _ => None,
        };
        let f0 = d.map_or(0.0, |d| psi_prime0 / d);
        Ok(ModelProfile { psi_prime0, psi_double_prime0, variation, d, f0 })
    }
}

impl fmt::Display for LevyModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LevyModel::BrownianDrift { mu, sigma } => write!(f, "BM(mu={mu}, sigma={sigma})"),
            LevyModel::CramerLundberg { mu, lambda, rho } => write!(f, "CL(mu={mu}, lambda={lambda}, rho={rho})"),
            LevyModel::BetaFamily { beta } => write!(f, "Beta(beta={beta})"),
        }
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta >= 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("Laplace exponent needs theta >= 0, got {theta}")))
    }
}

/// `Gamma(theta + beta) / (Gamma(theta + 1) Gamma(beta))`.
fn beta_ratio(theta: f64, beta: f64) -> f64 {
    (ln_gamma(theta + beta) - ln_gamma(theta + 1.0) - ln_gamma(beta)).exp()
}
