//! Scale function `W`, the infimum law `F = psi'(0+) W` and the gain
//! `G = 2F - 1`, in closed form for each supported family.

use crate::error::{Error, Result};
use crate::model::{LevyModel, ModelProfile};
use crate::numerics::bisect_increasing;

/// Closed-form scale quantities for one model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleEvaluator {
    pub model: LevyModel,
    pub profile: ModelProfile,
}

impl ScaleEvaluator {
    pub fn new(model: LevyModel) -> Result<Self> {
        let profile = model.profile()?;
        Ok(ScaleEvaluator { model, profile })
    }

    pub fn psi_prime0(&self) -> f64 {
        self.profile.psi_prime0
    }

    /// `W(x)`; zero on the negative half-line, right-continuous at 0.
    pub fn w(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        match self.model {
            LevyModel::BrownianDrift { mu, sigma } => {
                let k = 2.0 * mu / (sigma * sigma);
                -(-k * x).exp_m1() / mu
            }
            LevyModel::CramerLundberg { mu, lambda, rho } => {
                let (c, kappa) = cl_constants(mu, lambda, rho);
                (1.0 - c * (-kappa * x).exp()) / (mu - lambda / rho)
            }
            LevyModel::BetaFamily { beta } => (-(-x).exp_m1()).powf(beta - 1.0),
        }
    }

    /// `W'(x)` for `x > 0`.
    pub fn w_prime(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::Domain(format!("W' is only defined on x > 0, got {x}")));
        }
        Ok(self.w_prime_right(x))
    }

    /// `1/psi'(0+) - W(x)` for `x >= 0`, computed without cancellation.
    pub fn w_complement(&self, x: f64) -> f64 {
        let x = x.max(0.0);
        match self.model {
            LevyModel::BrownianDrift { mu, sigma } => (-2.0 * mu / (sigma * sigma) * x).exp() / mu,
            LevyModel::CramerLundberg { mu, lambda, rho } => {
                let (c, kappa) = cl_constants(mu, lambda, rho);
                c * (-kappa * x).exp() / (mu - lambda / rho)
            }
            LevyModel::BetaFamily { beta } => -((beta - 1.0) * (-(-x).exp()).ln_1p()).exp_m1(),
        }
    }

    /// Exponential rate at which `1 - F(x)` decays.
    pub fn tail_decay_rate(&self) -> f64 {
        match self.model {
            LevyModel::BrownianDrift { mu, sigma } => 2.0 * mu / (sigma * sigma),
            LevyModel::CramerLundberg { mu, lambda, rho } => cl_constants(mu, lambda, rho).1,
            LevyModel::BetaFamily { .. } => 1.0,
        }
    }

    /// Right derivative of `W`; finite at 0 except for the beta family with
    /// `beta < 2`, where it blows up like `(beta - 1) x^(beta - 2)`.
    pub fn w_prime_right(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        match self.model {
            LevyModel::BrownianDrift { mu, sigma } => {
                let k = 2.0 * mu / (sigma * sigma);
                k / mu * (-k * x).exp()
            }
            LevyModel::CramerLundberg { mu, lambda, rho } => {
                let (c, kappa) = cl_constants(mu, lambda, rho);
                c * kappa * (-kappa * x).exp() / (mu - lambda / rho)
            }
            LevyModel::BetaFamily { beta } => {
                let e = (-x).exp();
                (beta - 1.0) * (-(-x).exp_m1()).powf(beta - 2.0) * e
            }
        }
    }

    /// Exponent `p` such that `W'(u) ~ C u^p` as `u -> 0+` when `p < 0`.
    pub fn w_prime_singularity(&self) -> Option<f64> {
        match self.model {
            LevyModel::BetaFamily { beta } if beta < 2.0 => Some(beta - 2.0),
            _ => None,
        }
    }

    /// `F(x) = P(-inf_t X_t <= x)`, including the atom at zero for finite
    /// variation.
    pub fn f(&self, x: f64) -> f64 {
        (self.profile.psi_prime0 * self.w(x)).min(1.0)
    }

    /// Left limit `F(x-)`.
    pub fn f_left(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            self.f(x)
        }
    }

    pub fn g(&self, x: f64) -> f64 {
        2.0 * self.f(x) - 1.0
    }

    /// `int_0^x G(y) dy` in closed form (Brownian and Cramér–Lundberg only).
    pub fn g_primitive(&self, x: f64) -> Option<f64> {
        if x < 0.0 {
            return Some(-x);
        }
        match self.model {
            LevyModel::BrownianDrift { mu, sigma } => {
                let k = 2.0 * mu / (sigma * sigma);
                Some(x + 2.0 * (-k * x).exp_m1() / k)
            }
            LevyModel::CramerLundberg { mu, lambda, rho } => {
                let (c, kappa) = cl_constants(mu, lambda, rho);
                Some(x + 2.0 * c * (-kappa * x).exp_m1() / kappa)
            }
            LevyModel::BetaFamily { .. } => None,
        }
    }

    /// Median of `F`: `x0 = inf { x : G(x) >= 0 }`.
    pub fn x0(&self) -> f64 {
        match self.model {
            LevyModel::BrownianDrift { mu, sigma } => std::f64::consts::LN_2 * sigma * sigma / (2.0 * mu),
            LevyModel::CramerLundberg { mu, lambda, rho } => {
                let (c, kappa) = cl_constants(mu, lambda, rho);
                if 1.0 - c >= 0.5 {
                    0.0
                } else {
                    (2.0 * c).ln() / kappa
                }
            }
            LevyModel::BetaFamily { .. } => self.quantile(0.5),
        }
    }

    /// Smallest `x >= 0` with `F(x) >= p`, for `p` in `[0, 1)`.
    pub fn quantile(&self, p: f64) -> f64 {
        debug_assert!((0.0..1.0).contains(&p));
        if self.f(0.0) >= p {
            return 0.0;
        }
        match self.model {
            LevyModel::BrownianDrift { mu, sigma } => -(-p).ln_1p() * sigma * sigma / (2.0 * mu),
            LevyModel::CramerLundberg { mu, lambda, rho } => {
                let (c, kappa) = cl_constants(mu, lambda, rho);
                (c / (1.0 - p)).ln() / kappa
            }
            LevyModel::BetaFamily { .. } => {
                let mut hi = 1.0;
                while self.f(hi) < p {
                    hi *= 2.0;
                }
                bisect_increasing(|x| self.f(x) - p, 0.0, hi, 1e-15 * hi.max(1.0))
                    .expect("F is continuous on (0, inf) and the bracket straddles p")
            }
        }
    }

    /// Level `b` with `P_b(tau_0^- < inf) = 1 - F(b) <= tail_eps`.
    pub fn return_barrier(&self, tail_eps: f64) -> f64 {
        let mut b = self.quantile(1.0 - tail_eps);
        // 1 - tail_eps is rounded, so step past any last-ulp shortfall
        while self.f(b) < 1.0 - tail_eps {
            b = b * (1.0 + 1e-12) + 1e-300;
        }
        b
    }
}

/// `(lambda/(mu rho), rho - lambda/mu)`.
fn cl_constants(mu: f64, lambda: f64, rho: f64) -> (f64, f64) {
    (lambda / (mu * rho), rho - lambda / mu)
}

/// q-scale function of Brownian motion with drift.
pub fn w_q_brownian(mu: f64, sigma: f64, q: f64, x: f64) -> Result<f64> {
    LevyModel::brownian(mu, sigma)?;
    if !(q >= 0.0) {
        return Err(Error::Domain(format!("W^(q) needs q >= 0, got {q}")));
    }
    if x < 0.0 {
        return Ok(0.0);
    }
    let s2 = sigma * sigma;
    let s = (mu * mu + 2.0 * q * s2).sqrt();
    if q == 0.0 {
        let k = 2.0 * mu / s2;
        return Ok(-(-k * x).exp_m1() / mu);
    }
    Ok((((s - mu) * x / s2).exp() - (-(s + mu) * x / s2).exp()) / s)
}

/// [`w_q_brownian`] for an arbitrary model, failing for anything but
/// Brownian motion with drift.
pub fn w_q(model: &LevyModel, q: f64, x: f64) -> Result<f64> {
    match *model {
        LevyModel::BrownianDrift { mu, sigma } => w_q_brownian(mu, sigma, q, x),
        other => Err(Error::Unsupported(format!("closed-form W^(q) is only available for Brownian motion, not {other}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn bm() -> ScaleEvaluator {
        ScaleEvaluator::new(LevyModel::brownian(1.0, 1.0).unwrap()).unwrap()
    }
    fn cl() -> ScaleEvaluator {
        ScaleEvaluator::new(LevyModel::cramer_lundberg(2.0, 1.0, 1.0).unwrap()).unwrap()
    }
    fn beta(b: f64) -> ScaleEvaluator {
        ScaleEvaluator::new(LevyModel::beta_family(b).unwrap()).unwrap()
    }
    fn all() -> Vec<ScaleEvaluator> {
        vec![
            bm(),
            ScaleEvaluator::new(LevyModel::brownian(0.5, 1.5).unwrap()).unwrap(),
            cl(),
            ScaleEvaluator::new(LevyModel::cramer_lundberg(4.0, 1.0, 1.0).unwrap()).unwrap(),
            ScaleEvaluator::new(LevyModel::cramer_lundberg(1.5, 2.0, 3.0).unwrap()).unwrap(),
            beta(1.3),
            beta(1.5),
            beta(2.0),
        ]
    }

    #[test]
    fn w_examples() {
        assert!((bm().w(1.0) - (1.0 - (-2.0f64).exp())).abs() < 1e-15);
        assert!((bm().w(1.0) - 0.864_664_716_763_387_3).abs() < 1e-15);
        for ev in all() {
            assert_eq!(ev.w(-0.5), 0.0);
        }
        assert!((beta(2.0).w(LN_2) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn w_prime_examples() {
        assert!((bm().w_prime(1.0).unwrap() - 2.0 * (-2.0f64).exp()).abs() < 1e-15);
        // CL(2,1,1): c = 1/2, kappa = 1/2, psi' = 1
        let expected = 0.5 * 0.5 * (-0.25f64).exp();
        assert!((cl().w_prime(0.5).unwrap() - expected).abs() < 1e-15);
        assert!((beta(2.0).w_prime(1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert!(bm().w_prime(0.0).is_err());
        assert!(bm().w_prime(-1.0).is_err());
    }

    #[test]
    fn w_prime_matches_central_differences() {
        let h = 1e-5;
        for ev in all() {
            for i in 0..=99 {
                let x = 0.1 + i as f64 * 0.1;
                // differencing the complement avoids cancellation once W is near its limit
                let fd = (ev.w_complement(x - h) - ev.w_complement(x + h)) / (2.0 * h);
                let an = ev.w_prime(x).unwrap();
                assert!((fd - an).abs() <= 1e-5 * an.abs().max(1e-12), "{:?} x={x}: {fd} vs {an}", ev.model);
            }
        }
    }

    #[test]
    fn complement_is_consistent() {
        for ev in all() {
            for x in [0.0, 0.01, 0.5, 2.0, 7.0] {
                let direct = 1.0 / ev.psi_prime0() - ev.w(x);
                assert!((ev.w_complement(x) - direct).abs() < 1e-14, "{:?} {x}", ev.model);
            }
        }
    }

    #[test]
    fn w_limit_is_inverse_drift() {
        for ev in all() {
            assert!((ev.w(60.0) - 1.0 / ev.psi_prime0()).abs() < 1e-9, "{:?}", ev.model);
        }
    }

    #[test]
    fn f_and_g_examples() {
        let b = bm();
        for x in [0.0, 0.3, 1.0, 4.0] {
            assert!((b.f(x) - (1.0 - (-2.0 * x).exp())).abs() < 1e-15);
        }
        for ev in all() {
            assert_eq!(ev.g(-0.1), -1.0);
            assert_eq!(ev.g(-10.0), -1.0);
        }
        assert_eq!(cl().f(0.0), 0.5);
        assert_eq!(cl().g(0.0), 0.0);
        assert_eq!(cl().f_left(0.0), 0.0);
    }

    #[test]
    fn f_is_a_distribution_function() {
        for ev in all() {
            let n = 10_000;
            let mut prev = -1.0;
            for i in 0..=n {
                let x = -1.0 + 21.0 * i as f64 / n as f64;
                let f = ev.f(x);
                assert!((0.0..=1.0).contains(&f));
                assert!(f >= prev);
                let g = ev.g(x);
                assert!((g - (2.0 * f - 1.0)).abs() <= 1e-15);
                prev = f;
            }
            // 20 decay lengths out the tail is negligible
            let scale = 1.0 / ev.tail_decay_rate();
            assert!(1.0 - ev.f(20.0 * scale) < 1e-6, "{:?}", ev.model);
        }
    }

    #[test]
    fn x0_examples() {
        assert!((bm().x0() - LN_2 / 2.0).abs() < 1e-15);
        assert_eq!(cl().x0(), 0.0);
        assert!((beta(2.0).x0() - LN_2).abs() < 1e-12);
        // beta closed form -ln(1 - 2^{-1/(beta-1)})
        for b in [1.2, 1.5, 1.8] {
            let exact = -(1.0 - 2f64.powf(-1.0 / (b - 1.0))).ln();
            assert!((beta(b).x0() - exact).abs() < 1e-12);
        }
        for ev in all() {
            let x0 = ev.x0();
            assert!(x0 >= 0.0);
            assert!(ev.g(x0) >= -1e-12);
            if x0 > 0.0 {
                assert!(ev.g(x0 * (1.0 - 1e-6)) < 0.0);
            }
        }
    }

    #[test]
    fn g_primitive_matches_quadrature() {
        for ev in [bm(), cl()] {
            for x in [-2.0, -0.1, 0.0, 0.2, 1.0, 3.5] {
                let q = crate::numerics::integrate(|y| ev.g(y), 0.0_f64.min(x), 0.0_f64.max(x), 1e-12)
                    .unwrap()
                    .value;
                let signed = if x < 0.0 { -q } else { q };
                assert!((ev.g_primitive(x).unwrap() - signed).abs() < 1e-10, "{x}");
            }
        }
        assert!(beta(1.5).g_primitive(1.0).is_none());
    }

    #[test]
    fn w_q_examples() {
        assert!((w_q_brownian(1.0, 1.0, 0.0, 1.0).unwrap() - bm().w(1.0)).abs() < 1e-15);
        assert_eq!(w_q_brownian(1.0, 1.0, 0.0, -1.0).unwrap(), 0.0);
        let e = std::f64::consts::E;
        let expected = (e - (-3.0f64).exp()) / 2.0;
        assert!((w_q_brownian(1.0, 1.0, 1.5, 1.0).unwrap() - expected).abs() < 1e-14);
        // continuity in q at 0
        for x in [0.1, 1.0, 5.0] {
            let tiny = w_q_brownian(1.3, 0.7, 1e-12, x).unwrap();
            assert!((tiny - w_q_brownian(1.3, 0.7, 0.0, x).unwrap()).abs() < 1e-10);
        }
        assert!(matches!(w_q(&cl().model, 0.5, 1.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn return_barrier_bounds_tail() {
        for ev in all() {
            for eps in [1e-2, 1e-4, 1e-6] {
                let b = ev.return_barrier(eps);
                assert!(1.0 - ev.f(b) <= eps * (1.0 + 1e-9), "{:?} eps={eps}", ev.model);
            }
        }
    }
}
