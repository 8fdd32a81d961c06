//! Path simulation of the supported models and Monte Carlo estimators of the
//! last zero, first-passage times, the all-time infimum and the running
//! integral of `G`.
//!
//! Path `k` draws from its own ChaCha8 stream (`base_seed`, stream `k`), so it
//! does not depend on `n_paths` or on how paths are spread over threads.
//! Chunks of paths are reduced serially and merged in index order, which makes
//! every report bit-reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::model::LevyModel;
use crate::numerics::{integrate, Moments};
use crate::scale::ScaleEvaluator;

/// Upper bound on Euler steps or jumps per path.
pub const MAX_STEPS: u64 = 1_000_000_000;

const CHUNK: usize = 256;

/// Bridge extrema are sampled only when a step ends within this many
/// standard deviations of a level that matters.
const BRIDGE_WINDOW_SDS: f64 = 8.0;

/// Distance, in standard deviations of the step, kept between a long
/// Gaussian step and the nearest level.
const FAR_STEP_SDS: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McConfig {
    pub n_paths: usize,
    pub base_seed: u64,
    /// Euler step for Brownian and beta-family paths.
    pub dt: f64,
    /// Allowed probability of returning below 0 after the barrier.
    pub tail_eps: f64,
    /// Small-jump cutoff for the beta family.
    pub beta_eps: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig { n_paths: 100_000, base_seed: 20_240_917, dt: 1e-3, tail_eps: 1e-5, beta_eps: 1e-3 }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::Validation("n_paths must be positive".into()));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Validation(format!("dt must be positive and finite, got {}", self.dt)));
        }
        if !(self.tail_eps > 0.0 && self.tail_eps <= 0.01) {
            return Err(Error::Validation(format!("tail_eps must lie in (0, 0.01], got {}", self.tail_eps)));
        }
        if !(self.beta_eps > 0.0 && self.beta_eps <= 0.1) {
            return Err(Error::Validation(format!("beta_eps must lie in (0, 0.1], got {}", self.beta_eps)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "quantity")]
pub enum Quantity {
    MeanAbsError { a: f64 },
    ExpectedG { x: f64 },
    ExpectedTau { a: f64, x: f64 },
    ValueVa { a: f64, x: f64 },
    InfimumSample,
    LaplaceG { q: f64, x: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    #[serde(flatten)]
    pub quantity: Quantity,
    pub estimate: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub seed_used: u64,
}

impl McReport {
    fn from_moments(quantity: Quantity, m: &Moments, cfg: &McConfig) -> Self {
        McReport { quantity, estimate: m.mean, std_error: m.std_error(), n_paths: m.n as usize, seed_used: cfg.base_seed }
    }

    /// `|estimate - target| / std_error`; infinite when the error is zero and
    /// the estimate is off.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.estimate - target).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }
}

/// What one simulated path yields.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEvents {
    /// Last time at or below 0 (0 if the path never gets there).
    pub g: f64,
    /// `-inf_t X_t`, the start included.
    pub infimum: f64,
    /// `tau_a^+` per requested level.
    pub tau: Vec<f64>,
    /// `int_0^{tau_a^+} G(X_s) ds` per requested level; empty unless asked.
    pub g_integral: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopRule {
    /// Run until the path sits above the return barrier, which fixes `g`.
    ReturnBarrier,
    /// Run until the path is far enough above its running minimum that a new
    /// minimum has probability at most `tail_eps`; `g` is not tracked.
    InfimumSettled,
}

#[derive(Debug, Clone, Copy)]
struct JumpPart {
    rate: f64,
    t_max: f64,
    inv_beta: f64,
}

impl JumpPart {
    /// Jump size below `-eps`: under `t = u/(1-u)`, `u = e^y` the measure is
    /// proportional to `t^(beta-1) dt` on `(0, t_max)`.
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        let u: f64 = 1.0 - rng.random::<f64>();
        let t = self.t_max * u.powf(self.inv_beta);
        -(1.0 / t).ln_1p()
    }
}

#[derive(Debug, Clone, Copy)]
enum Dynamics {
    /// Drift plus Brownian part plus optional compound Poisson jumps, on a grid.
    Grid { drift: f64, sigma: f64, jumps: Option<JumpPart> },
    /// Exact Cramér–Lundberg: linear drift between exponential claims.
    Exact { mu: f64, lambda: f64, rho: f64 },
}

/// Constants of the beta-family approximation at cutoff `eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaApproximation {
    /// Intensity of jumps below `-eps`.
    pub jump_rate: f64,
    /// Drift after compensating the large jumps.
    pub drift: f64,
    /// Variance rate of the Gaussian standing in for jumps in `(-eps, 0)`.
    pub small_jump_variance: f64,
}

/// Lévy density of the beta family at `y < 0`.
fn beta_density(beta: f64, norm: f64, s: f64) -> f64 {
    // s = -y > 0
    norm * (-beta * s).exp() / (-(-s).exp_m1()).powf(beta + 1.0)
}

pub fn beta_approximation(beta: f64, eps: f64) -> Result<BetaApproximation> {
    if !(beta > 1.0 && beta < 2.0) {
        return Err(Error::Unsupported(format!("jump approximation needs beta in (1, 2), got {beta}")));
    }
    let norm = 1.0 / (gamma(beta) * gamma(-beta));
    let t_max = 1.0 / eps.exp_m1();
    let jump_rate = norm * t_max.powf(beta) / beta;

    // int_{y < -eps} y Pi(dy) with y = -e^v; the density is negligible past |y| = 60
    let big = integrate(
        |v| {
            let s = v.exp();
            -s * beta_density(beta, norm, s) * s
        },
        eps.ln(),
        60f64.ln(),
        1e-10,
    )?
    .value;

    // int_{(-eps, 0)} y^2 Pi(dy) with -y = r^p, p = 1/(2 - beta), which
    // removes the r^(1-beta) singularity
    let p = 1.0 / (2.0 - beta);
    let small = integrate(
        |r| {
            if r <= 0.0 {
                return p * norm;
            }
            let s = r.powf(p);
            p * norm * (-beta * s).exp() * (s / -(-s).exp_m1()).powf(beta + 1.0)
        },
        0.0,
        eps.powf(2.0 - beta),
        1e-12,
    )?
    .value;

    Ok(BetaApproximation { jump_rate, drift: 1.0 - big, small_jump_variance: small })
}

/// Simulates paths of one model started from a fixed point.
#[derive(Debug, Clone)]
pub struct PathSampler {
    ev: ScaleEvaluator,
    dynamics: Dynamics,
    cfg: McConfig,
    x: f64,
    levels: Vec<f64>,
    integrate_g: bool,
    stop: StopRule,
    barrier: f64,
}

impl PathSampler {
    /// `levels` are the thresholds `a` whose passage times are recorded.
    pub fn new(
        model: LevyModel,
        cfg: McConfig,
        x: f64,
        levels: &[f64],
        integrate_g: bool,
        stop: StopRule,
    ) -> Result<Self> {
        cfg.validate()?;
        let ev = ScaleEvaluator::new(model)?;
        if !x.is_finite() {
            return Err(Error::Validation(format!("start point must be finite, got {x}")));
        }
        if let Some(a) = levels.iter().find(|a| !a.is_finite()) {
            return Err(Error::Validation(format!("thresholds must be finite, got {a}")));
        }
        let dynamics = match model {
            LevyModel::BrownianDrift { mu, sigma } => Dynamics::Grid { drift: mu, sigma, jumps: None },
            LevyModel::CramerLundberg { mu, lambda, rho } => Dynamics::Exact { mu, lambda, rho },
            LevyModel::BetaFamily { beta } if beta >= 2.0 => {
                Dynamics::Grid { drift: 1.0, sigma: std::f64::consts::SQRT_2, jumps: None }
            }
            LevyModel::BetaFamily { beta } => {
                let ap = beta_approximation(beta, cfg.beta_eps)?;
                Dynamics::Grid {
                    drift: ap.drift,
                    sigma: ap.small_jump_variance.sqrt(),
                    jumps: Some(JumpPart { rate: ap.jump_rate, t_max: 1.0 / cfg.beta_eps.exp_m1(), inv_beta: 1.0 / beta }),
                }
            }
        };
        let settle = ev.return_barrier(cfg.tail_eps);
        if ev.f(settle) < 1.0 - cfg.tail_eps {
            return Err(Error::Simulation(format!(
                "return barrier {settle} leaves F = {} below 1 - tail_eps",
                ev.f(settle)
            )));
        }
        let barrier = match stop {
            StopRule::ReturnBarrier => levels.iter().fold(settle.max(x), |b, &a| b.max(a)),
            StopRule::InfimumSettled => settle,
        };
        let mut levels = levels.to_vec();
        levels.sort_by(f64::total_cmp);
        Ok(PathSampler { ev, dynamics, cfg, x, levels, integrate_g, stop, barrier })
    }

    /// Sorted thresholds.
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Level at which a path is stopped (relative to the running minimum for
    /// [`StopRule::InfimumSettled`]).
    pub fn barrier(&self) -> f64 {
        self.barrier
    }

    pub fn sample(&self, path_index: u64) -> Result<PathEvents> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.base_seed);
        rng.set_stream(path_index);
        match self.dynamics {
            Dynamics::Grid { drift, sigma, jumps } => self.sample_grid(&mut rng, drift, sigma, jumps),
            Dynamics::Exact { mu, lambda, rho } => self.sample_exact(&mut rng, mu, lambda, rho),
        }
    }

    fn stop_reached(&self, x: f64, run_min: f64, all_passed: bool) -> bool {
        match self.stop {
            StopRule::ReturnBarrier => all_passed && x >= self.barrier,
            StopRule::InfimumSettled => x - run_min >= self.barrier,
        }
    }

    fn start(&self) -> (Vec<f64>, Vec<f64>, usize) {
        // levels at or below the start are passed at time 0
        let passed = self.levels.iter().take_while(|&&a| a <= self.x).count();
        let tau = vec![0.0; self.levels.len()];
        let integral = if self.integrate_g { vec![0.0; self.levels.len()] } else { Vec::new() };
        (tau, integral, passed)
    }

    fn sample_grid(&self, rng: &mut ChaCha8Rng, drift: f64, sigma: f64, jumps: Option<JumpPart>) -> Result<PathEvents> {
        let dt = self.cfg.dt;
        let track_g = self.stop == StopRule::ReturnBarrier;

        let (mut tau, mut integral, mut next) = self.start();
        let mut x = self.x;
        let mut t = 0.0;
        let mut run_min = x;
        let mut g: f64 = 0.0;
        let mut acc = 0.0;
        let mut g_left = if self.integrate_g { self.ev.g(x) } else { 0.0 };
        let mut next_jump = match jumps {
            Some(j) => rng.sample::<f64, _>(Exp1) / j.rate,
            None => f64::INFINITY,
        };
        let mut steps: u64 = 0;

        while !self.stop_reached(x, run_min, next == self.levels.len()) {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::Simulation(format!("barrier {} not reached within {MAX_STEPS} steps", self.barrier)));
            }
            let min_level = if track_g { run_min.max(0.0) } else { run_min };
            let pending = next < self.levels.len();

            // Gaussian increments are exact over any horizon, so far from
            // every level that matters the step can grow until a crossing
            // within it is an 8-sigma event.
            let h = if jumps.is_none() && !(self.integrate_g && pending) {
                let mut d = if x > 0.0 || !track_g { x - min_level } else { (-x).min(x - run_min) };
                if pending {
                    d = d.min(self.levels[next] - x);
                }
                let h = (d / (FAR_STEP_SDS * sigma)).powi(2).min(0.5 * d / drift.abs());
                if h > dt {
                    h
                } else {
                    dt
                }
            } else {
                dt
            };
            // a claim ends the step so the path is right-continuous at it
            let (h, claim) = if next_jump < t + h { (next_jump - t, true) } else { (h, false) };
            let sd = sigma * h.sqrt();
            let window = BRIDGE_WINDOW_SDS * sd;
            let var2 = 2.0 * sigma * sigma * h;

            let z: f64 = rng.sample(StandardNormal);
            let x1 = x + drift * h + sd * z;
            let mut jump = 0.0;
            if let (true, Some(j)) = (claim, jumps) {
                jump = j.sample(rng);
                next_jump += rng.sample::<f64, _>(Exp1) / j.rate;
            }
            let x_end = x1 + jump;

            // exact minimum of the Brownian bridge from x to x1
            let lo = x.min(x1);
            let step_min = if lo - window < min_level {
                let u: f64 = 1.0 - rng.random::<f64>();
                0.5 * (x + x1 - ((x1 - x) * (x1 - x) - var2 * u.ln()).sqrt())
            } else {
                lo
            };

            let hi = x.max(x1);
            if pending && hi + window > self.levels[next] {
                let u: f64 = 1.0 - rng.random::<f64>();
                let step_max = 0.5 * (x + x1 + ((x1 - x) * (x1 - x) - var2 * u.ln()).sqrt());
                while next < self.levels.len() && step_max > self.levels[next] {
                    let a = self.levels[next];
                    let s = if x1 > a { h * (a - x) / (x1 - x) } else { 0.5 * h };
                    tau[next] = t + s;
                    if self.integrate_g {
                        integral[next] = acc + 0.5 * (g_left + self.ev.g(a)) * s;
                    }
                    next += 1;
                }
            }

            if track_g {
                if x_end <= 0.0 {
                    g = t + h;
                } else if step_min <= 0.0 {
                    g = t + if x <= 0.0 && x1 > 0.0 { h * (-x) / (x1 - x) } else { 0.5 * h };
                }
            }
            run_min = run_min.min(step_min).min(x_end);

            if self.integrate_g && next < self.levels.len() {
                let g_right = self.ev.g(x1);
                acc += 0.5 * (g_left + g_right) * h;
                g_left = if jump == 0.0 { g_right } else { self.ev.g(x_end) };
            }
            t += h;
            x = x_end;
        }
        Ok(PathEvents { g, infimum: -run_min, tau, g_integral: integral })
    }

    fn sample_exact(&self, rng: &mut ChaCha8Rng, mu: f64, lambda: f64, rho: f64) -> Result<PathEvents> {
        let track_g = self.stop == StopRule::ReturnBarrier;
        let primitive = |y: f64| self.ev.g_primitive(y).expect("closed-form primitive for Cramér–Lundberg");

        let (mut tau, mut integral, mut next) = self.start();
        let mut x = self.x;
        let mut t = 0.0;
        let mut run_min = x;
        let mut g: f64 = 0.0;
        let mut acc = 0.0;
        let mut jumps: u64 = 0;

        loop {
            jumps += 1;
            if jumps > MAX_STEPS {
                return Err(Error::Simulation(format!("barrier {} not reached within {MAX_STEPS} claims", self.barrier)));
            }
            let e = rng.sample::<f64, _>(Exp1) / lambda;
            let mut seg_end = x + mu * e;

            while next < self.levels.len() && self.levels[next] <= seg_end {
                let a = self.levels[next];
                tau[next] = t + (a - x) / mu;
                if self.integrate_g {
                    integral[next] = acc + (primitive(a) - primitive(x)) / mu;
                }
                next += 1;
            }
            let stop_at = match self.stop {
                StopRule::ReturnBarrier if next == self.levels.len() => Some(self.barrier),
                StopRule::ReturnBarrier => None,
                StopRule::InfimumSettled => Some(run_min + self.barrier),
            };
            let stopping = stop_at.is_some_and(|b| seg_end >= b);
            if let Some(b) = stop_at.filter(|_| stopping) {
                seg_end = seg_end.min(b.max(x));
            }
            if track_g && x <= 0.0 {
                g = if seg_end > 0.0 { t - x / mu } else { t + e };
            }
            if stopping {
                break;
            }
            if self.integrate_g && next < self.levels.len() {
                acc += (primitive(seg_end) - primitive(x)) / mu;
            }
            let claim = rng.sample::<f64, _>(Exp1) / rho;
            x = seg_end - claim;
            t += e;
            run_min = run_min.min(x);
        }
        Ok(PathEvents { g, infimum: -run_min, tau, g_integral: integral })
    }
}

/// Convenience for a single path from 0 with the return-barrier stop.
pub fn sample_path_events(model: LevyModel, cfg: &McConfig, path_index: u64, levels: &[f64]) -> Result<PathEvents> {
    if path_index >= cfg.n_paths as u64 {
        return Err(Error::Validation(format!("path index {path_index} out of range for {} paths", cfg.n_paths)));
    }
    PathSampler::new(model, *cfg, 0.0, levels, true, StopRule::ReturnBarrier)?.sample(path_index)
}

/// Per-quantity running moments over a batch of paths from one start.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchSummary {
    pub x: f64,
    pub levels: Vec<f64>,
    pub q_list: Vec<f64>,
    pub g: Moments,
    pub infimum: Moments,
    pub abs_error: Vec<Moments>,
    pub tau: Vec<Moments>,
    pub g_integral: Vec<Moments>,
    pub laplace: Vec<Moments>,
    cfg: McConfig,
}

impl BatchSummary {
    fn empty(sampler: &PathSampler, q_list: &[f64]) -> Self {
        let k = sampler.levels.len();
        BatchSummary {
            x: sampler.x,
            levels: sampler.levels.clone(),
            q_list: q_list.to_vec(),
            g: Moments::default(),
            infimum: Moments::default(),
            abs_error: vec![Moments::default(); k],
            tau: vec![Moments::default(); k],
            g_integral: vec![Moments::default(); if sampler.integrate_g { k } else { 0 }],
            laplace: vec![Moments::default(); q_list.len()],
            cfg: sampler.cfg,
        }
    }

    fn push(&mut self, ev: &PathEvents) {
        self.g.push(ev.g);
        self.infimum.push(ev.infimum);
        for (i, &tau) in ev.tau.iter().enumerate() {
            self.abs_error[i].push((ev.g - tau).abs());
            self.tau[i].push(tau);
        }
        for (m, &v) in self.g_integral.iter_mut().zip(&ev.g_integral) {
            m.push(v);
        }
        for (m, &q) in self.laplace.iter_mut().zip(&self.q_list) {
            m.push((-q * ev.g).exp());
        }
    }

    fn merge(&mut self, other: &BatchSummary) {
        self.g.merge(&other.g);
        self.infimum.merge(&other.infimum);
        let pairs = self
            .abs_error
            .iter_mut()
            .zip(&other.abs_error)
            .chain(self.tau.iter_mut().zip(&other.tau))
            .chain(self.g_integral.iter_mut().zip(&other.g_integral))
            .chain(self.laplace.iter_mut().zip(&other.laplace));
        for (m, o) in pairs {
            m.merge(o);
        }
    }

    fn level_index(&self, a: f64) -> Result<usize> {
        self.levels
            .iter()
            .position(|&l| l == a)
            .ok_or_else(|| Error::Validation(format!("threshold {a} was not simulated")))
    }

    /// `E|g - tau_a^+|`; meaningful for batches started at 0.
    pub fn mean_abs_error(&self, a: f64) -> Result<McReport> {
        let i = self.level_index(a)?;
        Ok(McReport::from_moments(Quantity::MeanAbsError { a }, &self.abs_error[i], &self.cfg))
    }

    pub fn expected_g(&self) -> McReport {
        McReport::from_moments(Quantity::ExpectedG { x: self.x }, &self.g, &self.cfg)
    }

    pub fn expected_tau(&self, a: f64) -> Result<McReport> {
        let i = self.level_index(a)?;
        Ok(McReport::from_moments(Quantity::ExpectedTau { a, x: self.x }, &self.tau[i], &self.cfg))
    }

    pub fn value_va(&self, a: f64) -> Result<McReport> {
        let i = self.level_index(a)?;
        let m = self
            .g_integral
            .get(i)
            .ok_or_else(|| Error::Validation("batch was run without the G integral".into()))?;
        Ok(McReport::from_moments(Quantity::ValueVa { a, x: self.x }, m, &self.cfg))
    }

    pub fn infimum(&self) -> McReport {
        McReport::from_moments(Quantity::InfimumSample, &self.infimum, &self.cfg)
    }

    pub fn laplace_g(&self, q: f64) -> Result<McReport> {
        let i = self
            .q_list
            .iter()
            .position(|&v| v == q)
            .ok_or_else(|| Error::Validation(format!("q = {q} was not simulated")))?;
        Ok(McReport::from_moments(Quantity::LaplaceG { q, x: self.x }, &self.laplace[i], &self.cfg))
    }
}

/// Runs `cfg.n_paths` paths and reduces them into a [`BatchSummary`].
pub fn run_batch(sampler: &PathSampler, q_list: &[f64]) -> Result<BatchSummary> {
    if let Some(q) = q_list.iter().find(|q| !(**q >= 0.0)) {
        return Err(Error::Validation(format!("Laplace argument must be >= 0, got {q}")));
    }
    let n = sampler.cfg.n_paths as u64;
    let chunks: Vec<u64> = (0..n.div_ceil(CHUNK as u64)).collect();
    let partial: Vec<BatchSummary> = chunks
        .par_iter()
        .map(|&c| {
            let mut s = BatchSummary::empty(sampler, q_list);
            for k in c * CHUNK as u64..((c + 1) * CHUNK as u64).min(n) {
                s.push(&sampler.sample(k)?);
            }
            Ok(s)
        })
        .collect::<Result<_>>()?;
    let mut total = BatchSummary::empty(sampler, q_list);
    for p in &partial {
        total.merge(p);
    }
    Ok(total)
}

/// Runs paths from 0 with every threshold in `a_list` tracked in one pass.
pub fn estimate_mean_abs_errors(model: LevyModel, cfg: &McConfig, a_list: &[f64]) -> Result<Vec<McReport>> {
    if let Some(a) = a_list.iter().find(|a| !(**a >= 0.0)) {
        return Err(Error::Domain(format!("threshold must be >= 0, got {a}")));
    }
    let sampler = PathSampler::new(model, *cfg, 0.0, a_list, false, StopRule::ReturnBarrier)?;
    let batch = run_batch(&sampler, &[])?;
    a_list.iter().map(|&a| batch.mean_abs_error(a)).collect()
}

pub fn estimate_mean_abs_error(model: LevyModel, cfg: &McConfig, a: f64) -> Result<McReport> {
    Ok(estimate_mean_abs_errors(model, cfg, &[a])?.remove(0))
}

pub fn estimate_expected_g(model: LevyModel, cfg: &McConfig, x: f64) -> Result<McReport> {
    let sampler = PathSampler::new(model, *cfg, x, &[], false, StopRule::ReturnBarrier)?;
    Ok(run_batch(&sampler, &[])?.expected_g())
}

pub fn estimate_expected_tau(model: LevyModel, cfg: &McConfig, a: f64) -> Result<McReport> {
    if !(a >= 0.0) {
        return Err(Error::Domain(format!("threshold must be >= 0, got {a}")));
    }
    let sampler = PathSampler::new(model, *cfg, 0.0, &[a], false, StopRule::ReturnBarrier)?;
    run_batch(&sampler, &[])?.expected_tau(a)
}

/// `V_a(x)` as the mean of `int_0^{tau_a^+} G(X_s) ds`.
pub fn estimate_value_va(model: LevyModel, cfg: &McConfig, a: f64, x: f64) -> Result<McReport> {
    if !(a >= 0.0) {
        return Err(Error::Domain(format!("threshold must be >= 0, got {a}")));
    }
    cfg.validate()?;
    model.validate()?;
    if x >= a {
        return Ok(McReport {
            quantity: Quantity::ValueVa { a, x },
            estimate: 0.0,
            std_error: 0.0,
            n_paths: cfg.n_paths,
            seed_used: cfg.base_seed,
        });
    }
    let sampler = PathSampler::new(model, *cfg, x, &[a], true, StopRule::ReturnBarrier)?;
    run_batch(&sampler, &[])?.value_va(a)
}

pub fn estimate_laplace_g(model: LevyModel, cfg: &McConfig, q: f64, x: f64) -> Result<McReport> {
    let sampler = PathSampler::new(model, *cfg, x, &[], false, StopRule::ReturnBarrier)?;
    run_batch(&sampler, &[q])?.laplace_g(q)
}

/// `cfg.n_paths` independent draws of `-inf_t X_t` from 0, in path order.
pub fn sample_infimum(model: LevyModel, cfg: &McConfig) -> Result<Vec<f64>> {
    let sampler = PathSampler::new(model, *cfg, 0.0, &[], false, StopRule::InfimumSettled)?;
    (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|k| sampler.sample(k).map(|e| e.infimum))
        .collect()
}
