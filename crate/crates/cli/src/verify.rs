//! `verify`: every invariant of the toolkit, measured against its threshold.

use lastzero::convolve::{h_analytic, Convolution};
use lastzero::numerics::{critical_value_1pct, ks_statistic, median};
use lastzero::rule::{expected_g, laplace_g, value_a, OptimalRule};
use lastzero::simulate::{run_batch, sample_infimum, McConfig, PathSampler, StopRule};
use lastzero::{FitRegime, LevyModel, Result, ScaleEvaluator};
use serde_json::{json, Value};

use crate::commands::{solve_rule, threshold_grid};
use crate::config::{Format, Resolved};
use crate::output::{jnum, json_text, num};

/// Paths used by `verify` unless configured otherwise.
pub const DEFAULT_VERIFY_PATHS: usize = 20_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub pass: bool,
    pub note: String,
}

impl Check {
    fn at_most(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Check { name: name.into(), measured, threshold, pass: measured <= threshold, note: String::new() }
    }

    fn below(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Check { name: name.into(), measured, threshold, pass: measured < threshold, note: String::new() }
    }

    fn skipped(name: impl Into<String>, why: &str) -> Self {
        Check { name: name.into(), measured: f64::NAN, threshold: f64::NAN, pass: true, note: format!("skipped: {why}") }
    }

    fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
}

fn analytic_checks(r: &OptimalRule, checks: &mut Vec<Check>) -> Result<()> {
    let ev = r.conv.ev;
    let model = ev.model;
    let psi1 = ev.psi_prime0();

    let fs: Vec<f64> = grid(-1.0, 20.0, 10_000).map(|x| ev.f(x)).collect();
    let drop = fs.windows(2).map(|w| (w[0] - w[1]).max(0.0)).fold(0.0, f64::max);
    checks.push(Check::at_most("F nondecreasing on [-1, 20] (largest drop)", drop, 0.0));
    let range = fs.iter().map(|&f| (-f).max(f - 1.0).max(0.0)).fold(0.0, f64::max);
    checks.push(Check::at_most("F within [0, 1]", range, 0.0));
    let x_tail = 20.0 / ev.tail_decay_rate();
    checks.push(Check::below("1 - F(20 / decay rate)", psi1 * ev.w_complement(x_tail), 1e-6));
    let g_err = grid(-1.0, 20.0, 10_000).map(|x| (ev.g(x) - (2.0 * ev.f(x) - 1.0)).abs()).fold(0.0, f64::max);
    checks.push(Check::at_most("G = 2F - 1", g_err, 1e-15));

    let h = 1e-5;
    let mut w_err: f64 = 0.0;
    for x in grid(0.1, 10.0, 200) {
        let fd = (ev.w_complement(x - h) - ev.w_complement(x + h)) / (2.0 * h);
        let exact = ev.w_prime(x)?;
        w_err = w_err.max(((fd - exact) / exact).abs());
    }
    checks.push(Check::at_most("W' vs central differences (relative)", w_err, 1e-5));

    let numeric = Convolution::numeric(ev, r.conv.quad_tol);
    let h_tol = r.conv.quad_tol.max(1e-8);
    match model {
        LevyModel::BetaFamily { .. } => checks.push(Check::skipped("H numeric vs closed form", "no closed form")),
        _ => {
            let mut err: f64 = 0.0;
            for x in grid(0.0, 10.0, 200) {
                err = err.max((numeric.eval(x)? - h_analytic(&model, x)?).abs());
            }
            checks.push(Check::at_most("H numeric vs closed form on [0, 10]", err, h_tol));
        }
    }

    let hs: Vec<(f64, f64)> =
        grid(0.0, r.table.x_max(), 201).map(|x| r.conv.eval(x).map(|v| (x, v))).collect::<Result<_>>()?;
    let h_drop = hs.windows(2).map(|w| (w[0].1 - w[1].1).max(0.0)).fold(0.0, f64::max);
    checks.push(Check::at_most("H nondecreasing (largest drop)", h_drop, r.conv.quad_tol));
    let over = hs.iter().map(|&(x, v)| (v - ev.f(x)).max(0.0)).fold(0.0, f64::max);
    checks.push(Check::at_most("H <= F (largest excess)", over, r.conv.quad_tol));
    let f0 = ev.f(0.0);
    checks.push(Check::at_most("H(0) = F(0)^2", (r.conv.eval(0.0)? - f0 * f0).abs(), 1e-15));

    checks.push(Check::at_most("a* >= x0 (x0 - a*)", r.x0 - r.a_star, 0.0));

    let best = r.value(0.0)?;
    let span = if r.a_star > 0.0 { 3.0 * r.a_star } else { 1.0 };
    let mut shortfall = f64::NEG_INFINITY;
    let mut weakest_margin = f64::INFINITY;
    for a in grid(0.0, span, 41) {
        let v = value_a(&r.conv, a, 0.0)?;
        shortfall = shortfall.max(best - v);
        if (a - r.a_star).abs() > 0.05 {
            weakest_margin = weakest_margin.min(v - best);
        }
    }
    checks.push(Check::at_most("V_a(0) >= V(0) over 41 thresholds (shortfall)", shortfall, 1e-8));
    checks.push(
        Check::at_most("V_a(0) > V(0) away from a* (negated margin)", -weakest_margin, -1e-8)
            .note("thresholds with |a - a*| > 0.05"),
    );

    let mut worst: f64 = 0.0;
    let mut prev = f64::NEG_INFINITY;
    for x in grid(-2.0, r.a_star + 3.0, 1000) {
        let v = r.value(x)?;
        worst = worst.max(prev - v).max(v);
        if let Ok(eg) = expected_g(&model, x) {
            worst = worst.max(-eg - v);
        }
        prev = v;
    }
    checks.push(
        Check::at_most("V nondecreasing, V <= 0, V >= -E_x(g)", worst, 1e-9)
            .note("lower bound where E_x(g) has a closed form"),
    );

    match r.regime {
        FitRegime::SmoothFit => checks.push(Check::at_most("smooth fit |V'(a*-)|", r.value_prime(r.a_star)?.abs(), 1e-6)),
        FitRegime::ContinuousFitOnly => {
            let d = (r.value_prime(-f64::MIN_POSITIVE)? - 1.0 / psi1).abs();
            checks.push(Check::at_most("continuous fit V'(0-) = 1/psi'(0+)", d, 1e-12));
        }
    }

    if let LevyModel::BrownianDrift { .. } = model {
        let mut at_zero: f64 = 0.0;
        let mut slope: f64 = 0.0;
        for x in [-1.0, 0.0, 0.5, 2.0] {
            at_zero = at_zero.max((laplace_g(&model, 0.0, x)? - 1.0).abs());
            let l = |q: f64| laplace_g(&model, q, x);
            let hq = 1e-5;
            let d = -(-3.0 * l(0.0)? + 4.0 * l(hq)? - l(2.0 * hq)?) / (2.0 * hq);
            slope = slope.max((d - expected_g(&model, x)?).abs());
        }
        checks.push(Check::at_most("E_x(exp(-0 g)) = 1", at_zero, 1e-12));
        checks.push(Check::at_most("-d/dq E_x(exp(-q g)) at 0 vs E_x(g)", slope, 1e-4));
    } else {
        checks.push(Check::skipped("Laplace transform of g", "closed form only for Brownian motion"));
    }
    Ok(())
}

/// Cheap enough to run at full scale: Brownian paths, exact claims.
fn full_scale(model: &LevyModel) -> bool {
    !matches!(model, LevyModel::BetaFamily { beta } if *beta < 2.0)
}

fn monte_carlo_checks(r: &OptimalRule, mc: &McConfig, checks: &mut Vec<Check>) -> Result<()> {
    let ev: ScaleEvaluator = r.conv.ev;
    let model = ev.model;
    let full = full_scale(&model);
    let n = if full { mc.n_paths } else { (mc.n_paths / 50).max(200) };
    let z_max = if full { 3.0 } else { 5.0 };
    let scale_note = format!("{n} paths");

    let inf_cfg = McConfig { n_paths: 2 * n, ..*mc };
    let infima = sample_infimum(model, &inf_cfg)?;
    let d = ks_statistic(&infima[..n], |x| ev.f(x), |x| ev.f_left(x));
    checks.push(Check::below("KS of -inf X vs F", d, critical_value_1pct(n)).note(scale_note.clone()));
    let sums: Vec<f64> = infima.chunks(2).map(|p| p[0] + p[1]).collect();
    let h = |x: f64| r.conv.eval(x).unwrap_or(f64::NAN);
    let d = ks_statistic(&sums, h, |x| if x <= 0.0 { 0.0 } else { h(x) });
    checks.push(Check::below("KS of pair sums vs H", d, critical_value_1pct(sums.len())).note(scale_note.clone()));
    if r.a_star > 0.0 {
        // three asymptotic standard errors of a sample median
        let dh = (h(r.a_star + 1e-4) - h(r.a_star - 1e-4)) / 2e-4;
        let tol = 3.0 / (2.0 * dh * (sums.len() as f64).sqrt());
        checks.push(Check::at_most("median of pair sums vs a*", (median(&sums) - r.a_star).abs(), tol));
    }

    let levels = if full { threshold_grid(r.a_star) } else { vec![r.a_star] };
    let cfg = McConfig { n_paths: n, ..*mc };
    let sampler = PathSampler::new(model, cfg, 0.0, &levels, false, StopRule::ReturnBarrier)?;
    let batch = run_batch(&sampler, &[])?;
    let mae = batch.mean_abs_error(r.a_star)?;
    let target = r.prediction_error()?;
    checks.push(
        Check::at_most("E|g - tau_a*| = V(0) + E(g) (std errors)", mae.z_score(target), z_max)
            .note(format!("{} vs {}", num(mae.estimate), num(target))),
    );
    let eg = batch.expected_g();
    checks.push(
        Check::at_most("E(g) (std errors)", eg.z_score(r.expected_g), z_max)
            .note(format!("{} vs {}", num(eg.estimate), num(r.expected_g))),
    );
    let tau = batch.expected_tau(r.a_star)?;
    let tau_exact = r.a_star / r.psi_prime0();
    checks.push(
        Check::at_most("E(tau_a*) = a*/psi'(0+) (std errors)", tau.z_score(tau_exact), z_max)
            .note(format!("{} vs {}", num(tau.estimate), num(tau_exact))),
    );

    if full {
        let estimates: Vec<f64> = levels.iter().map(|&a| batch.mean_abs_error(a).map(|r| r.estimate)).collect::<Result<_>>()?;
        let i_min = (0..levels.len()).min_by(|&i, &j| estimates[i].total_cmp(&estimates[j])).expect("non-empty grid");
        let step = levels[1] - levels[0];
        checks.push(
            Check::at_most("argmin over threshold grid vs a* (grid steps)", (levels[i_min] - r.a_star).abs() / step, 1.0 + 1e-9)
                .note(format!("argmin {}", num(levels[i_min]))),
        );
    } else {
        checks.push(Check::skipped("argmin over threshold grid", "approximate jump simulation"));
    }

    match model {
        LevyModel::CramerLundberg { .. } => checks.push(Check::skipped("time-step convergence", "exact simulation")),
        _ if !full => checks.push(Check::skipped("time-step convergence", "approximate jump simulation")),
        _ => {
            let half = McConfig { dt: 0.5 * mc.dt, ..cfg };
            let s = PathSampler::new(model, half, 0.0, &[r.a_star], false, StopRule::ReturnBarrier)?;
            let fine = run_batch(&s, &[])?.mean_abs_error(r.a_star)?;
            let diff = (fine.estimate - mae.estimate).abs();
            let combined = (fine.std_error.powi(2) + mae.std_error.powi(2)).sqrt();
            checks.push(
                Check::below("halving dt moves E|g - tau_a*| (combined std errors)", diff / combined, 2.0)
                    .note(format!("dt {} -> {}", num(mc.dt), num(half.dt))),
            );
        }
    }
    Ok(())
}

pub fn run_checks(cfg: &Resolved) -> Result<Vec<Check>> {
    let r = solve_rule(cfg)?;
    let mut checks = Vec::new();
    analytic_checks(&r, &mut checks)?;
    monte_carlo_checks(&r, &cfg.mc, &mut checks)?;
    Ok(checks)
}

/// Report text and whether every check passed.
pub fn verify(cfg: &Resolved) -> Result<(String, bool)> {
    let checks = run_checks(cfg)?;
    let ok = checks.iter().all(|c| c.pass);
    let text = match cfg.format {
        None => {
            let mut s = format!(
                "verify {}  paths={} seed={} dt={}\n",
                cfg.model,
                cfg.mc.n_paths,
                cfg.mc.base_seed,
                num(cfg.mc.dt)
            );
            for c in &checks {
                let status = if c.note.starts_with("skipped") {
                    "SKIP"
                } else if c.pass {
                    "PASS"
                } else {
                    "FAIL"
                };
                s.push_str(&format!("{status}  {:<58}", c.name));
                if !c.measured.is_nan() {
                    s.push_str(&format!(" measured {:<16} threshold {}", num(c.measured), num(c.threshold)));
                }
                if !c.note.is_empty() {
                    s.push_str(&format!("  ({})", c.note));
                }
                s.push('\n');
            }
            let passed = checks.iter().filter(|c| c.pass).count();
            s.push_str(&format!("{passed}/{} checks passed\n", checks.len()));
            s
        }
        Some(Format::Csv) => {
            let mut s = String::from("check,measured,threshold,pass,note\n");
            for c in &checks {
                s.push_str(&format!("\"{}\",{},{},{},\"{}\"\n", c.name, num(c.measured), num(c.threshold), c.pass, c.note));
            }
            s
        }
        Some(Format::Json) => {
            let rows: Vec<Value> = checks
                .iter()
                .map(|c| {
                    json!({"check": c.name, "measured": jnum(c.measured), "threshold": jnum(c.threshold), "pass": c.pass, "note": c.note})
                })
                .collect();
            json_text(&json!({"passed": ok, "checks": rows, "config": serde_json::to_value(cfg.echo()).expect("config serialises")}))
        }
    };
    Ok((text, ok))
}
