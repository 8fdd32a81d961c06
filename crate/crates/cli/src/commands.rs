//! `solve`, `curve` and `simulate`.

use lastzero::rule::{self, value_curve, OptimalRule, SolveOptions};
use lastzero::simulate::{run_batch, sample_infimum, BatchSummary, PathSampler, StopRule};
use lastzero::{FitRegime, McReport, Quantity, Result};
use serde_json::{json, Map, Value};

use crate::config::{Format, QuantityKind, Resolved};
use crate::output::{jnum, jnums, json_text, num};

pub fn solve_rule(cfg: &Resolved) -> Result<OptimalRule> {
    rule::solve(cfg.model, SolveOptions { quad_tol: cfg.quad_tol, a_tol: cfg.tol, ..SolveOptions::default() })
}

fn regime_name(r: FitRegime) -> &'static str {
    match r {
        FitRegime::SmoothFit => "SmoothFit",
        FitRegime::ContinuousFitOnly => "ContinuousFitOnly",
    }
}

fn config_value(cfg: &Resolved) -> Value {
    serde_json::to_value(cfg.echo()).expect("config serialises")
}

pub fn solve(cfg: &Resolved) -> Result<String> {
    let r = solve_rule(cfg)?;
    let v0 = r.value(0.0)?;
    let fields: Vec<(&str, Value)> = vec![
        ("a_star", jnum(r.a_star)),
        ("x0", jnum(r.x0)),
        ("psi_prime0", jnum(r.psi_prime0())),
        ("F0", jnum(r.conv.ev.f(0.0))),
        ("regime", json!(regime_name(r.regime))),
        ("E_g", jnum(r.expected_g)),
        ("H_at_a_star", jnum(r.h_at_a_star)),
        ("V0", jnum(v0)),
        ("V_star", jnum(v0 + r.expected_g)),
        ("method", serde_json::to_value(r.method()).expect("method serialises")),
        ("a_tol", jnum(r.tol)),
        ("quad_tol", jnum(cfg.quad_tol)),
    ];
    Ok(match cfg.format.unwrap_or(Format::Json) {
        Format::Json => {
            let mut doc: Map<String, Value> = fields.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
            doc.insert("model".into(), serde_json::to_value(cfg.model).expect("model serialises"));
            doc.insert("config".into(), config_value(cfg));
            json_text(&Value::Object(doc))
        }
        Format::Csv => {
            let mut s = String::from("key,value\n");
            for (k, v) in fields {
                let cell = match v {
                    Value::String(t) => t,
                    Value::Number(n) => num(n.as_f64().expect("finite")),
                    other => other.to_string(),
                };
                s.push_str(&format!("{k},{cell}\n"));
            }
            s
        }
    })
}

/// Default thresholds for curves: half, one and one and a half times `a*`.
fn curve_thresholds(cfg: &Resolved, r: &OptimalRule) -> Vec<f64> {
    match &cfg.a {
        Some(a) => a.clone(),
        None if r.a_star > 0.0 => vec![0.5 * r.a_star, r.a_star, 1.5 * r.a_star],
        None => vec![0.0, 0.5, 1.0],
    }
}

fn curve_grid(cfg: &Resolved, r: &OptimalRule, thresholds: &[f64]) -> Vec<f64> {
    let lo = cfg.grid.xmin.unwrap_or(-1.0);
    let hi = cfg.grid.xmax.unwrap_or((3.0 * r.a_star).max(2.0));
    let step = cfg.grid.step.unwrap_or(0.01);
    let n = ((hi - lo) / step * (1.0 + 1e-12)).floor() as usize;
    let mut xs: Vec<f64> = (0..=n).map(|i| lo + i as f64 * step).collect();
    // the thresholds themselves, so each kink or touch point is a row
    xs.extend(thresholds.iter().copied().filter(|a| (lo..=hi).contains(a)));
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * step);
    xs
}

pub fn curve(cfg: &Resolved) -> Result<String> {
    let r = solve_rule(cfg)?;
    let thresholds = curve_thresholds(cfg, &r);
    let xs = curve_grid(cfg, &r, &thresholds);
    let ev = r.conv.ev;
    let f: Vec<f64> = xs.iter().map(|&x| ev.f(x)).collect();
    let g: Vec<f64> = xs.iter().map(|&x| ev.g(x)).collect();
    let h: Vec<f64> = xs.iter().map(|&x| r.conv.eval(x)).collect::<Result<_>>()?;
    let curves: Vec<Vec<f64>> =
        thresholds.iter().map(|&a| value_curve(&r.conv, a, &xs).map(|c| c.v)).collect::<Result<_>>()?;

    Ok(match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut s = String::from("x,F,G,H");
            for a in &thresholds {
                s.push_str(&format!(",V_a={}", num(*a)));
            }
            s.push('\n');
            for i in 0..xs.len() {
                s.push_str(&format!("{},{},{},{}", num(xs[i]), num(f[i]), num(g[i]), num(h[i])));
                for c in &curves {
                    s.push(',');
                    s.push_str(&num(c[i]));
                }
                s.push('\n');
            }
            s
        }
        Format::Json => {
            let v: Vec<Value> =
                thresholds.iter().zip(&curves).map(|(a, c)| json!({"a": jnum(*a), "values": jnums(c)})).collect();
            json_text(&json!({
                "a_star": jnum(r.a_star),
                "x": jnums(&xs),
                "F": jnums(&f),
                "G": jnums(&g),
                "H": jnums(&h),
                "V": v,
                "config": config_value(cfg),
            }))
        }
    })
}

/// Threshold grid `{0, 0.1 a*, ..., 2 a*}`, or `{0, 0.1, ..., 2}` when
/// `a* = 0`.
pub fn threshold_grid(a_star: f64) -> Vec<f64> {
    let span = if a_star > 0.0 { a_star } else { 1.0 };
    (0..=20).map(|i| 0.1 * i as f64 * span).collect()
}

pub fn simulate_reports(cfg: &Resolved) -> Result<Vec<McReport>> {
    let kinds = cfg.quantities.clone().unwrap_or_else(|| vec![QuantityKind::Mae, QuantityKind::ExpectedG]);
    let needs_levels = kinds.iter().any(|k| matches!(k, QuantityKind::Mae | QuantityKind::ExpectedTau | QuantityKind::Value));
    let a_list = match (&cfg.a, needs_levels) {
        (Some(a), _) => a.clone(),
        (None, true) => threshold_grid(solve_rule(cfg)?.a_star),
        (None, false) => Vec::new(),
    };
    let x = cfg.x.unwrap_or(0.0);
    let q_list = cfg.q.clone().unwrap_or_else(|| vec![1.0]);

    let from_x = kinds.iter().any(|k| {
        matches!(k, QuantityKind::ExpectedG | QuantityKind::ExpectedTau | QuantityKind::Value | QuantityKind::Laplace)
    });
    let from_zero = kinds.contains(&QuantityKind::Mae);
    let integrate = kinds.contains(&QuantityKind::Value);
    let q_used: &[f64] = if kinds.contains(&QuantityKind::Laplace) { &q_list } else { &[] };

    let batch = |start: f64, integrate: bool, q: &[f64]| -> Result<BatchSummary> {
        let sampler = PathSampler::new(cfg.model, cfg.mc, start, &a_list, integrate, StopRule::ReturnBarrier)?;
        run_batch(&sampler, q)
    };
    let at_x = if from_x { Some(batch(x, integrate, q_used)?) } else { None };
    let at_zero = match (&at_x, from_zero) {
        (Some(b), true) if x == 0.0 => Some(b.clone()),
        (_, true) => Some(batch(0.0, false, &[])?),
        _ => None,
    };

    let mut reports = Vec::new();
    for kind in kinds {
        match kind {
            QuantityKind::Mae => {
                let b = at_zero.as_ref().expect("batch from 0");
                for &a in &a_list {
                    reports.push(b.mean_abs_error(a)?);
                }
            }
            QuantityKind::ExpectedG => reports.push(at_x.as_ref().expect("batch from x").expected_g()),
            QuantityKind::ExpectedTau => {
                for &a in &a_list {
                    reports.push(at_x.as_ref().expect("batch from x").expected_tau(a)?);
                }
            }
            QuantityKind::Value => {
                for &a in &a_list {
                    reports.push(at_x.as_ref().expect("batch from x").value_va(a)?);
                }
            }
            QuantityKind::Laplace => {
                for &q in &q_list {
                    reports.push(at_x.as_ref().expect("batch from x").laplace_g(q)?);
                }
            }
            QuantityKind::Infimum => {
                let xs = sample_infimum(cfg.model, &cfg.mc)?;
                let m: lastzero::numerics::Moments = xs.iter().copied().collect();
                reports.push(McReport {
                    quantity: Quantity::InfimumSample,
                    estimate: m.mean,
                    std_error: m.std_error(),
                    n_paths: xs.len(),
                    seed_used: cfg.mc.base_seed,
                });
            }
        }
    }
    Ok(reports)
}

fn quantity_cells(q: &Quantity) -> (&'static str, Option<f64>, Option<f64>, Option<f64>) {
    match *q {
        Quantity::MeanAbsError { a } => ("MeanAbsError", Some(a), Some(0.0), None),
        Quantity::ExpectedG { x } => ("ExpectedG", None, Some(x), None),
        Quantity::ExpectedTau { a, x } => ("ExpectedTau", Some(a), Some(x), None),
        Quantity::ValueVa { a, x } => ("ValueVa", Some(a), Some(x), None),
        Quantity::InfimumSample => ("InfimumSample", None, Some(0.0), None),
        Quantity::LaplaceG { q, x } => ("LaplaceG", None, Some(x), Some(q)),
    }
}

pub fn simulate(cfg: &Resolved) -> Result<String> {
    let reports = simulate_reports(cfg)?;
    Ok(match cfg.format.unwrap_or(Format::Json) {
        Format::Csv => {
            let mut s = String::from("quantity,a,x,q,estimate,std_error,n_paths,seed_used\n");
            let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
            for r in &reports {
                let (name, a, x, q) = quantity_cells(&r.quantity);
                s.push_str(&format!(
                    "{name},{},{},{},{},{},{},{}\n",
                    opt(a),
                    opt(x),
                    opt(q),
                    num(r.estimate),
                    num(r.std_error),
                    r.n_paths,
                    r.seed_used
                ));
            }
            s
        }
        Format::Json => {
            let rows: Vec<Value> = reports
                .iter()
                .map(|r| {
                    let (name, a, x, q) = quantity_cells(&r.quantity);
                    let mut m = Map::new();
                    m.insert("quantity".into(), json!(name));
                    for (k, v) in [("a", a), ("x", x), ("q", q)] {
                        if let Some(v) = v {
                            m.insert(k.into(), jnum(v));
                        }
                    }
                    m.insert("estimate".into(), jnum(r.estimate));
                    m.insert("std_error".into(), jnum(r.std_error));
                    m.insert("n_paths".into(), json!(r.n_paths));
                    m.insert("seed_used".into(), json!(r.seed_used));
                    Value::Object(m)
                })
                .collect();
            json_text(&json!({ "reports": rows, "config": config_value(cfg) }))
        }
    })
}
