//! Run configuration: an optional JSON file overlaid with command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use lastzero::rule::DEFAULT_A_TOL;
use lastzero::convolve::DEFAULT_QUAD_TOL;
use lastzero::{Error, LevyModel, McConfig, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Bm,
    Cl,
    Beta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Monte Carlo estimands selectable with `--quantity`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum QuantityKind {
    /// `E|g - tau_a|` from 0 for each threshold.
    Mae,
    /// `E_x(g)`.
    ExpectedG,
    /// `E_x(tau_a)` for each threshold.
    ExpectedTau,
    /// `V_a(x)` for each threshold.
    Value,
    /// Mean of `-inf X` from 0.
    Infimum,
    /// `E_x(exp(-q g))` for each `q`.
    Laplace,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Model family.
    #[arg(long, value_enum)]
    pub model: Option<Family>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Threshold(s) overriding the defaults derived from a*; comma-separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub a: Vec<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub xmin: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub xmax: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
    /// Number of simulated paths.
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Time step for Brownian and beta-family paths.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Probability allowed for a return below 0 after the simulation stops.
    #[arg(long = "tail-eps")]
    pub tail_eps: Option<f64>,
    /// Small-jump cutoff for beta-family paths.
    #[arg(long = "beta-eps")]
    pub beta_eps: Option<f64>,
    /// Bisection tolerance for a*.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Absolute tolerance of the convolution integral.
    #[arg(long = "quad-tol")]
    pub quad_tol: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON run configuration (a previous `solve` output is accepted too).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Monte Carlo quantities for `simulate`; comma-separated.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub quantity: Vec<QuantityKind>,
    /// Start point for `expected-g`, `expected-tau`, `value` and `laplace`.
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<f64>,
    /// Laplace arguments; comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub q: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelSpec {
    pub family: Option<Family>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    pub xmin: Option<f64>,
    pub xmax: Option<f64>,
    pub step: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McSpec {
    pub n_paths: Option<usize>,
    pub base_seed: Option<u64>,
    pub dt: Option<f64>,
    pub tail_eps: Option<f64>,
    pub beta_eps: Option<f64>,
}

/// File form of the configuration; every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub a: Option<Vec<f64>>,
    pub grid: GridSpec,
    pub mc: McSpec,
    pub tol: Option<f64>,
    pub quad_tol: Option<f64>,
    pub format: Option<Format>,
    pub quantities: Option<Vec<QuantityKind>>,
    pub x: Option<f64>,
    pub q: Option<Vec<f64>>,
}

/// Configuration after merging, defaults filled and validated.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub model: LevyModel,
    pub a: Option<Vec<f64>>,
    pub grid: GridSpec,
    pub mc: McConfig,
    pub tol: f64,
    pub quad_tol: f64,
    pub format: Option<Format>,
    pub quantities: Option<Vec<QuantityKind>>,
    pub x: Option<f64>,
    pub q: Option<Vec<f64>>,
}

impl RunConfig {
    /// Reads a configuration file. A document with a top-level `config`
    /// object (such as `solve` output) contributes that object.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Validation(format!("cannot read config {}: {e}", path.display())))?;
        let mut value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| Error::Validation(format!("config {} is not valid JSON: {e}", path.display())))?;
        if let Some(inner) = value.get_mut("config").filter(|v| v.is_object()) {
            value = inner.take();
        }
        serde_json::from_value(value).map_err(|e| Error::Validation(format!("bad config {}: {e}", path.display())))
    }

    /// Flags win over file values.
    pub fn overlay(mut self, args: &CommonArgs) -> Self {
        fn set<T: Clone>(slot: &mut Option<T>, flag: &Option<T>) {
            if flag.is_some() {
                slot.clone_from(flag);
            }
        }
        if let Some(family) = args.model {
            if self.model.family != Some(family) {
                self.model = ModelSpec { family: Some(family), ..ModelSpec::default() };
            }
        }
        set(&mut self.model.mu, &args.mu);
        set(&mut self.model.sigma, &args.sigma);
        set(&mut self.model.lambda, &args.lambda);
        set(&mut self.model.rho, &args.rho);
        set(&mut self.model.beta, &args.beta);
        if !args.a.is_empty() {
            self.a = Some(args.a.clone());
        }
        set(&mut self.grid.xmin, &args.xmin);
        set(&mut self.grid.xmax, &args.xmax);
        set(&mut self.grid.step, &args.step);
        set(&mut self.mc.n_paths, &args.paths);
        set(&mut self.mc.base_seed, &args.seed);
        set(&mut self.mc.dt, &args.dt);
        set(&mut self.mc.tail_eps, &args.tail_eps);
        set(&mut self.mc.beta_eps, &args.beta_eps);
        set(&mut self.tol, &args.tol);
        set(&mut self.quad_tol, &args.quad_tol);
        set(&mut self.format, &args.format);
        if !args.quantity.is_empty() {
            self.quantities = Some(args.quantity.clone());
        }
        set(&mut self.x, &args.x);
        if !args.q.is_empty() {
            self.q = Some(args.q.clone());
        }
        self
    }

    pub fn resolve(&self) -> Result<Resolved> {
        Ok(Resolved {
            model: self.model.build()?,
            a: match &self.a {
                Some(a) if a.iter().any(|v| !(v.is_finite() && *v >= 0.0)) => {
                    return Err(Error::Validation(format!("thresholds must be finite and >= 0, got {a:?}")))
                }
                Some(a) if a.is_empty() => None,
                other => other.clone(),
            },
            grid: self.grid.validated()?,
            mc: self.mc.build()?,
            tol: positive("tol", self.tol.unwrap_or(DEFAULT_A_TOL))?,
            quad_tol: positive("quad_tol", self.quad_tol.unwrap_or(DEFAULT_QUAD_TOL))?,
            format: self.format,
            quantities: self.quantities.clone(),
            x: match self.x {
                Some(x) if !x.is_finite() => return Err(Error::Validation(format!("x must be finite, got {x}"))),
                x => x,
            },
            q: match &self.q {
                Some(q) if q.iter().any(|v| !(v.is_finite() && *v >= 0.0)) => {
                    return Err(Error::Validation(format!("q must be finite and >= 0, got {q:?}")))
                }
                q => q.clone(),
            },
        })
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Validation(format!("{name} must be positive, got {v}")))
    }
}

impl ModelSpec {
    pub fn build(&self) -> Result<LevyModel> {
        let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| Error::Validation(format!("missing --{flag}")));
        match self.family {
            None => Err(Error::Validation("missing --model".into())),
            Some(Family::Bm) => LevyModel::brownian(need(self.mu, "mu")?, need(self.sigma, "sigma")?),
            Some(Family::Cl) => {
                LevyModel::cramer_lundberg(need(self.mu, "mu")?, need(self.lambda, "lambda")?, need(self.rho, "rho")?)
            }
            Some(Family::Beta) => LevyModel::beta_family(need(self.beta, "beta")?),
        }
    }

    pub fn from_model(model: &LevyModel) -> Self {
        match *model {
            LevyModel::BrownianDrift { mu, sigma } => {
                ModelSpec { family: Some(Family::Bm), mu: Some(mu), sigma: Some(sigma), ..Default::default() }
            }
            LevyModel::CramerLundberg { mu, lambda, rho } => ModelSpec {
                family: Some(Family::Cl),
                mu: Some(mu),
                lambda: Some(lambda),
                rho: Some(rho),
                ..Default::default()
            },
            LevyModel::BetaFamily { beta } => {
                ModelSpec { family: Some(Family::Beta), beta: Some(beta), ..Default::default() }
            }
        }
    }
}

impl GridSpec {
    fn validated(&self) -> Result<GridSpec> {
        if let Some(step) = self.step {
            positive("grid step", step)?;
        }
        for v in [self.xmin, self.xmax].into_iter().flatten() {
            if !v.is_finite() {
                return Err(Error::Validation(format!("grid bounds must be finite, got {v}")));
            }
        }
        if let (Some(lo), Some(hi)) = (self.xmin, self.xmax) {
            if !(lo < hi) {
                return Err(Error::Validation(format!("need xmin < xmax, got {lo} >= {hi}")));
            }
        }
        Ok(self.clone())
    }
}

impl McSpec {
    fn build(&self) -> Result<McConfig> {
        let d = McConfig::default();
        let cfg = McConfig {
            n_paths: self.n_paths.unwrap_or(d.n_paths),
            base_seed: self.base_seed.unwrap_or(d.base_seed),
            dt: self.dt.unwrap_or(d.dt),
            tail_eps: self.tail_eps.unwrap_or(d.tail_eps),
            beta_eps: self.beta_eps.unwrap_or(d.beta_eps),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_config(cfg: &McConfig) -> Self {
        McSpec {
            n_paths: Some(cfg.n_paths),
            base_seed: Some(cfg.base_seed),
            dt: Some(cfg.dt),
            tail_eps: Some(cfg.tail_eps),
            beta_eps: Some(cfg.beta_eps),
        }
    }
}

impl Resolved {
    /// Fully explicit file form, suitable for re-running.
    pub fn echo(&self) -> RunConfig {
        RunConfig {
            model: ModelSpec::from_model(&self.model),
            a: self.a.clone(),
            grid: self.grid.clone(),
            mc: McSpec::from_config(&self.mc),
            tol: Some(self.tol),
            quad_tol: Some(self.quad_tol),
            format: self.format,
            quantities: self.quantities.clone(),
            x: self.x,
            q: self.q.clone(),
        }
    }
}
