//! TOML run configuration and its translation into a `ProblemSpec`.
//!
//! Unknown keys are rejected everywhere. Every numeric control has a
//! default (see the CLI long help for the full list), so a minimal config
//! is just the problem definition.

use crate::expr::Expr;
use crate::models::{ModelError, PhiFamily, PhiModel, ThetaMode};
use crate::problem::{Equation, Nonlinearity, Numerics, ProblemError, ProblemSpec, PunderVariant};
use serde::Deserialize;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("expression `{text}` for {what}: {source}")]
    Expr {
        what: String,
        text: String,
        source: crate::expr::ParseError,
    },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("sweep key `{0}` does not address a config value")]
    BadSweepKey(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSection,
    #[serde(default)]
    pub numerics: NumericsSection,
    #[serde(default)]
    pub modes: ModesSection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub dimension: usize,
    pub a1: f64,
    pub a2: f64,
    /// Scaling floors; default max(1, 1/a_i).
    pub m1: Option<f64>,
    pub m2: Option<f64>,
    #[serde(default = "zero_string")]
    pub sigma1: String,
    #[serde(default = "zero_string")]
    pub sigma2: String,
    pub p1: String,
    pub p2: String,
    pub model1: ModelSection,
    pub model2: ModelSection,
    pub f1: NonlinearitySection,
    pub f2: NonlinearitySection,
}

fn zero_string() -> String {
    "0".to_string()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// `elasticity` | `plasticity` | `generalized-newtonian` |
    /// `plasma-physics` | `power-law` | `custom`
    pub family: String,
    pub p: Option<f64>,
    pub q: Option<f64>,
    /// φ(t) expression for the custom family.
    pub phi: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearitySection {
    /// `power` (u^beta·v^alpha) | `custom` (expressions f, h, fbar)
    pub kind: String,
    pub beta: Option<f64>,
    pub alpha: Option<f64>,
    pub f: Option<String>,
    pub h: Option<String>,
    pub fbar: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsSection {
    pub radius: f64,
    pub grid_points: usize,
    pub grading: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub arg_cap: f64,
    pub arg_points: usize,
    pub probe_start: Option<f64>,
    pub probe_doublings: usize,
    pub probe_grading: f64,
    pub converge_eps: f64,
    pub diverge_factor: f64,
    pub diverge_increment: f64,
}

impl Default for NumericsSection {
    fn default() -> Self {
        let n = Numerics::default();
        NumericsSection {
            radius: n.radius,
            grid_points: n.grid_points,
            grading: n.grading,
            tolerance: n.tolerance,
            max_iterations: n.max_iterations,
            arg_cap: n.arg_cap,
            arg_points: n.arg_points,
            probe_start: None,
            probe_doublings: n.probe_doublings,
            probe_grading: n.probe_grading,
            converge_eps: n.converge_eps,
            diverge_factor: n.diverge_factor,
            diverge_increment: n.diverge_increment,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModesSection {
    /// `o4` (default) | `o3`
    pub theta: Option<String>,
    /// `notation` (default) | `proof`
    pub punder: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Dotted config paths, each set to the swept value (e.g. `problem.p1`).
    pub keys: Vec<String>,
    pub values: Vec<toml::Value>,
}

/// CLI-level overrides that win over config values.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub theta_mode: Option<ThetaMode>,
    pub punder_variant: Option<PunderVariant>,
}

pub fn load_raw(path: &Path) -> Result<toml::Value, ConfigError> {
    let text = std::fs::read_to_string(path)?;
    Ok(text.parse::<toml::Value>()?)
}

pub fn from_value(value: &toml::Value) -> Result<RunConfig, ConfigError> {
    Ok(RunConfig::deserialize(value.clone())?)
}

pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
    from_value(&load_raw(path)?)
}

fn parse_expr(text: &str, vars: &[&str], what: &str) -> Result<Expr, ConfigError> {
    Expr::parse(text, vars).map_err(|source| ConfigError::Expr {
        what: what.to_string(),
        text: text.to_string(),
        source,
    })
}

fn build_model(section: &ModelSection, theta: ThetaMode, which: &str) -> Result<PhiModel, ConfigError> {
    let need_p = || {
        section
            .p
            .ok_or_else(|| ConfigError::Invalid(format!("{which}: family `{}` needs `p`", section.family)))
    };
    let need_q = || {
        section
            .q
            .ok_or_else(|| ConfigError::Invalid(format!("{which}: family `{}` needs `q`", section.family)))
    };
    let family = match section.family.as_str() {
        "elasticity" => PhiFamily::Elasticity { p: need_p()? },
        "plasticity" => PhiFamily::Plasticity {
            p: need_p()?,
            q: need_q()?,
        },
        "generalized-newtonian" => PhiFamily::GeneralizedNewtonian {
            p: need_p()?,
            q: need_q()?,
        },
        "plasma-physics" => PhiFamily::PlasmaPhysics {
            p: need_p()?,
            q: need_q()?,
        },
        "power-law" => PhiFamily::PowerLaw { p: need_p()? },
        "custom" => {
            let text = section.phi.as_deref().ok_or_else(|| {
                ConfigError::Invalid(format!("{which}: custom family needs `phi`"))
            })?;
            PhiFamily::Custom {
                phi: parse_expr(text, &["t"], &format!("{which}.phi"))?,
            }
        }
        other => {
            return Err(ConfigError::Invalid(format!(
                "{which}: unknown family `{other}`"
            )))
        }
    };
    Ok(PhiModel::with_theta_mode(family, theta)?)
}

fn build_nonlinearity(section: &NonlinearitySection, which: &str) -> Result<Nonlinearity, ConfigError> {
    match section.kind.as_str() {
        "power" => {
            let beta = section.beta.ok_or_else(|| {
                ConfigError::Invalid(format!("{which}: power kind needs `beta`"))
            })?;
            let alpha = section.alpha.ok_or_else(|| {
                ConfigError::Invalid(format!("{which}: power kind needs `alpha`"))
            })?;
            Ok(Nonlinearity::power(beta, alpha)?)
        }
        "custom" => {
            let get = |field: &Option<String>, name: &str| {
                field.clone().ok_or_else(|| {
                    ConfigError::Invalid(format!("{which}: custom kind needs `{name}`"))
                })
            };
            Ok(Nonlinearity::Custom {
                f: parse_expr(&get(&section.f, "f")?, &["u", "v"], &format!("{which}.f"))?,
                h: parse_expr(&get(&section.h, "h")?, &["t1", "t2"], &format!("{which}.h"))?,
                fbar: parse_expr(&get(&section.fbar, "fbar")?, &["s"], &format!("{which}.fbar"))?,
            })
        }
        other => Err(ConfigError::Invalid(format!(
            "{which}: unknown nonlinearity kind `{other}`"
        ))),
    }
}

impl RunConfig {
    pub fn theta_mode(&self, overrides: &Overrides) -> Result<ThetaMode, ConfigError> {
        if let Some(mode) = overrides.theta_mode {
            return Ok(mode);
        }
        match self.modes.theta.as_deref() {
            None => Ok(ThetaMode::default()),
            Some(text) => text.parse().map_err(ConfigError::Invalid),
        }
    }

    pub fn punder_variant(&self, overrides: &Overrides) -> Result<PunderVariant, ConfigError> {
        if let Some(v) = overrides.punder_variant {
            return Ok(v);
        }
        match self.modes.punder.as_deref() {
            None => Ok(PunderVariant::default()),
            Some(text) => text.parse().map_err(ConfigError::Invalid),
        }
    }

    pub fn numerics(&self) -> Numerics {
        let n = &self.numerics;
        Numerics {
            radius: n.radius,
            grid_points: n.grid_points,
            grading: n.grading,
            tolerance: n.tolerance,
            max_iterations: n.max_iterations,
            arg_cap: n.arg_cap,
            arg_points: n.arg_points,
            probe_start: n.probe_start.unwrap_or(n.radius),
            probe_doublings: n.probe_doublings,
            probe_grading: n.probe_grading,
            converge_eps: n.converge_eps,
            diverge_factor: n.diverge_factor,
            diverge_increment: n.diverge_increment,
        }
    }

    /// Compile expressions, instantiate models, and assemble the spec.
    pub fn build_spec(&self, overrides: &Overrides) -> Result<ProblemSpec, ConfigError> {
        let theta = self.theta_mode(overrides)?;
        let punder = self.punder_variant(overrides)?;
        let p = &self.problem;
        let eq = |model: &ModelSection,
                  sigma: &str,
                  coeff: &str,
                  f: &NonlinearitySection,
                  a: f64,
                  m: Option<f64>,
                  which: usize|
         -> Result<Equation, ConfigError> {
            Ok(Equation {
                model: build_model(model, theta, &format!("model{which}"))?,
                sigma: parse_expr(sigma, &["r"], &format!("sigma{which}"))?,
                p: parse_expr(coeff, &["r"], &format!("p{which}"))?,
                f: build_nonlinearity(f, &format!("f{which}"))?,
                a,
                m: m.unwrap_or_else(|| 1f64.max(1.0 / a)),
            })
        };
        let eq1 = eq(&p.model1, &p.sigma1, &p.p1, &p.f1, p.a1, p.m1, 1)?;
        let eq2 = eq(&p.model2, &p.sigma2, &p.p2, &p.f2, p.a2, p.m2, 2)?;
        Ok(ProblemSpec::new(
            p.dimension,
            [eq1, eq2],
            self.numerics(),
            punder,
        )?)
    }
}

/// Replace the value at a dotted path inside a TOML document.
pub fn set_path(root: &mut toml::Value, dotted: &str, value: toml::Value) -> Result<(), ConfigError> {
    let mut current = root;
    let parts: Vec<&str> = dotted.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let table = current
            .as_table_mut()
            .ok_or_else(|| ConfigError::BadSweepKey(dotted.to_string()))?;
        if i + 1 == parts.len() {
            table.insert(part.to_string(), value);
            return Ok(());
        }
        current = table
            .get_mut(*part)
            .ok_or_else(|| ConfigError::BadSweepKey(dotted.to_string()))?;
    }
    Err(ConfigError::BadSweepKey(dotted.to_string()))
}
