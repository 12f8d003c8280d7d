//! Run configuration, read from JSON and validated before any computation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{validate_levels, CaseKind, Problem, DEFAULT_ERROR_DEGREE};
use crate::assembly::DEFAULT_RHS_DEGREE;
use crate::elements::MAX_DEGREE;
use crate::error::{ConfigError, Error};
use crate::geometry::{Point, Rect};
use crate::level_set::LevelSet;
use crate::mesh::{Diagonal, DEFAULT_SNAP_TOL};
use crate::solver::{validate_tolerance, SolverKind, DEFAULT_TOL};

/// A length given either as a number or as an expression in `pi`
/// such as `"pi/7"` or `"2*pi/9"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Length {
    Value(f64),
    Expr(String),
}

impl Length {
    pub fn value(&self) -> Result<f64, String> {
        match self {
            Length::Value(v) => Ok(*v),
            Length::Expr(s) => parse_pi_expr(s),
        }
    }
}

/// Parses `[a*]pi[/b]` or a plain number.
fn parse_pi_expr(s: &str) -> Result<f64, String> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot read `{s}` as a number or an expression like `pi/7`");
    let (num, den) = match compact.split_once('/') {
        Some((n, d)) => (n, Some(d.parse::<f64>().map_err(|_| bad())?)),
        None => (compact.as_str(), None),
    };
    let num = match num.strip_suffix("pi") {
        Some("") => std::f64::consts::PI,
        Some(coef) => {
            let coef = coef.strip_suffix('*').unwrap_or(coef);
            coef.parse::<f64>().map_err(|_| bad())? * std::f64::consts::PI
        }
        None => num.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(match den {
        Some(d) => num / d,
        None => num,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LevelSetConfig {
    Circle { center: [f64; 2], radius: Length },
    None,
}

fn default_domain() -> [f64; 4] {
    [-1.0, 1.0, -1.0, 1.0]
}

fn default_level_set() -> LevelSetConfig {
    LevelSetConfig::Circle {
        center: [0.0, 0.0],
        radius: Length::Expr("pi/7".into()),
    }
}

fn default_mu() -> f64 {
    1.0
}

fn default_n() -> usize {
    16
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_rhs_degree() -> usize {
    DEFAULT_RHS_DEGREE
}

fn default_error_degree() -> usize {
    DEFAULT_ERROR_DEGREE
}

fn default_snap_tol() -> f64 {
    DEFAULT_SNAP_TOL
}

fn default_infsup_levels() -> Vec<usize> {
    vec![8, 16, 32]
}

fn default_s() -> f64 {
    1.0 / 3.0
}

fn default_t() -> f64 {
    0.5
}

/// Every field has a default, so `{}` is a valid configuration
/// (Example 1 with `μ₁ = μ₂ = 1` on `[−1, 1]²`, `n = 16`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// `[x0, x1, y0, y1]`; must be square.
    #[serde(default = "default_domain")]
    pub domain: [f64; 4],
    /// Subdivisions per axis for `mesh` and `solve`.
    #[serde(default = "default_n")]
    pub n: usize,
    /// Subdivisions per axis for `convergence`.
    #[serde(default)]
    pub levels: Vec<usize>,
    /// Subdivisions per axis for `infsup`.
    #[serde(default = "default_infsup_levels")]
    pub infsup_levels: Vec<usize>,
    #[serde(default = "default_level_set")]
    pub levelset: LevelSetConfig,
    #[serde(default = "default_mu")]
    pub mu1: f64,
    #[serde(default = "default_mu")]
    pub mu2: f64,
    #[serde(default)]
    pub example: CaseKind,
    #[serde(default)]
    pub solver: SolverKind,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_rhs_degree")]
    pub rhs_degree: usize,
    #[serde(default = "default_error_degree")]
    pub error_degree: usize,
    #[serde(default)]
    pub diagonal: Diagonal,
    #[serde(default = "default_snap_tol")]
    pub snap_tol: f64,
    /// Cut ratios for the `element` report.
    #[serde(default = "default_s")]
    pub s: f64,
    #[serde(default = "default_t")]
    pub t: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)?;
        Ok(Self::from_json(&text)?)
    }

    pub fn rect(&self) -> Rect {
        let [x0, x1, y0, y1] = self.domain;
        Rect::new(x0, x1, y0, y1)
    }

    pub fn level_set(&self) -> Result<Option<LevelSet>, ConfigError> {
        match &self.levelset {
            LevelSetConfig::None => Ok(None),
            LevelSetConfig::Circle { center, radius } => {
                let r = radius.value().map_err(|m| ConfigError::invalid("levelset.radius", m))?;
                LevelSet::circle(Point::new(center[0], center[1]), r)
                    .map(Some)
                    .map_err(|e| ConfigError::invalid("levelset.radius", e.to_string()))
            }
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let [x0, x1, y0, y1] = self.domain;
        if !self.domain.iter().all(|v| v.is_finite()) || x1 <= x0 || y1 <= y0 {
            return Err(ConfigError::invalid("domain", "need finite x0 < x1 and y0 < y1"));
        }
        if ((x1 - x0) - (y1 - y0)).abs() > 1e-12 * (x1 - x0) {
            return Err(ConfigError::invalid("domain", "cells must be square: width must equal height"));
        }
        if self.n < 1 {
            return Err(ConfigError::invalid("n", "need at least one subdivision"));
        }
        if !self.levels.is_empty() {
            validate_levels(&self.levels).map_err(|e| rename_field(e, "levels"))?;
        }
        if self.infsup_levels.is_empty() || self.infsup_levels.contains(&0) {
            return Err(ConfigError::invalid("infsup_levels", "need positive subdivisions"));
        }
        for (field, mu) in [("mu1", self.mu1), ("mu2", self.mu2)] {
            if !(mu.is_finite() && mu > 0.0) {
                return Err(ConfigError::invalid(field, format!("viscosity must be positive, got {mu}")));
            }
        }
        validate_tolerance(self.tol).map_err(|e| ConfigError::invalid("tol", e.to_string()))?;
        for (field, d) in [("rhs_degree", self.rhs_degree), ("error_degree", self.error_degree)] {
            if d == 0 || d > MAX_DEGREE {
                return Err(ConfigError::invalid(field, format!("quadrature degree must lie in 1..={MAX_DEGREE}")));
            }
        }
        if !(self.snap_tol > 0.0 && self.snap_tol < 0.5) {
            return Err(ConfigError::invalid("snap_tol", "must lie in (0, 0.5)"));
        }
        if !(self.s > 0.0 && self.s <= self.t && self.t < 1.0) {
            return Err(ConfigError::invalid("s", "cut ratios need 0 < s <= t < 1"));
        }
        let ls = self.level_set()?;
        if self.example == CaseKind::Example1 && ls.is_none() {
            return Err(ConfigError::invalid("levelset", "example1 requires a level set"));
        }
        Ok(())
    }

    pub fn problem(&self) -> Result<Problem, ConfigError> {
        Ok(Problem {
            domain: self.rect(),
            level_set: self.level_set()?,
            mu: (self.mu1, self.mu2),
            case: self.example,
            diagonal: self.diagonal,
            snap_tol: self.snap_tol,
            rhs_degree: self.rhs_degree,
            error_degree: self.error_degree,
            solver: self.solver,
            tol: self.tol,
        })
    }
}

fn rename_field(e: ConfigError, field: &str) -> ConfigError {
    match e {
        ConfigError::Invalid { message, .. } => ConfigError::invalid(field, message),
        other => other,
    }
}
