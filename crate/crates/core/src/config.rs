//! TOML scenario configuration.
//!
//! Top-level tables: `metric`, `oneform`, `coefficients`, `domain` (required)
//! and `sampling`, `tolerances`, `decide`, `verify`, `integrate` (optional).
//! Validation collects every problem it finds, each prefixed by its path.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::catalog::{MetricSpec, OneFormSpec};
use crate::error::{Error, Result};
use crate::finsler::{AlphaBetaCase, Cone, FreeFunction};
use crate::metrizability::{CaseConstants, Tolerances};
use crate::sampling::Domain;
use crate::verification::VerifyTolerances;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coefficients {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sampling {
    /// Points used for constraint fitting.
    pub count: usize,
    pub seed: u64,
    pub delta_a: f64,
    pub delta_b: f64,
}

impl Default for Sampling {
    fn default() -> Self {
        Self { count: 200, seed: 1, delta_a: 1e-6, delta_b: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecideConfig {
    pub kappa: f64,
    pub cone: Cone,
    pub bins: usize,
    pub integral_anchor: Option<f64>,
    pub free_function: Option<FreeFunction>,
    pub constants: CaseConstants,
    pub soundness_samples: usize,
    pub berwald_points: usize,
}

impl Default for DecideConfig {
    fn default() -> Self {
        Self {
            kappa: 1.0,
            cone: Cone::Any,
            bins: 64,
            integral_anchor: None,
            free_function: None,
            constants: CaseConstants::default(),
            soundness_samples: 1000,
            berwald_points: 20,
        }
    }
}

/// A Lagrangian given directly instead of taken from `decide`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InlineLagrangian {
    /// L = a(v, v)
    Quadratic,
    AlphaBeta {
        kappa: f64,
        /// e.g. `{ case = "power-law", lambda = -1.0 }`
        case: AlphaBetaCase,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub samples: usize,
    pub initial_conditions: usize,
    pub step: f64,
    pub steps: usize,
    pub order_step: f64,
    /// Added to c1 of the connection the Lagrangian is checked against.
    pub perturb_c1: f64,
    pub lagrangian: Option<InlineLagrangian>,
    pub tolerances: VerifyTolerances,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            samples: 1000,
            initial_conditions: 10,
            step: 1e-3,
            steps: 1000,
            order_step: 0.1,
            perturb_c1: 0.0,
            lagrangian: None,
            tolerances: VerifyTolerances::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegrateKind {
    Autoparallel,
    Geodesic,
    #[default]
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialCondition {
    pub x: [f64; 4],
    pub v: [f64; 4],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegrateConfig {
    pub kind: IntegrateKind,
    pub step: f64,
    pub steps: usize,
    /// Explicit initial conditions; when empty, `count` are sampled.
    pub initial_conditions: Vec<InitialCondition>,
    pub count: usize,
    pub csv_dir: Option<String>,
    pub lagrangian: Option<InlineLagrangian>,
}

impl Default for IntegrateConfig {
    fn default() -> Self {
        Self {
            kind: IntegrateKind::Both,
            step: 1e-3,
            steps: 1000,
            initial_conditions: Vec::new(),
            count: 1,
            csv_dir: None,
            lagrangian: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    pub metric: MetricSpec,
    pub oneform: OneFormSpec,
    pub coefficients: Coefficients,
    pub domain: Domain,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub decide: DecideConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub integrate: IntegrateConfig,
}

const SECTIONS: [&str; 10] =
    ["name", "metric", "oneform", "coefficients", "domain", "sampling", "tolerances", "decide", "verify", "integrate"];

fn section<T: DeserializeOwned>(table: &toml::Table, key: &str, errors: &mut Vec<String>) -> Option<T> {
    match table.get(key) {
        None => {
            errors.push(format!("{key}: missing section"));
            None
        }
        Some(v) => match v.clone().try_into::<T>() {
            Ok(t) => Some(t),
            Err(e) => {
                errors.push(format!("{key}: {}", e.message().trim()));
                None
            }
        },
    }
}

fn optional<T: DeserializeOwned + Default>(table: &toml::Table, key: &str, errors: &mut Vec<String>) -> T {
    if table.contains_key(key) {
        section(table, key, errors).unwrap_or_default()
    } else {
        T::default()
    }
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(vec![e.to_string()]))?;
    let mut errors = Vec::new();
    for k in table.keys() {
        if !SECTIONS.contains(&k.as_str()) {
            errors.push(format!("{k}: unknown section (expected one of {})", SECTIONS.join(", ")));
        }
    }
    let name = match table.get("name") {
        None => String::new(),
        Some(toml::Value::String(s)) => s.clone(),
        Some(_) => {
            errors.push("name: expected a string".into());
            String::new()
        }
    };
    let metric = section::<MetricSpec>(&table, "metric", &mut errors);
    let oneform = section::<OneFormSpec>(&table, "oneform", &mut errors);
    let coefficients = section::<Coefficients>(&table, "coefficients", &mut errors);
    let domain = section::<Domain>(&table, "domain", &mut errors);
    let sampling: Sampling = optional(&table, "sampling", &mut errors);
    let tolerances: Tolerances = optional(&table, "tolerances", &mut errors);
    let decide: DecideConfig = optional(&table, "decide", &mut errors);
    let verify: VerifyConfig = optional(&table, "verify", &mut errors);
    let integrate: IntegrateConfig = optional(&table, "integrate", &mut errors);

    if let Some(c) = &coefficients {
        if c.c1 == 0.0 && c.c2 == 0.0 && c.c3 == 0.0 {
            errors.push(
                "coefficients: coefficients not all zero: vectorial nonmetricity needs a nonzero c1, c2 or c3".into(),
            );
        }
        for (k, v) in [("c1", c.c1), ("c2", c.c2), ("c3", c.c3)] {
            if !v.is_finite() {
                errors.push(format!("coefficients.{k}: must be finite"));
            }
        }
    }
    if let Some(d) = &domain {
        for i in 0..4 {
            if !(d.min[i] <= d.max[i]) {
                errors.push(format!("domain.min[{i}]: {} exceeds domain.max[{i}] = {}", d.min[i], d.max[i]));
            }
        }
    }
    validate_rest(&sampling, &tolerances, &decide, &verify, &integrate, &mut errors);
    if !errors.is_empty() {
        return Err(Error::Config(errors));
    }
    Ok(ScenarioConfig {
        name,
        metric: metric.unwrap(),
        oneform: oneform.unwrap(),
        coefficients: coefficients.unwrap(),
        domain: domain.unwrap(),
        sampling,
        tolerances,
        decide,
        verify,
        integrate,
    })
}

fn validate_rest(
    s: &Sampling,
    t: &Tolerances,
    d: &DecideConfig,
    v: &VerifyConfig,
    i: &IntegrateConfig,
    errors: &mut Vec<String>,
) {
    let mut positive = |path: &str, x: f64| {
        if !(x > 0.0) || !x.is_finite() {
            errors.push(format!("{path}: must be positive, got {x}"));
        }
    };
    positive("sampling.delta_a", s.delta_a);
    positive("sampling.delta_b", s.delta_b);
    for (k, x) in [
        ("fit_residual", t.fit_residual),
        ("constancy", t.constancy),
        ("profile_spread", t.profile_spread),
        ("tau_formula", t.tau_formula),
        ("delta_l", t.delta_l),
        ("berwald", t.berwald),
        ("berwald_gamma", t.berwald_gamma),
        ("min_norm", t.min_norm),
    ] {
        positive(&format!("tolerances.{k}"), x);
    }
    positive("verify.step", v.step);
    positive("verify.order_step", v.order_step);
    positive("integrate.step", i.step);
    if s.count < 10 {
        errors.push(format!("sampling.count: must be at least 10, got {}", s.count));
    }
    if d.kappa == 0.0 || !d.kappa.is_finite() {
        errors.push("decide.kappa: must be finite and nonzero".into());
    }
    if d.bins == 0 {
        errors.push("decide.bins: must be at least 1".into());
    }
    if d.soundness_samples == 0 {
        errors.push("decide.soundness_samples: must be positive".into());
    }
    if d.berwald_points == 0 {
        errors.push("decide.berwald_points: must be positive".into());
    }
    if v.samples == 0 {
        errors.push("verify.samples: must be positive".into());
    }
    if v.initial_conditions == 0 {
        errors.push("verify.initial_conditions: must be positive".into());
    }
    if v.steps == 0 {
        errors.push("verify.steps: must be positive".into());
    }
    if i.steps == 0 {
        errors.push("integrate.steps: must be positive".into());
    }
    if i.initial_conditions.is_empty() && i.count == 0 {
        errors.push("integrate.count: must be positive when no initial_conditions are given".into());
    }
}

pub fn load_config(path: &std::path::Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}
