//! TOML experiment descriptions and their resolution into model parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::ScaledParams;
use crate::integrator::IntegratorConfig;
use crate::model::{MaterialParams, Vec3};
use crate::planner::{compute_plan, SwitchPlan};

/// Either a literal time or `"auto"`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "RawTime", into = "RawTime")]
pub enum TimeSpec {
    #[default]
    Auto,
    At(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawTime {
    Number(f64),
    Word(String),
}

impl TryFrom<RawTime> for TimeSpec {
    type Error = String;

    fn try_from(raw: RawTime) -> std::result::Result<Self, String> {
        match raw {
            RawTime::Number(x) => Ok(TimeSpec::At(x)),
            RawTime::Word(w) if w == "auto" => Ok(TimeSpec::Auto),
            RawTime::Word(w) => Err(format!("expected a number or \"auto\", got \"{w}\"")),
        }
    }
}

impl From<TimeSpec> for RawTime {
    fn from(t: TimeSpec) -> Self {
        match t {
            TimeSpec::Auto => RawTime::Word("auto".into()),
            TimeSpec::At(x) => RawTime::Number(x),
        }
    }
}

impl std::str::FromStr for TimeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(TimeSpec::Auto);
        }
        s.parse::<f64>()
            .map(TimeSpec::At)
            .map_err(|_| Error::Config(format!("expected a number or \"auto\", got \"{s}\"")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialBlock {
    pub d: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_hat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_hat: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldBlock {
    /// Physical field.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_a: Option<[f64; 3]>,
    /// Rescaled field `epsilon h_a`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_hat: Option<[f64; 3]>,
    /// Rescaled magnitude along `axis`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    /// Rescaled magnitude `b_n = sqrt(alpha_hat) / (2 mu eta_hat n)` along `axis`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    /// Axis (2 or 3) used with `b` or `n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<u8>,
    /// Move `b` to the nearest `b_n`.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub snap: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleBlock {
    #[serde(default)]
    pub t_star: TimeSpec,
    /// End of the run; `auto` is `100 T_sw`.
    #[serde(default)]
    pub t_end: TimeSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorBlock {
    pub rel_tol: f64,
    pub abs_tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_step: Option<f64>,
    pub renormalize: bool,
    pub convergence_tol: f64,
    pub max_wall_steps: usize,
    pub stop_on_convergence: bool,
}

impl Default for IntegratorBlock {
    fn default() -> Self {
        let d = IntegratorConfig::default();
        Self {
            rel_tol: d.rel_tol,
            abs_tol: d.abs_tol,
            max_step: None,
            renormalize: d.renormalize,
            convergence_tol: d.convergence_tol,
            max_wall_steps: d.max_wall_steps,
            stop_on_convergence: d.stop_on_convergence,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputBlock {
    pub stride: usize,
    pub with_approx: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<String>,
    /// Largest `n` listed in the admissible field table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub admissible_n_max: Option<u32>,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self { stride: 1, with_approx: false, trajectory: None, plan: None, admissible_n_max: None }
    }
}

/// Sweep grid over switch-off times, either explicit or centred on `T_sw`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_star: Option<Vec<f64>>,
    /// Half width of the centred grid in units of the plan window half width.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub material: MaterialBlock,
    pub scaling: ScalingBlock,
    pub field: FieldBlock,
    #[serde(default)]
    pub schedule: ScheduleBlock,
    #[serde(default)]
    pub integrator: IntegratorBlock,
    #[serde(default)]
    pub output: OutputBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepBlock>,
}

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| cfg_err(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| cfg_err(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => cfg_err(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Resolves the hatted parameters and the field.
    pub fn scaled(&self) -> Result<ScaledParams> {
        let m = &self.material;
        let s = &self.scaling;
        let (alpha_hat, eta_hat, epsilon) = match (m.alpha, m.eta, m.alpha_hat, m.eta_hat) {
            (Some(alpha), Some(eta), None, None) => {
                let eps = match (s.epsilon, s.mu) {
                    (Some(e), None) => e,
                    _ => return Err(cfg_err("with physical alpha, eta give scaling.epsilon (mu = sqrt(alpha) is fixed)")),
                };
                positive("scaling.epsilon", eps)?;
                (alpha / (eps * eps), eta / (eps * eps), eps)
            }
            (None, None, Some(ah), Some(eh)) => {
                positive("material.alpha_hat", ah)?;
                let eps = match (s.epsilon, s.mu) {
                    (Some(e), None) => e,
                    (None, Some(mu)) => mu / ah.sqrt(),
                    _ => return Err(cfg_err("give exactly one of scaling.epsilon, scaling.mu")),
                };
                (ah, eh, eps)
            }
            _ => return Err(cfg_err("give exactly one of (alpha, eta) or (alpha_hat, eta_hat) in [material]")),
        };
        positive("scaling.epsilon", epsilon)?;
        positive("alpha_hat", alpha_hat)?;
        positive("eta_hat", eta_hat)?;
        let mu = alpha_hat.sqrt() * epsilon;

        let f = &self.field;
        let axis_vec = |axis: Option<u8>| -> Result<Vec3> {
            match axis.unwrap_or(2) {
                2 => Ok(Vec3::y()),
                3 => Ok(Vec3::z()),
                a => Err(cfg_err(format!("field.axis must be 2 or 3, got {a}"))),
            }
        };
        let b_of_n = |n: u32| alpha_hat.sqrt() / (2.0 * mu * eta_hat * n as f64);
        let given = [f.h_a.is_some(), f.h_hat.is_some(), f.b.is_some(), f.n.is_some()];
        if given.iter().filter(|&&g| g).count() != 1 {
            return Err(cfg_err("give exactly one of field.h_a, field.h_hat, field.b, field.n"));
        }
        if f.axis.is_some() && f.b.is_none() && f.n.is_none() {
            return Err(cfg_err("field.axis only applies to field.b or field.n"));
        }
        let mut h_hat = if let Some(h) = f.h_a {
            epsilon * Vec3::from(h)
        } else if let Some(h) = f.h_hat {
            Vec3::from(h)
        } else if let Some(b) = f.b {
            b * axis_vec(f.axis)?
        } else {
            let n = f.n.expect("one field form is present");
            if n == 0 {
                return Err(cfg_err("field.n must be >= 1"));
            }
            b_of_n(n) * axis_vec(f.axis)?
        };
        if f.snap {
            let b = h_hat.norm();
            let n = (b_of_n(1) / b).round().max(1.0) as u32;
            h_hat *= b_of_n(n) / b;
        }
        let material = MaterialParams {
            d: m.d,
            alpha: alpha_hat * epsilon * epsilon,
            eta: eta_hat * epsilon * epsilon,
        };
        material.validate()?;
        ScaledParams::from_hatted(m.d, alpha_hat, eta_hat, h_hat, epsilon)
    }

    /// Fully resolved experiment.
    pub fn resolve(&self) -> Result<Experiment> {
        let scaled = self.scaled()?;
        let material = scaled.material()?;
        let t_sw_formula = scaled.time_map().t_of_tau(scaled.tau_sw());
        let plan = compute_plan(&scaled);
        let t_star = match self.schedule.t_star {
            TimeSpec::At(t) => t,
            TimeSpec::Auto => match &plan {
                Ok(p) if p.is_feasible() => p.t_sw,
                Ok(p) => {
                    return Err(Error::Infeasible { xi: p.xi, ratio: 2.0 * scaled.mu * scaled.omega_hat });
                }
                Err(_) => return Err(plan.unwrap_err()),
            },
        };
        let t_end = match self.schedule.t_end {
            TimeSpec::At(t) => t,
            TimeSpec::Auto => 100.0 * t_sw_formula,
        };
        let ib = &self.integrator;
        let integrator = IntegratorConfig {
            rel_tol: ib.rel_tol,
            abs_tol: ib.abs_tol,
            max_step: ib.max_step.unwrap_or(f64::INFINITY),
            renormalize: ib.renormalize,
            t_end,
            convergence_tol: ib.convergence_tol,
            max_wall_steps: ib.max_wall_steps,
            stride: self.output.stride,
            stop_on_convergence: ib.stop_on_convergence,
        };
        integrator.validate()?;
        Ok(Experiment { scaled, material, plan: plan.ok(), t_star, integrator })
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveScale { name, value })
    }
}

/// A configuration after all derived quantities have been computed.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub scaled: ScaledParams,
    pub material: MaterialParams,
    /// Plan when the switching hypotheses hold.
    pub plan: Option<SwitchPlan>,
    pub t_star: f64,
    pub integrator: IntegratorConfig,
}

/// Configurations shipped with the library.
pub const BUNDLED: [(&str, &str); 3] = [
    ("case1", include_str!("../configs/case1.toml")),
    ("case1b", include_str!("../configs/case1b.toml")),
    ("case2", include_str!("../configs/case2.toml")),
];

pub fn bundled(name: &str) -> Result<ExperimentConfig> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| cfg_err(format!("no bundled config named {name}")))
        .and_then(|(_, text)| ExperimentConfig::from_toml(text))
}
