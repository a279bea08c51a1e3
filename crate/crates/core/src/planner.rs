//! Switching plans: switch-off time, safe windows, feasibility cases and the
//! energy sublevel test for the target basin.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Threshold};
use crate::frames::{build_scaled, ScaledParams};
use crate::model::{anisotropy_energy, d_diff, energy_w, MaterialParams, SpinState, Vec3};
use crate::mts::{is_simplified, thresholds, ApproxSolution, SwitchingApprox};

/// Relative tolerance on `2 mu n omega_hat = 1`.
pub const CASE_II_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlanCase {
    /// `Xi >= 1`: the kinetic margin holds for every switch-off time.
    CaseI,
    /// `omega_hat = 1/(2 mu n)`: the pulse spans exactly `n` nutation periods.
    CaseII(u32),
    Infeasible,
}

impl std::fmt::Display for PlanCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PlanCase::CaseI => write!(f, "case_i"),
            PlanCase::CaseII(n) => write!(f, "case_ii(n={n})"),
            PlanCase::Infeasible => write!(f, "infeasible"),
        }
    }
}

/// Switching plan in original time units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchPlan {
    pub t_sw: f64,
    pub delta_sw: f64,
    pub delta_sw_star: Option<f64>,
    pub xi: f64,
    pub k_f: f64,
    pub mu0_tilde: f64,
    pub case: PlanCase,
    /// Switching time in rescaled units, `pi / (mu omega_hat)`.
    pub tau_sw: f64,
}

impl SwitchPlan {
    /// Guaranteed switch-off window, if any.
    pub fn window(&self) -> Option<(f64, f64)> {
        let half = match self.case {
            PlanCase::CaseI => self.delta_sw,
            PlanCase::CaseII(_) => self.delta_sw_star?,
            PlanCase::Infeasible => return None,
        };
        Some((self.t_sw - half, self.t_sw + half))
    }

    pub fn is_feasible(&self) -> bool {
        self.case != PlanCase::Infeasible
    }
}

fn check_simplified(sp: &ScaledParams) -> Result<()> {
    let h = sp.h_hat;
    if h.x * h.z != 0.0 {
        return Err(Error::NotSimplified(format!("h1 * h3 = {} must vanish", h.x * h.z)));
    }
    if !is_simplified(&sp.e_hat) {
        return Err(Error::NotSimplified(format!(
            "E_hat not diagonal: (e12, e13, e23) = ({:e}, {:e}, {:e})",
            sp.e_hat[(0, 1)],
            sp.e_hat[(0, 2)],
            sp.e_hat[(1, 2)]
        )));
    }
    Ok(())
}

/// `D21 eta_hat / (8 alpha_hat omega_hat^2)`.
pub fn xi(d: &[f64; 3], alpha_hat: f64, eta_hat: f64, omega_hat: f64) -> f64 {
    d_diff(d, 2, 1) * eta_hat / (8.0 * alpha_hat * omega_hat * omega_hat)
}

/// `D31 / (4 D21)`.
pub fn k_f(d: &[f64; 3]) -> f64 {
    d_diff(d, 3, 1) / (4.0 * d_diff(d, 2, 1))
}

/// Resolves the plan case from `Xi` and `2 mu omega_hat`.
pub fn resolve_case(xi: f64, mu: f64, omega_hat: f64) -> PlanCase {
    if xi >= 1.0 {
        return PlanCase::CaseI;
    }
    let ratio = 2.0 * mu * omega_hat;
    let n = (1.0 / ratio).round();
    if n >= 1.0 && n <= u32::MAX as f64 && (ratio * n - 1.0).abs() <= CASE_II_TOL {
        PlanCase::CaseII(n as u32)
    } else {
        PlanCase::Infeasible
    }
}

/// `(delta_sw, delta_sw_star)`; the second only in case ii.
pub fn safe_half_widths(
    mu: f64,
    omega_hat: f64,
    alpha_hat: f64,
    eta_hat: f64,
    xi: f64,
    k_f: f64,
    case: PlanCase,
) -> (f64, Option<f64>) {
    let unit = mu * eta_hat / (omega_hat * alpha_hat);
    let y = ((mu * mu * omega_hat * omega_hat + k_f).sqrt() - mu * omega_hat).min(1.0);
    let delta_sw = unit * y.asin();
    let star = match case {
        PlanCase::CaseII(_) => Some(delta_sw.min(mu * mu * (eta_hat / alpha_hat) * (1.0 - xi).acos())),
        _ => None,
    };
    (delta_sw, star)
}

pub fn compute_plan(sp: &ScaledParams) -> Result<SwitchPlan> {
    check_simplified(sp)?;
    let (mu, w) = (sp.mu, sp.omega_hat);
    let (ah, eh) = (sp.alpha_hat, sp.eta_hat);
    let mu0_tilde = thresholds(PI / 2.0, w, &sp.e_hat)?.mu0_tilde;
    if mu > mu0_tilde {
        return Err(Error::ThresholdExceeded { mu, threshold: mu0_tilde, which: Threshold::Simplified });
    }

    let xi = xi(&sp.d, ah, eh, w);
    let k_f = k_f(&sp.d);
    let t_sw = mu * eh / (w * ah) * PI;
    let case = resolve_case(xi, mu, w);
    let (delta_sw, delta_sw_star) = safe_half_widths(mu, w, ah, eh, xi, k_f, case);
    Ok(SwitchPlan {
        t_sw,
        delta_sw,
        delta_sw_star,
        xi,
        k_f,
        mu0_tilde,
        case,
        tau_sw: PI / (mu * w),
    })
}

/// One admissible field magnitude of the discrete family `omega_hat = 1/(2 mu n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleField {
    pub n: u32,
    pub b: f64,
    pub xi: f64,
}

/// Field magnitudes `b_n` (field `(0, b_n, 0)` in hatted units) with `Xi_n < 1`, `n <= n_max`.
pub fn admissible_b(mu: f64, alpha_hat: f64, eta_hat: f64, d: &[f64; 3], n_max: u32) -> Vec<AdmissibleField> {
    (1..=n_max)
        .map(|n| {
            let b = alpha_hat.sqrt() / (2.0 * mu * eta_hat * n as f64);
            let w = eta_hat * b / alpha_hat.sqrt();
            AdmissibleField { n, b, xi: xi(d, alpha_hat, eta_hat, w) }
        })
        .take_while(|f| f.xi < 1.0)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasinVerdict {
    InMinusBasin,
    InPlusBasin,
    Outside,
}

/// Sublevel test `W <= D21/3` at zero field; the component is the sign of `m1`.
pub fn basin_membership(z: &SpinState, p: &MaterialParams) -> BasinVerdict {
    let w = energy_w(z, &Vec3::zeros(), p);
    if w > p.d_diff(2, 1) / 3.0 || z.m.x == 0.0 {
        return BasinVerdict::Outside;
    }
    if z.m.x < 0.0 {
        BasinVerdict::InMinusBasin
    } else {
        BasinVerdict::InPlusBasin
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StateVerdict {
    MarginMet,
    MarginViolated,
}

/// First-order prediction of the state at the switch-off instant.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannedState {
    pub tau_star: f64,
    /// `alpha_hat omega_hat^2 / eta_hat (1 - cos tau)`.
    pub kinetic: f64,
    /// `h(m^[<=1])` at zero field.
    pub potential: f64,
    pub w_hat: f64,
    /// `D21 / 4`.
    pub margin: f64,
    pub m: Vec3,
    pub verdict: StateVerdict,
    /// Set when `t_star` lies outside `[T_sw - delta_sw, T_sw + delta_sw]`.
    pub warning: Option<String>,
}

pub fn planned_state_check(sp: &ScaledParams, t_star: f64) -> Result<PlannedState> {
    let plan = compute_plan(sp)?;
    let approx = SwitchingApprox::new(sp)?;
    let tau_star = sp.time_map().tau_of_t(t_star);
    let m = approx.m_leq1(tau_star);
    let v = approx.velocity_leq1(tau_star);
    let kinetic = sp.alpha_hat / (2.0 * sp.eta_hat * sp.mu * sp.mu) * v.norm_squared();
    let potential = anisotropy_energy(&m, &Vec3::zeros(), &sp.d);
    let w_hat = kinetic + potential;
    let margin = d_diff(&sp.d, 2, 1) / 4.0;
    let verdict = if w_hat <= margin * (1.0 + 1e-12) && m.x < 0.0 {
        StateVerdict::MarginMet
    } else {
        StateVerdict::MarginViolated
    };
    let warning = ((t_star - plan.t_sw).abs() > plan.delta_sw).then(|| {
        format!(
            "t_star = {t_star} outside [T_sw - delta_sw, T_sw + delta_sw] = [{}, {}]",
            plan.t_sw - plan.delta_sw,
            plan.t_sw + plan.delta_sw
        )
    });
    Ok(PlannedState { tau_star, kinetic, potential, w_hat, margin, m, verdict, warning })
}

/// Trajectory approximation for arbitrary initial direction at rest.
pub fn run_algorithm_1(p: &MaterialParams, h_a: &Vec3, epsilon: f64, m0: &Vec3) -> Result<ApproxSolution> {
    let sp = build_scaled(p, h_a, epsilon)?;
    ApproxSolution::new(&sp, m0)
}

/// Feasible plan and the chosen switch-off time (the window centre).
pub fn run_algorithm_2(p: &MaterialParams, h_a: &Vec3, epsilon: f64) -> Result<(SwitchPlan, f64)> {
    let sp = build_scaled(p, h_a, epsilon)?;
    let plan = compute_plan(&sp)?;
    if !plan.is_feasible() {
        return Err(Error::Infeasible { xi: plan.xi, ratio: 2.0 * sp.mu * sp.omega_hat });
    }
    Ok((plan, plan.t_sw))
}
