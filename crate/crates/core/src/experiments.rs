//! Command implementations shared by the CLI and the tests.

use std::fmt::Write as _;

use serde::Serialize;

use crate::config::{Experiment, ExperimentConfig, TimeSpec};
use crate::csv::{self, ApproxColumns};
use crate::error::{Error, Result};
use crate::integrator::{integrate, sweep as run_sweep, Trajectory};
use crate::model::{FieldSchedule, SpinState, Vec3};
use crate::mts::SwitchingApprox;
use crate::planner::{admissible_b, planned_state_check, AdmissibleField, PlannedState, SwitchPlan};

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::ThresholdExceeded { .. } => 3,
        Error::Infeasible { .. } => 4,
        Error::StepSizeUnderflow { .. } | Error::NormBreach { .. } => 5,
        _ => 2,
    }
}

pub const EXIT_VALIDATION: i32 = 6;

/// Command-line overrides applied before resolution.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub t_star: Option<TimeSpec>,
    pub stride: Option<usize>,
    pub with_approx: bool,
}

impl Overrides {
    pub fn apply(&self, cfg: &ExperimentConfig) -> ExperimentConfig {
        let mut cfg = cfg.clone();
        if let Some(t) = self.t_star {
            cfg.schedule.t_star = t;
        }
        if let Some(s) = self.stride {
            cfg.output.stride = s;
        }
        cfg.output.with_approx |= self.with_approx;
        cfg
    }
}

#[derive(Debug, Clone, Serialize)]
struct DerivedParams {
    alpha: f64,
    eta: f64,
    alpha_hat: f64,
    eta_hat: f64,
    epsilon: f64,
    mu: f64,
    omega: f64,
    omega_hat: f64,
    h_a: [f64; 3],
    h_hat: [f64; 3],
    e_hat_diag: [f64; 3],
}

#[derive(Debug, Clone, Serialize)]
struct PlanFile {
    t_star: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    window: Option<[f64; 2]>,
    plan: SwitchPlan,
    parameters: DerivedParams,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    admissible: Vec<AdmissibleField>,
}

pub struct PlanOutput {
    pub plan: SwitchPlan,
    pub check: PlannedState,
    pub admissible: Vec<AdmissibleField>,
    pub text: String,
    /// TOML rendering of the plan and derived parameters.
    pub file: String,
}

fn derived(exp: &Experiment) -> DerivedParams {
    let sp = &exp.scaled;
    let h = sp.h_a();
    DerivedParams {
        alpha: exp.material.alpha,
        eta: exp.material.eta,
        alpha_hat: sp.alpha_hat,
        eta_hat: sp.eta_hat,
        epsilon: sp.epsilon,
        mu: sp.mu,
        omega: sp.omega,
        omega_hat: sp.omega_hat,
        h_a: [h.x, h.y, h.z],
        h_hat: [sp.h_hat.x, sp.h_hat.y, sp.h_hat.z],
        e_hat_diag: [sp.e_hat[(0, 0)], sp.e_hat[(1, 1)], sp.e_hat[(2, 2)]],
    }
}

/// Feasible switching plan with the first-order state check at the chosen `t_star`.
pub fn plan(cfg: &ExperimentConfig) -> Result<PlanOutput> {
    let exp = cfg.resolve()?;
    let sp = &exp.scaled;
    let plan = match exp.plan {
        Some(p) if p.is_feasible() => p,
        Some(p) => return Err(Error::Infeasible { xi: p.xi, ratio: 2.0 * sp.mu * sp.omega_hat }),
        None => return Err(crate::planner::compute_plan(sp).expect_err("plan absent only on error")),
    };
    let check = planned_state_check(sp, exp.t_star)?;
    let admissible = cfg
        .output
        .admissible_n_max
        .map(|n| admissible_b(sp.mu, sp.alpha_hat, sp.eta_hat, &sp.d, n))
        .unwrap_or_default();

    let mut text = String::new();
    let _ = writeln!(text, "case        {}", plan.case);
    let _ = writeln!(text, "T_sw        {:.6e}", plan.t_sw);
    let _ = writeln!(text, "delta_sw    {:.6e}", plan.delta_sw);
    match plan.delta_sw_star {
        Some(d) => {
            let _ = writeln!(text, "delta_sw*   {d:.6e}");
        }
        None => {
            let _ = writeln!(text, "delta_sw*   -");
        }
    }
    if let Some((lo, hi)) = plan.window() {
        let _ = writeln!(text, "window      [{lo:.6e}, {hi:.6e}]");
    }
    let _ = writeln!(text, "Xi          {:.6e}", plan.xi);
    let _ = writeln!(text, "K_f         {:.6e}", plan.k_f);
    let _ = writeln!(text, "mu          {:.6e}", sp.mu);
    let _ = writeln!(text, "mu0_tilde   {:.6e}", plan.mu0_tilde);
    let _ = writeln!(text, "omega_hat   {:.6e}", sp.omega_hat);
    let _ = writeln!(text, "t_star      {:.6e}", exp.t_star);
    let _ = writeln!(
        text,
        "W_hat(t*)   {:.6e} (margin {:.6e}, {:?})",
        check.w_hat, check.margin, check.verdict
    );
    if let Some(w) = &check.warning {
        let _ = writeln!(text, "warning     {w}");
    }
    if !admissible.is_empty() {
        let _ = writeln!(text, "admissible field magnitudes (n, b_n, Xi_n):");
        for a in &admissible {
            let _ = writeln!(text, "  {:>4} {:.6e} {:.6e}", a.n, a.b, a.xi);
        }
    }

    let file = toml::to_string(&PlanFile {
        t_star: exp.t_star,
        window: plan.window().map(|(a, b)| [a, b]),
        plan,
        parameters: derived(&exp),
        admissible: admissible.clone(),
    })
    .map_err(|e| Error::Config(e.to_string()))?;
    Ok(PlanOutput { plan, check, admissible, text, file })
}

pub struct SimulateOutput {
    pub trajectory: Trajectory,
    pub csv: String,
    pub summary: String,
}

fn approx_for(exp: &Experiment) -> Result<SwitchingApprox> {
    SwitchingApprox::new(&exp.scaled)
}

pub fn simulate(cfg: &ExperimentConfig) -> Result<SimulateOutput> {
    let exp = cfg.resolve()?;
    let approx = if cfg.output.with_approx { Some(approx_for(&exp)?) } else { None };
    let z0 = SpinState::at_rest(Vec3::x())?;
    let schedule = FieldSchedule::new(exp.scaled.h_a(), exp.t_star);
    let trajectory = integrate(&z0, &schedule, &exp.material, &exp.integrator)?;
    let columns = approx.as_ref().map(|a| ApproxColumns { approx: a, scale: exp.scaled.time_map().scale() });
    let prov = csv::provenance(cfg.name.as_deref(), &exp);
    let csv = csv::trajectory_csv(&trajectory, &prov, columns.as_ref());

    let last = trajectory.final_sample();
    let d = &trajectory.diagnostics;
    let mut summary = String::new();
    let _ = writeln!(summary, "outcome            {}", trajectory.outcome);
    let _ = writeln!(summary, "certified outcome  {}", trajectory.certified_outcome());
    if let Some((t, v)) = trajectory.basin_entry {
        let _ = writeln!(summary, "basin entry        t = {t:.6e} ({v:?})");
    }
    let _ = writeln!(summary, "t_final            {:.6e}", last.t);
    let _ = writeln!(summary, "|m + e1|           {:.6e}", (last.state.m + Vec3::x()).norm());
    let _ = writeln!(summary, "|v|                {:.6e}", last.state.v.norm());
    let _ = writeln!(summary, "W                  {:.6e}", last.w);
    let _ = writeln!(summary, "max norm drift     {:.3e}", d.max_norm_drift);
    let _ = writeln!(summary, "max W increase     {:.3e}", d.max_energy_increase);
    let _ = writeln!(summary, "steps              {} accepted, {} rejected", d.accepted_steps, d.rejected_steps);
    let _ = writeln!(summary, "samples            {}", trajectory.samples.len());
    Ok(SimulateOutput { trajectory, csv, summary })
}

/// Switch-off grid: explicit, or `points` values across `T_sw +- half_width * window`.
pub fn sweep_grid(cfg: &ExperimentConfig, exp: &Experiment) -> Result<Vec<f64>> {
    let block = cfg.sweep.as_ref().ok_or_else(|| Error::Config("missing [sweep] section".into()))?;
    if let Some(grid) = &block.t_star {
        return Ok(grid.clone());
    }
    let plan = exp.plan.filter(|p| p.is_feasible()).ok_or_else(|| {
        Error::Config("a centred sweep grid needs a feasible plan; give sweep.t_star explicitly".into())
    })?;
    let half = plan.delta_sw_star.unwrap_or(plan.delta_sw) * block.half_width.unwrap_or(3.0);
    let points = block.points.unwrap_or(13);
    if points < 2 {
        return Ok(vec![plan.t_sw; points]);
    }
    Ok((0..points)
        .map(|k| plan.t_sw - half + 2.0 * half * k as f64 / (points - 1) as f64)
        .collect())
}

pub fn sweep(cfg: &ExperimentConfig) -> Result<String> {
    let exp = cfg.resolve()?;
    let grid = sweep_grid(cfg, &exp)?;
    let z0 = SpinState::at_rest(Vec3::x())?;
    let points = run_sweep(&z0, &exp.material, &exp.scaled.h_a(), &exp.integrator, &grid)
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let prov = csv::provenance(cfg.name.as_deref(), &exp);
    Ok(csv::sweep_csv(&points, &prov))
}

/// Closed forms on `[0, 2 T_sw]` without integration.
pub fn approx(cfg: &ExperimentConfig, points: usize) -> Result<String> {
    let exp = cfg.resolve()?;
    let a = approx_for(&exp)?;
    let scale = exp.scaled.time_map().scale();
    let t_end = 2.0 * scale * a.tau_sw();
    let prov = csv::provenance(cfg.name.as_deref(), &exp);
    Ok(csv::approx_csv(&ApproxColumns { approx: &a, scale }, t_end, points, &prov))
}
