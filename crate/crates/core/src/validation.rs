//! Acceptance criteria as executable measurements with pass/fail judgements.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::{rngs::StdRng, Rng, SeedableRng};

use crate::config::{bundled, Experiment};
use crate::error::Result;
use crate::frames::{oracles::frame_oracles, ScaledParams};
use crate::integrator::{energy_audit_window, integrate, sweep, IntegratorConfig};
use crate::model::{energy_w, FieldSchedule, MaterialParams, SpinState, SwitchOutcome, Vec3};
use crate::mts::SwitchingApprox;
use crate::planner::{admissible_b, safe_half_widths, xi, SwitchPlan};

/// One measured quantity against its bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub label: String,
    pub measured: String,
    pub bound: String,
    pub pass: bool,
}

impl Check {
    /// `|measured / expected - 1| <= tol`.
    pub fn rel(label: impl Into<String>, measured: f64, expected: f64, tol: f64) -> Self {
        let dev = (measured / expected - 1.0).abs();
        Self {
            label: label.into(),
            measured: format!("{measured:.6e} (dev {:.3}%)", 100.0 * dev),
            bound: format!("{expected:.6e} +- {}%", 100.0 * tol),
            pass: dev <= tol,
        }
    }

    pub fn abs(label: impl Into<String>, measured: f64, expected: f64, tol: f64) -> Self {
        Self {
            label: label.into(),
            measured: format!("{measured:.6e}"),
            bound: format!("{expected:.6e} +- {tol:.1e}"),
            pass: (measured - expected).abs() <= tol,
        }
    }

    pub fn below(label: impl Into<String>, measured: f64, limit: f64) -> Self {
        Self {
            label: label.into(),
            measured: format!("{measured:.6e}"),
            bound: format!("< {limit:.3e}"),
            pass: measured < limit,
        }
    }

    pub fn at_most(label: impl Into<String>, measured: f64, limit: f64) -> Self {
        Self {
            label: label.into(),
            measured: format!("{measured:.6e}"),
            bound: format!("<= {limit:.6e}"),
            pass: measured <= limit,
        }
    }

    pub fn at_least(label: impl Into<String>, measured: f64, limit: f64) -> Self {
        Self {
            label: label.into(),
            measured: format!("{measured:.6e}"),
            bound: format!(">= {limit:.6e}"),
            pass: measured >= limit,
        }
    }

    pub fn equal<T: PartialEq + std::fmt::Display>(label: impl Into<String>, measured: T, expected: T) -> Self {
        Self {
            label: label.into(),
            measured: measured.to_string(),
            bound: format!("= {expected}"),
            pass: measured == expected,
        }
    }

    pub fn error(label: impl Into<String>, err: &crate::Error) -> Self {
        Self { label: label.into(), measured: format!("error: {err}"), bound: "no error".into(), pass: false }
    }
}

#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    pub checks: Vec<Check>,
    pub elapsed: Duration,
}

impl CriterionReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    /// `PASS`/`FAIL` summary line.
    pub fn line(&self) -> String {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        format!("{verdict} [{:>2}] {} ({:.1} s)", self.id, self.name, self.elapsed.as_secs_f64())
    }

    /// Summary line followed by one indented line per check.
    pub fn render(&self) -> String {
        let mut out = self.line();
        for c in &self.checks {
            let mark = if c.pass { "ok  " } else { "FAIL" };
            let _ = write!(out, "\n    {mark} {}: {} [{}]", c.label, c.measured, c.bound);
        }
        out
    }
}

fn timed(id: u8, name: &'static str, body: impl FnOnce() -> Result<Vec<Check>>) -> CriterionReport {
    let start = Instant::now();
    let checks = body().unwrap_or_else(|e| vec![Check::error("evaluation", &e)]);
    CriterionReport { id, name, checks, elapsed: start.elapsed() }
}

fn experiment(name: &str) -> Result<Experiment> {
    bundled(name)?.resolve()
}

/// Quantities judged by criterion 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Case1Numbers {
    pub t_sw: f64,
    pub delta_sw_star: f64,
    pub omega_hat: f64,
    pub b: f64,
    pub e_hat_diag: [f64; 3],
}

impl Case1Numbers {
    pub fn from_plan(sp: &ScaledParams, plan: &SwitchPlan) -> Self {
        Self {
            t_sw: plan.t_sw,
            delta_sw_star: plan.delta_sw_star.unwrap_or(f64::NAN),
            omega_hat: sp.omega_hat,
            b: sp.h_hat.norm(),
            e_hat_diag: [sp.e_hat[(0, 0)], sp.e_hat[(1, 1)], sp.e_hat[(2, 2)]],
        }
    }
}

pub fn judge_case1(n: &Case1Numbers) -> Vec<Check> {
    vec![
        Check::rel("T_sw", n.t_sw, 0.0635, 5e-3),
        Check::rel("delta_sw*", n.delta_sw_star, 1.367e-4, 5e-3),
        Check::rel("omega_hat / 2.7760 b", n.omega_hat / (2.7760 * n.b), 1.0, 1e-3),
        Check::rel("E_hat_11", n.e_hat_diag[0], -0.1990, 1e-3),
        Check::rel("E_hat_22", n.e_hat_diag[1], 1.8304, 1e-3),
        Check::abs("E_hat_33", n.e_hat_diag[2], 0.0, 1e-12),
    ]
}

pub fn criterion_1() -> CriterionReport {
    timed(1, "case-1 plan numbers", || {
        let exp = experiment("case1")?;
        let plan = crate::planner::compute_plan(&exp.scaled)?;
        let mut checks = vec![Check::rel("mu_A", exp.scaled.mu, 0.03033, 5e-4)];
        checks.extend(judge_case1(&Case1Numbers::from_plan(&exp.scaled, &plan)));
        Ok(checks)
    })
}

fn table_row(label: &str, exp: &Experiment, expected: [f64; 4]) -> Vec<Check> {
    let h = exp.scaled.h_a();
    let measured = [exp.material.alpha, exp.material.eta, exp.scaled.omega, h.y];
    ["alpha", "eta", "omega", "(h_a)_2"]
        .iter()
        .zip(measured.iter().zip(expected))
        .map(|(name, (&m, e))| Check::rel(format!("{label} {name}"), m, e, 5e-3))
        .collect()
}

pub fn criterion_2() -> CriterionReport {
    timed(2, "derived material table", || {
        let mut checks = table_row("mu_A", &experiment("case1")?, [9.20e-4, 1.68e-3, 0.9906, 49.53]);
        checks.extend(table_row("mu_B", &experiment("case1b")?, [3.59e-4, 6.58e-4, 0.9479, 78.83]));
        Ok(checks)
    })
}

pub fn criterion_3() -> CriterionReport {
    timed(3, "case-ii admissible range", || {
        let sp = experiment("case1")?.scaled;
        let list = admissible_b(sp.mu, sp.alpha_hat, sp.eta_hat, &sp.d, 1000);
        let last = list.last().map_or(0, |a| a.n);
        let xi_at = |n: u32| xi(&sp.d, sp.alpha_hat, sp.eta_hat, 1.0 / (2.0 * sp.mu * n as f64));
        Ok(vec![
            Check::equal("last admissible n", last, 104),
            Check::equal("admissible n contiguous from 1", list.iter().enumerate().all(|(k, a)| a.n == k as u32 + 1), true),
            Check::rel("Xi_104", xi_at(104), 0.9879, 5e-3),
            Check::rel("Xi_105", xi_at(105), 1.0070, 5e-3),
            Check::at_least("Xi_105 excluded", xi_at(105), 1.0),
        ])
    })
}

pub fn criterion_4() -> CriterionReport {
    timed(4, "case-2 plan", || {
        let exp = experiment("case2")?;
        let plan = crate::planner::compute_plan(&exp.scaled)?;
        Ok(vec![
            Check::rel("T_sw", plan.t_sw, 0.6283, 5e-3),
            Check::rel("mu", exp.scaled.mu, 0.1, 1e-12),
            Check::rel("omega_hat", exp.scaled.omega_hat, 1.0, 1e-12),
        ])
    })
}

fn switching_checks(name: &str) -> Result<Vec<Check>> {
    let exp = experiment(name)?;
    let t_sw = exp.plan.map_or(exp.t_star, |p| p.t_sw);
    let cfg = IntegratorConfig { t_end: 100.0 * t_sw, stride: usize::MAX, ..exp.integrator.clone() };
    let traj = integrate(&SpinState::at_rest(Vec3::x())?, &FieldSchedule::new(exp.scaled.h_a(), t_sw), &exp.material, &cfg)?;
    let last = traj.final_sample();
    Ok(vec![
        Check::equal(format!("{name} outcome at 100 T_sw"), traj.outcome, SwitchOutcome::Switched),
        Check::below(format!("{name} |m + e1| at 100 T_sw"), (last.state.m + Vec3::x()).norm(), 1e-4),
        Check::at_most(
            format!("{name} max W increase after t*"),
            traj.diagnostics.max_energy_increase,
            10.0 * cfg.abs_tol,
        ),
        Check::equal(format!("{name} target basin entered"), traj.certified_outcome(), SwitchOutcome::Switched),
    ])
}

pub fn criterion_5() -> CriterionReport {
    timed(5, "switching success", || {
        let mut checks = switching_checks("case1")?;
        checks.extend(switching_checks("case2")?);
        Ok(checks)
    })
}

/// Run length for integrations that stop once an equilibrium is reached.
pub const LONG_RUN: f64 = 1e6;

pub fn criterion_6() -> CriterionReport {
    timed(6, "switch-off window robustness", || {
        let exp = experiment("case1")?;
        let plan = crate::planner::compute_plan(&exp.scaled)?;
        let delta = plan.delta_sw_star.unwrap_or(plan.delta_sw);
        let cfg = IntegratorConfig { t_end: LONG_RUN, stop_on_convergence: true, ..exp.integrator.clone() };
        let grid = [plan.t_sw - delta, plan.t_sw + delta];
        let points = sweep(&SpinState::at_rest(Vec3::x())?, &exp.material, &exp.scaled.h_a(), &cfg, &grid);
        Ok(points
            .into_iter()
            .zip(["T_sw - delta*", "T_sw + delta*"])
            .map(|(p, label)| match p {
                Ok(p) => Check::equal(format!("outcome at {label}"), p.outcome, SwitchOutcome::Switched),
                Err(e) => Check::error(label, &e),
            })
            .collect())
    })
}

/// Sup-norm error of the second-order closed form on `[0, T_sw]` under a constant field.
pub fn approximation_error(sp: &ScaledParams) -> Result<f64> {
    let approx = SwitchingApprox::new(sp)?;
    let tm = sp.time_map();
    let t_end = tm.t_of_tau(approx.tau_sw());
    let cfg = IntegratorConfig { t_end, max_step: t_end / 4000.0, ..Default::default() };
    let traj = integrate(&SpinState::at_rest(Vec3::x())?, &FieldSchedule::always(sp.h_a()), &sp.material()?, &cfg)?;
    Ok(traj
        .samples
        .iter()
        .map(|s| (s.state.m - approx.m_leq2(tm.tau_of_t(s.t))).amax())
        .fold(0.0, f64::max))
}

pub fn criterion_7() -> CriterionReport {
    timed(7, "second-order approximation error scaling", || {
        let a = experiment("case1")?.scaled;
        let b = experiment("case1b")?.scaled;
        let (ea, eb) = (approximation_error(&a)?, approximation_error(&b)?);
        let limit = (b.mu / a.mu).powi(2) * 1.5;
        Ok(vec![
            Check::at_most("E(mu_A)", ea, f64::INFINITY),
            Check::at_most("E(mu_B)", eb, f64::INFINITY),
            Check::at_most("E(mu_B) / E(mu_A)", eb / ea, limit),
        ])
    })
}

/// Seeded generator for the randomized criteria.
pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn criterion_8() -> CriterionReport {
    timed(8, "frame structure oracles", || {
        let d = experiment("case1")?.scaled.d;
        let mut rng = rng(8);
        let mut worst = 0.0f64;
        let mut count = 0;
        while count < 1000 {
            let h = Vec3::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            if h.y.hypot(h.z) < 1e-2 {
                continue;
            }
            worst = worst.max(frame_oracles(&h, &d)?.max());
            count += 1;
        }
        let mut exact = 0.0f64;
        for _ in 0..200 {
            let mu = rng.random_range(0.005..0.1);
            let n: u32 = rng.random_range(1..=40);
            let (ah, eh): (f64, f64) = (rng.random_range(0.5..5.0), rng.random_range(0.5..5.0));
            let b = ah.sqrt() / (2.0 * mu * eh * n as f64);
            let sp = ScaledParams::from_mu(d, ah, eh, Vec3::new(0.0, b, 0.0), mu)?;
            let approx = SwitchingApprox::uncertified(&sp)?;
            exact = exact.max((approx.m_leq1(approx.tau_sw()) + Vec3::x()).amax());
        }
        Ok(vec![
            Check::below("frame identities, 1000 random fields", worst, 1e-12),
            Check::below("first-order form at T_sw in case ii", exact, 1e-12),
        ])
    })
}

pub fn criterion_9() -> CriterionReport {
    timed(9, "conservation", || {
        let mut checks = Vec::new();
        for name in ["case1", "case2"] {
            let exp = experiment(name)?;
            let schedule = FieldSchedule::new(exp.scaled.h_a(), exp.t_star);
            let z0 = SpinState::at_rest(Vec3::x())?;
            let base = IntegratorConfig { stride: usize::MAX, ..exp.integrator.clone() };
            let raw = integrate(&z0, &schedule, &exp.material, &IntegratorConfig { renormalize: false, ..base.clone() })?;
            let projected = integrate(&z0, &schedule, &exp.material, &base)?;
            checks.push(Check::below(format!("{name} norm drift unprojected"), raw.diagnostics.max_norm_drift, 1e-6));
            checks.push(Check::below(
                format!("{name} norm drift projected"),
                projected.diagnostics.max_norm_drift,
                1e-12,
            ));
            let dense = IntegratorConfig { stride: 1, max_step: 2.0 * std::f64::consts::PI * exp.material.eta / 20.0, ..base };
            let traj = integrate(&z0, &schedule, &exp.material, &dense)?;
            let audit = energy_audit_window(&traj, &exp.material, 0.0, f64::INFINITY);
            checks.push(Check::below(
                format!("{name} energy balance relative residual"),
                audit.max_rel_residual.unwrap_or(f64::INFINITY),
                1e-4,
            ));
            checks.push(Check::equal(format!("{name} audit sampling dense enough"), !audit.too_sparse, true));
        }
        Ok(checks)
    })
}

/// Uniform random state in the minus basin sublevel set, by rejection.
pub fn random_basin_state(rng: &mut StdRng, p: &MaterialParams) -> SpinState {
    let limit = (p.d[1] - p.d[0]) / 3.0;
    let v_max = (2.0 * limit / p.eta).sqrt();
    loop {
        let g = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let r = g.norm();
        if !(r > 1e-3 && r <= 1.0) {
            continue;
        }
        let m = g / r;
        if m.x >= 0.0 {
            continue;
        }
        let raw = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let v = (raw - m * m.dot(&raw)) * v_max * rng.random::<f64>();
        let z = SpinState { m, v };
        if energy_w(&z, &Vec3::zeros(), p) <= limit {
            return z;
        }
    }
}

pub fn criterion_10() -> CriterionReport {
    timed(10, "minus basin relaxation", || {
        let p = experiment("case2")?.material;
        let mut rng = rng(10);
        let cfg = IntegratorConfig {
            t_end: LONG_RUN,
            stop_on_convergence: true,
            stride: usize::MAX,
            ..Default::default()
        };
        let mut relaxed = 0usize;
        let mut failures = Vec::new();
        const N: usize = 200;
        for k in 0..N {
            let z0 = random_basin_state(&mut rng, &p);
            let traj = integrate(&z0, &FieldSchedule::zero(), &p, &cfg)?;
            if traj.outcome == SwitchOutcome::Switched {
                relaxed += 1;
            } else if failures.len() < 3 {
                failures.push(Check::equal(format!("sample {k} outcome"), traj.outcome, SwitchOutcome::Switched));
            }
        }
        let mut checks = vec![Check::equal("states relaxed to (-e1, 0)", relaxed, N)];
        checks.extend(failures);
        Ok(checks)
    })
}

pub fn all_criteria() -> Vec<fn() -> CriterionReport> {
    vec![
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
    ]
}

/// Case-1 numbers with the plan recomputed from mutated `Xi` and `K_f` factors.
pub fn mutated_case1(xi_factor: f64, k_f_factor: f64) -> Result<Case1Numbers> {
    let sp = experiment("case1")?.scaled;
    let mut plan = crate::planner::compute_plan(&sp)?;
    let (_, star) = safe_half_widths(
        sp.mu,
        sp.omega_hat,
        sp.alpha_hat,
        sp.eta_hat,
        plan.xi * xi_factor,
        plan.k_f * k_f_factor,
        plan.case,
    );
    plan.delta_sw_star = star;
    Ok(Case1Numbers::from_plan(&sp, &plan))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn delta_check(n: &Case1Numbers) -> bool {
        judge_case1(n).iter().find(|c| c.label == "delta_sw*").unwrap().pass
    }

    #[test]
    fn unmutated_case1_passes() {
        assert!(judge_case1(&mutated_case1(1.0, 1.0).unwrap()).iter().all(|c| c.pass));
    }

    #[test]
    fn mutated_xi_fails_delta_star() {
        assert!(!delta_check(&mutated_case1(2.0, 1.0).unwrap()));
        assert!(!delta_check(&mutated_case1(1.01, 1.0).unwrap()));
    }

    #[test]
    fn k_f_does_not_bind_in_case1() {
        // sqrt(mu^2 w^2 + K_f) - mu w exceeds 1, so delta_sw saturates at T_sw/2
        // and the kinetic branch sets delta_sw*.
        assert!(delta_check(&mutated_case1(1.0, 2.0).unwrap()));
        assert!(delta_check(&mutated_case1(1.0, 0.5).unwrap()));
        assert!(!delta_check(&mutated_case1(1.0, 1e-6).unwrap()));
    }

    #[test]
    fn checks_judge_bounds() {
        assert!(Check::rel("x", 1.004, 1.0, 5e-3).pass);
        assert!(!Check::rel("x", 1.006, 1.0, 5e-3).pass);
        assert!(!Check::rel("x", f64::NAN, 1.0, 5e-3).pass);
        assert!(Check::below("x", 0.5, 1.0).pass);
        assert!(!Check::below("x", 1.0, 1.0).pass);
        assert!(Check::at_most("x", 1.0, 1.0).pass);
    }

    #[test]
    fn report_line_format() {
        let r = CriterionReport {
            id: 3,
            name: "demo",
            checks: vec![Check::below("a", 0.1, 1.0)],
            elapsed: Duration::from_millis(200),
        };
        assert!(r.line().starts_with("PASS [ 3] demo"));
        let empty = CriterionReport { checks: vec![], ..r };
        assert!(!empty.passed());
    }

    #[test]
    fn basin_samples_satisfy_sublevel() {
        let p = MaterialParams::new([-0.1087, 0.0, 1.0], 0.01, 0.02).unwrap();
        let mut r = rng(1);
        for _ in 0..500 {
            let z = random_basin_state(&mut r, &p);
            assert!(z.m.x < 0.0);
            assert!((z.m.norm() - 1.0).abs() < 1e-14);
            assert!(z.m.dot(&z.v).abs() < 1e-14);
            assert!(energy_w(&z, &Vec3::zeros(), &p) <= 0.1087 / 3.0);
        }
    }
}
