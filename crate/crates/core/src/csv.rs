//! Plain-text CSV output with `#` provenance comments.

use std::fmt::Write as _;

use crate::config::Experiment;
use crate::integrator::{SweepPoint, Trajectory};
use crate::mts::SwitchingApprox;

pub const TRAJECTORY_FORMAT: &str = "illg-trajectory/1";
pub const SWEEP_FORMAT: &str = "illg-sweep/1";
pub const APPROX_FORMAT: &str = "illg-approx/1";

pub const TRAJECTORY_HEADER: &str = "t,m1,m2,m3,v1,v2,v3,W,field_on";
pub const APPROX_COLUMNS: &str =
    "m1_approx1,m2_approx1,m3_approx1,m1_approx2,m2_approx2,m3_approx2,v1_approx,v2_approx,v3_approx";
pub const SWEEP_HEADER: &str = "t_star,outcome,certified,final_W,final_m1,final_m2,final_m3,max_energy_increase";

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn vec3(v: &[f64; 3]) -> String {
    format!("[{}, {}, {}]", num(v[0]), num(v[1]), num(v[2]))
}

/// Resolved parameter set as `# key = value` lines.
pub fn provenance(name: Option<&str>, exp: &Experiment) -> Vec<String> {
    let sp = &exp.scaled;
    let h_a = sp.h_a();
    let ig = &exp.integrator;
    let mut lines = vec![
        format!("name = {}", name.unwrap_or("unnamed")),
        format!("d = {}", vec3(&sp.d)),
        format!("alpha = {}", num(exp.material.alpha)),
        format!("eta = {}", num(exp.material.eta)),
        format!("alpha_hat = {}", num(sp.alpha_hat)),
        format!("eta_hat = {}", num(sp.eta_hat)),
        format!("epsilon = {}", num(sp.epsilon)),
        format!("mu = {}", num(sp.mu)),
        format!("h_a = {}", vec3(&[h_a.x, h_a.y, h_a.z])),
        format!("h_hat = {}", vec3(&[sp.h_hat.x, sp.h_hat.y, sp.h_hat.z])),
        format!("omega = {}", num(sp.omega)),
        format!("omega_hat = {}", num(sp.omega_hat)),
        format!("e_hat_diag = {}", vec3(&[sp.e_hat[(0, 0)], sp.e_hat[(1, 1)], sp.e_hat[(2, 2)]])),
        format!("t_star = {}", num(exp.t_star)),
        format!("t_end = {}", num(ig.t_end)),
        format!("rel_tol = {}", num(ig.rel_tol)),
        format!("abs_tol = {}", num(ig.abs_tol)),
        format!("renormalize = {}", ig.renormalize),
        format!("stride = {}", ig.stride),
    ];
    if let Some(plan) = &exp.plan {
        lines.push(format!("plan_case = {}", plan.case));
        lines.push(format!("t_sw = {}", num(plan.t_sw)));
    }
    lines
}

fn preamble(out: &mut String, format: &str, provenance: &[String]) {
    let _ = writeln!(out, "# format: {format}");
    for line in provenance {
        let _ = writeln!(out, "# {line}");
    }
}

/// Closed forms evaluated on the trajectory timestamps.
pub struct ApproxColumns<'a> {
    pub approx: &'a SwitchingApprox,
    /// `t = scale * tau`.
    pub scale: f64,
}

impl ApproxColumns<'_> {
    fn row(&self, t: f64) -> [f64; 9] {
        let tau = t / self.scale;
        let m1 = self.approx.m_leq1(tau);
        let m2 = self.approx.m_leq2(tau);
        let v = self.approx.velocity_leq1(tau) / self.scale;
        [m1.x, m1.y, m1.z, m2.x, m2.y, m2.z, v.x, v.y, v.z]
    }
}

pub fn trajectory_csv(traj: &Trajectory, provenance: &[String], approx: Option<&ApproxColumns>) -> String {
    let mut out = String::with_capacity(traj.samples.len() * 220 + 1024);
    preamble(&mut out, TRAJECTORY_FORMAT, provenance);
    out.push_str(TRAJECTORY_HEADER);
    if approx.is_some() {
        out.push(',');
        out.push_str(APPROX_COLUMNS);
    }
    out.push('\n');
    for s in &traj.samples {
        let (m, v) = (s.state.m, s.state.v);
        let fields = [s.t, m.x, m.y, m.z, v.x, v.y, v.z, s.w];
        for x in fields {
            out.push_str(&num(x));
            out.push(',');
        }
        out.push(if s.field_on { '1' } else { '0' });
        if let Some(a) = approx {
            for x in a.row(s.t) {
                out.push(',');
                out.push_str(&num(x));
            }
        }
        out.push('\n');
    }
    out
}

/// Closed forms only, at `points` equally spaced times in `[0, t_end]`.
pub fn approx_csv(approx: &ApproxColumns, t_end: f64, points: usize, provenance: &[String]) -> String {
    let mut out = String::new();
    preamble(&mut out, APPROX_FORMAT, provenance);
    let _ = writeln!(out, "t,{APPROX_COLUMNS}");
    let last = points.saturating_sub(1).max(1) as f64;
    for k in 0..points {
        let t = t_end * k as f64 / last;
        let row: Vec<String> = std::iter::once(t).chain(approx.row(t)).map(num).collect();
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

pub fn sweep_csv(points: &[SweepPoint], provenance: &[String]) -> String {
    let mut out = String::new();
    preamble(&mut out, SWEEP_FORMAT, provenance);
    let _ = writeln!(out, "{SWEEP_HEADER}");
    for p in points {
        let m = p.final_state.m;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            num(p.t_star),
            p.outcome,
            p.certified,
            num(p.final_w),
            num(m.x),
            num(m.y),
            num(m.z),
            num(p.max_energy_increase)
        );
    }
    out
}
