//! Reference solutions of the six-dimensional system under a switched field.

pub mod dopri;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{energy_w, illg_rhs_unchecked, FieldSchedule, MaterialParams, SpinState, SwitchOutcome, Vec3};
use crate::planner::{basin_membership, BasinVerdict};
use dopri::{Controller, State6};

/// Raw `| |m| - 1 |` after a step beyond which the run is aborted.
pub const NORM_BREACH: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// Project `m` onto the sphere and `v` onto its tangent plane after every step.
    pub renormalize: bool,
    pub t_end: f64,
    /// Distance in `m` and `v` below which an equilibrium counts as reached.
    pub convergence_tol: f64,
    /// Step budget; the outcome is `Undecided` when exhausted.
    pub max_wall_steps: usize,
    /// Keep every `stride`-th accepted step (segment ends are always kept).
    pub stride: usize,
    /// Stop as soon as `(+-e1, 0)` is reached after switch-off.
    pub stop_on_convergence: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: f64::INFINITY,
            renormalize: true,
            t_end: 1.0,
            convergence_tol: 1e-6,
            max_wall_steps: 50_000_000,
            stride: 1,
            stop_on_convergence: false,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("max_step", self.max_step),
            ("convergence_tol", self.convergence_tol),
        ];
        for (name, value) in positive {
            if !(value > 0.0) {
                return Err(Error::NonPositiveScale { name, value });
            }
        }
        if !(self.t_end >= 0.0) {
            return Err(Error::Config(format!("t_end = {} must be >= 0", self.t_end)));
        }
        if self.stride == 0 {
            return Err(Error::Config("stride must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub state: SpinState,
    /// `W` with the field active at `t`.
    pub w: f64,
    pub field_on: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    /// Largest `| |m| - 1 |` of the stored states.
    pub max_norm_drift: f64,
    /// Largest `| |m| - 1 |` produced by a single step before projection.
    pub max_step_drift: f64,
    pub max_orthogonality: f64,
    /// Largest increase of `W` between consecutive accepted steps after switch-off.
    pub max_energy_increase: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub pulse_steps: usize,
    pub pulse_time: f64,
    pub converged_at: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub outcome: SwitchOutcome,
    /// First accepted state after switch-off inside an energy sublevel basin.
    pub basin_entry: Option<(f64, BasinVerdict)>,
    pub diagnostics: Diagnostics,
    pub schedule: FieldSchedule,
    pub params: MaterialParams,
}

impl Trajectory {
    pub fn final_sample(&self) -> &Sample {
        self.samples.last().expect("trajectory always holds the initial sample")
    }

    /// Outcome implied by basin entry when convergence was not observed.
    pub fn certified_outcome(&self) -> SwitchOutcome {
        match (self.outcome, self.basin_entry) {
            (SwitchOutcome::Undecided, Some((_, BasinVerdict::InMinusBasin))) => SwitchOutcome::Switched,
            (SwitchOutcome::Undecided, Some((_, BasinVerdict::InPlusBasin))) => SwitchOutcome::NotSwitched,
            (o, _) => o,
        }
    }

    /// Mean accepted step while the field is on.
    pub fn mean_pulse_step(&self) -> Option<f64> {
        let d = &self.diagnostics;
        (d.pulse_steps > 0).then(|| d.pulse_time / d.pulse_steps as f64)
    }
}

fn pack(z: &SpinState) -> State6 {
    State6::from_column_slice(&[z.m.x, z.m.y, z.m.z, z.v.x, z.v.y, z.v.z])
}

fn unpack(y: &State6) -> SpinState {
    SpinState {
        m: Vec3::new(y[0], y[1], y[2]),
        v: Vec3::new(y[3], y[4], y[5]),
    }
}

/// Classifies a state against the zero-field equilibria.
pub fn classify(z: &SpinState, tol: f64) -> SwitchOutcome {
    if z.v.norm() >= tol {
        return SwitchOutcome::Undecided;
    }
    if (z.m + Vec3::x()).norm() < tol {
        return SwitchOutcome::Switched;
    }
    if (z.m - Vec3::x()).norm() < tol {
        return SwitchOutcome::NotSwitched;
    }
    let near_other = [Vec3::y(), -Vec3::y(), Vec3::z(), -Vec3::z()]
        .iter()
        .any(|e| (z.m - e).norm() < tol);
    if near_other {
        SwitchOutcome::Other
    } else {
        SwitchOutcome::Undecided
    }
}

struct Run<'a> {
    p: &'a MaterialParams,
    cfg: &'a IntegratorConfig,
    schedule: FieldSchedule,
    samples: Vec<Sample>,
    diag: Diagnostics,
    basin_entry: Option<(f64, BasinVerdict)>,
    w_prev: Option<f64>,
    since_record: usize,
    total_steps: usize,
}

enum SegmentEnd {
    Reached,
    Converged,
    Budget(f64),
}

impl Run<'_> {
    fn record(&mut self, t: f64, z: &SpinState) {
        let h = self.schedule.field_at(t);
        self.diag.max_norm_drift = self.diag.max_norm_drift.max(z.norm_drift());
        self.samples.push(Sample {
            t,
            state: *z,
            w: energy_w(z, &h, self.p),
            field_on: self.schedule.is_on(t),
        });
        self.since_record = 0;
    }

    fn observe(&mut self, t: f64, z: &SpinState, field_on: bool) -> bool {
        self.diag.max_norm_drift = self.diag.max_norm_drift.max(z.norm_drift());
        self.diag.max_orthogonality = self.diag.max_orthogonality.max(z.m.dot(&z.v).abs());
        if field_on {
            return false;
        }
        let w = energy_w(z, &Vec3::zeros(), self.p);
        if let Some(prev) = self.w_prev {
            self.diag.max_energy_increase = self.diag.max_energy_increase.max(w - prev);
        }
        self.w_prev = Some(w);
        if self.basin_entry.is_none() {
            let verdict = basin_membership(z, self.p);
            if verdict != BasinVerdict::Outside {
                self.basin_entry = Some((t, verdict));
            }
        }
        let converged = matches!(
            classify(z, self.cfg.convergence_tol),
            SwitchOutcome::Switched | SwitchOutcome::NotSwitched
        );
        if converged && self.diag.converged_at.is_none() {
            self.diag.converged_at = Some(t);
        }
        converged && self.cfg.stop_on_convergence
    }

    fn segment(&mut self, t0: f64, t1: f64, z: &mut SpinState, h_a: Vec3) -> Result<SegmentEnd> {
        let field_on = h_a != Vec3::zeros() && self.schedule.is_on(t0);
        let (p, cfg) = (self.p, self.cfg);
        let f = |y: &State6| {
            let (dm, dv) = illg_rhs_unchecked(&Vec3::new(y[0], y[1], y[2]), &Vec3::new(y[3], y[4], y[5]), &h_a, p);
            State6::from_column_slice(&[dm.x, dm.y, dm.z, dv.x, dv.y, dv.z])
        };
        let mut y = pack(z);
        let mut k1 = f(&y);
        let mut t = t0;
        let mut h = dopri::initial_step(&f, &y, &k1, cfg.rel_tol, cfg.abs_tol, cfg.max_step);
        let mut ctrl = Controller::default();

        while t < t1 {
            if self.total_steps >= cfg.max_wall_steps {
                *z = unpack(&y);
                return Ok(SegmentEnd::Budget(t));
            }
            let landing = t + h >= t1 || t1 - (t + h) <= 1e-12 * h;
            let step = if landing { t1 - t } else { h };
            let (y_new, err_vec, k7) = dopri::step(&f, &y, &k1, step);
            let err = dopri::error_norm(&err_vec, &y, &y_new, cfg.rel_tol, cfg.abs_tol);
            self.total_steps += 1;
            if !(err <= 1.0) {
                self.diag.rejected_steps += 1;
                h = if err.is_finite() { ctrl.reject(step, err) } else { 0.25 * step };
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(Error::StepSizeUnderflow { t, h, last_good: Box::new(unpack(&y)) });
                }
                continue;
            }

            t = if landing { t1 } else { t + step };
            let mut zn = unpack(&y_new);
            let drift = zn.norm_drift();
            self.diag.max_step_drift = self.diag.max_step_drift.max(drift);
            if drift > NORM_BREACH {
                return Err(Error::NormBreach { t, drift });
            }
            if cfg.renormalize {
                zn.project();
                y = pack(&zn);
                k1 = f(&y);
            } else {
                y = y_new;
                k1 = k7;
            }
            let next = ctrl.accept(step, err).min(cfg.max_step);
            if !landing || next < h {
                h = next;
            }
            self.diag.accepted_steps += 1;
            if field_on {
                self.diag.pulse_steps += 1;
                self.diag.pulse_time += step;
            }
            self.since_record += 1;
            let stop = self.observe(t, &zn, field_on);
            if stop {
                self.record(t, &zn);
                *z = zn;
                return Ok(SegmentEnd::Converged);
            }
            if self.since_record >= cfg.stride && t < t1 {
                self.record(t, &zn);
            }
        }
        *z = unpack(&y);
        Ok(SegmentEnd::Reached)
    }
}

/// Integrates from `z0` over `[0, cfg.t_end]`, landing exactly on the switch-off instant.
pub fn integrate(z0: &SpinState, schedule: &FieldSchedule, p: &MaterialParams, cfg: &IntegratorConfig) -> Result<Trajectory> {
    p.validate()?;
    if p.eta == 0.0 {
        return Err(Error::SingularInertia);
    }
    cfg.validate()?;
    z0.check()?;

    let mut run = Run {
        p,
        cfg,
        schedule: *schedule,
        samples: Vec::new(),
        diag: Diagnostics::default(),
        basin_entry: None,
        w_prev: None,
        since_record: 0,
        total_steps: 0,
    };
    let mut z = *z0;
    run.record(0.0, &z);
    let mut stopped = run.observe(0.0, &z, schedule.is_on(0.0));

    let t_end = cfg.t_end;
    let switch = schedule.t_star.clamp(0.0, t_end);
    let mut budget = false;
    for (a, b, h) in [(0.0, switch, schedule.h_a), (switch, t_end, Vec3::zeros())] {
        if stopped || budget || b <= a {
            continue;
        }
        match run.segment(a, b, &mut z, h)? {
            SegmentEnd::Reached => run.record(b, &z),
            SegmentEnd::Converged => stopped = true,
            SegmentEnd::Budget(t) => {
                if run.samples.last().is_some_and(|s| s.t < t) {
                    run.record(t, &z);
                }
                budget = true;
            }
        }
    }

    let last = run.samples.last().copied().expect("initial sample recorded");
    let field_still_on = schedule.is_on(last.t) && schedule.h_a != Vec3::zeros();
    let outcome = if (budget && run.diag.converged_at.is_none()) || field_still_on {
        SwitchOutcome::Undecided
    } else {
        classify(&last.state, cfg.convergence_tol)
    };
    Ok(Trajectory {
        samples: run.samples,
        outcome,
        basin_entry: run.basin_entry,
        diagnostics: run.diag,
        schedule: *schedule,
        params: *p,
    })
}

/// Discrete check of `dW/dt = -alpha |v|^2` on consecutive samples.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyAudit {
    pub intervals: usize,
    /// `max |(W_{k+1} - W_k)/dt + alpha <|v|^2>_k|` over sample intervals.
    pub max_abs_residual: f64,
    /// `max alpha <|v|^2>_k`, the dissipation scale.
    pub dissipation_scale: f64,
    /// `max_abs_residual / dissipation_scale`, absent without dissipation.
    pub max_rel_residual: Option<f64>,
    pub max_interval: f64,
    /// Sampling is too sparse: some interval exceeds a tenth of the nutation period `2 pi eta`.
    pub too_sparse: bool,
}

const GAUSS4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_85),
    (-0.339_981_043_584_856_26, 0.652_145_154_862_546_2),
    (0.339_981_043_584_856_26, 0.652_145_154_862_546_2),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_85),
];

/// Energy balance audit over the samples with `t0 <= t <= t1`.
pub fn energy_audit_window(traj: &Trajectory, p: &MaterialParams, t0: f64, t1: f64) -> EnergyAudit {
    let samples: Vec<&Sample> = traj.samples.iter().filter(|s| s.t >= t0 && s.t <= t1).collect();
    let mut audit = EnergyAudit {
        intervals: 0,
        max_abs_residual: 0.0,
        dissipation_scale: 0.0,
        max_rel_residual: None,
        max_interval: 0.0,
        too_sparse: false,
    };
    for pair in samples.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let dt = b.t - a.t;
        if dt <= 0.0 {
            continue;
        }
        let h = traj.schedule.field_at(a.t);
        let wa = energy_w(&a.state, &h, p);
        let wb = energy_w(&b.state, &h, p);
        let (_, acc_a) = illg_rhs_unchecked(&a.state.m, &a.state.v, &h, p);
        let (_, acc_b) = illg_rhs_unchecked(&b.state.m, &b.state.v, &h, p);
        // cubic Hermite interpolant of v, integrated with 4-point Gauss
        let (va, vb) = (a.state.v, b.state.v);
        let mean_sq: f64 = GAUSS4
            .iter()
            .map(|&(x, wgt)| {
                let s = 0.5 * (x + 1.0);
                let h00 = 2.0 * s.powi(3) - 3.0 * s * s + 1.0;
                let h10 = s.powi(3) - 2.0 * s * s + s;
                let h01 = -2.0 * s.powi(3) + 3.0 * s * s;
                let h11 = s.powi(3) - s * s;
                let v = h00 * va + h10 * dt * acc_a + h01 * vb + h11 * dt * acc_b;
                0.5 * wgt * v.norm_squared()
            })
            .sum();
        let dissipation = p.alpha * mean_sq;
        let residual = ((wb - wa) / dt + dissipation).abs();
        audit.intervals += 1;
        audit.max_abs_residual = audit.max_abs_residual.max(residual);
        audit.dissipation_scale = audit.dissipation_scale.max(dissipation);
        audit.max_interval = audit.max_interval.max(dt);
    }
    if audit.dissipation_scale > 0.0 {
        audit.max_rel_residual = Some(audit.max_abs_residual / audit.dissipation_scale);
    }
    audit.too_sparse = audit.max_interval > 2.0 * std::f64::consts::PI * p.eta / 10.0;
    audit
}

pub fn energy_audit(traj: &Trajectory, p: &MaterialParams) -> EnergyAudit {
    energy_audit_window(traj, p, f64::NEG_INFINITY, f64::INFINITY)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub t_star: f64,
    pub outcome: SwitchOutcome,
    pub certified: SwitchOutcome,
    pub final_state: SpinState,
    pub final_w: f64,
    pub max_energy_increase: f64,
}

/// One integration per switch-off time, in parallel; results keep grid order.
pub fn sweep(
    z0: &SpinState,
    p: &MaterialParams,
    h_a: &Vec3,
    cfg: &IntegratorConfig,
    t_star_grid: &[f64],
) -> Vec<Result<SweepPoint>> {
    let mut cfg = cfg.clone();
    cfg.stride = usize::MAX;
    t_star_grid
        .par_iter()
        .map(|&t_star| {
            let traj = integrate(z0, &FieldSchedule::new(*h_a, t_star), p, &cfg)?;
            let last = traj.final_sample();
            Ok(SweepPoint {
                t_star,
                outcome: traj.outcome,
                certified: traj.certified_outcome(),
                final_state: last.state,
                final_w: last.w,
                max_energy_increase: traj.diagnostics.max_energy_increase,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const D: [f64; 3] = [-0.1087, 0.0, 1.0];

    fn case2() -> (MaterialParams, Vec3, f64) {
        (MaterialParams::new(D, 0.01, 0.02).unwrap(), Vec3::new(0.0, 5.0, 0.0), 0.2 * std::f64::consts::PI)
    }

    fn cfg(t_end: f64) -> IntegratorConfig {
        IntegratorConfig { t_end, ..Default::default() }
    }

    #[test]
    fn equilibrium_is_stationary() {
        let p = MaterialParams::new(D, 0.01, 0.02).unwrap();
        let z0 = SpinState::at_rest(Vec3::x()).unwrap();
        let traj = integrate(&z0, &FieldSchedule::zero(), &p, &cfg(1.0)).unwrap();
        assert_eq!(traj.outcome, SwitchOutcome::NotSwitched);
        assert_eq!(traj.diagnostics.converged_at, Some(0.0));
        assert!(traj.samples.iter().all(|s| s.state == z0));
        let stop = IntegratorConfig { stop_on_convergence: true, ..cfg(1.0) };
        let traj = integrate(&z0, &FieldSchedule::zero(), &p, &stop).unwrap();
        assert_eq!(traj.samples.len(), 1);
        assert_eq!(traj.outcome, SwitchOutcome::NotSwitched);
    }

    #[test]
    fn zero_horizon_keeps_initial_sample_only() {
        let (p, h, t_sw) = case2();
        let z0 = SpinState::at_rest(Vec3::x()).unwrap();
        let traj = integrate(&z0, &FieldSchedule::new(h, t_sw), &p, &cfg(0.0)).unwrap();
        assert_eq!(traj.samples.len(), 1);
        assert_eq!(traj.samples[0].t, 0.0);
    }

    #[test]
    fn lands_on_switch_off_time() {
        let (p, h, t_sw) = case2();
        let z0 = SpinState::at_rest(Vec3::x()).unwrap();
        let traj = integrate(&z0, &FieldSchedule::new(h, t_sw), &p, &IntegratorConfig { stride: 50, ..cfg(2.0 * t_sw) }).unwrap();
        let at = traj.samples.iter().find(|s| s.t == t_sw).expect("sample at t_star");
        assert!(!at.field_on);
        assert!(traj.samples.windows(2).all(|w| w[0].t < w[1].t));
        assert_eq!(traj.final_sample().t, 2.0 * t_sw);
        assert!(traj.diagnostics.max_norm_drift < 1e-12);
        assert!(traj.diagnostics.max_orthogonality < 1e-8);
    }

    #[test]
    fn saddle_escape_from_perturbed_e2() {
        let p = MaterialParams::new(D, 0.05, 0.02).unwrap();
        let z0 = SpinState::at_rest(Vec3::new(1e-3, 1.0, 0.0).normalize()).unwrap();
        let run = IntegratorConfig { stop_on_convergence: true, rel_tol: 1e-8, abs_tol: 1e-10, ..cfg(5000.0) };
        let traj = integrate(&z0, &FieldSchedule::zero(), &p, &run).unwrap();
        // W starts just below D21/2 and must drain into the +e1 well
        assert!(traj.final_sample().w < traj.samples[0].w);
        assert_eq!(traj.basin_entry.map(|b| b.1), Some(BasinVerdict::InPlusBasin));
        assert_eq!(traj.outcome, SwitchOutcome::NotSwitched);
    }

    #[test]
    fn zero_damping_conserves_energy() {
        // alpha must stay positive; 1e-14 makes the dissipation invisible at these tolerances
        let p = MaterialParams::new(D, 1e-14, 0.02).unwrap();
        let z0 = SpinState::new(Vec3::new(0.8, 0.6, 0.0), Vec3::new(0.0, 0.0, 2.0)).unwrap();
        let traj = integrate(&z0, &FieldSchedule::zero(), &p, &cfg(2.0)).unwrap();
        let w0 = traj.samples[0].w;
        let worst = traj.samples.iter().map(|s| (s.w - w0).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-8, "{worst}");
        let audit = energy_audit(&traj, &p);
        assert!(audit.dissipation_scale < 1e-12);
        assert!(audit.max_abs_residual < 1e-6, "{audit:?}");
    }

    #[test]
    fn step_size_tracks_inertia() {
        let z0 = SpinState::at_rest(Vec3::x()).unwrap();
        let h = Vec3::new(0.0, 5.0, 0.0);
        let mean = |eta: f64| {
            let p = MaterialParams::new(D, 0.01, eta).unwrap();
            let traj = integrate(&z0, &FieldSchedule::always(h), &p, &cfg(0.2)).unwrap();
            traj.mean_pulse_step().unwrap()
        };
        let ratio = mean(0.02) / mean(0.002);
        assert!((ratio - 10.0).abs() < 3.0, "step ratio {ratio}");
    }

    #[test]
    fn halving_tolerances_keeps_final_state() {
        let (p, h, t_sw) = case2();
        let z0 = SpinState::at_rest(Vec3::x()).unwrap();
        let sched = FieldSchedule::new(h, t_sw);
        let a = integrate(&z0, &sched, &p, &cfg(10.0 * t_sw)).unwrap();
        let b = integrate(&z0, &sched, &p, &IntegratorConfig { rel_tol: 5e-11, abs_tol: 5e-13, ..cfg(10.0 * t_sw) }).unwrap();
        let (za, zb) = (a.final_sample().state, b.final_sample().state);
        assert!((za.m - zb.m).norm() + (za.v - zb.v).norm() < 1e-6);
    }

    #[test]
    fn unprojected_norm_drift_small() {
        let (p, h, t_sw) = case2();
        let z0 = SpinState::at_rest(Vec3::x()).unwrap();
        let raw = IntegratorConfig { renormalize: false, ..cfg(4.0 * t_sw) };
        let traj = integrate(&z0, &FieldSchedule::new(h, t_sw), &p, &raw).unwrap();
        assert!(traj.diagnostics.max_norm_drift < 1e-6, "{:?}", traj.diagnostics);
    }

    #[test]
    fn classify_equilibria() {
        let tol = 1e-6;
        let at = |m: Vec3| SpinState { m, v: Vec3::zeros() };
        assert_eq!(classify(&at(-Vec3::x()), tol), SwitchOutcome::Switched);
        assert_eq!(classify(&at(Vec3::x()), tol), SwitchOutcome::NotSwitched);
        assert_eq!(classify(&at(-Vec3::z()), tol), SwitchOutcome::Other);
        assert_eq!(classify(&SpinState { m: -Vec3::x(), v: Vec3::y() }, tol), SwitchOutcome::Undecided);
    }

    #[test]
    fn invalid_inputs() {
        let p = MaterialParams::new(D, 0.01, 0.02).unwrap();
        let z0 = SpinState::at_rest(Vec3::x()).unwrap();
        let bad = IntegratorConfig { rel_tol: 0.0, ..cfg(1.0) };
        assert!(integrate(&z0, &FieldSchedule::zero(), &p, &bad).is_err());
        let q = MaterialParams { d: D, alpha: 0.01, eta: 0.0 };
        assert!(integrate(&z0, &FieldSchedule::zero(), &q, &cfg(1.0)).is_err());
        let off = SpinState { m: Vec3::new(1.0, 0.1, 0.0), v: Vec3::zeros() };
        assert!(integrate(&off, &FieldSchedule::zero(), &p, &cfg(1.0)).is_err());
    }

    #[test]
    fn sweep_keeps_grid_order() {
        let (p, h, t_sw) = case2();
        let z0 = SpinState::at_rest(Vec3::x()).unwrap();
        let grid = [0.0, 0.5 * t_sw, t_sw];
        let out = sweep(&z0, &p, &h, &cfg(3.0 * t_sw), &grid);
        let ts: Vec<f64> = out.iter().map(|r| r.as_ref().unwrap().t_star).collect();
        assert_eq!(ts, grid);
        assert_eq!(out[0].as_ref().unwrap().outcome, SwitchOutcome::NotSwitched);
        assert!(sweep(&z0, &p, &h, &cfg(1.0), &[]).is_empty());
    }
}
