use illg_core::config::{bundled, TimeSpec};
use illg_core::experiments;
use illg_core::integrator::{integrate, sweep, IntegratorConfig};
use illg_core::model::{FieldSchedule, SpinState, SwitchOutcome, Vec3};

#[test]
fn case2_window_switches_and_late_switch_off_does_not() {
    let exp = bundled("case2").unwrap().resolve().unwrap();
    let plan = exp.plan.unwrap();
    let (lo, hi) = plan.window().unwrap();
    let grid = [lo, 0.5 * (lo + plan.t_sw), plan.t_sw, 0.5 * (plan.t_sw + hi), hi, 2.0 * plan.t_sw];
    let cfg = IntegratorConfig { t_end: 100.0 * plan.t_sw, ..exp.integrator.clone() };
    let z0 = SpinState::at_rest(Vec3::x()).unwrap();
    let points: Vec<_> = sweep(&z0, &exp.material, &exp.scaled.h_a(), &cfg, &grid)
        .into_iter()
        .map(Result::unwrap)
        .collect();
    for p in &points[..5] {
        assert_eq!(p.certified, SwitchOutcome::Switched, "t* = {}", p.t_star);
        assert!(p.final_state.m.x < -0.9);
    }
    // a full precession brings the state back near +e1
    assert_eq!(points[5].certified, SwitchOutcome::NotSwitched);
}

#[test]
fn case1_relaxation_energy_decreases() {
    let exp = bundled("case1").unwrap().resolve().unwrap();
    let cfg = IntegratorConfig { stride: 1, ..exp.integrator.clone() };
    let traj = integrate(
        &SpinState::at_rest(Vec3::x()).unwrap(),
        &FieldSchedule::new(exp.scaled.h_a(), exp.t_star),
        &exp.material,
        &cfg,
    )
    .unwrap();
    let after: Vec<f64> = traj.samples.iter().filter(|s| !s.field_on).map(|s| s.w).collect();
    assert!(after.len() > 100);
    for w in after.windows(2) {
        assert!(w[1] <= w[0] + 10.0 * cfg.abs_tol);
    }
    assert!(after.last().unwrap() < &(0.01 * after[0]));
    assert!(after.iter().all(|&w| w > 0.0));
}

#[test]
fn zero_length_run_keeps_only_initial_row() {
    let mut cfg = bundled("case2").unwrap();
    cfg.schedule.t_end = TimeSpec::At(0.0);
    cfg.output.with_approx = false;
    let out = experiments::simulate(&cfg).unwrap();
    let rows: Vec<&str> = out.csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[1].starts_with("0.0000000000000000e0,1.0000000000000000e0,"));
}

#[test]
fn approximation_columns_track_the_pulse() {
    let mut cfg = bundled("case2").unwrap();
    cfg.schedule.t_end = TimeSpec::At(0.6);
    let out = experiments::simulate(&cfg).unwrap();
    let mut worst = 0.0f64;
    for line in out.csv.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let x: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        for k in 0..3 {
            worst = worst.max((x[1 + k] - x[12 + k]).abs());
        }
    }
    // mu = 0.1 here; the deviation is dominated by the fast nutation phase
    assert!(worst < 0.3, "second-order columns deviate by {worst}");
}

#[test]
fn sweep_csv_rows_follow_grid() {
    let mut cfg = bundled("case2").unwrap();
    cfg.sweep = Some(illg_core::config::SweepBlock { t_star: None, half_width: Some(1.0), points: Some(3) });
    let text = experiments::sweep(&cfg).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], illg_core::csv::SWEEP_HEADER);
    assert_eq!(rows.len(), 4);
    assert!(rows[1..].iter().all(|r| r.split(',').nth(2) == Some("switched")));
}
