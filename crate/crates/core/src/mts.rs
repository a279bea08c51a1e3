//! Closed-form multiple-time-scale approximations of the rescaled dynamics.
//!
//! All functions take the rescaled time `tau`; convert with
//! [`crate::frames::TimeMap`]. The angle approximation holds for any initial
//! direction at rest; the cartesian `m^[<=1]`, `dm^[<=1]/dtau` forms are the
//! switching solution from `+e1` in a simplified frame (diagonal `E_hat`).

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix4, Vector4};

use crate::error::{Error, Result, Threshold};
use crate::frames::{from_spherical, to_spherical, Mat3, ScaledParams, SphericalPoint};
use crate::model::Vec3;

/// Relative size of an off-diagonal `E_hat` entry still treated as zero.
pub const SIMPLIFIED_TOL: f64 = 1e-12;

/// Validity thresholds of the approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityThresholds {
    /// General threshold, depends on the initial polar angle.
    pub mu0: f64,
    /// Threshold of the switching statement (simplified frame, `theta0 = pi/2`).
    pub mu0_tilde: f64,
    /// `min(theta0, pi - theta0)`.
    pub d_tilde: f64,
}

pub fn thresholds(theta0: f64, omega_hat: f64, e_hat: &Mat3) -> Result<ValidityThresholds> {
    if !(theta0 > 0.0 && theta0 < PI) {
        return Err(Error::OnPole { theta0 });
    }
    let d_tilde = theta0.min(PI - theta0);
    let e = |i: usize, j: usize| e_hat[(i - 1, j - 1)].abs();
    let w = omega_hat;
    let diag = e(1, 1) + e(2, 2);
    let k = 2.0 * w + e(1, 2) * (1.0 + 1.0 / (2.0 * w)) + 2.0 * e(1, 3) + 3.0 * e(2, 3) + diag / (2.0 * w);
    Ok(ValidityThresholds {
        mu0: d_tilde / k,
        mu0_tilde: 2.0 * PI * w / (4.0 * w * w + diag),
        d_tilde,
    })
}

/// True when `E_hat` is diagonal up to [`SIMPLIFIED_TOL`] relative to its largest entry.
pub fn is_simplified(e_hat: &Mat3) -> bool {
    let scale = e_hat.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(f64::MIN_POSITIVE);
    [(0, 1), (0, 2), (1, 2)]
        .iter()
        .all(|&(i, j)| e_hat[(i, j)].abs() <= SIMPLIFIED_TOL * scale)
}

/// Second-order angle approximation for a trajectory starting at rest.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxSolution {
    pub mu: f64,
    pub omega_hat: f64,
    pub e_hat: Mat3,
    pub theta0: f64,
    pub phi0: f64,
    /// Rotation back to the original frame, `m = C x`.
    pub c: Mat3,
    pub thresholds: ValidityThresholds,
}

impl ApproxSolution {
    /// Approximation for `m(0) = m0`, `m'(0) = 0`, gated on `mu <= mu0`.
    pub fn new(sp: &ScaledParams, m0: &Vec3) -> Result<Self> {
        let a = Self::uncertified(sp, m0)?;
        if a.mu > a.thresholds.mu0 {
            return Err(Error::ThresholdExceeded {
                mu: a.mu,
                threshold: a.thresholds.mu0,
                which: Threshold::General,
            });
        }
        Ok(a)
    }

    /// Same as [`ApproxSolution::new`] without the `mu0` gate.
    pub fn uncertified(sp: &ScaledParams, m0: &Vec3) -> Result<Self> {
        let x0 = sp.to_rotated(m0);
        let start = match to_spherical(&x0) {
            Ok(s) => s,
            Err(_) => return Err(Error::OnPole { theta0: x0.z.clamp(-1.0, 1.0).acos() }),
        };
        let thresholds = thresholds(start.theta, sp.omega_hat, &sp.e_hat)?;
        Ok(Self {
            mu: sp.mu,
            omega_hat: sp.omega_hat,
            e_hat: sp.e_hat,
            theta0: start.theta,
            phi0: start.phi,
            c: sp.c,
            thresholds,
        })
    }

    fn e(&self, i: usize, j: usize) -> f64 {
        self.e_hat[(i - 1, j - 1)]
    }

    /// `(theta^[<=2](tau), phi^[<=2](tau))` in the rotated frame.
    pub fn angles_leq2(&self, tau: f64) -> SphericalPoint {
        let (mu, w) = (self.mu, self.omega_hat);
        let (e11, e12, e13) = (self.e(1, 1), self.e(1, 2), self.e(1, 3));
        let (e22, e23) = (self.e(2, 2), self.e(2, 3));
        let slow = mu * w * tau;
        let (ss, cs) = slow.sin_cos();
        let (st, ct) = tau.sin_cos();

        let phi = self.phi0
            + slow
            + mu * ((e13 * ss - e23 * cs + e23) / w - w * st)
            + mu * mu * (e12 * (1.0 - ct) - e13 * st);
        let theta = self.theta0
            + mu * (-w * (1.0 - ct) + ((e22 - e11) * ss * ss - e12 * (2.0 * slow).sin()) / (2.0 * w))
            + mu * mu * ((e23 - e13) * (1.0 - ct) - e12 * st - e23 * ss * ct);
        SphericalPoint { theta, phi }
    }

    /// `m^[<=2](tau) = C S(1, theta^[<=2], phi^[<=2])`.
    pub fn m_leq2(&self, tau: f64) -> Vec3 {
        self.c * from_spherical(&self.angles_leq2(tau))
    }
}

/// The switching solution from `(+e1, 0)` in a simplified frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchingApprox {
    pub base: ApproxSolution,
}

impl SwitchingApprox {
    /// Gated on a diagonal `E_hat` and `mu <= mu0_tilde`.
    pub fn new(sp: &ScaledParams) -> Result<Self> {
        let s = Self::uncertified(sp)?;
        let t = s.base.thresholds;
        if s.base.mu > t.mu0_tilde {
            return Err(Error::ThresholdExceeded {
                mu: s.base.mu,
                threshold: t.mu0_tilde,
                which: Threshold::Simplified,
            });
        }
        Ok(s)
    }

    /// Same as [`SwitchingApprox::new`] without the `mu0_tilde` gate.
    pub fn uncertified(sp: &ScaledParams) -> Result<Self> {
        if !is_simplified(&sp.e_hat) {
            return Err(Error::NotSimplified(format!(
                "E_hat off-diagonal entries (e12, e13, e23) = ({:e}, {:e}, {:e})",
                sp.e_hat[(0, 1)],
                sp.e_hat[(0, 2)],
                sp.e_hat[(1, 2)]
            )));
        }
        let base = ApproxSolution::uncertified(sp, &Vec3::x())?;
        if (base.theta0 - FRAC_PI_2).abs() > 1e-12 || base.phi0.abs() > 1e-12 {
            return Err(Error::NotSimplified(format!(
                "+e1 maps to (theta, phi) = ({}, {}), expected (pi/2, 0)",
                base.theta0, base.phi0
            )));
        }
        Ok(Self { base })
    }

    pub fn mu(&self) -> f64 {
        self.base.mu
    }

    pub fn omega_hat(&self) -> f64 {
        self.base.omega_hat
    }

    /// `pi / (mu omega_hat)`.
    pub fn tau_sw(&self) -> f64 {
        PI / (self.base.mu * self.base.omega_hat)
    }

    pub fn angles_leq2(&self, tau: f64) -> SphericalPoint {
        self.base.angles_leq2(tau)
    }

    pub fn m_leq2(&self, tau: f64) -> Vec3 {
        self.base.m_leq2(tau)
    }

    /// Polar deviation `theta^[<=1] - pi/2` divided by `mu`.
    fn polar_shift(&self, tau: f64) -> f64 {
        let b = &self.base;
        let (w, s) = (b.omega_hat, (b.mu * b.omega_hat * tau).sin());
        (b.e(2, 2) - b.e(1, 1)) / (2.0 * w) * s * s - w * (1.0 - tau.cos())
    }

    /// First-order Taylor expansion in `mu` of `m^[<=2]`, uniform in the slow phase.
    pub fn m_leq1(&self, tau: f64) -> Vec3 {
        let (mu, w) = (self.base.mu, self.base.omega_hat);
        let (ss, cs) = (mu * w * tau).sin_cos();
        let st = tau.sin();
        let x = Vec3::new(cs + mu * w * st * ss, ss - mu * w * st * cs, -mu * self.polar_shift(tau));
        self.base.c * x
    }

    /// `dm^[<=1]/dtau` from the two-time-scale derivative rule.
    pub fn velocity_leq1(&self, tau: f64) -> Vec3 {
        let (mu, w) = (self.base.mu, self.base.omega_hat);
        let (ss, cs) = (mu * w * tau).sin_cos();
        let (st, ct) = tau.sin_cos();
        let x = mu * w * Vec3::new(ss * (ct - 1.0), cs * (1.0 - ct), st);
        self.base.c * x
    }
}

/// Closed form of `exp(A tau)` for the linear fast system
/// `xi'' + chi' = f1`, `chi'' - xi' = f2` in `q = (xi, xi', chi, chi')`.
pub fn exp_fast(tau: f64) -> Matrix4<f64> {
    let (s, c) = tau.sin_cos();
    Matrix4::new(
        1.0, s, 0.0, c - 1.0, //
        0.0, c, 0.0, -s, //
        0.0, 1.0 - c, 1.0, s, //
        0.0, s, 0.0, c,
    )
}

/// Generator of the fast linear system.
pub fn fast_generator() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 1.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, -1.0, //
        0.0, 0.0, 0.0, 1.0, //
        0.0, 1.0, 0.0, 0.0,
    )
}

const GL8_NODES: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const GL8_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

/// Variation-of-constants solution of `q' = A q + (0, f1, 0, f2)`:
/// `q(tau) = e^{A tau} q0 + int_0^tau e^{A (tau - s)} f(s) ds`, with the
/// integral by composite 8-point Gauss-Legendre on panels of width <= 1/4.
pub fn linear_mts_oracle<F1, F2>(f1: F1, f2: F2, q0: &Vector4<f64>, tau: f64) -> Vector4<f64>
where
    F1: Fn(f64) -> f64,
    F2: Fn(f64) -> f64,
{
    let mut q = exp_fast(tau) * q0;
    if tau == 0.0 {
        return q;
    }
    let panels = (tau.abs() / 0.25).ceil().max(1.0) as usize;
    let width = tau / panels as f64;
    let mut integral = Vector4::zeros();
    for k in 0..panels {
        let mid = (k as f64 + 0.5) * width;
        for (x, wgt) in GL8_NODES.iter().zip(GL8_WEIGHTS) {
            let s = mid + 0.5 * width * x;
            let forcing = Vector4::new(0.0, f1(s), 0.0, f2(s));
            integral += (0.5 * width * wgt) * (exp_fast(tau - s) * forcing);
        }
    }
    q += integral;
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::ScaledParams;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    const D: [f64; 3] = [-0.1087, 0.0, 1.0];

    fn case1(mu: f64, n: u32) -> ScaledParams {
        let b = 2.3f64.sqrt() / (2.0 * mu * 4.21 * n as f64);
        ScaledParams::from_mu(D, 2.3, 4.21, Vec3::new(0.0, b, 0.0), mu).unwrap()
    }

    fn case2() -> ScaledParams {
        ScaledParams::from_mu(D, 1.0, 2.0, Vec3::new(0.0, 0.5, 0.0), 0.1).unwrap()
    }

    /// Closed form in the original frame for `h_hat = (0, b, 0)`, written out
    /// component by component.
    fn m_leq2_literal(tau: f64, mu: f64, w: f64, e11: f64, e22: f64) -> Vec3 {
        let a = mu / (2.0 * w) * (e22 - e11) * (mu * w * tau).sin().powi(2) - mu * w * (1.0 - tau.cos());
        let b = mu * w * (tau.sin() - tau);
        Vec3::new(a.cos() * b.cos(), -a.sin(), a.cos() * b.sin())
    }

    #[test]
    fn initial_condition_reproduced() {
        let s = SwitchingApprox::new(&case1(0.03033, 6)).unwrap();
        let sp0 = s.angles_leq2(0.0);
        assert_eq!((sp0.theta, sp0.phi), (FRAC_PI_2, 0.0));
        assert_abs_diff_eq!(s.m_leq2(0.0), Vec3::x(), epsilon = 1e-15);
        assert_abs_diff_eq!(s.m_leq1(0.0), Vec3::x(), epsilon = 1e-15);
        assert_eq!(s.velocity_leq1(0.0), Vec3::zeros());

        let sp = ScaledParams::from_mu(D, 1.3, 2.2, Vec3::new(0.3, 0.7, -0.4), 0.02).unwrap();
        let m0 = Vec3::new(0.2, 0.5, 0.6).normalize();
        let a = ApproxSolution::new(&sp, &m0).unwrap();
        assert_abs_diff_eq!(a.m_leq2(0.0), m0, epsilon = 1e-14);
    }

    #[test]
    fn simplified_angles_closed_form() {
        let sp = case1(0.03033, 6);
        let s = SwitchingApprox::new(&sp).unwrap();
        let (mu, w) = (sp.mu, sp.omega_hat);
        let (e11, e22) = (sp.e_hat[(0, 0)], sp.e_hat[(1, 1)]);
        for k in 0..500 {
            let tau = k as f64 * 0.173;
            let a = s.angles_leq2(tau);
            let phi = mu * w * tau - mu * w * tau.sin();
            let theta = FRAC_PI_2 + mu * ((e22 - e11) / (2.0 * w) * (mu * w * tau).sin().powi(2) - w * (1.0 - tau.cos()));
            assert_abs_diff_eq!(a.phi, phi, epsilon = 1e-13);
            assert_abs_diff_eq!(a.theta, theta, epsilon = 1e-13);
        }
    }

    #[test]
    fn cartesian_form_matches_component_formula() {
        for sp in [case1(0.03033, 6), case1(0.019, 10), case2()] {
            let s = SwitchingApprox::new(&sp).unwrap();
            let (e11, e22) = (sp.e_hat[(0, 0)], sp.e_hat[(1, 1)]);
            for k in 0..400 {
                let tau = k as f64 * 0.31;
                let lit = m_leq2_literal(tau, sp.mu, sp.omega_hat, e11, e22);
                assert!((s.m_leq2(tau) - lit).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn value_at_switching_time() {
        for sp in [case1(0.03033, 6), case2(), case1(0.02, 3)] {
            let s = SwitchingApprox::new(&sp).unwrap();
            let t = s.tau_sw();
            let k = sp.mu * sp.omega_hat;
            let (ct, st) = (t.cos(), t.sin());
            let expected = Vec3::new(
                -(k * (ct - 1.0)).cos() * (k * st).cos(),
                -(k * (ct - 1.0)).sin(),
                -(k * (ct - 1.0)).cos() * (k * st).sin(),
            );
            assert_abs_diff_eq!(s.m_leq2(t), expected, epsilon = 1e-14);
            assert!((s.m_leq2(t) + Vec3::x()).norm() < 4.0 * sp.mu * sp.omega_hat);
        }
    }

    #[test]
    fn first_order_lands_exactly_on_target() {
        for (mu, n) in [(0.03033, 6), (0.019, 10), (0.05, 1), (0.01, 37)] {
            let s = SwitchingApprox::new(&case1(mu, n)).unwrap();
            assert!((s.m_leq1(s.tau_sw()) + Vec3::x()).norm() < 1e-12);
        }
    }

    #[test]
    fn first_order_norm_defect_is_quadratic() {
        // |m^[<=1]|^2 = 1 + mu^2 (w^2 sin^2 tau + a^2) with |a| <= 2w + |e22 - e11| / (2w)
        for (mu, n) in [(0.03033, 6), (0.019, 10), (0.1, 5)] {
            let sp = if n == 5 { case2() } else { case1(mu, n) };
            let s = SwitchingApprox::new(&sp).unwrap();
            let steps = 20_000;
            let span = 2.0 * s.tau_sw();
            let worst = (0..=steps)
                .map(|k| (s.m_leq1(span * k as f64 / steps as f64).norm() - 1.0).abs())
                .fold(0.0, f64::max);
            let w = sp.omega_hat;
            let a = 2.0 * w + (sp.e_hat[(1, 1)] - sp.e_hat[(0, 0)]).abs() / (2.0 * w);
            let c = worst / (sp.mu * sp.mu);
            assert!(c <= 0.5 * (w * w + a * a), "c = {c}");
            assert!(c >= 0.5 * w * w, "c = {c}");
            assert_abs_diff_eq!(s.m_leq2(1.234).norm(), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn velocity_matches_finite_difference_to_second_order() {
        let mut prev = None;
        for mu in [0.04, 0.02, 0.01] {
            let b = 1.2;
            let sp = ScaledParams::from_mu(D, 2.3, 4.21, Vec3::new(0.0, b, 0.0), mu).unwrap();
            let s = SwitchingApprox::uncertified(&sp).unwrap();
            let h = 1e-5;
            let worst = (0..4000)
                .map(|k| {
                    let tau = k as f64 * 0.05;
                    let fd = (s.m_leq1(tau + h) - s.m_leq1(tau - h)) / (2.0 * h);
                    (fd - s.velocity_leq1(tau)).norm()
                })
                .fold(0.0, f64::max);
            let w = sp.omega_hat;
            assert!(worst <= 2.0 * mu * mu * w * w, "mu = {mu}: {worst}");
            if let Some(p) = prev {
                let ratio: f64 = worst / p;
                assert!(ratio < 0.3, "ratio {ratio}");
            }
            prev = Some(worst);
        }
    }

    #[test]
    fn threshold_values() {
        for (b, expected) in [(0.9906, 0.5353), (0.9479, 0.5562)] {
            let sp = ScaledParams::from_mu(D, 2.3, 4.21, Vec3::new(0.0, b, 0.0), 0.03033).unwrap();
            let t = thresholds(FRAC_PI_2, sp.omega_hat, &sp.e_hat).unwrap();
            assert_relative_eq!(t.mu0_tilde, expected, max_relative = 2e-4);
            // printed closed form 17.4421 b / (30.825 b^2 + 2.0294)
            assert_relative_eq!(t.mu0_tilde, 17.4421 * b / (30.825 * b * b + 2.0294), max_relative = 2e-4);
            assert_relative_eq!(t.mu0, t.mu0_tilde / 2.0, max_relative = 1e-14);
        }
        let sp = case2();
        let t = thresholds(FRAC_PI_2, sp.omega_hat, &sp.e_hat).unwrap();
        assert_relative_eq!(t.mu0_tilde, 2.0 * PI / 6.2174, max_relative = 1e-12);
        assert_eq!(t.d_tilde, FRAC_PI_2);
        for th in [0.3, 1.0, 2.0, 2.9] {
            assert!(thresholds(th, 1.0, &Mat3::zeros()).unwrap().d_tilde < FRAC_PI_2);
        }
        assert!(matches!(thresholds(0.0, 1.0, &Mat3::zeros()), Err(Error::OnPole { .. })));
        assert!(thresholds(PI, 1.0, &Mat3::zeros()).is_err());
    }

    #[test]
    fn gates() {
        // mu above mu0_tilde
        let sp = ScaledParams::from_mu(D, 1.0, 2.0, Vec3::new(0.0, 0.5, 0.0), 1.2).unwrap();
        assert!(matches!(
            SwitchingApprox::new(&sp),
            Err(Error::ThresholdExceeded { which: Threshold::Simplified, .. })
        ));
        // not simplified: field with both h2 and h3
        let sp = ScaledParams::from_mu(D, 1.0, 2.0, Vec3::new(0.0, 0.5, 0.5), 0.01).unwrap();
        assert!(matches!(SwitchingApprox::new(&sp), Err(Error::NotSimplified(_))));
        assert!(ApproxSolution::new(&sp, &Vec3::x()).is_ok());
        // initial condition on the pole of the rotated frame
        let sp = ScaledParams::from_mu(D, 1.0, 2.0, Vec3::new(0.0, 0.5, 0.0), 0.01).unwrap();
        assert!(matches!(ApproxSolution::new(&sp, &Vec3::y()), Err(Error::OnPole { .. })));
    }

    #[test]
    fn field_along_hard_axis_is_simplified_too() {
        let sp = ScaledParams::from_mu(D, 1.0, 2.0, Vec3::new(0.0, 0.0, 0.5), 0.05).unwrap();
        let s = SwitchingApprox::new(&sp).unwrap();
        assert!((s.m_leq1(s.tau_sw() * 0.5) - s.m_leq2(s.tau_sw() * 0.5)).norm() < 0.1);
        assert!(s.m_leq1(s.tau_sw() * 0.5).y.abs() > 0.9);
    }

    #[test]
    fn polar_excursion_bounds() {
        // Provable bound: |theta - theta0| <= mu K <= d~ for mu <= mu0, and the
        // half-margin S^2_{d~/2} holds once mu <= mu0 / 2.
        let excursion = |alpha_hat: f64, eta_hat: f64, h: Vec3, mu: f64| {
            let sp = ScaledParams::from_mu(D, alpha_hat, eta_hat, h, mu).unwrap();
            let s = SwitchingApprox::uncertified(&sp).unwrap();
            let span = 4.0 * s.tau_sw();
            (0..=40_000)
                .map(|k| (s.angles_leq2(span * k as f64 / 40_000.0).theta - FRAC_PI_2).abs())
                .fold(0.0, f64::max)
        };
        let limits = |alpha_hat: f64, eta_hat: f64, h: Vec3| {
            let sp = ScaledParams::from_mu(D, alpha_hat, eta_hat, h, 0.01).unwrap();
            thresholds(FRAC_PI_2, sp.omega_hat, &sp.e_hat).unwrap()
        };

        let h2 = Vec3::new(0.0, 0.5, 0.0);
        let t = limits(1.0, 2.0, h2);
        assert!(excursion(1.0, 2.0, h2, t.mu0) <= t.d_tilde / 2.0);

        // Weak anisotropy: the fast term alone reaches 2 w mu0 ~ d~ at tau = pi,
        // so the half margin fails at mu0 and holds at mu0 / 2.
        let weak = Vec3::new(0.0, 100.0, 0.0);
        let t = limits(1.0, 0.01, weak);
        let at_mu0 = excursion(1.0, 0.01, weak, t.mu0);
        assert!(at_mu0 <= t.d_tilde);
        assert!(at_mu0 > t.d_tilde / 2.0, "excursion {at_mu0}");
        assert!(excursion(1.0, 0.01, weak, t.mu0 / 2.0) <= t.d_tilde / 2.0);
    }

    #[test]
    fn general_frame_stays_within_provable_band() {
        let sp = ScaledParams::from_mu(D, 1.7, 3.1, Vec3::new(0.4, 0.9, -0.6), 0.01).unwrap();
        let m0 = Vec3::new(0.9, 0.3, -0.2).normalize();
        let raw = ApproxSolution::uncertified(&sp, &m0).unwrap();
        let mu0 = raw.thresholds.mu0;
        let sp = ScaledParams::from_mu(D, 1.7, 3.1, sp.h_hat, mu0).unwrap();
        let a = ApproxSolution::new(&sp, &m0).unwrap();
        for k in 0..20_000 {
            let th = a.angles_leq2(k as f64 * 0.05).theta;
            assert!((th - a.theta0).abs() <= a.thresholds.d_tilde + 1e-12);
        }
    }

    #[test]
    fn exp_fast_is_the_matrix_exponential() {
        let a = fast_generator();
        for tau in [0.0, 0.3, 1.0, 2.5, -1.7, 10.0] {
            let pade = (a * tau).exp();
            assert!((pade - exp_fast(tau)).abs().max() < 1e-12, "tau = {tau}");
        }
        assert_eq!(exp_fast(0.0), Matrix4::identity());
    }

    #[test]
    fn linear_oracle_homogeneous() {
        let zero = |_: f64| 0.0;
        for tau in [0.0, 0.5, 3.0, 17.0] {
            let q = linear_mts_oracle(zero, zero, &Vector4::new(0.0, 1.0, 0.0, 0.0), tau);
            let (s, c) = tau.sin_cos();
            assert_abs_diff_eq!(q, Vector4::new(s, c, 1.0 - c, s), epsilon = 1e-14);
            let q = linear_mts_oracle(zero, zero, &Vector4::new(1.0, 0.0, 0.0, 0.0), tau);
            assert_abs_diff_eq!(q, Vector4::new(1.0, 0.0, 0.0, 0.0), epsilon = 1e-15);
        }
    }

    /// Direct RK4 integration of `q' = A q + f`, independent of the exponential.
    fn rk4_linear(c1: f64, c2: f64, q0: Vector4<f64>, tau: f64) -> Vector4<f64> {
        let a = fast_generator();
        let f = Vector4::new(0.0, c1, 0.0, c2);
        let rhs = |q: &Vector4<f64>| a * q + f;
        let n = 20_000;
        let h = tau / n as f64;
        let mut q = q0;
        for _ in 0..n {
            let k1 = rhs(&q);
            let k2 = rhs(&(q + 0.5 * h * k1));
            let k3 = rhs(&(q + 0.5 * h * k2));
            let k4 = rhs(&(q + h * k3));
            q += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        q
    }

    #[test]
    fn linear_oracle_constant_forcing() {
        let (c1, c2) = (0.37, -1.2);
        let q0 = Vector4::new(0.1, -0.4, 0.2, 0.9);
        for tau in [0.7, 4.0, 12.5] {
            let q = linear_mts_oracle(|_| c1, |_| c2, &q0, tau);
            // hand integration of e^{A(tau-s)} (0, c1, 0, c2) over [0, tau]
            let (s, c) = tau.sin_cos();
            let forced = Vector4::new(
                c1 * (1.0 - c) + c2 * (s - tau),
                c1 * s + c2 * (c - 1.0),
                c1 * (tau - s) + c2 * (1.0 - c),
                c1 * (1.0 - c) + c2 * s,
            );
            let exact = exp_fast(tau) * q0 + forced;
            assert!((q - exact).abs().max() < 1e-10, "tau = {tau}");
            assert!((q - rk4_linear(c1, c2, q0, tau)).abs().max() < 1e-10);
        }
    }

    #[test]
    fn fast_part_of_angle_formula_solves_linear_system() {
        // On O(1) windows the switching (chi, xi) follow the homogeneous fast
        // system from (0, -w, 0, 0) up to an O(mu^2) slow drift.
        for mu in [0.02, 0.01] {
            let sp = case1(mu, 6);
            let s = SwitchingApprox::new(&sp).unwrap();
            let w = sp.omega_hat;
            let zero = |_: f64| 0.0;
            let mut worst = 0.0f64;
            for k in 0..=200 {
                let tau = 2.0 * PI * k as f64 / 200.0;
                let a = s.angles_leq2(tau);
                let chi = (a.theta - FRAC_PI_2) / mu;
                let xi = (a.phi - mu * w * tau) / mu;
                let q = linear_mts_oracle(zero, zero, &Vector4::new(0.0, -w, 0.0, 0.0), tau);
                worst = worst.max((chi - q[2]).abs()).max((xi - q[0]).abs());
            }
            let e = (sp.e_hat[(1, 1)] - sp.e_hat[(0, 0)]).abs();
            assert!(worst <= e / (2.0 * w) * (2.0 * PI * mu * w).powi(2) + 1e-12, "{worst}");
        }
    }
}
