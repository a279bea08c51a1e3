//! Scale and coordinate machinery: the `eps`/`mu` rescaling, the rotation
//! `C` that turns the applied-field cross product into a rotation about the
//! third axis, the rotated anisotropy matrix `E`, spherical and `(chi, xi)`
//! charts and the `t <-> tau` time map.

pub mod oracles;

use std::f64::consts::FRAC_PI_2;

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::model::{MaterialParams, Vec3};

pub type Mat3 = Matrix3<f64>;

/// Distance from the poles below which the spherical chart is refused.
pub const POLE_MARGIN: f64 = 1e-12;

/// All quantities of the rescaled problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledParams {
    pub epsilon: f64,
    pub mu: f64,
    pub alpha_hat: f64,
    pub eta_hat: f64,
    pub h_hat: Vec3,
    pub sigma: f64,
    pub omega: f64,
    pub omega_hat: f64,
    pub c: Mat3,
    pub e: Mat3,
    pub e_hat: Mat3,
    /// Demagnetizing diagonal, carried along for energy and plan evaluation.
    pub d: [f64; 3],
}

/// Builds the rescaled parameter set from physical `(alpha, eta, h_a)` and a
/// chosen `epsilon`.
pub fn build_scaled(p: &MaterialParams, h_a: &Vec3, epsilon: f64) -> Result<ScaledParams> {
    if !(epsilon > 0.0) {
        return Err(Error::NonPositiveScale { name: "epsilon", value: epsilon });
    }
    let alpha_hat = p.alpha / (epsilon * epsilon);
    let eta_hat = p.eta / (epsilon * epsilon);
    ScaledParams::from_hatted(p.d, alpha_hat, eta_hat, epsilon * h_a, epsilon)
}

impl ScaledParams {
    /// Builds the parameter set directly from hatted quantities.
    pub fn from_hatted(
        d: [f64; 3],
        alpha_hat: f64,
        eta_hat: f64,
        h_hat: Vec3,
        epsilon: f64,
    ) -> Result<Self> {
        for (name, value) in [("epsilon", epsilon), ("alpha_hat", alpha_hat), ("eta_hat", eta_hat)] {
            if !(value > 0.0) {
                return Err(Error::NonPositiveScale { name, value });
            }
        }
        let sigma = h_hat.y.hypot(h_hat.z);
        if !(h_hat.y > 0.0 || h_hat.z > 0.0) {
            return Err(Error::DegenerateField { sigma });
        }
        let c = build_c(&h_hat)?;
        let e = build_e_explicit(&h_hat, &d)?;
        let omega = h_hat.norm();
        let omega_hat = eta_hat * omega / alpha_hat.sqrt();
        Ok(Self {
            epsilon,
            mu: alpha_hat.sqrt() * epsilon,
            alpha_hat,
            eta_hat,
            h_hat,
            sigma,
            omega,
            omega_hat,
            c,
            e,
            e_hat: (eta_hat / alpha_hat) * e,
            d,
        })
    }

    /// Hatted parameters for a target `mu` instead of `epsilon`.
    pub fn from_mu(d: [f64; 3], alpha_hat: f64, eta_hat: f64, h_hat: Vec3, mu: f64) -> Result<Self> {
        if !(alpha_hat > 0.0) {
            return Err(Error::NonPositiveScale { name: "alpha_hat", value: alpha_hat });
        }
        Self::from_hatted(d, alpha_hat, eta_hat, h_hat, mu / alpha_hat.sqrt())
    }

    pub fn alpha(&self) -> f64 {
        self.epsilon * self.epsilon * self.alpha_hat
    }

    pub fn eta(&self) -> f64 {
        self.epsilon * self.epsilon * self.eta_hat
    }

    /// Physical applied field `h_a = h_hat / eps`.
    pub fn h_a(&self) -> Vec3 {
        self.h_hat / self.epsilon
    }

    pub fn material(&self) -> Result<MaterialParams> {
        MaterialParams::new(self.d, self.alpha(), self.eta())
    }

    pub fn time_map(&self) -> TimeMap {
        TimeMap::new(self.epsilon, self.eta_hat)
    }

    /// `T_sw` in rescaled time: the `tau` at which the slow phase has advanced by `pi`.
    pub fn tau_sw(&self) -> f64 {
        std::f64::consts::PI / (self.mu * self.omega_hat)
    }

    /// `E_hat` entry with 1-based indices.
    pub fn e_hat_ij(&self, i: usize, j: usize) -> f64 {
        self.e_hat[(i - 1, j - 1)]
    }

    /// Rotated-frame coordinates `x = C^T m`.
    pub fn to_rotated(&self, m: &Vec3) -> Vec3 {
        self.c.transpose() * m
    }

    pub fn from_rotated(&self, x: &Vec3) -> Vec3 {
        self.c * x
    }
}

/// Cross-product matrix of `h_hat`: `gamma(h) * m = h x m`.
pub fn gamma_matrix(h: &Vec3) -> Mat3 {
    Mat3::new(0.0, -h.z, h.y, h.z, 0.0, -h.x, -h.y, h.x, 0.0)
}

/// Canonical rotation generator about the third axis with rate `omega`.
pub fn lambda_matrix(omega: f64) -> Mat3 {
    Mat3::new(0.0, -omega, 0.0, omega, 0.0, 0.0, 0.0, 0.0, 0.0)
}

/// Explicit rotation `C` with `C^T gamma(h) C = lambda(|h|)`; third column is `h/|h|`.
pub fn build_c(h: &Vec3) -> Result<Mat3> {
    let sigma = h.y.hypot(h.z);
    if !(sigma > 0.0) {
        return Err(Error::DegenerateField { sigma });
    }
    let omega = h.norm();
    let (h1, h2, h3) = (h.x, h.y, h.z);
    let c = Mat3::new(
        sigma,
        0.0,
        h1,
        -h1 * h2 / sigma,
        omega * h3 / sigma,
        h2,
        -h1 * h3 / sigma,
        -omega * h2 / sigma,
        h3,
    ) / omega;
    Ok(c)
}

/// Closed form of `C^T D C`.
pub fn build_e_explicit(h: &Vec3, d: &[f64; 3]) -> Result<Mat3> {
    let s = h.y.hypot(h.z);
    if !(s > 0.0) {
        return Err(Error::DegenerateField { sigma: s });
    }
    let w = h.norm();
    let (h1, h2, h3) = (h.x, h.y, h.z);
    let [d1, d2, d3] = *d;
    let (s2, w2) = (s * s, w * w);
    let e11 = d1 * s2 / w2 + h1 * h1 * (d2 * h2 * h2 + d3 * h3 * h3) / (s2 * w2);
    let e12 = h1 * h2 * h3 * (d3 - d2) / (s2 * w);
    let e13 = h1 * (d1 * s2 - d2 * h2 * h2 - d3 * h3 * h3) / (s * w2);
    let e22 = (d2 * h3 * h3 + d3 * h2 * h2) / s2;
    let e23 = -h2 * h3 * (d3 - d2) / (s * w);
    let e33 = (d1 * h1 * h1 + d2 * h2 * h2 + d3 * h3 * h3) / w2;
    Ok(Mat3::new(e11, e12, e13, e12, e22, e23, e13, e23, e33))
}

/// Polar/azimuthal angles on the unit sphere; `phi` is never wrapped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalPoint {
    pub theta: f64,
    pub phi: f64,
}

pub fn to_spherical(x: &Vec3) -> Result<SphericalPoint> {
    let r = x.norm();
    let x3 = x.z / r;
    if !(x3.abs() < 1.0 - POLE_MARGIN) {
        return Err(Error::PoleProximity { x3 });
    }
    Ok(SphericalPoint { theta: x3.acos(), phi: x.y.atan2(x.x) })
}

pub fn from_spherical(sp: &SphericalPoint) -> Vec3 {
    let (st, ct) = sp.theta.sin_cos();
    let (sp_, cp) = sp.phi.sin_cos();
    Vec3::new(st * cp, st * sp_, ct)
}

/// Slow-frame chart `phi = mu w tau + mu xi`, `theta = pi/2 + mu chi`.
#[derive(Debug, Clone, Copy)]
pub struct ChiXiChart {
    pub mu: f64,
    pub omega_hat: f64,
}

impl ChiXiChart {
    pub fn new(mu: f64, omega_hat: f64) -> Result<Self> {
        if !(mu > 0.0) {
            return Err(Error::NonPositiveScale { name: "mu", value: mu });
        }
        Ok(Self { mu, omega_hat })
    }

    /// `(chi, xi)` of a spherical point at rescaled time `tau`.
    pub fn forward(&self, sp: &SphericalPoint, tau: f64) -> (f64, f64) {
        let chi = (sp.theta - FRAC_PI_2) / self.mu;
        let xi = (sp.phi - self.mu * self.omega_hat * tau) / self.mu;
        (chi, xi)
    }

    pub fn inverse(&self, chi: f64, xi: f64, tau: f64) -> SphericalPoint {
        SphericalPoint {
            theta: FRAC_PI_2 + self.mu * chi,
            phi: self.mu * self.omega_hat * tau + self.mu * xi,
        }
    }
}

/// `t = eta_hat eps^2 tau` (equivalently `mu^2 (eta_hat/alpha_hat) tau`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeMap {
    scale: f64,
}

impl TimeMap {
    pub fn new(epsilon: f64, eta_hat: f64) -> Self {
        Self { scale: eta_hat * epsilon * epsilon }
    }

    pub fn from_mu(mu: f64, alpha_hat: f64, eta_hat: f64) -> Self {
        Self { scale: mu * mu * eta_hat / alpha_hat }
    }

    /// `dt/dtau`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn t_of_tau(&self, tau: f64) -> f64 {
        self.scale * tau
    }

    pub fn tau_of_t(&self, t: f64) -> f64 {
        t / self.scale
    }
}
