//! Physical macrospin model: effective field, the 6-D inertial LLG vector
//! field on `(m, v)`, the Lyapunov energy `W` and the zero-field equilibria.
//!
//! Time here is the original dimensionless time `t` (units of `1/(gamma Ms)`).
//! Rescalings live in [`crate::frames`].

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Tolerance on `|m| = 1` and `m . v = 0` for a valid [`SpinState`].
pub const STATE_TOL: f64 = 1e-9;

/// Diagonal demagnetizing tensor, Gilbert damping and inertia.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    pub d: [f64; 3],
    pub alpha: f64,
    pub eta: f64,
}

impl MaterialParams {
    pub fn new(d: [f64; 3], alpha: f64, eta: f64) -> Result<Self> {
        let p = Self { d, alpha, eta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let [d1, d2, d3] = self.d;
        if !(d1 < d2 && d2 < d3) {
            return Err(Error::InvalidMaterial(format!(
                "demagnetizing factors must satisfy D1 < D2 < D3, got {:?}",
                self.d
            )));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::InvalidMaterial(format!("alpha must be > 0, got {}", self.alpha)));
        }
        if !(self.eta > 0.0) {
            return Err(Error::InvalidMaterial(format!("eta must be > 0, got {}", self.eta)));
        }
        Ok(())
    }

    /// `D_{j,i} = D_j - D_i` (1-based indices).
    pub fn d_diff(&self, j: usize, i: usize) -> f64 {
        d_diff(&self.d, j, i)
    }
}

/// `D_{j,i} = D_j - D_i` with 1-based indices.
pub fn d_diff(d: &[f64; 3], j: usize, i: usize) -> f64 {
    d[j - 1] - d[i - 1]
}

/// Phase point `z = (m, v)` with `v = dm/dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinState {
    pub m: Vec3,
    pub v: Vec3,
}

impl SpinState {
    /// Checked constructor: `|m| = 1` and `m . v = 0` within [`STATE_TOL`].
    pub fn new(m: Vec3, v: Vec3) -> Result<Self> {
        let s = Self { m, v };
        s.check()?;
        Ok(s)
    }

    pub fn at_rest(m: Vec3) -> Result<Self> {
        Self::new(m, Vec3::zeros())
    }

    pub fn check(&self) -> Result<()> {
        let drift = (self.m.norm() - 1.0).abs();
        if !(drift <= STATE_TOL) {
            return Err(Error::InvalidState(format!("|m| - 1 = {drift:e}")));
        }
        let dot = self.m.dot(&self.v);
        if !(dot.abs() <= STATE_TOL) {
            return Err(Error::InvalidState(format!("m . v = {dot:e}")));
        }
        Ok(())
    }

    pub fn norm_drift(&self) -> f64 {
        (self.m.norm() - 1.0).abs()
    }

    /// Projects back onto `|m| = 1`, `m . v = 0`.
    pub fn project(&mut self) {
        self.m /= self.m.norm();
        let along = self.m.dot(&self.v);
        self.v -= along * self.m;
    }
}

/// Constant applied field switched off at `t_star`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSchedule {
    pub h_a: Vec3,
    pub t_star: f64,
}

impl FieldSchedule {
    pub fn new(h_a: Vec3, t_star: f64) -> Self {
        Self { h_a, t_star }
    }

    pub fn always(h_a: Vec3) -> Self {
        Self { h_a, t_star: f64::INFINITY }
    }

    pub fn zero() -> Self {
        Self { h_a: Vec3::zeros(), t_star: 0.0 }
    }

    pub fn is_on(&self, t: f64) -> bool {
        t < self.t_star
    }

    pub fn field_at(&self, t: f64) -> Vec3 {
        if self.is_on(t) {
            self.h_a
        } else {
            Vec3::zeros()
        }
    }
}

/// Fate of a switching attempt started at `(+e1, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SwitchOutcome {
    /// Converged to `(-e1, 0)`.
    Switched,
    /// Converged back to `(+e1, 0)`.
    NotSwitched,
    /// Neither convergence criterion met within the time or step budget.
    Undecided,
    /// Converged to an equilibrium other than `(+-e1, 0)`.
    Other,
}

impl std::fmt::Display for SwitchOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SwitchOutcome::Switched => "switched",
            SwitchOutcome::NotSwitched => "not_switched",
            SwitchOutcome::Undecided => "undecided",
            SwitchOutcome::Other => "other",
        };
        f.write_str(s)
    }
}

pub fn effective_field(m: &Vec3, h_a: &Vec3, d: &[f64; 3]) -> Vec3 {
    Vec3::new(h_a.x - d[0] * m.x, h_a.y - d[1] * m.y, h_a.z - d[2] * m.z)
}

/// Right-hand side of the first-order iLLG system,
/// `m' = v`, `v' = -|v|^2 m - (m x v + m x (m x h_eff) + alpha v) / eta`.
pub fn illg_rhs(z: &SpinState, h_a: &Vec3, p: &MaterialParams) -> Result<(Vec3, Vec3)> {
    if p.eta == 0.0 {
        return Err(Error::SingularInertia);
    }
    Ok(illg_rhs_unchecked(&z.m, &z.v, h_a, p))
}

#[inline]
pub(crate) fn illg_rhs_unchecked(m: &Vec3, v: &Vec3, h_a: &Vec3, p: &MaterialParams) -> (Vec3, Vec3) {
    let h_eff = effective_field(m, h_a, &p.d);
    let torque = m.cross(v) + m.cross(&m.cross(&h_eff)) + p.alpha * v;
    let dv = -v.norm_squared() * m - torque / p.eta;
    (*v, dv)
}

/// `h(m) = (sum_j D_j m_j^2 - D_1) / 2 - h_a . m`.
pub fn anisotropy_energy(m: &Vec3, h_a: &Vec3, d: &[f64; 3]) -> f64 {
    let quad = d[0] * m.x * m.x + d[1] * m.y * m.y + d[2] * m.z * m.z;
    0.5 * (quad - d[0]) - h_a.dot(m)
}

/// `W = (eta/2)|v|^2 + h(m)`; non-increasing along solutions with constant field.
pub fn energy_w(z: &SpinState, h_a: &Vec3, p: &MaterialParams) -> f64 {
    0.5 * p.eta * z.v.norm_squared() + anisotropy_energy(&z.m, h_a, &p.d)
}

/// The six zero-field equilibria `(+-e_j, 0)`, ordered `+e1, -e1, +e2, -e2, +e3, -e3`.
pub fn equilibria(_p: &MaterialParams) -> Vec<SpinState> {
    let mut out = Vec::with_capacity(6);
    for j in 0..3 {
        for sign in [1.0, -1.0] {
            let mut m = Vec3::zeros();
            m[j] = sign;
            out.push(SpinState { m, v: Vec3::zeros() });
        }
    }
    out
}
