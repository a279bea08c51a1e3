//! Independent checks of the rotation `C`: the unitary diagonalizer `M` of
//! the cross-product matrix and the real-form change of basis `U`, with
//! `M U = C`.

use nalgebra::{Complex, Matrix3};

use super::{build_c, build_e_explicit, gamma_matrix, lambda_matrix, Mat3};
use crate::error::{Error, Result};
use crate::model::Vec3;

type CMat3 = Matrix3<Complex<f64>>;

fn re(x: f64) -> Complex<f64> {
    Complex::new(x, 0.0)
}

fn cplx(x: f64, y: f64) -> Complex<f64> {
    Complex::new(x, y)
}

/// Max deviations of every structural identity of the frame construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameReport {
    /// `|M* M - I|`
    pub unitary: f64,
    /// `|M* Gamma M - diag(-i w, i w, 0)|`
    pub diagonalizes: f64,
    /// `|M U - C|`
    pub reconstructs_c: f64,
    /// `|C^T C - I|`
    pub orthogonal: f64,
    /// `|det C - 1|`
    pub determinant: f64,
    /// `|C^T Gamma C - Lambda|`
    pub conjugation: f64,
    /// `|E_explicit - C^T D C|`
    pub e_explicit: f64,
}

impl FrameReport {
    pub fn max(&self) -> f64 {
        [
            self.unitary,
            self.diagonalizes,
            self.reconstructs_c,
            self.orthogonal,
            self.determinant,
            self.conjugation,
            self.e_explicit,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn m_matrix(h: &Vec3) -> Result<CMat3> {
    let sigma = h.y.hypot(h.z);
    if !(sigma > 0.0) {
        return Err(Error::DegenerateField { sigma });
    }
    let w = h.norm();
    let (h1, h2, h3) = (h.x, h.y, h.z);
    let r2 = std::f64::consts::SQRT_2;
    let m = CMat3::new(
        re(sigma),
        re(sigma),
        re(r2 * h1),
        cplx(-h1 * h2, w * h3) / sigma,
        -cplx(h1 * h2, w * h3) / sigma,
        re(r2 * h2),
        -cplx(h1 * h3, w * h2) / sigma,
        cplx(-h1 * h3, w * h2) / sigma,
        re(r2 * h3),
    );
    Ok(m / re(r2 * w))
}

pub fn u_matrix() -> CMat3 {
    let r2 = std::f64::consts::SQRT_2;
    CMat3::new(
        re(1.0),
        cplx(0.0, -1.0),
        re(0.0),
        re(1.0),
        cplx(0.0, 1.0),
        re(0.0),
        re(0.0),
        re(0.0),
        re(r2),
    ) / re(r2)
}

fn cmax(m: &CMat3) -> f64 {
    m.iter().fold(0.0f64, |a, z| a.max(z.norm()))
}

fn rmax(m: &Mat3) -> f64 {
    m.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

fn complexify(m: &Mat3) -> CMat3 {
    m.map(re)
}

/// Evaluates every frame identity for the field direction `h` and anisotropy `d`.
pub fn frame_oracles(h: &Vec3, d: &[f64; 3]) -> Result<FrameReport> {
    let m = m_matrix(h)?;
    let c = build_c(h)?;
    let gamma = gamma_matrix(h);
    let w = h.norm();
    let m_star = m.adjoint();

    let unitary = cmax(&(m_star * m - CMat3::identity()));
    let diag = CMat3::from_diagonal(&nalgebra::Vector3::new(cplx(0.0, -w), cplx(0.0, w), re(0.0)));
    let diagonalizes = cmax(&(m_star * complexify(&gamma) * m - diag));
    let reconstructs_c = cmax(&(m * u_matrix() - complexify(&c)));

    let orthogonal = rmax(&(c.transpose() * c - Mat3::identity()));
    let determinant = (c.determinant() - 1.0).abs();
    let conjugation = rmax(&(c.transpose() * gamma * c - lambda_matrix(w)));
    let dm = Mat3::from_diagonal(&Vec3::from(*d));
    let e_explicit = rmax(&(build_e_explicit(h, d)? - c.transpose() * dm * c));

    Ok(FrameReport {
        unitary,
        diagonalizes,
        reconstructs_c,
        orthogonal,
        determinant,
        conjugation,
        e_explicit,
    })
}
