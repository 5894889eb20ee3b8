//! Rotation helpers.

use nalgebra::{Matrix3, Vector3};
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub fn rot_x(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

pub fn rot_y(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

pub fn rot_z(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Rotation by `angle` about a unit `axis` (Rodrigues).
pub fn rot_axis_angle(axis: &Vector3<f64>, angle: f64) -> Matrix3<f64> {
    let k = axis.normalize();
    let kx = hat(&k);
    Matrix3::identity() + kx * angle.sin() + kx * kx * (1.0 - angle.cos())
}

/// Skew matrix with `hat(v) w = v × w`.
pub fn hat(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

pub fn vee(m: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)])
}

/// Fails unless `RᵀR = I` and `det R = 1` to 1e-12.
pub fn check_rotation(r: &Matrix3<f64>) -> Result<()> {
    let dev = (r.transpose() * r - Matrix3::identity()).abs().max();
    let det = r.determinant();
    let deviation = dev.max((det - 1.0).abs());
    if deviation > 1e-12 || !deviation.is_finite() {
        return Err(Error::InvalidRotation { deviation });
    }
    Ok(())
}

/// ZYZ Euler angles with `R = R_z(α) R_y(β) R_z(γ)`, `β ∈ [0, π]`.
/// At the poles `γ` is set to zero.
pub fn euler_zyz(r: &Matrix3<f64>) -> (f64, f64, f64) {
    let cb = r[(2, 2)].clamp(-1.0, 1.0);
    let sb = (r[(0, 2)].powi(2) + r[(1, 2)].powi(2)).sqrt();
    let beta = sb.atan2(cb);
    if sb > 1e-12 {
        let alpha = r[(1, 2)].atan2(r[(0, 2)]);
        let gamma = r[(2, 1)].atan2(-r[(2, 0)]);
        (alpha, beta, gamma)
    } else if cb > 0.0 {
        (r[(1, 0)].atan2(r[(0, 0)]), 0.0, 0.0)
    } else {
        ((-r[(1, 0)]).atan2(-r[(0, 0)]), PI, 0.0)
    }
}

/// Polar and azimuthal angle of a unit vector.
pub fn polar_angles(n: &Vector3<f64>) -> (f64, f64) {
    let beta = (n.x.hypot(n.y)).atan2(n.z);
    let gamma = n.y.atan2(n.x);
    (beta, gamma)
}

/// A fixed rotation taking `e_z` to the unit vector `n`: `R_z(γ) R_y(β)`,
/// identity at `e_z` and a half turn about `e_x` at `-e_z`.
pub fn section(n: &Vector3<f64>) -> Matrix3<f64> {
    let rho = n.x.hypot(n.y);
    if rho < 1e-14 {
        return if n.z > 0.0 {
            Matrix3::identity()
        } else {
            rot_x(PI)
        };
    }
    let (beta, gamma) = polar_angles(n);
    rot_z(gamma) * rot_y(beta)
}

/// Unit vectors spanning the plane orthogonal to `n`.
pub fn tangent_basis(n: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let a = if n.x.abs() < 0.9 {
        Vector3::x()
    } else {
        Vector3::y()
    };
    let e1 = (a - n * n.dot(&a)).normalize();
    let e2 = n.cross(&e1);
    (e1, e2)
}
