//! 3D kinematics: positions, array elements, direction angles and Doppler.
//!
//! Azimuth is measured from the global +x axis in the xy-plane; elevation is
//! `asin(z / |v|)`, positive above the xy-plane.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn unit(self) -> Result<Vec3> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok(self * (1.0 / n))
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Constant-velocity motion.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Trajectory {
    pub p0: Vec3,
    pub v: Vec3,
}

impl Trajectory {
    pub fn fixed(p0: Vec3) -> Self {
        Self { p0, v: Vec3::ZERO }
    }

    pub fn position_at(&self, t: f64) -> Vec3 {
        self.p0 + self.v * t
    }
}

/// Free-function form of [`Trajectory::position_at`].
pub fn position_at(traj: &Trajectory, t: f64) -> Vec3 {
    traj.position_at(t)
}

/// Uniform linear array moving rigidly with its center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayConfig {
    pub center: Trajectory,
    pub n_elements: usize,
    /// Element spacing, meters.
    pub spacing: f64,
    /// Axis azimuth psi_A, radians.
    pub azimuth: f64,
    /// Axis elevation psi_E, radians.
    pub elevation: f64,
}

impl ArrayConfig {
    pub fn new(center: Trajectory, n_elements: usize, spacing: f64, azimuth: f64, elevation: f64) -> Result<Self> {
        if n_elements == 0 {
            return Err(Error::OutOfDomain {
                name: "n_elements",
                range: "[1, inf)",
                value: 0.0,
            });
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::OutOfDomain {
                name: "spacing",
                range: "(0, inf)",
                value: spacing,
            });
        }
        Ok(Self {
            center,
            n_elements,
            spacing,
            azimuth,
            elevation,
        })
    }

    pub fn axis(&self) -> Vec3 {
        unit_from_angles(self.azimuth, self.elevation)
    }

    pub fn element_position(&self, index: usize, t: f64) -> Result<Vec3> {
        if index >= self.n_elements {
            return Err(Error::IndexOutOfRange {
                index,
                len: self.n_elements,
            });
        }
        let offset = (index as f64 - (self.n_elements as f64 - 1.0) / 2.0) * self.spacing;
        Ok(self.center.position_at(t) + self.axis() * offset)
    }

    /// Express a global direction in the array frame: the array axis is the
    /// local +x axis after rotating by -psi_A about z and then -psi_E about y.
    pub fn to_local(&self, dir: Vec3) -> Vec3 {
        let (sa, ca) = (-self.azimuth).sin_cos();
        let r = Vec3::new(ca * dir.x - sa * dir.y, sa * dir.x + ca * dir.y, dir.z);
        let (se, ce) = (self.elevation).sin_cos();
        Vec3::new(ce * r.x + se * r.z, r.y, -se * r.x + ce * r.z)
    }
}

/// Azimuth in (-pi, pi] and elevation in [-pi/2, pi/2]. On the z-axis the
/// azimuth is 0.
pub fn angles_of(v: Vec3) -> Result<(f64, f64)> {
    let n = v.norm();
    if n == 0.0 || !n.is_finite() {
        return Err(Error::ZeroVector);
    }
    let elevation = (v.z / n).clamp(-1.0, 1.0).asin();
    let azimuth = if v.x == 0.0 && v.y == 0.0 {
        0.0
    } else {
        wrap_angle(v.y.atan2(v.x))
    };
    Ok((azimuth, elevation))
}

pub fn unit_from_angles(azimuth: f64, elevation: f64) -> Vec3 {
    let (se, ce) = elevation.sin_cos();
    let (sa, ca) = azimuth.sin_cos();
    Vec3::new(ce * ca, ce * sa, se)
}

/// Wrap into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

/// Fold an (azimuth, elevation) pair whose elevation left [-pi/2, pi/2] back
/// onto the same direction with a canonical elevation.
pub fn fold_elevation(azimuth: f64, elevation: f64) -> (f64, f64) {
    let e = wrap_angle(elevation);
    if e > PI / 2.0 {
        (wrap_angle(azimuth + PI), PI - e)
    } else if e < -PI / 2.0 {
        (wrap_angle(azimuth + PI), -PI - e)
    } else {
        (wrap_angle(azimuth), e)
    }
}

/// Doppler shift `<d, v_rel> / (lambda_c |d|)`. `d` points from the moving
/// terminal toward the far end, so closing motion gives a positive shift.
pub fn doppler_shift(d: Vec3, v_rel: Vec3, lambda_c: f64) -> Result<f64> {
    if !(lambda_c > 0.0) {
        return Err(Error::OutOfDomain {
            name: "lambda_c",
            range: "(0, inf)",
            value: lambda_c,
        });
    }
    let n = d.norm();
    if n == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(d.dot(v_rel) / (lambda_c * n))
}
