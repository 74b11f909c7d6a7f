//! Minimal 3-vector and quaternion math for motion frames.
//!
//! Quaternions are stored as `[w, x, y, z]` and are expected to be unit-norm
//! wherever they describe a joint rotation.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    pub const ZERO: Vec3 = Vec3([0.0, 0.0, 0.0]);

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3([x, y, z])
    }

    pub fn x(&self) -> f64 {
        self.0[0]
    }

    pub fn y(&self) -> f64 {
        self.0[1]
    }

    pub fn z(&self) -> f64 {
        self.0[2]
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(self, k: f64) -> Vec3 {
        Vec3([self.0[0] * k, self.0[1] * k, self.0[2] * k])
    }

    /// Unit vector, or `None` when the norm is numerically zero.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        if n < 1e-12 {
            None
        } else {
            Some(self.scale(1.0 / n))
        }
    }

    pub fn lerp(a: Vec3, b: Vec3, u: f64) -> Vec3 {
        Vec3([
            a.0[0] * (1.0 - u) + b.0[0] * u,
            a.0[1] * (1.0 - u) + b.0[1] * u,
            a.0[2] * (1.0 - u) + b.0[2] * u,
        ])
    }
}

impl std::ops::Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl std::ops::Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

/// Cosine of the angle between two vectors, clamped to [-1, 1].
///
/// Returns `None` when either vector is numerically zero-length.
pub fn cosine(a: Vec3, b: Vec3) -> Option<f64> {
    let na = a.norm();
    let nb = b.norm();
    if na < 1e-12 || nb < 1e-12 {
        return None;
    }
    Some((a.dot(b) / (na * nb)).clamp(-1.0, 1.0))
}

/// Angle between two vectors in radians via atan2(||a x b||, a . b), which
/// is exact at zero angle (identical vectors cross to exactly zero) where
/// acos of a rounded cosine is not.
pub fn angle_between(a: Vec3, b: Vec3) -> Option<f64> {
    if a.norm() < 1e-12 || b.norm() < 1e-12 {
        return None;
    }
    Some(cross(a, b).norm().atan2(a.dot(b)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Quat(pub [f64; 4]);

impl Quat {
    pub const IDENTITY: Quat = Quat([1.0, 0.0, 0.0, 0.0]);

    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quat([w, x, y, z])
    }

    pub fn dot(self, other: Quat) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_unit(self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    pub fn normalized(self) -> Quat {
        let n = self.norm();
        if n < 1e-12 {
            Quat::IDENTITY
        } else {
            Quat([self.0[0] / n, self.0[1] / n, self.0[2] / n, self.0[3] / n])
        }
    }

    pub fn from_axis_angle(axis: Vec3, angle_rad: f64) -> Quat {
        let axis = axis.normalized().unwrap_or(Vec3::new(1.0, 0.0, 0.0));
        let half = angle_rad * 0.5;
        let s = half.sin();
        Quat([half.cos(), axis.x() * s, axis.y() * s, axis.z() * s])
    }

    /// Shortest-arc (great-circle) angle in radians between two unit
    /// quaternions, treating q and -q as the same orientation. Uses the
    /// atan2 form, which stays exact at zero angle where acos loses
    /// precision.
    pub fn angle_to(self, other: Quat) -> f64 {
        let mut b = other;
        if self.dot(b) < 0.0 {
            b = Quat([-b.0[0], -b.0[1], -b.0[2], -b.0[3]]);
        }
        let diff: f64 = self
            .0
            .iter()
            .zip(b.0.iter())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        let sum: f64 = self
            .0
            .iter()
            .zip(b.0.iter())
            .map(|(x, y)| (x + y) * (x + y))
            .sum::<f64>()
            .sqrt();
        4.0 * diff.atan2(sum)
    }

    /// Spherical interpolation along the shortest arc.
    pub fn slerp_shortest(a: Quat, b: Quat, u: f64) -> Quat {
        let mut d = a.dot(b);
        let mut b = b;
        if d < 0.0 {
            b = Quat([-b.0[0], -b.0[1], -b.0[2], -b.0[3]]);
            d = -d;
        }
        if d > 1.0 - 1e-9 {
            // Nearly parallel: fall back to normalized linear interpolation.
            let q = Quat([
                a.0[0] * (1.0 - u) + b.0[0] * u,
                a.0[1] * (1.0 - u) + b.0[1] * u,
                a.0[2] * (1.0 - u) + b.0[2] * u,
                a.0[3] * (1.0 - u) + b.0[3] * u,
            ]);
            return q.normalized();
        }
        let theta = d.min(1.0).acos();
        let sin_theta = theta.sin();
        let wa = ((1.0 - u) * theta).sin() / sin_theta;
        let wb = (u * theta).sin() / sin_theta;
        Quat([
            a.0[0] * wa + b.0[0] * wb,
            a.0[1] * wa + b.0[1] * wb,
            a.0[2] * wa + b.0[2] * wb,
            a.0[3] * wa + b.0[3] * wb,
        ])
    }

    /// Rotate a vector by this (unit) quaternion.
    pub fn rotate(self, v: Vec3) -> Vec3 {
        let [w, x, y, z] = self.0;
        let u = Vec3::new(x, y, z);
        let uv = cross(u, v);
        let uuv = cross(u, uv);
        v + uv.scale(2.0 * w) + uuv.scale(2.0)
    }

    pub fn conjugate(self) -> Quat {
        Quat([self.0[0], -self.0[1], -self.0[2], -self.0[3]])
    }
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    Vec3::new(
        a.y() * b.z() - a.z() * b.y(),
        a.z() * b.x() - a.x() * b.z(),
        a.x() * b.y() - a.y() * b.x(),
    )
}
