//! Quaternion and rigid-transform algebra.
//!
//! Quaternions are stored w-first and kept on the `w >= 0` hemisphere, so
//! `q` and `-q` (the same rotation) compare equal field by field. Transforms
//! are a unit quaternion plus a translation; 4x4 homogeneous matrices only
//! appear at serialization boundaries.
//!
//! Composition follows matrix-product semantics: `a.compose(&b)` applies `b`
//! first, then `a`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Below this geodesic angle (radians) SLERP falls back to normalized lerp.
pub const SLERP_LINEAR_CUTOFF_RAD: f64 = 1e-7;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Translation part of a rigid transform, meters.
pub type Translation3 = Vec3;

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Linear blend `(1 - p) * self + p * other`.
    pub fn lerp(self, other: Vec3, p: f64) -> Vec3 {
        self + (other - self) * p
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

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

/// Rotation as a unit quaternion on the `w >= 0` hemisphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitQuaternion {
    w: f64,
    x: f64,
    y: f64,
    z: f64,
}

impl Default for UnitQuaternion {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl UnitQuaternion {
    pub const IDENTITY: UnitQuaternion = UnitQuaternion {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn identity() -> Self {
        Self::IDENTITY
    }

    /// Normalizes and canonicalizes the given components. Fails on a zero or
    /// non-finite input.
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if !n.is_finite() || n < 1e-12 {
            return Err(Error::format(format!(
                "cannot normalize quaternion ({w}, {x}, {y}, {z})"
            )));
        }
        Ok(Self::from_raw_normalized(w / n, x / n, y / n, z / n))
    }

    fn from_raw(w: f64, x: f64, y: f64, z: f64) -> Self {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        Self::from_raw_normalized(w / n, x / n, y / n, z / n)
    }

    fn from_raw_normalized(w: f64, x: f64, y: f64, z: f64) -> Self {
        let flip = if w != 0.0 {
            w < 0.0
        } else if x != 0.0 {
            x < 0.0
        } else if y != 0.0 {
            y < 0.0
        } else {
            z < 0.0
        };
        if flip {
            Self {
                w: -w,
                x: -x,
                y: -y,
                z: -z,
            }
        } else {
            Self { w, x, y, z }
        }
    }

    /// Rotation of `angle_rad` about `axis` (need not be normalized).
    pub fn from_axis_angle(axis: Vec3, angle_rad: f64) -> Self {
        let n = axis.norm();
        if n < 1e-15 || angle_rad == 0.0 {
            return Self::IDENTITY;
        }
        let (s, c) = (angle_rad * 0.5).sin_cos();
        let a = axis * (s / n);
        Self::from_raw(c, a.x, a.y, a.z)
    }

    /// Rotation vector (axis times angle, radians).
    pub fn from_rotation_vector(v: Vec3) -> Self {
        Self::from_axis_angle(v, v.norm())
    }

    pub fn rx_deg(deg: f64) -> Self {
        Self::from_axis_angle(Vec3::new(1.0, 0.0, 0.0), deg.to_radians())
    }

    pub fn ry_deg(deg: f64) -> Self {
        Self::from_axis_angle(Vec3::new(0.0, 1.0, 0.0), deg.to_radians())
    }

    pub fn rz_deg(deg: f64) -> Self {
        Self::from_axis_angle(Vec3::new(0.0, 0.0, 1.0), deg.to_radians())
    }

    pub fn w(&self) -> f64 {
        self.w
    }
    pub fn x(&self) -> f64 {
        self.x
    }
    pub fn y(&self) -> f64 {
        self.y
    }
    pub fn z(&self) -> f64 {
        self.z
    }

    /// Components in `[w, x, y, z]` order.
    pub fn to_array(&self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn norm(&self) -> f64 {
        let [w, x, y, z] = self.to_array();
        (w * w + x * x + y * y + z * z).sqrt()
    }

    pub fn dot(&self, o: &UnitQuaternion) -> f64 {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn inverse(&self) -> Self {
        Self::from_raw_normalized(self.w, -self.x, -self.y, -self.z)
    }

    /// Hamilton product `self * o` (apply `o` first).
    pub fn mul(&self, o: &UnitQuaternion) -> Self {
        let (a, b) = (self, o);
        Self::from_raw(
            a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        )
    }

    pub fn rotate(&self, v: Vec3) -> Vec3 {
        // v' = v + 2w (u x v) + 2 u x (u x v)
        let u = Vec3::new(self.x, self.y, self.z);
        let uv = u.cross(v);
        let uuv = u.cross(uv);
        v + uv * (2.0 * self.w) + uuv * 2.0
    }

    /// Rotation angle of this quaternion, radians in `[0, pi]`.
    pub fn angle_rad(&self) -> f64 {
        let s = Vec3::new(self.x, self.y, self.z).norm();
        2.0 * s.atan2(self.w.abs())
    }

    /// Rotation vector (axis times angle, radians).
    pub fn to_rotation_vector(&self) -> Vec3 {
        let u = Vec3::new(self.x, self.y, self.z);
        let s = u.norm();
        if s < 1e-300 {
            return Vec3::ZERO;
        }
        let angle = 2.0 * s.atan2(self.w);
        u * (angle / s)
    }

    /// Shortest-arc angle between two rotations, radians in `[0, pi]`.
    ///
    /// Equal to `2 * acos(|<a, b>|)`, evaluated as four times the angle
    /// between the sign-aligned unit 4-vectors so it stays accurate near 0.
    pub fn angle_to_rad(&self, o: &UnitQuaternion) -> f64 {
        let a = self.to_array();
        let mut b = o.to_array();
        if self.dot(o) < 0.0 {
            b.iter_mut().for_each(|c| *c = -*c);
        }
        let mut diff = 0.0;
        let mut sum = 0.0;
        for i in 0..4 {
            diff += (a[i] - b[i]) * (a[i] - b[i]);
            sum += (a[i] + b[i]) * (a[i] + b[i]);
        }
        4.0 * diff.sqrt().atan2(sum.sqrt())
    }

    /// Shortest-arc angular distance, degrees in `[0, 180]`.
    pub fn angular_distance(&self, o: &UnitQuaternion) -> f64 {
        self.angle_to_rad(o).to_degrees()
    }

    /// Spherical linear interpolation; `p = 0` gives `self`, `p = 1` gives `o`.
    pub fn slerp(&self, o: &UnitQuaternion, p: f64) -> Self {
        let a = self.to_array();
        let mut b = o.to_array();
        if self.dot(o) < 0.0 {
            b.iter_mut().for_each(|c| *c = -*c);
        }
        // half of the rotation-space angle: the angle between the 4-vectors
        let theta = self.angle_to_rad(o) * 0.5;
        let (ka, kb) = if theta < SLERP_LINEAR_CUTOFF_RAD {
            (1.0 - p, p)
        } else {
            let s = theta.sin();
            (((1.0 - p) * theta).sin() / s, (p * theta).sin() / s)
        };
        Self::from_raw(
            ka * a[0] + kb * b[0],
            ka * a[1] + kb * b[1],
            ka * a[2] + kb * b[2],
            ka * a[3] + kb * b[3],
        )
    }

    /// Intrinsic Z-Y-X (yaw, pitch, roll) decomposition.
    pub fn to_euler(&self) -> EulerAngles {
        let [w, x, y, z] = self.to_array();
        let roll = (2.0 * (w * x + y * z)).atan2(1.0 - 2.0 * (x * x + y * y));
        let sp = (2.0 * (w * y - z * x)).clamp(-1.0, 1.0);
        let pitch = sp.asin();
        let yaw = (2.0 * (w * z + x * y)).atan2(1.0 - 2.0 * (y * y + z * z));
        EulerAngles {
            roll: roll.to_degrees(),
            pitch: pitch.to_degrees(),
            yaw: yaw.to_degrees(),
        }
    }

    pub fn from_euler(e: EulerAngles) -> Self {
        let (sr, cr) = (e.roll.to_radians() * 0.5).sin_cos();
        let (sp, cp) = (e.pitch.to_radians() * 0.5).sin_cos();
        let (sy, cy) = (e.yaw.to_radians() * 0.5).sin_cos();
        Self::from_raw(
            cr * cp * cy + sr * sp * sy,
            sr * cp * cy - cr * sp * sy,
            cr * sp * cy + sr * cp * sy,
            cr * cp * sy - sr * sp * cy,
        )
    }

    /// Row-major 3x3 rotation matrix.
    pub fn to_rotation_matrix(&self) -> [[f64; 3]; 3] {
        let [w, x, y, z] = self.to_array();
        [
            [
                1.0 - 2.0 * (y * y + z * z),
                2.0 * (x * y - w * z),
                2.0 * (x * z + w * y),
            ],
            [
                2.0 * (x * y + w * z),
                1.0 - 2.0 * (x * x + z * z),
                2.0 * (y * z - w * x),
            ],
            [
                2.0 * (x * z - w * y),
                2.0 * (y * z + w * x),
                1.0 - 2.0 * (x * x + y * y),
            ],
        ]
    }

    /// Inverse of [`to_rotation_matrix`](Self::to_rotation_matrix). Rejects
    /// matrices that are not orthonormal with determinant +1 (tolerance 1e-6).
    pub fn from_rotation_matrix(m: &[[f64; 3]; 3]) -> Result<Self> {
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| m[i][k] * m[j][k]).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                if (dot - expect).abs() > 1e-6 {
                    return Err(Error::format("rotation block is not orthonormal"));
                }
            }
        }
        let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        if (det - 1.0).abs() > 1e-6 {
            return Err(Error::format("rotation block has determinant != 1"));
        }
        // Shepperd: branch on the largest diagonal term.
        let tr = m[0][0] + m[1][1] + m[2][2];
        let q = if tr > m[0][0] && tr > m[1][1] && tr > m[2][2] {
            let s = (1.0 + tr).sqrt() * 2.0;
            (
                0.25 * s,
                (m[2][1] - m[1][2]) / s,
                (m[0][2] - m[2][0]) / s,
                (m[1][0] - m[0][1]) / s,
            )
        } else if m[0][0] > m[1][1] && m[0][0] > m[2][2] {
            let s = (1.0 + m[0][0] - m[1][1] - m[2][2]).sqrt() * 2.0;
            (
                (m[2][1] - m[1][2]) / s,
                0.25 * s,
                (m[0][1] + m[1][0]) / s,
                (m[0][2] + m[2][0]) / s,
            )
        } else if m[1][1] > m[2][2] {
            let s = (1.0 + m[1][1] - m[0][0] - m[2][2]).sqrt() * 2.0;
            (
                (m[0][2] - m[2][0]) / s,
                (m[0][1] + m[1][0]) / s,
                0.25 * s,
                (m[1][2] + m[2][1]) / s,
            )
        } else {
            let s = (1.0 + m[2][2] - m[0][0] - m[1][1]).sqrt() * 2.0;
            (
                (m[1][0] - m[0][1]) / s,
                (m[0][2] + m[2][0]) / s,
                (m[1][2] + m[2][1]) / s,
                0.25 * s,
            )
        };
        Self::new(q.0, q.1, q.2, q.3)
    }
}

impl Mul for UnitQuaternion {
    type Output = UnitQuaternion;
    fn mul(self, o: UnitQuaternion) -> UnitQuaternion {
        UnitQuaternion::mul(&self, &o)
    }
}

/// Roll, pitch, yaw in degrees (intrinsic Z-Y-X).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EulerAngles {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

impl EulerAngles {
    pub fn new(roll: f64, pitch: f64, yaw: f64) -> Self {
        Self { roll, pitch, yaw }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RigidTransform {
    pub rotation: UnitQuaternion,
    pub translation: Translation3,
}

impl RigidTransform {
    pub const IDENTITY: RigidTransform = RigidTransform {
        rotation: UnitQuaternion::IDENTITY,
        translation: Vec3::ZERO,
    };

    pub fn new(rotation: UnitQuaternion, translation: Translation3) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn identity() -> Self {
        Self::IDENTITY
    }

    pub fn from_rotation(rotation: UnitQuaternion) -> Self {
        Self::new(rotation, Vec3::ZERO)
    }

    pub fn from_translation(translation: Translation3) -> Self {
        Self::new(UnitQuaternion::IDENTITY, translation)
    }

    /// Euler angles in degrees plus translation in meters.
    pub fn from_euler_deg(e: EulerAngles, translation: Translation3) -> Self {
        Self::new(UnitQuaternion::from_euler(e), translation)
    }

    /// `self * other`: applies `other` first.
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation.rotate(other.translation) + self.translation,
        }
    }

    pub fn inverse(&self) -> RigidTransform {
        let r = self.rotation.inverse();
        RigidTransform {
            rotation: r,
            translation: -r.rotate(self.translation),
        }
    }

    pub fn transform_point(&self, p: Vec3) -> Vec3 {
        self.rotation.rotate(p) + self.translation
    }

    /// Rotation angle (degrees) and translation distance (meters) between
    /// two transforms.
    pub fn distance(&self, o: &RigidTransform) -> (f64, f64) {
        (
            self.rotation.angular_distance(&o.rotation),
            (self.translation - o.translation).norm(),
        )
    }

    /// Row-major 4x4 homogeneous matrix.
    pub fn to_matrix(&self) -> [[f64; 4]; 4] {
        let r = self.rotation.to_rotation_matrix();
        let t = self.translation.to_array();
        let mut m = [[0.0; 4]; 4];
        for i in 0..3 {
            m[i][..3].copy_from_slice(&r[i]);
            m[i][3] = t[i];
        }
        m[3][3] = 1.0;
        m
    }

    pub fn from_matrix(m: &[[f64; 4]; 4]) -> Result<Self> {
        let bottom = m[3];
        if bottom[0].abs() > 1e-9
            || bottom[1].abs() > 1e-9
            || bottom[2].abs() > 1e-9
            || (bottom[3] - 1.0).abs() > 1e-9
        {
            return Err(Error::format("homogeneous matrix bottom row must be 0 0 0 1"));
        }
        let mut r = [[0.0; 3]; 3];
        for i in 0..3 {
            r[i].copy_from_slice(&m[i][..3]);
        }
        let t = Vec3::new(m[0][3], m[1][3], m[2][3]);
        if !t.is_finite() {
            return Err(Error::format("non-finite translation"));
        }
        Ok(Self::new(UnitQuaternion::from_rotation_matrix(&r)?, t))
    }

    /// `qw qx qy qz tx ty tz`.
    pub fn to_values(&self) -> [f64; 7] {
        let q = self.rotation.to_array();
        let t = self.translation.to_array();
        [q[0], q[1], q[2], q[3], t[0], t[1], t[2]]
    }

    /// Accepts either 7 values (`qw qx qy qz tx ty tz`) or 16 values (a
    /// row-major homogeneous matrix).
    pub fn from_values(v: &[f64]) -> Result<Self> {
        match v.len() {
            7 => {
                let t = Vec3::new(v[4], v[5], v[6]);
                if !t.is_finite() {
                    return Err(Error::format("non-finite translation"));
                }
                Ok(Self::new(UnitQuaternion::new(v[0], v[1], v[2], v[3])?, t))
            }
            16 => {
                let mut m = [[0.0; 4]; 4];
                for (i, row) in m.iter_mut().enumerate() {
                    row.copy_from_slice(&v[i * 4..i * 4 + 4]);
                }
                Self::from_matrix(&m)
            }
            n => Err(Error::format(format!(
                "expected 7 (quaternion + translation) or 16 (4x4 matrix) values, got {n}"
            ))),
        }
    }

    /// Parses a whitespace-separated record of 7 or 16 numbers.
    pub fn parse_record(s: &str) -> Result<Self> {
        let values = s
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| Error::format(format!("not a number: `{tok}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_values(&values)
    }
}

impl Mul for RigidTransform {
    type Output = RigidTransform;
    fn mul(self, o: RigidTransform) -> RigidTransform {
        self.compose(&o)
    }
}

impl fmt::Display for RigidTransform {
    /// Text record form: `qw qx qy qz tx ty tz`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.to_values();
        write!(
            f,
            "{} {} {} {} {} {} {}",
            v[0], v[1], v[2], v[3], v[4], v[5], v[6]
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn compose_identity_and_inverse() {
        let t = RigidTransform::from_euler_deg(
            EulerAngles::new(10.0, -20.0, 35.0),
            Vec3::new(1.0, -2.0, 0.5),
        );
        let a = RigidTransform::IDENTITY * t;
        assert!(a.distance(&t).0 < 1e-12 && a.distance(&t).1 < 1e-12);
        let i = t * t.inverse();
        let (r, tr) = i.distance(&RigidTransform::IDENTITY);
        assert!(r < 1e-9 && tr < 1e-9);
    }

    #[test]
    fn rz_closure() {
        let r = UnitQuaternion::rz_deg(90.0) * UnitQuaternion::rz_deg(90.0);
        assert!(r.angular_distance(&UnitQuaternion::rz_deg(180.0)) < 1e-9);
    }

    #[test]
    fn invert_translation_only() {
        let t = RigidTransform::from_translation(Vec3::new(1.0, 2.0, 3.0));
        assert_eq!(t.inverse().translation, Vec3::new(-1.0, -2.0, -3.0));
        assert_eq!(RigidTransform::IDENTITY.inverse(), RigidTransform::IDENTITY);
    }

    #[test]
    fn angular_distance_examples() {
        let i = UnitQuaternion::IDENTITY;
        assert_eq!(i.angular_distance(&i), 0.0);
        assert!(close(i.angular_distance(&UnitQuaternion::rz_deg(180.0)), 180.0, 1e-9));
        assert!(close(i.angular_distance(&UnitQuaternion::rz_deg(90.0)), 90.0, 1e-9));
    }

    #[test]
    fn angular_distance_matches_acos_form() {
        let a = UnitQuaternion::from_euler(EulerAngles::new(12.0, 40.0, -70.0));
        let b = UnitQuaternion::from_euler(EulerAngles::new(-50.0, 5.0, 100.0));
        let acos_form = (2.0 * a.dot(&b).abs().acos()).to_degrees();
        assert!(close(a.angular_distance(&b), acos_form, 1e-9));
    }

    #[test]
    fn canonical_sign() {
        let q = UnitQuaternion::new(-0.5, 0.5, -0.5, 0.5).unwrap();
        assert!(q.w() >= 0.0);
        let neg = UnitQuaternion::new(-q.w(), -q.x(), -q.y(), -q.z()).unwrap();
        assert_eq!(q, neg);
        assert!(UnitQuaternion::new(0.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn slerp_midpoint_and_endpoints() {
        let a = UnitQuaternion::IDENTITY;
        let b = UnitQuaternion::rz_deg(90.0);
        assert!(a.slerp(&b, 0.5).angular_distance(&UnitQuaternion::rz_deg(45.0)) < 1e-9);
        assert!(a.slerp(&b, 0.0).angular_distance(&a) < 1e-9);
        assert!(a.slerp(&b, 1.0).angular_distance(&b) < 1e-9);
        assert!(b.slerp(&b, 0.3).angular_distance(&b) < 1e-12);
    }

    #[test]
    fn slerp_small_angle_falls_back_to_lerp() {
        let a = UnitQuaternion::IDENTITY;
        let b = UnitQuaternion::rz_deg(1e-8);
        let m = a.slerp(&b, 0.5);
        assert!((m.norm() - 1.0).abs() < 1e-12);
        assert!(close(m.angular_distance(&a), 0.5e-8, 1e-12));
    }

    #[test]
    fn euler_examples() {
        assert_eq!(
            UnitQuaternion::from_euler(EulerAngles::default()),
            UnitQuaternion::IDENTITY
        );
        let e = UnitQuaternion::rz_deg(30.0).to_euler();
        assert!(close(e.yaw, 30.0, 1e-9) && close(e.roll, 0.0, 1e-9) && close(e.pitch, 0.0, 1e-9));
    }

    #[test]
    fn matrix_round_trip_and_records() {
        let t = RigidTransform::from_euler_deg(
            EulerAngles::new(-170.0, 60.0, 179.0),
            Vec3::new(0.3, 0.2, -1.1),
        );
        let back = RigidTransform::from_matrix(&t.to_matrix()).unwrap();
        let (r, tr) = back.distance(&t);
        assert!(r < 1e-9 && tr < 1e-12);
        let rec = RigidTransform::parse_record(&t.to_string()).unwrap();
        assert_eq!(rec.translation, t.translation);
        assert!(rec.rotation.angular_distance(&t.rotation) < 1e-12);
        assert!(RigidTransform::parse_record("1 0 0").is_err());
        assert!(RigidTransform::parse_record("1 0 0 0 a 0 0").is_err());
        let mut m = t.to_matrix();
        m[0][0] *= 2.0;
        assert!(RigidTransform::from_matrix(&m).is_err());
    }

    #[test]
    fn rotate_matches_matrix() {
        let q = UnitQuaternion::from_euler(EulerAngles::new(5.0, 15.0, 25.0));
        let m = q.to_rotation_matrix();
        let v = Vec3::new(0.4, -1.2, 2.0);
        let r = q.rotate(v);
        let mv = Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        );
        assert!((r - mv).norm() < 1e-12);
        let p = UnitQuaternion::rz_deg(90.0).rotate(Vec3::new(1.0, 0.0, 0.0));
        assert!((p - Vec3::new(0.0, 1.0, 0.0)).norm() < 1e-12);
    }
}
