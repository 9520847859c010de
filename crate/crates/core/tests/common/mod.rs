//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use loopcal::{CalibrationTriple, RigidTransform, UnitQuaternion, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Mat4 = [[f64; 4]; 4];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_quaternion(rng: &mut impl Rng) -> UnitQuaternion {
    loop {
        let v: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.1 && n <= 1.0 {
            return UnitQuaternion::new(v[0], v[1], v[2], v[3]).unwrap();
        }
    }
}

pub fn random_transform(rng: &mut impl Rng) -> RigidTransform {
    let t = Vec3::new(
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
    );
    RigidTransform::new(random_quaternion(rng), t)
}

/// Rotation about a random axis by `angle_deg`, with a random translation of
/// length `trans_m`.
pub fn random_perturbation(rng: &mut impl Rng, angle_deg: f64, trans_m: f64) -> RigidTransform {
    let axis = random_quaternion(rng).rotate(Vec3::new(1.0, 0.0, 0.0));
    let dir = random_quaternion(rng).rotate(Vec3::new(0.0, 0.0, 1.0));
    RigidTransform::new(UnitQuaternion::from_axis_angle(axis, angle_deg.to_radians()), dir * trans_m)
}

pub fn random_triple(rng: &mut impl Rng) -> CalibrationTriple {
    CalibrationTriple::from_camera_pairs(random_transform(rng), random_transform(rng))
}

/// Homogeneous matrix written out from the quaternion components.
pub fn mat(t: &RigidTransform) -> Mat4 {
    let [w, x, y, z] = t.rotation.to_array();
    let p = t.translation;
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y), p.x],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x), p.y],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y), p.z],
        [0.0, 0.0, 0.0, 1.0],
    ]
}

pub fn mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// Inverse of a rigid homogeneous matrix, `[R^T | -R^T t]`.
pub fn inv(a: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[j][i];
        }
        out[i][3] = -(0..3).map(|k| a[k][i] * a[k][3]).sum::<f64>();
    }
    out[3][3] = 1.0;
    out
}

pub fn apply(a: &Mat4, p: Vec3) -> Vec3 {
    let v = [p.x, p.y, p.z, 1.0];
    let r: Vec<f64> = (0..3).map(|i| (0..4).map(|k| a[i][k] * v[k]).sum()).collect();
    Vec3::new(r[0], r[1], r[2])
}

pub fn mat_diff(a: &Mat4, b: &Mat4) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Rotation angle (degrees) and translation gap between two rigid matrices.
pub fn mat_distance(a: &Mat4, b: &Mat4) -> (f64, f64) {
    let rel = mul(&inv(a), b);
    let c = ((rel[0][0] + rel[1][1] + rel[2][2] - 1.0) / 2.0).clamp(-1.0, 1.0);
    let s = 0.5
        * ((rel[2][1] - rel[1][2]).powi(2) + (rel[0][2] - rel[2][0]).powi(2) + (rel[1][0] - rel[0][1]).powi(2))
            .sqrt();
    let dt = ((a[0][3] - b[0][3]).powi(2) + (a[1][3] - b[1][3]).powi(2) + (a[2][3] - b[2][3]).powi(2)).sqrt();
    (s.atan2(c).to_degrees(), dt)
}

pub fn close(a: &RigidTransform, b: &RigidTransform, tol: f64) -> bool {
    mat_diff(&mat(a), &mat(b)) < tol
}
