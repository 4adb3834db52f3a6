//! Test-side oracles, independent of the library's quaternion application
//! path: rotations go through an explicit 3x3 matrix.

#![allow(dead_code)]

use avtr_core::arm::{ArmPose, HumanArmModel};
use avtr_core::geom::{Rotation, Vec3};
use avtr_core::rng::SplitMix64;
use avtr_core::session::ArmRefs;

pub type Mat3 = [[f64; 3]; 3];

/// Rotation matrix from a unit quaternion, by the textbook formula.
pub fn quat_to_mat3(r: &Rotation) -> Mat3 {
    let [w, x, y, z] = r.wxyz();
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

pub fn mat_apply(m: &Mat3, v: Vec3) -> Vec3 {
    Vec3::new(
        m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
        m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
        m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
    )
}

/// Forward kinematics evaluated as an explicit chain of matrix transforms.
pub fn fk_oracle(model: &HumanArmModel, pose: &ArmPose) -> (Vec3, Vec3) {
    let ms = quat_to_mat3(&pose.shoulder_rot);
    let me = quat_to_mat3(&pose.elbow_rot);
    let elbow = model.shoulder + mat_apply(&ms, model.upper * pose.stretch_upper);
    let wrist = elbow + mat_apply(&me, model.forearm * pose.stretch_forearm);
    (elbow, wrist)
}

/// Random reachable-ish references around the shoulder: segment lengths
/// stay well away from zero.
pub fn random_refs(rng: &mut SplitMix64, model: &HumanArmModel) -> ArmRefs {
    let elbow = model.shoulder + rng.unit_vec3() * rng.range(0.08, 0.45);
    let wrist = elbow + rng.unit_vec3() * rng.range(0.08, 0.45);
    ArmRefs { elbow, wrist, ee_rot: rng.rotation(), gripper: rng.f64() }
}
