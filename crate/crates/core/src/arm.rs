//! Human arm kinematic model: default configuration, joint constraints,
//! forward kinematics, and the whole-body shoulder pre-alignment step.
//!
//! The model is the unposed (T-pose) arm: a shoulder position, default
//! upper-arm and forearm vectors, the elbow hinge axis, and a wrist normal.
//! A pose rotates and stretches those defaults in the world frame.

use crate::error::{Error, Result};
use crate::geom::{self, project_perp, rot_from_to, rotation_pow, swing_twist, Rotation, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn label(self) -> &'static str {
        match self {
            Side::Left => "L",
            Side::Right => "R",
        }
    }
}

/// Joint limits applied by the iterative solvers. Angles in radians,
/// stretch unitless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointConstraints {
    pub swing_max: f64,
    pub twist_min: f64,
    pub twist_max: f64,
    pub hinge_min: f64,
    pub hinge_max: f64,
    pub stretch_min: f64,
    pub stretch_max: f64,
}

impl Default for JointConstraints {
    fn default() -> Self {
        Self {
            swing_max: 85f64.to_radians(),
            twist_min: -75f64.to_radians(),
            twist_max: 75f64.to_radians(),
            hinge_min: 0.0,
            hinge_max: 150f64.to_radians(),
            stretch_min: 0.8,
            stretch_max: 1.3,
        }
    }
}

/// One arm of the human model in its default configuration, expressed in
/// the world frame (after body alignment).
#[derive(Debug, Clone, Copy)]
pub struct HumanArmModel {
    pub side: Side,
    /// World shoulder position.
    pub shoulder: Vec3,
    /// Default upper-arm vector (elbow minus shoulder).
    pub upper: Vec3,
    /// Default forearm vector (wrist minus elbow).
    pub forearm: Vec3,
    /// Default elbow hinge axis.
    pub elbow_axis: Vec3,
    /// Default wrist normal, roughly perpendicular to the palm.
    pub wrist_normal: Vec3,
    pub constraints: JointConstraints,
}

/// Geometry knobs for [`HumanArmModel::default_for_side`].
#[derive(Debug, Clone, Copy)]
pub struct ModelParams {
    pub shoulder_half_width: f64,
    pub shoulder_height: f64,
    pub upper_len: f64,
    pub forearm_len: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            shoulder_half_width: 0.18,
            shoulder_height: 1.10,
            upper_len: 0.25,
            forearm_len: 0.24,
        }
    }
}

impl HumanArmModel {
    /// Default T-pose arm: shoulders at (±0.18, 0, 1.10) m, arm along ±x,
    /// hinge axis horizontal (forward for the right arm, mirrored on the
    /// left so the two sides are reflections of each other), wrist normal
    /// up.
    pub fn default_for_side(side: Side) -> Self {
        Self::from_params(side, &ModelParams::default(), JointConstraints::default())
    }

    pub fn from_params(side: Side, p: &ModelParams, constraints: JointConstraints) -> Self {
        let sign = match side {
            Side::Left => -1.0,
            Side::Right => 1.0,
        };
        HumanArmModel {
            side,
            shoulder: Vec3::new(sign * p.shoulder_half_width, 0.0, p.shoulder_height),
            upper: Vec3::new(sign * p.upper_len, 0.0, 0.0),
            forearm: Vec3::new(sign * p.forearm_len, 0.0, 0.0),
            // Hinge axes are mirror images so left/right constraints are
            // symmetric (rotation axes flip sign under reflection).
            elbow_axis: Vec3::new(0.0, sign, 0.0),
            wrist_normal: Vec3::new(0.0, 0.0, 1.0),
            constraints,
        }
    }

    /// Model with a body alignment applied: positions are transformed,
    /// direction vectors rotated.
    pub fn aligned(&self, a: &BodyAlignment) -> HumanArmModel {
        HumanArmModel {
            side: self.side,
            shoulder: a.apply_point(self.shoulder),
            upper: a.rotation.apply(self.upper),
            forearm: a.rotation.apply(self.forearm),
            elbow_axis: a.rotation.apply(self.elbow_axis),
            wrist_normal: a.rotation.apply(self.wrist_normal),
            constraints: self.constraints,
        }
    }
}

/// Solver output: world-frame joint rotations plus per-segment stretch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmPose {
    pub shoulder_rot: Rotation,
    pub elbow_rot: Rotation,
    pub wrist_rot: Rotation,
    pub stretch_upper: f64,
    pub stretch_forearm: f64,
}

impl ArmPose {
    pub const IDENTITY: ArmPose = ArmPose {
        shoulder_rot: Rotation::IDENTITY,
        elbow_rot: Rotation::IDENTITY,
        wrist_rot: Rotation::IDENTITY,
        stretch_upper: 1.0,
        stretch_forearm: 1.0,
    };

    /// Componentwise bit equality; used by determinism checks.
    pub fn bits_eq(&self, other: &ArmPose) -> bool {
        let a = |r: &Rotation| r.wxyz().map(f64::to_bits);
        a(&self.shoulder_rot) == a(&other.shoulder_rot)
            && a(&self.elbow_rot) == a(&other.elbow_rot)
            && a(&self.wrist_rot) == a(&other.wrist_rot)
            && self.stretch_upper.to_bits() == other.stretch_upper.to_bits()
            && self.stretch_forearm.to_bits() == other.stretch_forearm.to_bits()
    }
}

/// Rigid transform aligning the whole model with the robot body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyAlignment {
    pub translation: Vec3,
    pub rotation: Rotation,
}

impl BodyAlignment {
    pub const IDENTITY: BodyAlignment =
        BodyAlignment { translation: geom::ZERO, rotation: Rotation::IDENTITY };

    pub fn apply_point(&self, p: Vec3) -> Vec3 {
        self.rotation.apply(p) + self.translation
    }
}

/// Computes the transform that makes the model's shoulder segment parallel
/// to the robot's (same left-to-right direction) with coincident midpoints.
pub fn align_body(
    model_shoulders: (Vec3, Vec3),
    robot_shoulders: (Vec3, Vec3),
) -> Result<BodyAlignment> {
    let model_dir = model_shoulders.1 - model_shoulders.0;
    let robot_dir = robot_shoulders.1 - robot_shoulders.0;
    if model_dir.norm_sq() == 0.0 || robot_dir.norm_sq() == 0.0 {
        return Err(Error::InvalidArgument("shoulder segment has zero length"));
    }
    let rotation = rot_from_to(model_dir, robot_dir)?;
    let model_mid = (model_shoulders.0 + model_shoulders.1) * 0.5;
    let robot_mid = (robot_shoulders.0 + robot_shoulders.1) * 0.5;
    let translation = robot_mid - rotation.apply(model_mid);
    Ok(BodyAlignment { translation, rotation })
}

/// Forward kinematics: world elbow and wrist positions of a posed arm.
pub fn fk_arm(model: &HumanArmModel, pose: &ArmPose) -> (Vec3, Vec3) {
    let elbow = model.shoulder + pose.shoulder_rot.apply(model.upper * pose.stretch_upper);
    let wrist = elbow + pose.elbow_rot.apply(model.forearm * pose.stretch_forearm);
    (elbow, wrist)
}

/// Signed hinge angle of a pose: the dihedral between the upper-arm and
/// forearm directions about the current elbow axis, zero in the default
/// configuration. Returns `None` when a segment is (numerically) parallel
/// to the hinge axis and the dihedral is undefined.
pub fn hinge_angle(model: &HumanArmModel, pose: &ArmPose) -> Option<f64> {
    let u = pose.shoulder_rot.apply(model.upper);
    let f = pose.elbow_rot.apply(model.forearm);
    let axis = pose.shoulder_rot.apply(model.elbow_axis).normalized().ok()?;
    let u_p = project_perp(u, axis).ok()?;
    let f_p = project_perp(f, axis).ok()?;
    if u_p.norm() < 1e-9 * u.norm() || f_p.norm() < 1e-9 * f.norm() {
        return None;
    }
    Some(u_p.cross(f_p).dot(axis).atan2(u_p.dot(f_p)))
}

/// Clamps a pose into the model's joint constraints. Poses already inside
/// the constraints come back unchanged (componentwise identical), and the
/// operation is idempotent.
pub fn clamp_pose(pose: &ArmPose, model: &HumanArmModel) -> ArmPose {
    let c = &model.constraints;
    let mut out = *pose;

    // Keep the elbow's rotation relative to the shoulder so a shoulder
    // clamp carries the forearm along with it.
    let rel_elbow = pose.shoulder_rot.inverse().compose(&pose.elbow_rot);
    let mut shoulder_changed = false;

    if let Ok(axis) = model.upper.normalized() {
        if let Ok((swing, twist)) = swing_twist(&pose.shoulder_rot, axis) {
            let swing_angle = swing.angle();
            let twist_angle = signed_axis_angle(&twist, axis);
            let new_swing = if swing_angle > c.swing_max {
                shoulder_changed = true;
                rotation_pow(&swing, c.swing_max / swing_angle)
            } else {
                swing
            };
            let clamped_twist = twist_angle.clamp(c.twist_min, c.twist_max);
            let new_twist = if clamped_twist != twist_angle {
                shoulder_changed = true;
                Rotation::from_axis_angle(axis, clamped_twist).expect("unit axis")
            } else {
                twist
            };
            if shoulder_changed {
                out.shoulder_rot = new_swing.compose(&new_twist);
                out.elbow_rot = out.shoulder_rot.compose(&rel_elbow);
            }
        }
    }

    if let Some(angle) = hinge_angle(model, &out) {
        let clamped = angle.clamp(c.hinge_min, c.hinge_max);
        if clamped != angle {
            let axis = out
                .shoulder_rot
                .apply(model.elbow_axis)
                .normalized()
                .expect("model elbow axis is nonzero");
            let fix = Rotation::from_axis_angle(axis, clamped - angle).expect("unit axis");
            out.elbow_rot = fix.compose(&out.elbow_rot);
        }
    }

    out.stretch_upper = out.stretch_upper.clamp(c.stretch_min, c.stretch_max);
    out.stretch_forearm = out.stretch_forearm.clamp(c.stretch_min, c.stretch_max);
    out
}

/// Signed rotation angle of a twist quaternion about `axis` (unit), in
/// `(-pi, pi]`. Only meaningful when the rotation axis is parallel to
/// `axis`.
pub fn signed_axis_angle(twist: &Rotation, axis: Vec3) -> f64 {
    2.0 * twist.xyz().dot(axis).atan2(twist.w())
}

/// Default hand-gesture endpoints for the gripper map, radians.
pub const GESTURE_ANGLE_CLOSED: f64 = 5.0 * std::f64::consts::PI / 180.0;
pub const GESTURE_ANGLE_OPEN: f64 = 60.0 * std::f64::consts::PI / 180.0;

/// Maps gripper openness in [0, 1] linearly onto the thumb-index angle.
/// Out-of-range inputs are clamped.
pub fn gripper_to_gesture(openness: f64, angle_closed: f64, angle_open: f64) -> f64 {
    let x = openness.clamp(0.0, 1.0);
    angle_closed + x * (angle_open - angle_closed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    #[test]
    fn align_identical_segments_is_identity() {
        let s = (Vec3::new(-0.18, 0.0, 1.1), Vec3::new(0.18, 0.0, 1.1));
        let a = align_body(s, s).unwrap();
        assert_eq!(a.rotation, Rotation::IDENTITY);
        assert!(a.translation.norm() < 1e-15);
    }

    #[test]
    fn align_pure_translation() {
        let s = (Vec3::new(-0.18, 0.0, 1.1), Vec3::new(0.18, 0.0, 1.1));
        let t = (Vec3::new(0.82, 0.0, 1.1), Vec3::new(1.18, 0.0, 1.1));
        let a = align_body(s, t).unwrap();
        assert_eq!(a.rotation, Rotation::IDENTITY);
        assert!((a.translation - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn align_rotated_segment() {
        let s = (Vec3::new(-0.2, 0.0, 1.0), Vec3::new(0.2, 0.0, 1.0));
        // Same midpoint, rotated 90° about world z.
        let t = (Vec3::new(0.0, -0.2, 1.0), Vec3::new(0.0, 0.2, 1.0));
        let a = align_body(s, t).unwrap();
        assert!((a.apply_point(s.0) - t.0).norm() < 1e-12);
        assert!((a.apply_point(s.1) - t.1).norm() < 1e-12);
    }

    #[test]
    fn align_degenerate_segment_errors() {
        let p = Vec3::new(0.1, 0.2, 0.3);
        assert!(align_body((p, p), (p, p + geom::EX)).is_err());
    }

    #[test]
    fn align_random_segments() {
        let mut rng = SplitMix64::new(0xa11);
        for _ in 0..1000 {
            let mk = |rng: &mut SplitMix64| {
                let c = Vec3::new(rng.range(-1.0, 1.0), rng.range(-1.0, 1.0), rng.range(0.0, 2.0));
                let d = rng.unit_vec3() * rng.range(0.05, 0.5);
                (c - d, c + d)
            };
            let s = mk(&mut rng);
            let t = mk(&mut rng);
            let a = align_body(s, t).unwrap();
            let s0 = a.apply_point(s.0);
            let s1 = a.apply_point(s.1);
            let mid_err = ((s0 + s1) * 0.5 - (t.0 + t.1) * 0.5).norm();
            assert!(mid_err < 1e-12, "midpoint error {mid_err}");
            let dir_m = (s1 - s0).normalized().unwrap();
            let dir_r = (t.1 - t.0).normalized().unwrap();
            assert!(dir_m.cross(dir_r).norm() < 1e-12);
            assert!(dir_m.dot(dir_r) > 0.0, "left-right direction preserved");
        }
    }

    #[test]
    fn fk_identity_pose_hits_defaults() {
        let m = HumanArmModel::default_for_side(Side::Right);
        let (e, w) = fk_arm(&m, &ArmPose::IDENTITY);
        assert_eq!(e, m.shoulder + m.upper);
        assert_eq!(w, m.shoulder + m.upper + m.forearm);
    }

    #[test]
    fn fk_scales_along_default_direction() {
        let m = HumanArmModel::default_for_side(Side::Left);
        let pose = ArmPose { stretch_upper: 2.0, ..ArmPose::IDENTITY };
        let (e, _) = fk_arm(&m, &pose);
        assert!((e - (m.shoulder + m.upper * 2.0)).norm() < 1e-15);
    }

    #[test]
    fn clamp_is_identity_inside_constraints() {
        let m = HumanArmModel::default_for_side(Side::Right);
        let mut rng = SplitMix64::new(0xc1a);
        for _ in 0..500 {
            let pose = sample_pose_inside(&m, &mut rng, 0.9);
            let clamped = clamp_pose(&pose, &m);
            assert!(pose.bits_eq(&clamped), "in-constraint pose moved");
        }
    }

    #[test]
    fn clamp_is_idempotent() {
        let m = HumanArmModel::default_for_side(Side::Right);
        let mut rng = SplitMix64::new(0xc1b);
        for _ in 0..500 {
            let pose = ArmPose {
                shoulder_rot: rng.rotation(),
                elbow_rot: rng.rotation(),
                wrist_rot: rng.rotation(),
                stretch_upper: rng.range(0.2, 3.0),
                stretch_forearm: rng.range(0.2, 3.0),
            };
            let once = clamp_pose(&pose, &m);
            let twice = clamp_pose(&once, &m);
            assert!(once.shoulder_rot.angle_to(&twice.shoulder_rot) < 1e-12);
            assert!(once.elbow_rot.angle_to(&twice.elbow_rot) < 1e-12);
            assert!((once.stretch_upper - twice.stretch_upper).abs() < 1e-12);
            assert!((once.stretch_forearm - twice.stretch_forearm).abs() < 1e-12);
        }
    }

    #[test]
    fn clamp_limits_stretch() {
        let m = HumanArmModel::default_for_side(Side::Right);
        let pose = ArmPose { stretch_upper: 2.0, ..ArmPose::IDENTITY };
        assert_eq!(clamp_pose(&pose, &m).stretch_upper, 1.3);
        let pose = ArmPose { stretch_forearm: 0.1, ..ArmPose::IDENTITY };
        assert_eq!(clamp_pose(&pose, &m).stretch_forearm, 0.8);
    }

    #[test]
    fn clamp_limits_swing_along_same_axis() {
        let m = HumanArmModel::default_for_side(Side::Right);
        // 100° swing about an axis perpendicular to the upper arm.
        let swing_axis = Vec3::new(0.0, 0.6, 0.8);
        let r = Rotation::from_axis_angle(swing_axis, 100f64.to_radians()).unwrap();
        let pose = ArmPose { shoulder_rot: r, elbow_rot: r, ..ArmPose::IDENTITY };
        let clamped = clamp_pose(&pose, &m);
        let (swing, twist) = swing_twist(&clamped.shoulder_rot, m.upper).unwrap();
        assert!((swing.angle() - 85f64.to_radians()).abs() < 1e-12);
        assert!(twist.angle() < 1e-12);
        // Swing axis unchanged.
        let ax = swing.xyz().normalized().unwrap();
        assert!(ax.cross(swing_axis.normalized().unwrap()).norm() < 1e-12);
    }

    #[test]
    fn gripper_map_is_affine() {
        let (lo, hi) = (GESTURE_ANGLE_CLOSED, GESTURE_ANGLE_OPEN);
        assert_eq!(gripper_to_gesture(0.0, lo, hi), lo);
        assert_eq!(gripper_to_gesture(1.0, lo, hi), hi);
        assert!((gripper_to_gesture(0.5, lo, hi) - (lo + hi) * 0.5).abs() < 1e-15);
        assert_eq!(gripper_to_gesture(-3.0, lo, hi), lo);
        assert_eq!(gripper_to_gesture(7.0, lo, hi), hi);
    }

    /// Pose strictly inside the constraint box, margin in (0, 1).
    fn sample_pose_inside(m: &HumanArmModel, rng: &mut SplitMix64, margin: f64) -> ArmPose {
        let c = &m.constraints;
        let axis = m.upper.normalized().unwrap();
        let mut perp = axis.cross(geom::EZ);
        if perp.norm() < 1e-6 {
            perp = axis.cross(geom::EX);
        }
        let perp = perp.normalized().unwrap();
        let swing_dir = Rotation::from_axis_angle(axis, rng.range(0.0, std::f64::consts::TAU))
            .unwrap()
            .apply(perp);
        let swing =
            Rotation::from_axis_angle(swing_dir, rng.range(0.0, c.swing_max * margin)).unwrap();
        let twist = Rotation::from_axis_angle(
            axis,
            rng.range(c.twist_min * margin, c.twist_max * margin),
        )
        .unwrap();
        let shoulder_rot = swing.compose(&twist);
        let hinge = Rotation::from_axis_angle(
            m.elbow_axis,
            rng.range(c.hinge_min + 1e-3, c.hinge_max * margin),
        )
        .unwrap();
        ArmPose {
            shoulder_rot,
            elbow_rot: shoulder_rot.compose(&hinge),
            wrist_rot: rng.rotation(),
            stretch_upper: rng.range(c.stretch_min + 0.05, c.stretch_max - 0.05),
            stretch_forearm: rng.range(c.stretch_min + 0.05, c.stretch_max - 0.05),
        }
    }
}
