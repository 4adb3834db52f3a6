//! Overlay-ratio computation by perspective ray casting against capsules.
//!
//! Arm segments (robot links and model limbs) are approximated by capsules.
//! A pixel belongs to the robot silhouette when a primary ray hits any
//! robot capsule; it counts as covered when some human capsule is hit at or
//! in front of that depth (within a small slack, since the model skin sits
//! on the robot surface).

use crate::arm::{fk_arm, ArmPose, HumanArmModel};
use crate::error::{Error, Result};
use crate::geom::{Rotation, Vec3};
use crate::session::SessionFrame;

#[derive(Debug, Clone, Copy)]
pub struct Capsule {
    pub a: Vec3,
    pub b: Vec3,
    pub radius: f64,
}

impl Capsule {
    pub fn new(a: Vec3, b: Vec3, radius: f64) -> Self {
        Capsule { a, b, radius }
    }
}

pub const ROBOT_LINK_RADIUS: f64 = 0.045;
pub const HUMAN_UPPER_RADIUS: f64 = 0.042;
pub const HUMAN_FOREARM_RADIUS: f64 = 0.036;

#[derive(Debug, Clone, Copy)]
pub struct RenderParams {
    pub width: usize,
    pub height: usize,
    /// Vertical field of view, radians.
    pub vfov: f64,
    /// Near clip distance (m); closer hits are ignored.
    pub near: f64,
    /// A robot pixel counts as covered when a human hit lies within this
    /// much behind the robot hit (m).
    pub depth_slack: f64,
}

impl Default for RenderParams {
    fn default() -> Self {
        Self {
            width: 512,
            height: 512,
            vfov: 60f64.to_radians(),
            near: 0.05,
            // The human capsules are thinner than the robot links, so an
            // exactly aligned limb surface sits up to ~2.5 cm behind the
            // robot surface away from the centerline. The slack must admit
            // that whole band or exact alignment reads as uncovered.
            depth_slack: 0.025,
        }
    }
}

/// Robot arm capsules of a frame: shoulder→elbow and elbow→wrist links for
/// both sides.
pub fn robot_capsules(frame: &SessionFrame) -> Vec<Capsule> {
    let mut v = Vec::with_capacity(4);
    for (shoulder, refs) in [(frame.shoulders.0, &frame.left), (frame.shoulders.1, &frame.right)] {
        v.push(Capsule::new(shoulder, refs.elbow, ROBOT_LINK_RADIUS));
        v.push(Capsule::new(refs.elbow, refs.wrist, ROBOT_LINK_RADIUS));
    }
    v
}

/// Capsules of one posed model arm.
pub fn human_arm_capsules(model: &HumanArmModel, pose: &ArmPose) -> [Capsule; 2] {
    let (elbow, wrist) = fk_arm(model, pose);
    [
        Capsule::new(model.shoulder, elbow, HUMAN_UPPER_RADIUS),
        Capsule::new(elbow, wrist, HUMAN_FOREARM_RADIUS),
    ]
}

/// First intersection parameter of ray `origin + t * dir` with a capsule,
/// if any (`t >= 0`, `dir` unit).
fn ray_capsule(origin: Vec3, dir: Vec3, cap: &Capsule) -> Option<f64> {
    let ba = cap.b - cap.a;
    let oa = origin - cap.a;
    let baba = ba.dot(ba);
    let bard = ba.dot(dir);
    let baoa = ba.dot(oa);
    let rdoa = dir.dot(oa);
    let oaoa = oa.dot(oa);
    let r2 = cap.radius * cap.radius;

    let a = baba - bard * bard;
    let b = baba * rdoa - baoa * bard;
    let c = baba * oaoa - baoa * baoa - r2 * baba;

    if a > 1e-12 * baba {
        let h = b * b - a * c;
        if h >= 0.0 {
            let t = (-b - h.sqrt()) / a;
            let y = baoa + t * bard;
            if y >= 0.0 && y <= baba && t >= 0.0 {
                return Some(t);
            }
        } else {
            return None;
        }
    }
    // Spherical caps (also covers rays parallel to the axis).
    let mut best: Option<f64> = None;
    for center in [cap.a, cap.b] {
        let oc = origin - center;
        let b2 = dir.dot(oc);
        let c2 = oc.dot(oc) - r2;
        let h2 = b2 * b2 - c2;
        if h2 >= 0.0 {
            let t = -b2 - h2.sqrt();
            if t >= 0.0 && best.is_none_or(|m| t < m) {
                best = Some(t);
            }
        }
    }
    best
}

fn nearest_hit(origin: Vec3, dir: Vec3, caps: &[Capsule], near: f64) -> Option<f64> {
    let mut best: Option<f64> = None;
    for cap in caps {
        if let Some(t) = ray_capsule(origin, dir, cap) {
            if t >= near && best.is_none_or(|m| t < m) {
                best = Some(t);
            }
        }
    }
    best
}

/// Fraction of visible robot-silhouette pixels covered by the human
/// capsules, from the given camera. `None` when no robot pixel is visible
/// (the ratio is undefined and excluded from aggregates).
pub fn overlay_ratio(
    robot: &[Capsule],
    human: &[Capsule],
    cam_pose: (Vec3, Rotation),
    params: &RenderParams,
) -> Result<Option<f64>> {
    if robot.is_empty() {
        return Err(Error::InvalidArgument("overlay needs at least one robot capsule"));
    }
    if params.width == 0 || params.height == 0 || !(params.vfov > 0.0) || params.vfov >= std::f64::consts::PI {
        return Err(Error::InvalidArgument("bad render parameters"));
    }
    if !cam_pose.0.is_finite() {
        return Err(Error::InvalidArgument("camera position must be finite"));
    }

    let (eye, rot) = cam_pose;
    let tan_half = (params.vfov * 0.5).tan();
    let aspect = params.width as f64 / params.height as f64;
    let (w, h) = (params.width, params.height);

    let cast_row = |row: usize| -> (u64, u64) {
        let mut robot_px = 0u64;
        let mut covered_px = 0u64;
        let ndc_y = (1.0 - 2.0 * (row as f64 + 0.5) / h as f64) * tan_half;
        for col in 0..w {
            let ndc_x = (2.0 * (col as f64 + 0.5) / w as f64 - 1.0) * tan_half * aspect;
            let dir = rot
                .apply(Vec3::new(ndc_x, ndc_y, -1.0))
                .normalized()
                .expect("ray direction is nonzero");
            if let Some(t_r) = nearest_hit(eye, dir, robot, params.near) {
                robot_px += 1;
                if let Some(t_h) = nearest_hit(eye, dir, human, params.near) {
                    if t_h <= t_r + params.depth_slack {
                        covered_px += 1;
                    }
                }
            }
        }
        (robot_px, covered_px)
    };

    // Rows are independent; split them across threads and sum the counts.
    let threads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(h);
    let (robot_px, covered_px) = if threads <= 1 {
        let mut acc = (0u64, 0u64);
        for row in 0..h {
            let (r, c) = cast_row(row);
            acc.0 += r;
            acc.1 += c;
        }
        acc
    } else {
        let rows_per = h.div_ceil(threads);
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for chunk in 0..threads {
                let lo = chunk * rows_per;
                let hi = ((chunk + 1) * rows_per).min(h);
                let cast_row = &cast_row;
                handles.push(scope.spawn(move || {
                    let mut acc = (0u64, 0u64);
                    for row in lo..hi {
                        let (r, c) = cast_row(row);
                        acc.0 += r;
                        acc.1 += c;
                    }
                    acc
                }));
            }
            let mut acc = (0u64, 0u64);
            for hdl in handles {
                let (r, c) = hdl.join().expect("render worker panicked");
                acc.0 += r;
                acc.1 += c;
            }
            acc
        })
    };

    if robot_px == 0 {
        return Ok(None);
    }
    Ok(Some(covered_px as f64 / robot_px as f64))
}
