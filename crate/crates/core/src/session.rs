//! Session frames, the newline-delimited log format, the 12-pose static
//! catalog, the emulated therapy trajectory, and the base-pose low-pass
//! filter.
//!
//! # Log format
//!
//! UTF-8 text, one record per line. Line 1 is the header
//! `AVTR 1 <rate_hz>`. Every following line is one frame with
//! space-separated fields in fixed order:
//!
//! ```text
//! t  base(px py pz qw qx qy qz)  cam(7)  shoulderL(3)  shoulderR(3)
//!    L: elbow(3) wrist(3) ee_rot(4) gripper
//!    R: elbow(3) wrist(3) ee_rot(4) gripper
//! ```
//!
//! Floats are printed with 13 significant digits, quaternions normalized
//! and w-first. The relay streams the same grammar over a socket.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::arm::Side;
use crate::error::{Error, Result};
use crate::geom::{rot_from_to, Rotation, Vec3, EX, EY, EZ};

/// Robot-side targets for one arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmRefs {
    /// Reference elbow position.
    pub elbow: Vec3,
    /// Reference wrist position.
    pub wrist: Vec3,
    /// End-effector rotation, copied onto the model's wrist.
    pub ee_rot: Rotation,
    /// Gripper openness in [0, 1].
    pub gripper: f64,
}

/// One timestamped snapshot: robot references for both arms plus the robot
/// base and patient camera poses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionFrame {
    pub t: f64,
    pub base_pose: (Vec3, Rotation),
    pub cam_pose: (Vec3, Rotation),
    /// Robot shoulder reference positions, (left, right).
    pub shoulders: (Vec3, Vec3),
    pub left: ArmRefs,
    pub right: ArmRefs,
}

impl SessionFrame {
    pub fn refs(&self, side: Side) -> &ArmRefs {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    pub fn shoulder_ref(&self, side: Side) -> Vec3 {
        match side {
            Side::Left => self.shoulders.0,
            Side::Right => self.shoulders.1,
        }
    }
}

/// A recorded or generated frame sequence with its nominal rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub rate_hz: f64,
    pub frames: Vec<SessionFrame>,
}

pub const FORMAT_MAGIC: &str = "AVTR";
pub const FORMAT_VERSION: u32 = 1;

fn fmt_f64(x: f64) -> String {
    format!("{x:.12e}")
}

fn push_vec(out: &mut String, v: Vec3) {
    use std::fmt::Write;
    write!(out, " {} {} {}", fmt_f64(v.x), fmt_f64(v.y), fmt_f64(v.z)).unwrap();
}

fn push_rot(out: &mut String, r: Rotation) {
    use std::fmt::Write;
    let [w, x, y, z] = r.wxyz();
    write!(out, " {} {} {} {}", fmt_f64(w), fmt_f64(x), fmt_f64(y), fmt_f64(z)).unwrap();
}

pub fn format_header(rate_hz: f64) -> String {
    format!("{FORMAT_MAGIC} {FORMAT_VERSION} {}", fmt_f64(rate_hz))
}

/// Serializes one frame as a single line (no trailing newline).
pub fn format_frame(f: &SessionFrame) -> String {
    let mut s = fmt_f64(f.t);
    push_vec(&mut s, f.base_pose.0);
    push_rot(&mut s, f.base_pose.1);
    push_vec(&mut s, f.cam_pose.0);
    push_rot(&mut s, f.cam_pose.1);
    push_vec(&mut s, f.shoulders.0);
    push_vec(&mut s, f.shoulders.1);
    for refs in [&f.left, &f.right] {
        push_vec(&mut s, refs.elbow);
        push_vec(&mut s, refs.wrist);
        push_rot(&mut s, refs.ee_rot);
        s.push(' ');
        s.push_str(&fmt_f64(refs.gripper));
    }
    s
}

const FRAME_FIELDS: usize = 1 + 7 + 7 + 3 + 3 + 2 * (3 + 3 + 4 + 1);

struct FieldReader<'a> {
    fields: std::str::SplitAsciiWhitespace<'a>,
    line: usize,
}

impl<'a> FieldReader<'a> {
    fn f64(&mut self) -> Result<f64> {
        let tok = self.fields.next().ok_or(Error::Parse {
            line: self.line,
            msg: "truncated frame line".into(),
        })?;
        tok.parse().map_err(|_| Error::Parse {
            line: self.line,
            msg: format!("not a number: {tok:?}"),
        })
    }

    fn vec3(&mut self) -> Result<Vec3> {
        Ok(Vec3::new(self.f64()?, self.f64()?, self.f64()?))
    }

    fn rot(&mut self) -> Result<Rotation> {
        let (w, x, y, z) = (self.f64()?, self.f64()?, self.f64()?, self.f64()?);
        Rotation::from_wxyz(w, x, y, z).map_err(|_| Error::Parse {
            line: self.line,
            msg: "invalid quaternion".into(),
        })
    }
}

/// Parses a frame line. `line` is the 1-based line number used in errors.
pub fn parse_frame(text: &str, line: usize) -> Result<SessionFrame> {
    let count = text.split_ascii_whitespace().count();
    if count != FRAME_FIELDS {
        return Err(Error::Parse {
            line,
            msg: format!("expected {FRAME_FIELDS} fields, found {count}"),
        });
    }
    let mut r = FieldReader { fields: text.split_ascii_whitespace(), line };
    let t = r.f64()?;
    let base_pose = (r.vec3()?, r.rot()?);
    let cam_pose = (r.vec3()?, r.rot()?);
    let shoulders = (r.vec3()?, r.vec3()?);
    let mut arms = [None, None];
    for slot in &mut arms {
        *slot = Some(ArmRefs {
            elbow: r.vec3()?,
            wrist: r.vec3()?,
            ee_rot: r.rot()?,
            gripper: r.f64()?,
        });
    }
    Ok(SessionFrame {
        t,
        base_pose,
        cam_pose,
        shoulders,
        left: arms[0].unwrap(),
        right: arms[1].unwrap(),
    })
}

/// Parses the header line, returning the rate.
pub fn parse_header(text: &str) -> Result<f64> {
    let mut parts = text.split_ascii_whitespace();
    let magic = parts.next().unwrap_or("");
    if magic != FORMAT_MAGIC {
        return Err(Error::Parse { line: 1, msg: format!("bad magic {magic:?}") });
    }
    let version: u32 = parts
        .next()
        .and_then(|v| v.parse().ok())
        .ok_or(Error::Parse { line: 1, msg: "missing format version".into() })?;
    if version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let rate: f64 = parts
        .next()
        .and_then(|v| v.parse().ok())
        .ok_or(Error::Parse { line: 1, msg: "missing rate".into() })?;
    if parts.next().is_some() {
        return Err(Error::Parse { line: 1, msg: "trailing fields in header".into() });
    }
    Ok(rate)
}

pub fn write_session<W: Write>(mut w: W, session: &Session) -> Result<()> {
    writeln!(w, "{}", format_header(session.rate_hz))?;
    for f in &session.frames {
        writeln!(w, "{}", format_frame(f))?;
    }
    Ok(())
}

pub fn read_session<R: Read>(r: R) -> Result<Session> {
    let mut lines = BufReader::new(r).lines();
    let header = lines
        .next()
        .ok_or(Error::Parse { line: 1, msg: "empty file".into() })??;
    let rate_hz = parse_header(&header)?;
    let mut frames = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        frames.push(parse_frame(&line, idx + 2)?);
    }
    Ok(Session { rate_hz, frames })
}

pub fn write_session_file(path: &Path, session: &Session) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_session(&mut w, session)?;
    w.flush()?;
    Ok(())
}

pub fn read_session_file(path: &Path) -> Result<Session> {
    read_session(File::open(path)?)
}

/// Exponential moving average over a rigid pose: positions blend linearly,
/// rotations by spherical interpolation. A constant input is a fixed point.
#[derive(Debug, Clone)]
pub struct FilterState {
    beta: f64,
    state: Option<(Vec3, Rotation)>,
}

impl FilterState {
    /// `beta` in (0, 1]: the weight of each new sample.
    pub fn new(beta: f64) -> Result<FilterState> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::InvalidArgument("filter beta must be in (0, 1]"));
        }
        Ok(FilterState { beta, state: None })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Feeds one raw sample, returning the smoothed pose. The first sample
    /// initializes the state.
    pub fn step(&mut self, raw: (Vec3, Rotation)) -> (Vec3, Rotation) {
        let next = match &self.state {
            None => raw,
            Some((p, r)) => {
                let pos = *p * (1.0 - self.beta) + raw.0 * self.beta;
                let rot = r.slerp(&raw.1, self.beta);
                (pos, rot)
            }
        };
        self.state = Some(next);
        next
    }
}

pub const DEFAULT_FILTER_BETA: f64 = 0.2;

/// Robot-side reference geometry used by the synthetic sessions. The
/// segment lengths deliberately differ from the human defaults (0.25 /
/// 0.24 m) so nontrivial stretch factors arise.
pub const ROBOT_SHOULDER_HALF_WIDTH: f64 = 0.18;
pub const ROBOT_SHOULDER_HEIGHT: f64 = 1.10;
pub const ROBOT_UPPER_LEN: f64 = 0.27;
pub const ROBOT_FOREARM_LEN: f64 = 0.29;

fn robot_shoulders() -> (Vec3, Vec3) {
    (
        Vec3::new(-ROBOT_SHOULDER_HALF_WIDTH, 0.0, ROBOT_SHOULDER_HEIGHT),
        Vec3::new(ROBOT_SHOULDER_HALF_WIDTH, 0.0, ROBOT_SHOULDER_HEIGHT),
    )
}

fn mirror_point(p: Vec3) -> Vec3 {
    Vec3::new(-p.x, p.y, p.z)
}

fn mirror_rot(r: Rotation) -> Rotation {
    let [w, x, y, z] = r.wxyz();
    Rotation::from_wxyz(w, x, -y, -z).expect("mirror of unit quaternion")
}

fn mirror_refs(r: &ArmRefs) -> ArmRefs {
    ArmRefs {
        elbow: mirror_point(r.elbow),
        wrist: mirror_point(r.wrist),
        ee_rot: mirror_rot(r.ee_rot),
        gripper: r.gripper,
    }
}

/// Camera rotation looking from `eye` toward `target` with `up` roughly up.
/// Camera convention: -z looks forward, +x right, +y up.
pub fn look_at(eye: Vec3, target: Vec3, up: Vec3) -> Result<Rotation> {
    let back = (eye - target).normalized()?;
    let right = up.cross(back).normalized()?;
    let cam_up = back.cross(right);
    Rotation::from_basis(right, cam_up, back)
}

fn front_camera() -> (Vec3, Rotation) {
    // Front view, offset a little to the side and above so poses pointing
    // straight ahead still show their silhouettes instead of being seen
    // end-on.
    let eye = Vec3::new(0.5, 2.1, 1.55);
    let rot = look_at(eye, Vec3::new(0.0, 0.0, 1.1), EZ).expect("camera basis");
    (eye, rot)
}

/// Right-arm references from an explicit pair of segment directions
/// (`upper`, `fore` need not be unit).
fn right_refs_from_dirs(upper: Vec3, fore: Vec3, ee_twist_deg: f64, gripper: f64) -> ArmRefs {
    let u = upper.normalized().expect("catalog upper direction");
    let f = fore.normalized().expect("catalog forearm direction");
    let shoulder = robot_shoulders().1;
    let elbow = shoulder + u * ROBOT_UPPER_LEN;
    let wrist = elbow + f * ROBOT_FOREARM_LEN;
    let ee_rot = Rotation::from_axis_angle(f, ee_twist_deg.to_radians())
        .expect("forearm axis")
        .compose(&rot_from_to(EX, f).expect("nonzero directions"));
    ArmRefs { elbow, wrist, ee_rot, gripper }
}

/// Right-arm references from swing/twist/hinge values of the shoulder-
/// elbow chain (defaults along +x, hinge axis +y). Values inside the joint
/// constraints produce poses that are exactly reachable for the iterative
/// baselines.
fn right_refs_from_params(
    upper_dir: Vec3,
    twist_deg: f64,
    hinge_deg: f64,
    ee_twist_deg: f64,
    gripper: f64,
) -> ArmRefs {
    let u = upper_dir.normalized().expect("catalog upper direction");
    let swing = rot_from_to(EX, u).expect("nonzero directions");
    let twist = Rotation::from_axis_angle(EX, twist_deg.to_radians()).expect("unit axis");
    let hinge = Rotation::from_axis_angle(EY, hinge_deg.to_radians()).expect("unit axis");
    let f = swing.compose(&twist).compose(&hinge).apply(EX);
    right_refs_from_dirs(u, f, ee_twist_deg, gripper)
}

fn frame_from_right(t: f64, right: ArmRefs, cam: (Vec3, Rotation)) -> SessionFrame {
    SessionFrame {
        t,
        base_pose: (Vec3::new(0.0, 0.0, 0.0), Rotation::IDENTITY),
        cam_pose: cam,
        shoulders: robot_shoulders(),
        left: mirror_refs(&right),
        right,
    }
}

/// The 12 static evaluation poses: three hands-down variants (pose 2 has
/// fully colinear segments and exercises the degenerate elbow axis), three
/// hands-up variants, the T-pose, four arms-in-front variants, and the
/// A-pose. The hands-down poses sit outside the swing cone on purpose;
/// poses 4-12 are generated from in-constraint swing/twist/hinge values so
/// the constrained baselines can reach them. Left references mirror the
/// right ones across the x = 0 plane.
pub fn pose_catalog() -> Session {
    let deg80 = 80f64.to_radians();
    let elev80 = Vec3::new(deg80.cos(), 0.0, deg80.sin());
    let front80 = Vec3::new(deg80.cos(), deg80.sin(), 0.0);
    let s = std::f64::consts::FRAC_1_SQRT_2;

    let raw = |u: Vec3, f: Vec3, tw: f64, g: f64| right_refs_from_dirs(u, f, tw, g);
    let param = |u: Vec3, twist: f64, hinge: f64, tw: f64, g: f64| {
        right_refs_from_params(u, twist, hinge, tw, g)
    };
    let refs: [ArmRefs; 12] = [
        raw(-EZ, EY, 0.0, 0.0),                                  // 1 hands down, forearm forward
        raw(-EZ, -EZ, 0.0, 1.0 / 11.0),                          // 2 hands down, straight
        raw(-EZ, -EY, 0.0, 2.0 / 11.0),                          // 3 hands down, forearm backward
        param(elev80, 45.0, 90.0, 25.0, 3.0 / 11.0),             // 4 hands up, bent
        param(elev80, 0.0, 15.0, 0.0, 4.0 / 11.0),               // 5 hands up, nearly straight
        param(elev80, -45.0, 60.0, 0.0, 5.0 / 11.0),             // 6 hands up, bent back
        param(EX, 0.0, 0.0, 0.0, 6.0 / 11.0),                    // 7 T-pose (colinear)
        param(front80, 30.0, 90.0, 0.0, 7.0 / 11.0),             // 8 in front, square bend
        param(front80, 0.0, 90.0, -30.0, 8.0 / 11.0),            // 9 in front, forearm down
        param(front80, -30.0, 30.0, 0.0, 9.0 / 11.0),            // 10 in front, slight bend
        param(Vec3::new(1.0, 1.0, 0.7), 60.0, 45.0, 40.0, 10.0 / 11.0), // 11 front-up diagonal
        param(Vec3::new(s, 0.0, -s), 0.0, 0.0, 0.0, 1.0),        // 12 A-pose (colinear)
    ];
    let cam = front_camera();
    let frames = refs
        .iter()
        .enumerate()
        .map(|(i, &r)| frame_from_right(i as f64, r, cam))
        .collect();
    Session { rate_hz: 1.0, frames }
}

/// Emulated therapy trajectory: the elbow reference stays fixed while the
/// wrist reference sweeps a circular arc around it, with the hinge
/// excursion running 0° → 90° → 0° over the session. The camera is fixed
/// in front of the robot.
pub fn therapy_trajectory(duration_s: f64, rate_hz: f64) -> Result<Session> {
    if !(duration_s > 0.0) || !(rate_hz > 0.0) {
        return Err(Error::InvalidArgument("therapy duration and rate must be positive"));
    }
    let upper = Vec3::new(0.5, 0.62, -0.6).normalized().unwrap();
    let swing = rot_from_to(EX, upper).expect("nonzero directions");
    let shoulder_twist = Rotation::from_axis_angle(EX, 20f64.to_radians()).expect("unit axis");
    let arm_rot = swing.compose(&shoulder_twist);
    let shoulder = robot_shoulders().1;
    let elbow = shoulder + upper * ROBOT_UPPER_LEN;
    let cam = front_camera();

    let n = (duration_s * rate_hz).floor() as usize + 1;
    let mut frames = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / rate_hz;
        let phase = std::f64::consts::PI * t / duration_s;
        let hinge = std::f64::consts::FRAC_PI_2 * phase.sin() * phase.sin();
        let f = arm_rot
            .apply(Rotation::from_axis_angle(EY, hinge).expect("unit axis").apply(EX));
        let wrist = elbow + f * ROBOT_FOREARM_LEN;
        let twist = 15f64.to_radians() * (2.0 * phase).sin();
        let ee_rot = Rotation::from_axis_angle(f, twist)
            .expect("forearm axis")
            .compose(&rot_from_to(EX, f).expect("nonzero directions"));
        let gripper = 0.5 * (1.0 - (2.0 * phase).cos());
        let right = ArmRefs { elbow, wrist, ee_rot, gripper };
        frames.push(frame_from_right(t, right, cam));
    }
    Ok(Session { rate_hz, frames })
}
