//! Rotation and projection primitives shared by all solvers.
//!
//! Rotations are unit quaternions (w-first) canonicalized to `w >= 0`, so
//! identical inputs always produce byte-identical outputs. Vectors are plain
//! `f64` triples in meters (or unitless for directions).

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Relative cross-product norm below which two directions are treated as
/// parallel when building a rotation between them.
pub const PARALLEL_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };
pub const EX: Vec3 = Vec3 { x: 1.0, y: 0.0, z: 0.0 };
pub const EY: Vec3 = Vec3 { x: 0.0, y: 1.0, z: 0.0 };
pub const EZ: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 1.0 };

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, rhs: Vec3) -> f64 {
        self.x * rhs.x + self.y * rhs.y + self.z * rhs.z
    }

    pub fn cross(self, rhs: Vec3) -> Vec3 {
        Vec3::new(
            self.y * rhs.z - self.z * rhs.y,
            self.z * rhs.x - self.x * rhs.z,
            self.x * rhs.y - self.y * rhs.x,
        )
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Unit vector in the same direction. Errors on a zero-length input.
    pub fn normalized(self) -> Result<Vec3> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidArgument("cannot normalize zero-length vector"));
        }
        Ok(self / n)
    }

    pub fn distance(self, rhs: Vec3) -> f64 {
        (self - rhs).norm()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
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
    fn mul(self, rhs: f64) -> Vec3 {
        Vec3::new(self.x * rhs, self.y * rhs, self.z * rhs)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, rhs: Vec3) -> Vec3 {
        rhs * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, rhs: f64) -> Vec3 {
        Vec3::new(self.x / rhs, self.y / rhs, self.z / rhs)
    }
}

/// Unit-quaternion rotation, stored w-first and canonicalized to `w >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    w: f64,
    x: f64,
    y: f64,
    z: f64,
}

impl Default for Rotation {
    fn default() -> Self {
        Rotation::IDENTITY
    }
}

impl Rotation {
    pub const IDENTITY: Rotation = Rotation { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };

    /// Builds from raw components, renormalizing and flipping the sign so
    /// `w >= 0`. Errors on a zero (or non-finite) quaternion.
    pub fn from_wxyz(w: f64, x: f64, y: f64, z: f64) -> Result<Rotation> {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidArgument("quaternion has zero or non-finite norm"));
        }
        let mut q = Rotation { w: w / n, x: x / n, y: y / n, z: z / n };
        if q.w < 0.0 {
            q = Rotation { w: -q.w, x: -q.x, y: -q.y, z: -q.z };
        }
        Ok(q)
    }

    /// Rotation of `angle` radians about `axis` (needs not be unit length).
    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Result<Rotation> {
        let axis = axis.normalized()?;
        let (s, c) = (angle * 0.5).sin_cos();
        Rotation::from_wxyz(c, axis.x * s, axis.y * s, axis.z * s)
    }

    /// Quaternion from an orthonormal basis given as column vectors
    /// (Shepperd's method). The basis must be right-handed.
    pub fn from_basis(bx: Vec3, by: Vec3, bz: Vec3) -> Result<Rotation> {
        // Rows of the rotation matrix with columns bx, by, bz.
        let m = [
            [bx.x, by.x, bz.x],
            [bx.y, by.y, bz.y],
            [bx.z, by.z, bz.z],
        ];
        let trace = m[0][0] + m[1][1] + m[2][2];
        if trace > 0.0 {
            let s = (trace + 1.0).sqrt() * 2.0;
            Rotation::from_wxyz(
                0.25 * s,
                (m[2][1] - m[1][2]) / s,
                (m[0][2] - m[2][0]) / s,
                (m[1][0] - m[0][1]) / s,
            )
        } else if m[0][0] > m[1][1] && m[0][0] > m[2][2] {
            let s = (1.0 + m[0][0] - m[1][1] - m[2][2]).sqrt() * 2.0;
            Rotation::from_wxyz(
                (m[2][1] - m[1][2]) / s,
                0.25 * s,
                (m[0][1] + m[1][0]) / s,
                (m[0][2] + m[2][0]) / s,
            )
        } else if m[1][1] > m[2][2] {
            let s = (1.0 + m[1][1] - m[0][0] - m[2][2]).sqrt() * 2.0;
            Rotation::from_wxyz(
                (m[0][2] - m[2][0]) / s,
                (m[0][1] + m[1][0]) / s,
                0.25 * s,
                (m[1][2] + m[2][1]) / s,
            )
        } else {
            let s = (1.0 + m[2][2] - m[0][0] - m[1][1]).sqrt() * 2.0;
            Rotation::from_wxyz(
                (m[1][0] - m[0][1]) / s,
                (m[0][2] + m[2][0]) / s,
                (m[1][2] + m[2][1]) / s,
                0.25 * s,
            )
        }
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn xyz(&self) -> Vec3 {
        Vec3::new(self.x, self.y, self.z)
    }

    pub fn wxyz(&self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn inverse(&self) -> Rotation {
        // Unit quaternion: inverse is the conjugate; already canonical
        // because w is unchanged.
        Rotation { w: self.w, x: -self.x, y: -self.y, z: -self.z }
    }

    /// Rotates a vector: `q v q*`.
    pub fn apply(&self, v: Vec3) -> Vec3 {
        let u = self.xyz();
        let t = u.cross(v) * 2.0;
        v + t * self.w + u.cross(t)
    }

    /// Rotation angle in `[0, pi]` (canonical shortest arc).
    pub fn angle(&self) -> f64 {
        2.0 * self.xyz().norm().atan2(self.w)
    }

    /// Geodesic distance to another rotation (angle of the relative
    /// rotation), in `[0, pi]`.
    pub fn angle_to(&self, other: &Rotation) -> f64 {
        (other.compose(&self.inverse())).angle()
    }

    /// `self ∘ inner`: applies `inner` first, then `self`.
    pub fn compose(&self, inner: &Rotation) -> Rotation {
        let (w1, v1) = (self.w, self.xyz());
        let (w2, v2) = (inner.w, inner.xyz());
        let w = w1 * w2 - v1.dot(v2);
        let v = v2 * w1 + v1 * w2 + v1.cross(v2);
        Rotation::from_wxyz(w, v.x, v.y, v.z)
            .expect("composition of unit quaternions is nonzero")
    }

    /// Spherical interpolation from `self` toward `to` by `t` in [0, 1],
    /// along the shorter arc.
    pub fn slerp(&self, to: &Rotation, t: f64) -> Rotation {
        let mut dot = self.w * to.w + self.x * to.x + self.y * to.y + self.z * to.z;
        let mut sign = 1.0;
        if dot < 0.0 {
            dot = -dot;
            sign = -1.0;
        }
        let (ka, kb) = if dot > 1.0 - 1e-12 {
            (1.0 - t, t)
        } else {
            let theta = dot.min(1.0).acos();
            let s = theta.sin();
            (((1.0 - t) * theta).sin() / s, (t * theta).sin() / s)
        };
        let kb = kb * sign;
        Rotation::from_wxyz(
            ka * self.w + kb * to.w,
            ka * self.x + kb * to.x,
            ka * self.y + kb * to.y,
            ka * self.z + kb * to.z,
        )
        .expect("slerp of unit quaternions is nonzero")
    }
}

impl Mul for Rotation {
    type Output = Rotation;
    fn mul(self, rhs: Rotation) -> Rotation {
        self.compose(&rhs)
    }
}

/// The rotation carrying the direction of `x` onto the direction of `y`,
/// about `x × y`. Anti-parallel inputs rotate 180° about a deterministic
/// perpendicular axis.
pub fn rot_from_to(x: Vec3, y: Vec3) -> Result<Rotation> {
    let xh = x.normalized()?;
    let yh = y.normalized()?;
    let cross = xh.cross(yh);
    let dot = xh.dot(yh);
    if cross.norm() < PARALLEL_EPS {
        if dot >= 0.0 {
            return Ok(Rotation::IDENTITY);
        }
        // 180° about a fixed perpendicular choice so the branch is total
        // and repeatable.
        let mut axis = xh.cross(EZ);
        if axis.norm() < 1e-8 {
            axis = xh.cross(EX);
        }
        return Rotation::from_axis_angle(axis, std::f64::consts::PI);
    }
    // Half-angle construction: (1 + x·y, x × y) normalizes to the shortest
    // arc between the two directions.
    Rotation::from_wxyz(1.0 + dot, cross.x, cross.y, cross.z)
}

/// Projection of `x` onto the plane with normal `y`.
pub fn project_perp(x: Vec3, y: Vec3) -> Result<Vec3> {
    let n2 = y.norm_sq();
    if n2 == 0.0 || !n2.is_finite() {
        return Err(Error::InvalidArgument("projection plane normal is zero"));
    }
    Ok(x - y * (x.dot(y) / n2))
}

/// Splits `r` into `(swing, twist)` with `swing ∘ twist = r`, where the
/// twist axis is parallel to `axis` and the swing axis perpendicular to it.
pub fn swing_twist(r: &Rotation, axis: Vec3) -> Result<(Rotation, Rotation)> {
    let axis = axis.normalized()?;
    let v = r.xyz();
    let proj = axis * v.dot(axis);
    let twist = match Rotation::from_wxyz(r.w(), proj.x, proj.y, proj.z) {
        Ok(t) => t,
        // r is a 180° rotation about an axis perpendicular to `axis`:
        // pure swing.
        Err(_) => Rotation::IDENTITY,
    };
    let swing = r.compose(&twist.inverse());
    Ok((swing, twist))
}

/// Scales the rotation angle by `alpha` on the shortest-arc branch,
/// keeping the axis.
pub fn rotation_pow(r: &Rotation, alpha: f64) -> Rotation {
    let v = r.xyz();
    let s = v.norm();
    if s < 1e-300 {
        return Rotation::IDENTITY;
    }
    let angle = 2.0 * s.atan2(r.w());
    let scaled = angle * alpha;
    let (sh, ch) = (scaled * 0.5).sin_cos();
    let axis = v / s;
    Rotation::from_wxyz(ch, axis.x * sh, axis.y * sh, axis.z * sh)
        .expect("axis-angle quaternion is nonzero")
}

/// Unsigned angle between two vectors, in `[0, pi]`.
pub fn angle_between(x: Vec3, y: Vec3) -> Result<f64> {
    if x.norm_sq() == 0.0 || y.norm_sq() == 0.0 {
        return Err(Error::InvalidArgument("angle of a zero-length vector"));
    }
    Ok(x.cross(y).norm().atan2(x.dot(y)))
}

/// Exponential map: axis-angle vector to rotation. `exp_map(ZERO)` is the
/// identity.
pub fn exp_map(v: Vec3) -> Rotation {
    let theta = v.norm();
    let (w, k) = if theta < 1e-6 {
        // sin(t/2)/t and cos(t/2) series keep the map smooth through zero.
        let t2 = theta * theta;
        (1.0 - t2 / 8.0 + t2 * t2 / 384.0, 0.5 - t2 / 48.0)
    } else {
        ((theta * 0.5).cos(), (theta * 0.5).sin() / theta)
    };
    Rotation::from_wxyz(w, v.x * k, v.y * k, v.z * k)
        .expect("exp map quaternion is nonzero")
}

/// Logarithm map, inverse of [`exp_map`] for angles below pi.
pub fn log_map(r: &Rotation) -> Vec3 {
    let v = r.xyz();
    let s = v.norm();
    if s < 1e-12 {
        // angle ≈ 2 s / w
        return v * (2.0 / r.w());
    }
    let angle = 2.0 * s.atan2(r.w());
    v * (angle / s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn assert_vec_close(a: Vec3, b: Vec3, tol: f64) {
        assert!((a - b).norm() <= tol, "{a:?} vs {b:?}");
    }

    #[test]
    fn rot_from_to_identical_directions() {
        let r = rot_from_to(EX, EX).unwrap();
        assert_eq!(r, Rotation::IDENTITY);
        let r = rot_from_to(EX * 3.0, EX * 0.2).unwrap();
        assert_eq!(r, Rotation::IDENTITY);
    }

    #[test]
    fn rot_from_to_orthogonal_is_quarter_turn() {
        let r = rot_from_to(EX, EY).unwrap();
        assert!((r.angle() - FRAC_PI_2).abs() < 1e-15);
        assert_vec_close(r.xyz().normalized().unwrap(), EZ, 1e-15);
        assert_vec_close(r.apply(EX), EY, 1e-15);
    }

    #[test]
    fn rot_from_to_antiparallel_uses_deterministic_axis() {
        let r = rot_from_to(EX, -EX).unwrap();
        assert!((r.angle() - PI).abs() < 1e-12);
        // Axis is normalize(EX × EZ) = -EY.
        assert!(r.xyz().cross(EY).norm() < 1e-12);
        assert_vec_close(r.apply(EX), -EX, 1e-12);

        // x parallel to e_z falls back to the e_x cross.
        let r = rot_from_to(EZ, -EZ).unwrap();
        assert!((r.angle() - PI).abs() < 1e-12);
        assert_vec_close(r.apply(EZ), -EZ, 1e-12);
    }

    #[test]
    fn rot_from_to_zero_input_errors() {
        assert!(rot_from_to(ZERO, EX).is_err());
        assert!(rot_from_to(EX, ZERO).is_err());
    }

    #[test]
    fn rot_from_to_random_pairs() {
        let mut rng = SplitMix64::new(0x5eed_0001);
        for _ in 0..10_000 {
            let x = rng.unit_vec3();
            let y = rng.unit_vec3();
            let n = x.cross(y);
            if n.norm() < 1e-6 {
                continue;
            }
            let r = rot_from_to(x, y).unwrap();
            assert!((r.apply(x) - y).norm() < 1e-12);
            let n = n.normalized().unwrap();
            assert!((r.apply(n) - n).norm() < 1e-12);
        }
    }

    #[test]
    fn project_perp_cases() {
        assert_vec_close(project_perp(EX, EY).unwrap(), EX, 0.0);
        assert_vec_close(project_perp(EY, EY).unwrap(), ZERO, 0.0);
        assert_vec_close(project_perp(Vec3::new(1.0, 1.0, 0.0), EY).unwrap(), EX, 0.0);
        assert!(project_perp(EX, ZERO).is_err());
    }

    #[test]
    fn project_perp_orthogonal_and_idempotent() {
        let mut rng = SplitMix64::new(0x5eed_0002);
        for _ in 0..1000 {
            let x = rng.unit_vec3() * rng.range(0.1, 10.0);
            let y = rng.unit_vec3() * rng.range(0.1, 10.0);
            let p = project_perp(x, y).unwrap();
            assert!(p.dot(y).abs() <= 1e-14 * x.norm() * y.norm());
            let pp = project_perp(p, y).unwrap();
            assert!((pp - p).norm() <= 1e-14 * p.norm().max(1e-30));
            // x - p is parallel to y.
            assert!((x - p).cross(y).norm() <= 1e-13 * x.norm() * y.norm());
        }
    }

    #[test]
    fn swing_twist_identity_and_pure_twist() {
        let (s, t) = swing_twist(&Rotation::IDENTITY, EZ).unwrap();
        assert_eq!(s, Rotation::IDENTITY);
        assert_eq!(t, Rotation::IDENTITY);

        let r = Rotation::from_axis_angle(EZ, 30f64.to_radians()).unwrap();
        let (s, t) = swing_twist(&r, EZ).unwrap();
        assert!(s.angle() < 1e-15);
        assert!((t.angle() - 30f64.to_radians()).abs() < 1e-15);
    }

    #[test]
    fn swing_twist_recomposes() {
        let mut rng = SplitMix64::new(0x5eed_0003);
        for _ in 0..10_000 {
            let r = rng.rotation();
            let axis = rng.unit_vec3();
            let (s, t) = swing_twist(&r, axis).unwrap();
            assert!(s.compose(&t).angle_to(&r) < 1e-12);
            // Twist axis parallel to `axis`, swing axis perpendicular.
            assert!(t.xyz().cross(axis).norm() < 1e-9);
            assert!(s.xyz().dot(axis).abs() < 1e-9);
        }
    }

    #[test]
    fn rotation_pow_scales_angle() {
        let r = Rotation::from_axis_angle(EZ, FRAC_PI_2).unwrap();
        assert_eq!(rotation_pow(&r, 0.0), Rotation::IDENTITY);
        assert!(rotation_pow(&r, 1.0).angle_to(&r) < 1e-15);
        let h = rotation_pow(&r, 0.5);
        assert!((h.angle() - FRAC_PI_2 / 2.0).abs() < 1e-15);
        assert!(h.xyz().cross(EZ).norm() < 1e-15);
    }

    #[test]
    fn rotation_pow_is_additive() {
        let mut rng = SplitMix64::new(0x5eed_0004);
        for _ in 0..1000 {
            let r = rng.rotation();
            let a = rng.range(0.0, 1.0);
            let b = rng.range(0.0, 1.0);
            let lhs = rotation_pow(&r, a).compose(&rotation_pow(&r, b));
            let rhs = rotation_pow(&r, a + b);
            assert!(lhs.angle_to(&rhs) < 1e-10);
        }
    }

    #[test]
    fn angle_between_cases() {
        assert_eq!(angle_between(EX, EX).unwrap(), 0.0);
        assert!((angle_between(EX, -EX).unwrap() - PI).abs() < 1e-15);
        assert!((angle_between(EX, EY).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!(angle_between(ZERO, EY).is_err());
        let a = Vec3::new(0.3, -0.2, 0.9);
        let b = Vec3::new(-1.4, 0.2, 0.3);
        assert!((angle_between(a, b).unwrap() - angle_between(b, a).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn exp_log_round_trip() {
        assert_eq!(exp_map(ZERO), Rotation::IDENTITY);
        let r = exp_map(Vec3::new(FRAC_PI_2, 0.0, 0.0));
        assert!((r.angle() - FRAC_PI_2).abs() < 1e-15);
        assert!(r.xyz().cross(EX).norm() < 1e-15);

        let mut rng = SplitMix64::new(0x5eed_0005);
        for _ in 0..10_000 {
            let v = rng.unit_vec3() * rng.range(0.0, PI - 1e-3);
            let back = log_map(&exp_map(v));
            assert!((back - v).norm() < 1e-10, "{v:?} -> {back:?}");
        }
    }

    #[test]
    fn quaternions_stay_canonical() {
        let mut rng = SplitMix64::new(0x5eed_0006);
        let mut q = Rotation::IDENTITY;
        for _ in 0..1000 {
            q = q.compose(&rng.rotation());
            assert!(q.w() >= 0.0);
            assert!((q.norm() - 1.0).abs() < 1e-9);
        }
    }
}
