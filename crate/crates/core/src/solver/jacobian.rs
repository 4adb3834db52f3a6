//! Damped-least-squares baseline with a weighted elbow secondary
//! objective.
//!
//! The arm is parameterized by six values: the upper-arm swing as an
//! exponential map with zero component along the upper-arm axis (2), the
//! shoulder twist about that axis (1), the elbow hinge angle (1), and the
//! two stretch factors. The stacked residual puts the wrist error on top
//! of the elbow error scaled by a small weight, and every step solves the
//! damped normal equations before projecting the parameters back into the
//! joint constraints.

use crate::arm::{ArmPose, HumanArmModel, JointConstraints};
use crate::error::{Error, Result};
use crate::geom::{exp_map, Rotation, Vec3, EX, EZ};
use crate::session::ArmRefs;
use crate::solver::{ArmSolver, SolveReport};

pub const N_PARAMS: usize = 6;

/// Parameter vector layout.
pub const IDX_SWING_A: usize = 0;
pub const IDX_SWING_B: usize = 1;
pub const IDX_TWIST: usize = 2;
pub const IDX_HINGE: usize = 3;
pub const IDX_STRETCH_U: usize = 4;
pub const IDX_STRETCH_F: usize = 5;

#[derive(Debug, Clone, Copy)]
pub struct JacobianParams {
    /// DLS damping constant.
    pub lambda: f64,
    /// Elbow secondary-objective weight.
    pub elbow_weight: f64,
    /// Cap on the parameter-step norm.
    pub step_cap: f64,
    pub max_iters: u32,
    /// Wrist residual (m) below which a solve counts as converged.
    pub tol: f64,
}

impl Default for JacobianParams {
    fn default() -> Self {
        Self { lambda: 0.2, elbow_weight: 0.1, step_cap: 1.0, max_iters: 200, tol: 1e-3 }
    }
}

/// Solver state for one arm: the parameter vector persists across frames
/// so session replay warm-starts from the previous pose.
#[derive(Debug, Clone)]
pub struct JacobianState {
    pub theta: [f64; N_PARAMS],
    pub params: JacobianParams,
}

impl JacobianState {
    /// Starts from the default configuration with the elbow pre-bent 20°;
    /// a perfectly straight arm is a Jacobian singularity.
    pub fn new(params: JacobianParams, _model: &HumanArmModel) -> Self {
        let mut theta = [0.0; N_PARAMS];
        theta[IDX_HINGE] = 20f64.to_radians();
        theta[IDX_STRETCH_U] = 1.0;
        theta[IDX_STRETCH_F] = 1.0;
        JacobianState { theta, params }
    }
}

/// Orthonormal basis of the swing plane (perpendicular to the default
/// upper-arm direction), chosen deterministically.
pub fn swing_basis(upper: Vec3) -> (Vec3, Vec3) {
    let d = upper.normalized().expect("model upper arm is nonzero");
    let mut e1 = d.cross(EZ);
    if e1.norm() < 1e-8 {
        e1 = d.cross(EX);
    }
    let e1 = e1.normalized().expect("basis vector is nonzero");
    (e1, d.cross(e1))
}

/// Forward kinematics of the parameter vector.
struct Kinematics {
    swing: Rotation,
    shoulder_rot: Rotation,
    elbow_rot: Rotation,
    elbow_pos: Vec3,
    wrist_pos: Vec3,
}

fn kinematics(theta: &[f64; N_PARAMS], model: &HumanArmModel) -> Kinematics {
    let (e1, e2) = swing_basis(model.upper);
    let upper_axis = model.upper.normalized().expect("model upper arm is nonzero");
    let swing = exp_map(e1 * theta[IDX_SWING_A] + e2 * theta[IDX_SWING_B]);
    let twist = Rotation::from_axis_angle(upper_axis, theta[IDX_TWIST]).expect("unit axis");
    let hinge = Rotation::from_axis_angle(model.elbow_axis, theta[IDX_HINGE]).expect("axis");
    let shoulder_rot = swing.compose(&twist);
    let elbow_rot = shoulder_rot.compose(&hinge);
    let elbow_pos = model.shoulder + shoulder_rot.apply(model.upper * theta[IDX_STRETCH_U]);
    let wrist_pos = elbow_pos + elbow_rot.apply(model.forearm * theta[IDX_STRETCH_F]);
    Kinematics { swing, shoulder_rot, elbow_rot, elbow_pos, wrist_pos }
}

/// Stacked residual: wrist error over the weighted elbow error.
pub fn residual(state: &JacobianState, model: &HumanArmModel, refs: &ArmRefs) -> [f64; 6] {
    let kin = kinematics(&state.theta, model);
    let we = state.params.elbow_weight;
    let dw = kin.wrist_pos - refs.wrist;
    let de = (kin.elbow_pos - refs.elbow) * we;
    [dw.x, dw.y, dw.z, de.x, de.y, de.z]
}

/// Applies the SO(3) left Jacobian of the exponential map at `v` to `e`:
/// the world angular velocity produced by perturbing the exp-map
/// coordinates along `e`.
fn left_jacobian_apply(v: Vec3, e: Vec3) -> Vec3 {
    let theta2 = v.norm_sq();
    let (c1, c2) = if theta2 < 1e-8 {
        (0.5 - theta2 / 24.0, 1.0 / 6.0 - theta2 / 120.0)
    } else {
        let theta = theta2.sqrt();
        ((1.0 - theta.cos()) / theta2, (theta - theta.sin()) / (theta2 * theta))
    };
    e + v.cross(e) * c1 + v.cross(v.cross(e)) * c2
}

/// Analytic 6×6 Jacobian of the stacked residual with respect to the
/// parameters. Rows 0..3 are the wrist block, rows 3..6 the weighted
/// elbow block.
pub fn jacobian(state: &JacobianState, model: &HumanArmModel) -> [[f64; 6]; 6] {
    let theta = &state.theta;
    let kin = kinematics(theta, model);
    let (e1, e2) = swing_basis(model.upper);
    let upper_axis = model.upper.normalized().expect("model upper arm is nonzero");
    let swing_vec = e1 * theta[IDX_SWING_A] + e2 * theta[IDX_SWING_B];

    let arm_w = kin.wrist_pos - model.shoulder;
    let arm_e = kin.elbow_pos - model.shoulder;
    let fore = kin.wrist_pos - kin.elbow_pos;
    let twist_axis_world = kin.swing.apply(upper_axis);
    let hinge_axis_world = kin
        .shoulder_rot
        .apply(model.elbow_axis.normalized().expect("model elbow axis is nonzero"));

    let mut cols: [(Vec3, Vec3); 6] = [(Vec3::default(), Vec3::default()); 6];
    // Swing columns rotate the whole arm about the shoulder.
    for (i, e) in [(IDX_SWING_A, e1), (IDX_SWING_B, e2)] {
        let omega = left_jacobian_apply(swing_vec, e);
        cols[i] = (omega.cross(arm_w), omega.cross(arm_e));
    }
    // Twist and hinge move only the forearm.
    cols[IDX_TWIST] = (twist_axis_world.cross(fore), Vec3::default());
    cols[IDX_HINGE] = (hinge_axis_world.cross(fore), Vec3::default());
    // Stretches are linear along the current segment directions.
    let du = kin.shoulder_rot.apply(model.upper);
    cols[IDX_STRETCH_U] = (du, du);
    cols[IDX_STRETCH_F] = (kin.elbow_rot.apply(model.forearm), Vec3::default());

    let we = state.params.elbow_weight;
    let mut j = [[0.0; 6]; 6];
    for (c, (dw, de)) in cols.iter().enumerate() {
        j[0][c] = dw.x;
        j[1][c] = dw.y;
        j[2][c] = dw.z;
        j[3][c] = de.x * we;
        j[4][c] = de.y * we;
        j[5][c] = de.z * we;
    }
    j
}

/// Solves the damped normal equations `(J Jᵀ + λ²I) y = rhs` and returns
/// `(y, Jᵀ y)`.
pub fn damped_normal_solve(
    jac: &[[f64; 6]; 6],
    rhs: &[f64; 6],
    lambda: f64,
) -> Result<([f64; 6], [f64; 6])> {
    let mut a = [[0.0; 6]; 6];
    for r in 0..6 {
        for c in 0..6 {
            let mut s = 0.0;
            for k in 0..6 {
                s += jac[r][k] * jac[c][k];
            }
            a[r][c] = s;
        }
        a[r][r] += lambda * lambda;
    }
    let y = cholesky_solve(&a, rhs).ok_or(Error::SolverDiverged("damped system not solvable"))?;
    let mut delta = [0.0; 6];
    for c in 0..6 {
        let mut s = 0.0;
        for r in 0..6 {
            s += jac[r][c] * y[r];
        }
        delta[c] = s;
    }
    Ok((y, delta))
}

fn cholesky_solve(a: &[[f64; 6]; 6], b: &[f64; 6]) -> Option<[f64; 6]> {
    let mut l = [[0.0; 6]; 6];
    for i in 0..6 {
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if !(s > 0.0) || !s.is_finite() {
                    return None;
                }
                l[i][j] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    // Forward then back substitution.
    let mut y = [0.0; 6];
    for i in 0..6 {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    let mut x = [0.0; 6];
    for i in (0..6).rev() {
        let mut s = y[i];
        for k in i + 1..6 {
            s -= l[k][i] * x[k];
        }
        x[i] = s / l[i][i];
    }
    Some(x)
}

/// Projects the parameter vector onto the joint constraints: radial clamp
/// of the swing, box clamps elsewhere.
pub fn project_constraints(theta: &mut [f64; N_PARAMS], c: &JointConstraints) {
    let s = (theta[IDX_SWING_A].powi(2) + theta[IDX_SWING_B].powi(2)).sqrt();
    if s > c.swing_max {
        let k = c.swing_max / s;
        theta[IDX_SWING_A] *= k;
        theta[IDX_SWING_B] *= k;
    }
    theta[IDX_TWIST] = theta[IDX_TWIST].clamp(c.twist_min, c.twist_max);
    theta[IDX_HINGE] = theta[IDX_HINGE].clamp(c.hinge_min, c.hinge_max);
    theta[IDX_STRETCH_U] = theta[IDX_STRETCH_U].clamp(c.stretch_min, c.stretch_max);
    theta[IDX_STRETCH_F] = theta[IDX_STRETCH_F].clamp(c.stretch_min, c.stretch_max);
}

/// One damped-least-squares update followed by constraint projection.
/// Returns the applied parameter step.
pub fn dls_step(
    state: &mut JacobianState,
    model: &HumanArmModel,
    refs: &ArmRefs,
) -> Result<[f64; N_PARAMS]> {
    let r = residual(state, model, refs);
    let j = jacobian(state, model);
    let rhs = r.map(|v| -v);
    let (_, mut delta) = damped_normal_solve(&j, &rhs, state.params.lambda)?;
    let norm = delta.iter().map(|d| d * d).sum::<f64>().sqrt();
    if norm > state.params.step_cap {
        let k = state.params.step_cap / norm;
        delta.iter_mut().for_each(|d| *d *= k);
    }
    for i in 0..N_PARAMS {
        state.theta[i] += delta[i];
    }
    project_constraints(&mut state.theta, &model.constraints);
    if state.theta.iter().any(|v| !v.is_finite()) {
        return Err(Error::SolverDiverged("non-finite parameters"));
    }
    Ok(delta)
}

/// Pose corresponding to the current parameters; the wrist rotation is
/// copied from the references.
pub fn pose_from_state(state: &JacobianState, model: &HumanArmModel, refs: &ArmRefs) -> ArmPose {
    let kin = kinematics(&state.theta, model);
    ArmPose {
        shoulder_rot: kin.shoulder_rot,
        elbow_rot: kin.elbow_rot,
        wrist_rot: refs.ee_rot,
        stretch_upper: state.theta[IDX_STRETCH_U],
        stretch_forearm: state.theta[IDX_STRETCH_F],
    }
}

/// Iterates [`dls_step`] until the wrist residual drops below `tol` or the
/// iteration budget runs out. At least one step is taken per call: the
/// solver is a tracker, and the elbow secondary objective keeps improving
/// across frames even when the wrist is already within tolerance.
pub fn jacobian_solve(
    state: &mut JacobianState,
    model: &HumanArmModel,
    refs: &ArmRefs,
    max_iters: u32,
    tol: f64,
) -> Result<(ArmPose, u32, bool)> {
    if max_iters == 0 {
        return Err(Error::InvalidArgument("max_iters must be at least 1"));
    }
    let mut iterations = 0;
    let mut converged = false;
    loop {
        dls_step(state, model, refs)?;
        iterations += 1;
        let kin = kinematics(&state.theta, model);
        if (kin.wrist_pos - refs.wrist).norm() < tol {
            converged = true;
            break;
        }
        if iterations >= max_iters {
            break;
        }
    }
    Ok((pose_from_state(state, model, refs), iterations, converged))
}

impl ArmSolver for JacobianState {
    fn solve(&mut self, model: &HumanArmModel, refs: &ArmRefs) -> Result<SolveReport> {
        let (max_iters, tol) = (self.params.max_iters, self.params.tol);
        let (pose, iterations, converged) = jacobian_solve(self, model, refs, max_iters, tol)?;
        Ok(SolveReport { pose, converged, degenerate_elbow_axis: false, iterations })
    }
}
