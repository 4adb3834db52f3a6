//! Forward-and-backward-reaching baseline, adapted so interior joints get
//! reference positions with deviation tolerances.
//!
//! A joint is repositioned on the segment between its already-updated
//! child and the closest point to the joint within a radius-ε sphere
//! around the joint's reference, with segment lengths clamped into the
//! allowed stretch range. The elbow tolerance is then minimized by binary
//! search: an initial pass with an unbounded elbow tolerance establishes
//! wrist feasibility, and each probe refines from the best feasible
//! solution found so far.

use crate::arm::{signed_axis_angle, ArmPose, HumanArmModel};
use crate::error::Result;
use crate::geom::{project_perp, rot_from_to, Rotation, Vec3, EX, EZ};
use crate::session::ArmRefs;
use crate::solver::{ArmSolver, SolveReport};

#[derive(Debug, Clone, Copy)]
pub struct FabrikParams {
    /// Wrist deviation tolerance (m).
    pub eps_wrist: f64,
    /// Upper end of the elbow-tolerance search interval (m).
    pub eps_max: f64,
    /// Search resolution (m).
    pub delta_eps: f64,
    /// Iterations of the initial unbounded-tolerance pass.
    pub n_init: u32,
    /// Iterations per binary-search probe.
    pub n_refine: u32,
}

impl Default for FabrikParams {
    fn default() -> Self {
        Self { eps_wrist: 0.005, eps_max: 0.30, delta_eps: 0.002, n_init: 8, n_refine: 5 }
    }
}

/// Per-arm solver state. Joint positions persist across frames, as does
/// the last well-defined shoulder twist, which is reused while the chain
/// passes through a straight (twist-degenerate) configuration.
#[derive(Debug, Clone)]
pub struct FabrikState {
    /// Shoulder, elbow, wrist.
    pub joints: [Vec3; 3],
    /// Elbow tolerance used by [`fabrik_pass`].
    pub eps_elbow: f64,
    pub params: FabrikParams,
    last_twist: f64,
}

impl FabrikState {
    pub fn new(params: FabrikParams, model: &HumanArmModel) -> Self {
        FabrikState {
            joints: [
                model.shoulder,
                model.shoulder + model.upper,
                model.shoulder + model.upper + model.forearm,
            ],
            eps_elbow: f64::INFINITY,
            params,
            last_twist: 0.0,
        }
    }
}

/// Closest point to `p` within the radius-`eps` sphere around `center`.
fn sphere_point(p: Vec3, center: Vec3, eps: f64) -> Vec3 {
    let d = p - center;
    let dist = d.norm();
    if dist <= eps {
        p
    } else if dist == 0.0 {
        center
    } else {
        center + d * (eps / dist)
    }
}

/// FABRIK repositioning with a reference sphere: the joint moves onto the
/// segment from `child_updated` toward the sphere point, at a distance
/// clamped into `seg_len_bounds`.
pub fn reposition(
    joint: Vec3,
    child_updated: Vec3,
    reference: Vec3,
    eps: f64,
    seg_len_bounds: (f64, f64),
) -> Vec3 {
    let q = sphere_point(joint, reference, eps);
    let mut dir = q - child_updated;
    if dir.norm() < 1e-12 {
        dir = joint - child_updated;
    }
    if dir.norm() < 1e-12 {
        dir = EZ;
    }
    let len = (q - child_updated).norm().clamp(seg_len_bounds.0, seg_len_bounds.1);
    child_updated + dir * (len / dir.norm())
}

/// Pulls `dir` (unit) inside the cone of half-angle `max_angle` around
/// `axis` (unit), keeping the plane spanned by the two.
fn clamp_direction(dir: Vec3, axis: Vec3, max_angle: f64) -> Vec3 {
    let angle = dir.cross(axis).norm().atan2(dir.dot(axis));
    if angle <= max_angle {
        return dir;
    }
    let mut perp = dir - axis * dir.dot(axis);
    if perp.norm() < 1e-12 {
        perp = axis.cross(EZ);
        if perp.norm() < 1e-8 {
            perp = axis.cross(EX);
        }
    }
    let perp = perp.normalized().expect("perpendicular is nonzero");
    axis * max_angle.cos() + perp * max_angle.sin()
}

/// Whether joint positions satisfy the given tolerances around their
/// references (the shoulder is pinned and always does). Repositioned
/// joints land exactly on their tolerance spheres, so the comparison
/// carries a nanometer of slack against rounding.
pub fn within_tolerances(joints: &[Vec3; 3], refs: &ArmRefs, eps_elbow: f64, eps_wrist: f64) -> bool {
    joints[1].distance(refs.elbow) <= eps_elbow + 1e-9
        && joints[2].distance(refs.wrist) <= eps_wrist + 1e-9
}

/// Runs `n` iterations of a forward (wrist to shoulder) and backward
/// (shoulder to wrist) reach. The shoulder stays pinned at the model
/// shoulder, segment lengths stay inside the stretch bounds, and the
/// swing/hinge cones are enforced on the backward pass.
pub fn fabrik_pass(state: &mut FabrikState, model: &HumanArmModel, refs: &ArmRefs, n: u32) {
    let c = &model.constraints;
    let upper_len = model.upper.norm();
    let fore_len = model.forearm.norm();
    let upper_bounds = (c.stretch_min * upper_len, c.stretch_max * upper_len);
    let fore_bounds = (c.stretch_min * fore_len, c.stretch_max * fore_len);
    let upper_dir = model.upper.normalized().expect("model upper arm is nonzero");
    let eps_e = state.eps_elbow;
    let eps_w = state.params.eps_wrist;

    for _ in 0..n {
        let [_, elbow, wrist] = state.joints;
        // Forward reach: drag the wrist into its tolerance sphere and walk
        // toward the root. The root move is skipped since the backward
        // reach re-pins the shoulder anyway.
        let wrist_f = sphere_point(wrist, refs.wrist, eps_w);
        let elbow_f = reposition(elbow, wrist_f, refs.elbow, eps_e, fore_bounds);

        // Backward reach: pin the shoulder and walk out, applying the
        // rotational constraints as joints are placed.
        let shoulder_b = model.shoulder;
        let elbow_b = reposition(elbow_f, shoulder_b, refs.elbow, eps_e, upper_bounds);
        let u_len = (elbow_b - shoulder_b).norm();
        let u_dir = clamp_direction((elbow_b - shoulder_b) / u_len, upper_dir, c.swing_max);
        let elbow_b = shoulder_b + u_dir * u_len;

        let wrist_b = reposition(wrist_f, elbow_b, refs.wrist, eps_w, fore_bounds);
        let f_len = (wrist_b - elbow_b).norm();
        let f_dir = clamp_direction((wrist_b - elbow_b) / f_len, u_dir, c.hinge_max);
        let wrist_b = elbow_b + f_dir * f_len;

        state.joints = [shoulder_b, elbow_b, wrist_b];
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FabrikSolution {
    pub pose: ArmPose,
    /// Elbow tolerance the returned solution is feasible at: the smallest
    /// feasible binary-search probe, or the actual elbow deviation when no
    /// probe succeeded.
    pub achieved_eps_elbow: f64,
    /// False when the initial unbounded pass missed the wrist.
    pub success: bool,
    /// The solved chain was straight and the twist was carried over from
    /// the previous frame.
    pub degenerate_elbow_axis: bool,
    pub iterations: u32,
}

/// Full solve: initial pass with an unbounded elbow tolerance, then a
/// binary search shrinking it, keeping the best feasible solution.
pub fn fabrik_solve(
    state: &mut FabrikState,
    model: &HumanArmModel,
    refs: &ArmRefs,
) -> Result<FabrikSolution> {
    let p = state.params;
    state.eps_elbow = f64::INFINITY;
    fabrik_pass(state, model, refs, p.n_init);
    let mut iterations = p.n_init;

    if !within_tolerances(&state.joints, refs, f64::INFINITY, p.eps_wrist) {
        let (pose, degenerate) = reconstruct_pose(state, model, refs)?;
        return Ok(FabrikSolution {
            pose,
            achieved_eps_elbow: f64::INFINITY,
            success: false,
            degenerate_elbow_axis: degenerate,
            iterations,
        });
    }

    let mut best = state.joints;
    let (mut lo, mut hi) = (0.0_f64, p.eps_max);
    let mut any_feasible = false;
    while hi - lo >= p.delta_eps {
        let mid = 0.5 * (lo + hi);
        state.joints = best;
        state.eps_elbow = mid;
        fabrik_pass(state, model, refs, p.n_refine);
        iterations += p.n_refine;
        if within_tolerances(&state.joints, refs, mid, p.eps_wrist) {
            hi = mid;
            best = state.joints;
            any_feasible = true;
        } else {
            lo = mid;
        }
    }

    state.joints = best;
    let achieved = if any_feasible { hi } else { best[1].distance(refs.elbow) };
    state.eps_elbow = achieved;
    let (pose, degenerate) = reconstruct_pose(state, model, refs)?;
    Ok(FabrikSolution {
        pose,
        achieved_eps_elbow: achieved,
        success: true,
        degenerate_elbow_axis: degenerate,
        iterations,
    })
}

/// Rebuilds joint rotations from the solved positions: shoulder swing onto
/// the solved upper-arm direction, then the elbow-axis-aligning twist
/// clamped into the twist range; the forearm swing lines up exactly with
/// the solved wrist. Straight chains reuse the previous frame's twist.
fn reconstruct_pose(
    state: &mut FabrikState,
    model: &HumanArmModel,
    refs: &ArmRefs,
) -> Result<(ArmPose, bool)> {
    let upper = state.joints[1] - state.joints[0];
    let fore = state.joints[2] - state.joints[1];
    let swing = rot_from_to(model.upper, upper)?;
    let upper_hat = upper.normalized()?;
    let c = &model.constraints;

    let axis_ref = upper.cross(fore);
    let degenerate = axis_ref.norm() < 1e-8 * upper.norm() * fore.norm();
    let twist_angle = if degenerate {
        state.last_twist
    } else {
        let a_perp = project_perp(swing.apply(model.elbow_axis), upper)?;
        let full = rot_from_to(a_perp, axis_ref)?;
        signed_axis_angle(&full, upper_hat).clamp(c.twist_min, c.twist_max)
    };
    state.last_twist = twist_angle;

    let twist = Rotation::from_axis_angle(upper_hat, twist_angle).expect("unit axis");
    let shoulder_rot = twist.compose(&swing);
    let elbow_rot = rot_from_to(shoulder_rot.apply(model.forearm), fore)?.compose(&shoulder_rot);
    let pose = ArmPose {
        shoulder_rot,
        elbow_rot,
        wrist_rot: refs.ee_rot,
        stretch_upper: upper.norm() / model.upper.norm(),
        stretch_forearm: fore.norm() / model.forearm.norm(),
    };
    Ok((pose, degenerate))
}

impl ArmSolver for FabrikState {
    fn solve(&mut self, model: &HumanArmModel, refs: &ArmRefs) -> Result<SolveReport> {
        let sol = fabrik_solve(self, model, refs)?;
        Ok(SolveReport {
            pose: sol.pose,
            converged: sol.success,
            degenerate_elbow_axis: sol.degenerate_elbow_axis,
            iterations: sol.iterations,
        })
    }
}
