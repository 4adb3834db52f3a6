//! Closed-form alignment: a fixed sequence of swings, scales, and twists
//! that places the model's elbow and wrist exactly on their references and
//! minimizes the elbow-axis misalignment, with no iteration and no state.

use crate::arm::{ArmPose, HumanArmModel};
use crate::error::{Error, Result};
use crate::geom::{project_perp, rot_from_to, rotation_pow};
use crate::session::ArmRefs;
use crate::solver::{ArmSolver, SolveReport};

/// Relative cross-product threshold below which the two reference segments
/// are treated as colinear and the shoulder twist is skipped.
pub const DEGENERATE_AXIS_EPS: f64 = 1e-8;

/// Reference segments shorter than this are rejected outright.
const MIN_SEGMENT_LEN: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
pub struct OniaParams {
    /// Fraction of the wrist twist fed back into the forearm.
    pub alpha_elbow: f64,
}

impl Default for OniaParams {
    fn default() -> Self {
        Self { alpha_elbow: 0.4 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OniaSolution {
    pub pose: ArmPose,
    /// Set when the reference arm was straight and the elbow-axis twist
    /// was replaced by the identity.
    pub degenerate_elbow_axis: bool,
}

/// Solves the alignment in one pass:
///
/// 1. reference arm axes from the shoulder and the two reference joints;
/// 2. shoulder swing carrying the default upper arm onto the reference
///    axis, then the stretch that puts the elbow on its reference;
/// 3. shoulder twist about the upper arm bringing the projected elbow axis
///    onto the reference elbow axis (the cross product of the reference
///    segments) — the twist angle that minimizes the axis misalignment;
/// 4. elbow swing lining the forearm up with its reference axis, then the
///    forearm stretch;
/// 5. wrist rotation copied from the end effector, plus a fractional
///    forearm twist reacting to the wrist twist.
pub fn onia_solve(
    model: &HumanArmModel,
    refs: &ArmRefs,
    params: &OniaParams,
) -> Result<OniaSolution> {
    if !refs.elbow.is_finite() || !refs.wrist.is_finite() {
        return Err(Error::InvalidArgument("reference positions must be finite"));
    }
    // Reference arm axes. The upper axis starts at the *model* shoulder:
    // the shoulder widths differ, so the model shoulder is the anchor that
    // guides the upper arm.
    let ref_upper = refs.elbow - model.shoulder;
    let ref_forearm = refs.wrist - refs.elbow;
    if ref_upper.norm() < MIN_SEGMENT_LEN || ref_forearm.norm() < MIN_SEGMENT_LEN {
        return Err(Error::InvalidArgument("zero-length reference segment"));
    }

    let swing = rot_from_to(model.upper, ref_upper)?;
    let stretch_upper = ref_upper.norm() / model.upper.norm();

    // Shoulder twist aligning the elbow axis.
    let ref_elbow_axis = ref_upper.cross(ref_forearm);
    let degenerate =
        ref_elbow_axis.norm() < DEGENERATE_AXIS_EPS * ref_upper.norm() * ref_forearm.norm();
    let shoulder_rot = if degenerate {
        swing
    } else {
        let axis_perp = project_perp(swing.apply(model.elbow_axis), ref_upper)?;
        let twist = rot_from_to(axis_perp, ref_elbow_axis)?;
        twist.compose(&swing)
    };

    // Elbow swing and forearm stretch; wrist copied from the end effector.
    let elbow_swing = rot_from_to(shoulder_rot.apply(model.forearm), ref_forearm)?
        .compose(&shoulder_rot);
    let stretch_forearm = ref_forearm.norm() / model.forearm.norm();
    let wrist_rot = refs.ee_rot;

    // Reactive forearm twist, proportional to the wrist twist about the
    // forearm axis.
    let w_cur = project_perp(elbow_swing.apply(model.wrist_normal), ref_forearm)?;
    let w_ref = project_perp(wrist_rot.apply(model.wrist_normal), ref_forearm)?;
    let tiny = 1e-12 * model.wrist_normal.norm();
    let elbow_rot = if w_cur.norm() < tiny || w_ref.norm() < tiny {
        elbow_swing
    } else {
        rotation_pow(&rot_from_to(w_cur, w_ref)?, params.alpha_elbow).compose(&elbow_swing)
    };

    Ok(OniaSolution {
        pose: ArmPose {
            shoulder_rot,
            elbow_rot,
            wrist_rot,
            stretch_upper,
            stretch_forearm,
        },
        degenerate_elbow_axis: degenerate,
    })
}

/// Stateless [`ArmSolver`] wrapper.
#[derive(Debug, Clone, Copy, Default)]
pub struct OniaSolver {
    pub params: OniaParams,
}

impl ArmSolver for OniaSolver {
    fn solve(&mut self, model: &HumanArmModel, refs: &ArmRefs) -> Result<SolveReport> {
        let sol = onia_solve(model, refs, &self.params)?;
        Ok(SolveReport {
            pose: sol.pose,
            converged: true,
            degenerate_elbow_axis: sol.degenerate_elbow_axis,
            iterations: 1,
        })
    }
}
