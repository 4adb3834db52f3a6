//! Replays a session through a solver, collecting per-frame metrics.
//!
//! Every solver consumes the identical frame sequence, so runs over the
//! same session are directly comparable. Iterative solvers keep one state
//! per arm across frames, in frame order.

use crate::arm::{align_body, HumanArmModel, JointConstraints, ModelParams, Side};
use crate::error::Result;
use crate::metrics::overlay::{human_arm_capsules, overlay_ratio, Capsule, RenderParams,
    ROBOT_LINK_RADIUS};
use crate::metrics::{deviations, stretch_metrics, timed, MetricsRecord};
use crate::session::Session;
use crate::solver::{make_solver, SolverConfig, SolverKind};

#[derive(Debug, Clone, Copy)]
pub struct RenderOptions {
    pub params: RenderParams,
    /// Render the overlay on every n-th frame (1 = all frames).
    pub every: usize,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ReplayOptions {
    pub model: ModelParams,
    pub constraints: JointConstraints,
    pub solver: SolverConfig,
    /// `None` disables overlay rendering; the overlay column is then
    /// undefined for every frame.
    pub render: Option<RenderOptions>,
}

/// Replays `session` through one solver, returning a record per frame per
/// side.
pub fn replay_session(
    session: &Session,
    kind: SolverKind,
    opts: &ReplayOptions,
) -> Result<Vec<MetricsRecord>> {
    let sides = [Side::Left, Side::Right];
    let base: Vec<HumanArmModel> = sides
        .iter()
        .map(|&s| HumanArmModel::from_params(s, &opts.model, opts.constraints))
        .collect();
    let mut solvers: Vec<_> =
        base.iter().map(|m| make_solver(kind, &opts.solver, m)).collect();

    let mut records = Vec::with_capacity(session.frames.len() * 2);
    for (frame_idx, frame) in session.frames.iter().enumerate() {
        let alignment = align_body((base[0].shoulder, base[1].shoulder), frame.shoulders)?;
        for (i, &side) in sides.iter().enumerate() {
            let model = base[i].aligned(&alignment);
            let refs = frame.refs(side);
            let (report, solve_time) = timed(|| solvers[i].solve(&model, refs));
            let report = report?;
            let (dx_elbow, dx_wrist) = deviations(&model, &report.pose, refs);
            let (su_dev, sf_dev) = stretch_metrics(&report.pose);

            let overlay = match &opts.render {
                Some(r) if frame_idx % r.every.max(1) == 0 => {
                    let shoulder_ref = frame.shoulder_ref(side);
                    let robot = [
                        Capsule::new(shoulder_ref, refs.elbow, ROBOT_LINK_RADIUS),
                        Capsule::new(refs.elbow, refs.wrist, ROBOT_LINK_RADIUS),
                    ];
                    let human = human_arm_capsules(&model, &report.pose);
                    overlay_ratio(&robot, &human, frame.cam_pose, &r.params)?
                }
                _ => None,
            };

            records.push(MetricsRecord {
                t: frame.t,
                side,
                solver: kind.name(),
                overlay,
                dx_elbow,
                dx_wrist,
                stretch_upper_dev: su_dev,
                stretch_forearm_dev: sf_dev,
                solve_time,
            });
        }
    }
    Ok(records)
}
