//! Alignment solvers: the closed-form solver plus the two adapted
//! iterative IK baselines.

pub mod fabrik;
pub mod jacobian;
pub mod onia;

use crate::arm::{ArmPose, HumanArmModel};
use crate::error::Result;
use crate::session::ArmRefs;

/// Uniform solver output for the replay harness.
#[derive(Debug, Clone, Copy)]
pub struct SolveReport {
    pub pose: ArmPose,
    /// Whether the solver reached its own convergence/feasibility target.
    pub converged: bool,
    /// The reference segments were colinear and the elbow-axis twist was
    /// undefined this frame.
    pub degenerate_elbow_axis: bool,
    pub iterations: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Onia,
    Jacobian,
    Fabrik,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Onia => "onia",
            SolverKind::Jacobian => "jacobian",
            SolverKind::Fabrik => "fabrik",
        }
    }
}

impl std::str::FromStr for SolverKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "onia" => Ok(SolverKind::Onia),
            "jacobian" => Ok(SolverKind::Jacobian),
            "fabrik" => Ok(SolverKind::Fabrik),
            other => Err(format!("unknown solver {other:?}")),
        }
    }
}

/// Tuning knobs for all solvers, as read from the config file / CLI.
#[derive(Debug, Clone, Copy, Default)]
pub struct SolverConfig {
    pub onia: onia::OniaParams,
    pub jacobian: jacobian::JacobianParams,
    pub fabrik: fabrik::FabrikParams,
}

/// A solver bound to one arm. Iterative solvers keep state across frames;
/// the closed-form solver is stateless.
pub trait ArmSolver {
    fn solve(&mut self, model: &HumanArmModel, refs: &ArmRefs) -> Result<SolveReport>;
}

pub fn make_solver(
    kind: SolverKind,
    config: &SolverConfig,
    model: &HumanArmModel,
) -> Box<dyn ArmSolver> {
    match kind {
        SolverKind::Onia => Box::new(onia::OniaSolver { params: config.onia }),
        SolverKind::Jacobian => Box::new(jacobian::JacobianState::new(config.jacobian, model)),
        SolverKind::Fabrik => Box::new(fabrik::FabrikState::new(config.fabrik, model)),
    }
}
