//! Geometric alignment toolkit that poses a simplified human arm model so
//! it overlays an anthropomorphic robot arm.
//!
//! The crate provides:
//!
//! - [`geom`]: rotation and projection primitives (quaternions, swing-twist
//!   decomposition, exponential map);
//! - [`arm`]: the human arm model, joint constraints, forward kinematics,
//!   and body pre-alignment;
//! - [`session`]: frame logging/replay, the static pose catalog, the
//!   emulated therapy trajectory, and the base-pose low-pass filter;
//! - [`solver`]: the closed-form alignment solver plus two iterative IK
//!   baselines (damped least squares and FABRIK);
//! - [`metrics`]: overlay ratio, joint deviations, stretch, and timing;
//! - [`replay`]: the record/replay evaluation harness;
//! - [`config`]: key=value configuration loading.

pub mod arm;
pub mod config;
pub mod error;
pub mod geom;
pub mod metrics;
pub mod replay;
pub mod rng;
pub mod session;
pub mod solver;

pub use arm::{ArmPose, HumanArmModel, JointConstraints, Side};
pub use error::{Error, Result};
pub use geom::{Rotation, Vec3};
pub use session::{ArmRefs, Session, SessionFrame};
pub use solver::SolverKind;
