//! Plain-text `key = value` configuration.
//!
//! Lines starting with `#` and blank lines are ignored. Unknown keys are
//! rejected. Lengths are meters, angles degrees (keys suffixed `_deg`),
//! rates Hz.
//!
//! | Key | Default | Meaning |
//! |-----|---------|---------|
//! | `model.shoulder_half_width` | 0.18 | shoulder x offset |
//! | `model.shoulder_height` | 1.10 | shoulder z |
//! | `model.upper_len` | 0.25 | default upper-arm length |
//! | `model.forearm_len` | 0.24 | default forearm length |
//! | `constraints.swing_max_deg` | 85 | shoulder swing cone |
//! | `constraints.twist_min_deg` | -75 | shoulder twist lower bound |
//! | `constraints.twist_max_deg` | 75 | shoulder twist upper bound |
//! | `constraints.hinge_min_deg` | 0 | elbow hinge lower bound |
//! | `constraints.hinge_max_deg` | 150 | elbow hinge upper bound |
//! | `constraints.stretch_min` | 0.8 | segment stretch lower bound |
//! | `constraints.stretch_max` | 1.3 | segment stretch upper bound |
//! | `onia.alpha_elbow` | 0.4 | reactive forearm twist fraction |
//! | `jacobian.lambda` | 0.2 | DLS damping |
//! | `jacobian.elbow_weight` | 0.1 | elbow objective weight |
//! | `jacobian.step_cap` | 1.0 | parameter step cap |
//! | `jacobian.max_iters` | 200 | per-frame iteration budget |
//! | `jacobian.tol` | 0.001 | wrist convergence tolerance (m) |
//! | `fabrik.eps_wrist` | 0.005 | wrist tolerance (m) |
//! | `fabrik.eps_max` | 0.30 | elbow tolerance search upper bound (m) |
//! | `fabrik.delta_eps` | 0.002 | search resolution (m) |
//! | `fabrik.n_init` | 8 | initial pass iterations |
//! | `fabrik.n_refine` | 5 | iterations per search probe |
//! | `render.width` | 512 | overlay image width (px) |
//! | `render.height` | 512 | overlay image height (px) |
//! | `render.vfov_deg` | 60 | vertical field of view |
//! | `render.near` | 0.05 | near clip (m) |
//! | `render.depth_slack` | 0.01 | covered-pixel depth slack (m) |
//! | `gesture.closed_deg` | 5 | thumb-index angle, gripper closed |
//! | `gesture.open_deg` | 60 | thumb-index angle, gripper open |
//! | `filter.beta` | 0.2 | base-pose low-pass coefficient |

use std::path::Path;

use crate::arm::{JointConstraints, ModelParams};
use crate::error::{Error, Result};
use crate::metrics::overlay::RenderParams;
use crate::session::DEFAULT_FILTER_BETA;
use crate::solver::SolverConfig;

#[derive(Debug, Clone, Copy)]
pub struct Config {
    pub model: ModelParams,
    pub constraints: JointConstraints,
    pub solver: SolverConfig,
    pub render: RenderParams,
    pub gesture_closed: f64,
    pub gesture_open: f64,
    pub filter_beta: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            model: ModelParams::default(),
            constraints: JointConstraints::default(),
            solver: SolverConfig::default(),
            render: RenderParams::default(),
            gesture_closed: crate::arm::GESTURE_ANGLE_CLOSED,
            gesture_open: crate::arm::GESTURE_ANGLE_OPEN,
            filter_beta: DEFAULT_FILTER_BETA,
        }
    }
}

pub fn parse_config(text: &str) -> Result<Config> {
    let mut cfg = Config::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let lineno = idx + 1;
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: lineno,
            msg: format!("expected key = value, got {line:?}"),
        })?;
        let key = key.trim();
        let value = value.trim();
        apply_key(&mut cfg, key, value).map_err(|msg| Error::Parse { line: lineno, msg })?;
    }
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<Config> {
    parse_config(&std::fs::read_to_string(path)?)
}

fn apply_key(cfg: &mut Config, key: &str, value: &str) -> std::result::Result<(), String> {
    let f = || -> std::result::Result<f64, String> {
        value.parse().map_err(|_| format!("{key}: not a number: {value:?}"))
    };
    let deg = || f().map(f64::to_radians);
    let int = || -> std::result::Result<u32, String> {
        value.parse().map_err(|_| format!("{key}: not an integer: {value:?}"))
    };
    match key {
        "model.shoulder_half_width" => cfg.model.shoulder_half_width = f()?,
        "model.shoulder_height" => cfg.model.shoulder_height = f()?,
        "model.upper_len" => cfg.model.upper_len = f()?,
        "model.forearm_len" => cfg.model.forearm_len = f()?,
        "constraints.swing_max_deg" => cfg.constraints.swing_max = deg()?,
        "constraints.twist_min_deg" => cfg.constraints.twist_min = deg()?,
        "constraints.twist_max_deg" => cfg.constraints.twist_max = deg()?,
        "constraints.hinge_min_deg" => cfg.constraints.hinge_min = deg()?,
        "constraints.hinge_max_deg" => cfg.constraints.hinge_max = deg()?,
        "constraints.stretch_min" => cfg.constraints.stretch_min = f()?,
        "constraints.stretch_max" => cfg.constraints.stretch_max = f()?,
        "onia.alpha_elbow" => cfg.solver.onia.alpha_elbow = f()?,
        "jacobian.lambda" => cfg.solver.jacobian.lambda = f()?,
        "jacobian.elbow_weight" => cfg.solver.jacobian.elbow_weight = f()?,
        "jacobian.step_cap" => cfg.solver.jacobian.step_cap = f()?,
        "jacobian.max_iters" => cfg.solver.jacobian.max_iters = int()?,
        "jacobian.tol" => cfg.solver.jacobian.tol = f()?,
        "fabrik.eps_wrist" => cfg.solver.fabrik.eps_wrist = f()?,
        "fabrik.eps_max" => cfg.solver.fabrik.eps_max = f()?,
        "fabrik.delta_eps" => cfg.solver.fabrik.delta_eps = f()?,
        "fabrik.n_init" => cfg.solver.fabrik.n_init = int()?,
        "fabrik.n_refine" => cfg.solver.fabrik.n_refine = int()?,
        "render.width" => cfg.render.width = int()? as usize,
        "render.height" => cfg.render.height = int()? as usize,
        "render.vfov_deg" => cfg.render.vfov = deg()?,
        "render.near" => cfg.render.near = f()?,
        "render.depth_slack" => cfg.render.depth_slack = f()?,
        "gesture.closed_deg" => cfg.gesture_closed = deg()?,
        "gesture.open_deg" => cfg.gesture_open = deg()?,
        "filter.beta" => cfg.filter_beta = f()?,
        other => return Err(format!("unknown config key {other:?}")),
    }
    Ok(())
}
