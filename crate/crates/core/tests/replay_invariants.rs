use avtr_core::arm::{HumanArmModel, Side};
use avtr_core::metrics::timed;
use avtr_core::replay::{replay_session, ReplayOptions};
use avtr_core::session::{pose_catalog, therapy_trajectory};
use avtr_core::solver::onia::{onia_solve, OniaParams};
use avtr_core::solver::SolverKind;

/// Repeated timing of the same solve: the coefficient of variation is
/// reported for inspection, not asserted (it is hardware- and load-
/// dependent).
#[test]
fn repeated_timing_reports_variation() {
    let model = HumanArmModel::default_for_side(Side::Right);
    let refs = *pose_catalog().frames[8].refs(Side::Right);
    let params = OniaParams::default();
    let samples: Vec<f64> = (0..100)
        .map(|_| timed(|| onia_solve(&model, &refs, &params).unwrap()).1.as_secs_f64())
        .collect();
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / samples.len() as f64;
    let cov = var.sqrt() / mean;
    println!("solve timing over 100 repetitions: mean {:.2e} s, CoV {cov:.3}", mean);
}

/// The constrained baselines can never stretch a segment past the clamp,
/// so their stretch deviations stay at or below 0.3. The closed-form
/// solver does not clamp and is not asserted here.
#[test]
fn baseline_stretch_deviations_stay_clamped() {
    let opts = ReplayOptions::default();
    for session in [pose_catalog(), therapy_trajectory(5.0, 50.0).unwrap()] {
        for kind in [SolverKind::Jacobian, SolverKind::Fabrik] {
            for r in replay_session(&session, kind, &opts).unwrap() {
                assert!(
                    r.stretch_upper_dev <= 0.3 + 1e-12 && r.stretch_forearm_dev <= 0.3 + 1e-12,
                    "{} t={} {:?}: su_dev {} sf_dev {}",
                    kind.name(),
                    r.t,
                    r.side,
                    r.stretch_upper_dev,
                    r.stretch_forearm_dev
                );
            }
        }
    }
}
