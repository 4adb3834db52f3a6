mod common;

use avtr_core::arm::{fk_arm, HumanArmModel, Side};
use avtr_core::rng::SplitMix64;
use avtr_core::session::pose_catalog;
use avtr_core::solver::fabrik::{fabrik_pass, fabrik_solve, within_tolerances, FabrikParams,
    FabrikState};
use common::random_refs;

/// Catalog replay: wherever the initial unbounded pass succeeds, the
/// returned solution is feasible at the achieved elbow tolerance and the
/// stretch stays in bounds. The in-constraint poses (4-12) resolve the
/// tolerance down to the search resolution.
#[test]
fn catalog_solutions_honor_the_search_contract() {
    let params = FabrikParams::default();
    for side in [Side::Left, Side::Right] {
        let model = HumanArmModel::default_for_side(side);
        let mut state = FabrikState::new(params, &model);
        for (i, frame) in pose_catalog().frames.iter().enumerate() {
            let refs = frame.refs(side);
            let sol = fabrik_solve(&mut state, &model, refs).unwrap();
            assert!(sol.success, "pose {} wrist unreachable", i + 1);

            let (elbow, wrist) = fk_arm(&model, &sol.pose);
            assert!((elbow - refs.elbow).norm() <= sol.achieved_eps_elbow + 1e-9);
            assert!((wrist - refs.wrist).norm() <= params.eps_wrist + 1e-9);
            let c = &model.constraints;
            assert!(sol.pose.stretch_upper >= c.stretch_min - 1e-12);
            assert!(sol.pose.stretch_upper <= c.stretch_max + 1e-12);
            assert!(sol.pose.stretch_forearm >= c.stretch_min - 1e-12);
            assert!(sol.pose.stretch_forearm <= c.stretch_max + 1e-12);

            if i >= 3 {
                // Generated from in-constraint parameters: the search
                // resolves down to its resolution.
                assert!(
                    sol.achieved_eps_elbow <= params.delta_eps,
                    "pose {}: achieved {:.4}",
                    i + 1,
                    sol.achieved_eps_elbow
                );
            }
        }
    }
}

/// After any pass, segment lengths stay inside the stretch bounds and the
/// shoulder never moves.
#[test]
fn passes_preserve_length_bounds_and_pin() {
    let model = HumanArmModel::default_for_side(Side::Right);
    let mut rng = SplitMix64::new(0xfab0);
    let params = FabrikParams::default();
    let upper_len = model.upper.norm();
    let fore_len = model.forearm.norm();
    for _ in 0..300 {
        let mut state = FabrikState::new(params, &model);
        state.eps_elbow = rng.range(0.0, 0.2);
        let refs = random_refs(&mut rng, &model);
        fabrik_pass(&mut state, &model, &refs, 3);

        assert_eq!(state.joints[0], model.shoulder);
        let u = (state.joints[1] - state.joints[0]).norm();
        let f = (state.joints[2] - state.joints[1]).norm();
        assert!(u >= 0.8 * upper_len - 1e-12 && u <= 1.3 * upper_len + 1e-12);
        assert!(f >= 0.8 * fore_len - 1e-12 && f <= 1.3 * fore_len + 1e-12);
    }
}

/// The success predicate is monotone in the tolerance.
#[test]
fn feasibility_is_monotone_in_eps() {
    let model = HumanArmModel::default_for_side(Side::Left);
    let mut rng = SplitMix64::new(0xfab1);
    let params = FabrikParams::default();
    for _ in 0..100 {
        let mut state = FabrikState::new(params, &model);
        let refs = random_refs(&mut rng, &model);
        let sol = fabrik_solve(&mut state, &model, &refs).unwrap();
        if sol.success && sol.achieved_eps_elbow.is_finite() {
            for scale in [1.0, 2.0, 10.0] {
                assert!(within_tolerances(
                    &state.joints,
                    &refs,
                    sol.achieved_eps_elbow * scale,
                    params.eps_wrist
                ));
            }
        }
    }
}
