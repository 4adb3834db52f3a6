mod common;

use avtr_core::arm::{fk_arm, ArmPose, HumanArmModel, Side};
use avtr_core::metrics::deviations;
use avtr_core::rng::SplitMix64;
use common::{fk_oracle, random_refs};

fn random_pose(rng: &mut SplitMix64) -> ArmPose {
    ArmPose {
        shoulder_rot: rng.rotation(),
        elbow_rot: rng.rotation(),
        wrist_rot: rng.rotation(),
        stretch_upper: rng.range(0.5, 2.0),
        stretch_forearm: rng.range(0.5, 2.0),
    }
}

#[test]
fn fk_matches_matrix_chain_oracle() {
    let mut rng = SplitMix64::new(0xfca);
    for side in [Side::Left, Side::Right] {
        let model = HumanArmModel::default_for_side(side);
        for _ in 0..1000 {
            let pose = random_pose(&mut rng);
            let (e, w) = fk_arm(&model, &pose);
            let (eo, wo) = fk_oracle(&model, &pose);
            assert!((e - eo).norm() < 1e-12, "elbow {e:?} vs {eo:?}");
            assert!((w - wo).norm() < 1e-12, "wrist {w:?} vs {wo:?}");
        }
    }
}

#[test]
fn deviations_match_independent_fk() {
    let mut rng = SplitMix64::new(0xdeb);
    let model = HumanArmModel::default_for_side(Side::Right);
    for _ in 0..1000 {
        let pose = random_pose(&mut rng);
        let refs = random_refs(&mut rng, &model);
        let (de, dw) = deviations(&model, &pose, &refs);
        let (eo, wo) = fk_oracle(&model, &pose);
        assert!((de - (eo - refs.elbow).norm()).abs() < 1e-12);
        assert!((dw - (wo - refs.wrist).norm()).abs() < 1e-12);
    }
}
