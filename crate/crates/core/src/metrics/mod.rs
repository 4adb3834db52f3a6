//! Evaluation metrics: overlay ratio, joint deviations, stretch, and
//! per-frame solve timing, plus their CSV emission.

pub mod overlay;

use std::time::{Duration, Instant};

use crate::arm::{fk_arm, ArmPose, HumanArmModel, Side};
use crate::session::ArmRefs;

/// Euclidean distances from the posed model's elbow and wrist to their
/// reference positions.
pub fn deviations(model: &HumanArmModel, pose: &ArmPose, refs: &ArmRefs) -> (f64, f64) {
    let (elbow, wrist) = fk_arm(model, pose);
    (elbow.distance(refs.elbow), wrist.distance(refs.wrist))
}

/// `(|S_u - 1|, |S_f - 1|)`: distance of the stretch factors from neutral.
pub fn stretch_metrics(pose: &ArmPose) -> (f64, f64) {
    ((pose.stretch_upper - 1.0).abs(), (pose.stretch_forearm - 1.0).abs())
}

/// Wall-clock time of `f` alone, on the monotonic clock.
pub fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

/// One metrics row: a frame, a side, a solver.
#[derive(Debug, Clone)]
pub struct MetricsRecord {
    pub t: f64,
    pub side: Side,
    pub solver: &'static str,
    /// `None` when the overlay is undefined (robot not visible) or was not
    /// rendered for this frame.
    pub overlay: Option<f64>,
    pub dx_elbow: f64,
    pub dx_wrist: f64,
    pub stretch_upper_dev: f64,
    pub stretch_forearm_dev: f64,
    pub solve_time: Duration,
}

pub const FRAMES_CSV_HEADER: &str =
    "# avtr metrics v1: t,side,solver,overlay,dx_e,dx_w,su_dev,sf_dev,solve_time_us";
pub const SUMMARY_CSV_HEADER: &str = "# avtr summary v1: solver,metric,median,min,max";

fn fmt_metric(x: f64) -> String {
    format!("{x:.12e}")
}

pub fn record_to_csv(r: &MetricsRecord) -> String {
    let overlay = match r.overlay {
        Some(v) => fmt_metric(v),
        None => "nan".into(),
    };
    format!(
        "{},{},{},{},{},{},{},{},{:.3}",
        fmt_metric(r.t),
        r.side.label(),
        r.solver,
        overlay,
        fmt_metric(r.dx_elbow),
        fmt_metric(r.dx_wrist),
        fmt_metric(r.stretch_upper_dev),
        fmt_metric(r.stretch_forearm_dev),
        r.solve_time.as_secs_f64() * 1e6,
    )
}

/// Median of a sample, sorting it in place; `None` when empty.
pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite metric values"));
    let n = values.len();
    Some(if n % 2 == 1 { values[n / 2] } else { 0.5 * (values[n / 2 - 1] + values[n / 2]) })
}

/// `(median, min, max)` summary per metric per solver. Undefined overlay
/// values are excluded from the overlay aggregate.
pub fn summarize(records: &[MetricsRecord]) -> Vec<String> {
    let mut solvers: Vec<&'static str> = Vec::new();
    for r in records {
        if !solvers.contains(&r.solver) {
            solvers.push(r.solver);
        }
    }
    let metrics: [(&str, fn(&MetricsRecord) -> Option<f64>); 6] = [
        ("overlay", |r| r.overlay),
        ("dx_e", |r| Some(r.dx_elbow)),
        ("dx_w", |r| Some(r.dx_wrist)),
        ("su_dev", |r| Some(r.stretch_upper_dev)),
        ("sf_dev", |r| Some(r.stretch_forearm_dev)),
        ("solve_time_us", |r| Some(r.solve_time.as_secs_f64() * 1e6)),
    ];
    let mut rows = Vec::new();
    for solver in solvers {
        for (name, get) in &metrics {
            let mut vals: Vec<f64> = records
                .iter()
                .filter(|r| r.solver == solver)
                .filter_map(get)
                .collect();
            if let Some(med) = median(&mut vals) {
                let min = vals.first().copied().unwrap();
                let max = vals.last().copied().unwrap();
                rows.push(format!(
                    "{solver},{name},{},{},{}",
                    fmt_metric(med),
                    fmt_metric(min),
                    fmt_metric(max)
                ));
            }
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Rotation, Vec3};

    #[test]
    fn deviations_of_translated_refs() {
        let m = HumanArmModel::default_for_side(Side::Right);
        let shift = Vec3::new(0.1, 0.0, 0.0);
        let refs = ArmRefs {
            elbow: m.shoulder + m.upper + shift,
            wrist: m.shoulder + m.upper + m.forearm + shift,
            ee_rot: Rotation::IDENTITY,
            gripper: 0.0,
        };
        let (de, dw) = deviations(&m, &ArmPose::IDENTITY, &refs);
        assert!((de - 0.1).abs() < 1e-12);
        assert!((dw - 0.1).abs() < 1e-12);
    }

    #[test]
    fn stretch_metric_values() {
        assert_eq!(stretch_metrics(&ArmPose::IDENTITY), (0.0, 0.0));
        let p = ArmPose { stretch_upper: 1.3, stretch_forearm: 0.8, ..ArmPose::IDENTITY };
        let (u, f) = stretch_metrics(&p);
        assert!((u - 0.3).abs() < 1e-15);
        assert!((f - 0.2).abs() < 1e-15);
    }

    #[test]
    fn timing_overhead_is_small() {
        let mut samples: Vec<f64> = (0..101)
            .map(|_| timed(|| std::hint::black_box(0u64)).1.as_secs_f64())
            .collect();
        let med = median(&mut samples).unwrap();
        assert!(med < 1e-6, "no-op timing median {med}");
    }

    #[test]
    fn median_of_even_and_odd_samples() {
        assert_eq!(median(&mut vec![3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&mut vec![4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&mut Vec::new()), None);
    }
}
