//! Hand-ghost motion similarity: wrist anchoring, timeline resampling,
//! cosine/direction metrics, and DTW mean step cost.

use super::AnalysisError;
use crate::geom::{angle_between, cosine, Quat, Vec3};
use crate::sessionlog::{JointPose, MotionFrame, JOINT_COUNT, WRIST_JOINT};
use serde::{Deserialize, Serialize};

/// Joint selection and normalization options.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimilarityConfig {
    /// Joints entering the metrics; `None` means every non-wrist joint.
    pub joint_mask: Option<Vec<usize>>,
    /// Also rotate positions into the wrist's orientation frame when
    /// anchoring.
    pub normalize_orientation: bool,
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        SimilarityConfig {
            joint_mask: None,
            normalize_orientation: false,
        }
    }
}

impl SimilarityConfig {
    pub fn joints(&self) -> Vec<usize> {
        match &self.joint_mask {
            Some(mask) => mask.clone(),
            None => (0..JOINT_COUNT).filter(|&j| j != WRIST_JOINT).collect(),
        }
    }
}

/// Express every joint position relative to the wrist root (translation
/// only by default; optionally rotated into the wrist frame).
pub fn wrist_anchor(frame: &MotionFrame, normalize_orientation: bool) -> MotionFrame {
    let wrist = frame.joints[WRIST_JOINT];
    let inv = wrist.rotation.conjugate();
    let joints = frame
        .joints
        .iter()
        .map(|j| {
            let mut p = j.position - wrist.position;
            if normalize_orientation {
                p = inv.rotate(p);
            }
            JointPose {
                position: p,
                rotation: j.rotation,
            }
        })
        .collect();
    MotionFrame {
        t_ms: frame.t_ms,
        joints,
    }
}

/// Sample a trajectory at the given timestamps: linear interpolation for
/// positions, shortest-arc interpolation for rotations, endpoints clamped.
pub fn resample(
    trajectory: &[MotionFrame],
    timestamps: &[f64],
) -> Result<Vec<MotionFrame>, AnalysisError> {
    if trajectory.is_empty() {
        return Err(AnalysisError::EmptyTrajectory);
    }
    let out = timestamps
        .iter()
        .map(|&t| {
            let clamped = t.clamp(trajectory[0].t_ms, trajectory[trajectory.len() - 1].t_ms);
            let idx = trajectory.partition_point(|f| f.t_ms <= clamped);
            if idx == 0 {
                return MotionFrame {
                    t_ms: t,
                    joints: trajectory[0].joints.clone(),
                };
            }
            if idx == trajectory.len() {
                return MotionFrame {
                    t_ms: t,
                    joints: trajectory[trajectory.len() - 1].joints.clone(),
                };
            }
            let (a, b) = (&trajectory[idx - 1], &trajectory[idx]);
            let u = (clamped - a.t_ms) / (b.t_ms - a.t_ms);
            let joints = a
                .joints
                .iter()
                .zip(b.joints.iter())
                .map(|(ja, jb)| JointPose {
                    position: Vec3::lerp(ja.position, jb.position, u),
                    rotation: Quat::slerp_shortest(ja.rotation, jb.rotation, u),
                })
                .collect();
            MotionFrame { t_ms: t, joints }
        })
        .collect();
    Ok(out)
}

/// Per-pair similarity metrics over wrist-anchored, co-sampled trajectories.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMetrics {
    pub position_cosine: f64,
    pub velocity_cosine: f64,
    pub direction_median_angle_deg: f64,
    pub dtw_mean_step_cost: f64,
    /// Mean of the three normalized components, in [0,1].
    pub composite: f64,
    /// Zero-length vector pairs skipped by the cosine metrics.
    pub skipped_vectors: usize,
}

fn median(sorted: &mut [f64]) -> f64 {
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Compute the metric battery for two trajectories already wrist-anchored
/// and resampled onto a common timeline.
pub fn similarity_battery(
    user: &[MotionFrame],
    ghost: &[MotionFrame],
    cfg: &SimilarityConfig,
) -> Result<SimilarityMetrics, AnalysisError> {
    if user.is_empty() || ghost.is_empty() {
        return Err(AnalysisError::EmptyTrajectory);
    }
    let n = user.len().min(ghost.len());
    let joints = cfg.joints();
    if joints.is_empty() {
        return Err(AnalysisError::EmptyJointMask);
    }

    let mut skipped = 0usize;
    let mut pos_cos = Vec::new();
    let mut angles_deg = Vec::new();
    for t in 0..n {
        for &j in &joints {
            let u = user[t].joints[j].position;
            let g = ghost[t].joints[j].position;
            match (cosine(u, g), angle_between(u, g)) {
                (Some(c), Some(angle)) => {
                    pos_cos.push(c);
                    angles_deg.push(angle.to_degrees());
                }
                _ => skipped += 1,
            }
        }
    }
    if pos_cos.is_empty() {
        return Err(AnalysisError::AllZeroSeries);
    }

    let mut vel_cos = Vec::new();
    for t in 0..n.saturating_sub(1) {
        for &j in &joints {
            let du = user[t + 1].joints[j].position - user[t].joints[j].position;
            let dg = ghost[t + 1].joints[j].position - ghost[t].joints[j].position;
            match cosine(du, dg) {
                Some(c) => vel_cos.push(c),
                None => skipped += 1,
            }
        }
    }

    let position_cosine = pos_cos.iter().sum::<f64>() / pos_cos.len() as f64;
    let velocity_cosine = if vel_cos.is_empty() {
        0.0
    } else {
        vel_cos.iter().sum::<f64>() / vel_cos.len() as f64
    };
    let direction_median_angle_deg = median(&mut angles_deg);

    let dtw = dtw_mean_step_cost(
        &position_signal(&user[..n], &joints),
        &position_signal(&ghost[..n], &joints),
    )?;

    let composite = ((position_cosine + 1.0) / 2.0
        + (velocity_cosine + 1.0) / 2.0
        + (1.0 - direction_median_angle_deg / 180.0))
        / 3.0;

    Ok(SimilarityMetrics {
        position_cosine,
        velocity_cosine,
        direction_median_angle_deg,
        dtw_mean_step_cost: dtw,
        composite,
        skipped_vectors: skipped,
    })
}

/// Stack the masked joint positions of each frame into one flat vector.
pub fn position_signal(frames: &[MotionFrame], joints: &[usize]) -> Vec<Vec<f64>> {
    frames
        .iter()
        .map(|f| {
            joints
                .iter()
                .flat_map(|&j| f.joints[j].position.0)
                .collect()
        })
        .collect()
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Dynamic time warping with steps {(1,0),(0,1),(1,1)} and Euclidean cell
/// cost: minimal total path cost divided by the path's cell count. Ties in
/// total cost prefer the shorter path.
pub fn dtw_mean_step_cost(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64, AnalysisError> {
    if a.is_empty() || b.is_empty() {
        return Err(AnalysisError::EmptyTrajectory);
    }
    let n = a.len();
    let m = b.len();
    // (total cost, path length in cells), lexicographic minimum.
    let mut cost = vec![vec![(f64::INFINITY, usize::MAX); m]; n];
    for i in 0..n {
        for j in 0..m {
            let d = euclidean(&a[i], &b[j]);
            let best = if i == 0 && j == 0 {
                (0.0, 0usize)
            } else {
                let mut best = (f64::INFINITY, usize::MAX);
                let mut consider = |cand: (f64, usize)| {
                    if cand.0 < best.0 || (cand.0 == best.0 && cand.1 < best.1) {
                        best = cand;
                    }
                };
                if i > 0 && j > 0 {
                    consider(cost[i - 1][j - 1]);
                }
                if i > 0 {
                    consider(cost[i - 1][j]);
                }
                if j > 0 {
                    consider(cost[i][j - 1]);
                }
                best
            };
            cost[i][j] = (best.0 + d, best.1 + 1);
        }
    }
    let (total, cells) = cost[n - 1][m - 1];
    Ok(total / cells as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sessionlog::JOINT_COUNT;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_frames(rng: &mut ChaCha8Rng, n: usize) -> Vec<MotionFrame> {
        (0..n)
            .map(|i| MotionFrame {
                t_ms: i as f64 * 33.0,
                joints: (0..JOINT_COUNT)
                    .map(|_| JointPose {
                        position: Vec3::new(
                            rng.gen_range(-0.2..0.2),
                            rng.gen_range(-0.2..0.2),
                            rng.gen_range(-0.2..0.2),
                        ),
                        rotation: Quat::from_axis_angle(
                            Vec3::new(rng.gen(), rng.gen(), rng.gen()),
                            rng.gen_range(0.0..1.0),
                        ),
                    })
                    .collect(),
            })
            .collect()
    }

    fn translate(frames: &[MotionFrame], offset: Vec3) -> Vec<MotionFrame> {
        frames
            .iter()
            .map(|f| MotionFrame {
                t_ms: f.t_ms,
                joints: f
                    .joints
                    .iter()
                    .map(|j| JointPose {
                        position: j.position + offset,
                        rotation: j.rotation,
                    })
                    .collect(),
            })
            .collect()
    }

    fn anchored(frames: &[MotionFrame]) -> Vec<MotionFrame> {
        frames.iter().map(|f| wrist_anchor(f, false)).collect()
    }

    #[test]
    fn wrist_maps_to_origin_and_translation_cancels() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let frames = random_frames(&mut rng, 5);
        for f in &frames {
            let a = wrist_anchor(f, false);
            assert_eq!(a.joints[WRIST_JOINT].position, Vec3::ZERO);
        }
        let moved = translate(&frames, Vec3::new(0.4, -0.2, 0.9));
        for (f, g) in frames.iter().zip(moved.iter()) {
            let fa = wrist_anchor(f, false);
            let ga = wrist_anchor(g, false);
            for (ja, jb) in fa.joints.iter().zip(ga.joints.iter()) {
                assert!((ja.position - jb.position).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn resample_at_original_timestamps_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let frames = random_frames(&mut rng, 10);
        let ts: Vec<f64> = frames.iter().map(|f| f.t_ms).collect();
        let out = resample(&frames, &ts).unwrap();
        for (a, b) in frames.iter().zip(out.iter()) {
            for (ja, jb) in a.joints.iter().zip(b.joints.iter()) {
                assert!((ja.position - jb.position).norm() < 1e-12);
                assert!(ja.rotation.angle_to(jb.rotation) < 1e-9);
            }
        }
    }

    #[test]
    fn resample_midpoint_averages_positions() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let frames = random_frames(&mut rng, 2);
        let t_mid = 0.5 * (frames[0].t_ms + frames[1].t_ms);
        let out = resample(&frames, &[t_mid]).unwrap();
        for (j, joint) in out[0].joints.iter().enumerate() {
            let want = Vec3::lerp(frames[0].joints[j].position, frames[1].joints[j].position, 0.5);
            assert!((joint.position - want).norm() < 1e-12);
        }
    }

    #[test]
    fn resample_clamps_out_of_range_and_round_trips_dense_grids() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let frames = random_frames(&mut rng, 8);
        let out = resample(&frames, &[-100.0, 1e9]).unwrap();
        assert_eq!(out[0].joints[0].position, frames[0].joints[0].position);
        assert_eq!(out[1].joints[0].position, frames[7].joints[0].position);

        // Dense resample then sample back at the originals: the error is
        // bounded by the interpolation kink over one dense step.
        let span = frames.last().unwrap().t_ms;
        let dense_ts: Vec<f64> = (0..=(span / 0.1) as usize)
            .map(|i| i as f64 * 0.1)
            .collect();
        let dense = resample(&frames, &dense_ts).unwrap();
        let back = resample(&dense, &frames.iter().map(|f| f.t_ms).collect::<Vec<_>>()).unwrap();
        for (a, b) in frames.iter().zip(back.iter()) {
            for (ja, jb) in a.joints.iter().zip(b.joints.iter()) {
                assert!((ja.position - jb.position).norm() < 2e-3);
            }
        }
        assert!(matches!(
            resample(&[], &[0.0]),
            Err(AnalysisError::EmptyTrajectory)
        ));
    }

    #[test]
    fn identical_series_score_perfect_composite() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let frames = anchored(&random_frames(&mut rng, 12));
        let m = similarity_battery(&frames, &frames, &SimilarityConfig::default()).unwrap();
        assert!((m.position_cosine - 1.0).abs() < 1e-12);
        assert!((m.velocity_cosine - 1.0).abs() < 1e-12);
        assert!(m.direction_median_angle_deg < 1e-9);
        assert_eq!(m.dtw_mean_step_cost, 0.0);
        assert!((m.composite - 1.0).abs() < 1e-9);
    }

    #[test]
    fn point_reflection_gives_antipodal_position_cosine() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let frames = anchored(&random_frames(&mut rng, 6));
        let reflected: Vec<MotionFrame> = frames
            .iter()
            .map(|f| MotionFrame {
                t_ms: f.t_ms,
                joints: f
                    .joints
                    .iter()
                    .map(|j| JointPose {
                        position: j.position.scale(-1.0),
                        rotation: j.rotation,
                    })
                    .collect(),
            })
            .collect();
        let m = similarity_battery(&frames, &reflected, &SimilarityConfig::default()).unwrap();
        assert!((m.position_cosine + 1.0).abs() < 1e-12);
        assert!((m.direction_median_angle_deg - 180.0).abs() < 1e-9);
        // The position component of the composite bottoms out at zero.
        assert!(((m.position_cosine + 1.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn battery_matches_naive_double_loop_recomputation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let user = anchored(&random_frames(&mut rng, 9));
        let ghost = anchored(&random_frames(&mut rng, 9));
        let cfg = SimilarityConfig::default();
        let m = similarity_battery(&user, &ghost, &cfg).unwrap();

        let joints = cfg.joints();
        let mut cos_sum = 0.0;
        let mut count = 0usize;
        let mut angles = Vec::new();
        for t in 0..user.len() {
            for &j in &joints {
                let u = user[t].joints[j].position;
                let g = ghost[t].joints[j].position;
                cos_sum += (u.dot(g) / (u.norm() * g.norm())).clamp(-1.0, 1.0);
                count += 1;
                let cx = u.y() * g.z() - u.z() * g.y();
                let cy = u.z() * g.x() - u.x() * g.z();
                let cz = u.x() * g.y() - u.y() * g.x();
                let cross_norm = (cx * cx + cy * cy + cz * cz).sqrt();
                angles.push(cross_norm.atan2(u.dot(g)).to_degrees());
            }
        }
        assert!((m.position_cosine - cos_sum / count as f64).abs() < 1e-12);
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let med = 0.5 * (angles[angles.len() / 2 - 1] + angles[angles.len() / 2]);
        assert!((m.direction_median_angle_deg - med).abs() < 1e-12);
    }

    #[test]
    fn all_zero_series_is_an_error() {
        let zero = vec![
            MotionFrame {
                t_ms: 0.0,
                joints: vec![
                    JointPose {
                        position: Vec3::ZERO,
                        rotation: Quat::IDENTITY
                    };
                    JOINT_COUNT
                ],
            };
            3
        ];
        assert!(matches!(
            similarity_battery(&zero, &zero, &SimilarityConfig::default()),
            Err(AnalysisError::AllZeroSeries)
        ));
    }

    #[test]
    fn dtw_trivial_cases() {
        let a: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        assert_eq!(dtw_mean_step_cost(&a, &a).unwrap(), 0.0);

        let p = vec![vec![1.0, 1.0]; 4];
        let q = vec![vec![4.0, 5.0]; 7];
        let d = euclidean(&p[0], &q[0]);
        assert!((dtw_mean_step_cost(&p, &q).unwrap() - d).abs() < 1e-12);

        assert!(matches!(
            dtw_mean_step_cost(&[], &a),
            Err(AnalysisError::EmptyTrajectory)
        ));
    }

    /// Independent oracle: enumerate every monotone alignment path.
    pub(crate) fn dtw_brute_force(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
        fn walk(
            a: &[Vec<f64>],
            b: &[Vec<f64>],
            i: usize,
            j: usize,
            total: f64,
            cells: usize,
            best: &mut (f64, usize),
        ) {
            let total = total + euclidean(&a[i], &b[j]);
            let cells = cells + 1;
            if i == a.len() - 1 && j == b.len() - 1 {
                if total < best.0 || (total == best.0 && cells < best.1) {
                    *best = (total, cells);
                }
                return;
            }
            if i + 1 < a.len() && j + 1 < b.len() {
                walk(a, b, i + 1, j + 1, total, cells, best);
            }
            if i + 1 < a.len() {
                walk(a, b, i + 1, j, total, cells, best);
            }
            if j + 1 < b.len() {
                walk(a, b, i, j + 1, total, cells, best);
            }
        }
        let mut best = (f64::INFINITY, usize::MAX);
        walk(a, b, 0, 0, 0.0, 0, &mut best);
        best.0 / best.1 as f64
    }

    #[test]
    fn dtw_matches_brute_force_on_small_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let n = rng.gen_range(1..=8);
            let m = rng.gen_range(1..=8);
            let a: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect();
            let b: Vec<Vec<f64>> = (0..m)
                .map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect();
            let fast = dtw_mean_step_cost(&a, &b).unwrap();
            let slow = dtw_brute_force(&a, &b);
            assert!((fast - slow).abs() < 1e-9, "{fast} vs {slow}");
        }
    }

    #[test]
    fn dtw_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let n = rng.gen_range(1..=10);
            let m = rng.gen_range(1..=10);
            let a: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen_range(-1.0..1.0)]).collect();
            let b: Vec<Vec<f64>> = (0..m).map(|_| vec![rng.gen_range(-1.0..1.0)]).collect();
            let ab = dtw_mean_step_cost(&a, &b).unwrap();
            let ba = dtw_mean_step_cost(&b, &a).unwrap();
            assert!((ab - ba).abs() < 1e-12);
        }
    }
}
