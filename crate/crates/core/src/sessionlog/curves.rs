//! Keyframe reduction for motion channels with a hard reconstruction bound.
//!
//! `compress_samples` keeps a subsequence of the input (always including both
//! endpoints) such that interpolating between kept keys deviates from every
//! original sample by at most the threshold. Scalar position channels use
//! linear interpolation and absolute error; rotation channels interpolate
//! along the shortest arc and measure error as the great-circle angle.
//!
//! Reduction works by recursive max-deviation splitting: the sample farthest
//! from the current segment becomes a key whenever it exceeds the threshold.
//! With the leftmost-maximum tie break this is idempotent — compressing a
//! compressed curve changes nothing. A threshold of zero disables reduction
//! and keeps every sample.

use super::{LogError, MotionFrame, JOINT_COUNT};
use crate::geom::Quat;
use serde::{Deserialize, Serialize};

/// Interpolation and deviation metric for one channel value type.
pub trait ChannelValue: Copy {
    fn interpolate(a: Self, b: Self, u: f64) -> Self;
    fn deviation(a: Self, b: Self) -> f64;
}

impl ChannelValue for f64 {
    fn interpolate(a: Self, b: Self, u: f64) -> Self {
        a * (1.0 - u) + b * u
    }
    fn deviation(a: Self, b: Self) -> f64 {
        (a - b).abs()
    }
}

impl ChannelValue for Quat {
    fn interpolate(a: Self, b: Self, u: f64) -> Self {
        Quat::slerp_shortest(a, b, u)
    }
    fn deviation(a: Self, b: Self) -> f64 {
        a.angle_to(b)
    }
}

/// Reduce a sampled channel to keyframes under a hard error bound.
pub fn compress_samples<V: ChannelValue>(
    samples: &[(f64, V)],
    threshold: f64,
) -> Result<Vec<(f64, V)>, LogError> {
    if samples.len() < 2 {
        return Err(LogError::TooFewSamples(samples.len()));
    }
    if !threshold.is_finite() || threshold < 0.0 {
        return Err(LogError::BadThreshold(threshold));
    }
    for i in 1..samples.len() {
        if samples[i].0 <= samples[i - 1].0 {
            return Err(LogError::NonIncreasingSampleTime(i));
        }
    }
    if threshold == 0.0 {
        return Ok(samples.to_vec());
    }

    let mut keep = vec![false; samples.len()];
    keep[0] = true;
    keep[samples.len() - 1] = true;
    let mut stack = vec![(0usize, samples.len() - 1)];
    while let Some((lo, hi)) = stack.pop() {
        if hi - lo < 2 {
            continue;
        }
        let (t_lo, v_lo) = samples[lo];
        let (t_hi, v_hi) = samples[hi];
        let mut worst = 0usize;
        let mut worst_dev = f64::NEG_INFINITY;
        for i in lo + 1..hi {
            let (t, v) = samples[i];
            let u = (t - t_lo) / (t_hi - t_lo);
            let dev = V::deviation(V::interpolate(v_lo, v_hi, u), v);
            if dev > worst_dev {
                worst_dev = dev;
                worst = i;
            }
        }
        if worst_dev > threshold {
            keep[worst] = true;
            stack.push((lo, worst));
            stack.push((worst, hi));
        }
    }
    Ok(samples
        .iter()
        .zip(keep.iter())
        .filter(|(_, &k)| k)
        .map(|(s, _)| *s)
        .collect())
}

/// Piecewise reconstruction of a keyed channel at time `t` (clamped to the
/// key range).
pub fn evaluate_keys<V: ChannelValue>(keys: &[(f64, V)], t: f64) -> V {
    assert!(!keys.is_empty(), "evaluate_keys on empty key list");
    if t <= keys[0].0 {
        return keys[0].1;
    }
    if t >= keys[keys.len() - 1].0 {
        return keys[keys.len() - 1].1;
    }
    let idx = keys.partition_point(|(kt, _)| *kt <= t);
    let (t0, v0) = keys[idx - 1];
    let (t1, v1) = keys[idx];
    let u = (t - t0) / (t1 - t0);
    V::interpolate(v0, v1, u)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelComponent {
    PositionX,
    PositionY,
    PositionZ,
    Rotation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelId {
    pub joint: usize,
    pub component: ChannelComponent,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalarKey {
    pub t_ms: f64,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotationKey {
    pub t_ms: f64,
    pub value: Quat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKeys {
    Scalar(Vec<ScalarKey>),
    Rotation(Vec<RotationKey>),
}

/// One compressed channel of a motion recording.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeyframeCurve {
    pub channel: ChannelId,
    pub keys: CurveKeys,
}

impl KeyframeCurve {
    pub fn key_count(&self) -> usize {
        match &self.keys {
            CurveKeys::Scalar(k) => k.len(),
            CurveKeys::Rotation(k) => k.len(),
        }
    }
}

/// Compress every channel of a motion recording: three scalar position
/// channels plus one rotation channel per joint.
pub fn compress_motion(
    frames: &[MotionFrame],
    pos_threshold_m: f64,
    rot_threshold_rad: f64,
) -> Result<Vec<KeyframeCurve>, LogError> {
    super::validate_motion(frames)?;
    if frames.len() < 2 {
        return Err(LogError::TooFewSamples(frames.len()));
    }
    let mut out = Vec::with_capacity(JOINT_COUNT * 4);
    for joint in 0..JOINT_COUNT {
        for (axis, component) in [
            ChannelComponent::PositionX,
            ChannelComponent::PositionY,
            ChannelComponent::PositionZ,
        ]
        .iter()
        .enumerate()
        {
            let samples: Vec<(f64, f64)> = frames
                .iter()
                .map(|f| (f.t_ms, f.joints[joint].position.0[axis]))
                .collect();
            let keys = compress_samples(&samples, pos_threshold_m)?;
            out.push(KeyframeCurve {
                channel: ChannelId {
                    joint,
                    component: *component,
                },
                keys: CurveKeys::Scalar(
                    keys.into_iter()
                        .map(|(t_ms, value)| ScalarKey { t_ms, value })
                        .collect(),
                ),
            });
        }
        let samples: Vec<(f64, Quat)> = frames
            .iter()
            .map(|f| (f.t_ms, f.joints[joint].rotation))
            .collect();
        let keys = compress_samples(&samples, rot_threshold_rad)?;
        out.push(KeyframeCurve {
            channel: ChannelId {
                joint,
                component: ChannelComponent::Rotation,
            },
            keys: CurveKeys::Rotation(
                keys.into_iter()
                    .map(|(t_ms, value)| RotationKey { t_ms, value })
                    .collect(),
            ),
        });
    }
    Ok(out)
}
