//! Versioned persistence for key events, frame traces, and motion recordings.
//!
//! Logs are strict JSON documents: unknown fields and unknown schema versions
//! are rejected on read. One log covers one loop or test trial.

pub mod curves;

use crate::controller::{FrameTrace, GuidanceMode};
use crate::geom::{Quat, Vec3};
use crate::melody::Segment;
use crate::scoring::KeyEvent;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use curves::{compress_samples, evaluate_keys, ChannelComponent, ChannelId, KeyframeCurve};

pub const SCHEMA_VERSION: &str = "1";
pub const JOINT_COUNT: usize = 26;
/// Root joint: every other joint's position is expressed relative to it for
/// wrist-anchored analysis.
pub const WRIST_JOINT: usize = 0;

#[derive(Debug, Error)]
pub enum LogError {
    #[error("unsupported schema_version `{found}` (expected `{expected}`)")]
    Version { found: String, expected: &'static str },
    #[error("log document error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("events not sorted by onset_ms at index {0}")]
    UnsortedEvents(usize),
    #[error("event {0}: duration_ms must be positive")]
    BadEventDuration(usize),
    #[error("motion frame {frame}: expected {expected} joints, found {count}")]
    JointCount {
        frame: usize,
        expected: usize,
        count: usize,
    },
    #[error("motion frame {frame}, joint {joint}: rotation quaternion is not unit-norm")]
    NonUnitQuaternion { frame: usize, joint: usize },
    #[error("motion frame {frame}: t_ms not strictly increasing")]
    MotionTime { frame: usize },
    #[error("event and motion streams cover disjoint time ranges")]
    DisjointStreams,
    #[error("curve needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("curve sample {0}: t_ms not strictly increasing")]
    NonIncreasingSampleTime(usize),
    #[error("compression threshold must be finite and >= 0, got {0}")]
    BadThreshold(f64),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Pose of one joint in the calibrated piano frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointPose {
    pub position: Vec3,
    pub rotation: Quat,
}

/// One 26-joint skeleton sample at nominal 30 fps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionFrame {
    pub t_ms: f64,
    pub joints: Vec<JointPose>,
}

impl MotionFrame {
    pub fn wrist(&self) -> &JointPose {
        &self.joints[WRIST_JOINT]
    }
}

/// Training, or one of the unguided test probes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Training,
    ImmediateTest,
    RetentionTest,
}

impl Phase {
    pub fn file_tag(self) -> &'static str {
        match self {
            Phase::Training => "training",
            Phase::ImmediateTest => "immediate",
            Phase::RetentionTest => "retention",
        }
    }
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.file_tag())
    }
}

/// Record of one loop or trial: header, key events, control trace, and an
/// optional motion recording with optional compressed curves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionLog {
    pub schema_version: String,
    pub participant_id: String,
    pub condition: GuidanceMode,
    pub melody_id: String,
    pub phase: Phase,
    pub segment: Segment,
    /// Loop index within the segment for training, trial index for tests.
    pub loop_index: u32,
    pub rng_seed: u64,
    /// Clock offset added to motion timestamps to express them on the event
    /// clock. Absent when both streams share the session clock.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub motion_offset_ms: Option<f64>,
    pub events: Vec<KeyEvent>,
    pub frames: Vec<FrameTrace>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub motion: Option<Vec<MotionFrame>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curves: Option<Vec<KeyframeCurve>>,
}

impl SessionLog {
    /// Versioned file name: participant, condition, melody, phase, segment,
    /// index.
    pub fn file_name(&self) -> String {
        format!(
            "{}_{}_{}_{}_{}_{:02}.log.json",
            self.participant_id,
            self.condition.file_tag(),
            self.melody_id,
            self.phase.file_tag(),
            self.segment.file_tag(),
            self.loop_index
        )
    }

    pub fn validate(&self) -> Result<(), LogError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(LogError::Version {
                found: self.schema_version.clone(),
                expected: SCHEMA_VERSION,
            });
        }
        for i in 1..self.events.len() {
            if self.events[i].onset_ms < self.events[i - 1].onset_ms {
                return Err(LogError::UnsortedEvents(i));
            }
        }
        for (i, e) in self.events.iter().enumerate() {
            if !(e.duration_ms > 0.0) {
                return Err(LogError::BadEventDuration(i));
            }
        }
        if let Some(motion) = &self.motion {
            validate_motion(motion)?;
        }
        Ok(())
    }

    /// Clock offset between this log's event and motion streams.
    pub fn align_streams(&self) -> Result<f64, LogError> {
        let motion = self.motion.as_deref().unwrap_or(&[]);
        align_streams(&self.events, motion, self.motion_offset_ms)
    }
}

pub fn validate_motion(motion: &[MotionFrame]) -> Result<(), LogError> {
    let mut prev = f64::NEG_INFINITY;
    for (i, frame) in motion.iter().enumerate() {
        if frame.joints.len() != JOINT_COUNT {
            return Err(LogError::JointCount {
                frame: i,
                expected: JOINT_COUNT,
                count: frame.joints.len(),
            });
        }
        if frame.t_ms <= prev {
            return Err(LogError::MotionTime { frame: i });
        }
        prev = frame.t_ms;
        for (j, joint) in frame.joints.iter().enumerate() {
            if !joint.rotation.is_unit(1e-6) {
                return Err(LogError::NonUnitQuaternion { frame: i, joint: j });
            }
        }
    }
    Ok(())
}

/// Serialize a log to its canonical document (compact JSON plus newline).
/// `read_log(write_log(x)) == x` and re-serialization is byte-identical.
pub fn write_log(log: &SessionLog) -> String {
    let mut text = serde_json::to_string(log).expect("log serialization");
    text.push('\n');
    text
}

pub fn read_log(text: &str) -> Result<SessionLog, LogError> {
    // Gate on the version before strict parsing so future schemas fail with a
    // version error, not a field error.
    #[derive(Deserialize)]
    struct VersionProbe {
        schema_version: String,
    }
    let probe: VersionProbe = serde_json::from_str(text)?;
    if probe.schema_version != SCHEMA_VERSION {
        return Err(LogError::Version {
            found: probe.schema_version,
            expected: SCHEMA_VERSION,
        });
    }
    let log: SessionLog = serde_json::from_str(text)?;
    log.validate()?;
    Ok(log)
}

/// Clock offset (ms) to add to motion timestamps so both streams share one
/// clock. Zero without a header offset. Errors when the aligned ranges do not
/// overlap.
pub fn align_streams(
    events: &[KeyEvent],
    motion: &[MotionFrame],
    header_offset_ms: Option<f64>,
) -> Result<f64, LogError> {
    let offset = header_offset_ms.unwrap_or(0.0);
    if events.is_empty() || motion.is_empty() {
        return Err(LogError::DisjointStreams);
    }
    let ev_start = events.first().unwrap().onset_ms;
    let ev_end = events
        .iter()
        .map(|e| e.onset_ms + e.duration_ms)
        .fold(f64::NEG_INFINITY, f64::max);
    let mo_start = motion.first().unwrap().t_ms + offset;
    let mo_end = motion.last().unwrap().t_ms + offset;
    if mo_end < ev_start || ev_end < mo_start {
        return Err(LogError::DisjointStreams);
    }
    Ok(offset)
}
