//! Synthetic 26-joint hand motion for ghost demonstrations and simulated
//! test recordings.
//!
//! The same synthesizer renders a trajectory from any list of key actions:
//! feeding it the reference notes yields the ghost demonstration, feeding it
//! a learner's emitted events yields that learner's recording. The hand
//! glides laterally between keys, the acting finger dips and flexes during
//! each press, and optional positional noise models unsteady tracking.
//! Values are quantized (positions to 1 um, rotations to 1e-8) to keep logs
//! compact without visible fidelity loss.

use super::super::geom::{Quat, Vec3};
use crate::melody::{FingerLabel, NoteSpec};
use crate::scoring::KeyEvent;
use crate::sessionlog::{JointPose, MotionFrame, JOINT_COUNT};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const FRAME_MS: f64 = 1000.0 / 30.0;
const KEY_SPACING_M: f64 = 0.0118; // one semitone along the keyboard
const PRESS_DEPTH_M: f64 = 0.018;
const PRESS_FLEX_RAD: f64 = 0.5;
const GLIDE_MS: f64 = 250.0;
const ATTACK_MS: f64 = 80.0;

/// Pitch, timing, and finger of one press, independent of whether it came
/// from the score or from a performance.
#[derive(Clone, Copy, Debug)]
pub struct KeyAction {
    pub pitch: u8,
    pub onset_ms: f64,
    pub duration_ms: f64,
    pub finger: FingerLabel,
}

impl From<&NoteSpec> for KeyAction {
    fn from(n: &NoteSpec) -> Self {
        KeyAction {
            pitch: n.pitch,
            onset_ms: n.onset_ms,
            duration_ms: n.duration_ms,
            finger: n.finger,
        }
    }
}

impl From<&KeyEvent> for KeyAction {
    fn from(e: &KeyEvent) -> Self {
        KeyAction {
            pitch: e.pitch,
            onset_ms: e.onset_ms,
            duration_ms: e.duration_ms,
            finger: e.finger,
        }
    }
}

fn key_x(pitch: u8) -> f64 {
    (pitch as f64 - 60.0) * KEY_SPACING_M
}

fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * (3.0 - 2.0 * u)
}

/// Raised-cosine press envelope: attack, hold, release.
fn press_envelope(t: f64, onset: f64, duration: f64) -> f64 {
    let release = onset + duration;
    if t < onset - ATTACK_MS || t > release + ATTACK_MS {
        0.0
    } else if t < onset {
        smoothstep((t - (onset - ATTACK_MS)) / ATTACK_MS)
    } else if t <= release {
        1.0
    } else {
        1.0 - smoothstep((t - release) / ATTACK_MS)
    }
}

fn wrist_x_at(actions: &[KeyAction], t: f64) -> f64 {
    if actions.is_empty() {
        return 0.0;
    }
    if t <= actions[0].onset_ms - GLIDE_MS {
        return key_x(actions[0].pitch);
    }
    // Hold the current key, gliding toward the next one just before its onset.
    let mut x = key_x(actions[0].pitch);
    for w in actions.windows(2) {
        let (cur, next) = (&w[0], &w[1]);
        if t < cur.onset_ms {
            break;
        }
        let glide_start = (next.onset_ms - GLIDE_MS).max(cur.onset_ms);
        if t >= glide_start {
            let u = (t - glide_start) / (next.onset_ms - glide_start).max(1e-9);
            x = key_x(cur.pitch) + (key_x(next.pitch) - key_x(cur.pitch)) * smoothstep(u);
        } else {
            x = key_x(cur.pitch);
        }
    }
    if t >= actions.last().unwrap().onset_ms {
        x = key_x(actions.last().unwrap().pitch);
    }
    x
}

/// Rest offset of each joint relative to the wrist (joint 0). Five fingers
/// of five segments each fan out over the keys.
fn local_offset(joint: usize) -> Vec3 {
    if joint == 0 {
        return Vec3::ZERO;
    }
    let finger = (joint - 1) / 5; // 0 = thumb .. 4 = pinky
    let segment = (joint - 1) % 5;
    let lateral = (finger as f64 - 2.0) * 0.02;
    let reach = 0.05 + 0.022 * (segment as f64 + 1.0) * (1.0 - 0.08 * (finger as f64 - 2.0).abs());
    Vec3::new(lateral, 0.01 + 0.002 * segment as f64, reach)
}

fn quantize(x: f64, step: f64) -> f64 {
    (x / step).round() * step
}

/// Render a 26-joint trajectory at 30 fps covering `span_ms`.
///
/// `noise_m` adds independent Gaussian positional noise per joint per frame;
/// zero yields the deterministic ghost demonstration.
pub fn synth_motion(
    actions: &[KeyAction],
    span_ms: f64,
    noise_m: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<MotionFrame> {
    let n_frames = (span_ms / FRAME_MS).floor() as usize + 1;
    let mut frames = Vec::with_capacity(n_frames);
    for i in 0..n_frames {
        let t = i as f64 * FRAME_MS;
        let wrist = Vec3::new(wrist_x_at(actions, t), 0.06, -0.02);

        // Active press envelopes per finger.
        let mut dip = [0.0f64; 5];
        for a in actions {
            let env = press_envelope(t, a.onset_ms, a.duration_ms);
            if env > 0.0 {
                let f = (a.finger.index() - 1) as usize;
                dip[f] = dip[f].max(env);
            }
        }

        let mut joints = Vec::with_capacity(JOINT_COUNT);
        for j in 0..JOINT_COUNT {
            let mut pos = wrist + local_offset(j);
            let mut rot = Quat::IDENTITY;
            if j > 0 {
                let f = (j - 1) / 5;
                let segment = (j - 1) % 5;
                let env = dip[f];
                if env > 0.0 && segment >= 2 {
                    let depth = PRESS_DEPTH_M * env * (segment as f64 - 1.0) / 3.0;
                    pos = pos + Vec3::new(0.0, -depth, 0.004 * env);
                }
                if env > 0.0 {
                    rot = Quat::from_axis_angle(
                        Vec3::new(1.0, 0.0, 0.0),
                        PRESS_FLEX_RAD * env * (segment as f64 + 1.0) / 5.0,
                    );
                }
            }
            if noise_m > 0.0 {
                let dx: f64 = rng.sample(StandardNormal);
                let dy: f64 = rng.sample(StandardNormal);
                let dz: f64 = rng.sample(StandardNormal);
                pos = pos + Vec3::new(dx, dy, dz).scale(noise_m);
            }
            let pos = Vec3::new(
                quantize(pos.x(), 1e-6),
                quantize(pos.y(), 1e-6),
                quantize(pos.z(), 1e-6),
            );
            let rot = Quat([
                quantize(rot.0[0], 1e-8),
                quantize(rot.0[1], 1e-8),
                quantize(rot.0[2], 1e-8),
                quantize(rot.0[3], 1e-8),
            ]);
            joints.push(JointPose {
                position: pos,
                rotation: rot,
            });
        }
        frames.push(MotionFrame { t_ms: t, joints });
    }
    frames
}

pub fn actions_from_notes(notes: &[NoteSpec]) -> Vec<KeyAction> {
    notes.iter().map(KeyAction::from).collect()
}

pub fn actions_from_events(events: &[KeyEvent]) -> Vec<KeyAction> {
    events.iter().map(KeyAction::from).collect()
}
