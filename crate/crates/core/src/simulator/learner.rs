//! Synthetic learner: a per-note skill array plus a scalar reliance state.
//!
//! Guidance visibility has two effects. In the moment it lifts effective
//! skill (the learner leans on the ghost), while each exposure accrues
//! reliance. Reliance costs nothing while the ghost is visible, but once
//! guidance is removed it subtracts from correctness probabilities and makes
//! the retention-interval skill decay steeper, so heavier exposure shows up
//! as a larger immediate-to-retention drop.

use crate::melody::{FingerLabel, NoteSpec};
use crate::scoring::KeyEvent;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LearnerParams {
    /// Mean and spread of the initial per-note skill draw.
    pub initial_skill_mean: f64,
    pub initial_skill_sd: f64,
    /// Fraction of participants flagged as experienced; their initial skill
    /// is scaled by `experienced_boost`.
    pub experienced_fraction: f64,
    pub experienced_boost: f64,
    /// Per-note skill update rate (eta).
    pub learning_rate: f64,
    /// Engagement loss per unit of mean opacity (rho): g = 1 - rho * alpha.
    pub engagement_rho: f64,
    /// In-the-moment accuracy lift per unit of guidance opacity.
    pub guidance_boost: f64,
    /// Reliance accrual per unit of mean opacity per loop (kappa).
    pub reliance_gain: f64,
    /// Unguided-test correctness penalty per unit of reliance (beta).
    pub dependence_beta: f64,
    /// Multiplicative skill decay over the retention interval.
    pub retention_decay: f64,
    /// Extra decay per unit of reliance: heavier guidance leaves shallower
    /// memory.
    pub retention_reliance_decay: f64,
    /// Emission probability floor: p_emit = floor + (1 - floor) * skill.
    pub emission_floor: f64,
    /// Pitch correctness floor: p_pitch = floor + (1 - floor) * skill.
    pub pitch_floor: f64,
    /// Onset jitter scale (ms), shrinking with skill.
    pub timing_sd_ms: f64,
    pub timing_skill_shrink: f64,
    /// Adjacent-finger slip probability scale: p = scale * (1 - skill).
    pub finger_slip_prob: f64,
    /// Expected number of spurious presses per loop.
    pub extra_press_rate: f64,
    /// Relative spread of emitted note durations.
    pub duration_jitter: f64,
    /// Positional noise scale (m) of recorded test motion at zero skill.
    pub motion_noise_m: f64,
}

impl Default for LearnerParams {
    fn default() -> Self {
        LearnerParams {
            initial_skill_mean: 0.3,
            initial_skill_sd: 0.08,
            experienced_fraction: 0.5,
            experienced_boost: 1.5,
            learning_rate: 0.05,
            engagement_rho: 0.6,
            guidance_boost: 0.15,
            reliance_gain: 0.02,
            dependence_beta: 0.5,
            retention_decay: 0.97,
            retention_reliance_decay: 0.3,
            emission_floor: 0.85,
            pitch_floor: 0.45,
            timing_sd_ms: 100.0,
            timing_skill_shrink: 0.5,
            finger_slip_prob: 0.35,
            extra_press_rate: 0.25,
            duration_jitter: 0.15,
            motion_noise_m: 0.012,
        }
    }
}

/// Whether a trial runs with the ghost visible.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GuidanceCtx {
    /// Training loop; `alpha` is the guidance opacity the learner is leaning
    /// on (the previous loop's mean presented opacity).
    Training { alpha: f64 },
    /// Unguided test probe: the accrued reliance penalty applies.
    Test,
}

#[derive(Clone, Debug)]
pub struct LearnerModel {
    pub params: LearnerParams,
    /// Skill per note of the full melody, each in [0,1].
    pub skill: Vec<f64>,
    /// Accrued guidance reliance (>= 0).
    pub reliance: f64,
    pub experienced: bool,
}

fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

impl LearnerModel {
    pub fn init(
        params: &LearnerParams,
        note_count: usize,
        experienced: bool,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let boost = if experienced {
            params.experienced_boost
        } else {
            1.0
        };
        let skill = (0..note_count)
            .map(|_| {
                let z: f64 = rng.sample(StandardNormal);
                clamp01((params.initial_skill_mean + params.initial_skill_sd * z) * boost)
            })
            .collect();
        LearnerModel {
            params: *params,
            skill,
            reliance: 0.0,
            experienced,
        }
    }

    /// Correctness penalty active when guidance is absent.
    pub fn test_penalty(&self) -> f64 {
        self.params.dependence_beta * self.reliance
    }

    fn channel_probs(&self, note_idx: usize, ctx: GuidanceCtx) -> (f64, f64, f64, f64) {
        let p = &self.params;
        let skill = self.skill[note_idx];
        let (boost, penalty) = match ctx {
            GuidanceCtx::Training { alpha } => (p.guidance_boost * alpha, 0.0),
            GuidanceCtx::Test => (0.0, self.test_penalty()),
        };
        let s_eff = clamp01(skill + boost);
        let p_emit = clamp01(p.emission_floor + (1.0 - p.emission_floor) * s_eff);
        let p_pitch = clamp01(p.pitch_floor + (1.0 - p.pitch_floor) * s_eff - penalty);
        let p_slip = clamp01(p.finger_slip_prob * (1.0 - s_eff) + penalty);
        let timing_sd = (p.timing_sd_ms * (1.0 - p.timing_skill_shrink * s_eff)).max(0.0);
        (p_emit, p_pitch, p_slip, timing_sd)
    }

    /// Generate the key events of one loop or trial over the given notes.
    ///
    /// Consumes a fixed number of draws per note from `note_rng` regardless
    /// of branch, so streams keyed identically stay aligned across
    /// conditions. Spurious presses draw from `extra_rng`.
    pub fn generate_events(
        &self,
        notes: &[NoteSpec],
        note_offset: usize,
        span_ms: f64,
        ctx: GuidanceCtx,
        note_rng: &mut ChaCha8Rng,
        extra_rng: &mut ChaCha8Rng,
    ) -> Vec<KeyEvent> {
        let p = &self.params;
        let mut events: Vec<KeyEvent> = Vec::with_capacity(notes.len() + 2);
        for (i, note) in notes.iter().enumerate() {
            let u_emit: f64 = note_rng.gen();
            let u_pitch: f64 = note_rng.gen();
            let pitch_shift = *[-2i16, -1, 1, 2].choose(note_rng).unwrap();
            let u_slip: f64 = note_rng.gen();
            let u_side: f64 = note_rng.gen();
            let z_t: f64 = note_rng.sample(StandardNormal);
            let u_dur: f64 = note_rng.gen();

            let (p_emit, p_pitch, p_slip, timing_sd) = self.channel_probs(note_offset + i, ctx);
            if u_emit >= p_emit {
                continue;
            }
            let pitch = if u_pitch < p_pitch {
                note.pitch
            } else {
                (note.pitch as i16 + pitch_shift).clamp(0, 127) as u8
            };
            let finger = if u_slip < p_slip {
                let neighbors = note.finger.neighbors();
                neighbors[(u_side * neighbors.len() as f64) as usize % neighbors.len()]
            } else {
                note.finger
            };
            let onset_ms = note.onset_ms + z_t * timing_sd;
            let duration_ms =
                note.duration_ms * (1.0 - p.duration_jitter + 2.0 * p.duration_jitter * u_dur);
            events.push(KeyEvent {
                duration_ms,
                finger,
                onset_ms,
                pitch,
            });
        }

        if p.extra_press_rate > 0.0 {
            let poisson = Poisson::new(p.extra_press_rate).expect("positive rate");
            let extra_count = extra_rng.sample(poisson) as usize;
            let (lo, hi) = pitch_range(notes);
            for _ in 0..extra_count {
                events.push(KeyEvent {
                    duration_ms: extra_rng.gen_range(80.0..300.0),
                    finger: *FingerLabel::ALL.choose(extra_rng).unwrap(),
                    onset_ms: extra_rng.gen_range(0.0..span_ms.max(1.0)),
                    pitch: extra_rng.gen_range(lo..=hi),
                });
            }
        }

        events.sort_by(|a, b| {
            a.onset_ms
                .total_cmp(&b.onset_ms)
                .then_with(|| a.pitch.cmp(&b.pitch))
        });
        events
    }

    /// Per-note skill update after a training loop. `per_note_alpha[i]` is the
    /// mean presented opacity over note i's window; engagement falls with
    /// opacity while reliance accrues with it.
    pub fn learn_from_loop(&mut self, note_offset: usize, per_note_alpha: &[f64]) {
        let p = self.params;
        let n = per_note_alpha.len().max(1) as f64;
        for (i, &alpha) in per_note_alpha.iter().enumerate() {
            let g = (1.0 - p.engagement_rho * alpha).max(0.0);
            let s = &mut self.skill[note_offset + i];
            *s = clamp01(*s + p.learning_rate * (1.0 - *s) * g);
            self.reliance += p.reliance_gain * alpha / n;
        }
    }

    /// One multiplicative skill-decay step for the retention interval,
    /// steeper with accrued reliance.
    pub fn apply_retention_decay(&mut self) {
        let factor = clamp01(
            self.params.retention_decay - self.params.retention_reliance_decay * self.reliance,
        );
        for s in &mut self.skill {
            *s *= factor;
        }
    }

    pub fn mean_skill(&self) -> f64 {
        self.skill.iter().sum::<f64>() / self.skill.len().max(1) as f64
    }
}

fn pitch_range(notes: &[NoteSpec]) -> (u8, u8) {
    let lo = notes.iter().map(|n| n.pitch).min().unwrap_or(60);
    let hi = notes.iter().map(|n| n.pitch).max().unwrap_or(60);
    (lo.saturating_sub(3), (hi + 3).min(127))
}
