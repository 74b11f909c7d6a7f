//! Desk-scale experimental protocol: Latin-square counterbalancing, three
//! training segments of looped practice per block, unguided immediate and
//! retention tests (two trials, better retained), all persisted as a
//! versioned session-log corpus with a hashed manifest.
//!
//! Everything is deterministic under a master seed. Each participant draws
//! from streams derived from (master seed, participant, purpose), so results
//! are identical for any worker-pool size. Test-phase streams are keyed
//! independently of condition and melody: both of a participant's blocks see
//! the same test randomness, which removes spurious between-condition noise
//! from paired comparisons.

pub mod learner;
pub mod motion;

use crate::controller::{Controller, ControllerConfig, ControllerError, GuidanceMode};
use crate::melody::{slice_phrase, MelodyError, MelodySpec, Segment};
use crate::scoring::{
    match_events, trial_summary, KeyEvent, NoteOutcome, ScoreError, ScoringConfig, TrialMetrics,
};
use crate::sessionlog::{
    write_log, LogError, MotionFrame, Phase, SessionLog, SCHEMA_VERSION,
};
use learner::{GuidanceCtx, LearnerModel, LearnerParams};
use motion::{actions_from_events, actions_from_notes, synth_motion};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Controller(#[from] ControllerError),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error(transparent)]
    Melody(#[from] MelodyError),
    #[error(transparent)]
    Log(#[from] LogError),
    #[error("protocol needs at least one participant, loop, and trial")]
    BadProtocol,
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("worker pool: {0}")]
    Pool(String),
}

/// Which authored melody a block uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MelodyRole {
    A,
    B,
}

/// The four counterbalanced order/melody groups.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LatinGroup {
    StaticAFirst,
    StaticBFirst,
    DynamicAFirst,
    DynamicBFirst,
}

impl LatinGroup {
    pub const ALL: [LatinGroup; 4] = [
        LatinGroup::StaticAFirst,
        LatinGroup::StaticBFirst,
        LatinGroup::DynamicAFirst,
        LatinGroup::DynamicBFirst,
    ];

    pub fn label(self) -> &'static str {
        match self {
            LatinGroup::StaticAFirst => "SA/DB",
            LatinGroup::StaticBFirst => "SB/DA",
            LatinGroup::DynamicAFirst => "DA/SB",
            LatinGroup::DynamicBFirst => "DB/SA",
        }
    }

    /// The two blocks in order: (condition, melody).
    pub fn blocks(self) -> [(GuidanceMode, MelodyRole); 2] {
        match self {
            LatinGroup::StaticAFirst => [
                (GuidanceMode::Static, MelodyRole::A),
                (GuidanceMode::Dynamic, MelodyRole::B),
            ],
            LatinGroup::StaticBFirst => [
                (GuidanceMode::Static, MelodyRole::B),
                (GuidanceMode::Dynamic, MelodyRole::A),
            ],
            LatinGroup::DynamicAFirst => [
                (GuidanceMode::Dynamic, MelodyRole::A),
                (GuidanceMode::Static, MelodyRole::B),
            ],
            LatinGroup::DynamicBFirst => [
                (GuidanceMode::Dynamic, MelodyRole::B),
                (GuidanceMode::Static, MelodyRole::A),
            ],
        }
    }

    pub fn first_condition(self) -> GuidanceMode {
        self.blocks()[0].0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Assignment {
    pub participant: usize,
    pub group: LatinGroup,
}

/// Round-robin group assignment over a seeded shuffle of participant order;
/// per-group counts never differ by more than one.
pub fn assign_groups(n: usize, seed: u64) -> Vec<Assignment> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream_rng(seed, &[TAG_ASSIGN]));
    let mut assignments: Vec<Assignment> = order
        .iter()
        .enumerate()
        .map(|(k, &participant)| Assignment {
            participant,
            group: LatinGroup::ALL[k % 4],
        })
        .collect();
    assignments.sort_by_key(|a| a.participant);
    assignments
}

/// Protocol constants; defaults follow the study procedure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolConfig {
    pub participants: usize,
    pub loops_per_segment: u32,
    /// Trials per unguided test; the better one is retained for analysis.
    pub trials_per_test: u32,
    /// Dead time between loops (the countdown); no events or frames occur in
    /// it, and loop clocks restart at zero.
    pub countdown_ms: f64,
    pub record_test_motion: bool,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            participants: 30,
            loops_per_segment: 10,
            trials_per_test: 2,
            countdown_ms: 2000.0,
            record_test_motion: true,
        }
    }
}

/// Everything `run_experiment` needs besides melodies and the seed.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub controller: ControllerConfig,
    pub scoring: ScoringConfig,
    pub learner: LearnerParams,
    pub protocol: ProtocolConfig,
}

const TAG_ASSIGN: u64 = 1;
const TAG_PROFILE: u64 = 2;
const TAG_SKILL: u64 = 3;
const TAG_TRAIN: u64 = 4;
const TAG_TRAIN_EXTRA: u64 = 5;
const TAG_TEST: u64 = 6;
const TAG_TEST_EXTRA: u64 = 7;
const TAG_MOTION: u64 = 8;

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent substream seed from the master seed and a key path.
pub fn stream_seed(master: u64, parts: &[u64]) -> u64 {
    let mut s = splitmix64(master);
    for &p in parts {
        s = splitmix64(s ^ p.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    }
    s
}

fn stream_rng(master: u64, parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(master, parts))
}

/// Built-in Melody A (original fixture, roughly 12 s, right hand, single
/// notes).
pub fn default_melody_a() -> MelodySpec {
    crate::melody::parse_melody(include_str!("../../assets/melody_a.json"))
        .expect("bundled melody A is valid")
}

/// Built-in Melody B.
pub fn default_melody_b() -> MelodySpec {
    crate::melody::parse_melody(include_str!("../../assets/melody_b.json"))
        .expect("bundled melody B is valid")
}

/// Result of one training loop.
pub struct LoopResult {
    pub events: Vec<KeyEvent>,
    pub frames: Vec<crate::controller::FrameTrace>,
    pub outcomes: Vec<NoteOutcome>,
    pub metrics: TrialMetrics,
    /// Mean presented opacity over the loop; feeds the next loop's
    /// in-the-moment guidance effect.
    pub mean_presented_alpha: f64,
    pub per_note_alpha: Vec<f64>,
}

/// Run one guided training loop: generate events, score them, drive the
/// controller at frame cadence (outcomes enter its window when they finalize:
/// matched and extra events at their onset, misses when their window
/// expires), then apply the learner update from per-note opacity exposure.
pub fn perform_loop(
    learner: &mut LearnerModel,
    seg_melody: &MelodySpec,
    note_offset: usize,
    controller: &mut Controller,
    guidance_alpha_hint: f64,
    scoring: &ScoringConfig,
    note_rng: &mut ChaCha8Rng,
    extra_rng: &mut ChaCha8Rng,
) -> Result<LoopResult, SimError> {
    let span = seg_melody.span_ms();
    let events = learner.generate_events(
        &seg_melody.notes,
        note_offset,
        span,
        GuidanceCtx::Training {
            alpha: guidance_alpha_hint,
        },
        note_rng,
        extra_rng,
    );
    let outcomes = match_events(seg_melody, &events, &scoring.matching, &scoring.weights)?;

    let mut finalize: Vec<(f64, usize)> = outcomes
        .iter()
        .enumerate()
        .map(|(idx, o)| {
            let t = match o.event_index {
                Some(e) => events[e].onset_ms,
                None => {
                    seg_melody.notes[o.ref_index.expect("missed outcome has ref")].onset_ms
                        + scoring.matching.match_window_ms
                }
            };
            (t, idx)
        })
        .collect();
    finalize.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));

    let dt = controller.config().frame_interval_ms();
    let end = span + scoring.matching.match_window_ms + dt;
    let n_frames = (end / dt).floor() as usize + 1;
    let mut frames = Vec::with_capacity(n_frames);
    let mut presented = Vec::with_capacity(n_frames);
    let mut next_outcome = 0usize;
    for i in 0..n_frames {
        let t = i as f64 * dt;
        while next_outcome < finalize.len() && finalize[next_outcome].0 <= t {
            controller.on_note_outcome(&outcomes[finalize[next_outcome].1]);
            next_outcome += 1;
        }
        frames.push(controller.tick(t));
        presented.push(controller.presented_alpha());
    }
    while next_outcome < finalize.len() {
        controller.on_note_outcome(&outcomes[finalize[next_outcome].1]);
        next_outcome += 1;
    }

    let per_note_alpha: Vec<f64> = seg_melody
        .notes
        .iter()
        .map(|n| {
            let lo = ((n.onset_ms / dt).floor().max(0.0) as usize).min(presented.len() - 1);
            let hi = (((n.onset_ms + n.duration_ms) / dt).ceil() as usize)
                .min(presented.len() - 1)
                .max(lo);
            let window = &presented[lo..=hi];
            window.iter().sum::<f64>() / window.len() as f64
        })
        .collect();

    learner.learn_from_loop(note_offset, &per_note_alpha);
    let metrics = trial_summary(&outcomes, &scoring.weights)?;
    let mean_presented_alpha = presented.iter().sum::<f64>() / presented.len() as f64;

    Ok(LoopResult {
        events,
        frames,
        outcomes,
        metrics,
        mean_presented_alpha,
        per_note_alpha,
    })
}

/// One unguided test trial.
pub struct TestTrial {
    pub events: Vec<KeyEvent>,
    pub outcomes: Vec<NoteOutcome>,
    pub metrics: TrialMetrics,
}

/// Run the trials of one test phase without controller influence or learning.
/// Returns the trials and the index of the better one (higher total score;
/// ties keep the earlier trial).
pub fn perform_test(
    learner: &LearnerModel,
    melody: &MelodySpec,
    trials: u32,
    scoring: &ScoringConfig,
    mut trial_rngs: impl FnMut(u32) -> (ChaCha8Rng, ChaCha8Rng),
) -> Result<(Vec<TestTrial>, usize), SimError> {
    let mut out = Vec::with_capacity(trials as usize);
    for trial in 1..=trials {
        let (mut note_rng, mut extra_rng) = trial_rngs(trial);
        let events = learner.generate_events(
            &melody.notes,
            0,
            melody.span_ms(),
            GuidanceCtx::Test,
            &mut note_rng,
            &mut extra_rng,
        );
        let outcomes = match_events(melody, &events, &scoring.matching, &scoring.weights)?;
        let metrics = trial_summary(&outcomes, &scoring.weights)?;
        out.push(TestTrial {
            events,
            outcomes,
            metrics,
        });
    }
    let mut best = 0usize;
    for (i, t) in out.iter().enumerate() {
        if t.metrics.total_score() > out[best].metrics.total_score() {
            best = i;
        }
    }
    Ok((out, best))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestMelody {
    pub id: String,
    pub file: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestGhost {
    pub melody_id: String,
    pub file: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestAssignment {
    pub participant_id: String,
    pub group: String,
    pub experienced: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestLog {
    pub file: String,
    pub sha256: String,
    pub participant_id: String,
    pub condition: GuidanceMode,
    pub melody_id: String,
    pub phase: Phase,
    pub segment: Segment,
    pub loop_index: u32,
    pub block_index: usize,
    /// Set on test trials: whether this trial was the better of its pair.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best: Option<bool>,
}

/// Index of one corpus: configuration echo plus every log with its hash.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusManifest {
    pub schema_version: String,
    pub master_seed: u64,
    pub participants: usize,
    pub scoring: ScoringConfig,
    pub controller: ControllerConfig,
    pub melodies: Vec<ManifestMelody>,
    pub ghost_motion: Vec<ManifestGhost>,
    pub assignments: Vec<ManifestAssignment>,
    pub logs: Vec<ManifestLog>,
    /// Hash over the ordered per-log hashes; identical corpora hash equal
    /// regardless of worker count.
    pub corpus_hash: String,
}

/// A complete simulated corpus, in memory. `logs` parallels `manifest.logs`.
pub struct ExperimentOutput {
    pub manifest: CorpusManifest,
    pub logs: Vec<SessionLog>,
    pub melodies: Vec<MelodySpec>,
    pub ghost_motion: Vec<(String, Vec<MotionFrame>)>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

struct LogMeta {
    block_index: usize,
    best: Option<bool>,
}

/// Run the whole protocol for every participant.
///
/// `workers` sizes the worker pool (0 = library default); the corpus is
/// identical for any value.
pub fn run_experiment(
    cfg: &SimConfig,
    melody_a: &MelodySpec,
    melody_b: &MelodySpec,
    master_seed: u64,
    workers: usize,
) -> Result<ExperimentOutput, SimError> {
    cfg.controller.validate()?;
    cfg.scoring.validate()?;
    melody_a.validate()?;
    melody_b.validate()?;
    if cfg.protocol.participants == 0
        || cfg.protocol.loops_per_segment == 0
        || cfg.protocol.trials_per_test == 0
    {
        return Err(SimError::BadProtocol);
    }

    let assignments = assign_groups(cfg.protocol.participants, master_seed);

    let mut ghost_rng = ChaCha8Rng::seed_from_u64(0);
    let ghost_motion: Vec<(String, Vec<MotionFrame>)> = [melody_a, melody_b]
        .iter()
        .map(|m| {
            (
                m.id.clone(),
                synth_motion(&actions_from_notes(&m.notes), m.span_ms(), 0.0, &mut ghost_rng),
            )
        })
        .collect();

    let run_one = |a: &Assignment| simulate_participant(cfg, melody_a, melody_b, a, master_seed);
    let per_participant: Vec<Vec<(SessionLog, LogMeta)>> = if workers == 1 {
        assignments
            .iter()
            .map(run_one)
            .collect::<Result<_, _>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| SimError::Pool(e.to_string()))?;
        pool.install(|| {
            assignments
                .par_iter()
                .map(run_one)
                .collect::<Result<_, _>>()
        })?
    };

    let mut logs = Vec::new();
    let mut manifest_logs = Vec::new();
    let mut hash_feed = String::new();
    for participant_logs in per_participant {
        for (log, meta) in participant_logs {
            let text = write_log(&log);
            let digest = sha256_hex(text.as_bytes());
            hash_feed.push_str(&digest);
            hash_feed.push('\n');
            manifest_logs.push(ManifestLog {
                file: format!("logs/{}", log.file_name()),
                sha256: digest,
                participant_id: log.participant_id.clone(),
                condition: log.condition,
                melody_id: log.melody_id.clone(),
                phase: log.phase,
                segment: log.segment,
                loop_index: log.loop_index,
                block_index: meta.block_index,
                best: meta.best,
            });
            logs.push(log);
        }
    }

    let manifest = CorpusManifest {
        schema_version: SCHEMA_VERSION.to_string(),
        master_seed,
        participants: cfg.protocol.participants,
        scoring: cfg.scoring,
        controller: cfg.controller,
        melodies: vec![
            ManifestMelody {
                id: melody_a.id.clone(),
                file: format!("{}.melody.json", melody_a.id),
            },
            ManifestMelody {
                id: melody_b.id.clone(),
                file: format!("{}.melody.json", melody_b.id),
            },
        ],
        ghost_motion: ghost_motion
            .iter()
            .map(|(id, _)| ManifestGhost {
                melody_id: id.clone(),
                file: format!("ghost_{id}.motion.json"),
            })
            .collect(),
        assignments: assignments
            .iter()
            .map(|a| ManifestAssignment {
                participant_id: participant_name(a.participant),
                group: a.group.label().to_string(),
                experienced: is_experienced(cfg, a.participant, master_seed),
            })
            .collect(),
        logs: manifest_logs,
        corpus_hash: sha256_hex(hash_feed.as_bytes()),
    };

    Ok(ExperimentOutput {
        manifest,
        logs,
        melodies: vec![melody_a.clone(), melody_b.clone()],
        ghost_motion,
    })
}

pub fn participant_name(index: usize) -> String {
    format!("P{:03}", index + 1)
}

fn is_experienced(cfg: &SimConfig, participant: usize, master: u64) -> bool {
    stream_rng(master, &[TAG_PROFILE, participant as u64]).gen::<f64>()
        < cfg.learner.experienced_fraction
}

fn simulate_participant(
    cfg: &SimConfig,
    melody_a: &MelodySpec,
    melody_b: &MelodySpec,
    assignment: &Assignment,
    master: u64,
) -> Result<Vec<(SessionLog, LogMeta)>, SimError> {
    let p = assignment.participant as u64;
    let pid = participant_name(assignment.participant);
    let experienced = is_experienced(cfg, assignment.participant, master);
    let mut out = Vec::new();

    for (block_idx, (mode, role)) in assignment.group.blocks().into_iter().enumerate() {
        let melody = match role {
            MelodyRole::A => melody_a,
            MelodyRole::B => melody_b,
        };
        let role_idx = match role {
            MelodyRole::A => 0u64,
            MelodyRole::B => 1u64,
        };
        let mut learner = LearnerModel::init(
            &cfg.learner,
            melody.notes.len(),
            experienced,
            &mut stream_rng(master, &[TAG_SKILL, p, role_idx]),
        );
        let mut controller = Controller::new(ControllerConfig {
            mode,
            ..cfg.controller
        })?;

        for (seg_idx, seg) in Segment::TRAINING_ORDER.iter().enumerate() {
            let seg_melody = slice_phrase(melody, *seg);
            let note_offset = melody.segment_note_offset(*seg);
            controller.reset();
            let mut alpha_hint = controller.presented_alpha();
            for loop_i in 1..=cfg.protocol.loops_per_segment {
                if !cfg.controller.persist_across_loops {
                    controller.reset();
                }
                let key = [TAG_TRAIN, p, role_idx, seg_idx as u64, loop_i as u64];
                let seed = stream_seed(master, &key);
                let mut note_rng = ChaCha8Rng::seed_from_u64(seed);
                let mut extra_rng =
                    stream_rng(master, &[TAG_TRAIN_EXTRA, p, role_idx, seg_idx as u64, loop_i as u64]);
                let lr = perform_loop(
                    &mut learner,
                    &seg_melody,
                    note_offset,
                    &mut controller,
                    alpha_hint,
                    &cfg.scoring,
                    &mut note_rng,
                    &mut extra_rng,
                )?;
                alpha_hint = lr.mean_presented_alpha;
                out.push((
                    SessionLog {
                        schema_version: SCHEMA_VERSION.to_string(),
                        participant_id: pid.clone(),
                        condition: mode,
                        melody_id: melody.id.clone(),
                        phase: Phase::Training,
                        segment: *seg,
                        loop_index: loop_i,
                        rng_seed: seed,
                        motion_offset_ms: None,
                        events: lr.events,
                        frames: lr.frames,
                        motion: None,
                        curves: None,
                    },
                    LogMeta {
                        block_index: block_idx,
                        best: None,
                    },
                ));
            }
        }

        for (phase_idx, phase) in [Phase::ImmediateTest, Phase::RetentionTest]
            .into_iter()
            .enumerate()
        {
            if phase == Phase::RetentionTest {
                // The distractor interval: one decay step, steeper under
                // accrued reliance.
                learner.apply_retention_decay();
            }
            // Test streams are keyed by (participant, phase, trial) only:
            // identical draws across conditions and melodies.
            let (trials, best) = perform_test(
                &learner,
                melody,
                cfg.protocol.trials_per_test,
                &cfg.scoring,
                |trial| {
                    (
                        stream_rng(master, &[TAG_TEST, p, phase_idx as u64, trial as u64]),
                        stream_rng(master, &[TAG_TEST_EXTRA, p, phase_idx as u64, trial as u64]),
                    )
                },
            )?;
            for (i, trial) in trials.into_iter().enumerate() {
                let trial_no = i as u32 + 1;
                let motion = if cfg.protocol.record_test_motion {
                    let noise =
                        cfg.learner.motion_noise_m * (1.0 - learner.mean_skill()).max(0.0);
                    let mut rng =
                        stream_rng(master, &[TAG_MOTION, p, phase_idx as u64, trial_no as u64]);
                    Some(synth_motion(
                        &actions_from_events(&trial.events),
                        melody.span_ms(),
                        noise,
                        &mut rng,
                    ))
                } else {
                    None
                };
                out.push((
                    SessionLog {
                        schema_version: SCHEMA_VERSION.to_string(),
                        participant_id: pid.clone(),
                        condition: mode,
                        melody_id: melody.id.clone(),
                        phase,
                        segment: Segment::Full,
                        loop_index: trial_no,
                        rng_seed: stream_seed(master, &[TAG_TEST, p, phase_idx as u64, trial_no as u64]),
                        motion_offset_ms: None,
                        events: trial.events,
                        frames: Vec::new(),
                        motion,
                        curves: None,
                    },
                    LogMeta {
                        block_index: block_idx,
                        best: Some(i == best),
                    },
                ));
            }
        }
    }
    Ok(out)
}

fn write_file(path: &Path, contents: &str) -> Result<(), SimError> {
    std::fs::write(path, contents).map_err(|source| SimError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Persist a corpus: melodies, ghost demonstrations, logs, and the manifest.
pub fn write_corpus(output: &ExperimentOutput, dir: &Path) -> Result<(), SimError> {
    let logs_dir = dir.join("logs");
    std::fs::create_dir_all(&logs_dir).map_err(|source| SimError::Io {
        path: logs_dir.display().to_string(),
        source,
    })?;
    for melody in &output.melodies {
        write_file(
            &dir.join(format!("{}.melody.json", melody.id)),
            &crate::melody::serialize_melody(melody),
        )?;
    }
    for (id, motion) in &output.ghost_motion {
        let text = serde_json::to_string(motion).expect("motion serialization");
        write_file(&dir.join(format!("ghost_{id}.motion.json")), &text)?;
    }
    for (log, entry) in output.logs.iter().zip(output.manifest.logs.iter()) {
        write_file(&dir.join(&entry.file), &write_log(log))?;
    }
    let manifest =
        serde_json::to_string_pretty(&output.manifest).expect("manifest serialization");
    write_file(&dir.join("manifest.json"), &format!("{manifest}\n"))?;
    Ok(())
}
