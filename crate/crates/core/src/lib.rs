//! Adaptive ghost-hand guidance engine.
//!
//! The crate covers the full loop of a performance-contingent guidance
//! system at desk scale: reference melodies ([`melody`]), per-note scoring of
//! key events against them ([`scoring`]), the error-driven transparency
//! controller ([`controller`]), versioned session logs with keyframe-
//! compressed motion ([`sessionlog`]), a synthetic-learner protocol simulator
//! ([`simulator`]), and the objective analysis suite ([`analysis`]).

pub mod analysis;
pub mod controller;
pub mod geom;
pub mod melody;
pub mod scoring;
pub mod sessionlog;
pub mod simulator;

pub use controller::{Controller, ControllerConfig, FrameTrace, GuidanceMode};
pub use melody::{parse_melody, serialize_melody, slice_phrase, FingerLabel, MelodySpec, NoteSpec, Segment};
pub use scoring::{
    match_events, score_matched, trial_summary, KeyEvent, MatchConfig, NoteOutcome, OutcomeKind,
    ScoreWeights, ScoringConfig, TrialMetrics,
};
pub use sessionlog::{read_log, write_log, MotionFrame, Phase, SessionLog};
pub use simulator::{run_experiment, write_corpus, ProtocolConfig, SimConfig};
