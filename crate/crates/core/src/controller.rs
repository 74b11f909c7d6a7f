//! Error-to-opacity transparency control.
//!
//! A sliding window of recent note composites produces a per-frame error
//! signal, smoothed by an asymmetric EMA (slow rise, fast fall) and mapped
//! linearly onto the clamped opacity range. Static mode emits a constant
//! opacity while still tracking the smoothed error for logging parity.

use crate::scoring::NoteOutcome;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ControllerError {
    #[error("alpha bounds must satisfy 0 <= alpha_min < alpha_max <= 1 (got {min}..{max})")]
    BadAlphaBounds { min: f64, max: f64 },
    #[error("static_alpha must be in [0,1], got {0}")]
    BadStaticAlpha(f64),
    #[error("smoothing factors must be in (0,1) with lambda_up <= lambda_down (got up={up}, down={down})")]
    BadLambdas { up: f64, down: f64 },
    #[error("frame_hz must be positive, got {0}")]
    BadFrameRate(f64),
    #[error("window_notes must be >= 1")]
    BadWindow,
    #[error("easing_max_step must be in [0,1], got {0}")]
    BadEasing(f64),
    #[error("e_initial must be in [0,1], got {0}")]
    BadInitialError(f64),
    #[error("unknown guidance mode `{0}` (expected `static` or `dynamic`)")]
    BadMode(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuidanceMode {
    Static,
    Dynamic,
}

impl GuidanceMode {
    pub fn file_tag(self) -> &'static str {
        match self {
            GuidanceMode::Static => "static",
            GuidanceMode::Dynamic => "dynamic",
        }
    }
}

impl std::fmt::Display for GuidanceMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.file_tag())
    }
}

impl FromStr for GuidanceMode {
    type Err = ControllerError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "static" => Ok(GuidanceMode::Static),
            "dynamic" => Ok(GuidanceMode::Dynamic),
            other => Err(ControllerError::BadMode(other.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllerConfig {
    pub mode: GuidanceMode,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub static_alpha: f64,
    /// Smoothing factor applied when the error rises (cautious reappearance).
    pub lambda_up: f64,
    /// Smoothing factor applied when the error falls (fast fade).
    pub lambda_down: f64,
    pub frame_hz: f64,
    /// Window W of recent note composites forming the per-frame error.
    pub window_notes: usize,
    /// Per-frame limit on the presented opacity's movement; 0 disables easing.
    /// Easing shapes only the presented value, never the mapped trace.
    pub easing_max_step: f64,
    /// Error assumed before any notes have been scored.
    pub e_initial: f64,
    /// Keep the smoothed error across loop boundaries instead of resetting at
    /// every loop start.
    pub persist_across_loops: bool,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        ControllerConfig {
            mode: GuidanceMode::Dynamic,
            alpha_min: 0.08,
            alpha_max: 0.8,
            static_alpha: 0.5,
            lambda_up: 0.033,
            lambda_down: 0.065,
            frame_hz: 30.0,
            window_notes: 4,
            easing_max_step: 0.05,
            e_initial: 1.0,
            persist_across_loops: false,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<(), ControllerError> {
        if !(0.0..=1.0).contains(&self.alpha_min)
            || !(0.0..=1.0).contains(&self.alpha_max)
            || self.alpha_min >= self.alpha_max
        {
            return Err(ControllerError::BadAlphaBounds {
                min: self.alpha_min,
                max: self.alpha_max,
            });
        }
        if !(0.0..=1.0).contains(&self.static_alpha) {
            return Err(ControllerError::BadStaticAlpha(self.static_alpha));
        }
        let open01 = |x: f64| x > 0.0 && x < 1.0;
        if !open01(self.lambda_up) || !open01(self.lambda_down) || self.lambda_up > self.lambda_down
        {
            return Err(ControllerError::BadLambdas {
                up: self.lambda_up,
                down: self.lambda_down,
            });
        }
        if !self.frame_hz.is_finite() || self.frame_hz <= 0.0 {
            return Err(ControllerError::BadFrameRate(self.frame_hz));
        }
        if self.window_notes == 0 {
            return Err(ControllerError::BadWindow);
        }
        if !(0.0..=1.0).contains(&self.easing_max_step) {
            return Err(ControllerError::BadEasing(self.easing_max_step));
        }
        if !(0.0..=1.0).contains(&self.e_initial) {
            return Err(ControllerError::BadInitialError(self.e_initial));
        }
        Ok(())
    }

    pub fn frame_interval_ms(&self) -> f64 {
        1000.0 / self.frame_hz
    }

    /// Linear error-to-opacity map, clamped. Written so the endpoints are
    /// exact: opacity(0) == alpha_min and opacity(1) == alpha_max.
    pub fn opacity(&self, e_hat: f64) -> f64 {
        let raw = self.alpha_min * (1.0 - e_hat) + self.alpha_max * e_hat;
        raw.clamp(self.alpha_min, self.alpha_max)
    }
}

/// Exponential time constant in seconds of one EMA branch at a frame rate.
pub fn ema_time_constant_s(lambda: f64, frame_hz: f64) -> f64 {
    -1.0 / (frame_hz * (1.0 - lambda).ln())
}

/// One frame of the control trace. `alpha` is `alpha_raw` clamped to the
/// display range; the eased presented value lives on the controller state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameTrace {
    pub t_ms: f64,
    /// Instantaneous error E_t fed to the smoother this frame.
    pub error: f64,
    /// Smoothed error after this frame's update.
    pub e_hat: f64,
    /// Unclamped linear opacity target.
    pub alpha_raw: f64,
    /// Clamped opacity target.
    pub alpha: f64,
}

#[derive(Clone, Debug)]
pub struct Controller {
    cfg: ControllerConfig,
    e_hat: f64,
    recent: VecDeque<f64>,
    presented: f64,
    frame_index: u64,
}

impl Controller {
    pub fn new(cfg: ControllerConfig) -> Result<Self, ControllerError> {
        cfg.validate()?;
        let mut c = Controller {
            cfg,
            e_hat: 0.0,
            recent: VecDeque::new(),
            presented: 0.0,
            frame_index: 0,
        };
        c.reset();
        Ok(c)
    }

    /// Loop-start initialization: smoothed error back to `e_initial`, window
    /// emptied, presented opacity at the mapped initial value.
    pub fn reset(&mut self) {
        self.e_hat = self.cfg.e_initial;
        self.recent.clear();
        self.frame_index = 0;
        self.presented = match self.cfg.mode {
            GuidanceMode::Static => self.cfg.static_alpha,
            GuidanceMode::Dynamic => self.cfg.opacity(self.cfg.e_initial),
        };
    }

    pub fn config(&self) -> &ControllerConfig {
        &self.cfg
    }

    pub fn e_hat(&self) -> f64 {
        self.e_hat
    }

    pub fn frame_index(&self) -> u64 {
        self.frame_index
    }

    /// Opacity actually shown this frame (after easing).
    pub fn presented_alpha(&self) -> f64 {
        self.presented
    }

    /// Push a finalized note outcome's composite into the sliding window.
    pub fn on_note_outcome(&mut self, outcome: &NoteOutcome) {
        self.push_note_score(outcome.composite);
    }

    pub fn push_note_score(&mut self, composite: f64) {
        self.recent.push_back(composite.clamp(0.0, 1.0));
        while self.recent.len() > self.cfg.window_notes {
            self.recent.pop_front();
        }
    }

    /// Error the next tick will see: 1 - mean of the recent note composites,
    /// or the configured initial error while the window is empty.
    pub fn instantaneous_error(&self) -> f64 {
        if self.recent.is_empty() {
            self.cfg.e_initial
        } else {
            1.0 - self.recent.iter().sum::<f64>() / self.recent.len() as f64
        }
    }

    /// Advance one frame using the windowed error signal.
    pub fn tick(&mut self, t_ms: f64) -> FrameTrace {
        let e_t = self.instantaneous_error();
        self.tick_with_error(t_ms, e_t)
    }

    /// Advance one frame with an externally supplied error sample.
    pub fn tick_with_error(&mut self, t_ms: f64, e_t: f64) -> FrameTrace {
        let lambda = if e_t > self.e_hat {
            self.cfg.lambda_up
        } else {
            self.cfg.lambda_down
        };
        self.e_hat = lambda * e_t + (1.0 - lambda) * self.e_hat;

        let (alpha_raw, alpha) = match self.cfg.mode {
            GuidanceMode::Dynamic => {
                let raw = self.cfg.alpha_min * (1.0 - self.e_hat) + self.cfg.alpha_max * self.e_hat;
                (raw, raw.clamp(self.cfg.alpha_min, self.cfg.alpha_max))
            }
            GuidanceMode::Static => (self.cfg.static_alpha, self.cfg.static_alpha),
        };

        self.presented = if self.cfg.easing_max_step > 0.0 {
            let step = (alpha - self.presented)
                .clamp(-self.cfg.easing_max_step, self.cfg.easing_max_step);
            self.presented + step
        } else {
            alpha
        };
        self.frame_index += 1;

        FrameTrace {
            t_ms,
            error: e_t,
            e_hat: self.e_hat,
            alpha_raw,
            alpha,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::{prop_assert, proptest};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn dynamic_cfg() -> ControllerConfig {
        ControllerConfig::default()
    }

    fn static_cfg() -> ControllerConfig {
        ControllerConfig {
            mode: GuidanceMode::Static,
            ..ControllerConfig::default()
        }
    }

    #[test]
    fn reset_defaults_show_full_allowed_visibility() {
        let c = Controller::new(dynamic_cfg()).unwrap();
        assert_eq!(c.e_hat(), 1.0);
        assert_eq!(c.presented_alpha(), 0.8);
    }

    #[test]
    fn reset_with_zero_initial_error_is_faint() {
        let c = Controller::new(ControllerConfig {
            e_initial: 0.0,
            ..dynamic_cfg()
        })
        .unwrap();
        assert_eq!(c.presented_alpha(), 0.08);
    }

    #[test]
    fn static_mode_presents_constant_alpha() {
        let mut c = Controller::new(static_cfg()).unwrap();
        assert_eq!(c.presented_alpha(), 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for i in 0..2000 {
            if rng.gen_bool(0.3) {
                c.push_note_score(rng.gen());
            }
            let trace = c.tick(i as f64 * 33.0);
            assert_eq!(trace.alpha, 0.5);
            assert_eq!(trace.alpha_raw, 0.5);
            assert_eq!(c.presented_alpha(), 0.5);
        }
    }

    #[test]
    fn fixed_point_frame_matches_hand_arithmetic() {
        // E_t == e_hat == 0.5 stays put and maps to 0.08 + 0.72 * 0.5 = 0.44.
        let mut c = Controller::new(ControllerConfig {
            e_initial: 0.5,
            ..dynamic_cfg()
        })
        .unwrap();
        let trace = c.tick_with_error(0.0, 0.5);
        assert!((trace.e_hat - 0.5).abs() < 1e-15);
        assert!((trace.alpha_raw - 0.44).abs() < 1e-12);
        assert_eq!(trace.alpha, trace.alpha_raw.clamp(0.08, 0.8));
    }

    #[test]
    fn clamp_endpoints_are_exact_under_held_error() {
        let mut c = Controller::new(dynamic_cfg()).unwrap();
        for i in 0..5000 {
            let t = c.tick_with_error(i as f64, 1.0);
            assert!(t.alpha <= 0.8);
        }
        assert_eq!(c.tick_with_error(0.0, 1.0).alpha, 0.8);

        let mut c = Controller::new(ControllerConfig {
            e_initial: 0.0,
            ..dynamic_cfg()
        })
        .unwrap();
        for i in 0..5000 {
            c.tick_with_error(i as f64, 0.0);
        }
        assert_eq!(c.tick_with_error(0.0, 0.0).alpha, 0.08);
    }

    #[test]
    fn window_buffer_matches_reference_ring_buffer() {
        let mut c = Controller::new(dynamic_cfg()).unwrap();
        let w = c.config().window_notes;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut all: Vec<f64> = Vec::new();
        for _ in 0..100 {
            let s: f64 = rng.gen();
            c.push_note_score(s);
            all.push(s);
            let tail = &all[all.len().saturating_sub(w)..];
            let expected = 1.0 - tail.iter().sum::<f64>() / tail.len() as f64;
            assert!((c.instantaneous_error() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn push_perfect_note_into_empty_buffer_zeroes_error() {
        let mut c = Controller::new(dynamic_cfg()).unwrap();
        c.push_note_score(1.0);
        assert_eq!(c.instantaneous_error(), 0.0);
        c.push_note_score(1.0);
        c.push_note_score(0.0);
        c.push_note_score(0.0);
        // Buffer [1, 1, 0, 0] with W = 4.
        assert!((c.instantaneous_error() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn step_responses_match_geometric_recurrence() {
        let cfg = dynamic_cfg();
        // Upward step 0 -> 1 from a settled e_hat of 0.
        let mut c = Controller::new(ControllerConfig {
            e_initial: 0.0,
            ..cfg
        })
        .unwrap();
        for n in 1..=1000usize {
            let t = c.tick_with_error(n as f64, 1.0);
            let expected = 1.0 - (1.0 - cfg.lambda_up).powi(n as i32);
            assert!(
                (t.e_hat - expected).abs() <= 1e-12,
                "frame {n}: {} vs {expected}",
                t.e_hat
            );
        }
        // Downward step 1 -> 0.
        let mut c = Controller::new(ControllerConfig {
            e_initial: 1.0,
            ..cfg
        })
        .unwrap();
        for n in 1..=1000usize {
            let t = c.tick_with_error(n as f64, 0.0);
            let expected = (1.0 - cfg.lambda_down).powi(n as i32);
            assert!((t.e_hat - expected).abs() <= 1e-12);
        }
    }

    #[test]
    fn default_time_constants_hit_the_half_to_one_second_band() {
        let cfg = dynamic_cfg();
        let up = ema_time_constant_s(cfg.lambda_up, cfg.frame_hz);
        let down = ema_time_constant_s(cfg.lambda_down, cfg.frame_hz);
        assert!((up - 1.0).abs() / 1.0 < 0.05, "rise constant {up}");
        assert!((down - 0.5).abs() / 0.5 < 0.05, "fall constant {down}");
    }

    #[test]
    fn easing_limits_presented_slew_but_not_the_trace() {
        let cfg = ControllerConfig {
            e_initial: 0.0,
            easing_max_step: 0.01,
            ..dynamic_cfg()
        };
        let mut c = Controller::new(cfg).unwrap();
        let mut prev = c.presented_alpha();
        // Force a hard upward jump in error.
        for i in 0..200 {
            let t = c.tick_with_error(i as f64, 1.0);
            let now = c.presented_alpha();
            assert!((now - prev).abs() <= 0.01 + 1e-15);
            assert_eq!(t.alpha, t.alpha_raw.clamp(0.08, 0.8));
            prev = now;
        }
    }

    #[test]
    fn identical_inputs_give_bit_identical_traces() {
        let run = || {
            let mut c = Controller::new(dynamic_cfg()).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(1234);
            let mut out = Vec::new();
            for i in 0..500 {
                if rng.gen_bool(0.4) {
                    c.push_note_score(rng.gen());
                }
                out.push(c.tick(i as f64 * 33.0));
            }
            out
        };
        let a = run();
        let b = run();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad = ControllerConfig {
            alpha_min: 0.9,
            ..dynamic_cfg()
        };
        assert!(bad.validate().is_err());
        let bad = ControllerConfig {
            lambda_up: 0.5,
            lambda_down: 0.1,
            ..dynamic_cfg()
        };
        assert!(bad.validate().is_err());
        let bad = ControllerConfig {
            window_notes: 0,
            ..dynamic_cfg()
        };
        assert!(bad.validate().is_err());
    }

    proptest! {
        /// The clamp is total: any error sequence keeps alpha within bounds
        /// and e_hat within [0,1].
        #[test]
        fn alpha_within_bounds_for_any_input(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut c = Controller::new(dynamic_cfg()).unwrap();
            for i in 0..300 {
                if rng.gen_bool(0.5) {
                    c.push_note_score(rng.gen());
                }
                let t = c.tick(i as f64);
                prop_assert!((0.08..=0.8).contains(&t.alpha));
                prop_assert!((0.0..=1.0).contains(&t.e_hat));
                prop_assert!((0.08..=0.8).contains(&c.presented_alpha()));
            }
        }

        /// For a fixed previous state, a larger instantaneous error never
        /// produces a smaller smoothed error or raw opacity.
        #[test]
        fn monotone_in_instantaneous_error(e0 in 0.0f64..1.0, e1 in 0.0f64..1.0, prev in 0.0f64..1.0) {
            let (lo, hi) = if e0 <= e1 { (e0, e1) } else { (e1, e0) };
            let mk = || Controller::new(ControllerConfig { e_initial: prev, ..dynamic_cfg() }).unwrap();
            let mut a = mk();
            let mut b = mk();
            let ta = a.tick_with_error(0.0, lo);
            let tb = b.tick_with_error(0.0, hi);
            prop_assert!(tb.e_hat >= ta.e_hat - 1e-15);
            prop_assert!(tb.alpha_raw >= ta.alpha_raw - 1e-15);
        }
    }
}
