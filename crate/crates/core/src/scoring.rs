//! Per-note performance scoring: event-to-note matching, the pitch/timing/
//! fingering sub-scores, composite score and error, and per-trial summaries.

use crate::melody::{FingerLabel, MelodySpec, NoteSpec};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("weights must be in [0,1] and sum to 1: got {w_p} + {w_t} + {w_f}")]
    BadWeights { w_p: f64, w_t: f64, w_f: f64 },
    #[error("tau_ms must be positive and finite, got {0}")]
    BadTau(f64),
    #[error("match_window_ms ({window}) must be >= tau_ms ({tau})")]
    BadWindow { window: f64, tau: f64 },
    #[error("events not sorted by onset at index {0}")]
    UnsortedEvents(usize),
    #[error("empty trial: no reference-note outcomes")]
    EmptyTrial,
}

/// One press-release cycle on the performance clock.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeyEvent {
    pub duration_ms: f64,
    pub finger: FingerLabel,
    pub onset_ms: f64,
    pub pitch: u8,
}

/// Convex weights of the composite score.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScoreWeights {
    pub w_p: f64,
    pub w_t: f64,
    pub w_f: f64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        ScoreWeights {
            w_p: 0.7,
            w_t: 0.2,
            w_f: 0.1,
        }
    }
}

impl ScoreWeights {
    pub fn validate(&self) -> Result<(), ScoreError> {
        let ok_range = |w: f64| (0.0..=1.0).contains(&w);
        let sum = self.w_p + self.w_t + self.w_f;
        if !ok_range(self.w_p) || !ok_range(self.w_t) || !ok_range(self.w_f)
            || (sum - 1.0).abs() > 1e-9
        {
            return Err(ScoreError::BadWeights {
                w_p: self.w_p,
                w_t: self.w_t,
                w_f: self.w_f,
            });
        }
        Ok(())
    }
}

/// Matching parameters. `tau_ms` is the acceptance half-window for pitch
/// credit and the timing normalizer; pairs farther apart than
/// `match_window_ms` are never formed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MatchConfig {
    pub tau_ms: f64,
    pub match_window_ms: f64,
    pub pitch_mismatch_penalty_ms: f64,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            tau_ms: 120.0,
            match_window_ms: 240.0,
            pitch_mismatch_penalty_ms: 120.0,
        }
    }
}

impl MatchConfig {
    pub fn validate(&self) -> Result<(), ScoreError> {
        if !self.tau_ms.is_finite() || self.tau_ms <= 0.0 {
            return Err(ScoreError::BadTau(self.tau_ms));
        }
        if self.match_window_ms < self.tau_ms {
            return Err(ScoreError::BadWindow {
                window: self.match_window_ms,
                tau: self.tau_ms,
            });
        }
        Ok(())
    }

    /// Cost carried by every unmatched reference note and every unmatched
    /// event in the assignment objective. Equal to the hard window, so any
    /// feasible pairing (cost at most window + penalty, which is below two
    /// unmatched charges for sane configs) is preferred over leaving both
    /// sides unmatched.
    pub fn unmatched_penalty_ms(&self) -> f64 {
        self.match_window_ms
    }

    pub fn pair_cost(&self, note: &NoteSpec, event: &KeyEvent) -> Option<f64> {
        let dt = (event.onset_ms - note.onset_ms).abs();
        if dt > self.match_window_ms {
            return None;
        }
        let penalty = if event.pitch == note.pitch {
            0.0
        } else {
            self.pitch_mismatch_penalty_ms
        };
        Some(dt + penalty)
    }
}

/// Scoring configuration bundle carried through simulation and analysis.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScoringConfig {
    pub weights: ScoreWeights,
    pub matching: MatchConfig,
}

impl ScoringConfig {
    pub fn validate(&self) -> Result<(), ScoreError> {
        self.weights.validate()?;
        self.matching.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    Matched,
    MissedReference,
    ExtraEvent,
}

/// One matched, missed, or extra note with its sub-scores, composite score,
/// and error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoteOutcome {
    pub kind: OutcomeKind,
    pub ref_index: Option<usize>,
    pub event_index: Option<usize>,
    pub delta_t_ms: Option<f64>,
    pub pitch_score: f64,
    pub timing_score: f64,
    pub finger_score: f64,
    pub composite: f64,
    pub error: f64,
}

impl NoteOutcome {
    fn missed(ref_index: usize) -> Self {
        NoteOutcome {
            kind: OutcomeKind::MissedReference,
            ref_index: Some(ref_index),
            event_index: None,
            delta_t_ms: None,
            pitch_score: 0.0,
            timing_score: 0.0,
            finger_score: 0.0,
            composite: 0.0,
            error: 1.0,
        }
    }

    fn extra(event_index: usize) -> Self {
        NoteOutcome {
            kind: OutcomeKind::ExtraEvent,
            ref_index: None,
            event_index: Some(event_index),
            delta_t_ms: None,
            pitch_score: 0.0,
            timing_score: 0.0,
            finger_score: 0.0,
            composite: 0.0,
            error: 1.0,
        }
    }
}

/// Sub-scores and composite for a matched (note, event) pair.
///
/// `delta_t` is event onset minus note onset (positive = late). Pitch credit
/// requires both the right key and an onset within the +-tau window; timing
/// decays linearly to zero at tau; fingering earns partial credit for an
/// adjacent finger.
pub fn score_matched(
    note: &NoteSpec,
    event: &KeyEvent,
    tau_ms: f64,
    weights: &ScoreWeights,
) -> NoteOutcome {
    let delta_t = event.onset_ms - note.onset_ms;
    let abs_dt = delta_t.abs();
    let pitch_score = if event.pitch == note.pitch && abs_dt <= tau_ms {
        1.0
    } else {
        0.0
    };
    let timing_score = 1.0 - (abs_dt / tau_ms).min(1.0);
    let finger_score = if event.finger == note.finger {
        1.0
    } else if event.finger.is_adjacent(note.finger) {
        0.5
    } else {
        0.0
    };
    let composite =
        weights.w_p * pitch_score + weights.w_t * timing_score + weights.w_f * finger_score;
    NoteOutcome {
        kind: OutcomeKind::Matched,
        ref_index: None,
        event_index: None,
        delta_t_ms: Some(delta_t),
        pitch_score,
        timing_score,
        finger_score,
        composite,
        error: 1.0 - composite,
    }
}

/// Exact minimum-cost one-to-one partial assignment of events to reference
/// notes.
///
/// Pair cost is |delta t| plus `pitch_mismatch_penalty_ms` when pitches
/// differ; pairs with |delta t| beyond `match_window_ms` are forbidden; every
/// unmatched note or event adds `unmatched_penalty_ms()` to the objective.
/// Unmatched reference notes yield `MissedReference` outcomes and unmatched
/// events yield `ExtraEvent`. Output is sorted by reference onset, with extra
/// events placed by their own onset.
pub fn match_events(
    melody: &MelodySpec,
    events: &[KeyEvent],
    cfg: &MatchConfig,
    weights: &ScoreWeights,
) -> Result<Vec<NoteOutcome>, ScoreError> {
    cfg.validate()?;
    weights.validate()?;
    for i in 1..events.len() {
        if events[i].onset_ms < events[i - 1].onset_ms {
            return Err(ScoreError::UnsortedEvents(i));
        }
    }

    let refs = &melody.notes;
    let n_refs = refs.len();
    let n_events = events.len();
    let size = n_refs + n_events;
    if size == 0 {
        return Ok(Vec::new());
    }

    // Square matrix with dummy rows/columns so "unmatched" is representable:
    // rows = refs then event-dummies, cols = events then ref-dummies.
    const FORBIDDEN: f64 = 1e15;
    let penalty = cfg.unmatched_penalty_ms();
    let mut cost = vec![vec![0.0f64; size]; size];
    for (r, row) in cost.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            *cell = match (r < n_refs, c < n_events) {
                (true, true) => cfg.pair_cost(&refs[r], &events[c]).unwrap_or(FORBIDDEN),
                (true, false) | (false, true) => penalty,
                (false, false) => 0.0,
            };
        }
    }

    let row_of_col = hungarian(&cost);

    let mut matched_event_for_ref = vec![None; n_refs];
    let mut event_matched = vec![false; n_events];
    for (c, &r) in row_of_col.iter().enumerate() {
        if r < n_refs && c < n_events && cost[r][c] < FORBIDDEN {
            matched_event_for_ref[r] = Some(c);
            event_matched[c] = true;
        }
    }

    let mut outcomes = Vec::with_capacity(n_refs + n_events);
    for (r, matched) in matched_event_for_ref.iter().enumerate() {
        match matched {
            Some(c) => {
                let mut o = score_matched(&refs[r], &events[*c], cfg.tau_ms, weights);
                o.ref_index = Some(r);
                o.event_index = Some(*c);
                outcomes.push(o);
            }
            None => outcomes.push(NoteOutcome::missed(r)),
        }
    }
    for (c, matched) in event_matched.iter().enumerate() {
        if !matched {
            outcomes.push(NoteOutcome::extra(c));
        }
    }

    let sort_time = |o: &NoteOutcome| match o.kind {
        OutcomeKind::ExtraEvent => events[o.event_index.unwrap()].onset_ms,
        _ => refs[o.ref_index.unwrap()].onset_ms,
    };
    outcomes.sort_by(|a, b| {
        sort_time(a)
            .total_cmp(&sort_time(b))
            .then_with(|| a.ref_index.is_none().cmp(&b.ref_index.is_none()))
            .then_with(|| a.ref_index.cmp(&b.ref_index))
            .then_with(|| a.event_index.cmp(&b.event_index))
    });
    Ok(outcomes)
}

/// Total assignment objective realized by a set of outcomes: matched pair
/// costs plus the unmatched charge for every miss and extra.
pub fn matching_objective(
    melody: &MelodySpec,
    events: &[KeyEvent],
    outcomes: &[NoteOutcome],
    cfg: &MatchConfig,
) -> f64 {
    let mut total = 0.0;
    for o in outcomes {
        match o.kind {
            OutcomeKind::Matched => {
                let note = &melody.notes[o.ref_index.unwrap()];
                let event = &events[o.event_index.unwrap()];
                total += cfg
                    .pair_cost(note, event)
                    .expect("matched pair within window");
            }
            OutcomeKind::MissedReference | OutcomeKind::ExtraEvent => {
                total += cfg.unmatched_penalty_ms();
            }
        }
    }
    total
}

/// Trial-level accuracies per the study's measures.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialMetrics {
    /// Mean pitch sub-score over reference notes (missed notes count 0).
    pub pitch_acc: f64,
    /// Mean finger sub-score over reference notes.
    pub finger_acc: f64,
    /// Mean timing sub-score over matched notes only; 0 when nothing matched
    /// (check `matched_count`).
    pub timing_acc: f64,
    /// 1 - weighted accuracy, with timing taken over all reference notes.
    pub error_rate: f64,
    pub matched_count: usize,
    pub missed_count: usize,
    pub extra_count: usize,
}

impl TrialMetrics {
    pub fn total_score(&self) -> f64 {
        1.0 - self.error_rate
    }
}

/// Aggregate one trial's outcomes. Extra events are excluded from the
/// accuracy denominators and reported via `extra_count`.
pub fn trial_summary(
    outcomes: &[NoteOutcome],
    weights: &ScoreWeights,
) -> Result<TrialMetrics, ScoreError> {
    weights.validate()?;
    let mut matched = 0usize;
    let mut missed = 0usize;
    let mut extra = 0usize;
    let mut pitch_sum = 0.0;
    let mut finger_sum = 0.0;
    let mut timing_sum_matched = 0.0;
    let mut timing_sum_refs = 0.0;
    for o in outcomes {
        match o.kind {
            OutcomeKind::Matched => {
                matched += 1;
                pitch_sum += o.pitch_score;
                finger_sum += o.finger_score;
                timing_sum_matched += o.timing_score;
                timing_sum_refs += o.timing_score;
            }
            OutcomeKind::MissedReference => {
                missed += 1;
            }
            OutcomeKind::ExtraEvent => {
                extra += 1;
            }
        }
    }
    let refs = matched + missed;
    if refs == 0 {
        return Err(ScoreError::EmptyTrial);
    }
    let pitch_acc = pitch_sum / refs as f64;
    let finger_acc = finger_sum / refs as f64;
    let timing_acc = if matched > 0 {
        timing_sum_matched / matched as f64
    } else {
        0.0
    };
    let timing_all = timing_sum_refs / refs as f64;
    let error_rate =
        1.0 - (weights.w_p * pitch_acc + weights.w_t * timing_all + weights.w_f * finger_acc);
    Ok(TrialMetrics {
        pitch_acc,
        finger_acc,
        timing_acc,
        error_rate,
        matched_count: matched,
        missed_count: missed,
        extra_count: extra,
    })
}

/// O(n^3) Hungarian assignment on a square cost matrix; returns the row
/// assigned to each column.
fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    // 1-indexed potentials/augmenting-path bookkeeping.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1]; // p[j] = row matched to column j
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_of_col = vec![usize::MAX; n];
    for j in 1..=n {
        row_of_col[j - 1] = p[j] - 1;
    }
    row_of_col
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::melody::MelodySpec;
    use proptest::{prop_assert, prop_assert_eq, proptest};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn note(pitch: u8, onset: f64, finger: FingerLabel) -> NoteSpec {
        NoteSpec {
            duration_ms: 300.0,
            finger,
            onset_ms: onset,
            pitch,
        }
    }

    fn event(pitch: u8, onset: f64, finger: FingerLabel) -> KeyEvent {
        KeyEvent {
            duration_ms: 250.0,
            finger,
            onset_ms: onset,
            pitch,
        }
    }

    fn melody(notes: Vec<NoteSpec>) -> MelodySpec {
        let n = notes.len();
        MelodySpec::new("t", 100.0, notes, 1.max(n.saturating_sub(1)).min(n)).unwrap()
    }

    /// Independent oracle: enumerate every partial one-to-one matching and
    /// return the minimum objective.
    pub(crate) fn brute_force_objective(
        refs: &[NoteSpec],
        events: &[KeyEvent],
        cfg: &MatchConfig,
    ) -> f64 {
        fn recurse(
            refs: &[NoteSpec],
            events: &[KeyEvent],
            cfg: &MatchConfig,
            r: usize,
            used: u32,
        ) -> f64 {
            if r == refs.len() {
                let leftover = events.len() as u32 - used.count_ones();
                return leftover as f64 * cfg.unmatched_penalty_ms();
            }
            // Leave reference r unmatched.
            let mut best =
                cfg.unmatched_penalty_ms() + recurse(refs, events, cfg, r + 1, used);
            for (e, ev) in events.iter().enumerate() {
                if used & (1 << e) != 0 {
                    continue;
                }
                if let Some(c) = cfg.pair_cost(&refs[r], ev) {
                    let total = c + recurse(refs, events, cfg, r + 1, used | (1 << e));
                    if total < best {
                        best = total;
                    }
                }
            }
            best
        }
        recurse(refs, events, cfg, 0, 0)
    }

    #[test]
    fn perfect_performance_matches_everything_at_zero_cost() {
        let notes = vec![
            note(60, 0.0, FingerLabel::Thumb),
            note(62, 500.0, FingerLabel::Index),
            note(64, 1000.0, FingerLabel::Middle),
        ];
        let m = melody(notes.clone());
        let events: Vec<KeyEvent> = notes
            .iter()
            .map(|n| event(n.pitch, n.onset_ms, n.finger))
            .collect();
        let cfg = MatchConfig::default();
        let outcomes = match_events(&m, &events, &cfg, &ScoreWeights::default()).unwrap();
        assert!(outcomes.iter().all(|o| o.kind == OutcomeKind::Matched));
        assert_eq!(matching_objective(&m, &events, &outcomes, &cfg), 0.0);
        for o in &outcomes {
            assert!((o.composite - 1.0).abs() < 1e-12);
            assert!(o.error.abs() < 1e-12);
        }
    }

    #[test]
    fn no_events_yields_all_missed() {
        let m = melody(vec![
            note(60, 0.0, FingerLabel::Thumb),
            note(62, 500.0, FingerLabel::Index),
            note(64, 1000.0, FingerLabel::Middle),
        ]);
        let outcomes =
            match_events(&m, &[], &MatchConfig::default(), &ScoreWeights::default()).unwrap();
        assert_eq!(outcomes.len(), 3);
        assert!(outcomes
            .iter()
            .all(|o| o.kind == OutcomeKind::MissedReference && o.error == 1.0));
    }

    #[test]
    fn unsorted_events_rejected() {
        let m = melody(vec![note(60, 0.0, FingerLabel::Thumb)]);
        let evs = vec![
            event(60, 100.0, FingerLabel::Thumb),
            event(62, 50.0, FingerLabel::Index),
        ];
        assert!(matches!(
            match_events(&m, &evs, &MatchConfig::default(), &ScoreWeights::default()),
            Err(ScoreError::UnsortedEvents(1))
        ));
    }

    #[test]
    fn score_matched_examples() {
        let w = ScoreWeights::default();
        let n = note(60, 1000.0, FingerLabel::Middle);

        let o = score_matched(&n, &event(60, 1000.0, FingerLabel::Middle), 120.0, &w);
        assert_eq!(
            (o.pitch_score, o.timing_score, o.finger_score),
            (1.0, 1.0, 1.0)
        );
        assert!((o.composite - 1.0).abs() < 1e-12);
        assert!(o.error.abs() < 1e-12);

        // +60 ms late, right pitch, adjacent finger.
        let o = score_matched(&n, &event(60, 1060.0, FingerLabel::Ring), 120.0, &w);
        assert!((o.timing_score - 0.5).abs() < 1e-12);
        assert_eq!(o.pitch_score, 1.0);
        assert_eq!(o.finger_score, 0.5);
        assert!((o.composite - 0.85).abs() < 1e-12);
        assert!((o.error - 0.15).abs() < 1e-12);
        assert_eq!(o.delta_t_ms, Some(60.0));

        // +150 ms exceeds tau: pitch gate closes and timing saturates.
        let o = score_matched(&n, &event(60, 1150.0, FingerLabel::Middle), 120.0, &w);
        assert_eq!(o.pitch_score, 0.0);
        assert_eq!(o.timing_score, 0.0);
        assert!((o.composite - 0.1 * o.finger_score).abs() < 1e-12);
    }

    #[test]
    fn boundary_dt_equal_tau_keeps_pitch_credit() {
        let w = ScoreWeights::default();
        let n = note(60, 0.0, FingerLabel::Thumb);
        let o = score_matched(&n, &event(60, 120.0, FingerLabel::Thumb), 120.0, &w);
        assert_eq!(o.pitch_score, 1.0);
        assert_eq!(o.timing_score, 0.0);
    }

    fn random_instance(rng: &mut ChaCha8Rng) -> (MelodySpec, Vec<KeyEvent>) {
        let n_refs = rng.gen_range(1..=6);
        let n_events = rng.gen_range(0..=8);
        let mut onset = 0.0;
        let mut notes = Vec::new();
        for _ in 0..n_refs {
            notes.push(note(
                rng.gen_range(58..=66),
                onset,
                *FingerLabel::ALL.choose(rng).unwrap(),
            ));
            onset += rng.gen_range(120.0..500.0);
        }
        let span = onset;
        let mut events: Vec<KeyEvent> = (0..n_events)
            .map(|_| {
                event(
                    rng.gen_range(58..=66),
                    rng.gen_range(-200.0..span + 200.0),
                    *FingerLabel::ALL.choose(rng).unwrap(),
                )
            })
            .collect();
        events.sort_by(|a, b| a.onset_ms.total_cmp(&b.onset_ms));
        (melody(notes), events)
    }

    #[test]
    fn matching_cost_equals_brute_force_on_100_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x4d415443);
        let cfg = MatchConfig::default();
        let w = ScoreWeights::default();
        for _ in 0..100 {
            let (m, events) = random_instance(&mut rng);
            let outcomes = match_events(&m, &events, &cfg, &w).unwrap();
            let got = matching_objective(&m, &events, &outcomes, &cfg);
            let want = brute_force_objective(&m.notes, &events, &cfg);
            assert!(
                (got - want).abs() < 1e-9,
                "cost {got} != brute force {want}"
            );
        }
    }

    #[test]
    fn outcomes_sorted_by_time() {
        let m = melody(vec![
            note(60, 0.0, FingerLabel::Thumb),
            note(62, 600.0, FingerLabel::Index),
        ]);
        let events = vec![
            event(60, 10.0, FingerLabel::Thumb),
            event(70, 300.0, FingerLabel::Pinky), // extra, between the notes
            event(62, 590.0, FingerLabel::Index),
        ];
        let outcomes =
            match_events(&m, &events, &MatchConfig::default(), &ScoreWeights::default()).unwrap();
        let kinds: Vec<OutcomeKind> = outcomes.iter().map(|o| o.kind).collect();
        assert_eq!(
            kinds,
            vec![
                OutcomeKind::Matched,
                OutcomeKind::ExtraEvent,
                OutcomeKind::Matched
            ]
        );
    }

    #[test]
    fn trial_summary_all_perfect_and_all_missed() {
        let w = ScoreWeights::default();
        let m = melody(vec![
            note(60, 0.0, FingerLabel::Thumb),
            note(62, 500.0, FingerLabel::Index),
        ]);
        let events: Vec<KeyEvent> = m
            .notes
            .iter()
            .map(|n| event(n.pitch, n.onset_ms, n.finger))
            .collect();
        let perfect =
            trial_summary(&match_events(&m, &events, &MatchConfig::default(), &w).unwrap(), &w)
                .unwrap();
        assert_eq!(
            (perfect.pitch_acc, perfect.finger_acc, perfect.timing_acc),
            (1.0, 1.0, 1.0)
        );
        assert!(perfect.error_rate.abs() < 1e-12);

        let missed =
            trial_summary(&match_events(&m, &[], &MatchConfig::default(), &w).unwrap(), &w)
                .unwrap();
        assert_eq!(missed.pitch_acc, 0.0);
        assert_eq!(missed.finger_acc, 0.0);
        assert_eq!(missed.timing_acc, 0.0);
        assert_eq!(missed.matched_count, 0);
        assert_eq!(missed.error_rate, 1.0);
    }

    #[test]
    fn trial_summary_matches_independent_resummation() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x53554d);
        let w = ScoreWeights::default();
        let cfg = MatchConfig::default();
        for _ in 0..200 {
            let (m, events) = random_instance(&mut rng);
            let outcomes = match_events(&m, &events, &cfg, &w).unwrap();
            let Ok(tm) = trial_summary(&outcomes, &w) else {
                continue;
            };
            // Straight recomputation from the outcome fields.
            let refs: Vec<&NoteOutcome> = outcomes
                .iter()
                .filter(|o| o.kind != OutcomeKind::ExtraEvent)
                .collect();
            let n = refs.len() as f64;
            let pitch: f64 = refs.iter().map(|o| o.pitch_score).sum::<f64>() / n;
            let finger: f64 = refs.iter().map(|o| o.finger_score).sum::<f64>() / n;
            let timing_all: f64 = refs.iter().map(|o| o.timing_score).sum::<f64>() / n;
            let expected_err = 1.0 - (w.w_p * pitch + w.w_t * timing_all + w.w_f * finger);
            assert!((tm.pitch_acc - pitch).abs() < 1e-12);
            assert!((tm.finger_acc - finger).abs() < 1e-12);
            assert!((tm.error_rate - expected_err).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_trial_is_an_error() {
        assert!(matches!(
            trial_summary(&[], &ScoreWeights::default()),
            Err(ScoreError::EmptyTrial)
        ));
        // Only extras also counts as empty: no reference notes to score.
        let only_extra = vec![NoteOutcome::extra(0)];
        assert!(matches!(
            trial_summary(&only_extra, &ScoreWeights::default()),
            Err(ScoreError::EmptyTrial)
        ));
    }

    #[test]
    fn bad_weight_and_window_configs_rejected() {
        assert!(ScoreWeights {
            w_p: 0.5,
            w_t: 0.2,
            w_f: 0.1
        }
        .validate()
        .is_err());
        assert!(MatchConfig {
            tau_ms: 120.0,
            match_window_ms: 60.0,
            pitch_mismatch_penalty_ms: 120.0
        }
        .validate()
        .is_err());
        assert!(MatchConfig {
            tau_ms: 0.0,
            ..MatchConfig::default()
        }
        .validate()
        .is_err());
    }

    proptest! {
        /// Shifting notes and events by the same offset leaves outcomes
        /// unchanged.
        #[test]
        fn time_translation_invariance(shift in -5000.0f64..5000.0, seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (m, events) = random_instance(&mut rng);
            if m.notes.iter().any(|n| n.onset_ms + shift < 0.0) {
                return Ok(());
            }
            let cfg = MatchConfig::default();
            let w = ScoreWeights::default();
            let base = match_events(&m, &events, &cfg, &w).unwrap();

            let shifted_notes: Vec<NoteSpec> = m
                .notes
                .iter()
                .map(|n| NoteSpec { onset_ms: n.onset_ms + shift, ..*n })
                .collect();
            let m2 = MelodySpec::new("t2", m.bpm, shifted_notes, m.phrase_boundary_index).unwrap();
            let ev2: Vec<KeyEvent> = events
                .iter()
                .map(|e| KeyEvent { onset_ms: e.onset_ms + shift, ..*e })
                .collect();
            let shifted = match_events(&m2, &ev2, &cfg, &w).unwrap();

            prop_assert_eq!(base.len(), shifted.len());
            for (a, b) in base.iter().zip(shifted.iter()) {
                prop_assert_eq!(a.kind, b.kind);
                prop_assert_eq!(a.ref_index, b.ref_index);
                prop_assert_eq!(a.event_index, b.event_index);
                prop_assert!((a.composite - b.composite).abs() < 1e-9);
                match (a.delta_t_ms, b.delta_t_ms) {
                    (Some(x), Some(y)) => prop_assert!((x - y).abs() < 1e-6),
                    (None, None) => {}
                    _ => prop_assert!(false, "delta_t presence differs"),
                }
            }
        }

        /// Scaling all weights then renormalizing leaves S unchanged, and
        /// E + S == 1 holds exactly.
        #[test]
        fn weights_are_a_convex_combination(
            scale in 0.1f64..10.0,
            dt in -300.0f64..300.0,
            fidx in 1u8..=5,
        ) {
            let w = ScoreWeights::default();
            let sum = scale * (w.w_p + w.w_t + w.w_f);
            let w2 = ScoreWeights {
                w_p: scale * w.w_p / sum,
                w_t: scale * w.w_t / sum,
                w_f: scale * w.w_f / sum,
            };
            let n = note(60, 1000.0, FingerLabel::Middle);
            let e = event(60, 1000.0 + dt, FingerLabel::from_index(fidx).unwrap());
            let a = score_matched(&n, &e, 120.0, &w);
            let b = score_matched(&n, &e, 120.0, &w2);
            prop_assert!((a.composite - b.composite).abs() < 1e-12);
            prop_assert_eq!(a.error + a.composite, 1.0);
        }

        /// Matched sub-scores live in their documented ranges.
        #[test]
        fn matched_subscore_ranges(dt in -1000.0f64..1000.0, pitch_off in 0u8..3, fidx in 1u8..=5) {
            let n = note(60, 2000.0, FingerLabel::Middle);
            let e = event(60 + pitch_off, 2000.0 + dt, FingerLabel::from_index(fidx).unwrap());
            let o = score_matched(&n, &e, 120.0, &ScoreWeights::default());
            prop_assert!(o.pitch_score == 0.0 || o.pitch_score == 1.0);
            prop_assert!((0.0..=1.0).contains(&o.timing_score));
            prop_assert!(o.finger_score == 0.0 || o.finger_score == 0.5 || o.finger_score == 1.0);
            prop_assert!((o.timing_score == 1.0) == (dt == 0.0));
            prop_assert!((o.timing_score == 0.0) == (dt.abs() >= 120.0));
        }
    }
}
