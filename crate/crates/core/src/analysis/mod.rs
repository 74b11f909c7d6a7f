//! Corpus analyses: learning curves, retention scores, per-participant
//! error-rate slopes, block-switch summaries, paired statistics, and the
//! hand-ghost motion-similarity battery, with CSV table output.

pub mod similarity;
pub mod stats;

use crate::controller::GuidanceMode;
use crate::melody::{slice_phrase, MelodyError, MelodySpec, Segment};
use crate::scoring::{match_events, trial_summary, ScoreError, TrialMetrics};
use crate::sessionlog::{read_log, LogError, MotionFrame, Phase, SessionLog};
use crate::simulator::{CorpusManifest, ExperimentOutput};
use serde::{Deserialize, Serialize};
use similarity::{
    resample, similarity_battery, wrist_anchor, SimilarityConfig, SimilarityMetrics,
};
use stats::{mean, ols_slope, sem, time_fit};
use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("empty corpus: no matching logs")]
    EmptyCorpus,
    #[error("missing test pair for {participant} under {condition}")]
    MissingTestPair {
        participant: String,
        condition: GuidanceMode,
    },
    #[error("needs at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("zero variance in {0}")]
    ZeroVariance(&'static str),
    #[error("length mismatch: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("empty trajectory")]
    EmptyTrajectory,
    #[error("all-zero series: no usable vectors")]
    AllZeroSeries,
    #[error("joint mask selects no joints")]
    EmptyJointMask,
    #[error("melody `{0}` not found in corpus")]
    MissingMelody(String),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error(transparent)]
    Log(#[from] LogError),
    #[error(transparent)]
    Melody(#[from] MelodyError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// The four objective measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Pitch,
    Finger,
    Timing,
    Error,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Pitch, Metric::Finger, Metric::Timing, Metric::Error];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Pitch => "pitch_acc",
            Metric::Finger => "finger_acc",
            Metric::Timing => "timing_acc",
            Metric::Error => "error_rate",
        }
    }

    pub fn of(self, m: &TrialMetrics) -> f64 {
        match self {
            Metric::Pitch => m.pitch_acc,
            Metric::Finger => m.finger_acc,
            Metric::Timing => m.timing_acc,
            Metric::Error => m.error_rate,
        }
    }
}

fn cond_order(c: GuidanceMode) -> u8 {
    match c {
        GuidanceMode::Static => 0,
        GuidanceMode::Dynamic => 1,
    }
}

fn seg_order(s: Segment) -> u8 {
    match s {
        Segment::Phrase1 => 0,
        Segment::Phrase2 => 1,
        Segment::Full => 2,
    }
}

/// An in-memory corpus: manifest plus the loaded artifacts. `logs` parallels
/// `manifest.logs`.
pub struct Corpus {
    pub manifest: CorpusManifest,
    pub melodies: HashMap<String, MelodySpec>,
    pub ghost_motion: HashMap<String, Vec<MotionFrame>>,
    pub logs: Vec<SessionLog>,
}

impl Corpus {
    pub fn from_output(output: ExperimentOutput) -> Corpus {
        Corpus {
            manifest: output.manifest,
            melodies: output
                .melodies
                .into_iter()
                .map(|m| (m.id.clone(), m))
                .collect(),
            ghost_motion: output.ghost_motion.into_iter().collect(),
            logs: output.logs,
        }
    }

    pub fn load(dir: &Path) -> Result<Corpus, AnalysisError> {
        let read = |path: &Path| -> Result<String, AnalysisError> {
            std::fs::read_to_string(path).map_err(|source| AnalysisError::Io {
                path: path.display().to_string(),
                source,
            })
        };
        let manifest: CorpusManifest = serde_json::from_str(&read(&dir.join("manifest.json"))?)
            .map_err(LogError::from)?;
        let mut melodies = HashMap::new();
        for entry in &manifest.melodies {
            let melody = crate::melody::parse_melody(&read(&dir.join(&entry.file))?)?;
            melodies.insert(entry.id.clone(), melody);
        }
        let mut ghost_motion = HashMap::new();
        for entry in &manifest.ghost_motion {
            let motion: Vec<MotionFrame> =
                serde_json::from_str(&read(&dir.join(&entry.file))?).map_err(LogError::from)?;
            ghost_motion.insert(entry.melody_id.clone(), motion);
        }
        let mut logs = Vec::with_capacity(manifest.logs.len());
        for entry in &manifest.logs {
            logs.push(read_log(&read(&dir.join(&entry.file))?)?);
        }
        Ok(Corpus {
            manifest,
            melodies,
            ghost_motion,
            logs,
        })
    }

    fn melody(&self, id: &str) -> Result<&MelodySpec, AnalysisError> {
        self.melodies
            .get(id)
            .ok_or_else(|| AnalysisError::MissingMelody(id.to_string()))
    }

    /// Score one log against its (segment-sliced) reference melody.
    pub fn log_metrics(&self, index: usize) -> Result<TrialMetrics, AnalysisError> {
        let log = &self.logs[index];
        let melody = slice_phrase(self.melody(&log.melody_id)?, log.segment);
        let outcomes = match_events(
            &melody,
            &log.events,
            &self.manifest.scoring.matching,
            &self.manifest.scoring.weights,
        )?;
        Ok(trial_summary(&outcomes, &self.manifest.scoring.weights)?)
    }

    fn participants(&self) -> Vec<String> {
        let mut ids: Vec<String> = self
            .manifest
            .assignments
            .iter()
            .map(|a| a.participant_id.clone())
            .collect();
        ids.sort();
        ids
    }
}

/// Mean and SEM of one (condition, segment, loop) cell of the group learning
/// curves.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub condition: GuidanceMode,
    pub segment: Segment,
    pub loop_index: u32,
    pub n: usize,
    pub pitch_mean: f64,
    pub pitch_sem: f64,
    pub finger_mean: f64,
    pub finger_sem: f64,
    pub timing_mean: f64,
    pub timing_sem: f64,
    pub error_mean: f64,
    pub error_sem: f64,
}

/// Per-loop group means of the four measures over training logs.
pub fn learning_curves(corpus: &Corpus) -> Result<Vec<CurvePoint>, AnalysisError> {
    let mut cells: BTreeMap<(u8, u8, u32), Vec<TrialMetrics>> = BTreeMap::new();
    for (i, entry) in corpus.manifest.logs.iter().enumerate() {
        if entry.phase != Phase::Training {
            continue;
        }
        let metrics = corpus.log_metrics(i)?;
        cells
            .entry((
                cond_order(entry.condition),
                seg_order(entry.segment),
                entry.loop_index,
            ))
            .or_default()
            .push(metrics);
    }
    if cells.is_empty() {
        return Err(AnalysisError::EmptyCorpus);
    }
    let restore_cond = |k: u8| {
        if k == 0 {
            GuidanceMode::Static
        } else {
            GuidanceMode::Dynamic
        }
    };
    let restore_seg = |k: u8| match k {
        0 => Segment::Phrase1,
        1 => Segment::Phrase2,
        _ => Segment::Full,
    };
    Ok(cells
        .into_iter()
        .map(|((c, s, loop_index), ms)| {
            let col = |f: fn(&TrialMetrics) -> f64| -> Vec<f64> { ms.iter().map(f).collect() };
            let pitch = col(|m| m.pitch_acc);
            let finger = col(|m| m.finger_acc);
            let timing = col(|m| m.timing_acc);
            let error = col(|m| m.error_rate);
            CurvePoint {
                condition: restore_cond(c),
                segment: restore_seg(s),
                loop_index,
                n: ms.len(),
                pitch_mean: mean(&pitch),
                pitch_sem: sem(&pitch),
                finger_mean: mean(&finger),
                finger_sem: sem(&finger),
                timing_mean: mean(&timing),
                timing_sem: sem(&timing),
                error_mean: mean(&error),
                error_sem: sem(&error),
            }
        })
        .collect())
}

/// Take the better of a test's trials (higher total score, ties keep the
/// earlier trial).
fn best_test_metrics(
    corpus: &Corpus,
    participant: &str,
    condition: GuidanceMode,
    phase: Phase,
) -> Result<TrialMetrics, AnalysisError> {
    let mut trials: Vec<(u32, TrialMetrics)> = Vec::new();
    for (i, entry) in corpus.manifest.logs.iter().enumerate() {
        if entry.phase == phase
            && entry.condition == condition
            && entry.participant_id == participant
        {
            trials.push((entry.loop_index, corpus.log_metrics(i)?));
        }
    }
    trials.sort_by_key(|(idx, _)| *idx);
    trials
        .into_iter()
        .map(|(_, m)| m)
        .reduce(|best, m| {
            if m.total_score() > best.total_score() {
                m
            } else {
                best
            }
        })
        .ok_or(AnalysisError::MissingTestPair {
            participant: participant.to_string(),
            condition,
        })
}

/// Retention minus immediate per participant, condition, and metric
/// (negative = decline).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RetentionScore {
    pub participant_id: String,
    pub condition: GuidanceMode,
    pub metric: Metric,
    pub immediate: f64,
    pub retention: f64,
    pub delta: f64,
}

pub fn retention_scores(corpus: &Corpus) -> Result<Vec<RetentionScore>, AnalysisError> {
    let mut out = Vec::new();
    for participant in corpus.participants() {
        for condition in [GuidanceMode::Static, GuidanceMode::Dynamic] {
            let immediate =
                best_test_metrics(corpus, &participant, condition, Phase::ImmediateTest)?;
            let retention =
                best_test_metrics(corpus, &participant, condition, Phase::RetentionTest)?;
            for metric in Metric::ALL {
                let i = metric.of(&immediate);
                let r = metric.of(&retention);
                out.push(RetentionScore {
                    participant_id: participant.clone(),
                    condition,
                    metric,
                    immediate: i,
                    retention: r,
                    delta: r - i,
                });
            }
        }
    }
    if out.is_empty() {
        return Err(AnalysisError::EmptyCorpus);
    }
    Ok(out)
}

/// OLS slope of error rate over the Full Melody training loops.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeRecord {
    pub participant_id: String,
    pub condition: GuidanceMode,
    pub n_loops: usize,
    pub slope: f64,
}

pub fn error_slopes(corpus: &Corpus) -> Result<Vec<SlopeRecord>, AnalysisError> {
    let mut out = Vec::new();
    for participant in corpus.participants() {
        for condition in [GuidanceMode::Static, GuidanceMode::Dynamic] {
            let mut points: Vec<(u32, f64)> = Vec::new();
            for (i, entry) in corpus.manifest.logs.iter().enumerate() {
                if entry.phase == Phase::Training
                    && entry.segment == Segment::Full
                    && entry.condition == condition
                    && entry.participant_id == participant
                {
                    points.push((entry.loop_index, corpus.log_metrics(i)?.error_rate));
                }
            }
            if points.is_empty() {
                continue;
            }
            points.sort_by_key(|(l, _)| *l);
            let series: Vec<(f64, f64)> =
                points.into_iter().map(|(l, e)| (l as f64, e)).collect();
            let slope = ols_slope(&series)?;
            out.push(SlopeRecord {
                participant_id: participant.clone(),
                condition,
                n_loops: series.len(),
                slope,
            });
        }
    }
    if out.is_empty() {
        return Err(AnalysisError::EmptyCorpus);
    }
    Ok(out)
}

/// Mean of the first two and of the last two entries of a per-loop score
/// series.
pub fn block_window_means(scores: &[f64]) -> (f64, f64) {
    let head = &scores[..scores.len().min(2)];
    let tail = &scores[scores.len().saturating_sub(2)..];
    (mean(head), mean(tail))
}

/// Second-block performance grouped by the first block's condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockSwitchRow {
    pub first_condition: GuidanceMode,
    pub n: usize,
    pub initial_mean: f64,
    pub initial_sem: f64,
    pub end_mean: f64,
    pub end_sem: f64,
    pub frac_above_criterion: f64,
}

pub fn block_switch_summary(
    corpus: &Corpus,
    criterion: f64,
) -> Result<Vec<BlockSwitchRow>, AnalysisError> {
    // Per participant: total-score series of every second-block training
    // loop, in protocol order.
    let mut per_participant: BTreeMap<String, Vec<(u8, u32, f64)>> = BTreeMap::new();
    let mut first_condition: BTreeMap<String, GuidanceMode> = BTreeMap::new();
    for (i, entry) in corpus.manifest.logs.iter().enumerate() {
        if entry.phase != Phase::Training {
            continue;
        }
        if entry.block_index == 0 {
            first_condition
                .entry(entry.participant_id.clone())
                .or_insert(entry.condition);
            continue;
        }
        per_participant
            .entry(entry.participant_id.clone())
            .or_default()
            .push((
                seg_order(entry.segment),
                entry.loop_index,
                corpus.log_metrics(i)?.total_score(),
            ));
    }
    if per_participant.is_empty() {
        return Err(AnalysisError::EmptyCorpus);
    }

    let mut groups: BTreeMap<u8, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for (participant, mut series) in per_participant {
        series.sort_by_key(|(seg, loop_idx, _)| (*seg, *loop_idx));
        let scores: Vec<f64> = series.into_iter().map(|(_, _, s)| s).collect();
        let (initial, end) = block_window_means(&scores);
        let first = first_condition
            .get(&participant)
            .copied()
            .unwrap_or(GuidanceMode::Static);
        let slot = groups.entry(cond_order(first)).or_default();
        slot.0.push(initial);
        slot.1.push(end);
    }

    Ok(groups
        .into_iter()
        .map(|(key, (initials, ends))| {
            let above = ends.iter().filter(|&&e| e > criterion).count();
            BlockSwitchRow {
                first_condition: if key == 0 {
                    GuidanceMode::Static
                } else {
                    GuidanceMode::Dynamic
                },
                n: initials.len(),
                initial_mean: mean(&initials),
                initial_sem: sem(&initials),
                end_mean: mean(&ends),
                end_sem: sem(&ends),
                frac_above_criterion: above as f64 / ends.len().max(1) as f64,
            }
        })
        .collect())
}

/// One participant-condition-test similarity entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityRow {
    pub participant_id: String,
    pub condition: GuidanceMode,
    pub phase: Phase,
    #[serde(flatten)]
    pub metrics: SimilarityMetrics,
}

/// Similarity battery over every best test trial that carries motion:
/// key-event time fit, resampling onto the ghost timeline, wrist anchoring,
/// then the cosine/direction/DTW metrics.
pub fn similarity_report(
    corpus: &Corpus,
    cfg: &SimilarityConfig,
) -> Result<Vec<SimilarityRow>, AnalysisError> {
    let mut out = Vec::new();
    for (i, entry) in corpus.manifest.logs.iter().enumerate() {
        if entry.best != Some(true) {
            continue;
        }
        let log = &corpus.logs[i];
        let Some(user_motion) = &log.motion else {
            continue;
        };
        let Some(ghost) = corpus.ghost_motion.get(&entry.melody_id) else {
            continue;
        };
        let melody = corpus.melody(&entry.melody_id)?;
        let outcomes = match_events(
            melody,
            &log.events,
            &corpus.manifest.scoring.matching,
            &corpus.manifest.scoring.weights,
        )?;
        let mut user_onsets = Vec::new();
        let mut ref_onsets = Vec::new();
        for o in &outcomes {
            if let (Some(r), Some(e)) = (o.ref_index, o.event_index) {
                user_onsets.push(log.events[e].onset_ms);
                ref_onsets.push(melody.notes[r].onset_ms);
            }
        }
        let Ok((a, b)) = time_fit(&user_onsets, &ref_onsets) else {
            continue; // too few matches for a time fit; trial unusable
        };
        let ghost_ts: Vec<f64> = ghost.iter().map(|f| f.t_ms).collect();
        let user_ts: Vec<f64> = ghost_ts.iter().map(|t| a * t + b).collect();
        let user_resampled = resample(user_motion, &user_ts)?;
        let user_anchored: Vec<MotionFrame> = user_resampled
            .iter()
            .map(|f| wrist_anchor(f, cfg.normalize_orientation))
            .collect();
        let ghost_anchored: Vec<MotionFrame> = ghost
            .iter()
            .map(|f| wrist_anchor(f, cfg.normalize_orientation))
            .collect();
        let metrics = similarity_battery(&user_anchored, &ghost_anchored, cfg)?;
        out.push(SimilarityRow {
            participant_id: entry.participant_id.clone(),
            condition: entry.condition,
            phase: entry.phase,
            metrics,
        });
    }
    out.sort_by(|x, y| {
        x.participant_id
            .cmp(&y.participant_id)
            .then_with(|| cond_order(x.condition).cmp(&cond_order(y.condition)))
            .then_with(|| x.phase.cmp(&y.phase))
    });
    Ok(out)
}

/// Analysis entry-point options.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisOptions {
    pub similarity: SimilarityConfig,
    /// Total-score criterion for the block-switch summary.
    pub block_criterion: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            similarity: SimilarityConfig::default(),
            block_criterion: 0.6,
        }
    }
}

pub struct AnalysisTables {
    pub curves: Vec<CurvePoint>,
    pub retention: Vec<RetentionScore>,
    pub slopes: Vec<SlopeRecord>,
    pub block_switch: Vec<BlockSwitchRow>,
    pub similarity: Vec<SimilarityRow>,
}

pub fn analyze_corpus(
    corpus: &Corpus,
    opts: &AnalysisOptions,
) -> Result<AnalysisTables, AnalysisError> {
    Ok(AnalysisTables {
        curves: learning_curves(corpus)?,
        retention: retention_scores(corpus)?,
        slopes: error_slopes(corpus)?,
        block_switch: block_switch_summary(corpus, opts.block_criterion)?,
        similarity: similarity_report(corpus, &opts.similarity)?,
    })
}

fn f6(x: f64) -> String {
    format!("{x:.6}")
}

fn write_file(path: &Path, contents: &str) -> Result<(), AnalysisError> {
    std::fs::write(path, contents).map_err(|source| AnalysisError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Write the CSV tables (and optionally gnuplot-ready .dat files) into `dir`.
pub fn write_tables(
    tables: &AnalysisTables,
    dir: &Path,
    gnuplot: bool,
) -> Result<(), AnalysisError> {
    std::fs::create_dir_all(dir).map_err(|source| AnalysisError::Io {
        path: dir.display().to_string(),
        source,
    })?;

    let mut csv = String::from(
        "condition,segment,loop_index,n,pitch_mean,pitch_sem,finger_mean,finger_sem,timing_mean,timing_sem,error_mean,error_sem\n",
    );
    for c in &tables.curves {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            c.condition,
            c.segment,
            c.loop_index,
            c.n,
            f6(c.pitch_mean),
            f6(c.pitch_sem),
            f6(c.finger_mean),
            f6(c.finger_sem),
            f6(c.timing_mean),
            f6(c.timing_sem),
            f6(c.error_mean),
            f6(c.error_sem)
        ));
    }
    write_file(&dir.join("learning_curves.csv"), &csv)?;

    let mut csv = String::from("participant,condition,metric,immediate,retention,delta\n");
    for r in &tables.retention {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.participant_id,
            r.condition,
            r.metric.name(),
            f6(r.immediate),
            f6(r.retention),
            f6(r.delta)
        ));
    }
    write_file(&dir.join("retention.csv"), &csv)?;

    let mut csv = String::from("participant,condition,n_loops,slope\n");
    for s in &tables.slopes {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            s.participant_id,
            s.condition,
            s.n_loops,
            f6(s.slope)
        ));
    }
    write_file(&dir.join("slopes.csv"), &csv)?;

    let mut csv = String::from(
        "first_condition,n,initial_mean,initial_sem,end_mean,end_sem,frac_above_criterion\n",
    );
    for b in &tables.block_switch {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            b.first_condition,
            b.n,
            f6(b.initial_mean),
            f6(b.initial_sem),
            f6(b.end_mean),
            f6(b.end_sem),
            f6(b.frac_above_criterion)
        ));
    }
    write_file(&dir.join("block_switch.csv"), &csv)?;

    let mut csv = String::from(
        "participant,condition,phase,position_cosine,velocity_cosine,direction_median_angle_deg,dtw_mean_step_cost,composite,skipped_vectors\n",
    );
    for s in &tables.similarity {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            s.participant_id,
            s.condition,
            s.phase,
            f6(s.metrics.position_cosine),
            f6(s.metrics.velocity_cosine),
            f6(s.metrics.direction_median_angle_deg),
            f6(s.metrics.dtw_mean_step_cost),
            f6(s.metrics.composite),
            s.metrics.skipped_vectors
        ));
    }
    write_file(&dir.join("similarity.csv"), &csv)?;

    if gnuplot {
        let mut dat = String::from("# condition segment loop error_mean error_sem\n");
        for c in &tables.curves {
            dat.push_str(&format!(
                "{} {} {} {} {}\n",
                c.condition,
                c.segment,
                c.loop_index,
                f6(c.error_mean),
                f6(c.error_sem)
            ));
        }
        write_file(&dir.join("learning_curves.dat"), &dat)?;

        let mut dat = String::from("# participant condition metric delta\n");
        for r in &tables.retention {
            dat.push_str(&format!(
                "{} {} {} {}\n",
                r.participant_id,
                r.condition,
                r.metric.name(),
                f6(r.delta)
            ));
        }
        write_file(&dir.join("retention.dat"), &dat)?;
    }
    Ok(())
}

/// Paired per-participant vectors (static, dynamic) of one extracted value.
fn paired_by_condition<F: Fn(&RetentionScore) -> bool>(
    rows: &[RetentionScore],
    select: F,
) -> (Vec<f64>, Vec<f64>) {
    let mut per: BTreeMap<&str, [Option<f64>; 2]> = BTreeMap::new();
    for r in rows {
        if select(r) {
            per.entry(&r.participant_id).or_default()[cond_order(r.condition) as usize] =
                Some(r.delta);
        }
    }
    let mut statics = Vec::new();
    let mut dynamics = Vec::new();
    for (_, [s, d]) in per {
        if let (Some(s), Some(d)) = (s, d) {
            statics.push(s);
            dynamics.push(d);
        }
    }
    (statics, dynamics)
}

/// Plain-text summary of the analysis tables.
pub fn summary_text(corpus: &Corpus, tables: &AnalysisTables) -> String {
    let mut out = String::new();
    out.push_str("== corpus ==\n");
    out.push_str(&format!(
        "participants: {}  master_seed: {}\n",
        corpus.manifest.participants, corpus.manifest.master_seed
    ));
    out.push_str(&format!("logs: {}\n", corpus.manifest.logs.len()));

    out.push_str("\n== retention deltas (retention - immediate; negative = decline) ==\n");
    for metric in Metric::ALL {
        let (statics, dynamics) = paired_by_condition(&tables.retention, |r| r.metric == metric);
        out.push_str(&format!(
            "{:<11} static {:>10} +- {:<9} dynamic {:>10} +- {:<9}",
            metric.name(),
            f6(mean(&statics)),
            f6(sem(&statics)),
            f6(mean(&dynamics)),
            f6(sem(&dynamics)),
        ));
        match stats::paired_stats(&statics, &dynamics) {
            Ok(p) => out.push_str(&format!(
                " paired(S-D): t={:.4} dz={:.4} ci95=[{:.4}, {:.4}]\n",
                p.t, p.dz, p.ci95_low, p.ci95_high
            )),
            Err(_) => out.push('\n'),
        }
    }

    out.push_str("\n== error-rate learning slopes (full melody; lower = faster improvement) ==\n");
    for condition in [GuidanceMode::Static, GuidanceMode::Dynamic] {
        let vals: Vec<f64> = tables
            .slopes
            .iter()
            .filter(|s| s.condition == condition)
            .map(|s| s.slope)
            .collect();
        out.push_str(&format!(
            "{:<8} mean {:>10} +- {:<9} (n={})\n",
            condition.to_string(),
            f6(mean(&vals)),
            f6(sem(&vals)),
            vals.len()
        ));
    }

    out.push_str("\n== block switch (second-block total score by first condition) ==\n");
    for b in &tables.block_switch {
        out.push_str(&format!(
            "{}-first  n={:<3} initial {} +- {}  end {} +- {}  frac>criterion {}\n",
            b.first_condition,
            b.n,
            f6(b.initial_mean),
            f6(b.initial_sem),
            f6(b.end_mean),
            f6(b.end_sem),
            f6(b.frac_above_criterion)
        ));
    }

    if !tables.similarity.is_empty() {
        out.push_str("\n== hand-ghost similarity (composite, 0-1) ==\n");
        for phase in [Phase::ImmediateTest, Phase::RetentionTest] {
            for condition in [GuidanceMode::Static, GuidanceMode::Dynamic] {
                let vals: Vec<f64> = tables
                    .similarity
                    .iter()
                    .filter(|s| s.phase == phase && s.condition == condition)
                    .map(|s| s.metrics.composite)
                    .collect();
                out.push_str(&format!(
                    "{:<10} {:<8} mean {:>10} (n={})\n",
                    phase.to_string(),
                    condition.to_string(),
                    f6(mean(&vals)),
                    vals.len()
                ));
            }
        }
    }
    out
}
