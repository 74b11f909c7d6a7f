//! Reference-score data model: fingered, timed note lists plus the melody
//! file format (JSON, strict fields) and phrase slicing.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MelodyError {
    /// Malformed document (bad JSON, wrong types, unknown fields). The inner
    /// error carries line/column information.
    #[error("melody document error: {0}")]
    Document(#[from] serde_json::Error),
    #[error("melody has an empty note list")]
    EmptyNotes,
    #[error("bpm must be positive and finite, got {0}")]
    BadBpm(f64),
    #[error("bad phrase boundary {boundary} for {notes} notes")]
    BadPhraseBoundary { boundary: usize, notes: usize },
    #[error("note {index}: non-increasing onset {onset_ms} ms after {previous_ms} ms")]
    NonIncreasingOnset {
        index: usize,
        onset_ms: f64,
        previous_ms: f64,
    },
    #[error("note {index}: {reason}")]
    InvalidNote { index: usize, reason: String },
    #[error("finger label must be in 1..=5, got {0}")]
    BadFinger(u8),
}

/// Semantic finger label, ordinal so adjacency is |a - b| == 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FingerLabel {
    Thumb = 1,
    Index = 2,
    Middle = 3,
    Ring = 4,
    Pinky = 5,
}

impl FingerLabel {
    pub const ALL: [FingerLabel; 5] = [
        FingerLabel::Thumb,
        FingerLabel::Index,
        FingerLabel::Middle,
        FingerLabel::Ring,
        FingerLabel::Pinky,
    ];

    pub fn from_index(value: u8) -> Result<Self, MelodyError> {
        match value {
            1 => Ok(FingerLabel::Thumb),
            2 => Ok(FingerLabel::Index),
            3 => Ok(FingerLabel::Middle),
            4 => Ok(FingerLabel::Ring),
            5 => Ok(FingerLabel::Pinky),
            other => Err(MelodyError::BadFinger(other)),
        }
    }

    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn is_adjacent(self, other: FingerLabel) -> bool {
        (self.index() as i8 - other.index() as i8).abs() == 1
    }

    /// Neighbouring labels on the same hand (one for thumb/pinky, two otherwise).
    pub fn neighbors(self) -> Vec<FingerLabel> {
        let i = self.index();
        let mut out = Vec::with_capacity(2);
        if i > 1 {
            out.push(FingerLabel::from_index(i - 1).unwrap());
        }
        if i < 5 {
            out.push(FingerLabel::from_index(i + 1).unwrap());
        }
        out
    }
}

impl std::fmt::Display for FingerLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            FingerLabel::Thumb => "Thumb",
            FingerLabel::Index => "Index",
            FingerLabel::Middle => "Middle",
            FingerLabel::Ring => "Ring",
            FingerLabel::Pinky => "Pinky",
        };
        write!(f, "{name}")
    }
}

impl Serialize for FingerLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.index())
    }
}

impl<'de> Deserialize<'de> for FingerLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = u8::deserialize(d)?;
        FingerLabel::from_index(v).map_err(D::Error::custom)
    }
}

/// One reference note. Field order is the canonical (sorted) key order of the
/// melody file format.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoteSpec {
    pub duration_ms: f64,
    pub finger: FingerLabel,
    pub onset_ms: f64,
    pub pitch: u8,
}

impl NoteSpec {
    fn validate(&self, index: usize) -> Result<(), MelodyError> {
        if self.pitch > 127 {
            return Err(MelodyError::InvalidNote {
                index,
                reason: format!("pitch {} out of MIDI range 0..=127", self.pitch),
            });
        }
        if !self.onset_ms.is_finite() || self.onset_ms < 0.0 {
            return Err(MelodyError::InvalidNote {
                index,
                reason: format!("onset_ms {} must be finite and >= 0", self.onset_ms),
            });
        }
        if !self.duration_ms.is_finite() || self.duration_ms <= 0.0 {
            return Err(MelodyError::InvalidNote {
                index,
                reason: format!("duration_ms {} must be finite and > 0", self.duration_ms),
            });
        }
        Ok(())
    }
}

/// Which part of a melody a loop or trial plays.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Segment {
    Phrase1,
    Phrase2,
    Full,
}

impl Segment {
    pub const TRAINING_ORDER: [Segment; 3] = [Segment::Phrase1, Segment::Phrase2, Segment::Full];

    pub fn file_tag(self) -> &'static str {
        match self {
            Segment::Phrase1 => "phrase1",
            Segment::Phrase2 => "phrase2",
            Segment::Full => "full",
        }
    }
}

impl std::fmt::Display for Segment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.file_tag())
    }
}

/// A validated reference score. `phrase_boundary_index` is the index of the
/// first note of Phrase 2; it equals `notes.len()` for single-phrase melodies
/// produced by `slice_phrase`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MelodySpec {
    pub bpm: f64,
    pub id: String,
    pub notes: Vec<NoteSpec>,
    pub phrase_boundary_index: usize,
}

impl MelodySpec {
    pub fn new(
        id: impl Into<String>,
        bpm: f64,
        notes: Vec<NoteSpec>,
        phrase_boundary_index: usize,
    ) -> Result<Self, MelodyError> {
        let m = MelodySpec {
            bpm,
            id: id.into(),
            notes,
            phrase_boundary_index,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), MelodyError> {
        if self.notes.is_empty() {
            return Err(MelodyError::EmptyNotes);
        }
        if !self.bpm.is_finite() || self.bpm <= 0.0 {
            return Err(MelodyError::BadBpm(self.bpm));
        }
        if self.phrase_boundary_index == 0 || self.phrase_boundary_index > self.notes.len() {
            return Err(MelodyError::BadPhraseBoundary {
                boundary: self.phrase_boundary_index,
                notes: self.notes.len(),
            });
        }
        let mut prev = f64::NEG_INFINITY;
        for (i, note) in self.notes.iter().enumerate() {
            note.validate(i)?;
            if note.onset_ms <= prev {
                return Err(MelodyError::NonIncreasingOnset {
                    index: i,
                    onset_ms: note.onset_ms,
                    previous_ms: prev,
                });
            }
            prev = note.onset_ms;
        }
        Ok(())
    }

    /// Last onset plus duration; the playable span of the melody.
    pub fn span_ms(&self) -> f64 {
        self.notes
            .iter()
            .map(|n| n.onset_ms + n.duration_ms)
            .fold(0.0, f64::max)
    }

    /// Index into the full melody's note list for a note of the given segment.
    pub fn segment_note_offset(&self, segment: Segment) -> usize {
        match segment {
            Segment::Phrase1 | Segment::Full => 0,
            Segment::Phrase2 => self.phrase_boundary_index,
        }
    }
}

/// Parse and validate a melody document.
pub fn parse_melody(text: &str) -> Result<MelodySpec, MelodyError> {
    let melody: MelodySpec = serde_json::from_str(text)?;
    melody.validate()?;
    Ok(melody)
}

/// Canonical document: pretty-printed JSON with sorted keys and a trailing
/// newline. `parse_melody(serialize_melody(m)) == m` for every valid melody.
pub fn serialize_melody(melody: &MelodySpec) -> String {
    let mut text = serde_json::to_string_pretty(melody).expect("melody serialization");
    text.push('\n');
    text
}

/// Extract a practice segment. Phrase slices are re-zeroed so their first
/// onset is 0; `Full` returns the melody unchanged.
pub fn slice_phrase(melody: &MelodySpec, segment: Segment) -> MelodySpec {
    let range = match segment {
        Segment::Full => return melody.clone(),
        Segment::Phrase1 => 0..melody.phrase_boundary_index,
        Segment::Phrase2 => melody.phrase_boundary_index..melody.notes.len(),
    };
    let slice = &melody.notes[range];
    let shift = slice.first().map(|n| n.onset_ms).unwrap_or(0.0);
    let notes: Vec<NoteSpec> = slice
        .iter()
        .map(|n| NoteSpec {
            onset_ms: n.onset_ms - shift,
            ..*n
        })
        .collect();
    let boundary = notes.len();
    MelodySpec {
        bpm: melody.bpm,
        id: melody.id.clone(),
        notes,
        phrase_boundary_index: boundary,
    }
}
