//! Shared value types: landmarks, frames, posture arrays, gesture definitions
//! and events.
//!
//! Coordinates are normalized image coordinates in `[0, 1]` with the origin at
//! the top-left corner; `y` grows downward.

mod report;
mod stream;

pub use report::{EvalReport, EvalRow, CONFUSION_NONE};
pub use stream::{
    parse_frame, parse_labelled_line, serialize_frame, serialize_labelled_line, validate_frame,
    FrameReader,
};

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const NUM_LANDMARKS: usize = 21;

/// Landmark index layout: wrist first, then thumb to pinky, base to tip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(usize)]
pub enum Landmark {
    Wrist = 0,
    ThumbCmc = 1,
    ThumbMcp = 2,
    ThumbIp = 3,
    ThumbTip = 4,
    IndexMcp = 5,
    IndexPip = 6,
    IndexDip = 7,
    IndexTip = 8,
    MiddleMcp = 9,
    MiddlePip = 10,
    MiddleDip = 11,
    MiddleTip = 12,
    RingMcp = 13,
    RingPip = 14,
    RingDip = 15,
    RingTip = 16,
    PinkyMcp = 17,
    PinkyPip = 18,
    PinkyDip = 19,
    PinkyTip = 20,
}

impl Landmark {
    pub const fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn midpoint(self, other: Point2) -> Point2 {
        Point2::new((self.x + other.x) / 2.0, (self.y + other.y) / 2.0)
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        for (axis, v) in [("x", self.x), ("y", self.y)] {
            if !v.is_finite() {
                return Err(Error::validation(format!("{field}.{axis}"), "not finite"));
            }
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::validation(
                    format!("{field}.{axis}"),
                    format!("{v} outside [0,1]"),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Handedness {
    /// Sorts first: right hands are listed before left hands.
    #[serde(rename = "R")]
    Right,
    #[serde(rename = "L")]
    Left,
}

impl Handedness {
    pub fn code(self) -> &'static str {
        match self {
            Handedness::Right => "R",
            Handedness::Left => "L",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        match code {
            "R" => Some(Handedness::Right),
            "L" => Some(Handedness::Left),
            _ => None,
        }
    }
}

impl fmt::Display for Handedness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// The 21-point skeletal hand.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkSet {
    pub points: Vec<Point2>,
    pub confidences: Vec<f64>,
    pub handedness: Handedness,
}

impl LandmarkSet {
    /// Builds a set with all confidences at 1.0.
    pub fn new(handedness: Handedness, points: Vec<Point2>) -> Result<Self> {
        let set = Self {
            confidences: vec![1.0; points.len()],
            points,
            handedness,
        };
        set.validate("landmarks")?;
        Ok(set)
    }

    pub fn point(&self, lm: Landmark) -> Point2 {
        self.points[lm.index()]
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        if self.points.len() != NUM_LANDMARKS {
            return Err(Error::validation(
                format!("{field}.points"),
                format!("expected {NUM_LANDMARKS}, got {}", self.points.len()),
            ));
        }
        if self.confidences.len() != NUM_LANDMARKS {
            return Err(Error::validation(
                format!("{field}.conf"),
                format!("expected {NUM_LANDMARKS}, got {}", self.confidences.len()),
            ));
        }
        for (i, p) in self.points.iter().enumerate() {
            p.validate(&format!("{field}.points[{i}]"))?;
        }
        for (i, c) in self.confidences.iter().enumerate() {
            if !(0.0..=1.0).contains(c) {
                return Err(Error::validation(
                    format!("{field}.conf[{i}]"),
                    format!("{c} outside [0,1]"),
                ));
            }
        }
        Ok(())
    }
}

/// One timestamped observation holding up to one hand per handedness.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HandFrame {
    pub t_ms: u64,
    pub hands: Vec<LandmarkSet>,
}

impl HandFrame {
    pub fn empty(t_ms: u64) -> Self {
        Self {
            t_ms,
            hands: Vec::new(),
        }
    }

    pub fn hand(&self, handedness: Handedness) -> Option<&LandmarkSet> {
        self.hands.iter().find(|h| h.handedness == handedness)
    }

    /// Right hand if present, otherwise the left.
    pub fn primary_hand(&self) -> Option<&LandmarkSet> {
        self.hand(Handedness::Right)
            .or_else(|| self.hand(Handedness::Left))
    }

    /// Puts hands in canonical order (right before left).
    pub fn canonicalize(&mut self) {
        self.hands.sort_by_key(|h| h.handedness);
    }
}

/// Finger open/folded bits ordered `[thumb, index, middle, ring, pinky]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PostureArray(pub [bool; 5]);

impl PostureArray {
    pub const fn from_bits(bits: [u8; 5]) -> Self {
        let mut states = [false; 5];
        let mut i = 0;
        while i < 5 {
            states[i] = bits[i] != 0;
            i += 1;
        }
        Self(states)
    }

    pub fn bits(&self) -> [u8; 5] {
        self.0.map(u8::from)
    }

    pub fn thumb(&self) -> bool {
        self.0[0]
    }
}

impl fmt::Display for PostureArray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d, e] = self.bits();
        write!(f, "[{a},{b},{c},{d},{e}]")
    }
}

impl Serialize for PostureArray {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.bits().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PostureArray {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let bits = <[u8; 5]>::deserialize(deserializer)?;
        if let Some(bad) = bits.iter().find(|&&b| b > 1) {
            return Err(serde::de::Error::custom(format!(
                "posture bit must be 0 or 1, got {bad}"
            )));
        }
        Ok(PostureArray::from_bits(bits))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pattern {
    Single(PostureArray),
    Double {
        #[serde(rename = "R")]
        right: PostureArray,
        #[serde(rename = "L")]
        left: PostureArray,
    },
}

fn default_hold_frames() -> u32 {
    5
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GestureDef {
    pub name: String,
    pub pattern: Pattern,
    #[serde(default = "default_hold_frames")]
    pub hold_frames: u32,
}

impl GestureDef {
    pub fn single(name: impl Into<String>, bits: [u8; 5]) -> Self {
        Self {
            name: name.into(),
            pattern: Pattern::Single(PostureArray::from_bits(bits)),
            hold_frames: default_hold_frames(),
        }
    }

    pub fn double(name: impl Into<String>, right: [u8; 5], left: [u8; 5]) -> Self {
        Self {
            name: name.into(),
            pattern: Pattern::Double {
                right: PostureArray::from_bits(right),
                left: PostureArray::from_bits(left),
            },
            hold_frames: default_hold_frames(),
        }
    }

    pub fn with_hold_frames(mut self, hold_frames: u32) -> Self {
        self.hold_frames = hold_frames;
        self
    }
}

/// A recognized gesture. Open (onset) events have no `offset_ms`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GestureEvent {
    pub name: String,
    pub onset_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset_ms: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cursor: Option<Point2>,
}

impl GestureEvent {
    pub fn is_onset(&self) -> bool {
        self.offset_ms.is_none()
    }
}
