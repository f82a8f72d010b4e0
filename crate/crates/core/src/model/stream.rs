//! JSONL frame codec: `{"t": ms, "hands": [{"hd": "R", "pts": [[x,y]; 21], "conf": [c; 21]}]}`.

use std::io::BufRead;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{HandFrame, Handedness, LandmarkSet, Point2, NUM_LANDMARKS};
use crate::error::{Error, Result};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameIn {
    t: u64,
    hands: Vec<HandIn>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HandIn {
    hd: String,
    pts: Vec<[f64; 2]>,
    #[serde(default)]
    conf: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct FrameOut<'a> {
    t: u64,
    hands: Vec<HandOut<'a>>,
}

#[derive(Serialize)]
struct HandOut<'a> {
    hd: &'static str,
    pts: Vec<[f64; 2]>,
    conf: &'a [f64],
}

fn frame_from_value(value: Value) -> Result<HandFrame> {
    let raw: FrameIn = serde_json::from_value(value)?;
    let mut hands = Vec::with_capacity(raw.hands.len());
    for (i, h) in raw.hands.into_iter().enumerate() {
        let handedness = Handedness::from_code(&h.hd).ok_or_else(|| {
            Error::validation(format!("hands[{i}].hd"), format!("expected \"L\" or \"R\", got {:?}", h.hd))
        })?;
        let confidences = h.conf.unwrap_or_else(|| vec![1.0; h.pts.len().max(NUM_LANDMARKS)]);
        hands.push(LandmarkSet {
            points: h.pts.into_iter().map(|[x, y]| Point2::new(x, y)).collect(),
            confidences,
            handedness,
        });
    }
    let mut frame = HandFrame { t_ms: raw.t, hands };
    validate_frame(&frame)?;
    frame.canonicalize();
    Ok(frame)
}

/// Parses and validates one JSONL frame line. Hands come back in canonical
/// order (right first).
pub fn parse_frame(line: &str) -> Result<HandFrame> {
    let value: Value = serde_json::from_str(line)?;
    frame_from_value(value)
}

/// Serializes a frame as a single JSON line (no trailing newline).
pub fn serialize_frame(frame: &HandFrame) -> String {
    serde_json::to_string(&frame_out(frame)).expect("frame serialization is infallible")
}

fn frame_out(frame: &HandFrame) -> FrameOut<'_> {
    let mut hands: Vec<&LandmarkSet> = frame.hands.iter().collect();
    hands.sort_by_key(|h| h.handedness);
    FrameOut {
        t: frame.t_ms,
        hands: hands
            .into_iter()
            .map(|h| HandOut {
                hd: h.handedness.code(),
                pts: h.points.iter().map(|p| [p.x, p.y]).collect(),
                conf: &h.confidences,
            })
            .collect(),
    }
}

/// Checks every frame invariant, reporting the first violation.
pub fn validate_frame(frame: &HandFrame) -> Result<()> {
    if frame.hands.len() > 2 {
        return Err(Error::validation(
            "hands",
            format!("at most 2 hands, got {}", frame.hands.len()),
        ));
    }
    if let [a, b] = frame.hands.as_slice() {
        if a.handedness == b.handedness {
            return Err(Error::validation("hands", "duplicate handedness"));
        }
    }
    for (i, h) in frame.hands.iter().enumerate() {
        h.validate(&format!("hands[{i}]"))?;
    }
    Ok(())
}

/// Parses a labelled corpus line: a frame object with an extra `"label"` key.
pub fn parse_labelled_line(line: &str) -> Result<(HandFrame, String)> {
    let value: Value = serde_json::from_str(line)?;
    let Value::Object(mut map) = value else {
        return Err(Error::Parse("expected a JSON object".into()));
    };
    let label = match map.remove("label") {
        Some(Value::String(s)) => s,
        Some(_) => return Err(Error::validation("label", "expected a string")),
        None => return Err(Error::validation("label", "missing")),
    };
    Ok((frame_from_value(Value::Object(map))?, label))
}

fn parse_unlabelled(line: &str) -> Result<HandFrame> {
    let mut value: Value = serde_json::from_str(line)?;
    if let Value::Object(map) = &mut value {
        map.remove("label");
    }
    frame_from_value(value)
}

pub fn serialize_labelled_line(frame: &HandFrame, label: &str) -> String {
    #[derive(Serialize)]
    struct LabelledOut<'a> {
        #[serde(flatten)]
        frame: FrameOut<'a>,
        label: &'a str,
    }
    serde_json::to_string(&LabelledOut {
        frame: frame_out(frame),
        label,
    })
    .expect("frame serialization is infallible")
}

/// Reads a JSONL frame stream, rejecting non-increasing timestamps.
/// Blank lines are skipped.
pub struct FrameReader<R> {
    inner: R,
    line_no: usize,
    last_t: Option<u64>,
    labels: LabelMode,
    buf: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LabelMode {
    Forbidden,
    Required,
    Ignored,
}

impl<R: BufRead> FrameReader<R> {
    pub fn new(inner: R) -> Self {
        Self {
            inner,
            line_no: 0,
            last_t: None,
            labels: LabelMode::Forbidden,
            buf: String::new(),
        }
    }

    /// A reader over labelled corpus lines.
    pub fn labelled(inner: R) -> Self {
        Self {
            labels: LabelMode::Required,
            ..Self::new(inner)
        }
    }

    /// A frame reader that also accepts labelled corpus lines, dropping the label.
    pub fn ignoring_labels(inner: R) -> Self {
        Self {
            labels: LabelMode::Ignored,
            ..Self::new(inner)
        }
    }

    fn next_line(&mut self) -> Option<Result<(HandFrame, Option<String>)>> {
        loop {
            self.buf.clear();
            match self.inner.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(e.into())),
            }
            self.line_no += 1;
            let line = self.buf.trim();
            if line.is_empty() {
                continue;
            }
            let parsed = match self.labels {
                LabelMode::Required => parse_labelled_line(line).map(|(f, l)| (f, Some(l))),
                LabelMode::Forbidden => parse_frame(line).map(|f| (f, None)),
                LabelMode::Ignored => parse_unlabelled(line).map(|f| (f, None)),
            };
            let parsed = parsed.map_err(|e| with_line(e, self.line_no));
            return Some(parsed.and_then(|(frame, label)| {
                if let Some(previous) = self.last_t {
                    if frame.t_ms <= previous {
                        return Err(Error::StreamOrder {
                            previous,
                            got: frame.t_ms,
                        });
                    }
                }
                self.last_t = Some(frame.t_ms);
                Ok((frame, label))
            }));
        }
    }

    /// Next labelled record; only meaningful for readers built with [`FrameReader::labelled`].
    pub fn next_labelled(&mut self) -> Option<Result<(HandFrame, String)>> {
        self.next_line()
            .map(|r| r.map(|(f, l)| (f, l.unwrap_or_default())))
    }
}

impl<R: BufRead> Iterator for FrameReader<R> {
    type Item = Result<HandFrame>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_line().map(|r| r.map(|(f, _)| f))
    }
}

fn with_line(err: Error, line: usize) -> Error {
    match err {
        Error::Parse(m) => Error::Parse(format!("line {line}: {m}")),
        Error::Validation { field, message } => Error::Validation {
            field: format!("line {line}: {field}"),
            message,
        },
        other => other,
    }
}
