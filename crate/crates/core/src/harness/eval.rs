use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gesture::{classify, frame_postures, FingerStateParams, GestureEngine, GestureRegistry};
use crate::model::{
    serialize_labelled_line, EvalReport, EvalRow, FrameReader, HandFrame, CONFUSION_NONE,
};

/// Frames paired with their ground-truth gesture name (or `"none"`).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabelledStream {
    frames: Vec<HandFrame>,
    labels: Vec<String>,
}

impl LabelledStream {
    pub fn from_parts(frames: Vec<HandFrame>, labels: Vec<String>) -> Result<Self> {
        if frames.len() != labels.len() {
            return Err(Error::Data(format!(
                "{} frames but {} labels",
                frames.len(),
                labels.len()
            )));
        }
        let mut stream = Self::default();
        for (f, l) in frames.into_iter().zip(labels) {
            stream.push(f, l)?;
        }
        Ok(stream)
    }

    pub fn push(&mut self, frame: HandFrame, label: String) -> Result<()> {
        if let Some(last) = self.frames.last() {
            if frame.t_ms <= last.t_ms {
                return Err(Error::StreamOrder {
                    previous: last.t_ms,
                    got: frame.t_ms,
                });
            }
        }
        self.frames.push(frame);
        self.labels.push(label);
        Ok(())
    }

    pub fn frames(&self) -> &[HandFrame] {
        &self.frames
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&HandFrame, &str)> {
        self.frames.iter().zip(self.labels.iter().map(String::as_str))
    }

    pub fn read_jsonl(reader: impl BufRead) -> Result<Self> {
        let mut stream = Self::default();
        let mut frames = FrameReader::labelled(reader);
        while let Some(record) = frames.next_labelled() {
            let (frame, label) = record?;
            stream.push(frame, label)?;
        }
        Ok(stream)
    }

    pub fn write_jsonl(&self, mut writer: impl Write) -> Result<()> {
        for (frame, label) in self.iter() {
            writer.write_all(serialize_labelled_line(frame, label).as_bytes())?;
            writer.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Truth × prediction frame counts. Merging is plain addition, so shards
/// can be combined in any order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalCounts {
    counts: BTreeMap<(String, String), u64>,
}

impl EvalCounts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, truth: &str, predicted: Option<&str>) {
        self.add(truth, predicted, 1);
    }

    pub fn add(&mut self, truth: &str, predicted: Option<&str>, frames: u64) {
        let key = (truth.to_string(), predicted.unwrap_or(CONFUSION_NONE).to_string());
        *self.counts.entry(key).or_default() += frames;
    }

    pub fn merge(&mut self, other: &EvalCounts) {
        for (key, n) in &other.counts {
            *self.counts.entry(key.clone()).or_default() += n;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Rows follow registry order, then any other truth labels sorted by
    /// name, then `"none"`. Only labels that occur as ground truth get a row.
    pub fn report(&self, registry: &GestureRegistry) -> Result<EvalReport> {
        if self.counts.is_empty() {
            return Err(Error::Data("nothing to evaluate".into()));
        }
        let registered: BTreeSet<&str> = registry.defs().iter().map(|d| d.name.as_str()).collect();
        let mut labels: Vec<String> = registry.defs().iter().map(|d| d.name.clone()).collect();
        let extra: BTreeSet<&str> = self
            .counts
            .keys()
            .flat_map(|(t, p)| [t.as_str(), p.as_str()])
            .filter(|l| *l != CONFUSION_NONE && !registered.contains(l))
            .collect();
        labels.extend(extra.into_iter().map(String::from));
        labels.push(CONFUSION_NONE.to_string());

        let index: BTreeMap<&str, usize> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect();
        let mut matrix = vec![vec![0u64; labels.len()]; labels.len()];
        for ((truth, pred), n) in &self.counts {
            matrix[index[truth.as_str()]][index[pred.as_str()]] += n;
        }

        let per_gesture: Vec<EvalRow> = labels
            .iter()
            .zip(&matrix)
            .enumerate()
            .filter(|(_, (_, row))| row.iter().any(|&n| n > 0))
            .map(|(i, (label, row))| EvalRow::from_counts(label.clone(), row.iter().sum(), row[i]))
            .collect();
        let totals = EvalReport::totals_from_rows(&per_gesture);
        Ok(EvalReport {
            per_gesture,
            totals,
            labels,
            confusion_matrix: matrix,
        })
    }
}

fn count_frames<'a>(
    frames: impl Iterator<Item = (&'a HandFrame, &'a str)>,
    registry: &GestureRegistry,
    params: &FingerStateParams,
) -> EvalCounts {
    let mut counts = EvalCounts::new();
    for (frame, label) in frames {
        let predicted = classify(&frame_postures(frame, params), registry);
        counts.record(label, predicted.map(|d| d.name.as_str()));
    }
    counts
}

/// Frame-level accuracy: every frame is classified on its own, without
/// debouncing.
pub fn evaluate(
    stream: &LabelledStream,
    registry: &GestureRegistry,
    params: &FingerStateParams,
) -> Result<EvalReport> {
    if stream.is_empty() {
        return Err(Error::Data("empty stream".into()));
    }
    count_frames(stream.iter(), registry, params).report(registry)
}

/// [`evaluate`] split across `shards` threads by contiguous frame ranges.
pub fn evaluate_sharded(
    stream: &LabelledStream,
    registry: &GestureRegistry,
    params: &FingerStateParams,
    shards: usize,
) -> Result<EvalReport> {
    if stream.is_empty() {
        return Err(Error::Data("empty stream".into()));
    }
    let chunk = stream.len().div_ceil(shards.max(1));
    let mut total = EvalCounts::new();
    std::thread::scope(|scope| {
        let handles: Vec<_> = stream
            .frames()
            .chunks(chunk)
            .zip(stream.labels().chunks(chunk))
            .map(|(frames, labels)| {
                scope.spawn(move || {
                    count_frames(
                        frames.iter().zip(labels.iter().map(String::as_str)),
                        registry,
                        params,
                    )
                })
            })
            .collect();
        for h in handles {
            total.merge(&h.join().expect("evaluation shard panicked"));
        }
    });
    total.report(registry)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRow {
    pub name: String,
    /// Maximal runs of consecutive frames carrying this label.
    pub segments: u64,
    /// Segments during which the engine fired this gesture's onset.
    pub detected: u64,
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventReport {
    pub per_gesture: Vec<EventRow>,
    /// Onsets whose gesture differs from the label of the frame they fired on.
    pub false_onsets: u64,
}

fn close_segment<'a>(seg: Option<(&'a str, bool)>, rows: &mut BTreeMap<&'a str, (u64, u64)>) {
    if let Some((name, hit)) = seg {
        let row = rows.entry(name).or_default();
        row.0 += 1;
        row.1 += u64::from(hit);
    }
}

/// Event-level scoring through the debouncing engine.
pub fn evaluate_events(
    stream: &LabelledStream,
    registry: &GestureRegistry,
    params: &FingerStateParams,
) -> Result<EventReport> {
    if stream.is_empty() {
        return Err(Error::Data("empty stream".into()));
    }
    let mut engine = GestureEngine::new(registry.clone(), *params);
    let mut rows: BTreeMap<&str, (u64, u64)> = BTreeMap::new();
    let mut false_onsets = 0;
    let mut current: Option<(&str, bool)> = None;

    for (frame, label) in stream.iter() {
        let events = engine.step(frame)?;
        if current.is_some_and(|(name, _)| name != label) {
            close_segment(current.take(), &mut rows);
        }
        if label != CONFUSION_NONE && current.is_none() {
            current = Some((label, false));
        }
        for ev in events.iter().filter(|e| e.is_onset()) {
            match &mut current {
                Some((name, hit)) if *name == ev.name => *hit = true,
                _ => false_onsets += 1,
            }
        }
    }
    close_segment(current.take(), &mut rows);

    let order: Vec<&str> = registry
        .defs()
        .iter()
        .map(|d| d.name.as_str())
        .filter(|n| rows.contains_key(n))
        .chain(rows.keys().copied().filter(|n| registry.get(n).is_none()))
        .collect();
    let per_gesture = order
        .into_iter()
        .map(|name| {
            let (segments, detected) = rows[name];
            EventRow {
                name: name.to_string(),
                segments,
                detected,
                recall: detected as f64 / segments as f64,
            }
        })
        .collect();
    Ok(EventReport {
        per_gesture,
        false_onsets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GestureDef;

    fn registry() -> GestureRegistry {
        GestureRegistry::new(vec![GestureDef::single("A", [0, 1, 0, 0, 0])]).unwrap()
    }

    #[test]
    fn planted_wrong_frame() {
        let mut counts = EvalCounts::new();
        counts.add("A", Some("A"), 9);
        counts.record("A", None);
        let report = counts.report(&registry()).unwrap();
        let row = &report.per_gesture[0];
        assert_eq!((row.total_frames, row.correct_frames, row.false_frames), (10, 9, 1));
        assert_eq!(row.accuracy_display(), "90.00");
        assert!((row.recall - 0.9).abs() < 1e-12);
        assert_eq!(report.labels, vec!["A", "none"]);
        assert_eq!(report.confusion_matrix, vec![vec![9, 1], vec![0, 0]]);
    }

    #[test]
    fn merge_is_order_independent() {
        let mut a = EvalCounts::new();
        a.record("A", Some("A"));
        a.record("B", None);
        let mut b = EvalCounts::new();
        b.record("none", Some("A"));
        let mut ab = a.clone();
        ab.merge(&b);
        let mut ba = b.clone();
        ba.merge(&a);
        assert_eq!(ab, ba);
        assert_eq!(ab.total(), 3);
    }

    #[test]
    fn mismatched_parts() {
        let r = LabelledStream::from_parts(vec![HandFrame::empty(0)], vec![]);
        assert!(matches!(r, Err(Error::Data(_))));
    }

    #[test]
    fn empty_stream_rejected() {
        let r = evaluate(&LabelledStream::default(), &registry(), &FingerStateParams::default());
        assert!(matches!(r, Err(Error::Data(_))));
    }
}
