use std::collections::HashMap;
use std::io::{BufRead, Write};

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One dataset line: `{"subject": str, "features": [reals]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelledFeature {
    pub subject: String,
    pub features: Vec<f64>,
}

/// Labelled feature vectors, grouped by subject in order of first appearance.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureDataset {
    samples: Vec<LabelledFeature>,
    subjects: Vec<(String, Vec<usize>)>,
}

impl FeatureDataset {
    pub fn new(samples: Vec<LabelledFeature>) -> Result<Self> {
        let dim = samples.first().map(|s| s.features.len()).unwrap_or(0);
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut subjects: Vec<(String, Vec<usize>)> = Vec::new();
        for (i, s) in samples.iter().enumerate() {
            if s.features.len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: s.features.len(),
                });
            }
            if !s.features.iter().all(|v| v.is_finite()) {
                return Err(Error::Data(format!("sample {i}: non-finite feature")));
            }
            let slot = *index.entry(s.subject.clone()).or_insert_with(|| {
                subjects.push((s.subject.clone(), Vec::new()));
                subjects.len() - 1
            });
            subjects[slot].1.push(i);
        }
        Ok(Self { samples, subjects })
    }

    pub fn read_jsonl(reader: impl BufRead) -> Result<Self> {
        let mut samples = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let sample: LabelledFeature = serde_json::from_str(&line)
                .map_err(|e| Error::Parse(format!("line {}: {e}", n + 1)))?;
            samples.push(sample);
        }
        Self::new(samples)
    }

    pub fn write_jsonl(&self, mut writer: impl Write) -> Result<()> {
        for s in &self.samples {
            serde_json::to_writer(&mut writer, s)?;
            writer.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn samples(&self) -> &[LabelledFeature] {
        &self.samples
    }

    pub fn dim(&self) -> usize {
        self.samples.first().map(|s| s.features.len()).unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `(subject, sample indices)` in order of first appearance.
    pub fn subjects(&self) -> &[(String, Vec<usize>)] {
        &self.subjects
    }

    pub fn samples_of<'a>(&'a self, subject: &'a str) -> impl Iterator<Item = &'a LabelledFeature> + 'a {
        self.samples.iter().filter(move |s| s.subject == subject)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triplet<'a> {
    pub anchor: &'a LabelledFeature,
    pub positive: &'a LabelledFeature,
    pub negative: &'a LabelledFeature,
}

impl<'a> Triplet<'a> {
    pub fn features(&self) -> [&'a [f64]; 3] {
        [
            &self.anchor.features,
            &self.positive.features,
            &self.negative.features,
        ]
    }
}

/// Draws `count` triplets uniformly: anchor subject, then two distinct
/// samples of it, then a different subject and one of its samples.
pub fn mine_triplets<'a>(
    dataset: &'a FeatureDataset,
    count: usize,
    rng: &mut impl Rng,
) -> Result<Vec<Triplet<'a>>> {
    let subjects = dataset.subjects();
    if subjects.len() < 2 {
        return Err(Error::Data(format!(
            "triplet mining needs at least 2 subjects, got {}",
            subjects.len()
        )));
    }
    if let Some((name, idx)) = subjects.iter().find(|(_, idx)| idx.len() < 2) {
        return Err(Error::Data(format!(
            "subject {name:?} has {} sample(s), need at least 2",
            idx.len()
        )));
    }
    let samples = dataset.samples();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let a_subj = rng.random_range(0..subjects.len());
        let members = &subjects[a_subj].1;
        let ai = rng.random_range(0..members.len());
        let mut pi = rng.random_range(0..members.len() - 1);
        if pi >= ai {
            pi += 1;
        }
        let mut n_subj = rng.random_range(0..subjects.len() - 1);
        if n_subj >= a_subj {
            n_subj += 1;
        }
        let ni = *subjects[n_subj]
            .1
            .choose(rng)
            .expect("subjects are non-empty");
        out.push(Triplet {
            anchor: &samples[members[ai]],
            positive: &samples[members[pi]],
            negative: &samples[ni],
        });
    }
    Ok(out)
}
