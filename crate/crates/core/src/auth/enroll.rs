use std::path::Path;

use serde::{Deserialize, Serialize};

use super::encoder::Encoder;
use super::{check_dim, euclidean_distance, Embedding};
use crate::error::{Error, Result};

/// A subject's stored anchors and acceptance threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnrollmentRecord {
    #[serde(rename = "subject")]
    pub subject_id: String,
    pub threshold: f64,
    pub anchors: Vec<Embedding>,
}

impl EnrollmentRecord {
    pub fn validate(&self) -> Result<()> {
        if self.anchors.is_empty() {
            return Err(Error::validation("anchors", "at least one anchor required"));
        }
        if self.threshold.is_nan() || self.threshold < 0.0 {
            return Err(Error::validation(
                "threshold",
                format!("must be non-negative, got {}", self.threshold),
            ));
        }
        let dim = self.anchors[0].dim();
        for a in &self.anchors {
            check_dim(dim, a.dim())?;
            if !a.is_finite() {
                return Err(Error::validation("anchors", "non-finite component"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthDecision {
    pub accepted: bool,
    pub distance: f64,
    #[serde(rename = "subject")]
    pub subject_id: String,
    pub threshold: f64,
}

/// Encodes every sample, in order, as the subject's anchors.
pub fn enroll(
    subject_id: &str,
    samples: &[Vec<f64>],
    encoder: &impl Encoder,
    threshold: f64,
) -> Result<EnrollmentRecord> {
    if samples.is_empty() {
        return Err(Error::Data(format!("no samples to enroll for {subject_id:?}")));
    }
    let record = EnrollmentRecord {
        subject_id: subject_id.to_string(),
        threshold,
        anchors: samples
            .iter()
            .map(|s| encoder.encode(s))
            .collect::<Result<_>>()?,
    };
    record.validate()?;
    Ok(record)
}

/// Accepts iff the nearest anchor is within the record's threshold.
pub fn verify(
    features: &[f64],
    record: &EnrollmentRecord,
    encoder: &impl Encoder,
) -> Result<AuthDecision> {
    record.validate()?;
    let probe = encoder.encode(features)?;
    let mut distance = f64::INFINITY;
    for anchor in &record.anchors {
        distance = distance.min(euclidean_distance(&probe, anchor)?);
    }
    Ok(AuthDecision {
        accepted: distance <= record.threshold,
        distance,
        subject_id: record.subject_id.clone(),
        threshold: record.threshold,
    })
}

const STORE_VERSION: u32 = 1;

/// On-disk enrollment store:
/// `{"version": 1, "normalize": bool, "dim": D, "records": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnrollmentStore {
    pub version: u32,
    pub normalize: bool,
    pub dim: usize,
    pub records: Vec<EnrollmentRecord>,
}

impl EnrollmentStore {
    pub fn new(dim: usize, normalize: bool) -> Self {
        Self {
            version: STORE_VERSION,
            normalize,
            dim,
            records: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != STORE_VERSION {
            return Err(Error::validation(
                "version",
                format!("unsupported store version {}", self.version),
            ));
        }
        for (i, r) in self.records.iter().enumerate() {
            r.validate().map_err(|e| match e {
                Error::Validation { field, message } => {
                    Error::validation(format!("records[{i}].{field}"), message)
                }
                other => other,
            })?;
            check_dim(self.dim, r.anchors[0].dim())?;
            if self.records[..i].iter().any(|o| o.subject_id == r.subject_id) {
                return Err(Error::validation(
                    format!("records[{i}].subject"),
                    format!("duplicate subject {:?}", r.subject_id),
                ));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let store: Self = serde_json::from_str(text)?;
        store.validate()?;
        Ok(store)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("store serialization is infallible")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    pub fn get(&self, subject: &str) -> Option<&EnrollmentRecord> {
        self.records.iter().find(|r| r.subject_id == subject)
    }

    /// Inserts a record, replacing any existing one for the same subject.
    pub fn upsert(&mut self, record: EnrollmentRecord) -> Result<()> {
        record.validate()?;
        check_dim(self.dim, record.anchors[0].dim())?;
        match self.records.iter_mut().find(|r| r.subject_id == record.subject_id) {
            Some(slot) => *slot = record,
            None => self.records.push(record),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auth::IdentityEncoder;

    const RAW: IdentityEncoder = IdentityEncoder { normalize: false };

    #[test]
    fn enroll_keeps_order() {
        let samples = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![2.0, 2.0]];
        let r = enroll("alice", &samples, &RAW, 0.5).unwrap();
        assert_eq!(r.anchors.len(), 3);
        assert_eq!(r.anchors[2].0, vec![2.0, 2.0]);
        assert_eq!(enroll("bob", &samples[..1], &RAW, 0.5).unwrap().anchors.len(), 1);
        assert!(matches!(enroll("bob", &[], &RAW, 0.5), Err(Error::Data(_))));
    }

    #[test]
    fn verify_gates_on_threshold() {
        let r = enroll("alice", &[vec![1.0, 0.0], vec![0.0, 1.0]], &RAW, 0.0).unwrap();
        let d = verify(&[0.0, 1.0], &r, &RAW).unwrap();
        assert!(d.accepted);
        assert_eq!(d.distance, 0.0);
        let d = verify(&[0.0, 1.1], &r, &RAW).unwrap();
        assert!(!d.accepted);
        assert!(matches!(verify(&[0.0], &r, &RAW), Err(Error::Dimension { .. })));
    }

    #[test]
    fn store_round_trip_is_exact() {
        let mut store = EnrollmentStore::new(3, false);
        let r = enroll("alice", &[vec![0.1, 1.0 / 3.0, -2e-17]], &RAW, 0.123_456_789_012_345_67).unwrap();
        store.upsert(r).unwrap();
        let back = EnrollmentStore::from_json(&store.to_json()).unwrap();
        assert_eq!(back, store);
    }

    #[test]
    fn store_rejects_bad_records() {
        let text = r#"{"version":1,"normalize":false,"dim":2,"records":[{"subject":"a","threshold":-1,"anchors":[[0,0]]}]}"#;
        assert!(EnrollmentStore::from_json(text).is_err());
        let text = r#"{"version":2,"normalize":false,"dim":2,"records":[]}"#;
        assert!(EnrollmentStore::from_json(text).is_err());
        let text = r#"{"version":1,"normalize":false,"dim":3,"records":[{"subject":"a","threshold":1,"anchors":[[0,0]]}]}"#;
        assert!(matches!(EnrollmentStore::from_json(text), Err(Error::Dimension { .. })));
    }
}
