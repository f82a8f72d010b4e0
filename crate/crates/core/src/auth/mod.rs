//! Palm verification by embedding distance.
//!
//! A small two-layer encoder maps feature vectors to embeddings; it is
//! trained with the hinged triplet margin loss and Adam, and verification
//! accepts a probe when its closest enrolled anchor lies within the
//! subject's threshold.

mod adam;
mod encoder;
mod enroll;
mod loss;
mod mining;
mod roc;
mod train;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use encoder::{encoder_backward, Encoder, EncoderDims, EncoderParams, IdentityEncoder};
pub use enroll::{enroll, verify, AuthDecision, EnrollmentRecord, EnrollmentStore};
pub use loss::{triplet_grad, triplet_loss, EmbeddedTriplet, Reduction, TripletGrad};
pub use mining::{mine_triplets, FeatureDataset, LabelledFeature, Triplet};
pub use roc::{roc_sweep, AccuracyPoint, EerPoint, RocPoint, RocSweep};
pub use train::{train, TrainConfig, TrainOutcome};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A fixed-dimension feature embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Embedding(pub Vec<f64>);

impl Embedding {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl From<Vec<f64>> for Embedding {
    fn from(values: Vec<f64>) -> Self {
        Embedding(values)
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn euclidean_distance(a: &Embedding, b: &Embedding) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    Ok(squared_distance(&a.0, &b.0).sqrt())
}
