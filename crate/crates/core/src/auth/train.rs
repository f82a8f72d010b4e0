use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamConfig, AdamState};
use super::encoder::{encoder_backward, EncoderDims, EncoderParams};
use super::loss::{LossAccumulator, Reduction};
use super::mining::{mine_triplets, FeatureDataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub alpha: f64,
    pub adam: AdamConfig,
    pub hidden_dim: usize,
    pub embedding_dim: usize,
    pub normalize: bool,
    pub triplets_per_epoch: usize,
    pub batch_size: usize,
    pub reduction: Reduction,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            alpha: 0.2,
            adam: AdamConfig::default(),
            hidden_dim: 64,
            embedding_dim: 32,
            normalize: true,
            triplets_per_epoch: 256,
            batch_size: 32,
            reduction: Reduction::Mean,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub params: EncoderParams,
    /// Mean triplet loss of each epoch, measured before each batch's update.
    pub loss_curve: Vec<f64>,
}

/// Trains an encoder from seeded uniform(−0.05, 0.05) weights. Each epoch
/// mines a fresh set of triplets and takes one Adam step per batch.
pub fn train(dataset: &FeatureDataset, cfg: &TrainConfig) -> Result<TrainOutcome> {
    if cfg.batch_size == 0 || cfg.triplets_per_epoch == 0 {
        return Err(Error::Config("batch size and triplets per epoch must be positive".into()));
    }
    if cfg.hidden_dim == 0 || cfg.embedding_dim == 0 || dataset.dim() == 0 {
        return Err(Error::Config("encoder dimensions must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let dims = EncoderDims {
        input: dataset.dim(),
        hidden: cfg.hidden_dim,
        output: cfg.embedding_dim,
    };
    let mut params = EncoderParams::init(dims, cfg.normalize, &mut rng);
    let mut state = AdamState::new(params.theta.len(), cfg.adam);
    let mut loss_curve = Vec::with_capacity(cfg.epochs);

    for _ in 0..cfg.epochs {
        let triplets = mine_triplets(dataset, cfg.triplets_per_epoch, &mut rng)?;
        let mut epoch_loss = LossAccumulator::new(Reduction::Mean);
        for chunk in triplets.chunks(cfg.batch_size) {
            let batch: Vec<[&[f64]; 3]> = chunk.iter().map(|t| t.features()).collect();
            let (loss, grads) = encoder_backward(&params, &batch, cfg.alpha, cfg.reduction)?;
            epoch_loss.push(loss);
            adam_step(&mut params.theta, &grads, &mut state)?;
        }
        loss_curve.push(epoch_loss.value());
    }
    Ok(TrainOutcome { params, loss_curve })
}
