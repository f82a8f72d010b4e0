use std::path::Path;

use palmgest::auth::{Embedding, Encoder, EncoderParams, IdentityEncoder, TrainConfig};
use palmgest::detect::{DEFAULT_IOU_THRESH, DEFAULT_SCORE_THRESH};
use palmgest::device::ControllerConfig;
use palmgest::gesture::{FingerStateParams, GestureRegistry};
use palmgest::{Error, Result};
use serde::Deserialize;

/// Optional `--config` file. Every section falls back to library defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub finger_state: FingerStateParams,
    pub controller: ControllerConfig,
    pub train: TrainConfig,
    pub detect: DetectConfig,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectConfig {
    pub iou_thresh: f64,
    pub score_thresh: f64,
}

impl Default for DetectConfig {
    fn default() -> Self {
        Self {
            iou_thresh: DEFAULT_IOU_THRESH,
            score_thresh: DEFAULT_SCORE_THRESH,
        }
    }
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let cfg: Config = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        cfg.finger_state.validate()?;
        cfg.controller.validate()?;
        Ok(cfg)
    }
}

/// `default` (or a `default.json` that does not exist on disk) selects the
/// built-in registry.
pub fn load_registry(arg: Option<&Path>) -> Result<GestureRegistry> {
    match arg {
        None => Ok(GestureRegistry::default_registry()),
        Some(p) if p.as_os_str() == "default" => Ok(GestureRegistry::default_registry()),
        Some(p) if !p.exists() && p.file_name().is_some_and(|n| n == "default.json") => {
            Ok(GestureRegistry::default_registry())
        }
        Some(p) => GestureRegistry::load(p),
    }
}

/// Trained encoder when `--model` is given, pass-through features otherwise.
pub enum CliEncoder {
    Identity(IdentityEncoder),
    Trained(EncoderParams),
}

impl CliEncoder {
    pub fn load(model: Option<&Path>, normalize: bool) -> Result<Self> {
        match model {
            None => Ok(Self::Identity(IdentityEncoder { normalize })),
            Some(path) => {
                let params: EncoderParams = serde_json::from_str(&std::fs::read_to_string(path)?)?;
                params.validate()?;
                Ok(Self::Trained(params))
            }
        }
    }
}

impl Encoder for CliEncoder {
    fn encode(&self, features: &[f64]) -> Result<Embedding> {
        match self {
            Self::Identity(e) => e.encode(features),
            Self::Trained(e) => e.encode(features),
        }
    }

    fn input_dim(&self) -> Option<usize> {
        match self {
            Self::Identity(e) => e.input_dim(),
            Self::Trained(e) => e.input_dim(),
        }
    }

    fn output_dim(&self) -> Option<usize> {
        match self {
            Self::Identity(e) => e.output_dim(),
            Self::Trained(e) => e.output_dim(),
        }
    }

    fn normalizes(&self) -> bool {
        match self {
            Self::Identity(e) => e.normalizes(),
            Self::Trained(e) => e.normalizes(),
        }
    }
}

/// A probe file holds either a bare array of reals or `{"features": [...]}`.
pub fn read_probe(path: &Path) -> Result<Vec<f64>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Probe {
        Bare(Vec<f64>),
        Wrapped { features: Vec<f64> },
    }
    let probe: Probe = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let features = match probe {
        Probe::Bare(v) | Probe::Wrapped { features: v } => v,
    };
    if features.is_empty() {
        return Err(Error::Validation {
            field: "probe".into(),
            message: "empty feature vector".into(),
        });
    }
    Ok(features)
}
