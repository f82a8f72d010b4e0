use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnchorLayer {
    pub grid_w: u32,
    pub grid_h: u32,
    pub scales: Vec<f64>,
    pub aspect_ratios: Vec<f64>,
}

fn default_center_variance() -> f64 {
    0.1
}

fn default_size_variance() -> f64 {
    0.2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnchorConfig {
    pub layers: Vec<AnchorLayer>,
    #[serde(default = "default_center_variance")]
    pub center_variance: f64,
    #[serde(default = "default_size_variance")]
    pub size_variance: f64,
}

impl AnchorConfig {
    pub fn new(layers: Vec<AnchorLayer>) -> Self {
        Self {
            layers,
            center_variance: default_center_variance(),
            size_variance: default_size_variance(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::Config("at least one anchor layer required".into()));
        }
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.center_variance) || !positive(self.size_variance) {
            return Err(Error::Config("decode variances must be positive".into()));
        }
        for (i, layer) in self.layers.iter().enumerate() {
            if layer.grid_w == 0 || layer.grid_h == 0 {
                return Err(Error::Config(format!("layers[{i}]: grid must be non-empty")));
            }
            if layer.scales.is_empty() || !layer.scales.iter().all(|&s| positive(s)) {
                return Err(Error::Config(format!("layers[{i}]: scales must be positive")));
            }
            if layer.aspect_ratios.is_empty() || !layer.aspect_ratios.iter().all(|&r| positive(r)) {
                return Err(Error::Config(format!(
                    "layers[{i}]: aspect ratios must be positive"
                )));
            }
        }
        Ok(())
    }

    pub fn anchor_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.grid_w as usize * l.grid_h as usize * l.scales.len() * l.aspect_ratios.len())
            .sum()
    }
}

/// Tiles anchors over every layer: cell centers in row-major order, one
/// anchor per (scale, aspect ratio) pair with `w = s·√r`, `h = s/√r`.
pub fn generate_anchors(cfg: &AnchorConfig) -> Result<Vec<Anchor>> {
    cfg.validate()?;
    let mut anchors = Vec::with_capacity(cfg.anchor_count());
    for layer in &cfg.layers {
        for row in 0..layer.grid_h {
            let cy = (row as f64 + 0.5) / layer.grid_h as f64;
            for col in 0..layer.grid_w {
                let cx = (col as f64 + 0.5) / layer.grid_w as f64;
                for &scale in &layer.scales {
                    for &ratio in &layer.aspect_ratios {
                        let root = ratio.sqrt();
                        anchors.push(Anchor {
                            cx,
                            cy,
                            w: scale * root,
                            h: scale / root,
                        });
                    }
                }
            }
        }
    }
    Ok(anchors)
}
