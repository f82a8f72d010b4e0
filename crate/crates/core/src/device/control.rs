use std::fmt;

use serde::{Deserialize, Serialize};

use super::wire::MAX_WIRE_STEPS;
use crate::error::{Error, Result};
use crate::model::Point2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "X",
            Axis::Y => "Y",
        })
    }
}

/// Signed step count for one motor. Positive steps move the camera toward
/// positive image x (X) or y (Y).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MotorCommand {
    axis: Axis,
    steps: i32,
}

impl MotorCommand {
    pub fn new(axis: Axis, steps: i32) -> Result<Self> {
        if steps == 0 || steps.unsigned_abs() > MAX_WIRE_STEPS {
            return Err(Error::validation(
                "steps",
                format!("must be nonzero with magnitude ≤ {MAX_WIRE_STEPS}, got {steps}"),
            ));
        }
        Ok(Self { axis, steps })
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn steps(&self) -> i32 {
        self.steps
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerConfig {
    /// Half-width of the centered band that produces no motion.
    pub deadzone: f64,
    /// Steps per unit of normalized error.
    pub gain: f64,
    /// Per-update clamp on |steps|.
    pub max_steps: u32,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            deadzone: 0.05,
            gain: 40.0,
            max_steps: 20,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.deadzone) {
            return Err(Error::Config(format!("deadzone {} outside [0, 0.5)", self.deadzone)));
        }
        if !(self.gain > 0.0 && self.gain.is_finite()) {
            return Err(Error::Config(format!("gain must be positive, got {}", self.gain)));
        }
        if self.max_steps == 0 || self.max_steps > MAX_WIRE_STEPS {
            return Err(Error::Config(format!(
                "max_steps must be in 1..={MAX_WIRE_STEPS}, got {}",
                self.max_steps
            )));
        }
        Ok(())
    }
}

/// Proportional correction toward the image center, X before Y. Axes whose
/// error lies within the deadzone (or rounds to zero steps) emit nothing.
pub fn centering_step(focal: Point2, cfg: &ControllerConfig) -> Vec<MotorCommand> {
    let limit = cfg.max_steps as f64;
    [(Axis::X, focal.x - 0.5), (Axis::Y, focal.y - 0.5)]
        .into_iter()
        .filter(|(_, err)| err.abs() > cfg.deadzone)
        .filter_map(|(axis, err)| {
            let steps = (err * cfg.gain).round().clamp(-limit, limit) as i32;
            MotorCommand::new(axis, steps).ok()
        })
        .collect()
}
