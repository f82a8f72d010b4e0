use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Landmark, LandmarkSet, Point2, PostureArray};

/// Thresholds for the thumb's slope rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FingerStateParams {
    /// Largest |slope| of the MCP→tip segment still counted as a lateral (open) thumb.
    pub thumb_slope_max: f64,
    /// Smallest horizontal MCP→tip extent counted as open.
    pub thumb_min_dx: f64,
}

impl Default for FingerStateParams {
    fn default() -> Self {
        Self {
            thumb_slope_max: 1.0,
            thumb_min_dx: 0.04,
        }
    }
}

impl FingerStateParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.thumb_slope_max > 0.0 && self.thumb_min_dx > 0.0) {
            return Err(Error::Config("thumb thresholds must be positive".into()));
        }
        Ok(())
    }
}

/// The four digits judged by the vertical tip/MCP rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Finger {
    Index,
    Middle,
    Ring,
    Pinky,
}

impl Finger {
    pub const ALL: [Finger; 4] = [Finger::Index, Finger::Middle, Finger::Ring, Finger::Pinky];

    pub fn mcp(self) -> Landmark {
        match self {
            Finger::Index => Landmark::IndexMcp,
            Finger::Middle => Landmark::MiddleMcp,
            Finger::Ring => Landmark::RingMcp,
            Finger::Pinky => Landmark::PinkyMcp,
        }
    }

    pub fn tip(self) -> Landmark {
        match self {
            Finger::Index => Landmark::IndexTip,
            Finger::Middle => Landmark::MiddleTip,
            Finger::Ring => Landmark::RingTip,
            Finger::Pinky => Landmark::PinkyTip,
        }
    }
}

/// Open iff the tip is strictly above its MCP joint (smaller image y).
pub fn finger_state(lms: &LandmarkSet, finger: Finger) -> bool {
    lms.point(finger.tip()).y < lms.point(finger.mcp()).y
}

/// Open iff the thumb's MCP→tip segment is lateral: horizontal extent at
/// least `thumb_min_dx` and |slope| at most `thumb_slope_max`.
pub fn thumb_state(lms: &LandmarkSet, params: &FingerStateParams) -> bool {
    let mcp = lms.point(Landmark::ThumbMcp);
    let tip = lms.point(Landmark::ThumbTip);
    let dx = tip.x - mcp.x;
    if dx.abs() < params.thumb_min_dx {
        return false;
    }
    let slope = (tip.y - mcp.y) / dx;
    slope.abs() <= params.thumb_slope_max
}

pub fn posture_array(lms: &LandmarkSet, params: &FingerStateParams) -> PostureArray {
    let mut states = [false; 5];
    states[0] = thumb_state(lms, params);
    for (slot, finger) in states[1..].iter_mut().zip(Finger::ALL) {
        *slot = finger_state(lms, finger);
    }
    PostureArray(states)
}

/// Midpoint of the thumb and index fingertips.
pub fn cursor_point(lms: &LandmarkSet) -> Point2 {
    lms.point(Landmark::ThumbTip)
        .midpoint(lms.point(Landmark::IndexTip))
}

/// Middle-finger MCP, used to keep the palm centered.
pub fn focal_point(lms: &LandmarkSet) -> Point2 {
    lms.point(Landmark::MiddleMcp)
}
