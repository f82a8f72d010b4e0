use serde::{Deserialize, Serialize};

use super::boxes::BBox;
use crate::error::{Error, Result};
use crate::model::{Handedness, LandmarkSet, Point2, NUM_LANDMARKS};

/// One keypoint's score grid, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceMap {
    height: usize,
    width: usize,
    cells: Vec<f64>,
}

impl ConfidenceMap {
    pub fn new(height: usize, width: usize, cells: Vec<f64>) -> Result<Self> {
        if height < 2 || width < 2 {
            return Err(Error::validation("map", format!("{height}x{width} smaller than 2x2")));
        }
        if cells.len() != height * width {
            return Err(Error::Dimension {
                expected: height * width,
                got: cells.len(),
            });
        }
        if let Some(i) = cells.iter().position(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::validation(
                format!("map[{i}]"),
                format!("cell {} is not a finite non-negative value", cells[i]),
            ));
        }
        Ok(Self { height, width, cells })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.cells[row * self.width + col]
    }

    /// Row-major first maximum: `(row, col, value)`.
    pub fn peak(&self) -> (usize, usize, f64) {
        let mut best = 0;
        for (i, &v) in self.cells.iter().enumerate() {
            if v > self.cells[best] {
                best = i;
            }
        }
        (best / self.width, best % self.width, self.cells[best])
    }
}

/// File form: `{"h": H, "w": W, "maps": [[row-major reals]; 21]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfidenceMapRecord {
    pub h: usize,
    pub w: usize,
    pub maps: Vec<Vec<f64>>,
}

impl ConfidenceMapRecord {
    pub fn into_maps(self) -> Result<Vec<ConfidenceMap>> {
        let (h, w) = (self.h, self.w);
        self.maps
            .into_iter()
            .map(|cells| ConfidenceMap::new(h, w, cells))
            .collect()
    }
}

/// Takes the argmax cell of each of the 21 maps and maps its center through
/// `region` into image coordinates. An all-zero map yields the region
/// center with confidence 0.
pub fn decode_keypoints(
    maps: &[ConfidenceMap],
    region: &BBox,
    handedness: Handedness,
) -> Result<LandmarkSet> {
    if maps.len() != NUM_LANDMARKS {
        return Err(Error::Dimension {
            expected: NUM_LANDMARKS,
            got: maps.len(),
        });
    }
    let (h, w) = (maps[0].height(), maps[0].width());
    if let Some(m) = maps.iter().find(|m| m.height() != h || m.width() != w) {
        return Err(Error::validation(
            "maps",
            format!("mixed map shapes {h}x{w} and {}x{}", m.height(), m.width()),
        ));
    }
    let x0 = region.cx - region.w / 2.0;
    let y0 = region.cy - region.h / 2.0;

    let mut points = Vec::with_capacity(NUM_LANDMARKS);
    let mut confidences = Vec::with_capacity(NUM_LANDMARKS);
    for map in maps {
        let (row, col, value) = map.peak();
        let (u, v) = if value > 0.0 {
            ((col as f64 + 0.5) / w as f64, (row as f64 + 0.5) / h as f64)
        } else {
            (0.5, 0.5)
        };
        points.push(Point2::new(
            (x0 + u * region.w).clamp(0.0, 1.0),
            (y0 + v * region.h).clamp(0.0, 1.0),
        ));
        confidences.push(value.clamp(0.0, 1.0));
    }
    Ok(LandmarkSet {
        points,
        confidences,
        handedness,
    })
}
