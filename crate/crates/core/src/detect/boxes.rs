use serde::{Deserialize, Serialize};

use super::anchors::{generate_anchors, Anchor, AnchorConfig};
use crate::error::{Error, Result};

pub const DEFAULT_IOU_THRESH: f64 = 0.3;
pub const DEFAULT_SCORE_THRESH: f64 = 0.5;

/// A scored detection box in normalized center/size form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
    pub score: f64,
}

/// Per-anchor head output: a pre-sigmoid score and box offsets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawPrediction {
    pub logit: f64,
    pub tx: f64,
    pub ty: f64,
    pub tw: f64,
    pub th: f64,
}

impl From<[f64; 5]> for RawPrediction {
    fn from([logit, tx, ty, tw, th]: [f64; 5]) -> Self {
        Self { logit, tx, ty, tw, th }
    }
}

/// Axis-aligned rectangle given by center and size.
pub trait Rect {
    fn center_size(&self) -> (f64, f64, f64, f64);

    fn corners(&self) -> (f64, f64, f64, f64) {
        let (cx, cy, w, h) = self.center_size();
        (cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0)
    }
}

impl Rect for Anchor {
    fn center_size(&self) -> (f64, f64, f64, f64) {
        (self.cx, self.cy, self.w, self.h)
    }
}

impl Rect for BBox {
    fn center_size(&self) -> (f64, f64, f64, f64) {
        (self.cx, self.cy, self.w, self.h)
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn decode_box(raw: &RawPrediction, anchor: &Anchor, cfg: &AnchorConfig) -> Result<BBox> {
    let bbox = BBox {
        cx: anchor.cx + raw.tx * cfg.center_variance * anchor.w,
        cy: anchor.cy + raw.ty * cfg.center_variance * anchor.h,
        w: anchor.w * (raw.tw * cfg.size_variance).exp(),
        h: anchor.h * (raw.th * cfg.size_variance).exp(),
        score: sigmoid(raw.logit),
    };
    let finite = [bbox.cx, bbox.cy, bbox.w, bbox.h, bbox.score]
        .iter()
        .all(|v| v.is_finite());
    if !finite || bbox.w <= 0.0 || bbox.h <= 0.0 {
        return Err(Error::Decode(format!("degenerate box {bbox:?}")));
    }
    Ok(bbox)
}

pub fn iou(a: &impl Rect, b: &impl Rect) -> f64 {
    let (ax1, ay1, ax2, ay2) = a.corners();
    let (bx1, by1, bx2, by2) = b.corners();
    let iw = (ax2.min(bx2) - ax1.max(bx1)).max(0.0);
    let ih = (ay2.min(by2) - ay1.max(by1)).max(0.0);
    let inter = iw * ih;
    if inter <= 0.0 {
        return 0.0;
    }
    let union = (ax2 - ax1) * (ay2 - ay1) + (bx2 - bx1) * (by2 - by1) - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

/// Greedy non-maximum suppression. Boxes scoring below `score_thresh` are
/// dropped; equal scores keep input order. Output is sorted by descending
/// score.
pub fn nms(boxes: &[BBox], iou_thresh: f64, score_thresh: f64) -> Vec<BBox> {
    let mut order: Vec<usize> = (0..boxes.len())
        .filter(|&i| boxes[i].score >= score_thresh)
        .collect();
    // stable: ties stay in index order
    order.sort_by(|&a, &b| boxes[b].score.total_cmp(&boxes[a].score));

    let mut kept: Vec<BBox> = Vec::new();
    for i in order {
        let candidate = boxes[i];
        if kept.iter().all(|k| iou(k, &candidate) <= iou_thresh) {
            kept.push(candidate);
        }
    }
    kept
}

/// One image's worth of raw head output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictionRecord {
    pub anchors_cfg: AnchorConfig,
    pub preds: Vec<[f64; 5]>,
}

/// Decodes every anchor of a record and runs NMS over the result.
pub fn decode_predictions(
    record: &PredictionRecord,
    iou_thresh: f64,
    score_thresh: f64,
) -> Result<Vec<BBox>> {
    let anchors = generate_anchors(&record.anchors_cfg)?;
    if anchors.len() != record.preds.len() {
        return Err(Error::Dimension {
            expected: anchors.len(),
            got: record.preds.len(),
        });
    }
    let boxes = anchors
        .iter()
        .zip(&record.preds)
        .map(|(a, p)| decode_box(&RawPrediction::from(*p), a, &record.anchors_cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(nms(&boxes, iou_thresh, score_thresh))
}

/// Fraction of ground-truth boxes matched by the top-scoring detection of
/// their image at IoU ≥ `min_iou`. An image without detections counts as a
/// miss.
pub fn detection_accuracy(detections: &[Vec<BBox>], truth: &[BBox], min_iou: f64) -> Result<f64> {
    if detections.len() != truth.len() {
        return Err(Error::Dimension {
            expected: truth.len(),
            got: detections.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::Data("no images to score".into()));
    }
    let hits = detections
        .iter()
        .zip(truth)
        .filter(|(dets, gt)| {
            dets.iter()
                .max_by(|a, b| a.score.total_cmp(&b.score))
                .is_some_and(|best| iou(best, *gt) >= min_iou)
        })
        .count();
    Ok(hits as f64 / truth.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detect::AnchorLayer;

    fn cfg() -> AnchorConfig {
        AnchorConfig::new(vec![AnchorLayer {
            grid_w: 1,
            grid_h: 1,
            scales: vec![0.2],
            aspect_ratios: vec![1.0],
        }])
    }

    fn bx(cx: f64, cy: f64, w: f64, h: f64, score: f64) -> BBox {
        BBox { cx, cy, w, h, score }
    }

    #[test]
    fn zero_offsets_give_anchor() {
        let a = Anchor { cx: 0.3, cy: 0.7, w: 0.2, h: 0.1 };
        let b = decode_box(&[0.0; 5].into(), &a, &cfg()).unwrap();
        assert_eq!((b.cx, b.cy, b.w, b.h, b.score), (0.3, 0.7, 0.2, 0.1, 0.5));
    }

    #[test]
    fn center_offset_scaled_by_variance() {
        let a = Anchor { cx: 0.5, cy: 0.5, w: 0.2, h: 0.2 };
        let b = decode_box(&[0.0, 1.0, 0.0, 0.0, 0.0].into(), &a, &cfg()).unwrap();
        assert!((b.cx - 0.52).abs() < 1e-15);
    }

    #[test]
    fn size_offset_doubles_width() {
        let c = cfg();
        let a = Anchor { cx: 0.5, cy: 0.5, w: 0.2, h: 0.2 };
        let tw = std::f64::consts::LN_2 / c.size_variance;
        let b = decode_box(&[0.0, 0.0, 0.0, tw, 0.0].into(), &a, &c).unwrap();
        assert!((b.w - 0.4).abs() < 1e-15);
    }

    #[test]
    fn overflow_is_decode_error() {
        let a = Anchor { cx: 0.5, cy: 0.5, w: 0.2, h: 0.2 };
        let r = decode_box(&[0.0, 0.0, 0.0, 1e6, 0.0].into(), &a, &cfg());
        assert!(matches!(r, Err(Error::Decode(_))));
    }

    #[test]
    fn iou_cases() {
        let a = bx(0.5, 0.5, 1.0, 1.0, 1.0);
        assert_eq!(iou(&a, &a), 1.0);
        assert_eq!(iou(&a, &bx(3.0, 3.0, 1.0, 1.0, 1.0)), 0.0);
        let shifted = bx(1.0, 0.5, 1.0, 1.0, 1.0);
        assert!((iou(&a, &shifted) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn nms_basics() {
        assert!(nms(&[], 0.5, 0.0).is_empty());
        let a = bx(0.5, 0.5, 0.2, 0.2, 0.8);
        let b = bx(0.5, 0.5, 0.2, 0.2, 0.9);
        assert_eq!(nms(&[a, b], 0.5, 0.0), vec![b]);
        // below score threshold
        assert!(nms(&[bx(0.5, 0.5, 0.2, 0.2, 0.4)], 0.5, 0.5).is_empty());
    }

    #[test]
    fn nms_ties_prefer_lower_index() {
        let a = BBox { cx: 0.50, ..bx(0.5, 0.5, 0.2, 0.2, 0.7) };
        let b = BBox { cx: 0.51, ..a };
        assert_eq!(nms(&[a, b], 0.3, 0.0), vec![a]);
        assert_eq!(nms(&[b, a], 0.3, 0.0), vec![b]);
    }

    #[test]
    fn record_length_checked() {
        let rec = PredictionRecord {
            anchors_cfg: cfg(),
            preds: vec![[0.0; 5], [0.0; 5]],
        };
        assert!(matches!(
            decode_predictions(&rec, 0.3, 0.5),
            Err(Error::Dimension { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn accuracy_counts_top_box() {
        let gt = bx(0.5, 0.5, 0.2, 0.2, 1.0);
        let dets = vec![vec![gt], vec![], vec![bx(0.9, 0.9, 0.1, 0.1, 0.9)]];
        let acc = detection_accuracy(&dets, &[gt, gt, gt], 0.5).unwrap();
        assert!((acc - 1.0 / 3.0).abs() < 1e-15);
    }
}
