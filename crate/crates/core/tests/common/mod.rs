#![allow(dead_code)]

use palmgest::detect::BBox;
use rand::Rng;

pub fn iou_ref(a: &BBox, b: &BBox) -> f64 {
    let (ax1, ay1, ax2, ay2) = (a.cx - a.w / 2.0, a.cy - a.h / 2.0, a.cx + a.w / 2.0, a.cy + a.h / 2.0);
    let (bx1, by1, bx2, by2) = (b.cx - b.w / 2.0, b.cy - b.h / 2.0, b.cx + b.w / 2.0, b.cy + b.h / 2.0);
    let iw = (ax2.min(bx2) - ax1.max(bx1)).max(0.0);
    let ih = (ay2.min(by2) - ay1.max(by1)).max(0.0);
    let inter = iw * ih;
    if inter <= 0.0 {
        return 0.0;
    }
    let union = (ax2 - ax1) * (ay2 - ay1) + (bx2 - bx1) * (by2 - by1) - inter;
    (inter / union).clamp(0.0, 1.0)
}

/// Literal greedy loop: pick the best remaining box, discard its overlaps.
pub fn nms_oracle(boxes: &[BBox], iou_thresh: f64, score_thresh: f64) -> Vec<BBox> {
    let mut remaining: Vec<usize> = (0..boxes.len()).filter(|&i| boxes[i].score >= score_thresh).collect();
    let mut out = Vec::new();
    while !remaining.is_empty() {
        let mut best_pos = 0;
        for (pos, &i) in remaining.iter().enumerate() {
            let best = remaining[best_pos];
            if boxes[i].score > boxes[best].score || (boxes[i].score == boxes[best].score && i < best) {
                best_pos = pos;
            }
        }
        let best = remaining.remove(best_pos);
        out.push(boxes[best]);
        remaining.retain(|&j| iou_ref(&boxes[best], &boxes[j]) <= iou_thresh);
    }
    out
}

pub fn random_boxes(rng: &mut impl Rng, n: usize) -> Vec<BBox> {
    (0..n)
        .map(|_| BBox {
            cx: rng.random(),
            cy: rng.random(),
            w: rng.random_range(0.01..0.3),
            h: rng.random_range(0.01..0.3),
            // coarse scores so ties actually occur
            score: (rng.random_range(0..=100) as f64) / 100.0,
        })
        .collect()
}
