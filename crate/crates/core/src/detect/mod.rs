//! Single-shot detector post-processing and confidence-map keypoint decoding.
//!
//! Nothing here runs a network: score/offset grids and confidence maps are
//! read from files and turned into boxes and landmarks.

mod anchors;
mod boxes;
mod keypoints;

pub use anchors::{generate_anchors, Anchor, AnchorConfig, AnchorLayer};
pub use boxes::{
    decode_box, decode_predictions, detection_accuracy, iou, nms, BBox, PredictionRecord,
    RawPrediction, Rect, DEFAULT_IOU_THRESH, DEFAULT_SCORE_THRESH,
};
pub use keypoints::{decode_keypoints, ConfidenceMap, ConfidenceMapRecord};
