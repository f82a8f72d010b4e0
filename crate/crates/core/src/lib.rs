//! Gesture control and palm verification on top of hand landmarks.
//!
//! * [`model`]: landmark frames, posture arrays, gesture definitions, JSONL codec
//! * [`detect`]: anchor tiling, box decoding, IoU/NMS, confidence-map peaks
//! * [`gesture`]: finger states, registry classification, debounced events
//! * [`auth`]: embedding encoder, triplet loss, Adam, enrollment, ROC sweep
//! * [`device`]: pan/tilt centering, command mapping, wire protocol
//! * [`harness`]: synthetic corpora and frame-level evaluation

pub mod auth;
pub mod detect;
pub mod device;
pub mod error;
pub mod gesture;
pub mod harness;
pub mod model;

pub use error::{Error, Result};
