//! Posture-array gesture recognition: per-digit open/folded states,
//! first-match registry classification, and a debouncing event engine.

mod engine;
mod fingers;
mod registry;

pub use engine::{EngineState, GestureEngine};
pub use fingers::{
    cursor_point, finger_state, focal_point, posture_array, thumb_state, Finger,
    FingerStateParams,
};
pub use registry::{classify, frame_postures, GestureRegistry, HandPostures};
