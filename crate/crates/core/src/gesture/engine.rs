use super::fingers::{cursor_point, FingerStateParams};
use super::registry::{classify, frame_postures, GestureRegistry};
use crate::error::{Error, Result};
use crate::model::{GestureEvent, HandFrame, Point2};

/// Debounce state for one frame stream.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EngineState {
    /// Gesture the recent frames agree on, and for how many consecutive frames.
    candidate: Option<String>,
    run: u32,
    /// Fired gesture awaiting its offset, with its onset time.
    active: Option<(String, u64)>,
    last_cursor: Option<Point2>,
    last_t: Option<u64>,
}

impl EngineState {
    pub fn active(&self) -> Option<&str> {
        self.active.as_ref().map(|(name, _)| name.as_str())
    }

    pub fn run_length(&self) -> u32 {
        self.run
    }

    pub fn last_cursor(&self) -> Option<Point2> {
        self.last_cursor
    }

    /// Advances by one frame. A gesture fires once `hold_frames` consecutive
    /// frames classify to it and closes on the first frame that does not.
    pub fn step(
        &mut self,
        frame: &HandFrame,
        registry: &GestureRegistry,
        params: &FingerStateParams,
    ) -> Result<Vec<GestureEvent>> {
        if let Some(previous) = self.last_t {
            if frame.t_ms <= previous {
                return Err(Error::StreamOrder {
                    previous,
                    got: frame.t_ms,
                });
            }
        }
        self.last_t = Some(frame.t_ms);

        let cursor = frame.primary_hand().map(cursor_point);
        if cursor.is_some() {
            self.last_cursor = cursor;
        }

        let def = classify(&frame_postures(frame, params), registry);
        let label = def.map(|d| d.name.as_str());
        let mut events = Vec::new();

        if let Some((name, onset)) = &self.active {
            if label == Some(name.as_str()) {
                return Ok(events);
            }
            events.push(GestureEvent {
                name: name.clone(),
                onset_ms: *onset,
                offset_ms: Some(frame.t_ms),
                cursor: None,
            });
            self.active = None;
            self.candidate = None;
            self.run = 0;
        }

        match def {
            None => {
                self.candidate = None;
                self.run = 0;
            }
            Some(def) => {
                if self.candidate.as_deref() == Some(def.name.as_str()) {
                    self.run += 1;
                } else {
                    self.candidate = Some(def.name.clone());
                    self.run = 1;
                }
                if self.run >= def.hold_frames {
                    self.active = Some((def.name.clone(), frame.t_ms));
                    events.push(GestureEvent {
                        name: def.name.clone(),
                        onset_ms: frame.t_ms,
                        offset_ms: None,
                        cursor,
                    });
                }
            }
        }
        Ok(events)
    }
}

/// An [`EngineState`] bundled with the registry and thresholds it runs against.
#[derive(Debug, Clone)]
pub struct GestureEngine {
    registry: GestureRegistry,
    params: FingerStateParams,
    state: EngineState,
}

impl GestureEngine {
    pub fn new(registry: GestureRegistry, params: FingerStateParams) -> Self {
        Self {
            registry,
            params,
            state: EngineState::default(),
        }
    }

    pub fn state(&self) -> &EngineState {
        &self.state
    }

    pub fn registry(&self) -> &GestureRegistry {
        &self.registry
    }

    pub fn step(&mut self, frame: &HandFrame) -> Result<Vec<GestureEvent>> {
        self.state.step(frame, &self.registry, &self.params)
    }
}
