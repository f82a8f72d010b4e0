use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::wire::{is_token_byte, MAX_TOKEN_LEN};
use crate::error::{Error, Result};
use crate::model::GestureEvent;

/// An appliance action, e.g. `(tv, POWER)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "MappingTokens")]
pub struct DeviceCommand {
    device: String,
    action: String,
}

#[derive(Deserialize)]
struct MappingTokens {
    device: String,
    action: String,
}

impl TryFrom<MappingTokens> for DeviceCommand {
    type Error = Error;

    fn try_from(t: MappingTokens) -> Result<Self> {
        DeviceCommand::new(&t.device, &t.action)
    }
}

fn check_token(field: &str, token: &str) -> Result<()> {
    if token.is_empty() || token.len() > MAX_TOKEN_LEN || !token.bytes().all(is_token_byte) {
        return Err(Error::validation(
            field,
            format!("{token:?} is not 1-{MAX_TOKEN_LEN} characters of [A-Za-z0-9_]"),
        ));
    }
    Ok(())
}

impl DeviceCommand {
    pub fn new(device: &str, action: &str) -> Result<Self> {
        check_token("device", device)?;
        check_token("action", action)?;
        Ok(Self {
            device: device.to_string(),
            action: action.to_string(),
        })
    }

    pub fn device_id(&self) -> &str {
        &self.device
    }

    pub fn action(&self) -> &str {
        &self.action
    }
}

/// One row of a mapping file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingEntry {
    pub gesture: String,
    pub device: String,
    pub action: String,
}

/// Gesture name → device command. Files are JSON arrays of
/// `{"gesture": .., "device": .., "action": ..}`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CommandMapping {
    table: HashMap<String, DeviceCommand>,
}

impl CommandMapping {
    pub fn new(entries: Vec<MappingEntry>) -> Result<Self> {
        let mut table = HashMap::with_capacity(entries.len());
        for (i, e) in entries.into_iter().enumerate() {
            let cmd = DeviceCommand::new(&e.device, &e.action)?;
            if table.insert(e.gesture.clone(), cmd).is_some() {
                return Err(Error::validation(
                    format!("mapping[{i}].gesture"),
                    format!("duplicate gesture {:?}", e.gesture),
                ));
            }
        }
        Ok(Self { table })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::new(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn get(&self, gesture: &str) -> Option<&DeviceCommand> {
        self.table.get(gesture)
    }
}

/// Looks up onset events only; offsets and unmapped gestures map to nothing.
pub fn map_gesture(event: &GestureEvent, mapping: &CommandMapping) -> Option<DeviceCommand> {
    if !event.is_onset() {
        return None;
    }
    mapping.get(&event.name).cloned()
}
